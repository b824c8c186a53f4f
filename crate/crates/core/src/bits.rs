//! Bit-strings over the qubits of a circuit; bit `q` belongs to qubit `q`.

use crate::error::{invalid, Result};
use rand::Rng;

pub type Bits = Vec<u8>;

/// Parses a string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Result<Bits> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => invalid(format!("bad bit `{c}` in `{s}`")),
        })
        .collect()
}

pub fn format_bits(b: &[u8]) -> String {
    b.iter().map(|&x| if x == 0 { '0' } else { '1' }).collect()
}

pub fn zeros(n: usize) -> Bits {
    vec![0; n]
}

pub fn random_bits<R: Rng>(n: usize, rng: &mut R) -> Bits {
    (0..n).map(|_| rng.gen_range(0..2u8)).collect()
}

/// Index of `b` with qubit 0 as the most significant bit.
pub fn to_index(b: &[u8]) -> usize {
    b.iter().fold(0, |acc, &x| (acc << 1) | x as usize)
}

pub fn from_index(mut i: usize, n: usize) -> Bits {
    let mut b = vec![0; n];
    for q in (0..n).rev() {
        b[q] = (i & 1) as u8;
        i >>= 1;
    }
    b
}

pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for i in 0..64 {
            assert_eq!(to_index(&from_index(i, 6)), i);
        }
        assert_eq!(to_index(&[1, 0, 0]), 4);
        assert_eq!(format_bits(&parse_bits("0110").unwrap()), "0110");
        assert!(parse_bits("01x").is_err());
        assert_eq!(hamming(&[0, 1, 1], &[1, 1, 0]), 2);
    }
}
