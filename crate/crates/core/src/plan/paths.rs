//! Paths: one value per cut, enumerated in loop order.

use super::ContractionPlan;
use crate::error::{invalid, Error, Result};
use crate::network::NetworkShape;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Values taken by each looped cut, outermost loop first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathSpace {
    pub ranges: Vec<Vec<usize>>,
}

impl PathSpace {
    pub fn new(plan: &ContractionPlan, shape: &NetworkShape) -> Result<Self> {
        let ranges = plan
            .looped_cuts()
            .map(|c| match &c.values {
                Some(v) => Ok(v.clone()),
                None => match shape.dim_of(c.label()) {
                    Some(d) => Ok((0..d).collect()),
                    None => invalid(format!("cut {:?} is not a bond of the network", c.sites)),
                },
            })
            .collect::<Result<_>>()?;
        Ok(PathSpace { ranges })
    }

    pub fn total(&self) -> usize {
        self.ranges.iter().fold(1usize, |acc, r| acc.saturating_mul(r.len()))
    }

    /// Path number `i` in lexicographic loop order.
    pub fn path(&self, mut i: usize) -> Vec<usize> {
        let mut p = vec![0; self.ranges.len()];
        for (k, r) in self.ranges.iter().enumerate().rev() {
            p[k] = r[i % r.len()];
            i /= r.len();
        }
        p
    }
}

/// Which paths to sum.
#[derive(Clone, Debug, PartialEq)]
pub enum PathSelection {
    All,
    /// A fraction `f` in (0, 1]: `ceil(f * total)` paths drawn uniformly
    /// without replacement with the given seed.
    Fraction { f: f64, seed: u64 },
    /// Explicit path numbers in lexicographic loop order.
    Indexes(Vec<usize>),
}

/// Every path, in loop order.
pub fn enumerate_paths(space: &PathSpace) -> Vec<Vec<usize>> {
    (0..space.total()).map(|i| space.path(i)).collect()
}

/// Largest number of paths summed in one evaluation.
pub const MAX_LISTED_PATHS: usize = 1 << 32;

/// Selected path numbers, ascending.
pub fn select_paths(space: &PathSpace, sel: &PathSelection) -> Result<Vec<usize>> {
    let total = space.total();
    match sel {
        PathSelection::All if total > MAX_LISTED_PATHS => {
            Err(Error::Resource(format!("{total} paths exceed the limit of {MAX_LISTED_PATHS} per evaluation")))
        }
        PathSelection::All => Ok((0..total).collect()),
        PathSelection::Fraction { f, seed } => {
            if !(*f > 0.0 && *f <= 1.0) {
                return invalid(format!("path fraction {f} outside (0, 1]"));
            }
            // The small slack keeps fractions such as 21/4096 from rounding up
            // to one path too many through floating error.
            let k = ((f * total as f64 - 1e-9).ceil() as usize).clamp(1, total);
            if k > MAX_LISTED_PATHS {
                return Err(Error::Resource(format!("{k} paths exceed the limit of {MAX_LISTED_PATHS} per evaluation")));
            }
            if k == total {
                return Ok((0..total).collect());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut v = rand::seq::index::sample(&mut rng, total, k).into_vec();
            v.sort_unstable();
            Ok(v)
        }
        PathSelection::Indexes(v) => {
            if v.is_empty() {
                return invalid("empty path list");
            }
            if let Some(i) = v.iter().find(|&&i| i >= total) {
                return invalid(format!("path {i} out of range {total}"));
            }
            let mut v = v.clone();
            v.sort_unstable();
            v.dedup();
            Ok(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(dims: &[usize]) -> PathSpace {
        PathSpace { ranges: dims.iter().map(|&d| (0..d).collect()).collect() }
    }

    #[test]
    fn full_enumeration_is_distinct() {
        let s = space(&[16, 16]);
        let all = enumerate_paths(&s);
        assert_eq!(all.len(), 256);
        let set: std::collections::BTreeSet<_> = all.iter().collect();
        assert_eq!(set.len(), 256);
        assert_eq!(all[17], vec![1, 1]);
    }

    #[test]
    fn fractions_round_up() {
        let s = space(&[16, 16, 16]);
        let sel = select_paths(&s, &PathSelection::Fraction { f: 21.0 / 4096.0, seed: 3 }).unwrap();
        assert_eq!(sel.len(), 21);
        let s70 = space(&[16; 4]);
        let one = select_paths(&s70, &PathSelection::Fraction { f: 1.0 / 65536.0, seed: 3 }).unwrap();
        assert_eq!(one.len(), 1);
        let a = select_paths(&s, &PathSelection::Fraction { f: 0.3, seed: 9 }).unwrap();
        let b = select_paths(&s, &PathSelection::Fraction { f: 0.3, seed: 9 }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), (0.3f64 * 4096.0).ceil() as usize);
        assert!(select_paths(&s, &PathSelection::Fraction { f: 0.0, seed: 0 }).is_err());
        assert!(select_paths(&s, &PathSelection::Fraction { f: 1.5, seed: 0 }).is_err());
    }

    #[test]
    fn restricted_values_are_used() {
        let s = PathSpace { ranges: vec![vec![1, 3], vec![0, 2, 5]] };
        assert_eq!(s.total(), 6);
        assert_eq!(s.path(4), vec![3, 2]);
    }
}
