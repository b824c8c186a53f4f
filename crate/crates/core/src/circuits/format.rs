//! Line-oriented circuit files.
//!
//! ```text
//! 16
//! # lattice: grid:4x4
//! # depth: 1+8+1
//! # rng: chacha8
//! # seed: 7
//! 0 h 0
//! 1 cz 0 1
//! ```
//! The first non-comment line is the qubit count; each further line is
//! `<cycle> <gate> <q0> [<q1>]` with qubit ids taken row-major on the
//! lattice's bounding grid. Header comments carry the lattice and depth so a
//! file can be read back without extra arguments.

use super::{Circuit, DepthSpec, Gate, GateKind, Lattice, RNG_NAME};
use crate::error::{invalid, Error, Result};
use std::fmt::Write;

pub fn write_circuit(c: &Circuit) -> String {
    let mut s = String::new();
    writeln!(s, "{}", c.n()).unwrap();
    match c.lattice.spec() {
        Some(spec) => writeln!(s, "# lattice: {spec}").unwrap(),
        None => {
            let sites: Vec<String> = c.lattice.sites().iter().map(|(r, col)| format!("{r},{col}")).collect();
            writeln!(s, "# sites: {}", sites.join(";")).unwrap();
        }
    }
    writeln!(s, "# depth: {}", c.depth).unwrap();
    writeln!(s, "# rng: {RNG_NAME}").unwrap();
    if let Some(seed) = c.seed {
        writeln!(s, "# seed: {seed}").unwrap();
    }
    for g in &c.gates {
        write!(s, "{} {} {}", g.cycle, g.kind.name(), c.lattice.grid_id(g.q0)).unwrap();
        if let Some(b) = g.q1 {
            write!(s, " {}", c.lattice.grid_id(b)).unwrap();
        }
        s.push('\n');
    }
    s
}

fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    line.trim_start_matches('#')
        .trim()
        .strip_prefix(key)
        .and_then(|r| r.trim_start().strip_prefix(':'))
        .map(str::trim)
}

/// Parses a circuit file. `lattice` overrides the header's lattice.
pub fn parse_circuit(text: &str, lattice: Option<&Lattice>) -> Result<Circuit> {
    let mut header_lattice = None;
    let mut depth = None;
    let mut seed = None;
    for line in text.lines().filter(|l| l.trim_start().starts_with('#')) {
        if let Some(v) = header_value(line, "lattice") {
            header_lattice = Some(Lattice::from_spec(v)?);
        } else if let Some(v) = header_value(line, "sites") {
            let sites = v
                .split(';')
                .map(|p| {
                    let (r, c) = p.split_once(',')?;
                    Some((r.trim().parse().ok()?, c.trim().parse().ok()?))
                })
                .collect::<Option<Vec<(i32, i32)>>>()
                .ok_or_else(|| Error::Invalid("bad `sites` header".into()))?;
            header_lattice = Some(Lattice::from_sites(super::LatticeKind::Explicit, sites)?);
        } else if let Some(v) = header_value(line, "depth") {
            depth = Some(DepthSpec::parse(v)?);
        } else if let Some(v) = header_value(line, "seed") {
            seed = v.parse().ok();
        }
    }
    let lattice = match (lattice, header_lattice) {
        (Some(l), _) => l.clone(),
        (None, Some(l)) => l,
        (None, None) => return invalid("no lattice given and none in the file header"),
    };
    let mut count = None;
    let mut gates = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if count.is_none() {
            let n: usize = toks[0].parse().map_err(|_| err(format!("expected qubit count, got `{line}`")))?;
            if toks.len() != 1 || n != lattice.len() {
                return Err(err(format!("qubit count {n} does not match lattice size {}", lattice.len())));
            }
            count = Some(n);
            continue;
        }
        if toks.len() < 3 || toks.len() > 4 {
            return Err(err(format!("expected `<cycle> <gate> <q0> [<q1>]`, got `{line}`")));
        }
        let cycle: usize = toks[0].parse().map_err(|_| err(format!("bad cycle `{}`", toks[0])))?;
        let kind = GateKind::from_name(toks[1]).ok_or_else(|| err(format!("unknown gate `{}`", toks[1])))?;
        let qubit = |t: &str| -> Result<usize> {
            let id: usize = t.parse().map_err(|_| err(format!("bad qubit id `{t}`")))?;
            lattice
                .qubit_of_grid_id(id)
                .ok_or_else(|| err(format!("qubit id {id} is not a lattice site")))
        };
        let q0 = qubit(toks[2])?;
        let q1 = toks.get(3).map(|t| qubit(t)).transpose()?;
        if kind.arity() != 1 + q1.is_some() as usize {
            return Err(err(format!("gate `{}` takes {} qubit(s)", toks[1], kind.arity())));
        }
        if let Some(b) = q1 {
            if !lattice.adjacent(q0, b) {
                return Err(Error::NotAdjacent(lattice.grid_id(q0), lattice.grid_id(b)));
            }
        }
        gates.push(Gate { kind, q0, q1, cycle });
    }
    if count.is_none() {
        return invalid("empty circuit file");
    }
    let depth = match depth {
        Some(d) => d,
        None => DepthSpec::new(gates.iter().map(|g| g.cycle).max().unwrap_or(1).saturating_sub(1)),
    };
    Circuit::new(lattice, depth, gates, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::generate_rqc;

    #[test]
    fn round_trip_is_exact() {
        for spec in ["grid:4x4", "bristlecone:24"] {
            let l = Lattice::from_spec(spec).unwrap();
            let c = generate_rqc(&l, DepthSpec::new(12), 5).unwrap();
            let text = write_circuit(&c);
            let back = parse_circuit(&text, None).unwrap();
            assert_eq!(back, c);
            assert_eq!(write_circuit(&back), text);
        }
    }

    #[test]
    fn hadamard_layer_parses() {
        let mut text = String::from("16\n");
        for q in 0..16 {
            text.push_str(&format!("0 h {q}\n"));
        }
        let l = Lattice::grid(4, 4).unwrap();
        let c = parse_circuit(&text, Some(&l)).unwrap();
        assert_eq!(c.gates.len(), 16);
        assert!(c.gates.iter().all(|g| g.kind == GateKind::H && g.cycle == 0));
    }

    #[test]
    fn non_adjacent_pair_rejected() {
        let l = Lattice::grid(4, 4).unwrap();
        let r = parse_circuit("16\n0 cz 0 5\n", Some(&l));
        assert!(matches!(r, Err(Error::NotAdjacent(0, 5))));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let l = Lattice::grid(2, 2).unwrap();
        let r = parse_circuit("4\n0 h 0\n0 foo 1\n", Some(&l));
        assert!(matches!(r, Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn duplicate_qubit_in_cycle_rejected() {
        let l = Lattice::grid(2, 2).unwrap();
        let r = parse_circuit("4\n1 cz 0 1\n1 t 1\n", Some(&l));
        assert!(matches!(r, Err(Error::DuplicateQubit { cycle: 1, qubit: 1 })));
    }
}
