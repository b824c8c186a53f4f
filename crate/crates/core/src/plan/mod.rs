//! Contraction plans: cuts, contraction steps with reuse annotations, path
//! enumeration, execution and cost estimation.
//!
//! Plan files are line oriented (`#` starts a comment):
//!
//! ```text
//! cut s3-s4                 # cut the bond between sites 3 and 4
//! cut s9-s10 values 0,2     # restrict a cut to some of its values
//! batch s20,s21             # sites whose output bits vary within a batch
//! loop s3-s4                # loop order, outermost first
//! loop s9-s10
//! contract s0,s1,s3 -> A reuse:global
//! contract s2,s4,A -> AB
//! output AB
//! ```
//!
//! `sN` names the site with grid id `N`. A step contracts its operands
//! (sites or earlier results) into a named intermediate. Every cut label is
//! fixed on the site tensors that carry it, so a step depends on the cuts
//! that touch any site below it; `reuse:global` asserts a step depends on no
//! cut and `reuse:outer` that it does not depend on the innermost loop.
//! The executor caches every step result and recomputes it only when the
//! values it depends on change; the annotations are checked, not required.

mod builtin;
mod cost;
mod exec;
mod paths;

pub use builtin::{auto_plan, builtin_plan, grid_quadrant_plan, region_plan, RegionSpec, MAX_AUTO_PATHS};
pub use cost::{estimate_cost, step_order, CostEstimate, StepCost, Sym, FLOPS_PER_MULTIPLY_ADD};
pub use exec::{check_budget, execute_path, run_paths, ExecOptions, PathContribution};
pub use paths::{enumerate_paths, select_paths, PathSelection, PathSpace, MAX_LISTED_PATHS};

use crate::circuits::Lattice;
use crate::error::{invalid, Error, Result};
use crate::network::{label, NetworkShape};
use crate::tensor::Label;
use std::collections::BTreeSet;
use std::fmt::Write;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    /// Sites joined by the cut bond, `u < v`.
    pub sites: (usize, usize),
    /// Restriction to a subset of values; `None` means all of them.
    pub values: Option<Vec<usize>>,
}

impl Cut {
    pub fn label(&self) -> Label {
        label::bond(self.sites.0, self.sites.1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reuse {
    None,
    Outer,
    Global,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operand {
    Site(usize),
    /// Result of an earlier step.
    Step(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub inputs: Vec<Operand>,
    pub name: String,
    pub reuse: Reuse,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionPlan {
    pub cuts: Vec<Cut>,
    /// Cut indexes in loop order, outermost first.
    pub loops: Vec<usize>,
    pub steps: Vec<Step>,
    /// Index of the step whose result is the path contribution.
    pub output: usize,
    /// Sites whose output bits vary within a batch (region C).
    pub batch: Vec<usize>,
}

/// What each step depends on: cut indexes and batch sites.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Deps {
    pub cuts: BTreeSet<usize>,
    pub batch: BTreeSet<usize>,
}

fn site_name(lat: &Lattice, q: usize) -> String {
    format!("s{}", lat.grid_id(q))
}

fn parse_site(lat: &Lattice, s: &str) -> Option<usize> {
    lat.qubit_of_grid_id(s.strip_prefix('s')?.parse().ok()?)
}

impl ContractionPlan {
    /// Cuts in loop order.
    pub fn looped_cuts(&self) -> impl Iterator<Item = &Cut> {
        self.loops.iter().map(|&c| &self.cuts[c])
    }

    pub fn cut_name(&self, lat: &Lattice, c: usize) -> String {
        let (u, v) = self.cuts[c].sites;
        let (a, b) = (lat.grid_id(u).min(lat.grid_id(v)), lat.grid_id(u).max(lat.grid_id(v)));
        format!("s{a}-s{b}")
    }

    pub fn parse(text: &str, lat: &Lattice) -> Result<Self> {
        let mut cuts: Vec<Cut> = Vec::new();
        let mut loops = Vec::new();
        let mut steps: Vec<Step> = Vec::new();
        let mut output = None;
        let mut batch = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let toks: Vec<&str> = line.split_whitespace().collect();
            let find_cut = |name: &str, cuts: &[Cut]| -> Result<usize> {
                let (a, b) = name.split_once('-').ok_or_else(|| err(format!("bad cut name `{name}`")))?;
                let (u, v) = match (parse_site(lat, a), parse_site(lat, b)) {
                    (Some(u), Some(v)) => (u.min(v), u.max(v)),
                    _ => return Err(err(format!("unknown site in `{name}`"))),
                };
                cuts.iter()
                    .position(|c| c.sites == (u, v))
                    .ok_or_else(|| err(format!("cut `{name}` not declared")))
            };
            match toks[0] {
                "cut" => {
                    let name = toks.get(1).ok_or_else(|| err("cut needs a bond".into()))?;
                    let (a, b) = name.split_once('-').ok_or_else(|| err(format!("bad bond `{name}`")))?;
                    let (u, v) = match (parse_site(lat, a), parse_site(lat, b)) {
                        (Some(u), Some(v)) if lat.adjacent(u, v) => (u.min(v), u.max(v)),
                        _ => return Err(err(format!("`{name}` is not a lattice bond"))),
                    };
                    let values = match toks.get(2..) {
                        Some(["values", list]) => Some(
                            list.split(',')
                                .map(|x| x.parse::<usize>().map_err(|_| err(format!("bad value `{x}`"))))
                                .collect::<Result<Vec<_>>>()?,
                        ),
                        Some([]) => None,
                        _ => return Err(err("expected `cut <bond> [values v0,v1,...]`".into())),
                    };
                    if cuts.iter().any(|c| c.sites == (u, v)) {
                        return Err(err(format!("cut `{name}` declared twice")));
                    }
                    cuts.push(Cut { sites: (u, v), values });
                }
                "loop" => {
                    let name = toks.get(1).ok_or_else(|| err("loop needs a cut".into()))?;
                    loops.push(find_cut(name, &cuts)?);
                }
                "batch" => {
                    for s in toks[1..].iter().flat_map(|t| t.split(',')).filter(|s| !s.is_empty()) {
                        batch.push(parse_site(lat, s).ok_or_else(|| err(format!("unknown site `{s}`")))?);
                    }
                }
                "contract" => {
                    let arrow = toks.iter().position(|&t| t == "->").ok_or_else(|| err("missing `->`".into()))?;
                    let name = toks.get(arrow + 1).ok_or_else(|| err("missing result name".into()))?;
                    let reuse = match toks.get(arrow + 2..) {
                        Some([]) => Reuse::None,
                        Some(["reuse:outer"]) => Reuse::Outer,
                        Some(["reuse:global"]) => Reuse::Global,
                        _ => return Err(err("expected `[reuse:outer|reuse:global]` after the name".into())),
                    };
                    let mut inputs = Vec::new();
                    for s in toks[1..arrow].iter().flat_map(|t| t.split(',')).filter(|s| !s.is_empty()) {
                        let op = if let Some(k) = steps.iter().position(|st| st.name == s) {
                            Operand::Step(k)
                        } else if let Some(q) = parse_site(lat, s) {
                            Operand::Site(q)
                        } else {
                            return Err(err(format!("unknown tensor `{s}`")));
                        };
                        inputs.push(op);
                    }
                    if steps.iter().any(|st| st.name == *name) || parse_site(lat, name).is_some() {
                        return Err(err(format!("name `{name}` already in use")));
                    }
                    steps.push(Step { inputs, name: name.to_string(), reuse });
                }
                "output" => {
                    let name = toks.get(1).ok_or_else(|| err("output needs a name".into()))?;
                    output = Some(
                        steps
                            .iter()
                            .position(|st| st.name == *name)
                            .ok_or_else(|| err(format!("unknown tensor `{name}`")))?,
                    );
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        if loops.is_empty() {
            loops = (0..cuts.len()).collect();
        }
        let output = match output {
            Some(o) => o,
            None if !steps.is_empty() => steps.len() - 1,
            None => return invalid("plan has no contraction steps"),
        };
        batch.sort_unstable();
        batch.dedup();
        Ok(ContractionPlan { cuts, loops, steps, output, batch })
    }

    pub fn write(&self, lat: &Lattice) -> String {
        let mut s = String::new();
        for (i, c) in self.cuts.iter().enumerate() {
            write!(s, "cut {}", self.cut_name(lat, i)).unwrap();
            if let Some(v) = &c.values {
                let v: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(s, " values {}", v.join(",")).unwrap();
            }
            s.push('\n');
        }
        if !self.batch.is_empty() {
            let b: Vec<String> = self.batch.iter().map(|&q| site_name(lat, q)).collect();
            writeln!(s, "batch {}", b.join(",")).unwrap();
        }
        for &l in &self.loops {
            writeln!(s, "loop {}", self.cut_name(lat, l)).unwrap();
        }
        for st in &self.steps {
            let ins: Vec<String> = st
                .inputs
                .iter()
                .map(|op| match *op {
                    Operand::Site(q) => site_name(lat, q),
                    Operand::Step(k) => self.steps[k].name.clone(),
                })
                .collect();
            write!(s, "contract {} -> {}", ins.join(","), st.name).unwrap();
            match st.reuse {
                Reuse::None => {}
                Reuse::Outer => s.push_str(" reuse:outer"),
                Reuse::Global => s.push_str(" reuse:global"),
            }
            s.push('\n');
        }
        writeln!(s, "output {}", self.steps[self.output].name).unwrap();
        s
    }

    /// Dependencies of every step.
    pub fn deps(&self) -> Vec<Deps> {
        let mut out: Vec<Deps> = Vec::with_capacity(self.steps.len());
        for st in &self.steps {
            let mut d = Deps::default();
            for op in &st.inputs {
                match *op {
                    Operand::Site(q) => {
                        for (ci, c) in self.cuts.iter().enumerate() {
                            if c.sites.0 == q || c.sites.1 == q {
                                d.cuts.insert(ci);
                            }
                        }
                        if self.batch.contains(&q) {
                            d.batch.insert(q);
                        }
                    }
                    Operand::Step(k) => {
                        d.cuts.extend(out[k].cuts.iter().copied());
                        d.batch.extend(out[k].batch.iter().copied());
                    }
                }
            }
            out.push(d);
        }
        out
    }

    /// Checks the plan against a network shape: every site and every
    /// intermediate is consumed exactly once, cuts name real bonds with
    /// in-range values, reuse annotations are sound, and the output carries
    /// no index once cuts and batch bits are fixed.
    pub fn validate(&self, shape: &NetworkShape) -> Result<()> {
        let n = shape.labels.len();
        let mut site_uses = vec![0usize; n];
        let mut step_uses = vec![0usize; self.steps.len()];
        for (k, st) in self.steps.iter().enumerate() {
            if st.inputs.is_empty() {
                return invalid(format!("step `{}` has no operands", st.name));
            }
            for op in &st.inputs {
                match *op {
                    Operand::Site(q) if q < n => site_uses[q] += 1,
                    Operand::Site(q) => return invalid(format!("site {q} out of range")),
                    Operand::Step(j) if j < k => step_uses[j] += 1,
                    Operand::Step(_) => return invalid(format!("step `{}` uses a later result", st.name)),
                }
            }
        }
        if let Some(q) = site_uses.iter().position(|&u| u != 1) {
            return invalid(format!("site {q} is used {} times (must be exactly once)", site_uses[q]));
        }
        for (k, &u) in step_uses.iter().enumerate() {
            let want = (k != self.output) as usize;
            if u != want {
                return invalid(format!("result `{}` is used {u} times", self.steps[k].name));
            }
        }
        for (i, c) in self.cuts.iter().enumerate() {
            let dim = shape
                .dim_of(c.label())
                .ok_or_else(|| Error::Invalid(format!("cut {i} is not a bond of the network")))?;
            if let Some(v) = &c.values {
                if v.is_empty() || v.iter().any(|&x| x >= dim) {
                    return invalid(format!("cut {i}: values must be nonempty and below {dim}"));
                }
                let distinct: BTreeSet<_> = v.iter().collect();
                if distinct.len() != v.len() {
                    return invalid(format!("cut {i}: repeated values"));
                }
            }
        }
        let mut looped = self.loops.clone();
        looped.sort_unstable();
        if looped != (0..self.cuts.len()).collect::<Vec<_>>() {
            return invalid("every cut must be looped over exactly once");
        }
        let deps = self.deps();
        let innermost = self.loops.last().copied();
        for (st, d) in self.steps.iter().zip(&deps) {
            match st.reuse {
                Reuse::Global if !d.cuts.is_empty() => {
                    return invalid(format!("`{}` is marked reuse:global but depends on a cut", st.name))
                }
                Reuse::Outer if innermost.is_some_and(|c| d.cuts.contains(&c)) => {
                    return invalid(format!("`{}` is marked reuse:outer but depends on the innermost loop", st.name))
                }
                _ => {}
            }
        }
        for (q, ls) in shape.labels.iter().enumerate() {
            for &l in ls {
                if let Some(s) = label::out_site(l) {
                    if !self.batch.contains(&s) {
                        return invalid(format!("site {q} has an open output but is not in the batch region"));
                    }
                }
            }
        }
        let syms = cost::sliced_sites(shape, self);
        let out = cost::simulate(&syms, self)?;
        if !out[self.output].result.labels.is_empty() {
            return invalid("the output step leaves open indexes");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::DepthSpec;

    fn toy() -> (Lattice, NetworkShape) {
        let l = Lattice::grid(2, 2).unwrap();
        let s = NetworkShape::of_rqc(&l, DepthSpec::new(8), &[]);
        (l, s)
    }

    #[test]
    fn parse_write_round_trip() {
        let (l, s) = toy();
        let text = "cut s0-s1 values 0\ncut s2-s3\nloop s0-s1\nloop s2-s3\ncontract s0,s1 -> A reuse:outer\ncontract s2,s3 -> B\ncontract A,B -> X\noutput X\n";
        let p = ContractionPlan::parse(text, &l).unwrap();
        assert_eq!(p.write(&l), text);
        p.validate(&s).unwrap();
        let d = p.deps();
        assert!(d[0].cuts.contains(&0) && d[1].cuts.contains(&1));
    }

    #[test]
    fn unsound_reuse_rejected() {
        let (l, s) = toy();
        let p = ContractionPlan::parse("cut s0-s1\ncontract s0,s2 -> A reuse:global\ncontract s1,s3,A -> X\n", &l).unwrap();
        assert!(p.validate(&s).is_err());
    }

    #[test]
    fn every_site_exactly_once() {
        let (l, s) = toy();
        let p = ContractionPlan::parse("contract s0,s1,s2 -> X\n", &l).unwrap();
        assert!(p.validate(&s).is_err());
        let p = ContractionPlan::parse("contract s0,s1,s2,s3,s3 -> X\n", &l).unwrap();
        assert!(p.validate(&s).is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let (l, _) = toy();
        let r = ContractionPlan::parse("cut s0-s1\nloop s0-s2\n", &l);
        assert!(matches!(r, Err(Error::Parse { line: 2, .. })));
        assert!(ContractionPlan::parse("cut s0-s3\n", &l).is_err());
        assert!(ContractionPlan::parse("frobnicate\n", &l).is_err());
    }

    #[test]
    fn cut_values_checked() {
        let (l, s) = toy();
        let p = ContractionPlan::parse("cut s0-s1 values 0,2\ncontract s0,s1,s2,s3 -> X\n", &l).unwrap();
        assert!(p.validate(&s).is_err());
    }
}
