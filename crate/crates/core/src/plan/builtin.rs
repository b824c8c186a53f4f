//! Built-in plans.
//!
//! Bristlecone lattices split into a lower region C (the batch region) and
//! an upper region divided by column into A and B, with the topmost A-B
//! bonds cut. Large grids use a quadrant layout with two cuts. Anything
//! else gets a generated region plan with as many cuts as the memory budget
//! needs.

use super::cost::{simulate, sliced_sites};
use super::{ContractionPlan, Cut, Operand, Reuse, Step};
use crate::circuits::{DepthSpec, Lattice, LatticeKind};
use crate::error::{invalid, Error, Result};
use crate::network::{label, NetworkShape};

/// Three regions and the bonds to cut. Steps are `A`, `B`, `AB = A.B`, `C`
/// and the output `AB.C`; empty regions are skipped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionSpec {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    pub cuts: Vec<(usize, usize)>,
}

fn step(inputs: Vec<Operand>, name: &str) -> Step {
    Step { inputs, name: name.to_string(), reuse: Reuse::None }
}

fn sites(qs: &[usize]) -> Vec<Operand> {
    qs.iter().map(|&q| Operand::Site(q)).collect()
}

fn cuts_of(pairs: &[(usize, usize)]) -> Result<Vec<Cut>> {
    let mut cuts: Vec<Cut> = Vec::new();
    for &(u, v) in pairs {
        let c = Cut { sites: (u.min(v), u.max(v)), values: None };
        if u == v || cuts.contains(&c) {
            return invalid(format!("bad or repeated cut {u}-{v}"));
        }
        cuts.push(c);
    }
    Ok(cuts)
}

/// Marks every step with the strongest reuse its dependencies allow.
fn annotate(plan: &mut ContractionPlan) {
    let deps = plan.deps();
    let inner = plan.loops.last().copied();
    for (st, d) in plan.steps.iter_mut().zip(&deps) {
        st.reuse = if d.cuts.is_empty() {
            Reuse::Global
        } else if inner.is_some_and(|c| !d.cuts.contains(&c)) {
            Reuse::Outer
        } else {
            Reuse::None
        };
    }
}

pub fn region_plan(spec: &RegionSpec) -> Result<ContractionPlan> {
    let cuts = cuts_of(&spec.cuts)?;
    let mut steps = Vec::new();
    let mut top = Vec::new();
    for (qs, name) in [(&spec.a, "A"), (&spec.b, "B")] {
        if !qs.is_empty() {
            steps.push(step(sites(qs), name));
            top.push(Operand::Step(steps.len() - 1));
        }
    }
    if top.len() == 2 {
        steps.push(step(top.clone(), "AB"));
        top = vec![Operand::Step(steps.len() - 1)];
    }
    if !spec.c.is_empty() {
        steps.push(step(sites(&spec.c), "C"));
        if !top.is_empty() {
            top.push(Operand::Step(steps.len() - 1));
            steps.push(step(top, "amp"));
        }
    }
    if steps.is_empty() {
        return invalid("all regions are empty");
    }
    let mut batch = spec.c.clone();
    batch.sort_unstable();
    let mut plan = ContractionPlan { loops: (0..cuts.len()).collect(), cuts, output: steps.len() - 1, steps, batch };
    annotate(&mut plan);
    Ok(plan)
}

fn rel_sites(lat: &Lattice) -> Vec<(usize, usize)> {
    let r0 = lat.sites().iter().map(|s| s.0).min().unwrap_or(0);
    let c0 = lat.sites().iter().map(|s| s.1).min().unwrap_or(0);
    lat.sites().iter().map(|&(r, c)| ((r - r0) as usize, (c - c0) as usize)).collect()
}

/// Lower rows from `c_row` down form C; the rest splits at column
/// `split` (A holds columns up to and including it). The topmost `n_cuts`
/// A-B bonds at or below row `cut_row` are cut.
fn bristlecone_regions(lat: &Lattice, c_row: i32, split: i32, cut_row: i32, n_cuts: usize) -> RegionSpec {
    let s = lat.sites();
    let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
    for (q, &(r, col)) in s.iter().enumerate() {
        if r >= c_row {
            c.push(q);
        } else if col <= split {
            a.push(q);
        } else {
            b.push(q);
        }
    }
    let mut ab: Vec<(usize, usize)> = lat
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| (a.contains(&u) && b.contains(&v)) || (a.contains(&v) && b.contains(&u)))
        .collect();
    ab.sort_by_key(|&(u, v)| (s[u].0.min(s[v].0), s[u].1.min(s[v].1)));
    let cuts = ab.into_iter().filter(|&(u, v)| s[u].0.min(s[v].0) >= cut_row).take(n_cuts).collect();
    RegionSpec { a, b, c, cuts }
}

/// Region layout used for each Bristlecone size: (first row of C, last
/// column of A, topmost row of the cut bonds, cuts).
fn bristlecone_layout(n: usize) -> Option<(i32, i32, i32, usize)> {
    Some(match n {
        72 | 70 => (8, 5, 0, 4),
        64 => (8, 5, 2, 2),
        60 => (7, 5, 0, 3),
        48 => (7, 5, 2, 2),
        40 | 30 | 24 => (6, 5, 0, 1),
        _ => return None,
    })
}

/// Quadrant plan for a grid with at least 4 rows and 4 columns: A top-left,
/// B top-right, C bottom-left, D bottom-right, with one B-D cut (outer
/// loop) and one C-D cut (inner loop) near the centre. The parts of B, C
/// and D not touching a cut are contracted once and reused by every path.
pub fn grid_quadrant_plan(lat: &Lattice) -> Result<ContractionPlan> {
    let (rows, cols) = match lat.kind() {
        LatticeKind::Grid { rows, cols } if *rows >= 4 && *cols >= 4 => (*rows, *cols),
        _ => return invalid("the quadrant plan needs a grid of at least 4x4"),
    };
    let (h, w) = (rows / 2, cols / 2);
    let at = |r: usize, c: usize| lat.qubit_at((r as i32, c as i32)).expect("grid site");
    let right = (at(h - 1, w + 1), at(h, w + 1));
    let bottom = (at(h, w - 1), at(h, w));
    let region = |rs: std::ops::Range<usize>, cs: std::ops::Range<usize>, skip: &[usize]| -> Vec<Operand> {
        rs.flat_map(|r| cs.clone().map(move |c| (r, c)))
            .map(|(r, c)| at(r, c))
            .filter(|q| !skip.contains(q))
            .map(Operand::Site)
            .collect()
    };
    let s = |k: usize| Operand::Step(k);
    let steps = vec![
        step(region(0..h, 0..w, &[]), "A"),
        step(region(0..h, w..cols, &[right.0]), "pB"),
        step(region(h..rows, 0..w, &[bottom.0]), "pC"),
        step(region(h..rows, w..cols, &[right.1, bottom.1]), "ppD"),
        step(vec![s(1), Operand::Site(right.0)], "B"),
        step(vec![s(3), Operand::Site(right.1)], "pD"),
        step(vec![s(0), s(4)], "AB"),
        step(vec![s(2), Operand::Site(bottom.0)], "C"),
        step(vec![s(5), Operand::Site(bottom.1)], "D"),
        step(vec![s(7), s(8)], "CD"),
        step(vec![s(6), s(9)], "amp"),
    ];
    let batch = (0..w).map(|c| at(rows - 1, c)).collect();
    let mut plan = ContractionPlan {
        cuts: cuts_of(&[right, bottom])?,
        loops: vec![0, 1],
        output: steps.len() - 1,
        steps,
        batch,
    };
    annotate(&mut plan);
    Ok(plan)
}

fn peak_live(shape: &NetworkShape, plan: &ContractionPlan) -> Result<usize> {
    Ok(simulate(&sliced_sites(shape, plan), plan)?.iter().map(|s| s.live).max().unwrap_or(1))
}

/// Largest path count a generated plan may reach while adding cuts.
pub const MAX_AUTO_PATHS: usize = 1 << 32;

/// Generated plan: the last row of the lattice is C, the remaining rows
/// split by column into A and B. Bonds are cut (A-B bonds from the top
/// first, then any other bond) until at least `min_cuts` are cut and the
/// largest working set fits `budget_entries` tensor entries.
pub fn auto_plan(lat: &Lattice, depth: DepthSpec, budget_entries: Option<usize>, min_cuts: usize) -> Result<ContractionPlan> {
    let rel = rel_sites(lat);
    let last_row = rel.iter().map(|s| s.0).max().unwrap_or(0);
    let (upper, c): (Vec<usize>, Vec<usize>) = if last_row > 0 {
        (0..lat.len()).partition(|&q| rel[q].0 < last_row)
    } else {
        ((0..lat.len()).collect(), Vec::new())
    };
    let cmin = upper.iter().map(|&q| rel[q].1).min().unwrap_or(0);
    let cmax = upper.iter().map(|&q| rel[q].1).max().unwrap_or(0);
    let (a, b): (Vec<usize>, Vec<usize>) = if cmax > cmin {
        let mid = (cmin + cmax).div_ceil(2);
        upper.iter().partition(|&&q| rel[q].1 < mid)
    } else {
        let half = upper.len() / 2;
        (upper[..half].to_vec(), upper[half..].to_vec())
    };
    let is_ab = |&(u, v): &(usize, usize)| (a.contains(&u) && b.contains(&v)) || (a.contains(&v) && b.contains(&u));
    let shape = NetworkShape::of_rqc(lat, depth, &c);
    let present = |&(u, v): &(usize, usize)| shape.dim_of(label::bond(u, v)).is_some();
    let mut cand: Vec<(usize, usize)> = lat.edges().iter().copied().filter(|e| is_ab(e) && present(e)).collect();
    cand.sort_by_key(|&(u, v)| (rel[u].0.min(rel[v].0), u.min(v)));
    cand.extend(lat.edges().iter().copied().filter(|e| !is_ab(e) && present(e)));
    let paths = |k: usize| {
        cand[..k].iter().fold(1usize, |acc, &(u, v)| acc.saturating_mul(shape.dim_of(label::bond(u, v)).unwrap_or(1)))
    };
    let mut k = min_cuts.min(cand.len());
    loop {
        let spec = RegionSpec { a: a.clone(), b: b.clone(), c: c.clone(), cuts: cand[..k].to_vec() };
        let plan = region_plan(&spec)?;
        let live = peak_live(&shape, &plan)?;
        match budget_entries {
            Some(max) if live > max => {
                if k == cand.len() || paths(k + 1) > MAX_AUTO_PATHS {
                    return Err(Error::Resource(format!(
                        "no generated plan within {MAX_AUTO_PATHS} paths fits {max} entries (peak {live} with {k} cuts)"
                    )));
                }
                k += 1;
            }
            _ => return Ok(plan),
        }
    }
}

/// Plan used when none is given: the fixed Bristlecone layouts, the
/// quadrant plan for grids of at least 6x6, and a generated plan with at
/// least one cut otherwise.
pub fn builtin_plan(lat: &Lattice, depth: DepthSpec, budget_entries: Option<usize>) -> Result<ContractionPlan> {
    let mut plan = match lat.kind() {
        LatticeKind::Bristlecone(n) => {
            let (c_row, split, cut_row, n_cuts) =
                bristlecone_layout(*n).ok_or_else(|| Error::Invalid(format!("no layout for Bristlecone-{n}")))?;
            region_plan(&bristlecone_regions(lat, c_row, split, cut_row, n_cuts))
        }
        LatticeKind::Grid { rows, cols } if *rows >= 6 && *cols >= 6 => grid_quadrant_plan(lat),
        _ => auto_plan(lat, depth, budget_entries, 1),
    }?;
    // Shallow circuits leave some bonds without gates; those cannot be cut.
    let shape = NetworkShape::of_rqc(lat, depth, &plan.batch);
    let keep: Vec<usize> = (0..plan.cuts.len()).filter(|&i| shape.dim_of(plan.cuts[i].label()).is_some()).collect();
    if keep.len() < plan.cuts.len() {
        plan.loops = plan.loops.iter().filter_map(|l| keep.iter().position(|k| k == l)).collect();
        plan.cuts = keep.iter().map(|&i| plan.cuts[i].clone()).collect();
        annotate(&mut plan);
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{estimate_cost, PathSpace};

    fn bris(n: usize, t: usize) -> (Lattice, NetworkShape, ContractionPlan) {
        let l = Lattice::bristlecone(n).unwrap();
        let d = DepthSpec::new(t);
        let p = builtin_plan(&l, d, None).unwrap();
        let s = NetworkShape::of_rqc(&l, d, &p.batch);
        p.validate(&s).unwrap();
        (l, s, p)
    }

    #[test]
    fn bristlecone_70_layout() {
        let (_, s, p) = bris(70, 32);
        assert_eq!(p.cuts.len(), 4);
        assert_eq!(p.batch.len(), 12);
        assert_eq!(PathSpace::new(&p, &s).unwrap().total(), 1 << 16);
        let est = estimate_cost(&s, &p, Some(&[0]), 1).unwrap();
        assert_eq!(est.peak_entries, 1 << 28);
    }

    #[test]
    fn bristlecone_cut_counts() {
        for (n, cuts) in [(72, 4), (64, 2), (60, 3), (48, 2), (40, 1), (30, 1), (24, 1)] {
            let (_, s, p) = bris(n, 32);
            assert_eq!(p.cuts.len(), cuts, "Bristlecone-{n}");
            let est = estimate_cost(&s, &p, Some(&[0]), 1).unwrap();
            let steps: Vec<_> = est.steps.iter().map(|x| (x.name.clone(), x.peak_entries.ilog2())).collect();
            assert!(est.peak_entries <= 1 << 28, "Bristlecone-{n}: {steps:?}");
        }
    }

    #[test]
    fn grid_7x7_quadrants() {
        let l = Lattice::grid(7, 7).unwrap();
        let d = DepthSpec::new(40);
        let p = builtin_plan(&l, d, None).unwrap();
        let s = NetworkShape::of_rqc(&l, d, &p.batch);
        p.validate(&s).unwrap();
        assert_eq!(p.cuts.len(), 2);
        assert!(p.cuts.iter().all(|c| s.dim_of(c.label()) == Some(32)));
        let est = estimate_cost(&s, &p, Some(&[0]), 1).unwrap();
        for name in ["A", "B", "C", "D"] {
            let st = est.steps.iter().find(|x| x.name == name).unwrap();
            assert_eq!(st.result_entries, 1 << 30, "{name}");
        }
        assert_eq!(p.steps[0].reuse, Reuse::Global);
        assert_eq!(p.steps[4].reuse, Reuse::Outer);
    }

    #[test]
    fn auto_plan_adds_cuts_for_budget() {
        let l = Lattice::grid(4, 5).unwrap();
        let d = DepthSpec::new(16);
        let free = auto_plan(&l, d, None, 0).unwrap();
        assert!(free.cuts.is_empty());
        let s = NetworkShape::of_rqc(&l, d, &free.batch);
        let live = peak_live(&s, &free).unwrap();
        let tight = auto_plan(&l, d, Some(live - 1), 0).unwrap();
        assert!(!tight.cuts.is_empty());
        assert!(peak_live(&s, &tight).unwrap() < live);
        assert!(auto_plan(&l, d, Some(1), 0).is_err());
    }

    #[test]
    fn small_lattices_get_one_cut() {
        for spec in ["grid:1x2", "grid:2x2", "grid:3x3", "grid:4x5"] {
            let l = Lattice::from_spec(spec).unwrap();
            let p = builtin_plan(&l, DepthSpec::new(8), None).unwrap();
            assert_eq!(p.cuts.len(), 1, "{spec}");
            p.validate(&NetworkShape::of_rqc(&l, DepthSpec::new(8), &p.batch)).unwrap();
        }
    }
}
