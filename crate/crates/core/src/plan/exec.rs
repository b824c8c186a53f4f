//! Plan execution over paths and batch outputs.
//!
//! Work is split into contiguous runs of paths, one per worker; each worker
//! keeps its own cache of step results. A step that depends on no cut is
//! cached per batch output (it is shared by every path); any other step
//! keeps only its most recent result, which paths in loop order reuse for
//! as long as the values it depends on stay the same. Contributions are
//! returned per path so that callers can sum them in a fixed order.

use super::cost::{simulate, sliced_sites, step_order, Sym};
use super::{ContractionPlan, Deps, Operand, PathSpace};
use crate::error::{invalid, Error, Result};
use crate::network::{label, GridNetwork2D, NetworkShape};
use crate::tensor::{contract_all, Scalar, Tensor};
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct ExecOptions {
    /// Reuse cached step results across paths and batch outputs.
    pub reuse: bool,
    /// Largest working set allowed for one step, in bytes.
    pub memory_budget: Option<usize>,
    /// Workers; 0 means the size of the current rayon pool.
    pub threads: usize,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions { reuse: true, memory_budget: None, threads: 0 }
    }
}

/// Contribution of one path: one value per requested batch output.
#[derive(Clone, Debug, PartialEq)]
pub struct PathContribution<T> {
    pub path: usize,
    pub values: Vec<T>,
}

/// Fails with the first step whose working set exceeds `budget` bytes.
pub fn check_budget<T: Scalar>(shape: &NetworkShape, plan: &ContractionPlan, budget: usize) -> Result<()> {
    let sims = simulate(&sliced_sites(shape, plan), plan)?;
    for (st, sim) in plan.steps.iter().zip(&sims) {
        let needed = sim.live.saturating_mul(T::BYTES);
        if needed > budget {
            return Err(Error::Budget { step: st.name.clone(), needed, budget });
        }
    }
    Ok(())
}

enum Slot<T> {
    Last(Option<(Vec<usize>, Vec<u8>, Arc<Tensor<T>>)>),
    Keyed(HashMap<Vec<u8>, Arc<Tensor<T>>>),
}

struct Runner<'a, T> {
    net: &'a GridNetwork2D<T>,
    plan: &'a ContractionPlan,
    deps: Vec<Deps>,
    /// Loop position of every cut.
    loop_pos: Vec<usize>,
    reuse: bool,
}

impl<'a, T: Scalar> Runner<'a, T> {
    fn new(net: &'a GridNetwork2D<T>, plan: &'a ContractionPlan, reuse: bool) -> Self {
        let mut loop_pos = vec![0; plan.cuts.len()];
        for (k, &c) in plan.loops.iter().enumerate() {
            loop_pos[c] = k;
        }
        Runner { net, plan, deps: plan.deps(), loop_pos, reuse }
    }

    fn fresh_cache(&self) -> Vec<Slot<T>> {
        self.deps
            .iter()
            .map(|d| if d.cuts.is_empty() { Slot::Keyed(HashMap::new()) } else { Slot::Last(None) })
            .collect()
    }

    fn site(&self, q: usize, path: &[usize], bits: &[u8]) -> Result<Tensor<T>> {
        let mut t = self.net.tensors[q].clone();
        for (ci, c) in self.plan.cuts.iter().enumerate() {
            if c.sites.0 == q || c.sites.1 == q {
                t = t.slice(c.label(), path[self.loop_pos[ci]])?;
            }
        }
        if let Some(b) = self.plan.batch.iter().position(|&s| s == q) {
            t = t.slice(label::out(q), bits[b] as usize)?;
        }
        Ok(t)
    }

    fn step(&self, k: usize, path: &[usize], bits: &[u8], cache: &mut [Slot<T>]) -> Result<Arc<Tensor<T>>> {
        let d = &self.deps[k];
        let cut_key: Vec<usize> = d.cuts.iter().map(|&c| path[self.loop_pos[c]]).collect();
        let bit_key: Vec<u8> = self
            .plan
            .batch
            .iter()
            .zip(bits)
            .filter(|(q, _)| d.batch.contains(q))
            .map(|(_, &b)| b)
            .collect();
        if self.reuse {
            match &cache[k] {
                Slot::Keyed(m) => {
                    if let Some(t) = m.get(&bit_key) {
                        return Ok(t.clone());
                    }
                }
                Slot::Last(Some((ck, bk, t))) if *ck == cut_key && *bk == bit_key => return Ok(t.clone()),
                Slot::Last(_) => {}
            }
        }
        let mut ops: Vec<Arc<Tensor<T>>> = Vec::new();
        for op in &self.plan.steps[k].inputs {
            ops.push(match *op {
                Operand::Site(q) => Arc::new(self.site(q, path, bits)?),
                Operand::Step(j) => self.step(j, path, bits, cache)?,
            });
        }
        let syms: Vec<Sym> = ops.iter().map(|t| Sym { labels: t.labels().to_vec(), dims: t.dims().to_vec() }).collect();
        let order = step_order(&syms);
        let mut acc: Tensor<T> = (*ops[order[0]]).clone();
        for &i in &order[1..] {
            acc = contract_all(&acc, &ops[i])?;
        }
        let acc = Arc::new(acc);
        if self.reuse {
            match &mut cache[k] {
                Slot::Keyed(m) => {
                    m.insert(bit_key, acc.clone());
                }
                Slot::Last(s) => *s = Some((cut_key, bit_key, acc.clone())),
            }
        }
        Ok(acc)
    }

    fn contribution(&self, path: &[usize], bits: &[u8], cache: &mut [Slot<T>]) -> Result<T> {
        let t = self.step(self.plan.output, path, bits, cache)?;
        t.scalar_value()
            .ok_or_else(|| Error::Invalid("plan output is not a scalar".into()))
    }
}

fn check_bits(plan: &ContractionPlan, outputs: &[Vec<u8>]) -> Result<()> {
    if outputs.is_empty() {
        return invalid("no batch outputs requested");
    }
    if let Some(b) = outputs.iter().find(|b| b.len() != plan.batch.len()) {
        return invalid(format!("batch output has {} bits, region has {} sites", b.len(), plan.batch.len()));
    }
    Ok(())
}

/// Contribution of one path (values in loop order) for one assignment of
/// the batch sites' output bits, computed without any caching.
pub fn execute_path<T: Scalar>(net: &GridNetwork2D<T>, plan: &ContractionPlan, path: &[usize], bits: &[u8]) -> Result<T> {
    check_bits(plan, &[bits.to_vec()])?;
    if path.len() != plan.loops.len() {
        return invalid(format!("path has {} values, plan has {} cuts", path.len(), plan.loops.len()));
    }
    let r = Runner::new(net, plan, false);
    let mut cache = r.fresh_cache();
    r.contribution(path, bits, &mut cache)
}

/// Contributions of the given paths (numbers in loop order) for every
/// batch output in `outputs` (bits of the batch sites, in `plan.batch`
/// order).
pub fn run_paths<T: Scalar>(
    net: &GridNetwork2D<T>,
    plan: &ContractionPlan,
    paths: &[usize],
    outputs: &[Vec<u8>],
    opts: &ExecOptions,
) -> Result<Vec<PathContribution<T>>> {
    check_bits(plan, outputs)?;
    let shape = net.shape();
    plan.validate(&shape)?;
    if let Some(b) = opts.memory_budget {
        check_budget::<T>(&shape, plan, b)?;
    }
    let space = PathSpace::new(plan, &shape)?;
    if let Some(&p) = paths.iter().find(|&&p| p >= space.total()) {
        return invalid(format!("path {p} out of range {}", space.total()));
    }
    let runner = Runner::new(net, plan, opts.reuse);
    let workers = if opts.threads == 0 { rayon::current_num_threads() } else { opts.threads };
    let chunk = paths.len().div_ceil(workers.max(1)).max(1);
    let parts: Vec<Result<Vec<PathContribution<T>>>> = paths
        .par_chunks(chunk)
        .map(|ps| {
            let mut cache = runner.fresh_cache();
            ps.iter()
                .map(|&p| {
                    let vals = space.path(p);
                    let values = outputs
                        .iter()
                        .map(|bits| runner.contribution(&vals, bits, &mut cache))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(PathContribution { path: p, values })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(paths.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}
