//! Shape-level simulation of a plan: contraction order inside each step,
//! FLOP counts and memory peaks.
//!
//! A pairwise contraction costs `FLOPS_PER_MULTIPLY_ADD` real operations
//! per complex multiply-add, that is `8 * (product of the distinct index
//! dimensions of both operands)`.

use super::{ContractionPlan, Deps, Operand, PathSpace};
use crate::error::{invalid, Result};
use crate::network::{label, NetworkShape};
use crate::tensor::Label;

pub const FLOPS_PER_MULTIPLY_ADD: f64 = 8.0;

/// Labels and dimensions of a tensor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sym {
    pub labels: Vec<Label>,
    pub dims: Vec<usize>,
}

impl Sym {
    pub fn entries(&self) -> usize {
        self.dims.iter().product()
    }

    fn shares(&self, o: &Sym) -> bool {
        self.labels.iter().any(|l| o.labels.contains(l))
    }

    /// Result of contracting over all common labels, and its FLOP count.
    pub fn contract(&self, o: &Sym) -> (Sym, f64) {
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        let mut all = 1.0f64;
        for (l, d) in self.labels.iter().zip(&self.dims) {
            all *= *d as f64;
            if !o.labels.contains(l) {
                labels.push(*l);
                dims.push(*d);
            }
        }
        for (l, d) in o.labels.iter().zip(&o.dims) {
            if !self.labels.contains(l) {
                all *= *d as f64;
                labels.push(*l);
                dims.push(*d);
            }
        }
        (Sym { labels, dims }, FLOPS_PER_MULTIPLY_ADD * all)
    }
}

/// Order in which a step folds its operands into an accumulator that
/// starts as operand 0: at each stage take the operand giving the smallest
/// result, preferring one that shares an index with the accumulator and
/// then the one listed first.
pub fn step_order(ops: &[Sym]) -> Vec<usize> {
    let mut order = vec![0];
    let mut acc = ops[0].clone();
    let mut rest: Vec<usize> = (1..ops.len()).collect();
    while !rest.is_empty() {
        let (pos, _) = rest
            .iter()
            .enumerate()
            .map(|(pos, &i)| (pos, (acc.contract(&ops[i]).0.entries(), !acc.shares(&ops[i]), pos)))
            .min_by_key(|&(_, k)| k)
            .unwrap();
        let i = rest.remove(pos);
        acc = acc.contract(&ops[i]).0;
        order.push(i);
    }
    order
}

/// Outcome of one step at shape level.
#[derive(Clone, Debug)]
pub(crate) struct StepSim {
    pub result: Sym,
    pub flops: f64,
    /// Largest tensor among operands, intermediates and result.
    pub peak: usize,
    /// Largest accumulator + operand + result held at once.
    pub live: usize,
    pub touched: usize,
}

/// Site shapes with cut labels and batch output labels fixed.
pub(crate) fn sliced_sites(shape: &NetworkShape, plan: &ContractionPlan) -> Vec<Sym> {
    let fixed: Vec<Label> = plan
        .cuts
        .iter()
        .map(|c| c.label())
        .chain(plan.batch.iter().map(|&q| label::out(q)))
        .collect();
    shape
        .labels
        .iter()
        .zip(&shape.dims)
        .map(|(ls, ds)| {
            let (labels, dims) = ls.iter().zip(ds).filter(|(l, _)| !fixed.contains(l)).map(|(l, d)| (*l, *d)).unzip();
            Sym { labels, dims }
        })
        .collect()
}

pub(crate) fn simulate(sites: &[Sym], plan: &ContractionPlan) -> Result<Vec<StepSim>> {
    let mut out: Vec<StepSim> = Vec::with_capacity(plan.steps.len());
    for st in &plan.steps {
        let ops: Vec<Sym> = st
            .inputs
            .iter()
            .map(|op| match *op {
                Operand::Site(q) => sites[q].clone(),
                Operand::Step(k) => out[k].result.clone(),
            })
            .collect();
        let order = step_order(&ops);
        let mut acc = ops[order[0]].clone();
        let mut flops = 0.0;
        let mut peak = acc.entries();
        let mut live = acc.entries();
        let mut touched = ops.iter().map(Sym::entries).sum::<usize>();
        for &i in &order[1..] {
            let (r, f) = acc.contract(&ops[i]);
            flops += f;
            peak = peak.max(ops[i].entries()).max(r.entries());
            live = live.max(acc.entries() + ops[i].entries() + r.entries());
            touched += r.entries();
            acc = r;
        }
        let dup = acc.labels.iter().enumerate().any(|(i, l)| acc.labels[..i].contains(l));
        if dup {
            return invalid(format!("step `{}` produces a repeated index", st.name));
        }
        out.push(StepSim { result: acc, flops, peak, live, touched });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepCost {
    pub name: String,
    /// FLOPs of one evaluation of the step.
    pub flops: f64,
    /// Evaluations over the whole run when results are reused.
    pub evals: usize,
    pub result_entries: usize,
    pub peak_entries: usize,
    /// FLOPs per tensor entry read or written.
    pub intensity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostEstimate {
    pub paths: usize,
    /// Amplitudes per batch.
    pub batch: usize,
    /// FLOPs of one path of one amplitude without any reuse.
    pub per_path_flops: f64,
    /// `paths * per_path_flops`.
    pub flops: f64,
    /// FLOPs of the whole batch with cached results reused.
    pub flops_with_reuse: f64,
    /// Largest tensor held at any time.
    pub peak_entries: usize,
    /// Largest accumulator + operand + result held at once.
    pub peak_live_entries: usize,
    pub steps: Vec<StepCost>,
}

impl CostEstimate {
    pub fn log2_flops(&self) -> f64 {
        self.flops.log2()
    }
}

/// Number of evaluations of a step with cached results, over the given
/// paths (in order) and `batch` amplitudes per path.
fn evaluations(d: &Deps, loops: &[usize], space: &PathSpace, paths: &[usize], batch: usize) -> usize {
    let batch_factor = if d.batch.is_empty() { 1 } else { batch };
    if d.cuts.is_empty() {
        return batch_factor;
    }
    if batch_factor > 1 {
        return paths.len() * batch_factor;
    }
    let pos: Vec<usize> = loops.iter().enumerate().filter(|(_, c)| d.cuts.contains(c)).map(|(k, _)| k).collect();
    let mut last: Option<Vec<usize>> = None;
    let mut n = 0;
    for &i in paths {
        let p = space.path(i);
        let key: Vec<usize> = pos.iter().map(|&k| p[k]).collect();
        if last.as_ref() != Some(&key) {
            n += 1;
            last = Some(key);
        }
    }
    n
}

/// Cost of summing `paths` (numbers in loop order; `None` for all of them)
/// for a batch of `batch` amplitudes.
pub fn estimate_cost(
    shape: &NetworkShape,
    plan: &ContractionPlan,
    paths: Option<&[usize]>,
    batch: usize,
) -> Result<CostEstimate> {
    let space = PathSpace::new(plan, shape)?;
    let all: Vec<usize>;
    let paths = match paths {
        Some(p) => p,
        None => {
            all = (0..space.total()).collect();
            &all
        }
    };
    let sims = simulate(&sliced_sites(shape, plan), plan)?;
    let deps = plan.deps();
    let mut steps = Vec::new();
    let mut reuse_flops = 0.0;
    for ((st, sim), d) in plan.steps.iter().zip(&sims).zip(&deps) {
        let evals = evaluations(d, &plan.loops, &space, paths, batch.max(1));
        reuse_flops += sim.flops * evals as f64;
        steps.push(StepCost {
            name: st.name.clone(),
            flops: sim.flops,
            evals,
            result_entries: sim.result.entries(),
            peak_entries: sim.peak,
            intensity: if sim.touched == 0 { 0.0 } else { sim.flops / sim.touched as f64 },
        });
    }
    let per_path: f64 = sims.iter().map(|s| s.flops).sum();
    Ok(CostEstimate {
        paths: paths.len(),
        batch: batch.max(1),
        per_path_flops: per_path,
        flops: per_path * paths.len() as f64,
        flops_with_reuse: reuse_flops,
        peak_entries: sims.iter().map(|s| s.peak).max().unwrap_or(1),
        peak_live_entries: sims.iter().map(|s| s.live).max().unwrap_or(1),
        steps,
    })
}
