//! Amplitudes from a contraction plan: exact sums over every path, sums
//! over a random fraction of the paths, and batches that share the bits
//! outside the plan's batch region.

use crate::bits::{format_bits, from_index, Bits};
use crate::circuits::Circuit;
use crate::error::{invalid, Error, Result};
use crate::network::{build_2d, Boundary};
use crate::plan::{run_paths, select_paths, ContractionPlan, ExecOptions, PathSelection, PathSpace};
use crate::tensor::Scalar;
use num_complex::{Complex32, Complex64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Element type used by the tensor network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Single,
    Double,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FidelityMode {
    /// Every path.
    Exact,
    /// A random fraction `f` of the paths.
    PathFraction,
    /// Exact amplitudes, mixed with uniform noise at sampling time (see
    /// [`MixedSource`]).
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelitySpec {
    pub mode: FidelityMode,
    pub f: f64,
    /// Seed of the path selection (and of the mixing in `Mixed` mode).
    pub seed: u64,
}

impl FidelitySpec {
    pub fn exact() -> Self {
        FidelitySpec { mode: FidelityMode::Exact, f: 1.0, seed: 0 }
    }

    pub fn path_fraction(f: f64, seed: u64) -> Self {
        FidelitySpec { mode: FidelityMode::PathFraction, f, seed }
    }

    pub fn mixed(f: f64, seed: u64) -> Self {
        FidelitySpec { mode: FidelityMode::Mixed, f, seed }
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            FidelityMode::Exact if self.f != 1.0 => invalid("exact mode requires f = 1"),
            FidelityMode::Mixed if !(0.0..=1.0).contains(&self.f) => invalid(format!("fidelity {} outside [0, 1]", self.f)),
            FidelityMode::PathFraction if !(self.f > 0.0 && self.f <= 1.0) => {
                invalid(format!("fidelity {} outside (0, 1]", self.f))
            }
            _ => Ok(()),
        }
    }

    fn selection(&self) -> PathSelection {
        match self.mode {
            FidelityMode::PathFraction if self.f < 1.0 => PathSelection::Fraction { f: self.f, seed: self.seed },
            _ => PathSelection::All,
        }
    }
}

/// Per-path diagnostics of one evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct PathStats {
    pub total_paths: usize,
    /// Path numbers summed, ascending.
    pub paths: Vec<usize>,
    /// Norm estimate of each path's state: `N * mean |contribution|^2` over
    /// the amplitudes evaluated.
    pub path_norms: Vec<f64>,
    pub f_target: f64,
    /// `N * mean |amplitude|^2` over the amplitudes evaluated, an estimate
    /// of the norm (and so the fidelity) of the summed state.
    pub f_achieved_estimate: f64,
}

/// One amplitude of a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchEntry {
    /// Bits of the batch region, in `plan.batch` order.
    pub s_c: Bits,
    /// Full output string.
    pub out: Bits,
    pub amplitude: Complex64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeBatch {
    /// Bits outside the batch region, in qubit order.
    pub s_ab: Bits,
    pub entries: Vec<BatchEntry>,
    pub stats: PathStats,
}

impl AmplitudeBatch {
    pub fn n_c(&self) -> usize {
        self.entries.len()
    }
}

/// Qubits outside the plan's batch region, ascending.
pub fn ab_region(plan: &ContractionPlan, n: usize) -> Vec<usize> {
    (0..n).filter(|q| !plan.batch.contains(q)).collect()
}

/// Full output string from the bits outside and inside the batch region.
pub fn compose(plan: &ContractionPlan, n: usize, s_ab: &[u8], s_c: &[u8]) -> Bits {
    let mut out = vec![0u8; n];
    for (q, &b) in ab_region(plan, n).into_iter().zip(s_ab) {
        out[q] = b;
    }
    for (&q, &b) in plan.batch.iter().zip(s_c) {
        out[q] = b;
    }
    out
}

/// Splits a full output string into its parts outside and inside the
/// batch region.
pub fn split(plan: &ContractionPlan, out: &[u8]) -> (Bits, Bits) {
    let ab = ab_region(plan, out.len()).into_iter().map(|q| out[q]).collect();
    let c = plan.batch.iter().map(|&q| out[q]).collect();
    (ab, c)
}

fn check_bits(circuit: &Circuit, b: &[u8], what: &str) -> Result<()> {
    if b.len() != circuit.n() {
        return invalid(format!("{what} has {} bits, circuit has {} qubits", b.len(), circuit.n()));
    }
    Ok(())
}

fn evaluate<T: Scalar>(
    circuit: &Circuit,
    in_bits: &[u8],
    out: &[u8],
    s_cs: &[Bits],
    plan: &ContractionPlan,
    spec: &FidelitySpec,
    opts: &ExecOptions,
) -> Result<(Vec<Complex64>, PathStats)> {
    spec.validate()?;
    let net = build_2d::<T>(circuit, &Boundary { input: in_bits, output: out, open: &plan.batch })?;
    let space = PathSpace::new(plan, &net.shape())?;
    let paths = select_paths(&space, &spec.selection())?;
    let parts = run_paths(&net, plan, &paths, s_cs, opts)?;
    let dim = 2f64.powi(circuit.n() as i32);
    let mut amps = vec![Complex64::new(0.0, 0.0); s_cs.len()];
    let mut path_norms = Vec::with_capacity(parts.len());
    for p in &parts {
        let mut norm = 0.0;
        for (a, v) in amps.iter_mut().zip(&p.values) {
            let z = v.to_c64();
            *a += z;
            norm += z.norm_sqr();
        }
        path_norms.push(dim * norm / s_cs.len() as f64);
    }
    let f_achieved_estimate = dim * amps.iter().map(|z| z.norm_sqr()).sum::<f64>() / amps.len() as f64;
    if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite amplitude".into()));
    }
    let stats = PathStats { total_paths: space.total(), paths, path_norms, f_target: spec.f, f_achieved_estimate };
    Ok((amps, stats))
}

#[allow(clippy::too_many_arguments)]
fn evaluate_in(
    precision: Precision,
    circuit: &Circuit,
    in_bits: &[u8],
    out: &[u8],
    s_cs: &[Bits],
    plan: &ContractionPlan,
    spec: &FidelitySpec,
    opts: &ExecOptions,
) -> Result<(Vec<Complex64>, PathStats)> {
    match precision {
        Precision::Single => evaluate::<Complex32>(circuit, in_bits, out, s_cs, plan, spec, opts),
        Precision::Double => evaluate::<Complex64>(circuit, in_bits, out, s_cs, plan, spec, opts),
    }
}

/// Engine settings shared by every call.
#[derive(Clone, Debug, Default)]
pub struct EngineOptions {
    pub precision: Precision,
    pub exec: ExecOptions,
}

/// `<out|U|in>` summed over the paths chosen by `spec`.
pub fn amplitude(
    circuit: &Circuit,
    in_bits: &[u8],
    out_bits: &[u8],
    plan: &ContractionPlan,
    spec: &FidelitySpec,
    opts: &EngineOptions,
) -> Result<(Complex64, PathStats)> {
    check_bits(circuit, in_bits, "input")?;
    check_bits(circuit, out_bits, "output")?;
    let (_, s_c) = split(plan, out_bits);
    let (amps, stats) = evaluate_in(opts.precision, circuit, in_bits, out_bits, &[s_c], plan, spec, &opts.exec)?;
    Ok((amps[0], stats))
}

/// Distinct batch-region strings: all of them in index order when `n_c`
/// covers the region, otherwise `n_c` drawn without replacement.
pub fn batch_suffixes(width: usize, n_c: usize, seed: u64) -> Result<Vec<Bits>> {
    let space = if width >= usize::BITS as usize { usize::MAX } else { 1usize << width };
    if n_c == 0 || n_c > space {
        return invalid(format!("batch size {n_c} not in 1..=2^{width}"));
    }
    if n_c == space {
        return Ok((0..space).map(|i| from_index(i, width)).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rand::seq::index::sample(&mut rng, space, n_c).into_iter().map(|i| from_index(i, width)).collect())
}

/// `n_c` amplitudes sharing `s_ab` outside the batch region, with distinct
/// batch-region strings drawn with `batch_seed`.
#[allow(clippy::too_many_arguments)]
pub fn amplitude_batch(
    circuit: &Circuit,
    in_bits: &[u8],
    s_ab: &[u8],
    c_region: &[usize],
    n_c: usize,
    plan: &ContractionPlan,
    spec: &FidelitySpec,
    batch_seed: u64,
    opts: &EngineOptions,
) -> Result<AmplitudeBatch> {
    check_bits(circuit, in_bits, "input")?;
    let mut region = c_region.to_vec();
    region.sort_unstable();
    if region != plan.batch {
        return invalid("batch region does not match the plan's batch sites");
    }
    let n = circuit.n();
    if s_ab.len() != n - plan.batch.len() {
        return invalid(format!("s_AB has {} bits, expected {}", s_ab.len(), n - plan.batch.len()));
    }
    let s_cs = batch_suffixes(plan.batch.len(), n_c, batch_seed)?;
    let base = compose(plan, n, s_ab, &vec![0; plan.batch.len()]);
    let (amps, stats) = evaluate_in(opts.precision, circuit, in_bits, &base, &s_cs, plan, spec, &opts.exec)?;
    let entries = s_cs
        .into_iter()
        .zip(amps)
        .map(|(s_c, a)| BatchEntry { out: compose(plan, n, s_ab, &s_c), s_c, amplitude: a, probability: a.norm_sqr() })
        .collect();
    Ok(AmplitudeBatch { s_ab: s_ab.to_vec(), entries, stats })
}

/// Outcome of one request to a [`MixedSource`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MixedDraw {
    /// Draw from the exact output distribution.
    Exact,
    /// Use this uniformly random string.
    Uniform(Bits),
}

/// Sample source for the state `f |psi><psi| + (1 - f) I / N`.
#[derive(Clone, Debug)]
pub struct MixedSource {
    n: usize,
    f: f64,
    rng: ChaCha8Rng,
}

impl MixedSource {
    pub fn draw(&mut self) -> MixedDraw {
        if self.rng.gen::<f64>() < self.f {
            MixedDraw::Exact
        } else {
            MixedDraw::Uniform((0..self.n).map(|_| self.rng.gen_range(0..2u8)).collect())
        }
    }
}

pub fn mixed_state_sample_source(circuit: &Circuit, f: f64, seed: u64) -> Result<MixedSource> {
    if !(0.0..=1.0).contains(&f) {
        return invalid(format!("fidelity {f} outside [0, 1]"));
    }
    Ok(MixedSource { n: circuit.n(), f, rng: ChaCha8Rng::seed_from_u64(seed) })
}

/// One line of the amplitude output.
#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct AmplitudeRecord {
    #[serde(rename = "in")]
    pub input: String,
    pub out: String,
    pub re: f64,
    pub im: f64,
    pub f_target: f64,
    pub f_achieved_estimate: Option<f64>,
    pub paths: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub oracle: bool,
}

impl AmplitudeRecord {
    pub fn new(input: &[u8], out: &[u8], a: Complex64, stats: &PathStats, seed: u64) -> Self {
        AmplitudeRecord {
            input: format_bits(input),
            out: format_bits(out),
            re: a.re,
            im: a.im,
            f_target: stats.f_target,
            f_achieved_estimate: Some(stats.f_achieved_estimate),
            paths: stats.paths.len(),
            seed,
            oracle: false,
        }
    }

    pub fn from_oracle(input: &[u8], out: &[u8], a: Complex64) -> Self {
        AmplitudeRecord {
            input: format_bits(input),
            out: format_bits(out),
            re: a.re,
            im: a.im,
            f_target: 1.0,
            f_achieved_estimate: None,
            paths: 0,
            seed: 0,
            oracle: true,
        }
    }

    pub fn amplitude(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{generate_rqc, DepthSpec, Lattice};
    use crate::plan::builtin_plan;

    #[test]
    fn depth_zero_is_identity() {
        let lat = Lattice::grid(2, 2).unwrap();
        let c = generate_rqc(&lat, DepthSpec::new(0), 1).unwrap();
        let plan = builtin_plan(&lat, c.depth, None).unwrap();
        let o = EngineOptions { precision: Precision::Double, ..Default::default() };
        let (a, _) = amplitude(&c, &[0, 1, 1, 0], &[0, 1, 1, 0], &plan, &FidelitySpec::exact(), &o).unwrap();
        assert!((a - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let (b, _) = amplitude(&c, &[0, 1, 1, 0], &[0, 1, 1, 1], &plan, &FidelitySpec::exact(), &o).unwrap();
        assert!(b.norm() < 1e-12);
    }

    #[test]
    fn suffixes_are_distinct() {
        let s = batch_suffixes(6, 32, 4).unwrap();
        let set: std::collections::BTreeSet<_> = s.iter().collect();
        assert_eq!(set.len(), 32);
        assert_eq!(batch_suffixes(3, 8, 0).unwrap().len(), 8);
        assert!(batch_suffixes(3, 9, 0).is_err());
        assert!(batch_suffixes(3, 0, 0).is_err());
    }

    #[test]
    fn compose_and_split_invert() {
        let lat = Lattice::grid(3, 3).unwrap();
        let plan = builtin_plan(&lat, DepthSpec::new(8), None).unwrap();
        let out = vec![1, 0, 1, 1, 0, 0, 1, 1, 0];
        let (ab, c) = split(&plan, &out);
        assert_eq!(compose(&plan, 9, &ab, &c), out);
    }

    #[test]
    fn specs_are_checked() {
        assert!(FidelitySpec { mode: FidelityMode::Exact, f: 0.5, seed: 0 }.validate().is_err());
        assert!(FidelitySpec::path_fraction(0.0, 0).validate().is_err());
        assert!(FidelitySpec::mixed(0.0, 0).validate().is_ok());
        let lat = Lattice::grid(1, 2).unwrap();
        let c = generate_rqc(&lat, DepthSpec::new(2), 1).unwrap();
        assert!(mixed_state_sample_source(&c, 1.5, 0).is_err());
        let mut src = mixed_state_sample_source(&c, 1.0, 0).unwrap();
        assert!((0..100).all(|_| src.draw() == MixedDraw::Exact));
    }

    #[test]
    fn records_round_trip() {
        let stats = PathStats { total_paths: 4, paths: vec![1], path_norms: vec![0.3], f_target: 0.25, f_achieved_estimate: 0.3 };
        let r = AmplitudeRecord::new(&[0, 1], &[1, 1], Complex64::new(0.5, -0.25), &stats, 9);
        let j = r.to_json();
        assert!(j.starts_with("{\"in\":\"01\",\"out\":\"11\""));
        assert!(!j.contains("oracle"));
        let back: AmplitudeRecord = serde_json::from_str(&j).unwrap();
        assert_eq!(back, r);
        assert!(AmplitudeRecord::from_oracle(&[0], &[1], Complex64::new(1.0, 0.0)).to_json().contains("\"oracle\":true"));
    }
}
