//! Frugal rejection sampling over batches of amplitudes.
//!
//! Each batch is visited in a shuffled order and an entry with probability
//! `p` is accepted with probability `min(1, p N / M)`; at most one entry is
//! accepted per batch, so entries sharing the bits outside the batch region
//! never appear together in the output.

use crate::amplitude::{
    ab_region, amplitude_batch, batch_suffixes, compose, mixed_state_sample_source, AmplitudeBatch, EngineOptions,
    FidelityMode, FidelitySpec, MixedDraw,
};
use crate::bits::{random_bits, Bits};
use crate::circuits::Circuit;
use crate::error::{invalid, Error, Result};
use crate::plan::ContractionPlan;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;

/// Rejection ceiling used for Porter-Thomas distributed probabilities.
pub const DEFAULT_M: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub m: f64,
    pub n_c: usize,
    pub target_samples: usize,
    pub seed: u64,
    pub fidelity: FidelitySpec,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 1.0) {
            return invalid(format!("M = {} must be at least 1", self.m));
        }
        if self.n_c == 0 {
            return invalid("batch size must be at least 1");
        }
        self.fidelity.validate()
    }
}

/// Chance that a batch of `n_c` entries yields a sample, for probabilities
/// drawn from the Porter-Thomas law: `1 - (1 - 1/M)^N_C`.
pub fn accept_probability(m: f64, n_c: usize) -> f64 {
    1.0 - (1.0 - 1.0 / m).powi(n_c as i32)
}

/// Batches needed to expect `target` samples, rounded up.
pub fn required_batches(m: f64, n_c: usize, target: usize) -> usize {
    let x = target as f64 / accept_probability(m, n_c);
    // Relative slack so that floating error in the acceptance probability
    // cannot push an exact quotient to the next integer.
    (x * (1.0 - 1e-12)).ceil() as usize
}

/// Accept/reject state shared across batches.
#[derive(Clone, Debug)]
pub struct FrugalSampler {
    m: f64,
    dim: f64,
    rng: ChaCha8Rng,
}

impl FrugalSampler {
    /// `dim` is the Hilbert space dimension `N`.
    pub fn new(m: f64, dim: f64, seed: u64) -> Result<Self> {
        if !(m >= 1.0) || !(dim >= 1.0) {
            return invalid("M and N must be at least 1");
        }
        Ok(FrugalSampler { m, dim, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    /// Visits the batch in a shuffled order and returns the index of the
    /// accepted entry, if any.
    pub fn offer(&mut self, probabilities: &[f64]) -> Result<Option<usize>> {
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Numerical("batch holds a negative or non-finite probability".into()));
        }
        let mut order: Vec<usize> = (0..probabilities.len()).collect();
        order.shuffle(&mut self.rng);
        for i in order {
            let accept = (probabilities[i] * self.dim / self.m).min(1.0);
            if self.rng.gen::<f64>() < accept {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// Outcome of a sampling run.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRun {
    pub samples: Vec<Bits>,
    /// Batches of amplitudes evaluated.
    pub batches_used: usize,
    /// Batches that produced a sample, over batches evaluated.
    pub acceptance_rate: f64,
}

/// Runs the sampler over a stream of batches (each a list of
/// `(bit-string, probability)`), returning accepted strings in batch order.
pub fn frugal_sample<I>(batches: I, m: f64, dim: f64, seed: u64) -> Result<SampleRun>
where
    I: IntoIterator<Item = Vec<(Bits, f64)>>,
{
    let mut s = FrugalSampler::new(m, dim, seed)?;
    let mut samples = Vec::new();
    let mut used = 0;
    for batch in batches {
        used += 1;
        let probs: Vec<f64> = batch.iter().map(|e| e.1).collect();
        if let Some(i) = s.offer(&probs)? {
            samples.push(batch[i].0.clone());
        }
    }
    let acceptance_rate = if used == 0 { 0.0 } else { samples.len() as f64 / used as f64 };
    Ok(SampleRun { samples, batches_used: used, acceptance_rate })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingErrorReport {
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub count: usize,
    /// Sum of the probabilities above `M / N`.
    pub tail_mass: f64,
}

/// Statistical error left by the ceiling `M`: the probability mass above
/// `M / N`, times `N`, over the number of probabilities.
pub fn estimate_sampling_error(probabilities: &[f64], m: f64, dim: f64) -> Result<SamplingErrorReport> {
    if probabilities.is_empty() {
        return invalid("no probabilities given");
    }
    let cut = m / dim;
    let tail_mass = probabilities.iter().filter(|&&p| p > cut).fold(0.0, |a, p| a + p);
    Ok(SamplingErrorReport { epsilon: tail_mass * dim / probabilities.len() as f64, m, count: probabilities.len(), tail_mass })
}

/// Trailer written after the samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleFooter {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "N_C")]
    pub n_c: usize,
    pub batches_used: usize,
    pub batches_planned: usize,
    pub acceptance_rate: f64,
    pub epsilon_estimate: f64,
}

/// Batches of one circuit computed by the engine. When the region outside
/// the batch sites is small, each full batch region is computed once and
/// later batches with the same outer bits draw from it.
pub struct EngineBatches<'a> {
    circuit: &'a Circuit,
    plan: &'a ContractionPlan,
    input: Bits,
    spec: FidelitySpec,
    opts: EngineOptions,
    n_c: usize,
    rng: ChaCha8Rng,
    memo: Option<HashMap<Bits, AmplitudeBatch>>,
    /// Every probability computed, for the error estimate.
    pub probabilities: Vec<f64>,
}

/// Largest outer region whose batches are memoized.
const MEMO_BITS: usize = 16;

impl<'a> EngineBatches<'a> {
    pub fn new(
        circuit: &'a Circuit,
        plan: &'a ContractionPlan,
        input: Bits,
        n_c: usize,
        spec: FidelitySpec,
        opts: EngineOptions,
        seed: u64,
    ) -> Result<Self> {
        let width = plan.batch.len();
        if width < usize::BITS as usize && n_c > 1usize << width {
            return invalid(format!("batch size {n_c} exceeds 2^{width}"));
        }
        let memo = (ab_region(plan, circuit.n()).len() <= MEMO_BITS).then(HashMap::new);
        Ok(EngineBatches {
            circuit,
            plan,
            input,
            spec,
            opts,
            n_c,
            rng: ChaCha8Rng::seed_from_u64(seed),
            memo,
            probabilities: Vec::new(),
        })
    }

    /// A batch for uniformly random outer bits.
    pub fn next_batch(&mut self) -> Result<Vec<(Bits, f64)>> {
        let n = self.circuit.n();
        let s_ab = random_bits(n - self.plan.batch.len(), &mut self.rng);
        let batch_seed = self.rng.gen();
        let region = self.plan.batch.clone();
        let Some(memo) = &mut self.memo else {
            let b = amplitude_batch(self.circuit, &self.input, &s_ab, &region, self.n_c, self.plan, &self.spec, batch_seed, &self.opts)?;
            self.probabilities.extend(b.entries.iter().map(|e| e.probability));
            return Ok(b.entries.into_iter().map(|e| (e.out, e.probability)).collect());
        };
        if !memo.contains_key(&s_ab) {
            let full = 1usize << region.len();
            let b = amplitude_batch(self.circuit, &self.input, &s_ab, &region, full, self.plan, &self.spec, 0, &self.opts)?;
            self.probabilities.extend(b.entries.iter().map(|e| e.probability));
            memo.insert(s_ab.clone(), b);
        }
        let all = &memo[&s_ab];
        let picks = batch_suffixes(region.len(), self.n_c, batch_seed)?;
        Ok(picks
            .into_iter()
            .map(|s_c| {
                let i = crate::bits::to_index(&s_c);
                let e = &all.entries[i];
                debug_assert_eq!(e.out, compose(self.plan, n, &s_ab, &s_c));
                (e.out.clone(), e.probability)
            })
            .collect())
    }
}

/// Samples `cfg.target_samples` output strings of `circuit` from `input`.
/// In mixed mode a fraction `1 - f` of the samples are uniform strings
/// drawn without computing any amplitude.
pub fn sample_circuit(
    circuit: &Circuit,
    plan: &ContractionPlan,
    input: &[u8],
    cfg: &SamplerConfig,
    opts: &EngineOptions,
) -> Result<(SampleRun, SampleFooter)> {
    cfg.validate()?;
    let mut root = ChaCha8Rng::seed_from_u64(cfg.seed);
    let engine_spec = match cfg.fidelity.mode {
        FidelityMode::Mixed => FidelitySpec::exact(),
        _ => cfg.fidelity,
    };
    let mix_f = if cfg.fidelity.mode == FidelityMode::Mixed { cfg.fidelity.f } else { 1.0 };
    let mut mix = mixed_state_sample_source(circuit, mix_f, root.gen())?;
    let mut source = EngineBatches::new(circuit, plan, input.to_vec(), cfg.n_c, engine_spec, opts.clone(), root.gen())?;
    let dim = 2f64.powi(circuit.n() as i32);
    let mut sampler = FrugalSampler::new(cfg.m, dim, root.gen())?;
    let mut samples = Vec::with_capacity(cfg.target_samples);
    let (mut used, mut accepted) = (0usize, 0usize);
    while samples.len() < cfg.target_samples {
        match mix.draw() {
            MixedDraw::Uniform(b) => samples.push(b),
            // An exact draw takes batches until one is accepted, so the
            // share of exact samples stays `f`.
            MixedDraw::Exact => loop {
                let batch = source.next_batch()?;
                used += 1;
                let probs: Vec<f64> = batch.iter().map(|e| e.1).collect();
                if let Some(i) = sampler.offer(&probs)? {
                    accepted += 1;
                    samples.push(batch[i].0.clone());
                    break;
                }
                if used > 1000 && accepted == 0 {
                    return Err(Error::Numerical("no sample accepted in 1000 batches".into()));
                }
            },
        }
    }
    let epsilon = if source.probabilities.is_empty() {
        0.0
    } else {
        estimate_sampling_error(&source.probabilities, cfg.m, dim)?.epsilon
    };
    let acceptance_rate = if used == 0 { 0.0 } else { accepted as f64 / used as f64 };
    let exact_samples = (cfg.target_samples as f64 * mix_f).ceil() as usize;
    let footer = SampleFooter {
        m: cfg.m,
        n_c: cfg.n_c,
        batches_used: used,
        batches_planned: required_batches(cfg.m, cfg.n_c, exact_samples.max(1)),
        acceptance_rate,
        epsilon_estimate: epsilon,
    };
    Ok((SampleRun { samples, batches_used: used, acceptance_rate }, footer))
}
