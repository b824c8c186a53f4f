use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rqcsim::amplitude::{EngineOptions, FidelitySpec, Precision};
use rqcsim::bits::{to_index, zeros};
use rqcsim::circuits::{generate_rqc, DepthSpec, Lattice};
use rqcsim::oracle::exact_distribution;
use rqcsim::plan::builtin_plan;
use rqcsim::sampler::{
    accept_probability, estimate_sampling_error, frugal_sample, sample_circuit, SamplerConfig,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn porter_thomas_batches(count: usize, n_c: usize, dim: f64, seed: u64) -> Vec<Vec<(Vec<u8>, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n_c).map(|_| (Vec::new(), { let x: f64 = Exp1.sample(&mut rng); x / dim })).collect())
        .collect()
}

#[test]
fn porter_thomas_acceptance_rate() {
    let dim = 2f64.powi(20);
    for n_c in [1, 30, 60] {
        let run = frugal_sample(porter_thomas_batches(10_000, n_c, dim, n_c as u64), 10.0, dim, 3).unwrap();
        assert!((run.acceptance_rate - accept_probability(10.0, n_c)).abs() < 0.01, "{n_c}: {}", run.acceptance_rate);
    }
}

#[test]
fn epsilon_never_grows_with_m() {
    let dim = 2f64.powi(12);
    let probs: Vec<f64> = porter_thomas_batches(1, 5000, dim, 9)[0].iter().map(|e| e.1).collect();
    let mut last = f64::INFINITY;
    for m in [1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 40.0] {
        let e = estimate_sampling_error(&probs, m, dim).unwrap().epsilon;
        assert!(e <= last);
        last = e;
    }
    let k = 400;
    let mut p = vec![0.0; k];
    p[7] = 20.0 / dim;
    assert!((estimate_sampling_error(&p, 10.0, dim).unwrap().epsilon - 20.0 / k as f64).abs() < 1e-12);
}

/// Pearson chi-square p-value of `counts` against `probs`, pooling bins
/// whose expected count is below 5.
pub fn chi_square_p(counts: &[usize], probs: &[f64]) -> f64 {
    let total: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]));
    let (mut stat, mut bins) = (0.0, 0usize);
    let (mut pool_e, mut pool_o) = (0.0, 0.0);
    for i in order {
        pool_e += probs[i] * total as f64;
        pool_o += counts[i] as f64;
        if pool_e >= 5.0 {
            stat += (pool_o - pool_e).powi(2) / pool_e;
            bins += 1;
            pool_e = 0.0;
            pool_o = 0.0;
        }
    }
    if pool_e > 0.0 {
        stat += (pool_o - pool_e).powi(2) / pool_e.max(1e-300);
        bins += 1;
    }
    1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn small_circuit_samples_are_unbiased() {
    let lat = Lattice::grid(2, 4).unwrap();
    let c = generate_rqc(&lat, DepthSpec::new(16), 4).unwrap();
    let plan = builtin_plan(&lat, c.depth, None).unwrap();
    let probs = exact_distribution(&c, &zeros(8)).unwrap();
    let max_pn = probs.iter().cloned().fold(0.0, f64::max) * 256.0;
    let cfg = SamplerConfig {
        m: 10.0 * max_pn,
        n_c: 4,
        target_samples: 20_000,
        seed: 5,
        fidelity: FidelitySpec::exact(),
    };
    let opts = EngineOptions { precision: Precision::Double, ..Default::default() };
    let (run, footer) = sample_circuit(&c, &plan, &zeros(8), &cfg, &opts).unwrap();
    assert_eq!(run.samples.len(), 20_000);
    assert_eq!(footer.epsilon_estimate, 0.0);
    let mut counts = vec![0usize; 256];
    for s in &run.samples {
        counts[to_index(s)] += 1;
    }
    assert!(chi_square_p(&counts, &probs) > 0.01);
    let (again, _) = sample_circuit(&c, &plan, &zeros(8), &cfg, &opts).unwrap();
    assert_eq!(again, run);
}

#[test]
fn mixed_mode_keeps_the_exact_share() {
    let lat = Lattice::grid(2, 4).unwrap();
    let c = generate_rqc(&lat, DepthSpec::new(16), 4).unwrap();
    let plan = builtin_plan(&lat, c.depth, None).unwrap();
    let probs = exact_distribution(&c, &zeros(8)).unwrap();
    let m = 10.0 * probs.iter().cloned().fold(0.0, f64::max) * 256.0;
    for f in [0.0, 0.3, 0.7] {
        let cfg = SamplerConfig { m, n_c: 4, target_samples: 40_000, seed: 6, fidelity: FidelitySpec::mixed(f, 2) };
        let (run, _) = sample_circuit(&c, &plan, &zeros(8), &cfg, &EngineOptions::default()).unwrap();
        let est = rqcsim::analysis::xeb_fidelity(&run.samples, &probs).unwrap();
        assert!((est - f).abs() < 0.05, "f = {f}: {est}");
    }
}
