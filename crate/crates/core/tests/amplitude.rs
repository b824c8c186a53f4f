mod common;

use common::{inner, max_rel_err, norm_sqr, path_states};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rqcsim::amplitude::{
    amplitude, amplitude_batch, mixed_state_sample_source, split, EngineOptions, FidelitySpec, MixedDraw, Precision,
};
use rqcsim::bits::{random_bits, zeros};
use rqcsim::circuits::{generate_rqc, DepthSpec, Lattice};
use rqcsim::oracle::{evolve, exact_amplitudes};
use rqcsim::plan::{auto_plan, builtin_plan};

fn double() -> EngineOptions {
    EngineOptions { precision: Precision::Double, ..Default::default() }
}

#[test]
fn exact_mode_matches_oracle_on_4x4() {
    let lat = Lattice::grid(4, 4).unwrap();
    let c = generate_rqc(&lat, DepthSpec::new(16), 21).unwrap();
    let plan = builtin_plan(&lat, c.depth, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let outs: Vec<Vec<u8>> = (0..6).map(|_| random_bits(16, &mut rng)).collect();
    let want = exact_amplitudes(&c, &zeros(16), &outs).unwrap();
    for (opts, tol) in [(EngineOptions::default(), 1e-5), (double(), 1e-10)] {
        let got: Vec<Complex64> = outs
            .iter()
            .map(|o| amplitude(&c, &zeros(16), o, &plan, &FidelitySpec::exact(), &opts).unwrap().0)
            .collect();
        assert!(max_rel_err(&got, &want) <= tol);
    }
}

#[test]
fn quarter_fraction_takes_one_of_four_paths() {
    let lat = Lattice::grid(4, 4).unwrap();
    let c = generate_rqc(&lat, DepthSpec::new(16), 5).unwrap();
    let plan = auto_plan(&lat, c.depth, None, 1).unwrap();
    let states = path_states(&c, &plan);
    assert_eq!(states.len(), 4);
    let out = vec![1, 0, 0, 1, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 1, 0];
    let idx = rqcsim::bits::to_index(&out);
    for seed in 0..8 {
        let (a, stats) = amplitude(&c, &zeros(16), &out, &plan, &FidelitySpec::path_fraction(0.25, seed), &double()).unwrap();
        assert_eq!(stats.paths.len(), 1);
        assert_eq!(stats.total_paths, 4);
        assert!((a - states[stats.paths[0]][idx]).norm() < 1e-14);
    }
    let mean_norm = states.iter().map(|s| norm_sqr(s)).sum::<f64>() / 4.0;
    assert!((mean_norm / 0.25 - 1.0).abs() < 0.05, "{mean_norm}");
}

#[test]
fn path_states_are_nearly_orthogonal() {
    let lat = Lattice::grid(3, 4).unwrap();
    let c = generate_rqc(&lat, DepthSpec::new(24), 2).unwrap();
    let plan = auto_plan(&lat, c.depth, None, 2).unwrap();
    let states = path_states(&c, &plan);
    let psi = evolve(&c).unwrap();
    let sum: Vec<Complex64> = (0..psi.amps.len()).map(|i| states.iter().map(|s| s[i]).sum()).collect();
    assert!(max_rel_err(&sum, &psi.amps) < 1e-10);
    let total: f64 = states.iter().map(|s| norm_sqr(s)).sum();
    assert!((total - 1.0).abs() < 0.05, "{total}");
    assert!(inner(&sum, &sum).re > 0.999);
}

#[test]
fn batch_entries_equal_single_amplitudes() {
    let lat = Lattice::bristlecone(24).unwrap();
    let c = generate_rqc(&lat, DepthSpec::new(24), 8).unwrap();
    let plan = builtin_plan(&lat, c.depth, None).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s_ab = random_bits(24 - plan.batch.len(), &mut rng);
    let batch = amplitude_batch(&c, &zeros(24), &s_ab, &plan.batch, 32, &plan, &FidelitySpec::exact(), 4, &double()).unwrap();
    assert_eq!(batch.n_c(), 32);
    for e in &batch.entries {
        let (a, _) = amplitude(&c, &zeros(24), &e.out, &plan, &FidelitySpec::exact(), &double()).unwrap();
        assert_eq!(a, e.amplitude);
        assert_eq!(split(&plan, &e.out), (s_ab.clone(), e.s_c.clone()));
        assert_eq!(e.probability, a.norm_sqr());
    }
    let one = amplitude_batch(&c, &zeros(24), &s_ab, &plan.batch, 1, &plan, &FidelitySpec::exact(), 4, &double()).unwrap();
    let (a, _) = amplitude(&c, &zeros(24), &one.entries[0].out, &plan, &FidelitySpec::exact(), &double()).unwrap();
    assert_eq!(one.entries[0].amplitude, a);
}

#[test]
fn batch_requests_are_checked() {
    let lat = Lattice::grid(3, 3).unwrap();
    let c = generate_rqc(&lat, DepthSpec::new(8), 8).unwrap();
    let plan = builtin_plan(&lat, c.depth, None).unwrap();
    let s_ab = zeros(9 - plan.batch.len());
    let spec = FidelitySpec::exact();
    let too_many = 1 + (1 << plan.batch.len());
    assert!(amplitude_batch(&c, &zeros(9), &s_ab, &plan.batch, too_many, &plan, &spec, 0, &double()).is_err());
    assert!(amplitude_batch(&c, &zeros(9), &s_ab, &[0, 1], 2, &plan, &spec, 0, &double()).is_err());
    assert!(amplitude_batch(&c, &zeros(9), &zeros(2), &plan.batch, 2, &plan, &spec, 0, &double()).is_err());
}

#[test]
fn mixed_source_rates() {
    let lat = Lattice::grid(2, 4).unwrap();
    let c = generate_rqc(&lat, DepthSpec::new(8), 8).unwrap();
    let mut src = mixed_state_sample_source(&c, 0.0, 1).unwrap();
    let draws = 20_000;
    let mut ones = [0usize; 8];
    for _ in 0..draws {
        match src.draw() {
            MixedDraw::Uniform(b) => b.iter().enumerate().for_each(|(q, &x)| ones[q] += x as usize),
            MixedDraw::Exact => panic!("f = 0 never takes the exact branch"),
        }
    }
    let sigma = (draws as f64 * 0.25).sqrt();
    assert!(ones.iter().all(|&k| (k as f64 - draws as f64 / 2.0).abs() < 3.0 * sigma));
    let mut src = mixed_state_sample_source(&c, 0.5, 2).unwrap();
    let exact = (0..100_000).filter(|_| src.draw() == MixedDraw::Exact).count();
    assert!((exact as f64 / 1e5 - 0.5).abs() < 0.005);
}
