#![allow(dead_code)]

use num_complex::Complex64;
use rqcsim::amplitude::{ab_region, compose};
use rqcsim::bits::{from_index, to_index, zeros};
use rqcsim::circuits::Circuit;
use rqcsim::network::{build_2d, Boundary};
use rqcsim::plan::{run_paths, ContractionPlan, ExecOptions, PathSpace};

/// Every path's output state: `states[p][index(out)]` is the contribution of
/// path `p` to `<out|U|0...0>`, computed in double precision.
pub fn path_states(c: &Circuit, plan: &ContractionPlan) -> Vec<Vec<Complex64>> {
    let n = c.n();
    let input = zeros(n);
    let n_ab = ab_region(plan, n).len();
    let n_c = plan.batch.len();
    let suffixes: Vec<Vec<u8>> = (0..1usize << n_c).map(|i| from_index(i, n_c)).collect();
    let mut states: Vec<Vec<Complex64>> = Vec::new();
    for i in 0..1usize << n_ab {
        let s_ab = from_index(i, n_ab);
        let base = compose(plan, n, &s_ab, &zeros(n_c));
        let net = build_2d::<Complex64>(c, &Boundary { input: &input, output: &base, open: &plan.batch }).unwrap();
        let total = PathSpace::new(plan, &net.shape()).unwrap().total();
        if states.is_empty() {
            states = vec![vec![Complex64::new(0.0, 0.0); 1 << n]; total];
        }
        let paths: Vec<usize> = (0..total).collect();
        for pc in run_paths(&net, plan, &paths, &suffixes, &ExecOptions::default()).unwrap() {
            for (s_c, v) in suffixes.iter().zip(&pc.values) {
                states[pc.path][to_index(&compose(plan, n, &s_ab, s_c))] = *v;
            }
        }
    }
    states
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Largest `|got - want| / max |want|`.
pub fn max_rel_err(got: &[Complex64], want: &[Complex64]) -> f64 {
    let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max);
    got.iter().zip(want).map(|(g, w)| (g - w).norm()).fold(0.0, f64::max) / scale
}
