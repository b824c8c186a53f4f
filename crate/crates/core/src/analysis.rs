//! Statistics on output probabilities: Porter-Thomas histograms, Pearson
//! correlation across batch entries as a function of Hamming distance, and
//! cross-entropy fidelity estimates.

use crate::amplitude::AmplitudeBatch;
use crate::bits::{hamming, to_index, Bits};
use crate::error::{invalid, Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write;

#[derive(Clone, Debug, PartialEq)]
pub struct PtBin {
    pub lo: f64,
    pub hi: f64,
    pub empirical_density: f64,
    /// Mean of `exp(-x)` over the bin.
    pub reference_density: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtHistogram {
    pub bins: Vec<PtBin>,
    pub count: usize,
    /// Kolmogorov-Smirnov distance between the samples of `x = N p` and the
    /// law `1 - exp(-x)`.
    pub ks: f64,
}

impl PtHistogram {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,empirical_density,reference_density\n");
        for b in &self.bins {
            writeln!(s, "{},{},{}", 0.5 * (b.lo + b.hi), b.empirical_density, b.reference_density).unwrap();
        }
        s
    }
}

/// Kolmogorov-Smirnov distance of `xs` from the unit exponential law.
pub fn ks_exponential(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-x.max(0.0)).exp();
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Histogram of `x = N p` over `[0, max x]` in `n_bins` equal bins, against
/// the density `exp(-x)`.
pub fn porter_thomas_check(probabilities: &[f64], dim: f64, n_bins: usize) -> Result<PtHistogram> {
    if n_bins == 0 || probabilities.len() < n_bins {
        return invalid(format!("{} probabilities for {n_bins} bins", probabilities.len()));
    }
    let xs: Vec<f64> = probabilities.iter().map(|p| p * dim).collect();
    if xs.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Numerical("negative or non-finite probability".into()));
    }
    let top = xs.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let width = top / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    for &x in &xs {
        counts[((x / width) as usize).min(n_bins - 1)] += 1;
    }
    let n = xs.len() as f64;
    let bins = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (lo, hi) = (i as f64 * width, (i + 1) as f64 * width);
            PtBin { lo, hi, empirical_density: c as f64 / (n * width), reference_density: ((-lo).exp() - (-hi).exp()) / width }
        })
        .collect();
    Ok(PtHistogram { bins, count: xs.len(), ks: ks_exponential(&xs) })
}

/// Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return invalid("Pearson needs two equal-length vectors of at least two values");
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::Numerical("Pearson coefficient of a constant vector".into()));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PearsonPair {
    pub i: usize,
    pub j: usize,
    pub hamming: usize,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistanceStat {
    pub hamming: usize,
    pub count: usize,
    pub mean_r: f64,
    pub std_r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PearsonReport {
    pub pairs: Vec<PearsonPair>,
    pub by_distance: Vec<DistanceStat>,
}

impl PearsonReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("hamming,mean_r,std_r\n");
        for d in &self.by_distance {
            writeln!(s, "{},{},{}", d.hamming, d.mean_r, d.std_r).unwrap();
        }
        s
    }
}

/// Correlation between every pair of batch-region strings: `columns[k]`
/// holds the probabilities of `s_c[k]` over the outer strings drawn.
pub fn pearson_vs_hamming(s_c: &[Bits], columns: &[Vec<f64>]) -> Result<PearsonReport> {
    if s_c.len() < 2 || s_c.len() != columns.len() {
        return invalid("need at least two strings, each with a column of values");
    }
    let mut pairs = Vec::with_capacity(s_c.len() * (s_c.len() - 1) / 2);
    for i in 0..s_c.len() {
        for j in i + 1..s_c.len() {
            pairs.push(PearsonPair { i, j, hamming: hamming(&s_c[i], &s_c[j]), r: pearson(&columns[i], &columns[j])? });
        }
    }
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for p in &pairs {
        groups.entry(p.hamming).or_default().push(p.r);
    }
    let by_distance = groups
        .into_iter()
        .map(|(h, rs)| {
            let n = rs.len() as f64;
            let mean = rs.iter().sum::<f64>() / n;
            let var = if rs.len() > 1 { rs.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
            DistanceStat { hamming: h, count: rs.len(), mean_r: mean, std_r: var.sqrt() }
        })
        .collect();
    Ok(PearsonReport { pairs, by_distance })
}

/// [`pearson_vs_hamming`] over batches that share their batch-region
/// strings in the same order.
pub fn pearson_from_batches(batches: &[AmplitudeBatch]) -> Result<PearsonReport> {
    let first = batches.first().ok_or_else(|| Error::Invalid("no batches".into()))?;
    let s_c: Vec<Bits> = first.entries.iter().map(|e| e.s_c.clone()).collect();
    let mut columns = vec![Vec::with_capacity(batches.len()); s_c.len()];
    for b in batches {
        if b.entries.len() != s_c.len() || b.entries.iter().zip(&s_c).any(|(e, s)| e.s_c != *s) {
            return invalid("batches do not share the same batch-region strings");
        }
        for (col, e) in columns.iter_mut().zip(&b.entries) {
            col.push(e.probability);
        }
    }
    pearson_vs_hamming(&s_c, &columns)
}

/// Linear cross-entropy fidelity `N * mean p(s) - 1` from the ideal
/// probabilities of the sampled strings.
pub fn linear_xeb(sample_probabilities: &[f64], dim: f64) -> Result<f64> {
    if sample_probabilities.is_empty() {
        return invalid("no samples");
    }
    Ok(dim * sample_probabilities.iter().sum::<f64>() / sample_probabilities.len() as f64 - 1.0)
}

/// Cross-entropy fidelity of samples against the full ideal distribution
/// (indexed as in [`to_index`]): `(N mean p(s) - 1) / (N sum p^2 - 1)`.
/// The denominator is 1 for an exact Porter-Thomas distribution; dividing
/// by it makes the estimate equal to 1 in expectation for ideal samples
/// and 0 for uniform ones on any distribution.
pub fn xeb_fidelity(samples: &[Bits], distribution: &[f64]) -> Result<f64> {
    let dim = distribution.len() as f64;
    let mut probs = Vec::with_capacity(samples.len());
    for s in samples {
        let p = *distribution
            .get(to_index(s))
            .ok_or_else(|| Error::Invalid("sample longer than the distribution".into()))?;
        if p == 0.0 {
            return Err(Error::Numerical(format!("sampled string {} has zero probability", crate::bits::format_bits(s))));
        }
        probs.push(p);
    }
    let collision = dim * distribution.iter().map(|p| p * p).sum::<f64>() - 1.0;
    if collision <= 0.0 {
        return Err(Error::Numerical("uniform ideal distribution carries no cross-entropy signal".into()));
    }
    Ok(linear_xeb(&probs, dim)? / collision)
}
