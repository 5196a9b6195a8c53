//! Discrete memoryless channels and their statistics.
//!
//! A [`Dmc`] is a row-stochastic matrix `W(y|x)` with `q` inputs and a finite
//! output alphabet. Information quantities are reported in base-`q` units so
//! that every channel has capacity in `[0, 1]`. Terms with `W(y|x) = 0`
//! contribute nothing to any logarithmic sum.
//!
//! The continuous-output Gaussian channel only exists here through
//! [`Dmc::bawgnc`], a symmetric quantizer with a configurable bin count.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lab::q_function;

/// Row sums this close to 1 are renormalized; anything further off is rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Error, Debug)]
pub enum ChannelError {
    #[error("channel needs q >= 2 and at least one output (got q={q}, outputs={outputs})")]
    BadShape { q: usize, outputs: usize },
    #[error("expected {expected} transition probabilities, found {found}")]
    WrongLength { expected: usize, found: usize },
    #[error("row {row} has negative or non-finite entry {value}")]
    BadEntry { row: usize, value: f64 },
    #[error("row {row} sums to {sum}, not 1")]
    BadRowSum { row: usize, sum: f64 },
    #[error("{name} = {value} is outside its valid range")]
    BadParameter { name: &'static str, value: f64 },
    #[error("input {0} is out of range")]
    BadInput(usize),
    #[error("output {0} is out of range")]
    BadOutput(usize),
    #[error("the pair statistic needs two distinct inputs")]
    SameInput,
    #[error("permutation must be a bijection on the {0} inputs")]
    NotAPermutation(usize),
    #[error("operation only defined for binary-input channels (q = {0})")]
    NotBinary(usize),
    #[error("label count {labels} does not match output count {outputs}")]
    LabelCount { labels: usize, outputs: usize },
    #[error("malformed channel spec '{0}'")]
    BadSpec(String),
    #[error("reading channel file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing channel JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A finite-input, finite-output memoryless channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc {
    q: usize,
    outputs: usize,
    /// Row-major `q × outputs`.
    w: Vec<f64>,
    labels: Option<Vec<String>>,
}

/// Every scalar statistic of a channel in one place.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelStats {
    pub q: usize,
    pub outputs: usize,
    pub capacity: f64,
    pub bhattacharyya: f64,
    pub pe: f64,
    pub cutoff: f64,
    pub z_min: f64,
    pub z_max: f64,
    pub z_pairs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Nested(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    q: usize,
    outputs: usize,
    w: MatrixRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[inline]
fn xlogy_ratio(p: f64, ratio: f64) -> f64 {
    if p > 0.0 {
        p * ratio.ln()
    } else {
        0.0
    }
}

impl Dmc {
    /// Builds a channel from a row-major probability vector.
    pub fn from_flat(q: usize, outputs: usize, mut w: Vec<f64>) -> Result<Self, ChannelError> {
        if q < 2 || outputs < 1 {
            return Err(ChannelError::BadShape { q, outputs });
        }
        if w.len() != q * outputs {
            return Err(ChannelError::WrongLength { expected: q * outputs, found: w.len() });
        }
        for (x, row) in w.chunks_mut(outputs).enumerate() {
            if let Some(&bad) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(ChannelError::BadEntry { row: x, value: bad });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ChannelError::BadRowSum { row: x, sum });
            }
            if sum != 1.0 {
                row.iter_mut().for_each(|v| *v /= sum);
            }
        }
        Ok(Dmc { q, outputs, w, labels: None })
    }

    /// Builds a channel from one row per input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ChannelError> {
        let q = rows.len();
        let outputs = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != outputs) {
            return Err(ChannelError::WrongLength { expected: outputs, found: bad.len() });
        }
        Self::from_flat(q, outputs, rows.concat())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, ChannelError> {
        if labels.len() != self.outputs {
            return Err(ChannelError::LabelCount { labels: labels.len(), outputs: self.outputs });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Binary erasure channel. Outputs are `0`, `?`, `1` in that order.
    pub fn bec(eps: f64) -> Result<Self, ChannelError> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(ChannelError::BadParameter { name: "erasure probability", value: eps });
        }
        Self::from_flat(2, 3, vec![1.0 - eps, eps, 0.0, 0.0, eps, 1.0 - eps])?
            .with_labels(vec!["0".into(), "?".into(), "1".into()])
    }

    /// Binary symmetric channel with crossover probability `p ≤ 1/2`.
    pub fn bsc(p: f64) -> Result<Self, ChannelError> {
        if !(0.0..=0.5).contains(&p) {
            return Err(ChannelError::BadParameter { name: "crossover probability", value: p });
        }
        Self::from_flat(2, 2, vec![1.0 - p, p, p, 1.0 - p])
    }

    /// Symmetric quantization of the BPSK additive Gaussian channel.
    ///
    /// Input 0 is sent as +1 and input 1 as −1. The real line is cut at
    /// `-ymax + kΔ` for `k = 1..bins`, with `ymax = 1 + 6σ` and
    /// `Δ = 2·ymax/bins`. The two outermost bins extend to infinity. Since the
    /// cuts are mirror images, the row for input 1 is the row for input 0
    /// reversed, and `bins = 2` is the hard-decision BSC with `p = Q(1/σ)`.
    pub fn bawgnc(sigma: f64, bins: usize) -> Result<Self, ChannelError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(ChannelError::BadParameter { name: "noise deviation", value: sigma });
        }
        if bins < 2 {
            return Err(ChannelError::BadParameter { name: "bin count", value: bins as f64 });
        }
        let ymax = 1.0 + 6.0 * sigma;
        let delta = 2.0 * ymax / bins as f64;
        // Cut points, mirrored so that cut[k] = -cut[bins - k] exactly.
        let cut = |k: usize| -> f64 {
            if 2 * k == bins {
                0.0
            } else if 2 * k < bins {
                -ymax + k as f64 * delta
            } else {
                ymax - (bins - k) as f64 * delta
            }
        };
        // P(a < Y ≤ b) for Y ~ N(1, σ²), evaluated on whichever tail is small.
        let mass = |a: f64, b: f64| -> f64 {
            let za = (a - 1.0) / sigma;
            let zb = (b - 1.0) / sigma;
            if za >= 0.0 {
                q_function(za) - q_function(zb)
            } else if zb <= 0.0 {
                q_function(-zb) - q_function(-za)
            } else {
                1.0 - q_function(-za) - q_function(zb)
            }
        };
        let mut row0 = Vec::with_capacity(bins);
        for k in 0..bins {
            let a = if k == 0 { f64::NEG_INFINITY } else { cut(k) };
            let b = if k + 1 == bins { f64::INFINITY } else { cut(k + 1) };
            row0.push(mass(a, b).max(0.0));
        }
        let sum: f64 = row0.iter().sum();
        row0.iter_mut().for_each(|v| *v /= sum);
        let row1: Vec<f64> = row0.iter().rev().copied().collect();
        let mut dmc = Self::from_flat(2, bins, [row0, row1].concat())?;
        // Keep the mirror symmetry bit-exact after any renormalization.
        let (first, second) = dmc.w.split_at_mut(bins);
        second.iter_mut().zip(first.iter().rev()).for_each(|(b, a)| *b = *a);
        Ok(dmc)
    }

    /// The identity channel on `q` symbols.
    pub fn noiseless(q: usize) -> Result<Self, ChannelError> {
        let mut w = vec![0.0; q * q];
        for x in 0..q {
            w[x * q + x] = 1.0;
        }
        Self::from_flat(q, q, w)
    }

    /// A channel whose output ignores the input.
    pub fn uniform_noise(q: usize, outputs: usize) -> Result<Self, ChannelError> {
        Self::from_flat(q, outputs, vec![1.0 / outputs as f64; q * outputs])
    }

    /// Random channel with flat-Dirichlet rows. Roughly one entry in five is
    /// forced to zero so that degenerate supports get exercised.
    pub fn random<R: Rng + ?Sized>(q: usize, outputs: usize, rng: &mut R) -> Self {
        let mut w = Vec::with_capacity(q * outputs);
        for _ in 0..q {
            let mut row: Vec<f64> = (0..outputs)
                .map(|_| if rng.gen_bool(0.2) { 0.0 } else { -(1.0 - rng.gen::<f64>()).ln() })
                .collect();
            let sum: f64 = row.iter().sum();
            if sum == 0.0 {
                row[rng.gen_range(0..outputs)] = 1.0;
            } else {
                row.iter_mut().for_each(|v| *v /= sum);
            }
            w.extend(row);
        }
        Self::from_flat(q, outputs, w).expect("rows normalized above")
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn prob(&self, y: usize, x: usize) -> f64 {
        self.w[x * self.outputs + y]
    }

    #[inline]
    pub fn row(&self, x: usize) -> &[f64] {
        &self.w[x * self.outputs..(x + 1) * self.outputs]
    }

    /// The full row-major matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.w
    }

    /// Applies an output relabeling: output `y` of `self` becomes `perm[y]`.
    pub fn permute_outputs(&self, perm: &[usize]) -> Result<Self, ChannelError> {
        check_permutation(perm, self.outputs)?;
        let mut w = vec![0.0; self.w.len()];
        for x in 0..self.q {
            for y in 0..self.outputs {
                w[x * self.outputs + perm[y]] = self.prob(y, x);
            }
        }
        Self::from_flat(self.q, self.outputs, w)
    }

    fn check_input(&self, x: usize) -> Result<(), ChannelError> {
        if x < self.q {
            Ok(())
        } else {
            Err(ChannelError::BadInput(x))
        }
    }

    /// Symmetric capacity in base-`q` units.
    pub fn capacity(&self) -> f64 {
        let qf = self.q as f64;
        let mut acc = 0.0;
        for y in 0..self.outputs {
            let avg: f64 = (0..self.q).map(|x| self.prob(y, x)).sum::<f64>() / qf;
            for x in 0..self.q {
                let p = self.prob(y, x);
                if p > 0.0 {
                    acc += xlogy_ratio(p, p / avg);
                }
            }
        }
        (acc / qf / qf.ln()).clamp(0.0, 1.0)
    }

    /// `Σ_y √(W(y|x)W(y|x′))` without the distinctness check.
    pub(crate) fn z_pair_raw(&self, x: usize, x2: usize) -> f64 {
        self.row(x).iter().zip(self.row(x2)).map(|(a, b)| (a * b).sqrt()).sum::<f64>().min(1.0)
    }

    /// Bhattacharyya parameter between two distinct inputs.
    pub fn bhattacharyya_pair(&self, x: usize, x2: usize) -> Result<f64, ChannelError> {
        self.check_input(x)?;
        self.check_input(x2)?;
        if x == x2 {
            return Err(ChannelError::SameInput);
        }
        Ok(self.z_pair_raw(x, x2))
    }

    /// Average of the pairwise parameters over ordered pairs of distinct inputs.
    pub fn bhattacharyya(&self) -> f64 {
        let mut acc = 0.0;
        for x in 0..self.q {
            for x2 in (x + 1)..self.q {
                acc += 2.0 * self.z_pair_raw(x, x2);
            }
        }
        acc / (self.q * (self.q - 1)) as f64
    }

    /// All pairwise parameters; the diagonal is 1.
    pub fn z_pairs(&self) -> Vec<Vec<f64>> {
        (0..self.q)
            .map(|x| (0..self.q).map(|x2| if x == x2 { 1.0 } else { self.z_pair_raw(x, x2) }).collect())
            .collect()
    }

    /// `(Z_min, Z_max)` over pairs of distinct inputs.
    ///
    /// Including the diagonal in the minimum would change nothing, since
    /// `Z_{x,x} = 1` is the largest possible value.
    pub fn z_extremes(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for x in 0..self.q {
            for x2 in (x + 1)..self.q {
                let z = self.z_pair_raw(x, x2);
                lo = lo.min(z);
                hi = hi.max(z);
            }
        }
        (lo, hi)
    }

    /// Mean of `Z_{σ^i(x), σ^i(x′)}` over the orbit of the pair under `sigma`.
    ///
    /// Averaging over one period of `sigma` equals the average over all `q!`
    /// powers, since the period divides `q!`.
    pub fn z_average_under(&self, x: usize, x2: usize, sigma: &[usize]) -> Result<f64, ChannelError> {
        self.check_input(x)?;
        self.check_input(x2)?;
        check_permutation(sigma, self.q)?;
        let (mut a, mut b) = (x, x2);
        let mut acc = 0.0;
        let mut period = 0usize;
        loop {
            acc += self.z_pair_raw(a, b);
            period += 1;
            a = sigma[a];
            b = sigma[b];
            if (a, b) == (x, x2) {
                break;
            }
        }
        Ok(acc / period as f64)
    }

    /// MAP error probability under a uniform prior.
    ///
    /// Binary channels split ties evenly; for `q > 2` an output counts as
    /// correct for `x` only if `x` is the strict maximizer.
    pub fn error_probability(&self) -> f64 {
        if self.q == 2 {
            let s: f64 = (0..self.outputs).map(|y| self.prob(y, 0).min(self.prob(y, 1))).sum();
            return 0.5 * s;
        }
        let mut correct = 0.0;
        for y in 0..self.outputs {
            let mut best = 0usize;
            let mut unique = true;
            for x in 1..self.q {
                let (p, b) = (self.prob(y, x), self.prob(y, best));
                if p > b {
                    best = x;
                    unique = true;
                } else if p == b {
                    unique = false;
                }
            }
            if unique {
                correct += self.prob(y, best);
            }
        }
        1.0 - correct / self.q as f64
    }

    /// Cutoff rate of the uniform input, base-`q` units.
    pub fn cutoff_rate(&self) -> f64 {
        let qf = self.q as f64;
        let s: f64 = (0..self.outputs)
            .map(|y| {
                let t: f64 = (0..self.q).map(|x| self.prob(y, x).sqrt()).sum::<f64>() / qf;
                t * t
            })
            .sum();
        (-s.ln() / qf.ln()).max(0.0)
    }

    /// Whether some output permutation maps `W(·|0)` onto `W(·|1)`.
    ///
    /// Equivalent to the multiset of pairs `(W(y|0), W(y|1))` being closed
    /// under swapping. Values are compared on a 1e-12 grid.
    pub fn is_symmetric(&self) -> Result<bool, ChannelError> {
        if self.q != 2 {
            return Err(ChannelError::NotBinary(self.q));
        }
        let key = |v: f64| (v * 1e12).round() as i64;
        let mut counts: HashMap<(i64, i64), i64> = HashMap::new();
        for y in 0..self.outputs {
            let (a, b) = (key(self.prob(y, 0)), key(self.prob(y, 1)));
            *counts.entry((a, b)).or_default() += 1;
            *counts.entry((b, a)).or_default() -= 1;
        }
        Ok(counts.values().all(|&c| c == 0))
    }

    /// Log-likelihood ratio `ln(W(y|0)/W(y|1))` of a binary channel output.
    #[inline]
    pub fn llr(&self, y: usize) -> f64 {
        let (a, b) = (self.prob(y, 0), self.prob(y, 1));
        match (a > 0.0, b > 0.0) {
            (true, true) => (a / b).ln(),
            (true, false) => f64::INFINITY,
            (false, true) => f64::NEG_INFINITY,
            (false, false) => 0.0,
        }
    }

    pub fn stats(&self) -> ChannelStats {
        let (z_min, z_max) = self.z_extremes();
        ChannelStats {
            q: self.q,
            outputs: self.outputs,
            capacity: self.capacity(),
            bhattacharyya: self.bhattacharyya(),
            pe: self.error_probability(),
            cutoff: self.cutoff_rate(),
            z_min,
            z_max,
            z_pairs: self.z_pairs(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = ChannelFile {
            q: self.q,
            outputs: self.outputs,
            w: MatrixRepr::Nested(self.w.chunks(self.outputs).map(<[f64]>::to_vec).collect()),
            labels: self.labels.clone(),
        };
        serde_json::to_string_pretty(&file).expect("channel serializes")
    }

    /// Parses `{q, outputs, w, labels?}` where `w` is nested rows or a flat row-major list.
    pub fn from_json(text: &str) -> Result<Self, ChannelError> {
        let file: ChannelFile = serde_json::from_str(text)?;
        let flat = match file.w {
            MatrixRepr::Nested(rows) => {
                if let Some(bad) = rows.iter().find(|r| r.len() != file.outputs) {
                    return Err(ChannelError::WrongLength { expected: file.outputs, found: bad.len() });
                }
                rows.concat()
            }
            MatrixRepr::Flat(v) => v,
        };
        let dmc = Self::from_flat(file.q, file.outputs, flat)?;
        match file.labels {
            Some(l) => dmc.with_labels(l),
            None => Ok(dmc),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ChannelError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Parses `bec:<eps>`, `bsc:<p>`, `bawgnc:<sigma>:<bins>` or `file:<path>`.
    pub fn parse_spec(spec: &str) -> Result<Self, ChannelError> {
        let bad = || ChannelError::BadSpec(spec.to_string());
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
        match kind {
            "bec" => Self::bec(num(rest)?),
            "bsc" => Self::bsc(num(rest)?),
            "bawgnc" => {
                let (s, b) = rest.split_once(':').ok_or_else(bad)?;
                Self::bawgnc(num(s)?, b.trim().parse().map_err(|_| bad())?)
            }
            "file" => Self::from_file(rest),
            _ => Err(bad()),
        }
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<(), ChannelError> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(ChannelError::NotAPermutation(n));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(ChannelError::NotAPermutation(n));
        }
    }
    Ok(())
}

/// Draws outputs of a channel by inverse-CDF lookup.
#[derive(Debug, Clone)]
pub struct OutputSampler {
    outputs: usize,
    cdf: Vec<f64>,
}

impl OutputSampler {
    pub fn new(w: &Dmc) -> Self {
        let mut cdf = Vec::with_capacity(w.q * w.outputs);
        for x in 0..w.q {
            let row = w.row(x);
            let mut acc = 0.0;
            for &p in row {
                acc += p;
                cdf.push(acc);
            }
            // A final partial sum just below 1 must not leak onto a
            // zero-probability tail, so the last supported output absorbs it.
            let last = row.iter().rposition(|&p| p > 0.0).unwrap_or(w.outputs - 1);
            let base = x * w.outputs;
            cdf[base + last..base + w.outputs].fill(f64::INFINITY);
        }
        OutputSampler { outputs: w.outputs, cdf }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let row = &self.cdf[x * self.outputs..(x + 1) * self.outputs];
        row.partition_point(|&c| c <= u)
    }
}
