//! Polarization experiments: the random `Z_n` process, the capacity
//! martingale and empirical checks of the scaling laws.
//!
//! The exact mode tracks an erasure channel through a linear kernel. Each
//! synthetic channel of a q-ary erasure channel is again an erasure channel,
//! whose erasure probability is a polynomial in `ε` fixed by which erasure
//! patterns leave the current input undetermined. The state is kept as
//! `(−ln ε, −ln(1−ε))` so both tails stay accurate deep into the process.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{ChannelError, Dmc};
use crate::kernel::{pow_sat, rank, Kernel, KernelError};
use crate::transform::{bec_ladder, merge_outputs, subchannel, TransformError};

/// Largest kernel size for which erasure polynomials are enumerated.
pub const ERASURE_KERNEL_LIMIT: usize = 16;
/// Path counts up to this size are enumerated instead of sampled.
pub const ENUMERATION_LIMIT: u64 = 1 << 20;
/// Hard cap on enumerated paths when enumeration is forced.
pub const FORCED_ENUMERATION_LIMIT: u64 = 1 << 26;
/// Deepest level of the exact erasure ladder.
pub const LADDER_DEPTH_LIMIT: usize = 20;
/// Tolerance of the martingale conservation check.
pub const MARTINGALE_TOLERANCE: f64 = 1e-9;

#[derive(Error, Debug)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("the exact erasure process needs a linear kernel")]
    NotLinear,
    #[error("size {size} exceeds the limit {limit}")]
    TooLarge { size: u64, limit: u64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Upper tail of the standard normal distribution.
///
/// Computed as `erfc(t/√2)/2` with the fdlibm rational approximations of
/// `erfc`, which are accurate to about one ulp over the whole real line.
pub fn q_function(t: f64) -> f64 {
    0.5 * libm::erfc(t / std::f64::consts::SQRT_2)
}

/// Standard normal distribution function.
pub fn normal_cdf(t: f64) -> f64 {
    q_function(-t)
}

/// `ln Σ c_k e^{x_k}` over terms with positive weight.
fn log_sum(terms: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let top = terms
        .clone()
        .filter(|&(c, _)| c > 0.0)
        .map(|(_, x)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    let s: f64 = terms.filter(|&(c, _)| c > 0.0).map(|(c, x)| c * (x - top).exp()).sum();
    top + s.ln()
}

/// Erasure polynomials of the synthetic channels of a linear kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasureLadder {
    ell: usize,
    /// `erased[i][k]`: patterns with `k` erasures leaving input `i` unknown.
    erased: Vec<Vec<f64>>,
    /// `known[i][k]`: the remaining patterns with `k` erasures.
    known: Vec<Vec<f64>>,
}

impl ErasureLadder {
    pub fn new(kernel: &Kernel) -> Result<Self, LabError> {
        let ell = kernel.ell();
        let m = kernel.matrix().ok_or(LabError::NotLinear)?;
        if ell > ERASURE_KERNEL_LIMIT {
            return Err(LabError::TooLarge { size: ell as u64, limit: ERASURE_KERNEL_LIMIT as u64 });
        }
        let f = kernel.field();
        let mut erased = vec![vec![0.0; ell + 1]; ell];
        let mut known = vec![vec![0.0; ell + 1]; ell];
        for pattern in 0u32..1 << ell {
            let seen: Vec<usize> = (0..ell).filter(|&c| pattern >> c & 1 == 0).collect();
            let k = ell - seen.len();
            let restrict = |from: usize| -> usize {
                let rows = ell - from;
                let sub: Vec<usize> = (from..ell).flat_map(|r| seen.iter().map(move |&c| m[r * ell + c])).collect();
                rank(f, rows, seen.len(), &sub)
            };
            let mut below = 0;
            for i in (0..ell).rev() {
                let with = restrict(i);
                // Input i is unknown iff its row adds nothing on the seen columns.
                if with == below {
                    erased[i][k] += 1.0;
                } else {
                    known[i][k] += 1.0;
                }
                below = with;
            }
        }
        Ok(ErasureLadder { ell, erased, known })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Erasure probability of synthetic channel `i` of an erasure channel.
    pub fn step(&self, eps: f64, i: usize) -> f64 {
        let l = self.ell as i32;
        (0..=self.ell)
            .map(|k| self.erased[i][k] * eps.powi(k as i32) * (1.0 - eps).powi(l - k as i32))
            .sum()
    }

    /// One step on the log state `(−ln ε, −ln(1−ε))`.
    pub fn step_log(&self, neg_ln_eps: f64, neg_ln_keep: f64, i: usize) -> (f64, f64) {
        let l = self.ell as f64;
        let term = |k: usize| -(k as f64) * neg_ln_eps - (l - k as f64) * neg_ln_keep;
        let a = -log_sum((0..=self.ell).map(|k| (self.erased[i][k], term(k))));
        let b = -log_sum((0..=self.ell).map(|k| (self.known[i][k], term(k))));
        (a.max(f64::MIN_POSITIVE), b.max(f64::MIN_POSITIVE))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessMode {
    ExactErasure,
    Surrogate,
}

/// Which constant a surrogate step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SurrogateBound {
    Lower,
    Upper,
}

/// One trajectory of the `Z_n` process.
#[derive(Debug, Clone, PartialEq)]
pub struct ZProcessState {
    mode: ProcessMode,
    ell: usize,
    neg_ln_z: f64,
    neg_ln_keep: f64,
    history: Option<Vec<usize>>,
    distances: Vec<usize>,
    c0: f64,
    c1: f64,
    bound: SurrogateBound,
    ladder: Option<Arc<ErasureLadder>>,
}

impl ZProcessState {
    /// Exact process of an erasure channel with erasure probability `eps`
    /// under a linear kernel. `Z_n` is the current erasure probability.
    pub fn exact_erasure(kernel: &Kernel, eps: f64) -> Result<Self, LabError> {
        Self::from_ladder(Arc::new(ErasureLadder::new(kernel)?), eps)
    }

    pub fn from_ladder(ladder: Arc<ErasureLadder>, eps: f64) -> Result<Self, LabError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(LabError::BadParameter(format!("erasure probability {eps} must lie in (0,1)")));
        }
        Ok(ZProcessState {
            mode: ProcessMode::ExactErasure,
            ell: ladder.ell,
            neg_ln_z: -eps.ln(),
            neg_ln_keep: -(-eps).ln_1p(),
            history: None,
            distances: Vec::new(),
            c0: 1.0,
            c1: 1.0,
            bound: SurrogateBound::Upper,
            ladder: Some(ladder),
        })
    }

    /// Surrogate process `Z ← c·Z^{D[B]}` with the default envelope
    /// constants `c_0 = q^{−2(ℓ−1)}` and `c_1 = 2^ℓ`.
    pub fn surrogate(distances: Vec<usize>, q: usize, z: f64, bound: SurrogateBound) -> Result<Self, LabError> {
        let ell = distances.len();
        if ell < 2 || distances.contains(&0) {
            return Err(LabError::BadParameter("surrogate needs at least two positive distances".into()));
        }
        if !(z > 0.0 && z < 1.0) {
            return Err(LabError::BadParameter(format!("z = {z} must lie in (0,1)")));
        }
        let c0 = (q as f64).powi(-2 * (ell as i32 - 1));
        let c1 = 2f64.powi(ell as i32);
        Ok(ZProcessState {
            mode: ProcessMode::Surrogate,
            ell,
            neg_ln_z: -z.ln(),
            neg_ln_keep: f64::NAN,
            history: None,
            distances,
            c0,
            c1,
            bound,
            ladder: None,
        })
    }

    pub fn with_constants(mut self, c0: f64, c1: f64) -> Result<Self, LabError> {
        if !(c0 > 0.0 && c1 > 0.0 && c0.is_finite() && c1.is_finite()) {
            return Err(LabError::BadParameter("constants must be positive and finite".into()));
        }
        self.c0 = c0;
        self.c1 = c1;
        Ok(self)
    }

    /// Records the digit path from now on.
    pub fn with_history(mut self) -> Self {
        self.history = Some(Vec::new());
        self
    }

    pub fn mode(&self) -> ProcessMode {
        self.mode
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn constants(&self) -> (f64, f64) {
        (self.c0, self.c1)
    }

    pub fn history(&self) -> Option<&[usize]> {
        self.history.as_deref()
    }

    /// Current value; may underflow to 0 although the state is positive.
    pub fn z(&self) -> f64 {
        (-self.neg_ln_z).exp()
    }

    /// `−ln Z`, always positive and finite.
    pub fn neg_ln_z(&self) -> f64 {
        self.neg_ln_z
    }

    /// `log_ℓ log₂(1/Z)`: the `s` for which `Z = 2^{−ℓ^s}`.
    pub fn level(&self) -> f64 {
        (self.neg_ln_z / std::f64::consts::LN_2).ln() / (self.ell as f64).ln()
    }

    /// Moves to child `digit`.
    pub fn apply(&mut self, digit: usize) {
        assert!(digit < self.ell, "digit {digit} out of range for ℓ = {}", self.ell);
        match self.mode {
            ProcessMode::ExactErasure => {
                let ladder = self.ladder.as_ref().expect("exact mode has a ladder");
                let (a, b) = ladder.step_log(self.neg_ln_z, self.neg_ln_keep, digit);
                self.neg_ln_z = a;
                self.neg_ln_keep = b;
            }
            ProcessMode::Surrogate => {
                let c = match self.bound {
                    SurrogateBound::Lower => self.c0,
                    SurrogateBound::Upper => self.c1,
                };
                let next = self.distances[digit] as f64 * self.neg_ln_z - c.ln();
                // Keep z strictly inside (0,1).
                self.neg_ln_z = next.clamp(f64::EPSILON / 2.0, f64::MAX);
            }
        }
        if let Some(h) = &mut self.history {
            h.push(digit);
        }
    }
}

/// Draws a uniform digit and returns the successor state.
pub fn step_z<R: Rng + ?Sized>(state: &ZProcessState, rng: &mut R) -> ZProcessState {
    let mut next = state.clone();
    next.apply(rng.gen_range(0..state.ell));
    next
}

/// Settings of a scaling-law experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub eps: f64,
    pub n: usize,
    pub trials: usize,
    pub t_grid: Vec<f64>,
    /// Exponents `β` for rows with threshold `2^{−ℓ^{βn}}`.
    pub betas: Vec<f64>,
    pub seed: u64,
    /// `None` enumerates when `ℓ^n` is small enough, otherwise samples.
    pub enumerate: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub t: Option<f64>,
    pub beta: Option<f64>,
    /// `s` in the threshold `2^{−ℓ^s}`.
    pub threshold: f64,
    pub empirical: f64,
    pub target: f64,
    /// Half-width of the 95% interval on `empirical` (0 when enumerated).
    pub ci: f64,
    /// Binomial standard deviation of `target` at the sample size.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub n: usize,
    pub ell: usize,
    pub enumerated: bool,
    /// Number of trajectories (or enumerated paths).
    pub samples: usize,
    pub capacity: f64,
    pub e: f64,
    pub v: f64,
    pub rows: Vec<ScalingRow>,
    /// Trajectories ending with `Z_n < 1/2`.
    pub survivors: usize,
    /// Kolmogorov–Smirnov distance between the normalized levels of the
    /// survivors and the standard normal law.
    pub ks: Option<f64>,
}

/// Empirical `P(Z_n < 2^{−ℓ^{E n + t√(V n)}})` on an erasure channel,
/// compared against `I(W)·Q(t)`; β rows compare against `I(W)` below the
/// exponent and 0 above it.
pub fn scaling_experiment(kernel: &Kernel, cfg: &ScalingConfig) -> Result<ScalingReport, LabError> {
    let ladder = Arc::new(ErasureLadder::new(kernel)?);
    let profile = kernel.partial_distances()?;
    let (e, v) = (profile.e, profile.v);
    let ell = kernel.ell();
    let paths = pow_sat(ell, cfg.n);
    let enumerate = cfg.enumerate.unwrap_or(paths <= ENUMERATION_LIMIT);
    let start = ZProcessState::from_ladder(ladder, cfg.eps)?;
    let levels: Vec<f64> = if enumerate {
        if paths > FORCED_ENUMERATION_LIMIT {
            return Err(LabError::TooLarge { size: paths, limit: FORCED_ENUMERATION_LIMIT });
        }
        let mut out = Vec::with_capacity(paths as usize);
        enumerate_levels(&start, cfg.n, &mut out);
        out
    } else {
        if cfg.trials == 0 {
            return Err(LabError::BadParameter("at least one trial is required".into()));
        }
        (0..cfg.trials)
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(t as u64);
                let mut s = start.clone();
                for _ in 0..cfg.n {
                    s.apply(rng.gen_range(0..ell));
                }
                s.level()
            })
            .collect()
    };
    let m = levels.len();
    let capacity = 1.0 - cfg.eps;
    let nf = cfg.n as f64;
    let row = |threshold: f64, target: f64, t: Option<f64>, beta: Option<f64>| {
        let hits = levels.iter().filter(|&&s| s > threshold).count();
        let p = hits as f64 / m as f64;
        ScalingRow {
            t,
            beta,
            threshold,
            empirical: p,
            target,
            ci: if enumerate { 0.0 } else { 1.96 * (p * (1.0 - p) / m as f64).sqrt() },
            sigma: (target * (1.0 - target) / m as f64).sqrt(),
        }
    };
    let mut rows: Vec<ScalingRow> = cfg
        .t_grid
        .iter()
        .map(|&t| row(e * nf + t * (v * nf).sqrt(), capacity * q_function(t), Some(t), None))
        .collect();
    for &b in &cfg.betas {
        let target = if b < e { capacity } else { 0.0 };
        rows.push(row(b * nf, target, None, Some(b)));
    }
    let mut normalized: Vec<f64> = levels
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|&s| (s - e * nf) / (v * nf).sqrt())
        .collect();
    let survivors = normalized.len();
    let ks = (v > 0.0 && survivors > 0).then(|| ks_distance_normal(&mut normalized));
    Ok(ScalingReport { n: cfg.n, ell, enumerated: enumerate, samples: m, capacity, e, v, rows, survivors, ks })
}

fn enumerate_levels(state: &ZProcessState, depth: usize, out: &mut Vec<f64>) {
    if depth == 0 {
        out.push(state.level());
        return;
    }
    for d in 0..state.ell {
        let mut child = state.clone();
        child.apply(d);
        enumerate_levels(&child, depth - 1, out);
    }
}

/// Kolmogorov–Smirnov distance between a sample and `N(0,1)`; sorts the sample.
pub fn ks_distance_normal(sample: &mut [f64]) -> f64 {
    sample.sort_by(f64::total_cmp);
    let m = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x);
            (f - i as f64 / m).max((i + 1) as f64 / m - f)
        })
        .fold(0.0, f64::max)
}

/// Outcome of a capacity-martingale expansion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleReport {
    /// Capacities of every node, level by level; level 0 is the channel.
    pub levels: Vec<Vec<f64>>,
    /// Population standard deviation of each level.
    pub spread: Vec<f64>,
    /// Largest `|mean(children) − parent|` over expanded nodes.
    pub max_defect: f64,
    pub nodes: usize,
    pub conserved: bool,
}

/// Expands the synthetic-channel tree `levels` deep and checks that the
/// mean child capacity equals the parent capacity at every node.
pub fn capacity_martingale_check(w: &Dmc, kernel: &Kernel, levels: usize, merge: bool) -> Result<MartingaleReport, LabError> {
    if w.q() != kernel.q() {
        return Err(LabError::BadParameter(format!("channel has {} inputs, kernel works over GF({})", w.q(), kernel.q())));
    }
    let mut frontier = vec![w.clone()];
    let mut caps = vec![vec![w.capacity()]];
    let mut max_defect: f64 = 0.0;
    let mut nodes = 0;
    for _ in 0..levels {
        let mut next = Vec::with_capacity(frontier.len() * kernel.ell());
        let mut level_caps = Vec::with_capacity(next.capacity());
        for parent in &frontier {
            let pc = parent.capacity();
            let mut sum = 0.0;
            for i in 0..kernel.ell() {
                let mut child = subchannel(parent, kernel, i, None)?;
                if merge {
                    child = merge_outputs(&child);
                }
                let c = child.capacity();
                sum += c;
                level_caps.push(c);
                next.push(child);
            }
            max_defect = max_defect.max((sum / kernel.ell() as f64 - pc).abs());
            nodes += 1;
        }
        frontier = next;
        caps.push(level_caps);
    }
    let spread = caps
        .iter()
        .map(|l| {
            let mean = l.iter().sum::<f64>() / l.len() as f64;
            (l.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / l.len() as f64).sqrt()
        })
        .collect();
    Ok(MartingaleReport { levels: caps, spread, max_defect, nodes, conserved: max_defect <= MARTINGALE_TOLERANCE })
}

/// Fraction of the `2^k` BEC synthetic channels with erasure probability in
/// `(δ, 1−δ)`, for every level `k = 0..=n`.
pub fn unpolarized_fraction(eps: f64, n: usize, delta: f64) -> Result<Vec<f64>, LabError> {
    if n > LADDER_DEPTH_LIMIT {
        return Err(LabError::TooLarge { size: n as u64, limit: LADDER_DEPTH_LIMIT as u64 });
    }
    if !(0.0..=1.0).contains(&eps) || !(0.0..0.5).contains(&delta) {
        return Err(LabError::BadParameter("need ε ∈ [0,1] and δ ∈ [0,1/2)".into()));
    }
    Ok((0..=n)
        .map(|k| {
            let l = bec_ladder(eps, k);
            l.iter().filter(|&&e| e > delta && e < 1.0 - delta).count() as f64 / l.len() as f64
        })
        .collect())
}

/// Levels `k` at which a sequence indexed by level increases.
pub fn increases(values: &[f64]) -> Vec<usize> {
    (1..values.len()).filter(|&k| values[k] > values[k - 1]).collect()
}
