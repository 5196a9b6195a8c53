//! Density evolution for the 2×2 binary kernel.
//!
//! An [`LlrDensity`] is the distribution of the log-likelihood ratio
//! `ln W(y|0)/W(y|1)` given that 0 was sent, quantized to a uniform grid
//! `kδ, |k| ≤ K` with separate atoms at 0 and ±∞. The grid bin at 0 is
//! always empty: all mass at LLR 0 lives in `atom_zero`.
//!
//! Two operations drive the recursion:
//! * [`var_conv`] (⊛) is the law of the sum of two independent LLRs. The
//!   finite parts are convolved directly when small and through an FFT
//!   otherwise. Sums beyond `±K` saturate to the infinite atoms, and
//!   `+∞ + −∞` is assigned to the zero atom.
//! * [`check_conv`] (⊞) is the law of `2 atanh(tanh(a/2) tanh(b/2))`. It is
//!   computed in the magnitude/sign domain. The output magnitude of a pair of
//!   grid points comes from a precomputed rounding table when the two
//!   magnitudes are close, and equals the smaller magnitude otherwise, which
//!   is exact to within half a bin outside the table band.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use thiserror::Error;

use crate::channel::{ChannelError, Dmc};
use crate::codec::GenieSc;
use crate::transform::bec_ladder;

/// Convolutions with at most this many finite pair products are done directly.
const DIRECT_CONV_LIMIT: usize = 1 << 18;
/// FFT outputs below this (relative to the product mass) are treated as round-off.
const FFT_FLOOR: f64 = 1e-16;

#[derive(Error, Debug)]
pub enum DensityError {
    #[error("density evolution needs a symmetric binary channel")]
    NotSymmetric,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("grid needs delta > 0 and half_range >= delta (got delta={delta}, half_range={half_range})")]
    BadGrid { delta: f64, half_range: f64 },
    #[error("densities live on different grids")]
    GridMismatch,
    #[error("index {index} out of range for blocklength {size}")]
    Index { index: usize, size: usize },
    #[error("cannot select {count} of {size} indices")]
    BadCount { count: usize, size: usize },
    #[error("level {0} is too large")]
    TooDeep(usize),
    #[error("at least one trial is required")]
    NoTrials,
}

struct GridInner {
    delta: f64,
    half_range: f64,
    k: usize,
    band: usize,
    /// `table[(i-1)·(2·band+1) + (j - i + band)]` = rounded magnitude of the
    /// check combination of magnitudes `iδ` and `jδ`.
    table: Vec<u16>,
    fft_len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

/// Quantization grid shared by densities. Cheap to clone.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid").field("delta", &self.0.delta).field("half_range", &self.0.half_range).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.delta == other.0.delta && self.0.k == other.0.k)
    }
}

/// Grid parameters as written to construction files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct GridParams {
    pub delta: f64,
    pub half_range: f64,
}

/// Check-node combination of two positive magnitudes.
#[inline]
fn boxplus_mag(x: f64, y: f64) -> f64 {
    x.min(y) - (-(x - y).abs()).exp().ln_1p() + (-(x + y)).exp().ln_1p()
}

impl Grid {
    /// Default grid: δ = 1/64, range ±40.
    pub fn standard() -> Self {
        Self::new(1.0 / 64.0, 40.0).expect("valid default grid")
    }

    pub fn new(delta: f64, half_range: f64) -> Result<Self, DensityError> {
        if !(delta > 0.0 && half_range >= delta && delta.is_finite() && half_range.is_finite()) {
            return Err(DensityError::BadGrid { delta, half_range });
        }
        let k = (half_range / delta).round() as usize;
        if k > u16::MAX as usize - 1 {
            return Err(DensityError::BadGrid { delta, half_range });
        }
        // Outside this band the correction to min(x, y) is below δ/2.
        let band = (((2.0 / delta).ln() / delta).ceil() as usize + 1).min(k);
        let width = 2 * band + 1;
        let mut table = vec![0u16; k * width];
        for i in 1..=k {
            for d in 0..width {
                let j = i as i64 + d as i64 - band as i64;
                if j < 1 || j > k as i64 {
                    continue;
                }
                let m = boxplus_mag(i as f64 * delta, j as f64 * delta);
                table[(i - 1) * width + d] = (m / delta).round().clamp(0.0, k as f64) as u16;
            }
        }
        let fft_len = (4 * k + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(fft_len);
        let inv = planner.plan_fft_inverse(fft_len);
        Ok(Grid(Arc::new(GridInner { delta, half_range, k, band, table, fft_len, fwd, inv })))
    }

    pub fn delta(&self) -> f64 {
        self.0.delta
    }

    pub fn half_range(&self) -> f64 {
        self.0.half_range
    }

    /// Number of grid points on each side of zero.
    pub fn bins(&self) -> usize {
        self.0.k
    }

    pub fn params(&self) -> GridParams {
        GridParams { delta: self.0.delta, half_range: self.0.half_range }
    }
}

/// Quantized LLR density with atoms at 0 and ±∞.
#[derive(Debug, Clone)]
pub struct LlrDensity {
    grid: Grid,
    /// `mass[k + K]` is the mass at LLR `kδ`; `mass[K]` is always 0.
    mass: Vec<f64>,
    pub atom_zero: f64,
    pub atom_pos_inf: f64,
    pub atom_neg_inf: f64,
}

impl LlrDensity {
    fn empty(grid: &Grid) -> Self {
        LlrDensity {
            grid: grid.clone(),
            mass: vec![0.0; 2 * grid.0.k + 1],
            atom_zero: 0.0,
            atom_pos_inf: 0.0,
            atom_neg_inf: 0.0,
        }
    }

    /// Point mass at `+∞` (a noiseless channel).
    pub fn perfect(grid: &Grid) -> Self {
        LlrDensity { atom_pos_inf: 1.0, ..Self::empty(grid) }
    }

    /// Point mass at 0 (a useless channel).
    pub fn useless(grid: &Grid) -> Self {
        LlrDensity { atom_zero: 1.0, ..Self::empty(grid) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Mass at LLR `kδ` for `|k| ≤ K`.
    pub fn mass_at(&self, k: i64) -> f64 {
        let kk = self.grid.0.k as i64;
        if k.abs() > kk {
            0.0
        } else {
            self.mass[(k + kk) as usize]
        }
    }

    /// Adds mass at an arbitrary LLR value, rounding to the grid.
    pub fn add_mass(&mut self, llr: f64, p: f64) {
        let k = self.grid.0.k as i64;
        if llr.is_nan() || llr == 0.0 {
            self.atom_zero += p;
        } else if llr == f64::INFINITY {
            self.atom_pos_inf += p;
        } else if llr == f64::NEG_INFINITY {
            self.atom_neg_inf += p;
        } else {
            let idx = (llr / self.grid.0.delta).round() as i64;
            self.add_index(idx, k, p);
        }
    }

    #[inline]
    fn add_index(&mut self, idx: i64, k: i64, p: f64) {
        if idx == 0 {
            self.atom_zero += p;
        } else if idx > k {
            self.atom_pos_inf += p;
        } else if idx < -k {
            self.atom_neg_inf += p;
        } else {
            self.mass[(idx + k) as usize] += p;
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum::<f64>() + self.atom_zero + self.atom_pos_inf + self.atom_neg_inf
    }

    fn finite_is_empty(&self) -> bool {
        self.mass.iter().all(|&m| m == 0.0)
    }

    /// `P(L < 0) + ½·P(L = 0)`.
    pub fn pe(&self) -> f64 {
        let k = self.grid.0.k;
        self.atom_neg_inf + self.mass[..k].iter().sum::<f64>() + 0.5 * (self.atom_zero + self.mass[k])
    }

    /// Bhattacharyya parameter `Σ √(a(L)a(−L))` over the support.
    pub fn bhattacharyya(&self) -> f64 {
        let k = self.grid.0.k;
        let mut z = self.atom_zero + self.mass[k] + 2.0 * (self.atom_pos_inf * self.atom_neg_inf).sqrt();
        for i in 1..=k {
            z += 2.0 * (self.mass[k + i] * self.mass[k - i]).sqrt();
        }
        z.min(1.0)
    }

    /// `Σ_k |a(−kδ) − e^{−kδ} a(kδ)|` over grid points: zero for an exactly
    /// symmetric density, small after quantization.
    pub fn consistency_defect(&self) -> f64 {
        let k = self.grid.0.k;
        let d = self.grid.0.delta;
        (1..=k).map(|i| (self.mass[k - i] - (-(i as f64) * d).exp() * self.mass[k + i]).abs()).sum::<f64>()
            + self.atom_neg_inf
    }

    /// Range of nonzero magnitudes `[lo, hi]`, if any.
    fn magnitude_support(&self) -> Option<(usize, usize)> {
        let k = self.grid.0.k;
        let nz = |i: &usize| self.mass[k + i] != 0.0 || self.mass[k - i] != 0.0;
        let lo = (1..=k).find(nz)?;
        let hi = (1..=k).rev().find(nz)?;
        Some((lo, hi))
    }
}

/// LLR density of a symmetric binary channel.
pub fn density_from_channel(w: &Dmc, grid: &Grid) -> Result<LlrDensity, DensityError> {
    if !w.is_symmetric()? {
        return Err(DensityError::NotSymmetric);
    }
    let mut a = LlrDensity::empty(grid);
    for y in 0..w.outputs() {
        let p = w.prob(y, 0);
        if p > 0.0 {
            a.add_mass(w.llr(y), p);
        }
    }
    Ok(a)
}

fn check_grids(a: &LlrDensity, b: &LlrDensity) -> Result<(), DensityError> {
    if a.grid == b.grid {
        Ok(())
    } else {
        Err(DensityError::GridMismatch)
    }
}

/// `a ⊛ b`: law of the sum of independent LLRs.
pub fn var_conv(a: &LlrDensity, b: &LlrDensity) -> Result<LlrDensity, DensityError> {
    check_grids(a, b)?;
    let g = &a.grid.0;
    let k = g.k as i64;
    let mut out = LlrDensity::empty(&a.grid);
    let fa: f64 = a.mass.iter().sum();
    let fb: f64 = b.mass.iter().sum();

    // Zero is the identity element.
    out.atom_zero += a.atom_zero * b.atom_zero;
    for (o, (&ma, &mb)) in out.mass.iter_mut().zip(a.mass.iter().zip(&b.mass)) {
        *o += a.atom_zero * mb + b.atom_zero * ma;
    }
    out.atom_pos_inf += a.atom_zero * b.atom_pos_inf + b.atom_zero * a.atom_pos_inf;
    out.atom_neg_inf += a.atom_zero * b.atom_neg_inf + b.atom_zero * a.atom_neg_inf;

    // Infinite evidence dominates finite evidence; opposite infinities cancel.
    out.atom_pos_inf += a.atom_pos_inf * (fb + b.atom_pos_inf) + b.atom_pos_inf * fa;
    out.atom_neg_inf += a.atom_neg_inf * (fb + b.atom_neg_inf) + b.atom_neg_inf * fa;
    out.atom_zero += a.atom_pos_inf * b.atom_neg_inf + a.atom_neg_inf * b.atom_pos_inf;

    if a.finite_is_empty() || b.finite_is_empty() {
        return Ok(out);
    }
    let support = |d: &LlrDensity| -> (usize, usize) {
        let lo = d.mass.iter().position(|&m| m != 0.0).expect("nonempty");
        let hi = d.mass.iter().rposition(|&m| m != 0.0).expect("nonempty");
        (lo, hi)
    };
    let (alo, ahi) = support(a);
    let (blo, bhi) = support(b);
    let (la, lb) = (ahi - alo + 1, bhi - blo + 1);
    if la * lb <= DIRECT_CONV_LIMIT {
        for i in alo..=ahi {
            let ma = a.mass[i];
            if ma == 0.0 {
                continue;
            }
            for j in blo..=bhi {
                let mb = b.mass[j];
                if mb != 0.0 {
                    // (i - K) + (j - K)
                    out.add_index(i as i64 + j as i64 - 2 * k, k, ma * mb);
                }
            }
        }
        return Ok(out);
    }
    let n = g.fft_len;
    let mut xa = vec![Complex::new(0.0, 0.0); n];
    let mut xb = vec![Complex::new(0.0, 0.0); n];
    for i in alo..=ahi {
        xa[i - alo].re = a.mass[i];
    }
    for j in blo..=bhi {
        xb[j - blo].re = b.mass[j];
    }
    g.fwd.process(&mut xa);
    g.fwd.process(&mut xb);
    for (p, q) in xa.iter_mut().zip(&xb) {
        *p *= q;
    }
    g.inv.process(&mut xa);
    let scale = 1.0 / n as f64;
    let floor = FFT_FLOOR * fa * fb;
    let values: Vec<f64> = xa.iter().take(la + lb - 1).map(|c| c.re * scale).collect();
    // Drop round-off noise, then rescale so the finite product keeps its exact mass.
    let kept: f64 = values.iter().filter(|&&v| v > floor).sum();
    let fix = if kept > 0.0 { fa * fb / kept } else { 0.0 };
    let offset = (alo + blo) as i64 - 2 * k;
    for (t, &v) in values.iter().enumerate() {
        if v > floor {
            out.add_index(t as i64 + offset, k, v * fix);
        }
    }
    Ok(out)
}

/// `a ⊞ b`: law of `2 atanh(tanh(A/2) tanh(B/2))`.
pub fn check_conv(a: &LlrDensity, b: &LlrDensity) -> Result<LlrDensity, DensityError> {
    check_grids(a, b)?;
    let g = &a.grid.0;
    let (k, band) = (g.k, g.band);
    let width = 2 * band + 1;
    let mut out = LlrDensity::empty(&a.grid);

    // Zero is absorbing.
    out.atom_zero = a.atom_zero + b.atom_zero - a.atom_zero * b.atom_zero;
    // ∞ ⊞ ∞ keeps the product of signs.
    out.atom_pos_inf = a.atom_pos_inf * b.atom_pos_inf + a.atom_neg_inf * b.atom_neg_inf;
    out.atom_neg_inf = a.atom_pos_inf * b.atom_neg_inf + a.atom_neg_inf * b.atom_pos_inf;

    let pos = |d: &LlrDensity, i: usize| d.mass[k + i];
    let neg = |d: &LlrDensity, i: usize| d.mass[k - i];
    // Suffix sums over magnitudes ≥ i, including the infinite atoms.
    let suffix = |d: &LlrDensity| -> (Vec<f64>, Vec<f64>) {
        let mut sp = vec![0.0; k + 2];
        let mut sm = vec![0.0; k + 2];
        sp[k + 1] = d.atom_pos_inf;
        sm[k + 1] = d.atom_neg_inf;
        for i in (1..=k).rev() {
            sp[i] = sp[i + 1] + pos(d, i);
            sm[i] = sm[i + 1] + neg(d, i);
        }
        (sp, sm)
    };
    let (asp, asm) = suffix(a);
    let (bsp, bsm) = suffix(b);
    let mut outp = vec![0.0; k + 1];
    let mut outm = vec![0.0; k + 1];
    let mut zero_extra = 0.0;

    if let Some((alo, ahi)) = a.magnitude_support() {
        let bsupp = b.magnitude_support();
        for i in alo..=ahi {
            let (pa, ma) = (pos(a, i), neg(a, i));
            if pa == 0.0 && ma == 0.0 {
                continue;
            }
            // Partners far above i, including ±∞: the result is i.
            let far = (i + band + 1).min(k + 1);
            let (sp, sm) = (bsp[far], bsm[far]);
            outp[i] += pa * sp + ma * sm;
            outm[i] += pa * sm + ma * sp;
            // Partners within the band use the rounding table.
            if let Some((blo, bhi)) = bsupp {
                let jlo = i.saturating_sub(band).max(1).max(blo);
                let jhi = (i + band).min(k).min(bhi);
                let row = &g.table[(i - 1) * width..i * width];
                for j in jlo..=jhi {
                    let (pb, mb) = (pos(b, j), neg(b, j));
                    if pb == 0.0 && mb == 0.0 {
                        continue;
                    }
                    let r = row[j + band - i] as usize;
                    let same = pa * pb + ma * mb;
                    let diff = pa * mb + ma * pb;
                    if r == 0 {
                        zero_extra += same + diff;
                    } else {
                        outp[r] += same;
                        outm[r] += diff;
                    }
                }
            }
        }
    }
    if let Some((blo, bhi)) = b.magnitude_support() {
        for j in blo..=bhi {
            let (pb, mb) = (pos(b, j), neg(b, j));
            if pb == 0.0 && mb == 0.0 {
                continue;
            }
            let far = (j + band + 1).min(k + 1);
            let (sp, sm) = (asp[far], asm[far]);
            outp[j] += pb * sp + mb * sm;
            outm[j] += pb * sm + mb * sp;
        }
    }
    out.atom_zero += zero_extra;
    for i in 1..=k {
        out.mass[k + i] = outp[i];
        out.mass[k - i] = outm[i];
    }
    Ok(out)
}

/// Density of the synthetic channel `W_n^⟨i⟩`: bits of `i` from the most
/// significant down, 1 selecting ⊛ and 0 selecting ⊞.
pub fn evolve(w: &Dmc, n: usize, i: usize, grid: &Grid) -> Result<LlrDensity, DensityError> {
    if n >= usize::BITS as usize {
        return Err(DensityError::TooDeep(n));
    }
    if i >> n != 0 {
        return Err(DensityError::Index { index: i, size: 1 << n });
    }
    let mut a = density_from_channel(w, grid)?;
    for level in (0..n).rev() {
        a = if (i >> level) & 1 == 1 { var_conv(&a, &a)? } else { check_conv(&a, &a)? };
    }
    Ok(a)
}

/// Error probability and Bhattacharyya parameter of every `W_n^⟨i⟩`.
///
/// Depth-first: only one density per level is alive at any time.
pub fn evolve_all(w: &Dmc, n: usize, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>), DensityError> {
    if n > 24 {
        return Err(DensityError::TooDeep(n));
    }
    let root = density_from_channel(w, grid)?;
    let size = 1usize << n;
    let mut pe = vec![0.0; size];
    let mut z = vec![0.0; size];
    fn walk(a: &LlrDensity, depth: usize, n: usize, index: usize, pe: &mut [f64], z: &mut [f64]) -> Result<(), DensityError> {
        if depth == n {
            pe[index] = a.pe();
            z[index] = a.bhattacharyya();
            return Ok(());
        }
        let minus = check_conv(a, a)?;
        walk(&minus, depth + 1, n, index << 1, pe, z)?;
        drop(minus);
        let plus = var_conv(a, a)?;
        walk(&plus, depth + 1, n, (index << 1) | 1, pe, z)
    }
    walk(&root, 0, n, 0, &mut pe, &mut z)?;
    Ok((pe, z))
}

/// A frozen-set choice together with the per-index reliability estimates.
#[derive(Debug, Clone, Serialize)]
pub struct ConstructionResult {
    pub n: usize,
    /// Error probability estimate of each synthetic channel.
    pub pe_per_index: Vec<f64>,
    /// Selected information indices, sorted.
    pub info: Vec<usize>,
    /// Frozen indices, sorted.
    pub frozen: Vec<usize>,
    /// Sum of the estimates over the information set.
    pub union_bound: f64,
}

/// Picks the `count` most reliable indices, ties going to the lower index.
pub fn select(pe: &[f64], count: usize) -> Result<(Vec<usize>, Vec<usize>), DensityError> {
    if count > pe.len() {
        return Err(DensityError::BadCount { count, size: pe.len() });
    }
    let mut order: Vec<usize> = (0..pe.len()).collect();
    order.sort_by(|&x, &y| pe[x].total_cmp(&pe[y]).then(x.cmp(&y)));
    let mut info = order[..count].to_vec();
    let mut frozen = order[count..].to_vec();
    info.sort_unstable();
    frozen.sort_unstable();
    Ok((info, frozen))
}

fn finish(n: usize, pe: Vec<f64>, count: usize) -> Result<ConstructionResult, DensityError> {
    let (info, frozen) = select(&pe, count)?;
    let union_bound = info.iter().map(|&i| pe[i]).sum();
    Ok(ConstructionResult { n, pe_per_index: pe, info, frozen, union_bound })
}

/// Density-evolution construction.
pub fn construct(w: &Dmc, n: usize, count: usize, grid: &Grid) -> Result<ConstructionResult, DensityError> {
    if n > 24 {
        return Err(DensityError::TooDeep(n));
    }
    if count > 1 << n {
        return Err(DensityError::BadCount { count, size: 1 << n });
    }
    let (pe, _) = evolve_all(w, n, grid)?;
    finish(n, pe, count)
}

/// Construction that pretends the channel is a BEC with erasure probability
/// `1 − I(W)`. Estimates are the erasure channels' error probabilities `ε/2`.
pub fn heuristic_bec_construct(w: &Dmc, n: usize, count: usize) -> Result<ConstructionResult, DensityError> {
    if w.q() != 2 {
        return Err(DensityError::NotSymmetric);
    }
    if n > 24 {
        return Err(DensityError::TooDeep(n));
    }
    let eps = 1.0 - w.capacity();
    let pe: Vec<f64> = bec_ladder(eps, n).into_iter().map(|e| e / 2.0).collect();
    finish(n, pe, count)
}

/// Construction from genie-aided SC simulation of the all-zero word. The
/// estimate of each index is `P(L < 0) + P(L = 0)/2`.
pub fn monte_carlo_construct(w: &Dmc, n: usize, count: usize, trials: usize, seed: u64) -> Result<ConstructionResult, DensityError> {
    if trials == 0 {
        return Err(DensityError::NoTrials);
    }
    if w.q() != 2 {
        return Err(DensityError::NotSymmetric);
    }
    if n > 24 {
        return Err(DensityError::TooDeep(n));
    }
    if count > 1 << n {
        return Err(DensityError::BadCount { count, size: 1 << n });
    }
    let size = 1usize << n;
    let mut genie = GenieSc::new(w, n);
    let zeros = vec![0usize; size];
    let mut errors = vec![0.0; size];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        for (e, &l) in errors.iter_mut().zip(genie.run(&zeros, &mut rng)) {
            if l < 0.0 {
                *e += 1.0;
            } else if l == 0.0 || l.is_nan() {
                *e += 0.5;
            }
        }
    }
    let pe = errors.into_iter().map(|e| e / trials as f64).collect();
    finish(n, pe, count)
}

/// Monte-Carlo estimate of `Z(W_n^⟨i⟩)` from genie-aided SC with the all-zero
/// word: the sample mean of `exp(−L_i/2)`.
pub fn monte_carlo_z(w: &Dmc, n: usize, i: usize, trials: usize, seed: u64) -> Result<f64, DensityError> {
    if i >> n != 0 {
        return Err(DensityError::Index { index: i, size: 1 << n });
    }
    Ok(monte_carlo_z_all(w, n, trials, seed)?[i])
}

/// [`monte_carlo_z`] for every index from the same set of trials.
pub fn monte_carlo_z_all(w: &Dmc, n: usize, trials: usize, seed: u64) -> Result<Vec<f64>, DensityError> {
    if trials == 0 {
        return Err(DensityError::NoTrials);
    }
    if w.q() != 2 {
        return Err(DensityError::NotSymmetric);
    }
    let size = 1usize << n;
    let mut genie = GenieSc::new(w, n);
    let zeros = vec![0usize; size];
    let mut acc = vec![0.0; size];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let llrs = genie.run(&zeros, &mut rng);
        for (a, &l) in acc.iter_mut().zip(llrs) {
            *a += if l.is_nan() { 1.0 } else { (-0.5 * l).exp() };
        }
    }
    Ok(acc.into_iter().map(|s| s / trials as f64).collect())
}
