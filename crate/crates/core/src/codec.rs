//! Polar codes: encoding, successive-cancellation decoding and simulation.
//!
//! The generator is `G_n = B·G^{⊗n}`, and since the digit-reversal `B`
//! commutes with Kronecker powers, `x = (u·G^{⊗n})·B`. Decoders therefore
//! undo `B` on the received word and run SC on the plain Kronecker structure.
//!
//! The 2×2 binary kernel is decoded in the LLR domain. Every other kernel
//! uses probability vectors with exact marginalization over the unknown
//! suffix of each kernel block.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{Dmc, OutputSampler};
use crate::density::{evolve_all, DensityError, Grid};
use crate::kernel::{pow_sat, Kernel, KernelError};
use crate::transform::{bit_reversal_perm, encode, encode_in_place, TransformError};

/// Largest blocklength handled by the codec.
pub const MAX_BLOCKLENGTH: u64 = 1 << 24;

#[derive(Error, Debug)]
pub enum CodecError {
    #[error("frozen index {index} out of range for blocklength {size}")]
    FrozenIndex { index: usize, size: usize },
    #[error("frozen set has a repeated index")]
    RepeatedFrozen,
    #[error("expected {expected} symbols, got {found}")]
    Length { expected: usize, found: usize },
    #[error("symbol {0} is outside the alphabet")]
    Symbol(usize),
    #[error("channel has {channel} inputs but the kernel works over GF({kernel})")]
    Alphabet { channel: usize, kernel: usize },
    #[error("blocklength {0} is too large")]
    TooLarge(u64),
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("at least one trial is required")]
    NoTrials,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// A polar code: kernel, depth, frozen positions and their values.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCode {
    kernel: Kernel,
    n: usize,
    size: usize,
    frozen: Vec<usize>,
    info: Vec<usize>,
    /// Value at every position; information positions hold 0.
    frozen_value_at: Vec<usize>,
    is_frozen: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub u_hat: Vec<usize>,
    pub info_hat: Vec<usize>,
    /// Decision LLRs, for the binary LLR decoder only.
    pub llrs: Option<Vec<f64>>,
}

/// Frame and symbol error statistics of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FerResult {
    pub trials: usize,
    pub frame_errors: usize,
    pub symbol_errors: usize,
    pub fer: f64,
    pub ber: f64,
    /// Half-width of the 95% normal-approximation interval on `fer`.
    pub ci: f64,
}

/// Half-width of a 95% Wald interval for a proportion.
pub fn wald_half_width(p: f64, trials: usize) -> f64 {
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

impl PolarCode {
    /// A code with all-zero frozen values.
    pub fn new(kernel: Kernel, n: usize, frozen: &[usize]) -> Result<Self, CodecError> {
        Self::with_frozen_values(kernel, n, frozen, &vec![0; frozen.len()])
    }

    pub fn with_frozen_values(
        kernel: Kernel,
        n: usize,
        frozen: &[usize],
        values: &[usize],
    ) -> Result<Self, CodecError> {
        let size = pow_sat(kernel.ell(), n);
        if size > MAX_BLOCKLENGTH {
            return Err(CodecError::TooLarge(size));
        }
        let size = size as usize;
        if values.len() != frozen.len() {
            return Err(CodecError::Length { expected: frozen.len(), found: values.len() });
        }
        let mut is_frozen = vec![false; size];
        let mut frozen_value_at = vec![0; size];
        for (&i, &v) in frozen.iter().zip(values) {
            if i >= size {
                return Err(CodecError::FrozenIndex { index: i, size });
            }
            if v >= kernel.q() {
                return Err(CodecError::Symbol(v));
            }
            if std::mem::replace(&mut is_frozen[i], true) {
                return Err(CodecError::RepeatedFrozen);
            }
            frozen_value_at[i] = v;
        }
        let frozen: Vec<usize> = (0..size).filter(|&i| is_frozen[i]).collect();
        let info: Vec<usize> = (0..size).filter(|&i| !is_frozen[i]).collect();
        Ok(PolarCode { kernel, n, size, frozen, info, frozen_value_at, is_frozen })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn frozen(&self) -> &[usize] {
        &self.frozen
    }

    pub fn info_indices(&self) -> &[usize] {
        &self.info
    }

    pub fn frozen_values(&self) -> Vec<usize> {
        self.frozen.iter().map(|&i| self.frozen_value_at[i]).collect()
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.is_frozen[i]
    }

    pub fn rate(&self) -> f64 {
        self.info.len() as f64 / self.size as f64
    }

    /// Full input vector: information symbols scattered into `F^c`, frozen
    /// values elsewhere.
    pub fn scatter(&self, info: &[usize]) -> Result<Vec<usize>, CodecError> {
        if info.len() != self.info.len() {
            return Err(CodecError::Length { expected: self.info.len(), found: info.len() });
        }
        if let Some(&bad) = info.iter().find(|&&s| s >= self.kernel.q()) {
            return Err(CodecError::Symbol(bad));
        }
        let mut u = self.frozen_value_at.clone();
        for (&i, &s) in self.info.iter().zip(info) {
            u[i] = s;
        }
        Ok(u)
    }

    fn check_channel(&self, w: &Dmc) -> Result<(), CodecError> {
        if w.q() != self.kernel.q() {
            return Err(CodecError::Alphabet { channel: w.q(), kernel: self.kernel.q() });
        }
        Ok(())
    }
}

/// Encodes information symbols into a codeword.
pub fn encode_message(code: &PolarCode, info: &[usize]) -> Result<Vec<usize>, CodecError> {
    let u = code.scatter(info)?;
    Ok(encode(&u, &code.kernel, code.n)?)
}

/// Successive-cancellation decoding of a received word.
pub fn sc_decode(code: &PolarCode, w: &Dmc, y: &[usize]) -> Result<DecodeResult, CodecError> {
    code.check_channel(w)?;
    if code.kernel.is_arikan() {
        let mut dec = LlrSc::new(code.n);
        let natural = dec.channel_llrs(w, y)?;
        let mut u_hat = vec![0u8; code.size];
        let mut llrs = vec![0.0; code.size];
        dec.decode(&natural, Some(code), &mut Forced::Frozen(code), &mut u_hat, &mut llrs);
        let u_hat: Vec<usize> = u_hat.into_iter().map(usize::from).collect();
        let info_hat = code.info.iter().map(|&i| u_hat[i]).collect();
        Ok(DecodeResult { u_hat, info_hat, llrs: Some(llrs) })
    } else {
        sc_decode_probability(code, w, y)
    }
}

/// Probability-vector SC for any kernel, including the 2×2 binary one.
pub fn sc_decode_probability(code: &PolarCode, w: &Dmc, y: &[usize]) -> Result<DecodeResult, CodecError> {
    code.check_channel(w)?;
    let k = &code.kernel;
    let table = k.table()?;
    let q = k.q();
    if y.len() != code.size {
        return Err(CodecError::Length { expected: code.size, found: y.len() });
    }
    let rev = bit_reversal_perm(k.ell(), code.n)?;
    let mut lik = vec![0.0; code.size * q];
    for j in 0..code.size {
        let yy = y[rev[j]];
        if yy >= w.outputs() {
            return Err(CodecError::Symbol(yy));
        }
        for a in 0..q {
            lik[j * q + a] = w.prob(yy, a);
        }
        normalize(&mut lik[j * q..(j + 1) * q]);
    }
    let mut u_hat = vec![0usize; code.size];
    let mut ctx = ProbSc { q, ell: k.ell(), table: &table, code, u_hat: &mut u_hat };
    ctx.node(code.n, 0, &lik);
    let info_hat = code.info.iter().map(|&i| u_hat[i]).collect();
    Ok(DecodeResult { u_hat, info_hat, llrs: None })
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

struct ProbSc<'a> {
    q: usize,
    ell: usize,
    table: &'a [usize],
    code: &'a PolarCode,
    u_hat: &'a mut [usize],
}

impl ProbSc<'_> {
    /// Decodes the `ℓ^m` inputs starting at `off` from per-position
    /// likelihoods of the block's Kronecker image; returns that image.
    fn node(&mut self, m: usize, off: usize, lik: &[f64]) -> Vec<usize> {
        let (q, l) = (self.q, self.ell);
        if m == 0 {
            let s = if self.code.is_frozen[off] {
                self.code.frozen_value_at[off]
            } else {
                // Lowest symbol wins ties, including an all-zero vector.
                let mut best = 0;
                for a in 1..q {
                    if lik[a] > lik[best] {
                        best = a;
                    }
                }
                best
            };
            self.u_hat[off] = s;
            return vec![s];
        }
        let sub = lik.len() / q / l;
        let mut decided: Vec<Vec<usize>> = Vec::with_capacity(l);
        let mut digits = vec![0usize; l];
        let mut out_digits = vec![0usize; l];
        for r in 0..l {
            let free = l - 1 - r;
            let suffixes = q.pow(free as u32);
            let mut child = vec![0.0; sub * q];
            for j in 0..sub {
                for (dst, d) in digits.iter_mut().zip(&decided) {
                    *dst = d[j];
                }
                for a in 0..q {
                    digits[r] = a;
                    let mut acc = 0.0;
                    for s in 0..suffixes {
                        crate::kernel::to_digits(s, q, &mut digits[r + 1..]);
                        let x = self.table[crate::kernel::from_digits(&digits, q)];
                        crate::kernel::to_digits(x, q, &mut out_digits);
                        let mut p = 1.0;
                        for (c, &xc) in out_digits.iter().enumerate() {
                            p *= lik[(c * sub + j) * q + xc];
                            if p == 0.0 {
                                break;
                            }
                        }
                        acc += p;
                    }
                    child[j * q + a] = acc;
                }
                normalize(&mut child[j * q..(j + 1) * q]);
            }
            let est = self.node(m - 1, off + r * pow_sat(l, m - 1) as usize, &child);
            decided.push(est);
        }
        let mut image = vec![0usize; sub * l];
        for j in 0..sub {
            for (dst, d) in digits.iter_mut().zip(&decided) {
                *dst = d[j];
            }
            let x = self.table[crate::kernel::from_digits(&digits, q)];
            crate::kernel::to_digits(x, q, &mut out_digits);
            for (c, &xc) in out_digits.iter().enumerate() {
                image[c * sub + j] = xc;
            }
        }
        image
    }
}

/// Check-node LLR combination `2 atanh(tanh(a/2) tanh(b/2))`, evaluated as
/// `±(min + ln(1+e^{−(|a|+|b|)}) − ln(1+e^{−||a|−|b||}))` so it stays exact
/// for large magnitudes. Correction terms below `e^{−40}` are dropped.
#[inline]
pub fn f_minus(a: f64, b: f64) -> f64 {
    if a.is_infinite() {
        return if a > 0.0 { b } else { -b };
    }
    if b.is_infinite() {
        return if b > 0.0 { a } else { -a };
    }
    let (x, y) = (a.abs(), b.abs());
    let gap = (x - y).abs();
    let mut mag = x.min(y);
    if gap < 40.0 {
        mag -= (-gap).exp().ln_1p();
        let sum = x + y;
        if sum < 40.0 {
            mag += (-sum).exp().ln_1p();
        }
    }
    if (a < 0.0) != (b < 0.0) {
        -mag
    } else {
        mag
    }
}

/// Variable-node LLR update given the decided partial sum.
#[inline]
pub fn f_plus(a: f64, b: f64, bit: u8) -> f64 {
    let v = if bit == 0 { b + a } else { b - a };
    if v.is_nan() {
        0.0
    } else {
        v
    }
}

/// Hard decision on an LLR: 1 only for strictly negative values.
#[inline]
pub fn llr_decision(l: f64) -> u8 {
    u8::from(l < 0.0)
}

enum Forced<'a> {
    /// Frozen positions take their code value; others are decided.
    Frozen(&'a PolarCode),
    /// Every position takes the true input value (genie-aided).
    Genie(&'a [u8]),
}

/// Workspace of the binary LLR decoder.
struct LlrSc {
    n: usize,
    rev: Vec<usize>,
    llr: Vec<Vec<f64>>,
    bits: Vec<Vec<u8>>,
}

impl LlrSc {
    fn new(n: usize) -> Self {
        LlrSc {
            n,
            rev: bit_reversal_perm(2, n).expect("guarded blocklength"),
            llr: (0..=n).map(|m| vec![0.0; 1 << m]).collect(),
            bits: (0..=n).map(|m| vec![0u8; 1 << m]).collect(),
        }
    }

    /// Channel LLRs in Kronecker order: position `j` sees `y[rev(j)]`.
    fn channel_llrs(&self, w: &Dmc, y: &[usize]) -> Result<Vec<f64>, CodecError> {
        if y.len() != 1 << self.n {
            return Err(CodecError::Length { expected: 1 << self.n, found: y.len() });
        }
        self.rev
            .iter()
            .map(|&r| {
                let s = y[r];
                if s >= w.outputs() {
                    Err(CodecError::Symbol(s))
                } else {
                    Ok(w.llr(s))
                }
            })
            .collect()
    }

    fn decode(&mut self, natural: &[f64], code: Option<&PolarCode>, forced: &mut Forced, u: &mut [u8], llrs: &mut [f64]) {
        let n = self.n;
        self.llr[n].copy_from_slice(natural);
        let prefix = code.map(|c| {
            let mut p = vec![0u32; c.size + 1];
            for i in 0..c.size {
                p[i + 1] = p[i] + u32::from(c.is_frozen[i]);
            }
            p
        });
        self.node(n, 0, forced, prefix.as_deref(), u, llrs);
    }

    fn node(&mut self, m: usize, off: usize, forced: &mut Forced, frozen_prefix: Option<&[u32]>, u: &mut [u8], llrs: &mut [f64]) {
        let len = 1usize << m;
        if let (Some(p), Forced::Frozen(code)) = (frozen_prefix, &*forced) {
            if m > 0 && (p[off + len] - p[off]) as usize == len {
                // All-frozen subtree: its image is the encoding of the frozen values.
                let bits = &mut self.bits[m];
                for (j, b) in bits.iter_mut().enumerate() {
                    *b = code.frozen_value_at[off + j] as u8;
                    u[off + j] = *b;
                    llrs[off + j] = 0.0;
                }
                if bits.iter().any(|&b| b != 0) {
                    kronecker_encode_bits(bits);
                }
                return;
            }
        }
        if m == 0 {
            let l = self.llr[0][0];
            llrs[off] = l;
            let v = match forced {
                Forced::Genie(truth) => truth[off],
                Forced::Frozen(code) => {
                    if code.is_frozen[off] {
                        code.frozen_value_at[off] as u8
                    } else {
                        llr_decision(l)
                    }
                }
            };
            u[off] = v;
            self.bits[0][0] = v;
            return;
        }
        let half = len / 2;
        {
            let (lo, hi) = self.llr.split_at_mut(m);
            let (src, dst) = (&hi[0], &mut lo[m - 1]);
            for j in 0..half {
                dst[j] = f_minus(src[j], src[j + half]);
            }
        }
        self.node(m - 1, off, forced, frozen_prefix, u, llrs);
        {
            let (lo, hi) = self.bits.split_at_mut(m);
            hi[0][..half].copy_from_slice(&lo[m - 1]);
        }
        {
            let (lo, hi) = self.llr.split_at_mut(m);
            let (src, dst) = (&hi[0], &mut lo[m - 1]);
            let s = &self.bits[m];
            for j in 0..half {
                dst[j] = f_plus(src[j], src[j + half], s[j]);
            }
        }
        self.node(m - 1, off + half, forced, frozen_prefix, u, llrs);
        let (lo, hi) = self.bits.split_at_mut(m);
        let (child, out) = (&lo[m - 1], &mut hi[0]);
        out[..half].iter_mut().zip(&child[..half]).for_each(|(o, c)| *o ^= c);
        out[half..2 * half].copy_from_slice(&child[..half]);
    }
}

/// In-place `v = u·G^{⊗m}` for the 2×2 binary kernel, without reordering.
fn kronecker_encode_bits(a: &mut [u8]) {
    let mut h = 1;
    while h < a.len() {
        for base in (0..a.len()).step_by(2 * h) {
            for j in base..base + h {
                a[j] ^= a[j + h];
            }
        }
        h *= 2;
    }
}

/// Genie-aided SC for the 2×2 binary kernel: every position is decoded with
/// the true earlier inputs, and its decision LLR is reported.
///
/// A position's genie decision is wrong exactly when `llr_decision(L_i) ≠ u_i`,
/// and an ordinary SC decoder makes a frame error exactly when some
/// information position has a genie error.
pub struct GenieSc {
    w: Dmc,
    sampler: OutputSampler,
    dec: LlrSc,
    kernel: Kernel,
    x: Vec<usize>,
    tmp: Vec<usize>,
    y_llr: Vec<f64>,
    truth: Vec<u8>,
    u_out: Vec<u8>,
    llrs: Vec<f64>,
}

impl GenieSc {
    pub fn new(w: &Dmc, n: usize) -> Self {
        let size = 1usize << n;
        GenieSc {
            w: w.clone(),
            sampler: OutputSampler::new(w),
            dec: LlrSc::new(n),
            kernel: Kernel::arikan(),
            x: vec![0; size],
            tmp: vec![0; size],
            y_llr: vec![0.0; size],
            truth: vec![0; size],
            u_out: vec![0; size],
            llrs: vec![0.0; size],
        }
    }

    /// Transmits `u` once and returns the genie decision LLR of every position.
    pub fn run<R: Rng + ?Sized>(&mut self, u: &[usize], rng: &mut R) -> &[f64] {
        self.x.copy_from_slice(u);
        encode_in_place(&mut self.x, &mut self.tmp, &self.kernel);
        for (j, &r) in self.dec.rev.iter().enumerate() {
            let yy = self.sampler.sample(self.x[r], rng);
            self.y_llr[j] = self.w.llr(yy);
        }
        self.genie_decode(u)
    }

    /// Genie decision LLRs for a given received word.
    pub fn run_received(&mut self, u: &[usize], y: &[usize]) -> Result<&[f64], CodecError> {
        if u.len() != self.truth.len() {
            return Err(CodecError::Length { expected: self.truth.len(), found: u.len() });
        }
        let natural = self.dec.channel_llrs(&self.w, y)?;
        self.y_llr.copy_from_slice(&natural);
        Ok(self.genie_decode(u))
    }

    fn genie_decode(&mut self, u: &[usize]) -> &[f64] {
        for (t, &v) in self.truth.iter_mut().zip(u) {
            *t = v as u8;
        }
        let natural = std::mem::take(&mut self.y_llr);
        let truth = std::mem::take(&mut self.truth);
        self.dec.decode(&natural, None, &mut Forced::Genie(&truth), &mut self.u_out, &mut self.llrs);
        self.y_llr = natural;
        self.truth = truth;
        &self.llrs
    }
}

/// Sum of the Bhattacharyya parameters of the information positions.
///
/// Evaluated by density evolution on the default grid, which is exact for
/// erasure channels. Other kernels and asymmetric channels are unsupported.
pub fn union_bound(code: &PolarCode, w: &Dmc) -> Result<f64, CodecError> {
    code.check_channel(w)?;
    if code.info.is_empty() {
        return Ok(0.0);
    }
    if !code.kernel.is_arikan() {
        return Err(CodecError::Unsupported("union bound needs the 2×2 binary kernel"));
    }
    let (_, z) = evolve_all(w, code.n, &Grid::standard())?;
    Ok(code.info.iter().map(|&i| z[i]).sum())
}

/// Error counts over a block of trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCounts {
    pub frame_errors: usize,
    pub symbol_errors: usize,
}

impl std::ops::AddAssign for ErrorCounts {
    fn add_assign(&mut self, o: Self) {
        self.frame_errors += o.frame_errors;
        self.symbol_errors += o.symbol_errors;
    }
}

impl FerResult {
    pub fn from_counts(trials: usize, info_len: usize, c: ErrorCounts) -> Self {
        let fer = c.frame_errors as f64 / trials as f64;
        let ber = if info_len == 0 { 0.0 } else { c.symbol_errors as f64 / (trials * info_len) as f64 };
        FerResult {
            trials,
            frame_errors: c.frame_errors,
            symbol_errors: c.symbol_errors,
            fer,
            ber,
            ci: wald_half_width(fer, trials),
        }
    }
}

/// SC decoding errors over the trials in `range`.
///
/// Trial `t` draws from a ChaCha8 stream seeded by `seed` on stream `t`,
/// so results do not depend on how trials are split or scheduled.
pub fn simulate_trials(code: &PolarCode, w: &Dmc, range: std::ops::Range<usize>, seed: u64) -> Result<ErrorCounts, CodecError> {
    code.check_channel(w)?;
    let sampler = OutputSampler::new(w);
    let q = code.kernel.q();
    let k = code.info.len();
    let mut counts = ErrorCounts::default();
    let mut y = vec![0usize; code.size];
    for t in range {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        let info: Vec<usize> = (0..k).map(|_| rng.gen_range(0..q)).collect();
        let x = encode_message(code, &info)?;
        for (yj, &xj) in y.iter_mut().zip(&x) {
            *yj = sampler.sample(xj, &mut rng);
        }
        let dec = sc_decode(code, w, &y)?;
        let errs = dec.info_hat.iter().zip(&info).filter(|(a, b)| a != b).count();
        counts.symbol_errors += errs;
        counts.frame_errors += usize::from(errs > 0);
    }
    Ok(counts)
}

/// Monte-Carlo frame and symbol error rates of SC decoding.
pub fn simulate_fer(code: &PolarCode, w: &Dmc, trials: usize, seed: u64) -> Result<FerResult, CodecError> {
    if trials == 0 {
        return Err(CodecError::NoTrials);
    }
    let counts = simulate_trials(code, w, 0..trials, seed)?;
    Ok(FerResult::from_counts(trials, code.info.len(), counts))
}
