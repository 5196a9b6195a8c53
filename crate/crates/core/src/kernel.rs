//! Polarization kernels: linear `ℓ × ℓ` matrices over GF(q) and nonlinear
//! bijections of `X^ℓ`.
//!
//! A kernel maps an input block `u = (u_0, …, u_{ℓ-1})` to `x = g(u)`; for a
//! linear kernel `x = u·G`. Tuples are indexed big-endian, so
//! `u_0` is the most significant base-`q` digit and every prefix
//! `u_0 … u_{i-1}` corresponds to a contiguous range of indices.
//!
//! Partial distances are found by exhaustive enumeration. They are oracle
//! quantities and the enumeration is guarded rather than pruned.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldError};

/// Largest `q^(ℓ-1)` accepted for linear partial distances.
pub const LINEAR_DISTANCE_LIMIT: u64 = 1 << 21;
/// Largest `q^(2ℓ)` accepted for nonlinear partial distances.
pub const NONLINEAR_DISTANCE_LIMIT: u64 = 1 << 28;
/// Largest `q^ℓ` for which a full input/output table is materialized.
pub const TABLE_LIMIT: u64 = 1 << 16;

#[derive(Error, Debug)]
pub enum KernelError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("kernel size must be at least 1")]
    EmptyKernel,
    #[error("matrix must be {ell}×{ell} with entries below {q}")]
    BadMatrix { ell: usize, q: usize },
    #[error("matrix is singular over GF({0})")]
    Singular(usize),
    #[error("table must have {0} entries and be a bijection")]
    NotABijection(usize),
    #[error("enumeration of size {size} exceeds the limit {limit}")]
    TooLarge { size: u64, limit: u64 },
    #[error("operation needs a linear kernel")]
    NotLinear,
    #[error("gamma must be a nonzero field element")]
    ZeroGamma,
    #[error("malformed kernel spec '{0}'")]
    BadSpec(String),
    #[error("reading kernel file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing kernel JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelKind {
    /// Row-major `ℓ × ℓ` matrix.
    Linear(Vec<usize>),
    /// `table[index(u)] = index(g(u))` over all `q^ℓ` tuples.
    Nonlinear(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    field: Field,
    ell: usize,
    kind: KernelKind,
}

/// Partial distances and the exponents derived from them.
///
/// For linear kernels `d_min == d_max == d` and the two exponent pairs
/// coincide.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelProfile {
    pub ell: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<usize>>,
    pub d_min: Vec<usize>,
    pub d_max: Vec<usize>,
    pub e: f64,
    pub v: f64,
    pub e1: f64,
    pub v1: f64,
    pub e2: f64,
    pub v2: f64,
}

/// Which sufficient condition, if any, guarantees polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "certificate", rename_all = "snake_case")]
pub enum Certificate {
    /// Binary kernel whose canonical form is not diagonal.
    BinaryNonDiagonal,
    /// Prime field, canonical form not diagonal.
    PrimeFieldNonDiagonal,
    /// Canonical row `row` has `G[row][col] / G[row][row]` primitive.
    PrimitiveRatio { row: usize, col: usize },
    /// Binary nonlinear kernel meeting the last-symbol permutation condition.
    NonlinearCondition,
    /// None of the implemented conditions apply. This is not a disproof.
    None,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        !matches!(self, Certificate::None)
    }
}

#[derive(Serialize, Deserialize)]
struct KernelFile {
    q: usize,
    ell: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<usize>>,
}

/// `q^k` with overflow saturating to `u64::MAX`.
pub(crate) fn pow_sat(q: usize, k: usize) -> u64 {
    (0..k).try_fold(1u64, |acc, _| acc.checked_mul(q as u64)).unwrap_or(u64::MAX)
}

/// Big-endian digits of `index` in base `q`, written into `out`.
#[inline]
pub fn to_digits(mut index: usize, q: usize, out: &mut [usize]) {
    for d in out.iter_mut().rev() {
        *d = index % q;
        index /= q;
    }
}

#[inline]
pub fn from_digits(digits: &[usize], q: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * q + d)
}

/// Rank of a row-major matrix over `f`.
pub(crate) fn rank(f: &Field, rows: usize, cols: usize, m: &[usize]) -> usize {
    let mut a = m.to_vec();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| a[i * cols + c] != 0) else { continue };
        for j in 0..cols {
            a.swap(r * cols + j, p * cols + j);
        }
        let inv = f.inv(a[r * cols + c]).expect("pivot is nonzero");
        for i in 0..rows {
            if i != r && a[i * cols + c] != 0 {
                let factor = f.mul(a[i * cols + c], inv);
                for j in 0..cols {
                    let t = f.mul(factor, a[r * cols + j]);
                    a[i * cols + j] = f.sub(a[i * cols + j], t);
                }
            }
        }
        r += 1;
    }
    r
}

/// Mean and population variance of `log_ℓ d` over the entries of `d`.
pub fn exponent(d: &[usize], ell: usize) -> (f64, f64) {
    if ell < 2 || d.is_empty() {
        return (0.0, 0.0);
    }
    let logs: Vec<f64> = d.iter().map(|&x| (x as f64).ln() / (ell as f64).ln()).collect();
    let e = logs.iter().sum::<f64>() / logs.len() as f64;
    let v = logs.iter().map(|l| (l - e) * (l - e)).sum::<f64>() / logs.len() as f64;
    (e, v)
}

/// Lower bound `1 − (ℓ−1)/(ℓ ln ℓ)` on the Reed–Solomon kernel exponent.
pub fn rs_exponent_bound(ell: usize) -> f64 {
    let l = ell as f64;
    1.0 - (l - 1.0) / (l * l.ln())
}

/// Indices `j < q^n` whose base-`q` digit sum is at least `(q−1)n − r`:
/// the generator rows of the order-`r` q-ary Reed–Muller code.
pub fn reed_muller_rows(q: usize, n: usize, r: usize) -> Vec<usize> {
    let threshold = ((q - 1) * n) as i64 - r as i64;
    let size = q.pow(n as u32);
    (0..size)
        .filter(|&j| {
            let mut s = 0i64;
            let mut x = j;
            while x > 0 {
                s += (x % q) as i64;
                x /= q;
            }
            s >= threshold
        })
        .collect()
}

impl Kernel {
    pub fn linear(field: Field, matrix: Vec<Vec<usize>>) -> Result<Self, KernelError> {
        let ell = matrix.len();
        if ell == 0 {
            return Err(KernelError::EmptyKernel);
        }
        let q = field.q();
        if matrix.iter().any(|r| r.len() != ell || r.iter().any(|&v| v >= q)) {
            return Err(KernelError::BadMatrix { ell, q });
        }
        let flat = matrix.concat();
        if rank(&field, ell, ell, &flat) != ell {
            return Err(KernelError::Singular(q));
        }
        Ok(Kernel { field, ell, kind: KernelKind::Linear(flat) })
    }

    pub fn nonlinear(field: Field, ell: usize, table: Vec<usize>) -> Result<Self, KernelError> {
        if ell == 0 {
            return Err(KernelError::EmptyKernel);
        }
        let size = pow_sat(field.q(), ell);
        if size > TABLE_LIMIT {
            return Err(KernelError::TooLarge { size, limit: TABLE_LIMIT });
        }
        let size = size as usize;
        let mut seen = vec![false; size];
        if table.len() != size
            || table.iter().any(|&v| v >= size || std::mem::replace(&mut seen[v], true))
        {
            return Err(KernelError::NotABijection(size));
        }
        Ok(Kernel { field, ell, kind: KernelKind::Nonlinear(table) })
    }

    /// The 2×2 binary kernel `[[1,0],[1,1]]`.
    pub fn arikan() -> Self {
        Self::linear(Field::new(2).expect("GF(2)"), vec![vec![1, 0], vec![1, 1]]).expect("invertible")
    }

    pub fn identity(field: Field, ell: usize) -> Result<Self, KernelError> {
        let m = (0..ell).map(|i| (0..ell).map(|j| usize::from(i == j)).collect()).collect();
        Self::linear(field, m)
    }

    /// The `q × q` Reed–Solomon kernel over GF(q).
    ///
    /// Row 0 is all ones with a trailing zero. Row `r` for `1 ≤ r ≤ q−2` has
    /// `α^{(q−2−c)(q−1−r)}` in column `c < q−1` and a trailing zero. The last
    /// row is all ones except its final entry `γ`. With `q = 2, γ = 1` this is
    /// the 2×2 binary kernel.
    pub fn reed_solomon(q: usize, gamma: usize) -> Result<Self, KernelError> {
        let field = Field::new(q)?;
        field.element(gamma)?;
        if gamma == 0 {
            return Err(KernelError::ZeroGamma);
        }
        let mut m = vec![vec![0usize; q]; q];
        for (r, row) in m.iter_mut().enumerate().take(q - 1) {
            for (c, entry) in row.iter_mut().enumerate().take(q - 1) {
                *entry = field.alpha_pow(((q - 2 - c) * (q - 1 - r)) as u64);
            }
        }
        m[q - 1] = vec![1; q];
        m[q - 1][q - 1] = gamma;
        Self::linear(field, m)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> usize {
        self.field.q()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, KernelKind::Linear(_))
    }

    /// Row-major matrix of a linear kernel.
    pub fn matrix(&self) -> Option<&[usize]> {
        match &self.kind {
            KernelKind::Linear(m) => Some(m),
            KernelKind::Nonlinear(_) => None,
        }
    }

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> Option<usize> {
        self.matrix().map(|m| m[r * self.ell + c])
    }

    /// Whether this is the binary 2×2 kernel `[[1,0],[1,1]]`.
    pub fn is_arikan(&self) -> bool {
        self.q() == 2 && self.ell == 2 && self.matrix() == Some(&[1, 0, 1, 1])
    }

    /// Number of input tuples, `q^ℓ`, saturating.
    pub fn input_space(&self) -> u64 {
        pow_sat(self.q(), self.ell)
    }

    /// Computes `out = g(u)`.
    pub fn apply(&self, u: &[usize], out: &mut [usize]) {
        match &self.kind {
            KernelKind::Linear(m) => {
                let f = &self.field;
                out.fill(0);
                for (i, &ui) in u.iter().enumerate() {
                    if ui == 0 {
                        continue;
                    }
                    let row = &m[i * self.ell..(i + 1) * self.ell];
                    for (o, &g) in out.iter_mut().zip(row) {
                        *o = f.add(*o, f.mul(ui, g));
                    }
                }
            }
            KernelKind::Nonlinear(t) => {
                to_digits(t[from_digits(u, self.q())], self.q(), out);
            }
        }
    }

    /// Full map from input tuple index to output tuple index.
    pub fn table(&self) -> Result<Vec<usize>, KernelError> {
        if let KernelKind::Nonlinear(t) = &self.kind {
            return Ok(t.clone());
        }
        let size = self.input_space();
        if size > TABLE_LIMIT {
            return Err(KernelError::TooLarge { size, limit: TABLE_LIMIT });
        }
        let q = self.q();
        let mut u = vec![0; self.ell];
        let mut x = vec![0; self.ell];
        Ok((0..size as usize)
            .map(|idx| {
                to_digits(idx, q, &mut u);
                self.apply(&u, &mut x);
                from_digits(&x, q)
            })
            .collect())
    }

    /// Whether the matrix has no nonzero entries off the diagonal.
    pub fn is_diagonal(&self) -> bool {
        match self.matrix() {
            Some(m) => (0..self.ell).all(|r| (0..self.ell).all(|c| r == c || m[r * self.ell + c] == 0)),
            None => false,
        }
    }

    /// Brings a linear kernel to lower-triangular form `V·G·P`, with `V`
    /// upper-triangular and `P` a column permutation.
    ///
    /// Rows are processed bottom-up. Each row takes as pivot its rightmost
    /// nonzero entry among columns not yet claimed, that column is cleared
    /// from the rows above, and finally pivots are permuted onto the diagonal.
    /// A matrix that is already lower-triangular is returned unchanged.
    pub fn canonicalize(&self) -> Result<Kernel, KernelError> {
        let m = self.matrix().ok_or(KernelError::NotLinear)?;
        let (f, l) = (&self.field, self.ell);
        let mut a = m.to_vec();
        let mut claimed = vec![false; l];
        let mut pivot = vec![0usize; l];
        for r in (0..l).rev() {
            let p = (0..l)
                .rev()
                .find(|&c| !claimed[c] && a[r * l + c] != 0)
                .ok_or(KernelError::Singular(f.q()))?;
            claimed[p] = true;
            pivot[r] = p;
            let inv = f.inv(a[r * l + p])?;
            for k in 0..r {
                if a[k * l + p] != 0 {
                    let factor = f.mul(a[k * l + p], inv);
                    for c in 0..l {
                        let t = f.mul(factor, a[r * l + c]);
                        a[k * l + c] = f.sub(a[k * l + c], t);
                    }
                }
            }
        }
        let rows = (0..l).map(|r| (0..l).map(|c| a[r * l + pivot[c]]).collect()).collect();
        Kernel::linear(f.clone(), rows)
    }

    /// Partial distances and exponents.
    pub fn partial_distances(&self) -> Result<KernelProfile, KernelError> {
        let (d_min, d_max, d) = match &self.kind {
            KernelKind::Linear(_) => {
                let d = self.linear_distances()?;
                (d.clone(), d.clone(), Some(d))
            }
            KernelKind::Nonlinear(_) => {
                let (lo, hi) = self.nonlinear_distances()?;
                (lo, hi, None)
            }
        };
        let (e1, v1) = exponent(&d_min, self.ell);
        let (e2, v2) = exponent(&d_max, self.ell);
        let (e, v) = match &d {
            Some(d) => exponent(d, self.ell),
            None => (e1, v1),
        };
        Ok(KernelProfile { ell: self.ell, d, d_min, d_max, e, v, e1, v1, e2, v2 })
    }

    /// `D[i] = min_c wt(g_i + Σ_{k>i} c_k g_k)`, enumerating all `c` with an
    /// incremental accumulator.
    fn linear_distances(&self) -> Result<Vec<usize>, KernelError> {
        let m = self.matrix().ok_or(KernelError::NotLinear)?;
        let (f, l, q) = (&self.field, self.ell, self.q());
        let size = pow_sat(q, l.saturating_sub(1));
        if size > LINEAR_DISTANCE_LIMIT {
            return Err(KernelError::TooLarge { size, limit: LINEAR_DISTANCE_LIMIT });
        }
        let row = |k: usize| &m[k * l..(k + 1) * l];
        let mut out = Vec::with_capacity(l);
        for i in 0..l {
            let free = l - 1 - i;
            let mut acc: Vec<usize> = row(i).to_vec();
            let mut coeff = vec![0usize; free];
            let weight = |v: &[usize]| v.iter().filter(|&&x| x != 0).count();
            let mut best = weight(&acc);
            'enumerate: loop {
                // Odometer step over coefficients of rows i+1..ℓ.
                let mut pos = 0;
                loop {
                    if pos == free {
                        break 'enumerate;
                    }
                    let old = coeff[pos];
                    let new = if old + 1 == q { 0 } else { old + 1 };
                    coeff[pos] = new;
                    let delta = f.sub(new, old);
                    for (a, &g) in acc.iter_mut().zip(row(i + 1 + pos)) {
                        *a = f.add(*a, f.mul(delta, g));
                    }
                    if new != 0 {
                        break;
                    }
                    pos += 1;
                }
                best = best.min(weight(&acc));
                if best == 1 {
                    break;
                }
            }
            out.push(best);
        }
        Ok(out)
    }

    /// Pairwise distance `D^{[i]}_{x,x′}(prefix)` for any kernel kind.
    pub fn pair_distance(&self, i: usize, prefix: &[usize], x: usize, x2: usize) -> Result<usize, KernelError> {
        let size = pow_sat(self.q(), 2 * self.ell);
        if size > NONLINEAR_DISTANCE_LIMIT {
            return Err(KernelError::TooLarge { size, limit: NONLINEAR_DISTANCE_LIMIT });
        }
        let (a, b) = (self.coset_words(i, prefix, x), self.coset_words(i, prefix, x2));
        Ok(min_distance(&a, &b))
    }

    /// All images `g(prefix, x, v)` for free suffixes `v`.
    fn coset_words(&self, i: usize, prefix: &[usize], x: usize) -> Vec<Vec<usize>> {
        let (q, l) = (self.q(), self.ell);
        let free = l - 1 - i;
        let mut u = vec![0; l];
        u[..i].copy_from_slice(prefix);
        u[i] = x;
        let mut out = Vec::with_capacity(q.pow(free as u32));
        for s in 0..q.pow(free as u32) {
            to_digits(s, q, &mut u[i + 1..]);
            let mut y = vec![0; l];
            self.apply(&u, &mut y);
            out.push(y);
        }
        out
    }

    fn nonlinear_distances(&self) -> Result<(Vec<usize>, Vec<usize>), KernelError> {
        let (q, l) = (self.q(), self.ell);
        let size = pow_sat(q, 2 * l);
        if size > NONLINEAR_DISTANCE_LIMIT {
            return Err(KernelError::TooLarge { size, limit: NONLINEAR_DISTANCE_LIMIT });
        }
        let mut d_min = Vec::with_capacity(l);
        let mut d_max = Vec::with_capacity(l);
        let mut prefix = vec![0; l];
        for i in 0..l {
            // pair[x][x2] = min over prefixes of D_{x,x2}(prefix).
            let mut pair = vec![usize::MAX; q * q];
            for p in 0..q.pow(i as u32) {
                to_digits(p, q, &mut prefix[..i]);
                let words: Vec<_> = (0..q).map(|x| self.coset_words(i, &prefix[..i], x)).collect();
                for x in 0..q {
                    for x2 in (x + 1)..q {
                        let d = min_distance(&words[x], &words[x2]);
                        let slot = &mut pair[x * q + x2];
                        *slot = (*slot).min(d);
                    }
                }
            }
            let off_diag = || (0..q).flat_map(|x| ((x + 1)..q).map(move |x2| (x, x2)));
            d_min.push(off_diag().map(|(x, x2)| pair[x * q + x2]).min().unwrap_or(0));
            d_max.push(off_diag().map(|(x, x2)| pair[x * q + x2]).max().unwrap_or(0));
        }
        Ok((d_min, d_max))
    }

    /// Checks the implemented sufficient conditions for polarization.
    pub fn check_polarization(&self) -> Result<Certificate, KernelError> {
        if let KernelKind::Nonlinear(_) = self.kind {
            return Ok(if self.q() == 2 && self.nonlinear_condition() {
                Certificate::NonlinearCondition
            } else {
                Certificate::None
            });
        }
        let canon = self.canonicalize()?;
        if canon.is_diagonal() {
            return Ok(Certificate::None);
        }
        if self.q() == 2 {
            return Ok(Certificate::BinaryNonDiagonal);
        }
        if self.field.is_prime_field() {
            return Ok(Certificate::PrimeFieldNonDiagonal);
        }
        let l = self.ell;
        let g = |r, c| canon.entry(r, c).expect("linear");
        let k = (0..l)
            .rev()
            .find(|&r| (0..l).filter(|&c| g(r, c) != 0).count() > 1)
            .expect("non-diagonal canonical form has such a row");
        let f = &self.field;
        let diag_inv = f.inv(g(k, k))?;
        for j in 0..k {
            if g(k, j) != 0 && f.is_primitive(f.mul(g(k, j), diag_inv)) {
                return Ok(Certificate::PrimitiveRatio { row: k, col: j });
            }
        }
        Ok(Certificate::None)
    }

    /// Some prefix `u` of length `ℓ−1` has two output coordinates that are
    /// permutations of the last input symbol, and every other prefix has at
    /// least one such coordinate.
    fn nonlinear_condition(&self) -> bool {
        let (q, l) = (self.q(), self.ell);
        if l < 2 {
            return false;
        }
        let mut u = vec![0; l];
        let mut y = vec![0; l];
        let counts: Vec<usize> = (0..q.pow((l - 1) as u32))
            .map(|p| {
                to_digits(p, q, &mut u[..l - 1]);
                let mut images = vec![vec![false; q]; l];
                let mut is_perm = vec![true; l];
                for last in 0..q {
                    u[l - 1] = last;
                    self.apply(&u, &mut y);
                    for m in 0..l {
                        if std::mem::replace(&mut images[m][y[m]], true) {
                            is_perm[m] = false;
                        }
                    }
                }
                is_perm.iter().filter(|&&b| b).count()
            })
            .collect();
        counts.iter().enumerate().any(|(p, &c)| {
            c >= 2 && counts.iter().enumerate().all(|(v, &cv)| v == p || cv >= 1)
        })
    }

    pub fn to_json(&self) -> String {
        let q = self.q();
        let file = match &self.kind {
            KernelKind::Linear(m) => KernelFile {
                q,
                ell: self.ell,
                kind: "linear".into(),
                matrix: Some(m.chunks(self.ell).map(<[usize]>::to_vec).collect()),
                table: None,
            },
            KernelKind::Nonlinear(t) => KernelFile {
                q,
                ell: self.ell,
                kind: "nonlinear".into(),
                matrix: None,
                table: Some(t.clone()),
            },
        };
        serde_json::to_string_pretty(&file).expect("kernel serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, KernelError> {
        let file: KernelFile = serde_json::from_str(text)?;
        let field = Field::new(file.q)?;
        let bad = || KernelError::BadSpec(format!("kernel file of kind '{}'", file.kind));
        let kernel = match (file.kind.as_str(), file.matrix.clone(), file.table.clone()) {
            ("linear", Some(m), _) => Self::linear(field, m)?,
            ("nonlinear", _, Some(t)) => Self::nonlinear(field, file.ell, t)?,
            _ => return Err(bad()),
        };
        if kernel.ell != file.ell {
            return Err(bad());
        }
        Ok(kernel)
    }

    /// Parses `arikan`, `rs:<q>`, `rs:<q>:<gamma>` or `file:<path>`.
    ///
    /// `gamma` is an element index or the word `primitive`; it defaults to the
    /// primitive element.
    pub fn parse_spec(spec: &str) -> Result<Self, KernelError> {
        let bad = || KernelError::BadSpec(spec.to_string());
        if spec == "arikan" {
            return Ok(Self::arikan());
        }
        if let Some(path) = spec.strip_prefix("file:") {
            return Self::from_json(&std::fs::read_to_string(path)?);
        }
        let rest = spec.strip_prefix("rs:").ok_or_else(bad)?;
        let mut parts = rest.split(':');
        let q: usize = parts.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
        let field = Field::new(q)?;
        let gamma = match parts.next() {
            None | Some("primitive") => field.primitive_element(),
            Some(s) => s.parse().map_err(|_| bad())?,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Self::reed_solomon(q, gamma)
    }
}

fn min_distance(a: &[Vec<usize>], b: &[Vec<usize>]) -> usize {
    let mut best = usize::MAX;
    for wa in a {
        for wb in b {
            let d = wa.iter().zip(wb).filter(|(x, y)| x != y).count();
            best = best.min(d);
        }
    }
    best
}
