//! Exact reference constructions: the structure of the length-`ℓ^n`
//! transform and the one-step synthetic channels.
//!
//! Everything here is exponential in some parameter and guarded by a hard
//! size limit. The fast paths elsewhere in the crate are tested against these.
//!
//! Index conventions: permutations are returned as `perm` with
//! `out[j] = input[perm[j]]`; tuples are big-endian as in [`crate::kernel`].

use std::collections::HashMap;

use thiserror::Error;

use crate::channel::{ChannelError, Dmc};
use crate::kernel::{from_digits, pow_sat, to_digits, Kernel, KernelError};

/// Largest `ℓ^n` for dense Kronecker powers.
pub const KRONECKER_LIMIT: u64 = 1 << 12;
/// Largest `ℓ^n` for permutations.
pub const PERMUTATION_LIMIT: u64 = 1 << 24;
/// Largest output alphabet of an exact synthetic channel.
pub const SUBCHANNEL_LIMIT: u64 = 1 << 22;

#[derive(Error, Debug)]
pub enum TransformError {
    #[error("size {size} exceeds the limit {limit}")]
    TooLarge { size: u64, limit: u64 },
    #[error("expected length {expected}, got {found}")]
    Length { expected: usize, found: usize },
    #[error("index {index} out of range for kernel size {ell}")]
    Index { index: usize, ell: usize },
    #[error("kernel over GF({kernel}) applied to a channel with {channel} inputs")]
    Alphabet { kernel: usize, channel: usize },
    #[error("symbol {0} is not a field element")]
    Symbol(usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

fn guard(size: u64, limit: u64) -> Result<usize, TransformError> {
    if size > limit {
        Err(TransformError::TooLarge { size, limit })
    } else {
        Ok(size as usize)
    }
}

/// `G^{⊗n}` as a row-major `ℓ^n × ℓ^n` matrix; `n = 0` gives `[1]`.
pub fn kronecker_power(k: &Kernel, n: usize) -> Result<Vec<usize>, TransformError> {
    let g = k.matrix().ok_or(KernelError::NotLinear)?;
    let l = k.ell();
    let size = guard(pow_sat(l, n), KRONECKER_LIMIT)?;
    let f = k.field();
    let mut cur = vec![1usize];
    let mut dim = 1;
    for _ in 0..n {
        let nd = dim * l;
        let mut next = vec![0usize; nd * nd];
        for a in 0..l {
            for b in 0..l {
                let gab = g[a * l + b];
                if gab == 0 {
                    continue;
                }
                for r in 0..dim {
                    for c in 0..dim {
                        next[(a * dim + r) * nd + b * dim + c] = f.mul(gab, cur[r * dim + c]);
                    }
                }
            }
        }
        cur = next;
        dim = nd;
    }
    debug_assert_eq!(dim, size);
    Ok(cur)
}

/// Base-`ℓ` digit reversal on `0..ℓ^n`. An involution.
pub fn bit_reversal_perm(ell: usize, n: usize) -> Result<Vec<usize>, TransformError> {
    let size = guard(pow_sat(ell, n), PERMUTATION_LIMIT)?;
    let mut digits = vec![0; n];
    Ok((0..size)
        .map(|j| {
            to_digits(j, ell, &mut digits);
            digits.reverse();
            from_digits(&digits, ell)
        })
        .collect())
}

/// The `ℓ`-way perfect shuffle: `out[k·ℓ^{n−1} + m] = u[ℓ·m + k]`.
pub fn shuffle_perm(ell: usize, n: usize) -> Result<Vec<usize>, TransformError> {
    let size = guard(pow_sat(ell, n), PERMUTATION_LIMIT)?;
    if n == 0 {
        return Ok(vec![0]);
    }
    let block = size / ell;
    Ok((0..size).map(|j| ell * (j % block) + j / block).collect())
}

/// Dense generator `B·G^{⊗n}`: row `j` of the Kronecker power moved to row
/// `rev(j)`.
pub fn dense_generator(k: &Kernel, n: usize) -> Result<Vec<usize>, TransformError> {
    let kp = kronecker_power(k, n)?;
    let size = pow_sat(k.ell(), n) as usize;
    let rev = bit_reversal_perm(k.ell(), n)?;
    let mut out = vec![0; size * size];
    for (j, &r) in rev.iter().enumerate() {
        out[j * size..(j + 1) * size].copy_from_slice(&kp[r * size..(r + 1) * size]);
    }
    Ok(out)
}

/// `u·M` for a row-major square matrix over the kernel's field.
pub fn dense_encode(u: &[usize], m: &[usize], k: &Kernel) -> Vec<usize> {
    let f = k.field();
    let size = u.len();
    let mut x = vec![0; size];
    for (i, &ui) in u.iter().enumerate() {
        if ui == 0 {
            continue;
        }
        for (xj, &g) in x.iter_mut().zip(&m[i * size..(i + 1) * size]) {
            *xj = f.add(*xj, f.mul(ui, g));
        }
    }
    x
}

/// Fast encoder `x = u·G_n` via `G_n = (I⊗G)·R·(I⊗G_{n−1})`.
///
/// Works for nonlinear kernels too, with blockwise application of `g`.
pub fn encode(u: &[usize], k: &Kernel, n: usize) -> Result<Vec<usize>, TransformError> {
    let size = pow_sat(k.ell(), n);
    if size != u.len() as u64 {
        return Err(TransformError::Length { expected: size as usize, found: u.len() });
    }
    if let Some(&bad) = u.iter().find(|&&s| s >= k.q()) {
        return Err(TransformError::Symbol(bad));
    }
    let mut buf = u.to_vec();
    let mut tmp = vec![0; u.len()];
    encode_in_place(&mut buf, &mut tmp, k);
    Ok(buf)
}

/// In-place encoder on a buffer of length `ℓ^n`. `tmp` is scratch of equal length.
pub fn encode_in_place(buf: &mut [usize], tmp: &mut [usize], k: &Kernel) {
    let l = k.ell();
    let size = buf.len();
    if size <= 1 {
        return;
    }
    if k.is_arikan() {
        arikan_encode(buf, tmp);
        return;
    }
    let mut out = vec![0; l];
    for block in buf.chunks_mut(l) {
        k.apply(block, &mut out);
        block.copy_from_slice(&out);
    }
    let sub = size / l;
    for j in 0..size {
        tmp[j] = buf[l * (j % sub) + j / sub];
    }
    buf.copy_from_slice(tmp);
    for (b, t) in buf.chunks_mut(sub).zip(tmp.chunks_mut(sub)) {
        encode_in_place(b, t, k);
    }
}

fn arikan_encode(buf: &mut [usize], tmp: &mut [usize]) {
    let size = buf.len();
    if size <= 1 {
        return;
    }
    let half = size / 2;
    for m in 0..half {
        let (a, b) = (buf[2 * m], buf[2 * m + 1]);
        tmp[m] = a ^ b;
        tmp[half + m] = b;
    }
    buf.copy_from_slice(tmp);
    let (lo, hi) = buf.split_at_mut(half);
    let (tlo, thi) = tmp.split_at_mut(half);
    arikan_encode(lo, tlo);
    arikan_encode(hi, thi);
}

/// Exact Arıkan-kernel erasure recursion: `i = 0` gives `2ε − ε²`, `i = 1`
/// gives `ε²`.
#[inline]
pub fn bec_step(eps: f64, i: usize) -> f64 {
    if i == 0 {
        eps + eps - eps * eps
    } else {
        eps * eps
    }
}

/// Erasure probabilities of all `2^n` synthetic channels, indexed so that the
/// most significant bit of `i` is the first transform applied.
pub fn bec_ladder(eps: f64, n: usize) -> Vec<f64> {
    let mut level = vec![eps];
    for _ in 0..n {
        level = level.iter().flat_map(|&e| [bec_step(e, 0), bec_step(e, 1)]).collect();
    }
    level
}

/// The synthetic channel seen by input `i` of one kernel application.
///
/// Without a prefix the output is `(y_0..y_{ℓ−1}, u_0..u_{i−1})`, indexed as
/// `prefix_index · |Y|^ℓ + y_index` with weight `1/q^{ℓ−1}`. With a prefix
/// the earlier inputs are fixed and the output is `Y^ℓ` with weight
/// `1/q^{ℓ−i−1}`.
pub fn subchannel(w: &Dmc, k: &Kernel, i: usize, prefix: Option<&[usize]>) -> Result<Dmc, TransformError> {
    let (q, l) = (k.q(), k.ell());
    if w.q() != q {
        return Err(TransformError::Alphabet { kernel: q, channel: w.q() });
    }
    if i >= l {
        return Err(TransformError::Index { index: i, ell: l });
    }
    let ny = w.outputs();
    let y_space = pow_sat(ny, l);
    let (prefix_count, prefix_idx) = match prefix {
        Some(p) => {
            if p.len() != i {
                return Err(TransformError::Length { expected: i, found: p.len() });
            }
            if let Some(&bad) = p.iter().find(|&&s| s >= q) {
                return Err(TransformError::Symbol(bad));
            }
            (1u64, Some(from_digits(p, q)))
        }
        None => (pow_sat(q, i), None),
    };
    let out_size = guard(y_space.saturating_mul(prefix_count), SUBCHANNEL_LIMIT)?;
    let y_space = y_space as usize;
    let table = k.table()?;
    let free = l - 1 - i;
    let weight = 1.0 / pow_sat(q, l - 1 - if prefix.is_some() { i } else { 0 }) as f64;
    let mut mat = vec![0.0; q * out_size];
    let mut xs = vec![0; l];
    let mut joint = vec![0.0; y_space];
    for (u_idx, &x_idx) in table.iter().enumerate() {
        // u_idx = (prefix · q + u_i) · q^free + suffix
        let head = u_idx / q.pow(free as u32);
        let (pre, ui) = (head / q, head % q);
        let row_offset = match prefix_idx {
            Some(p) if p != pre => continue,
            Some(_) => 0,
            None => pre * y_space,
        };
        to_digits(x_idx, q, &mut xs);
        product_distribution(w, &xs, &mut joint);
        let row = &mut mat[ui * out_size + row_offset..ui * out_size + row_offset + y_space];
        for (r, &p) in row.iter_mut().zip(&joint) {
            *r += weight * p;
        }
    }
    Ok(Dmc::from_flat(q, out_size, mat)?)
}

/// `joint[y_index] = Π_j W(y_j | xs[j])`, `y` big-endian.
fn product_distribution(w: &Dmc, xs: &[usize], joint: &mut [f64]) {
    let ny = w.outputs();
    joint[0] = 1.0;
    let mut len = 1;
    for &x in xs {
        let row = w.row(x);
        // Expand from the back so that earlier entries are read before overwritten.
        for a in (0..len).rev() {
            let base = joint[a];
            for (y, &p) in row.iter().enumerate().rev() {
                joint[a * ny + y] = base * p;
            }
        }
        len *= ny;
    }
}

/// Merges outputs with identical posterior vectors and drops outputs of zero
/// probability. All channel statistics are preserved.
pub fn merge_outputs(w: &Dmc) -> Dmc {
    let q = w.q();
    let mut groups: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut merged: Vec<Vec<f64>> = Vec::new();
    for y in 0..w.outputs() {
        let col: Vec<f64> = (0..q).map(|x| w.prob(y, x)).collect();
        let total: f64 = col.iter().sum();
        if total == 0.0 {
            continue;
        }
        let key: Vec<i64> = col.iter().map(|p| (p / total * 1e11).round() as i64).collect();
        match groups.get(&key) {
            Some(&g) => merged[g].iter_mut().zip(&col).for_each(|(m, p)| *m += p),
            None => {
                groups.insert(key, merged.len());
                merged.push(col);
            }
        }
    }
    let outputs = merged.len();
    let mut flat = vec![0.0; q * outputs];
    for (y, col) in merged.iter().enumerate() {
        for x in 0..q {
            flat[x * outputs + y] = col[x];
        }
    }
    Dmc::from_flat(q, outputs, flat).expect("merging preserves row sums")
}

/// Applies [`subchannel`] along a path of indices, first element first,
/// optionally merging outputs after every step.
pub fn iterate_subchannel(w: &Dmc, k: &Kernel, path: &[usize], merge: bool) -> Result<Dmc, TransformError> {
    let mut cur = if merge { merge_outputs(w) } else { w.clone() };
    for &b in path {
        cur = subchannel(&cur, k, b, None)?;
        if merge {
            cur = merge_outputs(&cur);
        }
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    #[test]
    fn kronecker_examples() {
        let a = Kernel::arikan();
        assert_eq!(kronecker_power(&a, 1).unwrap(), vec![1, 0, 1, 1]);
        assert_eq!(
            kronecker_power(&a, 2).unwrap(),
            vec![1, 0, 0, 0, 1, 1, 0, 0, 1, 0, 1, 0, 1, 1, 1, 1]
        );
        let id = Kernel::identity(Field::new(2).unwrap(), 2).unwrap();
        let kp = kronecker_power(&id, 3).unwrap();
        for r in 0..8 {
            for c in 0..8 {
                assert_eq!(kp[r * 8 + c], usize::from(r == c));
            }
        }
        assert!(kronecker_power(&a, 13).is_err());
    }

    #[test]
    fn permutation_examples() {
        let rev = bit_reversal_perm(2, 3).unwrap();
        assert_eq!(rev[3], 6);
        assert_eq!(bit_reversal_perm(3, 2).unwrap()[5], 7);
        assert_eq!(bit_reversal_perm(5, 1).unwrap(), vec![0, 1, 2, 3, 4]);
        for (j, &r) in rev.iter().enumerate() {
            assert_eq!(rev[r], j);
        }
        assert_eq!(shuffle_perm(2, 2).unwrap(), vec![0, 2, 1, 3]);
        assert_eq!(shuffle_perm(3, 2).unwrap(), vec![0, 3, 6, 1, 4, 7, 2, 5, 8]);
        assert_eq!(shuffle_perm(4, 1).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn encode_examples() {
        let a = Kernel::arikan();
        assert_eq!(encode(&[0, 1], &a, 1).unwrap(), vec![1, 1]);
        assert_eq!(encode(&[0, 0, 0, 1], &a, 2).unwrap(), vec![1, 1, 1, 1]);
        assert_eq!(encode(&[0; 8], &a, 3).unwrap(), vec![0; 8]);
        assert!(encode(&[0; 5], &a, 2).is_err());
    }

    #[test]
    fn general_encoder_matches_dense_product() {
        let k = Kernel::reed_solomon(3, 2).unwrap();
        let g = dense_generator(&k, 2).unwrap();
        for seed in 0..20usize {
            let u: Vec<usize> = (0..9).map(|j| (seed * 7 + j * j * 5 + j) % 3).collect();
            assert_eq!(encode(&u, &k, 2).unwrap(), dense_encode(&u, &g, &k));
        }
    }

    #[test]
    fn bec_steps() {
        assert_eq!((bec_step(0.0, 0), bec_step(0.0, 1)), (0.0, 0.0));
        assert_eq!((bec_step(1.0, 0), bec_step(1.0, 1)), (1.0, 1.0));
        assert_eq!((bec_step(0.5, 0), bec_step(0.5, 1)), (0.75, 0.25));
        assert_eq!(bec_ladder(0.5, 2), vec![0.9375, 0.5625, 0.4375, 0.0625]);
    }

    #[test]
    fn bec_subchannels() {
        let a = Kernel::arikan();
        for eps in [0.1, 0.5, 0.77] {
            let w = Dmc::bec(eps).unwrap();
            let minus = subchannel(&w, &a, 0, None).unwrap();
            let plus = subchannel(&w, &a, 1, None).unwrap();
            assert!((minus.bhattacharyya() - bec_step(eps, 0)).abs() < 1e-12);
            assert!((plus.bhattacharyya() - bec_step(eps, 1)).abs() < 1e-12);
            assert_eq!(plus.outputs(), 18);
        }
    }

    #[test]
    fn identity_kernel_is_transparent() {
        let w = Dmc::bsc(0.2).unwrap();
        let id = Kernel::identity(Field::new(2).unwrap(), 3).unwrap();
        for i in 0..3 {
            let s = subchannel(&w, &id, i, None).unwrap();
            assert!((s.capacity() - w.capacity()).abs() < 1e-12);
            assert!((s.bhattacharyya() - w.bhattacharyya()).abs() < 1e-12);
        }
    }

    #[test]
    fn conditioned_variant_averages_to_unconditioned() {
        let w = Dmc::bsc(0.15).unwrap();
        let k = Kernel::arikan();
        let full = subchannel(&w, &k, 1, None).unwrap();
        let c: f64 = (0..2)
            .map(|u0| subchannel(&w, &k, 1, Some(&[u0])).unwrap().capacity())
            .sum::<f64>()
            / 2.0;
        assert!((full.capacity() - c).abs() < 1e-12);
    }

    #[test]
    fn merging_preserves_statistics() {
        let w = Dmc::bec(0.4).unwrap();
        let k = Kernel::arikan();
        let s = subchannel(&w, &k, 1, None).unwrap();
        let m = merge_outputs(&s);
        assert_eq!(m.outputs(), 3);
        assert!((m.capacity() - s.capacity()).abs() < 1e-12);
        assert!((m.bhattacharyya() - s.bhattacharyya()).abs() < 1e-12);
        assert!((m.error_probability() - s.error_probability()).abs() < 1e-12);
    }

    #[test]
    fn subchannel_guard() {
        let w = Dmc::bawgnc(1.0, 64).unwrap();
        let k = Kernel::reed_solomon(2, 1).unwrap();
        assert!(subchannel(&w, &k, 1, None).is_ok());
        let id4 = Kernel::identity(Field::new(2).unwrap(), 4).unwrap();
        assert!(matches!(subchannel(&w, &id4, 0, None), Err(TransformError::TooLarge { .. })));
    }
}
