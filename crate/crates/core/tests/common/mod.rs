//! Shared generators and verification suites for the integration tests and
//! the acceptance report.
#![allow(dead_code)]

use polarkit::channel::Dmc;
use polarkit::codec::{sc_decode, PolarCode};
use polarkit::density::{evolve_all, Grid};
use polarkit::field::Field;
use polarkit::kernel::Kernel;
use polarkit::transform::{dense_encode, dense_generator, encode, iterate_subchannel, subchannel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Absolute slack allowed in every inequality check.
pub const SLACK: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_linear_kernel<R: Rng>(q: usize, ell: usize, rng: &mut R) -> Kernel {
    let f = Field::new(q).unwrap();
    loop {
        let m: Vec<Vec<usize>> = (0..ell).map(|_| (0..ell).map(|_| rng.gen_range(0..q)).collect()).collect();
        if let Ok(k) = Kernel::linear(f.clone(), m) {
            return k;
        }
    }
}

pub fn random_nonlinear_kernel<R: Rng>(q: usize, ell: usize, rng: &mut R) -> Kernel {
    let mut table: Vec<usize> = (0..q.pow(ell as u32)).collect();
    table.shuffle(rng);
    Kernel::nonlinear(Field::new(q).unwrap(), ell, table).unwrap()
}

pub fn random_kernel<R: Rng>(q: usize, ell: usize, rng: &mut R) -> Kernel {
    if rng.gen_bool(0.5) {
        random_linear_kernel(q, ell, rng)
    } else {
        random_nonlinear_kernel(q, ell, rng)
    }
}

/// Outcome of an inequality suite.
#[derive(Debug, Clone)]
pub struct Suite {
    pub name: &'static str,
    pub instances: usize,
    pub checks: usize,
    pub violations: usize,
    /// Largest amount by which any inequality was exceeded (≤ 0 when none).
    pub worst: f64,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite { name, instances: 0, checks: 0, violations: 0, worst: f64::NEG_INFINITY }
    }

    /// Records `lhs ≤ rhs`.
    fn le(&mut self, lhs: f64, rhs: f64) {
        self.checks += 1;
        let excess = lhs - rhs;
        self.worst = self.worst.max(excess);
        // NaN counts as a violation.
        if excess.is_nan() || excess > SLACK {
            self.violations += 1;
        }
    }

    pub fn ok(&self) -> bool {
        self.violations == 0 && self.checks > 0
    }
}

fn log_q(x: f64, q: usize) -> f64 {
    x.ln() / (q as f64).ln()
}

/// `I + Z ≥ 1` and `I² + Z² ≤ 1` on binary channels.
pub fn binary_iz_suite(instances: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let mut s = Suite::new("binary I-Z");
    for _ in 0..instances {
        let w = Dmc::random(2, r.gen_range(2..7), &mut r);
        let (i, z) = (w.capacity(), w.bhattacharyya());
        s.le(1.0, i + z);
        s.le(i * i + z * z, 1.0);
        s.instances += 1;
    }
    s
}

/// `(1 − √(1−Z²))/2 ≤ P_e ≤ Z/2` on binary channels.
pub fn binary_pe_z_suite(instances: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let mut s = Suite::new("binary Pe-Z");
    for _ in 0..instances {
        let w = Dmc::random(2, r.gen_range(2..7), &mut r);
        let (pe, z) = (w.error_probability(), w.bhattacharyya());
        s.le(0.5 * (1.0 - (1.0 - z * z).max(0.0).sqrt()), pe);
        s.le(pe, 0.5 * z);
        s.instances += 1;
    }
    s
}

const QARY: [usize; 6] = [2, 3, 4, 5, 7, 8];

/// The three capacity bounds in terms of the average Bhattacharyya parameter.
pub fn qary_iz_suite(instances: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let mut s = Suite::new("q-ary I-Z");
    for _ in 0..instances {
        let q = QARY[r.gen_range(0..QARY.len())];
        let w = Dmc::random(q, r.gen_range(2..9), &mut r);
        let (i, z) = (w.capacity(), w.bhattacharyya());
        let qf = q as f64;
        let root = (1.0 - z * z).max(0.0).sqrt();
        s.le(log_q(qf / (1.0 + (qf - 1.0) * z), q), i);
        s.le(i, log_q(qf / 2.0, q) + log_q(2.0, q) * root);
        s.le(i, 2.0 * (qf - 1.0) * log_q(std::f64::consts::E, q) * root);
        s.instances += 1;
    }
    s
}

/// `√(1−Z_{x,x'}) ≤ √(1−Z_{x,x''}) + √(1−Z_{x'',x'})` over all triples.
pub fn triangle_suite(instances: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let mut s = Suite::new("triangle");
    for _ in 0..instances {
        let q = QARY[r.gen_range(0..QARY.len())];
        let w = Dmc::random(q, r.gen_range(2..9), &mut r);
        let z = w.z_pairs();
        let d = |a: usize, b: usize| (1.0 - z[a][b]).max(0.0).sqrt();
        for x in 0..q {
            for x1 in 0..q {
                for x2 in 0..q {
                    s.le(d(x, x1), d(x, x2) + d(x2, x1));
                }
            }
        }
        s.instances += 1;
    }
    s
}

/// `P_e ≤ (q−1) Z`.
pub fn pe_qz_suite(instances: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let mut s = Suite::new("Pe ≤ (q−1)Z");
    for _ in 0..instances {
        let q = QARY[r.gen_range(0..QARY.len())];
        let w = Dmc::random(q, r.gen_range(2..9), &mut r);
        s.le(w.error_probability(), (q as f64 - 1.0) * w.bhattacharyya());
        s.instances += 1;
    }
    s
}

/// `Z^D ≤ Z(W^(i)) ≤ 2^{ℓ−i} Z^D` for binary linear kernels.
pub fn binary_zd_suite(instances: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let mut s = Suite::new("binary Z-D");
    for _ in 0..instances {
        let ell = r.gen_range(2..=4);
        let k = random_linear_kernel(2, ell, &mut r);
        let d = k.partial_distances().unwrap().d.unwrap();
        let w = Dmc::random(2, r.gen_range(2..4), &mut r);
        let z = w.bhattacharyya();
        for (i, &di) in d.iter().enumerate() {
            let zi = subchannel(&w, &k, i, None).unwrap().bhattacharyya();
            let zd = z.powi(di as i32);
            s.le(zd, zi);
            s.le(zi, 2f64.powi((ell - i) as i32) * zd);
        }
        s.instances += 1;
    }
    s
}

/// Pairwise bounds for a fixed prefix, linear and nonlinear kernels.
pub fn pair_zd_suite(instances: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let mut s = Suite::new("pairwise Z-D");
    for _ in 0..instances {
        let q = [2, 3][r.gen_range(0..2)];
        let ell = r.gen_range(2..=3);
        let k = random_kernel(q, ell, &mut r);
        let w = Dmc::random(q, r.gen_range(2..4), &mut r);
        let (zmin, zmax) = w.z_extremes();
        let i = r.gen_range(0..ell);
        let prefix: Vec<usize> = (0..i).map(|_| r.gen_range(0..q)).collect();
        let wu = subchannel(&w, &k, i, Some(&prefix)).unwrap();
        let qf = q as f64;
        for x in 0..q {
            for x2 in 0..q {
                if x == x2 {
                    continue;
                }
                let dist = k.pair_distance(i, &prefix, x, x2).unwrap() as i32;
                let zu = wu.bhattacharyya_pair(x, x2).unwrap();
                s.le(qf.powi(-2 * (ell - 1 - i) as i32) * zmin.powi(dist), zu);
                s.le(zu, qf.powi((ell - 1 - i) as i32) * zmax.powi(dist));
            }
        }
        s.instances += 1;
    }
    s
}

/// Extreme-pair bounds of the synthetic channels through `D_min` and `D_max`.
pub fn extremes_suite(instances: usize, seed: u64) -> Suite {
    let mut r = rng(seed);
    let mut s = Suite::new("Z_min/Z_max");
    for _ in 0..instances {
        let q = [2, 3, 4][r.gen_range(0..3)];
        let ell = if q == 4 { 2 } else { r.gen_range(2..=3) };
        let k = random_kernel(q, ell, &mut r);
        let profile = k.partial_distances().unwrap();
        let w = Dmc::random(q, r.gen_range(2..4), &mut r);
        let (zmin, zmax) = w.z_extremes();
        let qf = q as f64;
        for i in 0..ell {
            let (lo, hi) = subchannel(&w, &k, i, None).unwrap().z_extremes();
            s.le(hi, qf.powi((ell - 1 - i) as i32) * zmax.powi(profile.d_min[i] as i32));
            s.le(qf.powi(-((2 * ell - 2 - i) as i32)) * zmin.powi(profile.d_max[i] as i32), lo);
        }
        s.instances += 1;
    }
    s
}

/// Largest `|Σ_i I(W^(i)) − ℓ I(W)|` over random channels and kernels.
pub fn conservation_suite(instances: usize, seed: u64) -> (usize, f64) {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let q = [2, 3, 4][r.gen_range(0..3)];
        let ell = match q {
            2 => r.gen_range(2..=4),
            3 => r.gen_range(2..=3),
            _ => 2,
        };
        let k = random_kernel(q, ell, &mut r);
        let w = Dmc::random(q, r.gen_range(2..4), &mut r);
        let total: f64 = (0..ell).map(|i| subchannel(&w, &k, i, None).unwrap().capacity()).sum();
        worst = worst.max((total - ell as f64 * w.capacity()).abs());
    }
    (instances, worst)
}

/// Largest gap between DE and exact-oracle error probabilities, n ≤ 2.
pub fn de_oracle_gap(grid: &Grid) -> f64 {
    let mut channels: Vec<Dmc> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&e| Dmc::bec(e).unwrap()).collect();
    channels.extend([0.01, 0.05, 0.11, 0.2, 0.3].iter().map(|&p| Dmc::bsc(p).unwrap()));
    let mut worst: f64 = 0.0;
    for w in &channels {
        for n in 0..=2 {
            let (pe, _) = evolve_all(w, n, grid).unwrap();
            for (i, &p) in pe.iter().enumerate() {
                let path: Vec<usize> = (0..n).rev().map(|b| i >> b & 1).collect();
                let exact = iterate_subchannel(w, &Kernel::arikan(), &path, true).unwrap().error_probability();
                worst = worst.max((p - exact).abs());
            }
        }
    }
    worst
}

/// Kernels used for the encoder cross-check.
pub fn encoder_kernels() -> Vec<Kernel> {
    let mut r = rng(77);
    vec![
        Kernel::arikan(),
        Kernel::reed_solomon(3, 1).unwrap(),
        Kernel::reed_solomon(4, 2).unwrap(),
        Kernel::reed_solomon(5, 2).unwrap(),
        random_linear_kernel(2, 3, &mut r),
        random_linear_kernel(3, 2, &mut r),
        random_linear_kernel(2, 4, &mut r),
    ]
}

/// Recursive encoder against the dense `B·G^{⊗n}` product for every
/// `ℓ^n ≤ 2^12`; returns `(cases, mismatches)`.
pub fn encoder_suite(words_per_size: usize, seed: u64) -> (usize, usize) {
    let mut r = rng(seed);
    let (mut cases, mut bad) = (0, 0);
    for k in encoder_kernels() {
        let mut n = 1;
        while (k.ell() as u64).pow(n as u32) <= 1 << 12 {
            let size = k.ell().pow(n as u32);
            let m = dense_generator(&k, n).unwrap();
            for _ in 0..words_per_size {
                let u: Vec<usize> = (0..size).map(|_| r.gen_range(0..k.q())).collect();
                cases += 1;
                if encode(&u, &k, n).unwrap() != dense_encode(&u, &m, &k) {
                    bad += 1;
                }
            }
            n += 1;
        }
    }
    (cases, bad)
}

/// Brute-force scores of input `i` given the earlier inputs: the
/// likelihood of each symbol summed over all later inputs.
pub fn map_scores(w: &Dmc, k: &Kernel, n: usize, y: &[usize], prefix: &[usize]) -> Vec<f64> {
    let size = y.len();
    let i = prefix.len();
    let q = k.q();
    let free = size - i - 1;
    (0..q)
        .map(|a| {
            let mut u = prefix.to_vec();
            u.push(a);
            u.resize(size, 0);
            let mut total = 0.0;
            for s in 0..q.pow(free as u32) {
                let mut t = s;
                for slot in u[i + 1..].iter_mut() {
                    *slot = t % q;
                    t /= q;
                }
                let x = encode(&u, k, n).unwrap();
                total += x.iter().zip(y).map(|(&xj, &yj)| w.prob(yj, xj)).product::<f64>();
            }
            total
        })
        .collect()
}

/// Whether `decision` maximizes the scores, up to rounding of exact ties.
pub fn is_map(scores: &[f64], decision: usize) -> bool {
    let best = scores.iter().cloned().fold(0.0, f64::max);
    scores[decision] >= best * (1.0 - 1e-9)
}

/// SC decisions against brute-force per-index decisions on the BEC for all
/// erasure patterns, `N ≤ 8`; returns `(decisions, mismatches)`.
pub fn sc_map_suite(words_per_pattern: usize, seed: u64) -> (usize, usize) {
    let mut r = rng(seed);
    let w = Dmc::bec(0.4).unwrap();
    let k = Kernel::arikan();
    let (mut decisions, mut bad) = (0, 0);
    for n in 1..=3 {
        let size = 1usize << n;
        let code = PolarCode::new(k.clone(), n, &[]).unwrap();
        for pattern in 0u32..1 << size {
            for _ in 0..words_per_pattern {
                let u: Vec<usize> = (0..size).map(|_| r.gen_range(0..2)).collect();
                let x = encode(&u, &k, n).unwrap();
                let y: Vec<usize> = x.iter().enumerate().map(|(j, &b)| if pattern >> j & 1 == 1 { 1 } else { 2 * b }).collect();
                let dec = sc_decode(&code, &w, &y).unwrap();
                for i in 0..size {
                    decisions += 1;
                    if !is_map(&map_scores(&w, &k, n, &y, &dec.u_hat[..i]), dec.u_hat[i]) {
                        bad += 1;
                    }
                }
            }
        }
    }
    (decisions, bad)
}

/// Relation between `P_e(W_2^⟨1⟩)` and `P_e(W_2^⟨2⟩)`.
#[derive(Debug, Clone)]
pub struct Ordering {
    pub channel: String,
    pub pe1: f64,
    pub pe2: f64,
}

impl Ordering {
    pub fn relation(&self) -> char {
        let tol = 1e-12 * self.pe1.max(self.pe2).max(1e-300);
        if self.pe1 < self.pe2 - tol {
            '<'
        } else if self.pe1 > self.pe2 + tol {
            '>'
        } else {
            '='
        }
    }
}

/// Exact error probabilities of the two mixed depth-2 channels. Index 1 is
/// the check-then-variable channel and index 2 the reverse.
pub fn pe_orderings() -> Vec<(&'static str, Vec<Ordering>)> {
    let a = Kernel::arikan();
    let one = |spec: &str| {
        let w = Dmc::parse_spec(spec).unwrap();
        let pe = |path: &[usize]| iterate_subchannel(&w, &a, path, true).unwrap().error_probability();
        Ordering { channel: spec.to_string(), pe1: pe(&[0, 1]), pe2: pe(&[1, 0]) }
    };
    vec![
        ("BEC", ["bec:0.2", "bec:0.5", "bec:0.8"].iter().map(|s| one(s)).collect()),
        ("BSC", ["bsc:0.05", "bsc:0.11", "bsc:0.3"].iter().map(|s| one(s)).collect()),
        ("BAWGNC", ["bawgnc:0.5:64", "bawgnc:0.97865:64", "bawgnc:1.5:64"].iter().map(|s| one(s)).collect()),
    ]
}

/// Fixed-point `(e, v)` check helper: `|a − b| ≤ tol`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}
