//! Permutation-symmetric (collective-state) basis: irrep labels, degeneracies,
//! optical-pumping rate coefficients, spherical-tensor jump blocks and the
//! angular-momentum operators inside a single irrep.
//!
//! Spins are stored doubled (`two_j = 2J`, `two_m = 2M`) so odd `N` is exact.
//! Inside an irrep block the row/column index `i` corresponds to `M = J - i`.

use nalgebra::DMatrix;

use crate::error::{domain, Result};

/// Total-spin label `(J, M)` with both quantum numbers doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IrrepLabel {
    pub two_j: u32,
    pub two_m: i32,
}

impl IrrepLabel {
    pub fn new(two_j: u32, two_m: i32) -> Result<Self> {
        if two_m.unsigned_abs() > two_j || (two_j as i32 - two_m) % 2 != 0 {
            return domain(format!("invalid label 2J={two_j}, 2M={two_m}"));
        }
        Ok(Self { two_j, two_m })
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn m(&self) -> f64 {
        self.two_m as f64 / 2.0
    }

    /// Row index of this `M` within its irrep block.
    pub fn index(&self) -> usize {
        ((self.two_j as i32 - self.two_m) / 2) as usize
    }

    /// Whether the label is a legal irrep of an `n`-spin ensemble.
    pub fn valid_for(&self, n: u32) -> bool {
        self.two_j <= n && (n - self.two_j) % 2 == 0 && self.two_m.unsigned_abs() <= self.two_j
    }
}

/// Ensemble size and decoherence rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleParams {
    pub n_spins: u32,
    /// Local scattering (optical pumping) rate.
    pub gamma: f64,
    /// Collective dephasing rate.
    pub kappa: f64,
}

impl EnsembleParams {
    pub fn new(n_spins: u32, gamma: f64, kappa: f64) -> Result<Self> {
        if n_spins == 0 {
            return domain("ensemble needs at least one spin");
        }
        if !(gamma >= 0.0 && kappa >= 0.0 && gamma.is_finite() && kappa.is_finite()) {
            return domain(format!("rates must be finite and nonnegative (gamma={gamma}, kappa={kappa})"));
        }
        Ok(Self { n_spins, gamma, kappa })
    }

    pub fn n(&self) -> f64 {
        self.n_spins as f64
    }
}

/// Jump channel `(j, q)`: `j` shifts `J`, `q` shifts `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JumpChannelIndex {
    pub j: i32,
    pub q: i32,
}

impl JumpChannelIndex {
    pub fn new(j: i32, q: i32) -> Result<Self> {
        if !(-1..=1).contains(&j) || !(-1..=1).contains(&q) {
            return domain(format!("channel indices must lie in {{-1,0,1}} (j={j}, q={q})"));
        }
        Ok(Self { j, q })
    }

    /// The six optical-pumping channels (`q = ±1`).
    pub fn pumping() -> [JumpChannelIndex; 6] {
        let mut out = [JumpChannelIndex { j: 0, q: 0 }; 6];
        let mut k = 0;
        for j in [-1, 0, 1] {
            for q in [-1, 1] {
                out[k] = JumpChannelIndex { j, q };
                k += 1;
            }
        }
        out
    }
}

/// Irreps of `n` spins, largest first, as doubled spins.
pub fn irreps(n: u32) -> Vec<u32> {
    (0..=n / 2).map(|k| n - 2 * k).collect()
}

/// Irreps with `J >= N/2 - k`; `None` keeps everything.
pub fn top_irreps(n: u32, k: Option<u32>) -> Vec<u32> {
    let all = irreps(n);
    match k {
        Some(k) => all.into_iter().take(k as usize + 1).collect(),
        None => all,
    }
}

pub fn irrep_exists(n: u32, two_j: u32) -> bool {
    two_j <= n && (n - two_j) % 2 == 0
}

pub fn block_dim(two_j: u32) -> usize {
    two_j as usize + 1
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at each step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of copies of irrep `J = two_j/2` among `n` spins.
pub fn degeneracy(n: u32, two_j: u32) -> Result<u128> {
    if n == 0 || two_j > n || (n - two_j) % 2 != 0 {
        return domain(format!("no irrep 2J={two_j} for N={n}"));
    }
    if n > 126 {
        return domain("exact degeneracies are limited to N <= 126");
    }
    let k = ((n - two_j) / 2) as u64;
    let c = binomial_u128(n as u64, k);
    // C(N, N/2-J) (2J+1) / (N/2+J+1), exact division
    Ok(c * (two_j as u128 + 1) / ((n + two_j) as u128 / 2 + 1))
}

/// Natural log of the degeneracy; usable for any `n`.
pub fn ln_degeneracy(n: u32, two_j: u32) -> f64 {
    let k = ((n - two_j) / 2) as u64;
    ln_binomial(n as u64, k) + ((two_j + 1) as f64).ln() - (((n + two_j) / 2 + 1) as f64).ln()
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n < 256 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    // Stirling series, accurate to double precision at this size
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
}

fn label_ok(n: u32, two_j: i64, two_m: i64) -> bool {
    two_j >= 0 && two_j <= n as i64 && (n as i64 - two_j) % 2 == 0 && two_m.abs() <= two_j
}

/// Optical-pumping rate `g_{j,q}(N, J, M)` feeding `p_{J,M}` from
/// `p_{J+j, M+q}`. Zero whenever source or target is not a state.
pub fn pump_rate(n: u32, two_j: u32, two_m: i32, ch: JumpChannelIndex) -> f64 {
    let (tj, tm) = (two_j as i64, two_m as i64);
    if !label_ok(n, tj, tm) || !label_ok(n, tj + 2 * ch.j as i64, tm + 2 * ch.q as i64) {
        return 0.0;
    }
    let nn = n as f64;
    let j = two_j as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    match (ch.j, ch.q) {
        (1, 1) => (j + m + 1.0) * (j + m + 2.0) * (nn + 2.0 * j + 4.0) / (4.0 * (2.0 * j + 3.0) * (j + 1.0)),
        (1, -1) => (j - m + 1.0) * (j - m + 2.0) * (nn + 2.0 * j + 4.0) / (4.0 * (2.0 * j + 3.0) * (j + 1.0)),
        (0, 1) => (j - m) * (j + m + 1.0) * (nn + 2.0) / (4.0 * j * (j + 1.0)),
        (0, -1) => (j + m) * (j - m + 1.0) * (nn + 2.0) / (4.0 * j * (j + 1.0)),
        (-1, 1) => (j - m) * (j - m - 1.0) * (nn - 2.0 * j + 2.0) / (4.0 * j * (2.0 * j - 1.0)),
        (-1, -1) => (j + m) * (j + m - 1.0) * (nn - 2.0 * j + 2.0) / (4.0 * j * (2.0 * j - 1.0)),
        _ => 0.0,
    }
}

/// All six pumping rates in the order of [`JumpChannelIndex::pumping`].
pub fn pump_rate_coefficients(n: u32, two_j: u32, two_m: i32) -> [f64; 6] {
    let chans = JumpChannelIndex::pumping();
    let mut g = [0.0; 6];
    for (gi, ch) in g.iter_mut().zip(chans) {
        *gi = pump_rate(n, two_j, two_m, ch);
    }
    g
}

/// Reduced coefficient `Λ_{j,q}(J, N)` of the local-operator expansion.
pub fn lambda_coefficient(n: u32, two_j: u32, j: i32, q: i32) -> f64 {
    let target = two_j as i64 + 2 * (j as i64);
    if target > n as i64 || target < 0 {
        return 0.0;
    }
    let nn = n as f64;
    let jj = two_j as f64 / 2.0;
    let qt = match q {
        1 => 1.0,
        -1 => -1.0,
        0 => -std::f64::consts::SQRT_2,
        _ => return 0.0,
    };
    let arg = match j {
        1 => -((nn - 2.0 * jj) * (2.0 * jj + 3.0) / 6.0).max(0.0).sqrt(),
        0 => ((nn + 2.0) * (2.0 * jj + 1.0) / 6.0).sqrt(),
        -1 => ((nn + 2.0 * jj + 2.0) * (2.0 * jj - 1.0) / 6.0).max(0.0).sqrt(),
        _ => return 0.0,
    };
    qt * arg
}

/// Clebsch–Gordan coefficient `<J, M; 1, q | J', M'>` for rank-one coupling.
///
/// Returns 0 whenever the selection rules fail.
pub fn clebsch_gordan_k1(two_jp: u32, two_mp: i32, q: i32, two_j: u32, two_m: i32) -> f64 {
    if two_mp != two_m + 2 * q
        || two_m.unsigned_abs() > two_j
        || two_mp.unsigned_abs() > two_jp
        || !(-1..=1).contains(&q)
    {
        return 0.0;
    }
    let j = two_j as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    let dj = two_jp as i64 - two_j as i64;
    let v = match (dj, q) {
        (2, 1) => (j + m + 1.0) * (j + m + 2.0) / ((2.0 * j + 1.0) * (2.0 * j + 2.0)),
        (2, 0) => (j - m + 1.0) * (j + m + 1.0) / ((2.0 * j + 1.0) * (j + 1.0)),
        (2, -1) => (j - m + 1.0) * (j - m + 2.0) / ((2.0 * j + 1.0) * (2.0 * j + 2.0)),
        (0, _) if two_j == 0 => return 0.0,
        (0, 1) => return -((j + m + 1.0) * (j - m) / (2.0 * j * (j + 1.0))).sqrt(),
        (0, 0) => return m / (j * (j + 1.0)).sqrt(),
        (0, -1) => (j - m + 1.0) * (j + m) / (2.0 * j * (j + 1.0)),
        (-2, 1) => (j - m) * (j - m - 1.0) / (2.0 * j * (2.0 * j + 1.0)),
        (-2, 0) => return -((j - m) * (j + m) / (j * (2.0 * j + 1.0))).sqrt(),
        (-2, -1) => (j + m) * (j + m - 1.0) / (2.0 * j * (2.0 * j + 1.0)),
        _ => return 0.0,
    };
    v.max(0.0).sqrt()
}

/// Sparse real matrix stored as `(row, col, value)` triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseBlock {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseBlock {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: Vec::new() }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.2 == 0.0)
    }
}

/// Block of `L_{j,q}` mapping irrep `two_j` to irrep `two_j + 2j`.
///
/// A target outside the ensemble gives a matrix with zero rows.
pub fn jump_operator_block(n: u32, two_j: u32, ch: JumpChannelIndex) -> SparseBlock {
    let cols = block_dim(two_j);
    let tj = two_j as i64 + 2 * ch.j as i64;
    if tj < 0 || tj > n as i64 {
        return SparseBlock::zeros(0, cols);
    }
    let two_jp = tj as u32;
    let rows = block_dim(two_jp);
    let lam = lambda_coefficient(n, two_j, ch.j, ch.q);
    let norm = (3.0 / (two_jp as f64 + 1.0)).sqrt();
    let mut entries = Vec::new();
    if lam != 0.0 {
        for col in 0..cols {
            let two_m = two_j as i32 - 2 * col as i32;
            let two_mp = two_m + 2 * ch.q;
            if two_mp.unsigned_abs() > two_jp {
                continue;
            }
            let c = clebsch_gordan_k1(two_jp, two_mp, ch.q, two_j, two_m);
            if c != 0.0 {
                let row = ((two_jp as i32 - two_mp) / 2) as usize;
                entries.push((row, col, lam * norm * c));
            }
        }
    }
    SparseBlock { rows, cols, entries }
}

/// Spin operators available inside an irrep block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinOp {
    Identity,
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// `<M+1|J+|M>` for the state at index `i` (so `M = J - i`).
pub fn raise_element(two_j: u32, i: usize) -> f64 {
    let j = two_j as f64 / 2.0;
    let m = j - i as f64;
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// Dense real matrix of `J+` in irrep `two_j`.
pub fn j_plus(two_j: u32) -> DMatrix<f64> {
    let d = block_dim(two_j);
    let mut m = DMatrix::zeros(d, d);
    for i in 1..d {
        m[(i - 1, i)] = raise_element(two_j, i);
    }
    m
}

pub fn j_minus(two_j: u32) -> DMatrix<f64> {
    j_plus(two_j).transpose()
}

pub fn j_z(two_j: u32) -> DMatrix<f64> {
    let d = block_dim(two_j);
    DMatrix::from_fn(d, d, |r, c| if r == c { two_j as f64 / 2.0 - r as f64 } else { 0.0 })
}

pub fn j_x(two_j: u32) -> DMatrix<f64> {
    let p = j_plus(two_j);
    (&p + p.transpose()) * 0.5
}

/// `J_y` as a complex matrix, `(J+ - J-)/(2i)`.
pub fn j_y(two_j: u32) -> DMatrix<num_complex::Complex64> {
    let p = j_plus(two_j);
    let d = p.nrows();
    DMatrix::from_fn(d, d, |r, c| {
        num_complex::Complex64::new(0.0, -0.5 * (p[(r, c)] - p[(c, r)]))
    })
}

/// Complex dense matrix of a spin operator in irrep `two_j`.
pub fn spin_matrix(op: SpinOp, two_j: u32) -> DMatrix<num_complex::Complex64> {
    use num_complex::Complex64 as C;
    let real = |m: DMatrix<f64>| m.map(|v| C::new(v, 0.0));
    match op {
        SpinOp::Identity => DMatrix::identity(block_dim(two_j), block_dim(two_j)),
        SpinOp::X => real(j_x(two_j)),
        SpinOp::Y => j_y(two_j),
        SpinOp::Z => real(j_z(two_j)),
        SpinOp::Plus => real(j_plus(two_j)),
        SpinOp::Minus => real(j_minus(two_j)),
    }
}

/// Apply a spin operator to a state vector of irrep `two_j` (tridiagonal,
/// no dense matrix).
pub fn apply_spin(op: SpinOp, two_j: u32, v: &[num_complex::Complex64], out: &mut [num_complex::Complex64]) {
    use num_complex::Complex64 as C;
    let d = block_dim(two_j);
    let j = two_j as f64 / 2.0;
    for i in 0..d {
        let up = if i + 1 < d { raise_element(two_j, i + 1) } else { 0.0 };
        let dn = if i > 0 { raise_element(two_j, i) } else { 0.0 };
        let from_below = if i + 1 < d { v[i + 1] } else { C::new(0.0, 0.0) };
        let from_above = if i > 0 { v[i - 1] } else { C::new(0.0, 0.0) };
        out[i] = match op {
            SpinOp::Identity => v[i],
            SpinOp::Z => v[i] * (j - i as f64),
            SpinOp::Plus => from_below * up,
            SpinOp::Minus => from_above * dn,
            SpinOp::X => (from_below * up + from_above * dn) * 0.5,
            SpinOp::Y => (from_below * up - from_above * dn) * C::new(0.0, -0.5),
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degeneracies_n6() {
        let d: Vec<u128> = [6, 4, 2, 0].iter().map(|&tj| degeneracy(6, tj).unwrap()).collect();
        assert_eq!(d, vec![1, 5, 9, 5]);
    }

    #[test]
    fn dimension_count_up_to_64() {
        for n in 1..=64u32 {
            let total: u128 = irreps(n)
                .iter()
                .map(|&tj| degeneracy(n, tj).unwrap() * (tj as u128 + 1))
                .sum();
            assert_eq!(total, 1u128 << n, "N={n}");
        }
    }

    #[test]
    fn degeneracy_rejects_bad_pairing() {
        assert!(degeneracy(6, 3).is_err());
        assert!(degeneracy(6, 8).is_err());
    }

    #[test]
    fn ln_degeneracy_matches_exact() {
        for n in [5u32, 20, 64] {
            for tj in irreps(n) {
                let exact = degeneracy(n, tj).unwrap() as f64;
                assert!((ln_degeneracy(n, tj) - exact.ln()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pump_rate_examples() {
        let g01 = pump_rate(6, 6, 4, JumpChannelIndex { j: 0, q: 1 });
        assert!((g01 - 1.0).abs() < 1e-15);
        let gmm = pump_rate(6, 6, 6, JumpChannelIndex { j: -1, q: -1 });
        assert!((gmm - 1.0).abs() < 1e-15);
        for q in [-1, 1] {
            for tm in (-6..=6).step_by(2) {
                assert_eq!(pump_rate(6, 6, tm, JumpChannelIndex { j: 1, q }), 0.0);
            }
        }
    }

    #[test]
    fn pump_rates_nonnegative() {
        for n in 1..=12u32 {
            for tj in irreps(n) {
                for tm in (-(tj as i32)..=tj as i32).step_by(2) {
                    for g in pump_rate_coefficients(n, tj, tm) {
                        assert!(g >= 0.0 && g.is_finite());
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_examples() {
        for q in [-1, 0, 1] {
            assert_eq!(lambda_coefficient(6, 6, 1, q), 0.0);
        }
        let l = lambda_coefficient(6, 6, 0, 1);
        assert!((l - (28.0f64 / 3.0).sqrt()).abs() < 1e-14);
        let l0 = lambda_coefficient(6, 6, 0, 0);
        assert!((l0 + 2.0f64.sqrt() * (28.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    /// Clebsch–Gordan coefficients from the Racah closed formula.
    fn cg_racah(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> f64 {
        fn f(x: f64) -> f64 {
            let n = x.round();
            assert!(n >= 0.0 && (x - n).abs() < 1e-9);
            (1..=n as u64).map(|i| i as f64).product()
        }
        if (m1 + m2 - m).abs() > 1e-9 || j < (j1 - j2).abs() || j > j1 + j2 {
            return 0.0;
        }
        let pre = ((2.0 * j + 1.0) * f(j + j1 - j2) * f(j - j1 + j2) * f(j1 + j2 - j) / f(j1 + j2 + j + 1.0))
            .sqrt()
            * (f(j + m) * f(j - m) * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) * f(j2 + m2)).sqrt();
        let mut s = 0.0;
        for k in 0..=((j1 + j2 + j) as i64 + 2) {
            let k = k as f64;
            let args = [
                j1 + j2 - j - k,
                j1 - m1 - k,
                j2 + m2 - k,
                j - j2 + m1 + k,
                j - j1 - m2 + k,
            ];
            if args.iter().any(|&a| a < -1e-9) {
                continue;
            }
            let den = f(k) * args.iter().map(|&a| f(a)).product::<f64>();
            s += if (k as i64) % 2 == 0 { 1.0 } else { -1.0 } / den;
        }
        pre * s
    }

    #[test]
    fn cg_examples_and_racah_oracle() {
        assert!((clebsch_gordan_k1(2, 2, 1, 0, 0) - 1.0).abs() < 1e-15);
        assert!((clebsch_gordan_k1(4, 2, 0, 4, 2) - 1.0 / 6.0f64.sqrt()).abs() < 1e-15);
        for two_j in 0..=7u32 {
            for two_m in (-(two_j as i32)..=two_j as i32).step_by(2) {
                for q in [-1, 0, 1] {
                    for dj in [-2i32, 0, 2] {
                        let tjp = two_j as i32 + dj;
                        if tjp < 0 {
                            continue;
                        }
                        let tmp = two_m + 2 * q;
                        if tmp.abs() > tjp {
                            continue;
                        }
                        let ours = clebsch_gordan_k1(tjp as u32, tmp, q, two_j, two_m);
                        let oracle = cg_racah(
                            two_j as f64 / 2.0,
                            two_m as f64 / 2.0,
                            1.0,
                            q as f64,
                            tjp as f64 / 2.0,
                            tmp as f64 / 2.0,
                        );
                        assert!((ours - oracle).abs() < 1e-12, "{two_j} {two_m} {q} {dj}: {ours} vs {oracle}");
                    }
                }
            }
        }
    }

    #[test]
    fn cg_completeness() {
        for two_j in 0..=6u32 {
            for two_m in (-(two_j as i32)..=two_j as i32).step_by(2) {
                for q in [-1, 0, 1] {
                    let mut s = 0.0;
                    for dj in [-2i32, 0, 2] {
                        let tjp = two_j as i32 + dj;
                        if tjp >= 0 {
                            let c = clebsch_gordan_k1(tjp as u32, two_m + 2 * q, q, two_j, two_m);
                            s += c * c;
                        }
                    }
                    assert!((s - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn jump_blocks_reproduce_pump_rates() {
        // |<J+j, M+q|L|J,M>|^2 must equal the rate g_{-j,-q}(J+j, M+q) at the target
        for n in 1..=9u32 {
            for tj in irreps(n) {
                for ch in JumpChannelIndex::pumping() {
                    let blk = jump_operator_block(n, tj, ch);
                    if blk.rows == 0 {
                        continue;
                    }
                    let mut seen = vec![0usize; blk.cols];
                    for &(r, c, v) in &blk.entries {
                        seen[c] += 1;
                        let two_jp = (tj as i32 + 2 * ch.j) as u32;
                        let two_mp = two_jp as i32 - 2 * r as i32;
                        let g = pump_rate(n, two_jp, two_mp, JumpChannelIndex { j: -ch.j, q: -ch.q });
                        assert!((v * v - g).abs() < 1e-12, "N={n} 2J={tj} {ch:?}: {} vs {g}", v * v);
                        let _ = c;
                    }
                    assert!(seen.iter().all(|&s| s <= 1));
                }
            }
        }
    }

    #[test]
    fn top_jump_block_vanishes() {
        for q in [-1, 0, 1] {
            let b = jump_operator_block(6, 6, JumpChannelIndex { j: 1, q });
            assert_eq!(b.rows, 0);
        }
        let b = jump_operator_block(6, 4, JumpChannelIndex { j: 1, q: 1 });
        assert!(!b.is_zero());
    }

    #[test]
    fn vector_application_matches_dense() {
        use num_complex::Complex64 as C;
        for tj in 0..=5u32 {
            let d = block_dim(tj);
            let v: Vec<C> = (0..d).map(|i| C::new(i as f64 + 0.5, (i as f64).cos())).collect();
            for op in [SpinOp::Identity, SpinOp::X, SpinOp::Y, SpinOp::Z, SpinOp::Plus, SpinOp::Minus] {
                let m = spin_matrix(op, tj);
                let want = &m * nalgebra::DVector::from_column_slice(&v);
                let mut got = vec![C::new(0.0, 0.0); d];
                apply_spin(op, tj, &v, &mut got);
                for i in 0..d {
                    assert!((got[i] - want[i]).norm() < 1e-12, "{op:?} 2J={tj}");
                }
            }
        }
    }

    #[test]
    fn spin_commutators() {
        use num_complex::Complex64 as C;
        for tj in 0..=6u32 {
            let x = spin_matrix(SpinOp::X, tj);
            let y = spin_matrix(SpinOp::Y, tj);
            let z = spin_matrix(SpinOp::Z, tj);
            let comm = &x * &y - &y * &x;
            let diff = comm - z.map(|v| v * C::new(0.0, 1.0));
            assert!(diff.norm() < 1e-12);
            let casimir = &x * &x + &y * &y + &z * &z;
            let j = tj as f64 / 2.0;
            for i in 0..casimir.nrows() {
                assert!((casimir[(i, i)].re - j * (j + 1.0)).abs() < 1e-12);
            }
        }
    }
}
