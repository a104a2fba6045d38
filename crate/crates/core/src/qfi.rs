//! Quantum Fisher information of collective states, exactly (block by block)
//! and through the bosonic correspondence, plus two-axis-twisted inputs.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::basis::{self, SpinOp};
use crate::density::CollectiveDensity;
use crate::error::{domain, Error, Result};

type C = Complex64;
type CMat = DMatrix<C>;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// One of the two transverse quadratures: `J_x`/`J_y` for spins, `X`/`P`
/// for the boson.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    Y,
}

/// Real linear combination of words in the two quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    terms: Vec<(f64, Vec<Quadrature>)>,
}

impl Generator {
    pub fn new(terms: Vec<(f64, Vec<Quadrature>)>) -> Result<Self> {
        if terms.is_empty() || terms.iter().any(|(_, w)| w.is_empty()) {
            return domain("generator needs at least one term of order >= 1");
        }
        Ok(Self { terms })
    }

    pub fn jx() -> Self {
        Self { terms: vec![(1.0, vec![Quadrature::X])] }
    }

    pub fn jy() -> Self {
        Self { terms: vec![(1.0, vec![Quadrature::Y])] }
    }

    /// Highest word length.
    pub fn order(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    /// Order when every term has the same length.
    pub fn homogeneous_order(&self) -> Option<usize> {
        let k = self.terms[0].1.len();
        self.terms.iter().all(|(_, w)| w.len() == k).then_some(k)
    }

    fn build(&self, x: &CMat, y: &CMat) -> CMat {
        let dim = x.nrows();
        let mut out = CMat::zeros(dim, dim);
        for (coef, word) in &self.terms {
            let mut m = CMat::identity(dim, dim);
            for q in word {
                m *= match q {
                    Quadrature::X => x,
                    Quadrature::Y => y,
                };
            }
            out += m * c(*coef);
        }
        out
    }

    /// Matrix inside irrep `two_j`.
    pub fn spin_matrix(&self, two_j: u32) -> Result<CMat> {
        let m = self.build(&basis::spin_matrix(SpinOp::X, two_j), &basis::spin_matrix(SpinOp::Y, two_j));
        check_hermitian(&m, "generator", 1e-10)?;
        Ok(m)
    }

    /// Matrix on Fock states `0..dim` with `X = (a + a†)/√2`,
    /// `P = (a - a†)/(i√2)`. Built on a padded space so that every kept
    /// element is exact.
    pub fn hp_matrix(&self, dim: usize) -> Result<CMat> {
        let big = dim + self.order();
        let (x, p) = quadratures(big);
        let m = self.build(&x, &p).view((0, 0), (dim, dim)).into_owned();
        check_hermitian(&m, "generator", 1e-10)?;
        Ok(m)
    }
}

fn quadratures(dim: usize) -> (CMat, CMat) {
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = c((n as f64).sqrt());
    }
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let x = (&a + &ad) * c(s);
    let p = (&a - &ad) * C::new(0.0, -s);
    (x, p)
}

/// Integrated states carry Hermiticity drift at the ODE tolerance level.
const DENSITY_TOL: f64 = 1e-5;

fn check_hermitian(m: &CMat, what: &str, tol: f64) -> Result<()> {
    let err = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if err > tol * scale {
        return Err(Error::Numerical(format!("{what} is not Hermitian (deviation {err:e})")));
    }
    Ok(())
}

/// `2 sum (l - l')^2/(l + l') |<l|A|l'>|^2` for one Hermitian block.
fn block_qfi(rho: &CMat, a: &CMat, eps: f64) -> f64 {
    let eig = SymmetricEigen::new(rho.clone());
    let v = &eig.eigenvectors;
    let av = v.adjoint() * a * v;
    let lam = &eig.eigenvalues;
    let mut f = 0.0;
    for i in 0..lam.len() {
        for k in 0..lam.len() {
            let s = lam[i] + lam[k];
            if s > eps {
                let d = lam[i] - lam[k];
                f += 2.0 * d * d / s * av[(i, k)].norm_sqr();
            }
        }
    }
    f
}

/// Exact QFI of a block-diagonal collective state. Pairs with
/// `l + l' <= eps_rel * trace` are skipped.
pub fn qfi_exact_with(rho: &CollectiveDensity, gen: &Generator, eps_rel: f64) -> Result<f64> {
    let tr = rho.trace().re;
    let eps = eps_rel * tr;
    let mut f = 0.0;
    for (&two_j, block) in &rho.blocks {
        if block.iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        check_hermitian(block, "density block", DENSITY_TOL)?;
        let sym = (block + block.adjoint()) * c(0.5);
        f += block_qfi(&sym, &gen.spin_matrix(two_j)?, eps);
    }
    Ok(f)
}

pub fn qfi_exact(rho: &CollectiveDensity, gen: &Generator) -> Result<f64> {
    qfi_exact_with(rho, gen, 1e-12)
}

/// `4 Var(A)`, the pure-state value and an upper bound for mixed states.
pub fn variance_bound(rho: &CollectiveDensity, gen: &Generator) -> Result<f64> {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (&two_j, block) in &rho.blocks {
        let a = gen.spin_matrix(two_j)?;
        m1 += (block * &a).trace().re;
        m2 += (block * &a * &a).trace().re;
    }
    Ok(4.0 * (m2 - m1 * m1))
}

/// Scaled bosonic QFI `(N/2)^k e^{-2 k gamma t} F[rho_hp; A]` for a
/// homogeneous generator of order `k`.
pub fn qfi_hp_scaled(rho_hp: &CMat, gen: &Generator, n_spins: u32, gamma: f64, t: f64) -> Result<f64> {
    let k = gen
        .homogeneous_order()
        .ok_or_else(|| Error::Domain("scaling needs a homogeneous generator".into()))?;
    check_hermitian(rho_hp, "bosonic density", DENSITY_TOL)?;
    let rho_hp = &((rho_hp + rho_hp.adjoint()) * c(0.5));
    let tr = rho_hp.trace().re;
    let tail = 1.0 - tr;
    if tail > 1e-8 {
        return Err(Error::Truncation {
            lost: tail,
            limit: 1e-8,
            hint: format!("increase n_max beyond {}", rho_hp.nrows() - 1),
        });
    }
    let a = gen.hp_matrix(rho_hp.nrows())?;
    let f = block_qfi(rho_hp, &a, 1e-12 * tr);
    let scale = (0.5 * n_spins as f64).powi(k as i32) * (-2.0 * k as f64 * gamma * t).exp();
    Ok(scale * f)
}

/// Fock-space density of the pure symmetric-block state with amplitudes
/// ordered `M = J..-J`, mapped to `n = J - M`.
pub fn hp_from_symmetric(amps: &[C]) -> CMat {
    let v = nalgebra::DVector::from_column_slice(amps);
    let v = &v / c(v.norm());
    &v * v.adjoint()
}

/// Additive Gaussian noise of `<n(t)> = (e^{2 gamma t} - 1)/2` photons,
/// realized as pure loss with `eta = 1/(1+s)` followed by amplification
/// with gain `1+s`. Output is truncated to Fock states `0..=n_max`.
pub fn thermalized_hp_state(initial: &CMat, gamma: f64, t: f64, n_max: usize) -> Result<CMat> {
    if gamma < 0.0 || t < 0.0 {
        return domain(format!("need gamma, t >= 0 (gamma={gamma}, t={t})"));
    }
    let d_in = initial.nrows();
    let s = crate::hp::mean_photon(gamma, t);
    let eta = 1.0 / (1.0 + s);
    let g = 1.0 + s;

    // loss
    let mut lost = CMat::zeros(d_in, d_in);
    for k in 0..d_in {
        let amp = |n: usize| -> f64 {
            let lb = basis::ln_binomial(n as u64, k as u64);
            (0.5 * lb).exp() * eta.powf(0.5 * (n - k) as f64) * (1.0 - eta).powf(0.5 * k as f64)
        };
        for n in k..d_in {
            for m in k..d_in {
                lost[(n - k, m - k)] += initial[(n, m)] * c(amp(n) * amp(m));
            }
        }
    }

    // amplification
    let d_out = n_max + 1;
    let mut out = CMat::zeros(d_out, d_out);
    let d_src = d_in.min(d_out);
    for k in 0..d_out {
        let amp = |n: usize| -> f64 {
            let lb = basis::ln_binomial((n + k) as u64, k as u64);
            (0.5 * lb - 0.5 * (n + 1) as f64 * g.ln()).exp() * (1.0 - 1.0 / g).powf(0.5 * k as f64)
        };
        if k > 0 && s == 0.0 {
            break;
        }
        for n in 0..d_src.min(d_out - k) {
            let an = amp(n);
            for m in 0..d_src.min(d_out - k) {
                out[(n + k, m + k)] += lost[(n, m)] * c(an * amp(m));
            }
        }
    }

    let tail = initial.trace().re - out.trace().re;
    if tail > 1e-8 {
        return Err(Error::Truncation {
            lost: tail,
            limit: 1e-8,
            hint: format!("raise n_max above {n_max}"),
        });
    }
    Ok(out)
}

/// Smallest Fock cutoff, doubling from a thermal estimate, whose tail
/// stays below `1e-10`.
pub fn thermalized_hp_state_auto(initial: &CMat, gamma: f64, t: f64) -> Result<CMat> {
    let mut n_max = initial.nrows() + 2 * crate::hp::default_n_max(gamma, t, 1e-12) + 8;
    loop {
        match thermalized_hp_state(initial, gamma, t, n_max) {
            Ok(out) if initial.trace().re - out.trace().re < 1e-10 => return Ok(out),
            Err(e @ Error::Domain(_)) => return Err(e),
            Ok(_) | Err(_) if n_max > 20_000 => return thermalized_hp_state(initial, gamma, t, n_max),
            _ => n_max *= 2,
        }
    }
}

/// `exp[-(chi/2)(J+^2 - J-^2)]` with `chi = r/N` applied to the all-up
/// state; amplitudes ordered `M = J..-J`.
pub fn two_axis_twisting(n_spins: u32, r: f64) -> Result<Vec<C>> {
    if n_spins < 2 || !(r >= 0.0) {
        return domain(format!("need N >= 2 and r >= 0 (N={n_spins}, r={r})"));
    }
    let jp = basis::j_plus(n_spins);
    let jm = basis::j_minus(n_spins);
    let gen = (&jp * &jp - &jm * &jm) * (-0.5 * r / n_spins as f64);
    let u = gen.exp();
    Ok(u.column(0).iter().map(|&v| c(v)).collect())
}

/// Collective pure state built from symmetric-block amplitudes.
pub fn symmetric_density(params: basis::EnsembleParams, amps: &[C]) -> Result<CollectiveDensity> {
    CollectiveDensity::pure(params, params.n_spins, amps)
}
