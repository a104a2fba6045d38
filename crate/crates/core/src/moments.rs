//! Moment hierarchies for collective spin components.
//!
//! Optical pumping closes exactly on `<J_x^k>`, `k <= n`. General local
//! decoherence is treated in the Fokker–Planck (large `N`) approximation with
//! an affine drift whose offset depends on the mean spin.

use crate::error::{domain, Result};
use crate::jump_spec::{combined_coefficients, Axis, AxisCoefficients, LocalJumpSpec};
use crate::ode::{self, Tolerance};

/// `<J_axis^k>` for `k = 0..values.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub t: f64,
}

impl MomentVector {
    pub fn new(axis: Axis, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || (values[0] - 1.0).abs() > 1e-9 {
            return domain("moment vector must start with <J^0> = 1");
        }
        Ok(Self { axis, values, t: 0.0 })
    }

    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// Gaussian vacuum moments `<X^k>` (variance 1/2).
    pub fn vacuum(axis: Axis, order: usize) -> Self {
        let values = (0..=order)
            .map(|k| if k % 2 == 1 { 0.0 } else { double_factorial(k as i64 - 1) * 0.5f64.powi(k as i32 / 2) })
            .collect();
        Self { axis, values, t: 0.0 }
    }

    /// Multiply the `k`-th moment by `s^k`.
    pub fn scaled(&self, s: f64) -> Self {
        let values = self.values.iter().enumerate().map(|(k, v)| v * s.powi(k as i32)).collect();
        Self { values, ..self.clone() }
    }
}

fn double_factorial(k: i64) -> f64 {
    let mut acc = 1.0;
    let mut i = k;
    while i > 1 {
        acc *= i as f64;
        i -= 2;
    }
    acc
}

fn binom(n: usize, k: i64) -> f64 {
    if k < 0 || k as usize > n {
        return 0.0;
    }
    let k = k as usize;
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients `c_p` with `sum_{j,q} L^† J_x^n L = sum_p c_p J_x^p`.
pub fn c_coefficients(n: usize, n_spins: u32) -> Vec<f64> {
    let nn = n_spins as f64;
    (0..=n)
        .map(|p| {
            let sign = if (n + p) % 2 == 0 { 2.0 } else { 0.0 };
            let mut c = 0.25 * sign * (nn * binom(n, p as i64) - 2.0 * binom(n, p as i64 - 1));
            if p == n {
                c += nn / 2.0;
            }
            c
        })
        .collect()
}

/// Right-hand side of the exact pumping hierarchy for `<J_x^k>`, `k <= n`:
/// `d<J^k>/dt = gamma (sum_p c_p <J^p> - N <J^k>)`.
pub struct PumpingHierarchy {
    gamma: f64,
    n_spins: f64,
    coeffs: Vec<Vec<f64>>,
}

impl PumpingHierarchy {
    pub fn new(order: usize, n_spins: u32, gamma: f64) -> Self {
        let coeffs = (0..=order).map(|k| c_coefficients(k, n_spins)).collect();
        Self { gamma, n_spins: n_spins as f64, coeffs }
    }

    pub fn rhs(&self, m: &[f64], dm: &mut [f64]) {
        dm[0] = 0.0;
        for k in 1..m.len() {
            let s: f64 = self.coeffs[k].iter().zip(m).map(|(c, v)| c * v).sum();
            dm[k] = self.gamma * (s - self.n_spins * m[k]);
        }
    }
}

fn check_transverse(axis: Axis) -> Result<()> {
    if axis == Axis::Z {
        return domain("the pumping hierarchy applies to transverse axes (x or y)");
    }
    Ok(())
}

/// Exact optical-pumping evolution of `<J_x^k>` (or `<J_y^k>`).
pub fn evolve_pumping_moments_exact(
    n_spins: u32,
    gamma: f64,
    initial: &MomentVector,
    times: &[f64],
    tol: &Tolerance,
) -> Result<Vec<MomentVector>> {
    check_transverse(initial.axis)?;
    let h = PumpingHierarchy::new(initial.order(), n_spins, gamma);
    let out = ode::integrate_grid(|_, y, dy| h.rhs(y, dy), 0.0, &initial.values, times, tol)?;
    Ok(pack(initial.axis, times, out))
}

fn pack(axis: Axis, times: &[f64], out: Vec<Vec<f64>>) -> Vec<MomentVector> {
    times
        .iter()
        .zip(out)
        .map(|(&t, values)| MomentVector { axis, values, t })
        .collect()
}

/// Drift `mu(x) = sum_i drift[i] x^i`; only affine forms are supported.
///
/// Returns `d<x^n>/dt = n <x^{n-1} mu> + n(n-1) D <x^{n-2}>` for every order.
pub fn fp_moment_recurrence(drift: &[f64], diffusion: f64, moments: &[f64]) -> Result<Vec<f64>> {
    if drift.iter().skip(2).any(|&c| c != 0.0) {
        return domain("moment recurrence needs an affine drift");
    }
    let mu0 = drift.first().copied().unwrap_or(0.0);
    let mu1 = drift.get(1).copied().unwrap_or(0.0);
    Ok(recurrence(mu1, mu0, diffusion, moments))
}

fn recurrence(mu1: f64, mu0: f64, d: f64, m: &[f64]) -> Vec<f64> {
    (0..m.len())
        .map(|k| {
            let kf = k as f64;
            let mut v = kf * mu1 * m[k];
            if k >= 1 {
                v += kf * mu0 * m[k - 1];
            }
            if k >= 2 {
                v += kf * (kf - 1.0) * d * m[k - 2];
            }
            v
        })
        .collect()
}

/// Large-`N` pumping hierarchy for bosonic quadrature moments `<X^k>`:
/// drift `-gamma X`, diffusion `gamma/2`.
pub fn evolve_hp_moments(gamma: f64, initial: &MomentVector, times: &[f64], tol: &Tolerance) -> Result<Vec<MomentVector>> {
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| dy.copy_from_slice(&recurrence(-gamma, 0.0, 0.5 * gamma, y));
    let out = ode::integrate_grid(rhs, 0.0, &initial.values, times, tol)?;
    Ok(pack(initial.axis, times, out))
}

/// Same hierarchy in spin units: `<J_x^k>` with diffusion `gamma N / 4`.
pub fn evolve_large_n_moments(
    n_spins: u32,
    gamma: f64,
    initial: &MomentVector,
    times: &[f64],
    tol: &Tolerance,
) -> Result<Vec<MomentVector>> {
    check_transverse(initial.axis)?;
    let d = 0.25 * gamma * n_spins as f64;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| dy.copy_from_slice(&recurrence(-gamma, 0.0, d, y));
    let out = ode::integrate_grid(rhs, 0.0, &initial.values, times, tol)?;
    Ok(pack(initial.axis, times, out))
}

/// Drift and diffusion of `J_axis` summed over the given local channels.
pub fn general_drift_diffusion(specs: &[LocalJumpSpec], axis: Axis, n_spins: u32) -> AxisCoefficients {
    combined_coefficients(specs, axis, n_spins as f64)
}

struct MeanSpinSystem {
    rows: [AxisCoefficients; 3],
}

impl MeanSpinSystem {
    fn new(specs: &[LocalJumpSpec], n_spins: u32) -> Self {
        let n = n_spins as f64;
        Self { rows: Axis::all().map(|a| combined_coefficients(specs, a, n)) }
    }

    fn rhs(&self, m: &[f64], dm: &mut [f64]) {
        let mean = [m[0], m[1], m[2]];
        for (k, row) in self.rows.iter().enumerate() {
            dm[k] = row.mu1 * mean[k] + row.mu0(&mean);
        }
    }
}

/// Mean spin `(<Jx>, <Jy>, <Jz>)` on the given times.
pub fn solve_mean_spin(
    specs: &[LocalJumpSpec],
    n_spins: u32,
    initial: [f64; 3],
    times: &[f64],
    tol: &Tolerance,
) -> Result<Vec<[f64; 3]>> {
    let sys = MeanSpinSystem::new(specs, n_spins);
    let out = ode::integrate_grid(|_, y, dy| sys.rhs(y, dy), 0.0, &initial, times, tol)?;
    Ok(out.into_iter().map(|v| [v[0], v[1], v[2]]).collect())
}

/// Fokker–Planck moment hierarchy for `J_axis` under general local channels,
/// integrated jointly with the mean spin that feeds its drift offset.
pub fn evolve_general_moments(
    specs: &[LocalJumpSpec],
    n_spins: u32,
    initial: &MomentVector,
    initial_mean: [f64; 3],
    times: &[f64],
    tol: &Tolerance,
) -> Result<Vec<MomentVector>> {
    let sys = MeanSpinSystem::new(specs, n_spins);
    let ax = initial.axis as usize;
    let coef = sys.rows[ax];
    let mut y0 = initial_mean.to_vec();
    y0.extend_from_slice(&initial.values);
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        sys.rhs(&y[..3], &mut dy[..3]);
        let mean = [y[0], y[1], y[2]];
        let r = recurrence(coef.mu1, coef.mu0(&mean), coef.diffusion, &y[3..]);
        dy[3..].copy_from_slice(&r);
    };
    let out = ode::integrate_grid(rhs, 0.0, &y0, times, tol)?;
    Ok(pack(initial.axis, times, out.into_iter().map(|v| v[3..].to_vec()).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_coefficients_examples() {
        let n = 10;
        let c2 = c_coefficients(2, n);
        assert_eq!(c2, vec![5.0, 0.0, 8.0]);
        let c1 = c_coefficients(1, n);
        assert_eq!(c1, vec![0.0, 9.0]);
        for order in 1..8 {
            let c = c_coefficients(order, n);
            for (p, v) in c.iter().enumerate() {
                if (order + p) % 2 == 1 {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }

    #[test]
    fn first_moment_decays_at_gamma() {
        let h = PumpingHierarchy::new(1, 12, 0.5);
        let mut d = [0.0; 2];
        h.rhs(&[1.0, 2.0], &mut d);
        assert!((d[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn second_moment_steady_state() {
        let n = 16;
        let init = MomentVector::new(Axis::X, vec![1.0, 0.0, 0.0]).unwrap();
        let out = evolve_pumping_moments_exact(n, 1.0, &init, &[20.0], &Tolerance::tight()).unwrap();
        assert!((out[0].values[2] - n as f64 / 4.0).abs() < 1e-8);
        let scs = MomentVector::new(Axis::X, vec![1.0, 0.0, n as f64 / 4.0]).unwrap();
        let out = evolve_pumping_moments_exact(n, 1.0, &scs, &[0.7], &Tolerance::tight()).unwrap();
        assert!((out[0].values[2] - n as f64 / 4.0).abs() < 1e-10);
    }

    #[test]
    fn vacuum_is_stationary() {
        let vac = MomentVector::vacuum(Axis::X, 6);
        assert_eq!(vac.values, vec![1.0, 0.0, 0.5, 0.0, 0.75, 0.0, 1.875]);
        let out = evolve_hp_moments(1.0, &vac, &[2.0], &Tolerance::tight()).unwrap();
        for (a, b) in out[0].values.iter().zip(&vac.values) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn hp_second_moment_closed_form() {
        let s = 1.5;
        let init = MomentVector::new(Axis::X, vec![1.0, 0.0, s]).unwrap();
        for t in [0.2, 1.0] {
            let out = evolve_hp_moments(1.0, &init, &[t], &Tolerance::tight()).unwrap();
            assert!((out[0].values[2] - (0.5 + (s - 0.5) * (-2.0 * t).exp())).abs() < 1e-10);
        }
    }

    #[test]
    fn recurrence_forms() {
        let m = [1.0, 0.3, 0.8, 0.1, 1.1];
        let r = fp_moment_recurrence(&[0.0, -1.0], 0.5, &m).unwrap();
        for k in 0..m.len() {
            let kf = k as f64;
            let want = -kf * m[k] + if k >= 2 { 0.5 * kf * (kf - 1.0) * m[k - 2] } else { 0.0 };
            assert!((r[k] - want).abs() < 1e-15);
        }
        let r1 = fp_moment_recurrence(&[0.2, -0.5], 0.0, &[1.0, 2.0]).unwrap();
        assert!((r1[1] - (0.2 - 1.0)).abs() < 1e-15);
        assert!(fp_moment_recurrence(&[0.0, 1.0, 0.5], 1.0, &m).is_err());
    }

    #[test]
    fn hierarchy_is_closed() {
        // perturbing a higher moment never changes lower derivatives
        let h = PumpingHierarchy::new(5, 9, 1.0);
        let base = [1.0, 0.2, 2.0, 0.1, 5.0, 0.3];
        let mut d0 = [0.0; 6];
        h.rhs(&base, &mut d0);
        for hi in 1..6 {
            let mut pert = base;
            pert[hi] += 1.0;
            let mut d1 = [0.0; 6];
            h.rhs(&pert, &mut d1);
            for k in 0..hi {
                assert_eq!(d0[k], d1[k]);
            }
        }
    }

    #[test]
    fn mean_spin_under_pumping() {
        let tol = Tolerance::tight();
        let out = solve_mean_spin(&LocalJumpSpec::optical_pumping(1.0), 10, [0.0, 0.0, 5.0], &[0.5], &tol).unwrap();
        assert!((out[0][2] - 5.0 * (-1.0f64).exp()).abs() < 1e-9);
        assert!(out[0][0].abs() < 1e-12 && out[0][1].abs() < 1e-12);
    }

    #[test]
    fn z_axis_decay_single_spin() {
        let tol = Tolerance::tight();
        let g = 0.9;
        let init = MomentVector::new(Axis::Z, vec![1.0, 0.5]).unwrap();
        let out = evolve_general_moments(&[LocalJumpSpec::decay(g)], 1, &init, [0.0, 0.0, 0.5], &[0.8], &tol).unwrap();
        let want = -0.5 + (0.5 + 0.5) * (-g * 0.8f64).exp();
        assert!((out[0].values[1] - want).abs() < 1e-9);
    }

    #[test]
    fn parity_preserved_for_even_channels() {
        let tol = Tolerance::tight();
        let init = MomentVector::new(Axis::X, vec![1.0, 0.0, 3.0, 0.0, 20.0]).unwrap();
        let specs = [LocalJumpSpec::dephasing(0.4), LocalJumpSpec::decay(0.3), LocalJumpSpec::raise(0.3)];
        let out = evolve_general_moments(&specs, 12, &init, [0.0, 0.0, 0.0], &[0.5, 1.0], &tol).unwrap();
        for m in out {
            assert!(m.values[1].abs() < 1e-14 && m.values[3].abs() < 1e-14);
        }
    }
}
