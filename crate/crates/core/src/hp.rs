//! Holstein–Primakoff correspondence between collective states and a single
//! bosonic mode: thermal limits, frame scale factors and irrep statistics.

use crate::basis;
use crate::error::{domain, Result};

/// Which bosonic picture a phase-space object lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    /// Fixed frame; pumping appears as diffusion with growing occupation.
    Thermalizing,
    /// Frame shrinking as `e^{-gamma t}`; pumping is a damped oscillator.
    FokkerPlanck,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPFrame {
    pub picture: Picture,
    pub t: f64,
    pub gamma: f64,
    pub n_spins: u32,
}

impl HPFrame {
    pub fn new(picture: Picture, t: f64, gamma: f64, n_spins: u32) -> Result<Self> {
        if t < 0.0 || gamma < 0.0 || n_spins == 0 {
            return domain(format!("invalid frame (t={t}, gamma={gamma}, N={n_spins})"));
        }
        Ok(Self { picture, t, gamma, n_spins })
    }

    /// `e^{-gamma t}`.
    pub fn scale(&self) -> f64 {
        (-self.gamma * self.t).exp()
    }
}

/// `<n(t)> = (e^{2 gamma t} - 1)/2`.
pub fn mean_photon(gamma: f64, t: f64) -> f64 {
    0.5 * (2.0 * gamma * t).exp_m1()
}

/// `(N/2) e^{-2 gamma t}`.
pub fn mean_total_spin(n_spins: u32, gamma: f64, t: f64) -> f64 {
    0.5 * n_spins as f64 * (-2.0 * gamma * t).exp()
}

/// Thermal occupation probabilities with the probability lost above `n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDistribution {
    pub p: Vec<f64>,
    pub truncated_mass: f64,
}

/// `p_n = tanh^n(gamma t) (1 - tanh(gamma t))` for `n <= n_max`.
pub fn fock_populations(gamma: f64, t: f64, n_max: usize) -> FockDistribution {
    let th = (gamma * t).tanh();
    let p: Vec<f64> = (0..=n_max).map(|n| th.powi(n as i32) * (1.0 - th)).collect();
    FockDistribution { p, truncated_mass: th.powi(n_max as i32 + 1) }
}

/// Smallest `n_max` whose thermal tail is below `tail`.
pub fn default_n_max(gamma: f64, t: f64, tail: f64) -> usize {
    let th = (gamma * t).tanh();
    if th <= 0.0 {
        return 0;
    }
    ((tail.ln() / th.ln()).ceil() as usize).saturating_sub(1).max(1)
}

/// Log a warning when `N (1 - e^{-2 gamma t}) / 2` is too small for the
/// thermal limit to be trustworthy. Returns whether the regime holds.
pub fn check_regime(n_spins: u32, gamma: f64, t: f64) -> bool {
    let v = 0.5 * n_spins as f64 * (-(-2.0 * gamma * t).exp_m1());
    let ok = v >= 10.0;
    if !ok && t > 0.0 {
        log::warn!("bosonic thermal limit is marginal: N(1-e^(-2 gamma t))/2 = {v:.3} < 10");
    }
    ok
}

fn ln_pop(n_spins: u32, two_j: u32, two_m: i32, gamma: f64, t: f64) -> f64 {
    let e = (-2.0 * gamma * t).exp();
    let half = n_spins as f64 / 2.0;
    let m = two_m as f64 / 2.0;
    basis::ln_degeneracy(n_spins, two_j) + (half + m) * (0.5 * (1.0 + e)).ln() + (half - m) * (-0.5 * (-2.0 * gamma * t).exp_m1()).ln()
}

/// Probability of irrep `J = two_j/2` after pumping from all spins up.
pub fn irrep_probability(n_spins: u32, gamma: f64, t: f64, two_j: u32) -> Result<f64> {
    if !basis::irrep_exists(n_spins, two_j) {
        return domain(format!("no irrep 2J={two_j} for N={n_spins}"));
    }
    if t <= 0.0 || gamma == 0.0 {
        return Ok(if two_j == n_spins { 1.0 } else { 0.0 });
    }
    let th = (gamma * t).tanh();
    let ln_top = ln_pop(n_spins, two_j, two_j as i32, gamma, t);
    // geometric series over M = J..-J
    let ln_sum = (-th.powi(two_j as i32 + 1)).ln_1p() - (-th).ln_1p();
    Ok((ln_top + ln_sum).exp())
}

/// `sum_J p_{J, J-n}` for `n <= n_max`: the bosonic occupation inherited
/// from the closed-form collective populations.
pub fn aggregated_fock_populations(n_spins: u32, gamma: f64, t: f64, n_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    for two_j in basis::irreps(n_spins) {
        for (n, o) in out.iter_mut().enumerate() {
            if 2 * n > two_j as usize {
                break;
            }
            let two_m = two_j as i32 - 2 * n as i32;
            *o += if t <= 0.0 || gamma == 0.0 {
                if two_j == n_spins && n == 0 { 1.0 } else { 0.0 }
            } else {
                ln_pop(n_spins, two_j, two_m, gamma, t).exp()
            };
        }
    }
    out
}

/// Conversion factors between spin and quadrature moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpScale {
    pub n_spins: u32,
    pub gamma: f64,
    pub t: f64,
}

impl HpScale {
    pub fn new(n_spins: u32, gamma: f64, t: f64) -> Self {
        Self { n_spins, gamma, t }
    }

    /// `sqrt(J_bar(t))`.
    pub fn sqrt_mean_spin(&self) -> f64 {
        mean_total_spin(self.n_spins, self.gamma, self.t).sqrt()
    }

    /// Factor `f` with `<J_x^k> ~ f <X^k>` in the given picture.
    pub fn moment_factor(&self, picture: Picture, k: u32) -> f64 {
        let base = (0.5 * self.n_spins as f64).powf(k as f64 / 2.0);
        match picture {
            Picture::Thermalizing => base * (-(k as f64) * self.gamma * self.t).exp(),
            Picture::FokkerPlanck => base,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_examples() {
        let f = fock_populations(1.0, 0.0, 5);
        assert_eq!(f.p[0], 1.0);
        assert!(f.p[1..].iter().all(|&v| v == 0.0));
        let t = 0.5f64.atanh();
        let f = fock_populations(1.0, t, 30);
        for (n, v) in f.p.iter().enumerate() {
            assert!((v - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15);
        }
        assert!((f.p.iter().sum::<f64>() + f.truncated_mass - 1.0).abs() < 1e-14);
    }

    #[test]
    fn thermal_form_and_mean() {
        let (g, t) = (1.0, 0.4);
        let nbar = mean_photon(g, t);
        let f = fock_populations(g, t, 400);
        for (n, v) in f.p.iter().take(20).enumerate() {
            let want = nbar.powi(n as i32) / (1.0 + nbar).powi(n as i32 + 1);
            assert!((v - want).abs() < 1e-14);
        }
        let mean: f64 = f.p.iter().enumerate().map(|(n, v)| n as f64 * v).sum();
        assert!((mean - nbar).abs() < 1e-10);
        assert!((mean_photon(1.0, 0.5 * 3.0f64.ln()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn n_max_meets_tail() {
        let n = default_n_max(1.0, 1.0, 1e-10);
        assert!(fock_populations(1.0, 1.0, n).truncated_mass < 1e-10);
    }

    #[test]
    fn irrep_probabilities_normalize() {
        let s: f64 = basis::irreps(200).iter().map(|&tj| irrep_probability(200, 1.0, 0.5, tj).unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-8);
        assert_eq!(irrep_probability(10, 1.0, 0.0, 10).unwrap(), 1.0);
        assert_eq!(irrep_probability(10, 1.0, 0.0, 8).unwrap(), 0.0);
    }

    #[test]
    fn mean_spin_from_irrep_distribution() {
        let (n, t) = (1000u32, 0.3);
        let mean: f64 = basis::irreps(n)
            .iter()
            .map(|&tj| tj as f64 / 2.0 * irrep_probability(n, 1.0, t, tj).unwrap())
            .sum();
        let want = mean_total_spin(n, 1.0, t);
        assert!((mean - want).abs() / want < 0.01);
    }

    #[test]
    fn early_time_mass_at_top_irrep() {
        let p = irrep_probability(50, 1.0, 1e-6, 50).unwrap();
        assert!(p > 0.999);
    }

    #[test]
    fn scale_factors() {
        let s = HpScale::new(100, 1.0, 0.5);
        assert_eq!(s.moment_factor(Picture::Thermalizing, 0), 1.0);
        assert!((s.moment_factor(Picture::Thermalizing, 2) - 50.0 * (-1.0f64).exp()).abs() < 1e-12);
        assert!((s.moment_factor(Picture::FokkerPlanck, 2) - 50.0).abs() < 1e-12);
        // pumped SCS: thermal variance times thermalizing factor stays N/4
        let var = 0.5 + mean_photon(1.0, 0.5);
        assert!((var * s.moment_factor(Picture::Thermalizing, 2) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn regime_gate() {
        assert!(!check_regime(10, 1.0, 0.05));
        assert!(check_regime(1000, 1.0, 0.3));
    }
}
