//! Post-click state for single-photon detection of the forward-scattered
//! light, starting from the Fokker–Planck vacuum.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::bopp::{d_dp, times_coordinate, to_complex};
use super::{GridSpec, WignerGrid};
use crate::error::{domain, Error, Result};
use crate::hp::{HPFrame, Picture};

type CMat = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausSettings {
    /// Truncation order of the series in the derivative part of the
    /// Gaussian factor.
    pub order: usize,
    pub grid: GridSpec,
}

impl Default for KrausSettings {
    fn default() -> Self {
        Self { order: 8, grid: GridSpec { n: 256, half_width: 6.0 } }
    }
}

/// `B v = 2 i b X dv/dP - b^2 d^2 v/dP^2`, with `b -> -b` on the right.
fn b_apply(w: &WignerGrid, v: &CMat, b: f64) -> CMat {
    let dp = d_dp(v, &w.p);
    let dpp = d_dp(&dp, &w.p);
    times_coordinate(&dp, &w.x, 0) * Complex64::new(0.0, 2.0 * b) - dpp * Complex64::new(b * b, 0.0)
}

/// One side of `K = exp(-a Y^2) Y` with `Y = X + i b d/dP`:
/// `exp(-a X^2) sum_k (-a B)^k / k!` applied after `Y`.
fn kraus_side(w: &WignerGrid, v: &CMat, a: f64, b: f64, order: usize) -> CMat {
    let y = times_coordinate(v, &w.x, 0) + d_dp(v, &w.p) * Complex64::new(0.0, b);
    let mut term = y.clone();
    let mut acc = y;
    for k in 1..=order {
        term = b_apply(w, &term, b) * Complex64::new(-a / k as f64, 0.0);
        acc += &term;
    }
    let mut out = acc;
    for i in 0..w.x.n {
        let g = (-a * w.x.value(i).powi(2)).exp();
        for k in 0..w.p.n {
            out[(i, k)] *= g;
        }
    }
    out
}

/// Normalized Wigner function after one detected photon during a window of
/// length `t_detect`, in the Fokker–Planck picture at time `t_detect`.
pub fn kraus_single_photon(kappa: f64, t_detect: f64, gamma: f64, n_spins: u32, settings: &KrausSettings) -> Result<WignerGrid> {
    if !(kappa >= 0.0 && t_detect > 0.0 && gamma >= 0.0) {
        return domain(format!("need kappa >= 0, t > 0, gamma >= 0 (kappa={kappa}, t={t_detect}, gamma={gamma})"));
    }
    let frame = HPFrame::new(Picture::FokkerPlanck, t_detect, gamma, n_spins)?;
    let vac = WignerGrid::vacuum(settings.grid, frame)?;
    let a = kappa * n_spins as f64 * t_detect / 16.0;
    let b = 0.5 * (-2.0 * gamma * t_detect).exp();
    let c = to_complex(&vac);
    let right = kraus_side(&vac, &c, a, -b, settings.order);
    let both = kraus_side(&vac, &right, a, b, settings.order);
    let values = both.map(|z| z.re);
    let mut out = WignerGrid { values, ..vac };
    let norm = out.integral();
    if !(norm.abs() >= 1e-12) {
        return Err(Error::Numerical(format!("post-click normalization {norm:e} is below 1e-12")));
    }
    out.values /= norm;
    Ok(out)
}
