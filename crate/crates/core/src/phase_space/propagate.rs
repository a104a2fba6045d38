//! Exact Gaussian propagators for the thermalizing and Fokker–Planck
//! pictures, a finite-difference cross-check, and collective dephasing.
//!
//! Every map has the form `W'(x) = ∫ G_s(x - c y) W(y) dy` along each axis
//! (Gaussian of variance `s`), realised as a dense transfer matrix built
//! from a band-limited Fourier series of the kernel.

use nalgebra::DMatrix;

use super::{GridAxis, WignerGrid};
use crate::error::{domain, Error, Result};
use crate::hp::Picture;

/// Matrix `A` with `out_i = sum_j A_ij in_j` for the kernel
/// `G_{sigma2}(x - c y)` integrated over `y`.
pub fn transfer_matrix(out: &GridAxis, inp: &GridAxis, c: f64, sigma2: f64) -> DMatrix<f64> {
    let n = out.n;
    let period = n as f64 * out.step;
    let m_max = n / 2;
    let mut cx = DMatrix::zeros(out.n, m_max);
    let mut sx = DMatrix::zeros(out.n, m_max);
    let mut cy = DMatrix::zeros(inp.n, m_max);
    let mut sy = DMatrix::zeros(inp.n, m_max);
    for m in 1..=m_max {
        let k = 2.0 * std::f64::consts::PI * m as f64 / period;
        let mut w = (-0.5 * sigma2 * k * k).exp();
        if n % 2 == 0 && m == m_max {
            w *= 0.5;
        }
        for i in 0..out.n {
            let (s, co) = (k * out.value(i)).sin_cos();
            cx[(i, m - 1)] = 2.0 * w * co;
            sx[(i, m - 1)] = 2.0 * w * s;
        }
        for j in 0..inp.n {
            let (s, co) = (k * c * inp.value(j)).sin_cos();
            cy[(j, m - 1)] = co;
            sy[(j, m - 1)] = s;
        }
    }
    let mut a = cx * cy.transpose() + sx * sy.transpose();
    a.add_scalar_mut(1.0);
    a * (inp.step / period)
}

fn apply_separable(w: &WignerGrid, ax: &DMatrix<f64>, ap: &DMatrix<f64>) -> DMatrix<f64> {
    ax * &w.values * ap.transpose()
}

fn check_picture(w: &WignerGrid, want: Picture) -> Result<()> {
    if w.frame.picture != want {
        return domain(format!("grid is in the {:?} picture, expected {want:?}", w.frame.picture));
    }
    Ok(())
}

fn check_edges(w: &WignerGrid) -> Result<()> {
    let margin = (w.x.n.min(w.p.n) / 16).max(2);
    let leaked = w.edge_mass(margin);
    if leaked > 1e-8 {
        return Err(Error::Truncation {
            lost: leaked,
            limit: 1e-8,
            hint: "enlarge the grid extent".into(),
        });
    }
    Ok(())
}

fn check_times(t0: f64, t1: f64) -> Result<()> {
    if !(t1 >= t0 && t0 >= 0.0) {
        return domain(format!("need 0 <= t0 <= t1 (t0={t0}, t1={t1})"));
    }
    Ok(())
}

/// Heat-kernel variance accumulated between `t0` and `t1` in the
/// thermalizing picture: `(e^{2 gamma t1} - e^{2 gamma t0}) / 2`.
fn thermal_variance(gamma: f64, t0: f64, t1: f64) -> f64 {
    0.5 * ((2.0 * gamma * t1).exp() - (2.0 * gamma * t0).exp())
}

/// Diffusion with rate `(gamma/2) e^{2 gamma t}` from `t0` to `t1`.
pub fn evolve_thermalizing(w: &WignerGrid, gamma: f64, t0: f64, t1: f64) -> Result<WignerGrid> {
    check_picture(w, Picture::Thermalizing)?;
    check_times(t0, t1)?;
    let s = thermal_variance(gamma, t0, t1);
    let ax = transfer_matrix(&w.x, &w.x, 1.0, s);
    let ap = transfer_matrix(&w.p, &w.p, 1.0, s);
    finish(w, apply_separable(w, &ax, &ap), gamma, t1)
}

/// Ornstein–Uhlenbeck evolution towards the vacuum from `t0` to `t1`.
pub fn evolve_fokker_planck(w: &WignerGrid, gamma: f64, t0: f64, t1: f64) -> Result<WignerGrid> {
    check_picture(w, Picture::FokkerPlanck)?;
    check_times(t0, t1)?;
    let (ax, ap) = ou_matrices(w, gamma, t1 - t0);
    finish(w, apply_separable(w, &ax, &ap), gamma, t1)
}

fn ou_matrices(w: &WignerGrid, gamma: f64, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let c = (-gamma * dt).exp();
    let s = -0.5 * (-2.0 * gamma * dt).exp_m1();
    (transfer_matrix(&w.x, &w.x, c, s), transfer_matrix(&w.p, &w.p, c, s))
}

fn finish(w: &WignerGrid, values: DMatrix<f64>, gamma: f64, t1: f64) -> Result<WignerGrid> {
    let mut out = WignerGrid { values, ..w.clone() };
    out.frame.t = t1;
    out.frame.gamma = gamma;
    check_edges(&out)?;
    Ok(out)
}

/// Direction of a change of picture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameDirection {
    ToFokkerPlanck,
    ToThermalizing,
}

/// Rescale coordinates by `e^{∓gamma t}` (and amplitude to keep the
/// normalization) at the grid's current frame time.
pub fn frame_transform(w: &WignerGrid, dir: FrameDirection) -> Result<WignerGrid> {
    let (from, to, c) = match dir {
        FrameDirection::ToFokkerPlanck => (Picture::Thermalizing, Picture::FokkerPlanck, w.frame.scale()),
        FrameDirection::ToThermalizing => (Picture::FokkerPlanck, Picture::Thermalizing, 1.0 / w.frame.scale()),
    };
    check_picture(w, from)?;
    if c > 1.0 {
        // stretched coordinates must still fit on the grid
        let outside = mass_outside(w, w.x.min / c, w.x.max() / c, w.p.min / c, w.p.max() / c);
        if outside > 1e-6 {
            return Err(Error::Truncation {
                lost: outside,
                limit: 1e-6,
                hint: "the rescaled state does not fit on the grid; enlarge the extent".into(),
            });
        }
    }
    let ax = transfer_matrix(&w.x, &w.x, c, 0.0);
    let ap = transfer_matrix(&w.p, &w.p, c, 0.0);
    let mut out = WignerGrid { values: apply_separable(w, &ax, &ap), ..w.clone() };
    out.frame.picture = to;
    let lost = (out.integral() - w.integral()).abs();
    if lost > 1e-6 {
        return Err(Error::Truncation { lost, limit: 1e-6, hint: "resampling lost mass".into() });
    }
    Ok(out)
}

fn mass_outside(w: &WignerGrid, x0: f64, x1: f64, p0: f64, p1: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..w.x.n {
        for k in 0..w.p.n {
            let (x, p) = (w.x.value(i), w.p.value(k));
            if x < x0 || x > x1 || p < p0 || p > p1 {
                s += w.values[(i, k)].abs();
            }
        }
    }
    s * w.x.step * w.p.step
}

const D1: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
const D2: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

/// Sixth-order central first-derivative matrix with zero boundary values.
pub(crate) fn first_derivative(axis: &GridAxis) -> DMatrix<f64> {
    let n = axis.n;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for (o, &c) in D1.iter().enumerate() {
            let off = o + 1;
            if i + off < n {
                m[(i, i + off)] += c / axis.step;
            }
            if i >= off {
                m[(i, i - off)] -= c / axis.step;
            }
        }
    }
    m
}

/// Sixth-order central second-derivative matrix with zero boundary values.
pub(crate) fn second_derivative(axis: &GridAxis) -> DMatrix<f64> {
    let n = axis.n;
    let h2 = axis.step * axis.step;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = D2[0] / h2;
        for (off, &c) in D2.iter().enumerate().skip(1) {
            if i + off < n {
                m[(i, i + off)] += c / h2;
            }
            if i >= off {
                m[(i, i - off)] += c / h2;
            }
        }
    }
    m
}

/// Finite-difference path for the thermalizing picture (time-exact
/// exponential of the discretised Laplacian).
pub fn evolve_thermalizing_fd(w: &WignerGrid, gamma: f64, t0: f64, t1: f64) -> Result<WignerGrid> {
    check_picture(w, Picture::Thermalizing)?;
    check_times(t0, t1)?;
    let s = 0.5 * thermal_variance(gamma, t0, t1);
    let ex = (second_derivative(&w.x) * s).exp();
    let ep = (second_derivative(&w.p) * s).exp();
    finish(w, apply_separable(w, &ex, &ep), gamma, t1)
}

/// Finite-difference path for the Fokker–Planck picture,
/// generator `gamma (d/dq q + 1/2 d^2/dq^2)` per axis.
pub fn evolve_fokker_planck_fd(w: &WignerGrid, gamma: f64, t0: f64, t1: f64) -> Result<WignerGrid> {
    check_picture(w, Picture::FokkerPlanck)?;
    check_times(t0, t1)?;
    let gen = |a: &GridAxis| {
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(a.values()));
        (first_derivative(a) * q + second_derivative(a) * 0.5) * (gamma * (t1 - t0))
    };
    let ex = gen(&w.x).exp();
    let ep = gen(&w.p).exp();
    finish(w, apply_separable(w, &ex, &ep), gamma, t1)
}

fn dephasing_coefficient(picture: Picture, kappa: f64, n_spins: u32, gamma: f64, t: f64) -> f64 {
    let base = 0.25 * kappa * n_spins as f64;
    match picture {
        Picture::Thermalizing => base * (-2.0 * gamma * t).exp(),
        Picture::FokkerPlanck => base * (-4.0 * gamma * t).exp(),
    }
}

/// Add the collective-dephasing contribution `c(t) d^2 W / dp^2` to `w_dot`.
pub fn add_collective_dephasing(w_dot: &mut DMatrix<f64>, w: &WignerGrid, kappa: f64, n_spins: u32, gamma: f64, t: f64) {
    if kappa == 0.0 {
        return;
    }
    let c = dephasing_coefficient(w.frame.picture, kappa, n_spins, gamma, t);
    let dpp = second_derivative(&w.p);
    *w_dot += &w.values * dpp.transpose() * c;
}

/// P-quadrature variance added by collective dephasing over `[t0, t1]`.
fn dephasing_variance(picture: Picture, kappa: f64, n_spins: u32, gamma: f64, t0: f64, t1: f64) -> f64 {
    let base = 0.5 * kappa * n_spins as f64;
    let rate = match picture {
        Picture::Thermalizing => 2.0 * gamma,
        Picture::FokkerPlanck => 4.0 * gamma,
    };
    if rate == 0.0 {
        base * (t1 - t0)
    } else {
        base * ((-rate * t0).exp() - (-rate * t1).exp()) / rate
    }
}

/// Local pumping plus collective dephasing. The thermalizing picture is
/// exact (the two diffusions commute); the Fokker–Planck picture uses Strang
/// splitting with `substeps` steps.
pub fn evolve_with_dephasing(
    w: &WignerGrid,
    gamma: f64,
    kappa: f64,
    n_spins: u32,
    t0: f64,
    t1: f64,
    substeps: usize,
) -> Result<WignerGrid> {
    check_times(t0, t1)?;
    match w.frame.picture {
        Picture::Thermalizing => {
            let s = thermal_variance(gamma, t0, t1);
            let sp = s + dephasing_variance(Picture::Thermalizing, kappa, n_spins, gamma, t0, t1);
            let ax = transfer_matrix(&w.x, &w.x, 1.0, s);
            let ap = transfer_matrix(&w.p, &w.p, 1.0, sp);
            finish(w, apply_separable(w, &ax, &ap), gamma, t1)
        }
        Picture::FokkerPlanck => {
            let steps = substeps.max(1);
            let h = (t1 - t0) / steps as f64;
            let (hx, hp) = ou_matrices(w, gamma, 0.5 * h);
            let mut cur = w.values.clone();
            for s in 0..steps {
                let ta = t0 + s as f64 * h;
                let v = dephasing_variance(Picture::FokkerPlanck, kappa, n_spins, gamma, ta, ta + h);
                let dp = transfer_matrix(&w.p, &w.p, 1.0, v);
                cur = &hx * cur * hp.transpose();
                cur = cur * dp.transpose();
                cur = &hx * cur * hp.transpose();
            }
            finish(w, cur, gamma, t1)
        }
    }
}
