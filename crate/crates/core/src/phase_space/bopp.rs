//! Bopp (left/right multiplication) differential operators on Wigner grids.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{GridAxis, WignerGrid};
use crate::hp::{HPFrame, Picture};

type CMat = DMatrix<Complex64>;

/// Collective operator represented on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoppSymbol {
    Jx,
    Jy,
}

/// Whether the operator multiplies the density from the left or the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

const D1: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

fn diff_rows(v: &CMat, h: f64) -> CMat {
    let (nr, nc) = v.shape();
    CMat::from_fn(nr, nc, |i, k| {
        let mut s = Complex64::new(0.0, 0.0);
        for (o, &c) in D1.iter().enumerate() {
            let off = o + 1;
            if i + off < nr {
                s += v[(i + off, k)] * c;
            }
            if i >= off {
                s -= v[(i - off, k)] * c;
            }
        }
        s / h
    })
}

/// `dW/dx` (first index) with sixth-order central differences.
pub fn d_dx(v: &CMat, x: &GridAxis) -> CMat {
    diff_rows(v, x.step)
}

/// `dW/dp` (second index).
pub fn d_dp(v: &CMat, p: &GridAxis) -> CMat {
    diff_rows(&v.transpose(), p.step).transpose()
}

/// Prefactor and derivative weight `(s, b)` so that the left Jx action is
/// `s (X + i b dW/dP)`.
pub(crate) fn bopp_weights(frame: &HPFrame) -> (f64, f64) {
    let root = (0.5 * frame.n_spins as f64).sqrt();
    let e = frame.scale();
    match frame.picture {
        Picture::Thermalizing => (root * e, 0.5),
        Picture::FokkerPlanck => (root, 0.5 * e * e),
    }
}

/// Multiplication by the position of the first (`axis = 0`) or second index.
pub(crate) fn times_coordinate(v: &CMat, axis: &GridAxis, which: usize) -> CMat {
    let mut out = v.clone();
    for i in 0..v.nrows() {
        for k in 0..v.ncols() {
            let q = if which == 0 { axis.value(i) } else { axis.value(k) };
            out[(i, k)] *= q;
        }
    }
    out
}

/// Apply the Bopp form of `symbol` on `side` to the complex field `v`
/// living on the grid (and frame) of `w`.
pub fn bopp_apply(symbol: BoppSymbol, side: Side, w: &WignerGrid, v: &CMat) -> CMat {
    let (s, b) = bopp_weights(&w.frame);
    let sign = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let out = match symbol {
        BoppSymbol::Jx => times_coordinate(v, &w.x, 0) + d_dp(v, &w.p) * Complex64::new(0.0, sign * b),
        BoppSymbol::Jy => times_coordinate(v, &w.p, 1) - d_dx(v, &w.x) * Complex64::new(0.0, sign * b),
    };
    out * Complex64::new(s, 0.0)
}

/// Trapezoid integral of a complex field over the grid of `w`.
pub fn complex_integral(w: &WignerGrid, v: &CMat) -> Complex64 {
    let re = super::integrate(&v.map(|z| z.re), &w.x, &w.p);
    let im = super::integrate(&v.map(|z| z.im), &w.x, &w.p);
    Complex64::new(re, im)
}

pub(crate) fn to_complex(w: &WignerGrid) -> CMat {
    w.values.map(|r| Complex64::new(r, 0.0))
}

#[cfg(test)]
mod tests {
    use super::super::GridSpec;
    use super::*;
    use crate::hp::mean_photon;

    #[test]
    fn vacuum_first_moment_vanishes() {
        let f = HPFrame::new(Picture::Thermalizing, 0.0, 1.0, 50).unwrap();
        let w = WignerGrid::vacuum(GridSpec::for_sigma(0.75), f).unwrap();
        let z = complex_integral(&w, &bopp_apply(BoppSymbol::Jx, Side::Left, &w, &to_complex(&w)));
        assert!(z.norm() < 1e-12);
    }

    #[test]
    fn thermal_second_moment_is_constant() {
        let n = 40;
        for picture in [Picture::Thermalizing, Picture::FokkerPlanck] {
            for t in [0.0, 0.5, 1.5] {
                let f = HPFrame::new(picture, t, 1.0, n).unwrap();
                let var = match picture {
                    Picture::Thermalizing => 0.5 + mean_photon(1.0, t),
                    Picture::FokkerPlanck => 0.5,
                };
                let w = WignerGrid::gaussian(GridSpec::for_sigma(var.sqrt()), f, var).unwrap();
                for sym in [BoppSymbol::Jx, BoppSymbol::Jy] {
                    let once = bopp_apply(sym, Side::Left, &w, &to_complex(&w));
                    let twice = bopp_apply(sym, Side::Left, &w, &once);
                    let z = complex_integral(&w, &twice);
                    assert!((z.re - n as f64 / 4.0).abs() < 1e-8, "{picture:?} t={t} {z}");
                    assert!(z.im.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn left_right_commute() {
        let f = HPFrame::new(Picture::FokkerPlanck, 0.2, 1.0, 10).unwrap();
        let w = WignerGrid::fock1(GridSpec { n: 160, half_width: 7.0 }, f).unwrap();
        let c = to_complex(&w);
        let lr = bopp_apply(BoppSymbol::Jx, Side::Left, &w, &bopp_apply(BoppSymbol::Jy, Side::Right, &w, &c));
        let rl = bopp_apply(BoppSymbol::Jy, Side::Right, &w, &bopp_apply(BoppSymbol::Jx, Side::Left, &w, &c));
        let gap = (lr - rl).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(gap < 1e-4, "{gap}");
    }

    #[test]
    fn commutator_of_left_actions() {
        // [Jx, Jy] acting on W integrates to i<Jz>-like term; for the HP
        // vacuum at t=0 it equals i N/2 (Jz = -N/2 + n maps to the constant).
        let n = 12;
        let f = HPFrame::new(Picture::Thermalizing, 0.0, 1.0, n).unwrap();
        let w = WignerGrid::vacuum(GridSpec::for_sigma(0.75), f).unwrap();
        let c = to_complex(&w);
        let xy = bopp_apply(BoppSymbol::Jx, Side::Left, &w, &bopp_apply(BoppSymbol::Jy, Side::Left, &w, &c));
        let yx = bopp_apply(BoppSymbol::Jy, Side::Left, &w, &bopp_apply(BoppSymbol::Jx, Side::Left, &w, &c));
        let z = complex_integral(&w, &(xy - yx));
        assert!((z - Complex64::new(0.0, n as f64 / 2.0)).norm() < 1e-8);
    }
}
