//! Wigner-function description of the bosonic mode.
//!
//! Grids are uniform in both quadratures; `values[(i, k)]` holds `W(x_i, p_k)`.

mod bopp;
mod kraus;
mod propagate;

pub use bopp::{bopp_apply, complex_integral, d_dp, d_dx, BoppSymbol, Side};
pub use kraus::{kraus_single_photon, KrausSettings};
pub use propagate::{
    add_collective_dephasing, evolve_fokker_planck, evolve_fokker_planck_fd, evolve_thermalizing,
    evolve_thermalizing_fd, evolve_with_dephasing, frame_transform, transfer_matrix, FrameDirection,
};

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{domain, Result};
use crate::hp::HPFrame;

/// Uniform axis `min + i * step`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub step: f64,
    pub n: usize,
}

impl GridAxis {
    /// `n` points spanning `[-half_width, half_width]`.
    pub fn symmetric(n: usize, half_width: f64) -> Result<Self> {
        if n < 8 || !(half_width > 0.0) {
            return domain(format!("grid needs n >= 8 and positive extent (n={n}, half width={half_width})"));
        }
        Ok(Self { min: -half_width, step: 2.0 * half_width / (n - 1) as f64, n })
    }

    pub fn value(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn max(&self) -> f64 {
        self.value(self.n - 1)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }

    /// Trapezoid weights including the step.
    pub fn weights(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| if i == 0 || i + 1 == self.n { 0.5 * self.step } else { self.step })
            .collect()
    }
}

/// Square grid settings: `n` points per axis on `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub half_width: f64,
}

impl GridSpec {
    /// Default layout: 256 points over eight standard deviations.
    pub fn for_sigma(sigma_max: f64) -> Self {
        Self { n: 256, half_width: 8.0 * sigma_max }
    }

    pub fn axis(&self) -> Result<GridAxis> {
        GridAxis::symmetric(self.n, self.half_width)
    }
}

/// Real Wigner function sampled on a grid, tagged with its frame.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x: GridAxis,
    pub p: GridAxis,
    pub values: DMatrix<f64>,
    pub frame: HPFrame,
}

impl WignerGrid {
    pub fn from_fn(x: GridAxis, p: GridAxis, frame: HPFrame, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = DMatrix::from_fn(x.n, p.n, |i, k| f(x.value(i), p.value(k)));
        Self { x, p, values, frame }
    }

    /// Vacuum: `exp(-x^2 - p^2)/pi`.
    pub fn vacuum(spec: GridSpec, frame: HPFrame) -> Result<Self> {
        let a = spec.axis()?;
        Ok(Self::from_fn(a, a, frame, |x, p| (-x * x - p * p).exp() / std::f64::consts::PI))
    }

    /// Single-photon Fock state.
    pub fn fock1(spec: GridSpec, frame: HPFrame) -> Result<Self> {
        let a = spec.axis()?;
        Ok(Self::from_fn(a, a, frame, fock1_wigner))
    }

    /// Isotropic Gaussian with per-quadrature variance `var`.
    pub fn gaussian(spec: GridSpec, frame: HPFrame, var: f64) -> Result<Self> {
        let a = spec.axis()?;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * var);
        Ok(Self::from_fn(a, a, frame, move |x, p| norm * (-(x * x + p * p) / (2.0 * var)).exp()))
    }

    pub fn integral(&self) -> f64 {
        integrate(&self.values, &self.x, &self.p)
    }

    /// `∫∫ |W - other|`; both grids must share axes.
    pub fn l1_distance(&self, other: &WignerGrid) -> f64 {
        integrate(&(&self.values - &other.values).map(f64::abs), &self.x, &self.p)
    }

    /// Probability density along one quadrature (`0` = x, `1` = p).
    pub fn marginal(&self, axis: usize) -> Vec<f64> {
        match axis {
            0 => {
                let w = self.p.weights();
                (0..self.x.n).map(|i| (0..self.p.n).map(|k| self.values[(i, k)] * w[k]).sum()).collect()
            }
            _ => {
                let w = self.x.weights();
                (0..self.p.n).map(|k| (0..self.x.n).map(|i| self.values[(i, k)] * w[i]).sum()).collect()
            }
        }
    }

    /// `∫∫ q^k W` with `q` the chosen quadrature.
    pub fn grid_moment(&self, axis: usize, k: u32) -> f64 {
        let m = self.marginal(axis);
        let ax = if axis == 0 { self.x } else { self.p };
        let w = ax.weights();
        m.iter().enumerate().map(|(i, v)| v * w[i] * ax.value(i).powi(k as i32)).sum()
    }

    /// Integral of `|W|` within `margin` points of any edge.
    pub fn edge_mass(&self, margin: usize) -> f64 {
        let (nx, np) = (self.x.n, self.p.n);
        let mut s = 0.0;
        for i in 0..nx {
            for k in 0..np {
                if i < margin || k < margin || i + margin >= nx || k + margin >= np {
                    s += self.values[(i, k)].abs();
                }
            }
        }
        s * self.x.step * self.p.step
    }

    /// CSV with columns `x,p,w`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "p", "w"])?;
        for i in 0..self.x.n {
            for k in 0..self.p.n {
                wr.write_record([
                    format!("{}", self.x.value(i)),
                    format!("{}", self.p.value(k)),
                    format!("{:e}", self.values[(i, k)]),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Binary raster: magic `WIGR`, `u64` nx, `u64` np, `f64` x_min, x_max,
    /// p_min, p_max, then `nx * np` little-endian doubles with `x` outermost.
    pub fn write_raster<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"WIGR")?;
        w.write_all(&(self.x.n as u64).to_le_bytes())?;
        w.write_all(&(self.p.n as u64).to_le_bytes())?;
        for v in [self.x.min, self.x.max(), self.p.min, self.p.max()] {
            w.write_all(&v.to_le_bytes())?;
        }
        for i in 0..self.x.n {
            for k in 0..self.p.n {
                w.write_all(&self.values[(i, k)].to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// `(2 r^2 - 1) exp(-r^2) / pi`.
pub fn fock1_wigner(x: f64, p: f64) -> f64 {
    let r2 = x * x + p * p;
    (2.0 * r2 - 1.0) * (-r2).exp() / std::f64::consts::PI
}

pub(crate) fn integrate(values: &DMatrix<f64>, x: &GridAxis, p: &GridAxis) -> f64 {
    let wx = x.weights();
    let wp = p.weights();
    let mut s = 0.0;
    for i in 0..x.n {
        let mut row = 0.0;
        for k in 0..p.n {
            row += values[(i, k)] * wp[k];
        }
        s += row * wx[i];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hp::Picture;

    fn frame() -> HPFrame {
        HPFrame::new(Picture::FokkerPlanck, 0.0, 1.0, 100).unwrap()
    }

    #[test]
    fn normalizations() {
        let spec = GridSpec { n: 128, half_width: 7.0 };
        for w in [WignerGrid::vacuum(spec, frame()).unwrap(), WignerGrid::fock1(spec, frame()).unwrap()] {
            assert!((w.integral() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn vacuum_marginal_variance() {
        let w = WignerGrid::vacuum(GridSpec { n: 128, half_width: 7.0 }, frame()).unwrap();
        assert!((w.grid_moment(0, 2) - 0.5).abs() < 1e-10);
        assert!((w.grid_moment(1, 2) - 0.5).abs() < 1e-10);
        assert!(w.grid_moment(0, 1).abs() < 1e-12);
    }

    #[test]
    fn fock1_marginal_closed_form() {
        let w = WignerGrid::fock1(GridSpec { n: 256, half_width: 8.0 }, frame()).unwrap();
        let m = w.marginal(0);
        let err = w
            .x
            .values()
            .iter()
            .zip(&m)
            .map(|(x, v)| (v - 2.0 * x * x * (-x * x).exp() / std::f64::consts::PI.sqrt()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6);
        assert!((w.values[(128, 128)] - fock1_wigner(w.x.value(128), w.p.value(128))).abs() < 1e-15);
    }

    #[test]
    fn raster_layout() {
        let w = WignerGrid::vacuum(GridSpec { n: 8, half_width: 2.0 }, frame()).unwrap();
        let mut buf = Vec::new();
        w.write_raster(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"WIGR");
        assert_eq!(buf.len(), 4 + 16 + 32 + 64 * 8);
        let mut csvbuf = Vec::new();
        w.write_csv(&mut csvbuf).unwrap();
        assert!(String::from_utf8(csvbuf).unwrap().starts_with("x,p,w"));
    }
}
