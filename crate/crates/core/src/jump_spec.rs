//! General local jump operator `l = l_I 1 + l_+ s_+ + l_- s_- + l_z s_z`,
//! applied identically and independently to every spin, and the scalar
//! rates derived from it.

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Cartesian axis of a collective spin component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn spin_op(&self) -> crate::basis::SpinOp {
        match self {
            Axis::X => crate::basis::SpinOp::X,
            Axis::Y => crate::basis::SpinOp::Y,
            Axis::Z => crate::basis::SpinOp::Z,
        }
    }

    pub fn all() -> [Axis; 3] {
        [Axis::X, Axis::Y, Axis::Z]
    }
}

impl std::str::FromStr for Axis {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => domain(format!("unknown axis '{other}'")),
        }
    }
}

/// Coefficients of one local jump channel. Rates are absorbed into the
/// coefficients, so `l_- = sqrt(gamma)` is spontaneous decay at rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalJumpSpec {
    pub l_i: Complex64,
    pub l_plus: Complex64,
    pub l_minus: Complex64,
    pub l_z: Complex64,
}

/// Affine drift `mu1 * x + mu0(t)` and constant diffusion for one axis,
/// where `mu0(t) = mu0_const + mean_coupling . (<Jx>, <Jy>, <Jz>)(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AxisCoefficients {
    pub mu1: f64,
    pub mu0_const: f64,
    pub mean_coupling: [f64; 3],
    pub diffusion: f64,
}

impl AxisCoefficients {
    pub fn mu0(&self, mean: &[f64; 3]) -> f64 {
        self.mu0_const
            + self.mean_coupling[0] * mean[0]
            + self.mean_coupling[1] * mean[1]
            + self.mean_coupling[2] * mean[2]
    }

    fn add(mut self, o: AxisCoefficients) -> Self {
        self.mu1 += o.mu1;
        self.mu0_const += o.mu0_const;
        for k in 0..3 {
            self.mean_coupling[k] += o.mean_coupling[k];
        }
        self.diffusion += o.diffusion;
        self
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl LocalJumpSpec {
    pub fn new(l_i: Complex64, l_plus: Complex64, l_minus: Complex64, l_z: Complex64) -> Self {
        Self { l_i, l_plus, l_minus, l_z }
    }

    pub fn zero() -> Self {
        Self::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
    }

    /// Spin lowering at rate `gamma`.
    pub fn decay(gamma: f64) -> Self {
        Self { l_minus: c(gamma.sqrt(), 0.0), ..Self::zero() }
    }

    /// Spin raising at rate `gamma`.
    pub fn raise(gamma: f64) -> Self {
        Self { l_plus: c(gamma.sqrt(), 0.0), ..Self::zero() }
    }

    /// `sqrt(gamma) s_z`.
    pub fn dephasing(gamma: f64) -> Self {
        Self { l_z: c(gamma.sqrt(), 0.0), ..Self::zero() }
    }

    /// Optical pumping: independent raising and lowering at rate `gamma`.
    pub fn optical_pumping(gamma: f64) -> Vec<Self> {
        vec![Self::raise(gamma), Self::decay(gamma)]
    }

    /// Single-spin matrix in the basis `(up, down)`.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [self.l_i + self.l_z, self.l_plus],
            [self.l_minus, self.l_i - self.l_z],
        ]
    }

    /// Coefficients of `l^† l` in the basis `(up, down)`.
    pub fn gram(&self) -> [[Complex64; 2]; 2] {
        let m = self.matrix();
        let mut g = [[c(0.0, 0.0); 2]; 2];
        for (r, row) in g.iter_mut().enumerate() {
            for (k, e) in row.iter_mut().enumerate() {
                *e = m[0][r].conj() * m[0][k] + m[1][r].conj() * m[1][k];
            }
        }
        g
    }

    /// The spec seen from a frame rotated by -pi/2 about z, in which the
    /// y axis plays the role of x.
    fn rotated_to_y(&self) -> Self {
        let i = c(0.0, 1.0);
        Self { l_plus: i * self.l_plus, l_minus: -i * self.l_minus, ..*self }
    }

    pub fn omega(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => 4.0 * self.l_z.norm_sqr() + (self.l_plus - self.l_minus).norm_sqr(),
            Axis::Y => 4.0 * self.l_z.norm_sqr() + (self.l_plus + self.l_minus).norm_sqr(),
            Axis::Z => 2.0 * self.l_plus.norm_sqr() + 2.0 * self.l_minus.norm_sqr(),
        }
    }

    pub fn phi(&self, axis: Axis) -> Complex64 {
        let (li, lp, lm, lz) = (self.l_i, self.l_plus, self.l_minus, self.l_z);
        match axis {
            Axis::X => {
                lz.conj() * (2.0 * li + lm + lp)
                    + li.conj() * (-2.0 * lz + lm - lp)
                    + lm.conj() * (lz + li + lp)
                    + lp.conj() * (lz - li - lm)
            }
            Axis::Y => self.rotated_to_y().phi(Axis::X),
            Axis::Z => 2.0 * (lm * (li.conj() - lz.conj()) - lp.conj() * (li + lz)),
        }
    }

    /// Phase of `phi`, in `(-pi, pi]`.
    pub fn alpha(&self, axis: Axis) -> f64 {
        let a = self.phi(axis).arg();
        if a <= -std::f64::consts::PI {
            a + 2.0 * std::f64::consts::PI
        } else {
            a
        }
    }

    /// Drift and diffusion of `J_axis` for `n` spins.
    pub fn axis_coefficients(&self, axis: Axis, n: f64) -> AxisCoefficients {
        let w = self.omega(axis);
        let phi = self.phi(axis);
        let (mu0_const, mean_coupling) = match axis {
            Axis::X => (
                -n * (self.l_z.conj() * (self.l_plus - self.l_minus)).re,
                [0.0, -0.5 * phi.im, 0.5 * phi.re],
            ),
            Axis::Y => (
                n * (self.l_z.conj() * (self.l_plus + self.l_minus)).im,
                [0.5 * phi.im, 0.0, 0.5 * phi.re],
            ),
            Axis::Z => (
                -0.5 * n * (self.l_minus.norm_sqr() - self.l_plus.norm_sqr()),
                [-0.5 * phi.re, -0.5 * phi.im, 0.0],
            ),
        };
        AxisCoefficients { mu1: -0.5 * w, mu0_const, mean_coupling, diffusion: w * n / 8.0 }
    }

    /// Spherical weights `(l_{q=+1}, l_{q=0}, l_{q=-1})` used with the
    /// collective jump blocks.
    pub fn spherical(&self) -> [(i32, Complex64); 3] {
        [(1, self.l_plus), (0, self.l_z), (-1, self.l_minus)]
    }

    /// Parse `l_i,l_plus,l_minus,l_z` with complex numbers written as
    /// `re+imi`, `re-imi`, `re` or `imi`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return domain(format!("jump spec needs four comma-separated coefficients, got '{s}'"));
        }
        let v: Vec<Complex64> = parts.iter().map(|p| parse_complex(p)).collect::<Result<_>>()?;
        Ok(Self::new(v[0], v[1], v[2], v[3]))
    }
}

/// Sum of axis coefficients over independent channels.
pub fn combined_coefficients(specs: &[LocalJumpSpec], axis: Axis, n: f64) -> AxisCoefficients {
    specs
        .iter()
        .fold(AxisCoefficients::default(), |acc, s| acc.add(s.axis_coefficients(axis, n)))
}

pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|ch| !ch.is_whitespace()).collect();
    if t.is_empty() {
        return domain("empty complex number");
    }
    let bad = || crate::Error::Parse(format!("cannot parse complex number '{s}'"));
    if let Some(body) = t.strip_suffix('i') {
        // split at the last sign that is not part of an exponent
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            if (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re, im) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            x => x,
        };
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.parse().map_err(|_| bad())?;
        Ok(c(re, im))
    } else {
        Ok(c(t.parse().map_err(|_| bad())?, 0.0))
    }
}
