//! Adaptive Dormand–Prince 5(4) integrator for real-valued state vectors.
//!
//! Every evolution in the crate (density blocks, population vectors, moment
//! hierarchies) is flattened into `&[f64]` and driven through [`integrate`].

use crate::error::{Error, Result};

/// Tolerance settings for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-8,
            h0: None,
            max_steps: 1_000_000,
        }
    }
}

impl Tolerance {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Self {
            atol,
            rtol,
            ..Self::default()
        }
    }

    /// Tighter setting used by the oracle comparisons.
    pub fn tight() -> Self {
        Self::new(1e-12, 1e-10)
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1`, overwriting `y`.
///
/// Returns the number of accepted steps.
pub fn integrate<F>(mut f: F, t0: f64, t1: f64, y: &mut [f64], tol: &Tolerance) -> Result<usize>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    if t1 == t0 || n == 0 {
        return Ok(0);
    }
    if !(t1 > t0) {
        return Err(Error::Domain(format!(
            "integration interval must be forward in time (t0 = {t0}, t1 = {t1})"
        )));
    }
    let span = t1 - t0;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];

    let mut t = t0;
    f(t, y, &mut k1);
    let mut h = tol.h0.unwrap_or_else(|| initial_step(y, &k1, tol, span));
    h = h.min(span);
    let mut accepted = 0usize;
    let mut steps = 0usize;

    while t < t1 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::Integrator {
                t,
                error_estimate: f64::NAN,
                reason: format!("exceeded {} steps", tol.max_steps),
            });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }

        for i in 0..n {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &tmp, &mut k4);
        for i in 0..n {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &tmp, &mut k5);
        for i in 0..n {
            tmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, &tmp, &mut k6);
        for i in 0..n {
            y_new[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t + h, &y_new, &mut k7);

        let mut err = 0.0f64;
        for i in 0..n {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max((e / scale).abs());
        }
        if !err.is_finite() {
            return Err(Error::Integrator {
                t,
                error_estimate: err,
                reason: "non-finite derivative".into(),
            });
        }

        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y.copy_from_slice(&y_new);
            std::mem::swap(&mut k1, &mut k7);
            accepted += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < 1e-14 * span.max(t.abs()) {
            return Err(Error::Integrator {
                t,
                error_estimate: err,
                reason: "step size underflow".into(),
            });
        }
    }
    Ok(accepted)
}

/// Integrate and record the state at each of the (increasing) sample times.
pub fn integrate_grid<F>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    times: &[f64],
    tol: &Tolerance,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut out = Vec::with_capacity(times.len());
    for &ts in times {
        if ts < t {
            return Err(Error::Domain("sample times must be non-decreasing".into()));
        }
        integrate(&mut f, t, ts, &mut y, tol)?;
        t = ts;
        out.push(y.clone());
    }
    Ok(out)
}

fn initial_step(y: &[f64], dy: &[f64], tol: &Tolerance, span: f64) -> f64 {
    let mut d0 = 0.0f64;
    let mut d1 = 0.0f64;
    for (yi, di) in y.iter().zip(dy) {
        let sc = tol.atol + tol.rtol * yi.abs();
        d0 = d0.max((yi / sc).abs());
        d1 = d1.max((di / sc).abs());
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    h.min(span).max(1e-10 * span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut y = vec![1.0, 2.0];
        integrate(
            |_, y, dy| {
                dy[0] = -y[0];
                dy[1] = -2.0 * y[1];
            },
            0.0,
            3.0,
            &mut y,
            &Tolerance::tight(),
        )
        .unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-11);
        assert!((y[1] - 2.0 * (-6.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn harmonic_oscillator_on_grid() {
        let times: Vec<f64> = (1..=10).map(|i| i as f64 * 0.7).collect();
        let out = integrate_grid(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            &times,
            &Tolerance::tight(),
        )
        .unwrap();
        for (t, y) in times.iter().zip(&out) {
            assert!((y[0] - t.cos()).abs() < 1e-9);
            assert!((y[1] + t.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_interval_is_identity() {
        let mut y = vec![0.3];
        let steps = integrate(|_, _, dy| dy[0] = 1.0, 1.0, 1.0, &mut y, &Tolerance::default())
            .unwrap();
        assert_eq!(steps, 0);
        assert_eq!(y[0], 0.3);
    }

    #[test]
    fn backwards_interval_rejected() {
        let mut y = vec![0.0];
        assert!(integrate(|_, _, dy| dy[0] = 1.0, 1.0, 0.5, &mut y, &Tolerance::default()).is_err());
    }
}
