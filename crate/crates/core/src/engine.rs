//! Deterministic master-equation evolution in the collective-state basis.
//!
//! The generator acting on each irrep block has the form
//! `drho_J = C_J rho_J + rho_J C_J^† + sum_k K_k rho_{J'} K_k^†`
//! where each `K_k` maps block `J'` into block `J`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::{self, block_dim, EnsembleParams, JumpChannelIndex, SparseBlock, SpinOp};
use crate::density::{CollectiveDensity, PopulationVector};
use crate::error::{domain, Result};
use crate::jump_spec::LocalJumpSpec;
use crate::ode::{self, Tolerance};

type CMat = DMatrix<Complex64>;

fn cx(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn sparse_to_complex(b: &SparseBlock, w: Complex64) -> CMat {
    let mut m = CMat::zeros(b.rows, b.cols);
    for &(r, c, v) in &b.entries {
        m[(r, c)] += w * v;
    }
    m
}

#[derive(Debug, Clone)]
pub(crate) struct Jump {
    pub(crate) from: usize,
    pub(crate) to: usize,
    pub(crate) op: CMat,
    op_adj: CMat,
}

/// Block-structured Lindbladian over a fixed set of irreps.
#[derive(Debug, Clone)]
pub struct BlockLindbladian {
    pub n_spins: u32,
    /// Kept irreps (as `2J`), largest first.
    pub irreps: Vec<u32>,
    pub(crate) drift: Vec<CMat>,
    pub(crate) jumps: Vec<Jump>,
}

impl BlockLindbladian {
    fn empty(n: u32, keep_top: Option<u32>) -> Self {
        let irreps = basis::top_irreps(n, keep_top);
        let drift = irreps.iter().map(|&tj| CMat::zeros(block_dim(tj), block_dim(tj))).collect();
        Self { n_spins: n, irreps, drift, jumps: Vec::new() }
    }

    fn position(&self, two_j: u32) -> Option<usize> {
        self.irreps.iter().position(|&t| t == two_j)
    }

    fn push_jump(&mut self, from: usize, to: usize, op: CMat) {
        if op.iter().all(|z| *z == cx(0.0)) {
            return;
        }
        let op_adj = op.adjoint();
        self.jumps.push(Jump { from, to, op, op_adj });
    }

    /// Optical pumping at rate `gamma`: the anticommutator part collapses to
    /// `-gamma N rho` and six channels carry the jumps.
    pub fn pumping(n: u32, gamma: f64, keep_top: Option<u32>) -> Self {
        let mut l = Self::empty(n, keep_top);
        for (k, &tj) in l.irreps.clone().iter().enumerate() {
            l.drift[k] = CMat::identity(block_dim(tj), block_dim(tj)) * cx(-0.5 * gamma * n as f64);
            for ch in JumpChannelIndex::pumping() {
                let blk = basis::jump_operator_block(n, tj, ch);
                if blk.rows == 0 {
                    continue;
                }
                let target = (tj as i32 + 2 * ch.j) as u32;
                if let Some(to) = l.position(target) {
                    l.push_jump(k, to, sparse_to_complex(&blk, cx(gamma.sqrt())));
                }
            }
        }
        l
    }

    /// Independent local channels `specs` plus collective dephasing
    /// `kappa D[J_x]`.
    pub fn general(n: u32, specs: &[LocalJumpSpec], kappa: f64, keep_top: Option<u32>) -> Self {
        let mut l = Self::empty(n, keep_top);
        let nf = n as f64;
        for (k, &tj) in l.irreps.clone().iter().enumerate() {
            let d = block_dim(tj);
            let jp = basis::spin_matrix(SpinOp::Plus, tj);
            let jm = basis::spin_matrix(SpinOp::Minus, tj);
            let jz = basis::spin_matrix(SpinOp::Z, tj);
            let id = CMat::identity(d, d);
            let mut c = CMat::zeros(d, d);
            for s in specs {
                // l_I^* sum_i (traceless part of l_i)
                let traceless = &jp * s.l_plus + &jm * s.l_minus + &jz * (s.l_z * 2.0);
                c += traceless * s.l_i.conj();
                // sum_i l_i^† l_i
                let g = s.gram();
                let a = &id * ((g[0][0] + g[1][1]) * 0.5 * nf)
                    + &jz * (g[0][0] - g[1][1])
                    + &jp * g[0][1]
                    + &jm * g[1][0];
                c -= a * cx(0.5);
                c += &id * cx(0.5 * nf * s.l_i.norm_sqr());

                for j in [-1, 0, 1] {
                    let target = tj as i64 + 2 * j as i64;
                    if target < 0 {
                        continue;
                    }
                    let Some(to) = l.position(target as u32) else { continue };
                    let mut op = CMat::zeros(block_dim(target as u32), d);
                    for (q, w) in s.spherical() {
                        let blk = basis::jump_operator_block(n, tj, JumpChannelIndex { j, q });
                        if blk.rows > 0 {
                            op += sparse_to_complex(&blk, w);
                        }
                    }
                    l.push_jump(k, to, op);
                }
            }
            if kappa > 0.0 {
                let jx = basis::spin_matrix(SpinOp::X, tj);
                c -= &jx * &jx * cx(0.5 * kappa);
                l.push_jump(k, k, jx * cx(kappa.sqrt()));
            }
            l.drift[k] = c;
        }
        l
    }

    fn check_layout(&self, rho: &CollectiveDensity) -> Result<()> {
        if rho.params.n_spins != self.n_spins {
            return domain("density and generator have different ensemble sizes");
        }
        let keys: Vec<u32> = rho.blocks.keys().rev().copied().collect();
        if keys != self.irreps {
            return domain(format!(
                "density carries irreps {keys:?} but the generator keeps {:?}",
                self.irreps
            ));
        }
        Ok(())
    }

    /// Apply the generator to a list of blocks (same order as `irreps`).
    pub fn apply(&self, rho: &[CMat], out: &mut [CMat]) {
        for (k, o) in out.iter_mut().enumerate() {
            let c = &self.drift[k];
            // C rho + rho C^†, written out so non-Hermitian input stays bounded
            *o = c * &rho[k] + &rho[k] * c.adjoint();
        }
        for jmp in &self.jumps {
            let t = &jmp.op * &rho[jmp.from] * &jmp.op_adj;
            out[jmp.to] += t;
        }
    }

    /// Evolve `rho` by `t` and return samples at each of `times` (relative
    /// to the initial state, non-decreasing).
    pub fn evolve_grid(
        &self,
        rho: &CollectiveDensity,
        times: &[f64],
        tol: &Tolerance,
    ) -> Result<Vec<CollectiveDensity>> {
        self.check_layout(rho)?;
        let dims: Vec<usize> = self.irreps.iter().map(|&t| block_dim(t)).collect();
        let mut bufs_in: Vec<CMat> = dims.iter().map(|&d| CMat::zeros(d, d)).collect();
        let mut bufs_out = bufs_in.clone();
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            unflatten(y, &mut bufs_in);
            self.apply(&bufs_in, &mut bufs_out);
            flatten(&bufs_out, dy);
        };
        let y0 = rho.to_flat();
        let samples = ode::integrate_grid(rhs, 0.0, &y0, times, tol)?;
        Ok(samples
            .into_iter()
            .map(|y| {
                let mut r = rho.clone();
                r.set_from_flat(&y);
                r
            })
            .collect())
    }

    pub fn evolve(&self, rho: &CollectiveDensity, t: f64, tol: &Tolerance) -> Result<CollectiveDensity> {
        if t < 0.0 {
            return domain("evolution time must be nonnegative");
        }
        Ok(self.evolve_grid(rho, &[t], tol)?.pop().expect("one sample"))
    }
}

fn unflatten(y: &[f64], blocks: &mut [CMat]) {
    let mut k = 0;
    for b in blocks.iter_mut() {
        for r in 0..b.nrows() {
            for c in 0..b.ncols() {
                b[(r, c)] = Complex64::new(y[k], y[k + 1]);
                k += 2;
            }
        }
    }
}

fn flatten(blocks: &[CMat], y: &mut [f64]) {
    let mut k = 0;
    for b in blocks {
        for r in 0..b.nrows() {
            for c in 0..b.ncols() {
                y[k] = b[(r, c)].re;
                y[k + 1] = b[(r, c)].im;
                k += 2;
            }
        }
    }
}

/// Optical pumping at `rho.params.gamma` for duration `t`.
pub fn evolve_pumping_density(rho: &CollectiveDensity, t: f64, tol: &Tolerance) -> Result<CollectiveDensity> {
    let keep = keep_of(rho);
    BlockLindbladian::pumping(rho.params.n_spins, rho.params.gamma, keep).evolve(rho, t, tol)
}

/// General local channels plus collective dephasing for duration `t`.
pub fn evolve_general(
    rho: &CollectiveDensity,
    specs: &[LocalJumpSpec],
    kappa: f64,
    t: f64,
    tol: &Tolerance,
) -> Result<CollectiveDensity> {
    let keep = keep_of(rho);
    BlockLindbladian::general(rho.params.n_spins, specs, kappa, keep).evolve(rho, t, tol)
}

fn keep_of(rho: &CollectiveDensity) -> Option<u32> {
    let n = rho.params.n_spins;
    let all = basis::irreps(n).len();
    if rho.blocks.len() == all {
        None
    } else {
        Some(rho.blocks.len() as u32 - 1)
    }
}

/// Rate equations for populations of a state diagonal in the collective
/// basis.
#[derive(Debug, Clone)]
pub struct PopulationRates {
    n_spins: u32,
    gamma: f64,
    /// For each target index: `(source index, rate)`.
    inflow: Vec<Vec<(usize, f64)>>,
}

impl PopulationRates {
    pub fn new(n: u32, gamma: f64) -> Self {
        let labels = PopulationVector::labels_for(n);
        let index: BTreeMap<(u32, i32), usize> =
            labels.iter().enumerate().map(|(i, l)| ((l.two_j, l.two_m), i)).collect();
        let inflow = labels
            .iter()
            .map(|l| {
                JumpChannelIndex::pumping()
                    .iter()
                    .filter_map(|ch| {
                        let g = basis::pump_rate(n, l.two_j, l.two_m, *ch);
                        if g == 0.0 {
                            return None;
                        }
                        let src = ((l.two_j as i32 + 2 * ch.j) as u32, l.two_m + 2 * ch.q);
                        index.get(&src).map(|&s| (s, gamma * g))
                    })
                    .collect()
            })
            .collect();
        Self { n_spins: n, gamma, inflow }
    }

    pub fn rhs(&self, p: &[f64], dp: &mut [f64]) {
        let loss = self.gamma * self.n_spins as f64;
        for (i, d) in dp.iter_mut().enumerate() {
            let mut acc = -loss * p[i];
            for &(s, r) in &self.inflow[i] {
                acc += r * p[s];
            }
            *d = acc;
        }
    }
}

/// Integrate the population rate equations.
pub fn evolve_populations(p: &PopulationVector, gamma: f64, t: f64, tol: &Tolerance) -> Result<PopulationVector> {
    Ok(evolve_populations_grid(p, gamma, &[t], tol)?.pop().expect("one sample"))
}

pub fn evolve_populations_grid(
    p: &PopulationVector,
    gamma: f64,
    times: &[f64],
    tol: &Tolerance,
) -> Result<Vec<PopulationVector>> {
    let rates = PopulationRates::new(p.n_spins, gamma);
    let out = ode::integrate_grid(|_, y, dy| rates.rhs(y, dy), 0.0, &p.values, times, tol)?;
    Ok(out
        .into_iter()
        .map(|v| PopulationVector { values: v, ..p.clone() })
        .collect())
}

/// Closed-form populations at time `t` starting from all spins up.
pub fn analytic_populations(params: &EnsembleParams, t: f64) -> PopulationVector {
    let n = params.n_spins;
    let mut p = PopulationVector::zeros(n);
    if t <= 0.0 || params.gamma == 0.0 {
        p.values[0] = 1.0;
        return p;
    }
    let e = (-2.0 * params.gamma * t).exp();
    let ln_up = (0.5 * (1.0 + e)).ln();
    let ln_dn = (0.5 * (1.0 - e)).ln();
    let half = n as f64 / 2.0;
    for (lab, v) in p.labels.iter().zip(p.values.iter_mut()) {
        let m = lab.m();
        *v = (basis::ln_degeneracy(n, lab.two_j) + (half + m) * ln_up + (half - m) * ln_dn).exp();
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32) -> EnsembleParams {
        EnsembleParams::new(n, 1.0, 0.0).unwrap()
    }

    #[test]
    fn n2_closed_form_table() {
        let t = 0.5 * 2.0f64.ln();
        let p = analytic_populations(&params(2), t);
        let want = [(2, 2, 9.0 / 16.0), (2, 0, 3.0 / 16.0), (2, -2, 1.0 / 16.0), (0, 0, 3.0 / 16.0)];
        for (tj, tm, v) in want {
            assert!((p.get(tj, tm).unwrap() - v).abs() < 1e-14);
        }
    }

    #[test]
    fn maximally_mixed_is_stationary() {
        for n in 1..=20u32 {
            let rates = PopulationRates::new(n, 1.3);
            let p = PopulationVector::maximally_mixed(n);
            let mut dp = vec![0.0; p.values.len()];
            rates.rhs(&p.values, &mut dp);
            let r = dp.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(r < 1e-12, "N={n}: residual {r}");
        }
    }

    #[test]
    fn rate_equations_conserve_probability() {
        let n = 9;
        let rates = PopulationRates::new(n, 1.0);
        let p: Vec<f64> = (0..PopulationVector::labels_for(n).len()).map(|i| 1.0 + (i as f64).sin()).collect();
        let mut dp = vec![0.0; p.len()];
        rates.rhs(&p, &mut dp);
        assert!(dp.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn populations_match_closed_form() {
        let tol = Tolerance::tight();
        let p0 = PopulationVector::coherent_up(12);
        for t in [0.1, 0.7] {
            let ode = evolve_populations(&p0, 1.0, t, &tol).unwrap();
            let exact = analytic_populations(&params(12), t);
            assert!(ode.max_abs_diff(&exact) < 1e-9);
        }
    }

    #[test]
    fn long_time_limit_is_maximally_mixed() {
        let p = analytic_populations(&params(8), 30.0);
        assert!(p.max_abs_diff(&PopulationVector::maximally_mixed(8)) < 1e-12);
    }

    #[test]
    fn pumping_density_matches_populations() {
        let tol = Tolerance::tight();
        let rho = CollectiveDensity::coherent_up(params(6));
        let out = evolve_pumping_density(&rho, 0.4, &tol).unwrap();
        out.validate(1e-8).unwrap();
        let exact = analytic_populations(&params(6), 0.4);
        assert!(out.populations().max_abs_diff(&exact) < 1e-9);
        assert!((out.moment(SpinOp::Z, 1) - 3.0 * (-0.8f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn general_reduces_to_pumping() {
        let tol = Tolerance::tight();
        let rho = CollectiveDensity::dicke(params(5), 5, 3).unwrap();
        let a = evolve_pumping_density(&rho, 0.3, &tol).unwrap();
        let b = evolve_general(&rho, &LocalJumpSpec::optical_pumping(1.0), 0.0, 0.3, &tol).unwrap();
        let d = a.to_flat().iter().zip(b.to_flat()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(d < 1e-9);
    }

    #[test]
    fn general_preserves_trace() {
        let tol = Tolerance::tight();
        let s = LocalJumpSpec::new(
            Complex64::new(1.0, 0.5),
            Complex64::new(1.0, 1.0),
            Complex64::new(3.0, -1.0),
            Complex64::new(2.0, 0.7),
        );
        let rho = CollectiveDensity::dicke(params(6), 6, 4).unwrap();
        let out = evolve_general(&rho, &[s], 0.5, 0.2, &tol).unwrap();
        out.validate(1e-8).unwrap();
    }

    #[test]
    fn truncated_layout_mismatch_is_rejected() {
        let l = BlockLindbladian::pumping(6, 1.0, Some(1));
        let rho = CollectiveDensity::coherent_up(params(6));
        assert!(l.evolve(&rho, 0.1, &Tolerance::default()).is_err());
        let mut trunc = CollectiveDensity::zeros(params(6), Some(1));
        trunc.blocks.get_mut(&6).unwrap()[(0, 0)] = cx(1.0);
        let out = l.evolve(&trunc, 0.05, &Tolerance::default()).unwrap();
        assert!(out.trace().re <= 1.0 + 1e-10);
    }

    #[test]
    fn generator_is_complex_linear() {
        // L(i H) = i L(H) keeps roundoff anti-Hermitian parts from growing
        let specs = [LocalJumpSpec::new(cx(0.3), Complex64::new(0.2, 0.1), cx(0.7), Complex64::new(0.1, -0.4))];
        for l in [BlockLindbladian::pumping(6, 1.0, None), BlockLindbladian::general(6, &specs, 0.2, None)] {
            let h: Vec<CMat> = l
                .irreps
                .iter()
                .map(|&tj| {
                    let d = block_dim(tj);
                    let m = CMat::from_fn(d, d, |i, k| Complex64::new((i + 2 * k) as f64 * 0.1, (i as f64 - k as f64) * 0.3));
                    &m + m.adjoint()
                })
                .collect();
            let ih: Vec<CMat> = h.iter().map(|m| m * Complex64::new(0.0, 1.0)).collect();
            let mut a = h.clone();
            let mut b = h.clone();
            l.apply(&h, &mut a);
            l.apply(&ih, &mut b);
            for (x, y) in a.iter().zip(&b) {
                let gap = (x * Complex64::new(0.0, 1.0) - y).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(gap < 1e-12);
            }
        }
    }
}
