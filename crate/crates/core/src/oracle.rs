//! Brute-force master-equation integration on the full `2^N` Hilbert space.
//!
//! Used only to validate the collective-basis machinery for small `N`.
//! Basis index bit `i` set means spin `i` is down.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::{self, IrrepLabel};
use crate::density::PopulationVector;
use crate::error::{domain, Result};
use crate::jump_spec::{Axis, LocalJumpSpec};
use crate::ode::{self, Tolerance};

pub const MAX_SPINS: u32 = 12;

type C = Complex64;

fn zero() -> C {
    C::new(0.0, 0.0)
}

/// Row-major full-space density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FullDensity {
    pub n_spins: u32,
    pub dim: usize,
    pub data: Vec<C>,
}

impl FullDensity {
    pub fn from_pure(n: u32, psi: &DVector<C>) -> Result<Self> {
        check_size(n)?;
        let dim = 1usize << n;
        if psi.len() != dim {
            return domain(format!("state vector has {} entries, expected {dim}", psi.len()));
        }
        let nrm = psi.norm();
        let mut data = vec![zero(); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = psi[r] * psi[c].conj() / (nrm * nrm);
            }
        }
        Ok(Self { n_spins: n, dim, data })
    }

    pub fn to_matrix(&self) -> DMatrix<C> {
        DMatrix::from_fn(self.dim, self.dim, |r, c| self.data[r * self.dim + c])
    }

    pub fn trace(&self) -> C {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `<J_axis^k>` for `k = 0..=kmax`.
    pub fn moments(&self, axis: Axis, kmax: usize) -> Vec<f64> {
        let mut b = self.data.clone();
        let mut tmp = vec![zero(); b.len()];
        let mut out = vec![self.trace().re];
        for _ in 0..kmax {
            collective_left(self.n_spins, self.dim, axis, &b, &mut tmp);
            std::mem::swap(&mut b, &mut tmp);
            out.push((0..self.dim).map(|i| b[i * self.dim + i]).sum::<C>().re);
        }
        out
    }

    /// Populations of the collective states, summed over irrep copies.
    pub fn collective_populations(&self) -> PopulationVector {
        let n = self.n_spins;
        let mut p = PopulationVector::zeros(n);
        for k in 0..=n {
            let sector: Vec<usize> = (0..self.dim).filter(|s| s.count_ones() == k).collect();
            let j2 = total_spin_squared(n, &sector);
            let eig = nalgebra::SymmetricEigen::new(j2);
            let two_m = n as i32 - 2 * k as i32;
            for (e, v) in eig.eigenvalues.iter().zip(eig.eigenvectors.column_iter()) {
                // J(J+1) = e  =>  2J = sqrt(4e+1) - 1
                let two_j = ((4.0 * e + 1.0).max(0.0).sqrt() - 1.0).round() as u32;
                let mut w = zero();
                for (a, &sa) in sector.iter().enumerate() {
                    for (b, &sb) in sector.iter().enumerate() {
                        w += self.data[sa * self.dim + sb] * v[a] * v[b];
                    }
                }
                let lab = IrrepLabel { two_j, two_m };
                let idx = p.labels.iter().position(|l| *l == lab).expect("label in ensemble");
                p.values[idx] += w.re;
            }
        }
        p
    }
}

/// `J^2` restricted to one magnetization sector, via `S_i.S_j = P_ij/2 - 1/4`.
fn total_spin_squared(n: u32, sector: &[usize]) -> DMatrix<f64> {
    let d = sector.len();
    let pos: std::collections::HashMap<usize, usize> = sector.iter().enumerate().map(|(a, &s)| (s, a)).collect();
    let nf = n as f64;
    let mut m = DMatrix::from_diagonal_element(d, d, 0.75 * nf - nf * (nf - 1.0) / 4.0);
    for (a, &s) in sector.iter().enumerate() {
        for i in 0..n {
            for j in (i + 1)..n {
                let (bi, bj) = ((s >> i) & 1, (s >> j) & 1);
                let t = if bi == bj { s } else { s ^ (1 << i) ^ (1 << j) };
                m[(pos[&t], a)] += 1.0;
            }
        }
    }
    m
}

fn check_size(n: u32) -> Result<()> {
    if n == 0 || n > MAX_SPINS {
        return domain(format!("brute-force oracle supports 1 <= N <= {MAX_SPINS}, got N = {n}"));
    }
    Ok(())
}

/// `out = J_axis * b` for row-major `b`.
fn collective_left(n: u32, dim: usize, axis: Axis, b: &[C], out: &mut [C]) {
    out.iter_mut().for_each(|z| *z = zero());
    for r in 0..dim {
        for i in 0..n {
            let bit = 1usize << i;
            let down = r & bit != 0;
            let (src, w) = match axis {
                Axis::X => (r ^ bit, C::new(0.5, 0.0)),
                // s_y |up> = i|down>, s_y |down> = -i|up>
                Axis::Y => (r ^ bit, if down { C::new(0.0, 0.5) } else { C::new(0.0, -0.5) }),
                Axis::Z => (r, C::new(if down { -0.5 } else { 0.5 }, 0.0)),
            };
            let (ro, rs) = (r * dim, src * dim);
            for c in 0..dim {
                out[ro + c] += w * b[rs + c];
            }
        }
    }
}

/// `out = b * J_x`.
fn jx_right(n: u32, dim: usize, b: &[C], out: &mut [C]) {
    out.iter_mut().for_each(|z| *z = zero());
    for r in 0..dim {
        let ro = r * dim;
        for c in 0..dim {
            let mut acc = zero();
            for i in 0..n {
                acc += b[ro + (c ^ (1 << i))];
            }
            out[ro + c] = acc * 0.5;
        }
    }
}

/// Full-space generator: identical local channels on every spin plus
/// collective dephasing `kappa D[J_x]`.
#[derive(Debug, Clone)]
pub struct FullLindbladian {
    n: u32,
    dim: usize,
    /// Local dissipator on a 2x2 block `[x00, x01, x10, x11]`.
    local: [[C; 4]; 4],
    kappa: f64,
}

impl FullLindbladian {
    pub fn new(n: u32, specs: &[LocalJumpSpec], kappa: f64) -> Result<Self> {
        check_size(n)?;
        let mut local = [[zero(); 4]; 4];
        for s in specs {
            let m = s.matrix();
            let g = s.gram();
            for col in 0..4 {
                let (a, b) = (col / 2, col % 2);
                // image of the unit matrix E_ab
                for row in 0..4 {
                    let (r, c) = (row / 2, row % 2);
                    let mut v = m[r][a] * m[c][b].conj();
                    if c == b {
                        v -= 0.5 * g[r][a];
                    }
                    if r == a {
                        v -= 0.5 * g[b][c];
                    }
                    local[row][col] += v;
                }
            }
        }
        Ok(Self { n, dim: 1 << n, local, kappa })
    }

    pub fn apply(&self, rho: &[C], out: &mut [C], work: &mut [Vec<C>; 3]) {
        let dim = self.dim;
        out.iter_mut().for_each(|z| *z = zero());
        for i in 0..self.n {
            let bit = 1usize << i;
            for r0 in (0..dim).filter(|r| r & bit == 0) {
                let r1 = r0 | bit;
                for c0 in (0..dim).filter(|c| c & bit == 0) {
                    let c1 = c0 | bit;
                    let x = [
                        rho[r0 * dim + c0],
                        rho[r0 * dim + c1],
                        rho[r1 * dim + c0],
                        rho[r1 * dim + c1],
                    ];
                    let idx = [r0 * dim + c0, r0 * dim + c1, r1 * dim + c0, r1 * dim + c1];
                    for row in 0..4 {
                        let l = &self.local[row];
                        out[idx[row]] += l[0] * x[0] + l[1] * x[1] + l[2] * x[2] + l[3] * x[3];
                    }
                }
            }
        }
        if self.kappa > 0.0 {
            let [a, b, c] = work;
            collective_left(self.n, dim, Axis::X, rho, a); // Jx rho
            jx_right(self.n, dim, a, b); // Jx rho Jx
            for k in 0..out.len() {
                out[k] += self.kappa * b[k];
            }
            collective_left(self.n, dim, Axis::X, a, b); // Jx^2 rho
            jx_right(self.n, dim, rho, a);
            jx_right(self.n, dim, a, c); // rho Jx^2
            for k in 0..out.len() {
                out[k] -= 0.5 * self.kappa * (b[k] + c[k]);
            }
        }
    }

    pub fn evolve_grid(&self, rho: &FullDensity, times: &[f64], tol: &Tolerance) -> Result<Vec<FullDensity>> {
        if rho.n_spins != self.n {
            return domain("state and generator have different N");
        }
        let len = self.dim * self.dim;
        let mut x = vec![zero(); len];
        let mut y = vec![zero(); len];
        let mut work = [vec![zero(); len], vec![zero(); len], vec![zero(); len]];
        let rhs = |_t: f64, f: &[f64], df: &mut [f64]| {
            for k in 0..len {
                x[k] = C::new(f[2 * k], f[2 * k + 1]);
            }
            self.apply(&x, &mut y, &mut work);
            for k in 0..len {
                df[2 * k] = y[k].re;
                df[2 * k + 1] = y[k].im;
            }
        };
        let y0: Vec<f64> = rho.data.iter().flat_map(|z| [z.re, z.im]).collect();
        let out = ode::integrate_grid(rhs, 0.0, &y0, times, tol)?;
        Ok(out
            .into_iter()
            .map(|f| FullDensity {
                n_spins: self.n,
                dim: self.dim,
                data: f.chunks(2).map(|p| C::new(p[0], p[1])).collect(),
            })
            .collect())
    }
}

/// Symmetric state `sum_M c_M |N/2, M>` with amplitudes ordered `M = N/2..-N/2`.
pub fn symmetric_state(n: u32, amps: &[C]) -> Result<DVector<C>> {
    check_size(n)?;
    if amps.len() != n as usize + 1 {
        return domain(format!("expected {} amplitudes", n + 1));
    }
    let dim = 1usize << n;
    let mut psi = DVector::from_element(dim, zero());
    for s in 0..dim {
        let k = s.count_ones() as usize;
        let norm = basis::ln_binomial(n as u64, k as u64).exp().sqrt();
        psi[s] = amps[k] / norm;
    }
    Ok(psi)
}

/// Moments of `J_x`, `J_y`, `J_z` at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample {
    pub t: f64,
    /// `moments[axis][k]`, axes ordered x, y, z.
    pub moments: [Vec<f64>; 3],
}

/// Integrate the full master equation and tabulate `<J_mu^k>` for
/// `k <= kmax` (at most 6) at each time.
pub fn brute_force_oracle(
    initial: &FullDensity,
    specs: &[LocalJumpSpec],
    kappa: f64,
    times: &[f64],
    kmax: usize,
    tol: &Tolerance,
) -> Result<Vec<OracleSample>> {
    if kmax > 6 {
        return domain("oracle moments are limited to k <= 6");
    }
    let gen = FullLindbladian::new(initial.n_spins, specs, kappa)?;
    let states = gen.evolve_grid(initial, times, tol)?;
    Ok(times
        .iter()
        .zip(states)
        .map(|(&t, s)| OracleSample {
            t,
            moments: [s.moments(Axis::X, kmax), s.moments(Axis::Y, kmax), s.moments(Axis::Z, kmax)],
        })
        .collect())
}

/// Quantum Fisher information of a full-space state for generator `J_axis`.
pub fn full_space_qfi(rho: &FullDensity, axis: Axis, eps: f64) -> f64 {
    let m = rho.to_matrix();
    let eig = nalgebra::SymmetricEigen::new(m);
    let dim = rho.dim;
    // generator as a dense matrix
    let mut gen = vec![zero(); dim * dim];
    let mut id = vec![zero(); dim * dim];
    for i in 0..dim {
        id[i * dim + i] = C::new(1.0, 0.0);
    }
    collective_left(rho.n_spins, dim, axis, &id, &mut gen);
    let a = DMatrix::from_fn(dim, dim, |r, c| gen[r * dim + c]);
    let v = &eig.eigenvectors;
    let av = v.adjoint() * a * v;
    let lam = &eig.eigenvalues;
    let mut f = 0.0;
    for i in 0..dim {
        for k in 0..dim {
            let s = lam[i] + lam[k];
            if s > eps {
                let d = lam[i] - lam[k];
                f += 2.0 * d * d / s * av[(i, k)].norm_sqr();
            }
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus_state(n: u32) -> FullDensity {
        // every spin along +x
        let dim = 1usize << n;
        let amp = C::new((dim as f64).sqrt().recip(), 0.0);
        FullDensity::from_pure(n, &DVector::from_element(dim, amp)).unwrap()
    }

    #[test]
    fn single_qubit_amplitude_damping() {
        let g = 0.8;
        let times = [0.3, 1.0];
        let out = brute_force_oracle(&plus_state(1), &[LocalJumpSpec::decay(g)], 0.0, &times, 1, &Tolerance::tight())
            .unwrap();
        for s in out {
            // <sigma_x> = 2 <J_x>
            assert!((2.0 * s.moments[0][1] - (-g * s.t / 2.0).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn single_qubit_dephasing() {
        let g = 0.6;
        let out = brute_force_oracle(&plus_state(1), &[LocalJumpSpec::dephasing(g)], 0.0, &[0.5], 1, &Tolerance::tight())
            .unwrap();
        assert!((2.0 * out[0].moments[0][1] - (-2.0 * g * 0.5f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn dicke_population_aggregation() {
        let mut amps = vec![zero(); 5];
        amps[1] = C::new(1.0, 0.0);
        let rho = FullDensity::from_pure(4, &symmetric_state(4, &amps).unwrap()).unwrap();
        let p = rho.collective_populations();
        assert!((p.get(4, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!((p.total() - 1.0).abs() < 1e-12);
        let m = rho.moments(Axis::X, 2);
        // (J(J+1) - M^2)/2 with J=2, M=1
        assert!((m[2] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn symmetric_generators_commute_check() {
        let rho = plus_state(3);
        let mz = rho.moments(Axis::Z, 2);
        assert!(mz[1].abs() < 1e-12);
        assert!((mz[2] - 0.75).abs() < 1e-12);
        assert!((rho.moments(Axis::X, 1)[1] - 1.5).abs() < 1e-12);
        assert!(rho.moments(Axis::Y, 1)[1].abs() < 1e-12);
    }

    #[test]
    fn kappa_dephasing_preserves_trace() {
        let l = FullLindbladian::new(3, &[], 0.7).unwrap();
        let out = l.evolve_grid(&plus_state(3), &[0.4], &Tolerance::tight()).unwrap();
        assert!((out[0].trace().re - 1.0).abs() < 1e-10);
        // J_x commutes with the dissipator: <J_x> conserved
        assert!((out[0].moments(Axis::X, 1)[1] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn refuses_large_n() {
        assert!(FullLindbladian::new(13, &[], 0.0).is_err());
    }

    #[test]
    fn pure_state_qfi() {
        let mut amps = vec![zero(); 5];
        amps[0] = C::new(1.0, 0.0);
        let rho = FullDensity::from_pure(4, &symmetric_state(4, &amps).unwrap()).unwrap();
        assert!((full_space_qfi(&rho, Axis::X, 1e-12) - 4.0).abs() < 1e-9);
    }
}
