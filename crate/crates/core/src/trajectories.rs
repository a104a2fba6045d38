//! Monte-Carlo wave-function trajectories in the collective basis.
//!
//! Each trajectory is a pure state inside one irrep; jumps with `j = ±1`
//! move it to a neighbouring irrep. Trajectory `i` draws from its own ChaCha
//! stream derived from the master seed, and estimates are reduced in a fixed
//! pairwise order, so results do not depend on the number of worker threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{self, block_dim, JumpChannelIndex, SpinOp};
use crate::engine::BlockLindbladian;
use crate::error::{domain, Error, Result};
use crate::jump_spec::{Axis, LocalJumpSpec};

type C = Complex64;

/// Pure state of a single irrep, amplitudes ordered `M = J..-J`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureCollectiveState {
    pub two_j: u32,
    pub amps: Vec<C>,
}

impl PureCollectiveState {
    pub fn new(two_j: u32, amps: Vec<C>) -> Result<Self> {
        if amps.len() != block_dim(two_j) {
            return domain(format!("irrep 2J={two_j} needs {} amplitudes", block_dim(two_j)));
        }
        let mut s = Self { two_j, amps };
        if s.normalize() < 1e-300 {
            return domain("zero state vector");
        }
        Ok(s)
    }

    pub fn dicke(two_j: u32, two_m: i32) -> Result<Self> {
        let lab = basis::IrrepLabel::new(two_j, two_m)?;
        let mut amps = vec![C::new(0.0, 0.0); block_dim(two_j)];
        amps[lab.index()] = C::new(1.0, 0.0);
        Self::new(two_j, amps)
    }

    fn normalize(&mut self) -> f64 {
        let n = norm_sqr(&self.amps).sqrt();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        n
    }

    /// `<psi|J_axis^k|psi>` for a normalized state.
    pub fn moment(&self, axis: Axis, k: usize) -> f64 {
        let half = k / 2;
        let a = self.power(axis.spin_op(), half);
        if k % 2 == 0 {
            norm_sqr(&a)
        } else {
            let b = self.power_from(axis.spin_op(), &a, 1);
            a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum::<C>().re
        }
    }

    fn power(&self, op: SpinOp, k: usize) -> Vec<C> {
        self.power_from(op, &self.amps, k)
    }

    fn power_from(&self, op: SpinOp, v: &[C], k: usize) -> Vec<C> {
        let mut cur = v.to_vec();
        let mut tmp = vec![C::new(0.0, 0.0); cur.len()];
        for _ in 0..k {
            basis::apply_spin(op, self.two_j, &cur, &mut tmp);
            std::mem::swap(&mut cur, &mut tmp);
        }
        cur
    }
}

fn norm_sqr(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Sampling settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub n_traj: usize,
    pub dt: f64,
    pub master_seed: u64,
    /// Strictly increasing sample times, each rounded to the step grid.
    pub t_grid: Vec<f64>,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return domain("need at least one trajectory");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return domain(format!("time step must be positive, got {}", self.dt));
        }
        if self.t_grid.windows(2).any(|w| w[1] <= w[0]) || self.t_grid.first().is_some_and(|&t| t < 0.0) {
            return domain("sample times must be nonnegative and strictly increasing");
        }
        Ok(())
    }

    /// Step that keeps the per-step jump probability at `p_target` for a
    /// total jump rate `rate`.
    pub fn dt_for(rate: f64, p_target: f64) -> f64 {
        if rate > 0.0 {
            p_target / rate
        } else {
            1e-2
        }
    }
}

/// A requested observable `<J_axis^k>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MomentRequest {
    pub axis: Axis,
    pub k: usize,
}

impl MomentRequest {
    pub fn name(&self) -> String {
        format!("J{}^{}", self.axis.name(), self.k)
    }
}

/// Trajectory-averaged estimates: `mean[t][m]` and `stderr[t][m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEstimates {
    pub times: Vec<f64>,
    pub requests: Vec<MomentRequest>,
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    pub n_traj: usize,
}

impl TrajectoryEstimates {
    /// CSV with columns `t,moment_name,estimate,stderr,n_traj`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "moment_name", "estimate", "stderr", "n_traj"])?;
        for (ti, t) in self.times.iter().enumerate() {
            for (mi, r) in self.requests.iter().enumerate() {
                wr.write_record([
                    format!("{t}"),
                    r.name(),
                    format!("{:e}", self.mean[ti][mi]),
                    format!("{:e}", self.stderr[ti][mi]),
                    self.n_traj.to_string(),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct SparseJump {
    target: u32,
    entries: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone)]
struct DenseJump {
    target: u32,
    op: DMatrix<C>,
}

/// Jump operators and no-jump drift for the unravelling.
#[derive(Debug, Clone)]
pub struct TrajectoryModel(ModelKind);

#[derive(Debug, Clone)]
enum ModelKind {
    /// Optical pumping: `sum L^† L = N`, so the no-jump evolution only
    /// rescales the norm and jump times are geometric.
    Pumping { n_spins: u32, gamma: f64, jumps: Vec<Vec<SparseJump>> },
    /// Generic local channels: Euler drift with the non-Hermitian operator.
    General { n_spins: u32, irreps: Vec<u32>, drift: Vec<DMatrix<C>>, jumps: Vec<Vec<DenseJump>> },
}

impl TrajectoryModel {
    pub fn pumping(n_spins: u32, gamma: f64) -> Self {
        let jumps = basis::irreps(n_spins)
            .into_iter()
            .map(|tj| {
                JumpChannelIndex::pumping()
                    .iter()
                    .filter_map(|&ch| {
                        let b = basis::jump_operator_block(n_spins, tj, ch);
                        (b.rows > 0 && !b.is_zero()).then(|| SparseJump {
                            target: (tj as i32 + 2 * ch.j) as u32,
                            entries: b.entries.iter().map(|&(r, c, v)| (r, c, v * gamma.sqrt())).collect(),
                        })
                    })
                    .collect()
            })
            .collect();
        Self(ModelKind::Pumping { n_spins, gamma, jumps })
    }

    pub fn general(n_spins: u32, specs: &[LocalJumpSpec], kappa: f64) -> Self {
        let l = BlockLindbladian::general(n_spins, specs, kappa, None);
        let mut jumps: Vec<Vec<DenseJump>> = vec![Vec::new(); l.irreps.len()];
        for j in &l.jumps {
            jumps[j.from].push(DenseJump { target: l.irreps[j.to], op: j.op.clone() });
        }
        Self(ModelKind::General { n_spins, irreps: l.irreps.clone(), drift: l.drift.clone(), jumps })
    }

    fn n_spins(&self) -> u32 {
        match &self.0 {
            ModelKind::Pumping { n_spins, .. } | ModelKind::General { n_spins, .. } => *n_spins,
        }
    }

    fn block_index(&self, two_j: u32) -> usize {
        ((self.n_spins() - two_j) / 2) as usize
    }
}

/// Run `cfg.n_traj` trajectories and estimate the requested moments.
pub fn run_trajectories(
    initial: &PureCollectiveState,
    model: &TrajectoryModel,
    requests: &[MomentRequest],
    cfg: &TrajectoryConfig,
) -> Result<TrajectoryEstimates> {
    cfg.validate()?;
    if !basis::irrep_exists(model.n_spins(), initial.two_j) {
        return domain(format!("initial irrep 2J={} not present for N={}", initial.two_j, model.n_spins()));
    }
    let per_traj: Vec<Result<Vec<f64>>> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
            rng.set_stream(i as u64);
            single_trajectory(initial, model, requests, cfg, &mut rng)
        })
        .collect();
    let samples: Vec<Vec<f64>> = per_traj.into_iter().collect::<Result<_>>()?;

    let n_t = cfg.t_grid.len();
    let n_m = requests.len();
    let nt = cfg.n_traj as f64;
    let mut mean = vec![vec![0.0; n_m]; n_t];
    let mut stderr = vec![vec![0.0; n_m]; n_t];
    let mut column = vec![0.0; cfg.n_traj];
    for ti in 0..n_t {
        for mi in 0..n_m {
            for (c, s) in column.iter_mut().zip(&samples) {
                *c = s[ti * n_m + mi];
            }
            let mu = pairwise_sum(&column) / nt;
            mean[ti][mi] = mu;
            if cfg.n_traj > 1 {
                for c in column.iter_mut() {
                    *c = (*c - mu) * (*c - mu);
                }
                let var = pairwise_sum(&column) / (nt - 1.0);
                stderr[ti][mi] = (var / nt).sqrt();
            }
        }
    }
    Ok(TrajectoryEstimates { times: cfg.t_grid.clone(), requests: requests.to_vec(), mean, stderr, n_traj: cfg.n_traj })
}

/// Summation in a fixed binary-tree order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2..=8 => v.iter().sum(),
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn record(state: &PureCollectiveState, requests: &[MomentRequest], out: &mut Vec<f64>) {
    for r in requests {
        out.push(state.moment(r.axis, r.k));
    }
}

fn sample_steps(cfg: &TrajectoryConfig) -> Vec<u64> {
    cfg.t_grid.iter().map(|t| (t / cfg.dt).round() as u64).collect()
}

fn single_trajectory(
    initial: &PureCollectiveState,
    model: &TrajectoryModel,
    requests: &[MomentRequest],
    cfg: &TrajectoryConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let mut state = initial.clone();
    let steps = sample_steps(cfg);
    let mut out = Vec::with_capacity(steps.len() * requests.len());
    match &model.0 {
        ModelKind::Pumping { n_spins, gamma, jumps } => {
            let p = gamma * *n_spins as f64 * cfg.dt;
            check_p(p)?;
            let mut step: u64 = 0;
            for &target in &steps {
                loop {
                    if p <= 0.0 {
                        break;
                    }
                    // steps until the next jump, geometric on {1, 2, ...}
                    let u: f64 = 1.0 - rng.random::<f64>();
                    let wait = (u.ln() / (-p).ln_1p()).ceil().max(1.0) as u64;
                    if step + wait > target {
                        // memorylessness: redraw from the sample point
                        break;
                    }
                    step += wait;
                    let blk = &jumps[model.block_index(state.two_j)];
                    pumping_jump(&mut state, blk, rng);
                }
                step = step.max(target);
                record(&state, requests, &mut out);
            }
        }
        ModelKind::General { irreps, drift, jumps, .. } => {
            let mut step: u64 = 0;
            let mut buf = Vec::new();
            for &target in &steps {
                while step < target {
                    let k = irreps.iter().position(|&t| t == state.two_j).expect("irrep kept");
                    general_step(&mut state, &drift[k], &jumps[k], cfg.dt, rng, &mut buf)?;
                    step += 1;
                }
                record(&state, requests, &mut out);
            }
        }
    }
    Ok(out)
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.1 {
        return Err(Error::Domain(format!(
            "time step too large: jump probability per step is {p:.3} (> 0.1); reduce dt"
        )));
    }
    Ok(())
}

fn pumping_jump(state: &mut PureCollectiveState, blk: &[SparseJump], rng: &mut ChaCha8Rng) {
    let mut weights = Vec::with_capacity(blk.len());
    let mut total = 0.0;
    for j in blk {
        let mut acc = vec![C::new(0.0, 0.0); block_dim(j.target)];
        for &(r, c, v) in &j.entries {
            acc[r] += state.amps[c] * v;
        }
        let w = norm_sqr(&acc);
        total += w;
        weights.push((w, acc, j.target));
    }
    let u = rng.random::<f64>() * total;
    let mut cum = 0.0;
    let last = weights.len() - 1;
    for (idx, (w, acc, target)) in weights.into_iter().enumerate() {
        cum += w;
        if u < cum || idx == last {
            state.two_j = target;
            state.amps = acc;
            state.normalize();
            return;
        }
    }
}

fn general_step(
    state: &mut PureCollectiveState,
    drift: &DMatrix<C>,
    jumps: &[DenseJump],
    dt: f64,
    rng: &mut ChaCha8Rng,
    buf: &mut Vec<(f64, Vec<C>, u32)>,
) -> Result<()> {
    let psi = nalgebra::DVector::from_column_slice(&state.amps);
    buf.clear();
    let mut total = 0.0;
    for j in jumps {
        let v = &j.op * &psi;
        let w = v.norm_squared();
        total += w;
        buf.push((w, v.as_slice().to_vec(), j.target));
    }
    let p = dt * total;
    check_p(p)?;
    let u: f64 = rng.random();
    if u < p {
        let mut cum = 0.0;
        let x = u / dt;
        let last = buf.len() - 1;
        for (idx, (w, v, target)) in buf.drain(..).enumerate() {
            cum += w;
            if x < cum || idx == last {
                state.two_j = target;
                state.amps = v;
                state.normalize();
                break;
            }
        }
    } else {
        let next = &psi + (drift * &psi) * C::new(dt, 0.0);
        state.amps = next.as_slice().to_vec();
        state.normalize();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_traj: usize, dt: f64, seed: u64, t: &[f64]) -> TrajectoryConfig {
        TrajectoryConfig { n_traj, dt, master_seed: seed, t_grid: t.to_vec() }
    }

    #[test]
    fn zero_rate_is_frozen() {
        let psi = PureCollectiveState::dicke(6, 4).unwrap();
        let req = [MomentRequest { axis: Axis::X, k: 2 }, MomentRequest { axis: Axis::Z, k: 1 }];
        let est = run_trajectories(&psi, &TrajectoryModel::pumping(6, 0.0), &req, &cfg(10, 1e-3, 1, &[0.0, 0.5])).unwrap();
        for ti in 0..2 {
            assert!((est.mean[ti][0] - psi.moment(Axis::X, 2)).abs() < 1e-12);
            assert!((est.mean[ti][1] - 2.0).abs() < 1e-12);
            assert_eq!(est.stderr[ti][0], 0.0);
        }
    }

    #[test]
    fn pure_state_moments() {
        let psi = PureCollectiveState::dicke(8, 6).unwrap();
        // J=4, M=3: <Jx^2> = (20 - 9)/2
        assert!((psi.moment(Axis::X, 2) - 5.5).abs() < 1e-12);
        assert!((psi.moment(Axis::Z, 3) - 27.0).abs() < 1e-12);
        assert!(psi.moment(Axis::Y, 1).abs() < 1e-12);
    }

    #[test]
    fn mean_jz_decays() {
        let n = 8;
        let psi = PureCollectiveState::dicke(n, n as i32).unwrap();
        let times = [0.25, 0.5, 1.0];
        let est = run_trajectories(
            &psi,
            &TrajectoryModel::pumping(n, 1.0),
            &[MomentRequest { axis: Axis::Z, k: 1 }],
            &cfg(3000, 1e-3, 42, &times),
        )
        .unwrap();
        for (ti, t) in times.iter().enumerate() {
            let want = 4.0 * (-2.0 * t).exp();
            assert!((est.mean[ti][0] - want).abs() < 3.0 * est.stderr[ti][0], "t={t}");
        }
    }

    #[test]
    fn dt_too_large_is_rejected() {
        let psi = PureCollectiveState::dicke(10, 10).unwrap();
        let r = run_trajectories(&psi, &TrajectoryModel::pumping(10, 1.0), &[], &cfg(1, 0.05, 0, &[1.0]));
        assert!(r.is_err());
    }

    #[test]
    fn seed_determinism_across_pools() {
        let psi = PureCollectiveState::dicke(6, 6).unwrap();
        let model = TrajectoryModel::general(6, &LocalJumpSpec::optical_pumping(1.0), 0.2);
        let req = [MomentRequest { axis: Axis::X, k: 2 }];
        let c = cfg(64, 2e-3, 9, &[0.2, 0.4]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_trajectories(&psi, &model, &req, &c).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a, b);
        let other = run_trajectories(&psi, &model, &req, &cfg(64, 2e-3, 10, &[0.2, 0.4])).unwrap();
        assert_ne!(a.mean, other.mean);
    }

    #[test]
    fn pairwise_sum_exact_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }
}
