use num_complex::Complex64 as C;
use spin_ensemble::basis::EnsembleParams;
use spin_ensemble::density::CollectiveDensity;
use spin_ensemble::engine::BlockLindbladian;
use spin_ensemble::jump_spec::{Axis, LocalJumpSpec};
use spin_ensemble::ode::Tolerance;
use spin_ensemble::oracle::{brute_force_oracle, symmetric_state, FullDensity};

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn max_moment_gap(n: u32, amps: &[C], specs: &[LocalJumpSpec], kappa: f64, times: &[f64]) -> f64 {
    let tol = Tolerance::tight();
    let params = EnsembleParams::new(n, 1.0, kappa).unwrap();
    let rho = CollectiveDensity::pure(params, n, amps).unwrap();
    let gen = BlockLindbladian::general(n, specs, kappa, None);
    let ours = gen.evolve_grid(&rho, times, &tol).unwrap();
    let full = FullDensity::from_pure(n, &symmetric_state(n, amps).unwrap()).unwrap();
    let theirs = brute_force_oracle(&full, specs, kappa, times, 4, &tol).unwrap();
    let mut gap = 0.0f64;
    for (a, b) in ours.iter().zip(&theirs) {
        for (ax_i, ax) in Axis::all().iter().enumerate() {
            for k in 1..=4 {
                gap = gap.max((a.moment(ax.spin_op(), k) - b.moments[ax_i][k]).abs());
            }
        }
    }
    gap
}

fn random_amps(n: u32, seed: u64) -> Vec<C> {
    // small deterministic LCG; only needs to be generic, not random-quality
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    (0..=n).map(|_| c(next(), next())).collect()
}

#[test]
fn general_spec_matches_oracle_n3_n4() {
    let spec = LocalJumpSpec::new(c(1.0, 0.5), c(1.0, 1.0), c(3.0, -1.0), c(2.0, 0.7));
    for n in [3u32, 4] {
        let gap = max_moment_gap(n, &random_amps(n, 7), &[spec], 0.0, &[0.05, 0.2]);
        assert!(gap < 1e-6, "N={n}: gap {gap}");
    }
}

#[test]
fn pumping_with_collective_dephasing_matches_oracle() {
    let gap = max_moment_gap(4, &random_amps(4, 3), &LocalJumpSpec::optical_pumping(0.7), 0.4, &[0.3, 1.0]);
    assert!(gap < 1e-6, "gap {gap}");
}

#[test]
fn mean_spin_equations_match_oracle() {
    use spin_ensemble::moments::solve_mean_spin;
    let tol = Tolerance::tight();
    let specs = [
        LocalJumpSpec::new(c(1.0, 0.5), c(1.0, 1.0), c(3.0, -1.0), c(2.0, 0.7)),
        LocalJumpSpec::new(c(-0.3, 0.2), c(0.4, -0.9), c(0.1, 0.6), c(-0.5, 0.25)),
    ];
    let n = 5;
    let amps = random_amps(n, 11);
    let full = FullDensity::from_pure(n, &symmetric_state(n, &amps).unwrap()).unwrap();
    let times = [0.1, 0.4, 1.0];
    for spec_set in [&specs[..1], &specs[1..], &specs[..]] {
        let oracle = brute_force_oracle(&full, spec_set, 0.0, &times, 1, &tol).unwrap();
        let m0 = [full.moments(Axis::X, 1)[1], full.moments(Axis::Y, 1)[1], full.moments(Axis::Z, 1)[1]];
        let ours = solve_mean_spin(spec_set, n, m0, &times, &tol).unwrap();
        for (o, m) in oracle.iter().zip(&ours) {
            for a in 0..3 {
                assert!((o.moments[a][1] - m[a]).abs() < 1e-7, "axis {a}: {} vs {}", o.moments[a][1], m[a]);
            }
        }
    }
}

#[test]
fn exact_pumping_hierarchy_matches_oracle() {
    use spin_ensemble::moments::{evolve_pumping_moments_exact, MomentVector};
    let tol = Tolerance::tight();
    let n = 6;
    let mut amps = vec![c(0.0, 0.0); 7];
    amps[2] = c(1.0, 0.0);
    let full = FullDensity::from_pure(n, &symmetric_state(n, &amps).unwrap()).unwrap();
    let times = [0.2, 0.6, 1.0];
    let oracle = brute_force_oracle(&full, &LocalJumpSpec::optical_pumping(1.0), 0.0, &times, 4, &tol).unwrap();
    for (ai, ax) in [Axis::X, Axis::Y].into_iter().enumerate() {
        let init = MomentVector::new(ax, full.moments(ax, 4)).unwrap();
        let ours = evolve_pumping_moments_exact(n, 1.0, &init, &times, &tol).unwrap();
        for (o, m) in oracle.iter().zip(&ours) {
            for k in 1..=4 {
                assert!((o.moments[ai][k] - m.values[k]).abs() < 1e-8);
            }
        }
    }
}
