use forced_chain::observables::{thermal_state, work};
use forced_chain::response::{amplitudes_via_greens, periodic_means};
use forced_chain::simulate::{run, steady_current_check, SimConfig, StepOperator};
use forced_chain::{ChainParams, ForceSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

fn driven() -> SimConfig {
    let p = ChainParams::new(8, 1.0, 1.0, 1.0, 0.5, 0.5).unwrap();
    let f = ForceSpec::single(1.5, 1.0).unwrap();
    SimConfig {
        measure_periods: 2000,
        trajectories: 4,
        seed: 11,
        ..SimConfig::new(p, f)
    }
}

#[test]
fn driven_chain_matches_closed_forms() {
    let cfg = driven();
    let s = run(&cfg).unwrap();
    let w = work(1.5, 1.0, &cfg.params).unwrap();
    let th = thermal_state(&cfg.params).unwrap();
    let boundary = th.current() - w.work_minus;
    assert!(s.work.within(w.work, 3.0), "work z = {}", s.work.z_score(w.work));
    assert!(
        s.current_left.within(boundary, 3.0),
        "left z = {}",
        s.current_left.z_score(boundary)
    );
    assert!(
        s.current_right.within(boundary, 3.0),
        "right z = {}",
        s.current_right.z_score(boundary)
    );
    for (x, (t, &expect)) in s.temperatures.iter().zip(&th.temperatures).enumerate() {
        assert!(t.within(expect, 3.0), "T[{x}] z = {}", t.z_score(expect));
    }
    // discriminating: the work is many error bars away from zero
    assert!(s.work.mean > 20.0 * s.work.stderr);
}

#[test]
fn phase_locked_means_follow_the_response() {
    let cfg = driven();
    let s = run(&cfg).unwrap();
    let amps = amplitudes_via_greens(1.5, 1.0, &cfg.params).unwrap();
    let dt = cfg.dt();
    let mut zs = Vec::new();
    for (k, (row, se)) in s.mean_q.iter().zip(&s.mean_q_stderr).enumerate() {
        let (q, _) = periodic_means(&amps, k as f64 * dt);
        for x in 0..q.len() {
            zs.push(((row[x] - q[x]) / se[x]).abs());
        }
    }
    // pointwise 3σ; a handful of the 288 comparisons may exceed it by chance
    let outside = zs.iter().filter(|&&z| z > 3.0).count();
    let worst = zs.iter().cloned().fold(0.0, f64::max);
    assert!(outside <= 4 && worst < 4.5, "{outside} beyond 3σ, worst {worst}");
}

#[test]
fn equilibrium_profile_is_flat() {
    let p = ChainParams::new(8, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let f = ForceSpec::single(1.5, 0.0).unwrap();
    let cfg = SimConfig {
        measure_periods: 2000,
        trajectories: 4,
        seed: 5,
        ..SimConfig::new(p, f)
    };
    let s = run(&cfg).unwrap();
    for (x, t) in s.temperatures.iter().enumerate() {
        assert!(t.within(1.0, 3.0), "T[{x}] z = {}", t.z_score(1.0));
    }
}

#[test]
fn unpinned_current_is_a_fifth() {
    let p = ChainParams::new(8, 0.0, 1.0, 1.0, 1.5, 0.5).unwrap();
    let f = ForceSpec::single(1.5, 0.0).unwrap();
    let cfg = SimConfig {
        measure_periods: 2000,
        trajectories: 4,
        seed: 3,
        ..SimConfig::new(p, f)
    };
    let c = steady_current_check(&cfg).unwrap();
    assert!((c.expected - 0.2).abs() < 1e-10);
    assert!((c.expected_closed.unwrap() - 0.2).abs() < 1e-12);
    assert!(c.passes(3.0), "{c:?}");
}

#[test]
fn pinned_currents_agree_along_the_chain() {
    let p = ChainParams::new(8, 1.0, 1.0, 1.0, 1.5, 0.5).unwrap();
    let f = ForceSpec::single(1.5, 0.0).unwrap();
    let cfg = SimConfig {
        measure_periods: 2000,
        trajectories: 4,
        seed: 8,
        ..SimConfig::new(p, f)
    };
    let c = steady_current_check(&cfg).unwrap();
    assert!(c.passes(3.0), "{c:?}");
}

#[test]
fn long_run_reaches_the_stationary_covariance() {
    // 2000 independent copies of the n = 4 chain after 10⁴ exact steps
    let p = ChainParams::new(4, 1.0, 1.0, 0.5, 2.0, 1.0).unwrap();
    let f = ForceSpec::single(1.3, 0.0).unwrap();
    let op = StepOperator::new(&p, &f, 32).unwrap();
    let sigma = thermal_state(&p).unwrap().covariance;
    let d = op.dim;
    let copies = 2000;
    let finals: Vec<Vec<f64>> = (0..copies)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            rng.set_stream(c as u64);
            let mut x = vec![0.0; d];
            let mut y = vec![0.0; d];
            let mut xi = vec![0.0; op.rank()];
            for k in 0..10_000 {
                for v in xi.iter_mut() {
                    *v = StandardNormal.sample(&mut rng);
                }
                op.step(&x, k % 32, &xi, &mut y);
                std::mem::swap(&mut x, &mut y);
            }
            x
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut outside = 0;
    for i in 0..d {
        for j in 0..d {
            let prods: Vec<f64> = finals.iter().map(|x| x[i] * x[j]).collect();
            let m = prods.iter().sum::<f64>() / copies as f64;
            let v = prods.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (copies - 1) as f64;
            let z = ((m - sigma[(i, j)]) / (v / copies as f64).sqrt()).abs();
            worst = worst.max(z);
            if z > 3.0 {
                outside += 1;
            }
        }
    }
    // 100 correlated entries: allow the occasional 3σ excursion, never a gross one
    assert!(outside <= 2 && worst < 4.0, "{outside} beyond 3σ, worst {worst}");
}
