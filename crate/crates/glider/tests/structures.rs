//! Cross-module structural properties: timescale separation on the manifold,
//! forcing-rate ordering of scenario adherence, and refinement invariance of
//! the repulsion factor.

use std::sync::OnceLock;

use glider::dynamics::{self, GradientMethod, IntegrateOptions, PitchAngle, VelocityState};
use glider::manifold::{self, TraceStrategy, TvmCurve, TvmOptions, TvmSurface};
use glider::profiles::flat_plate;
use glider::repulsion;
use glider::scenarios::{self, PitchSchedule};

fn theta_ref() -> PitchAngle {
    PitchAngle::from_degrees(-5.0)
}

fn tvm_ref() -> &'static TvmCurve {
    static CURVE: OnceLock<TvmCurve> = OnceLock::new();
    CURVE.get_or_init(|| {
        manifold::trace_tvm(
            theta_ref(),
            &flat_plate(),
            (-1.5, 1.5),
            TraceStrategy::OutsideInSweep,
            &TvmOptions::default(),
        )
        .unwrap()
    })
}

fn surface_ref() -> &'static TvmSurface {
    static SURFACE: OnceLock<TvmSurface> = OnceLock::new();
    SURFACE.get_or_init(|| {
        let grid: Vec<PitchAngle> = (0..25)
            .map(|i| PitchAngle::from_degrees(-12.0 + i as f64))
            .collect();
        manifold::extended_tvm_surface(
            &flat_plate(),
            &grid,
            (-1.5, 1.5),
            TraceStrategy::OutsideInSweep,
            &TvmOptions::default(),
        )
    })
}

#[test]
fn reference_launch_converges_to_the_equilibrium_glide() {
    // The classic launch from near rest: collapse onto the manifold, then a
    // slow slide into the stable node found independently by the
    // equilibrium solver. The weak eigenvalue is about -0.43, so the
    // distance decays by roughly one decade per five time units.
    let profile = flat_plate();
    let eq = &glider::equilibria::find_equilibria(theta_ref(), &profile)[0];
    let traj = dynamics::integrate(
        VelocityState::new(0.2, 0.0),
        theta_ref(),
        &profile,
        (0.0, 25.0),
        &IntegrateOptions {
            fixed_point_accel_tol: 0.0,
            ..IntegrateOptions::default()
        },
    );
    let d15 = traj.sample(15.0).distance(eq.state);
    let d16 = traj.sample(16.0).distance(eq.state);
    let d25 = traj.sample(25.0).distance(eq.state);
    assert!(d15 < 1.5e-3, "distance at t = 15: {d15}");
    assert!(d16 < 1e-3, "distance at t = 16: {d16}");
    assert!(d25 < 1e-4, "distance at t = 25: {d25}");
    assert!(d16 < d15 && d25 < d16, "approach must be monotone");
}

#[test]
fn collapse_onto_manifold_is_faster_than_travel_along_it() {
    let profile = flat_plate();
    let curve = tvm_ref();
    let eq = &glider::equilibria::find_equilibria(theta_ref(), &profile)[0];
    let options = IntegrateOptions::default();

    for ic in [
        VelocityState::new(0.2, 0.0),
        VelocityState::new(-1.0, 0.3),
        VelocityState::new(1.2, -1.8),
    ] {
        let traj = dynamics::integrate(ic, theta_ref(), &profile, (0.0, 60.0), &options);
        let mut t_reach = None;
        let mut t_settle = None;
        let mut t = 0.0;
        while t <= traj.final_time() {
            let state = traj.sample(t);
            if t_reach.is_none() && curve.distance_to(state) < 0.05 {
                t_reach = Some(t);
            }
            if t_settle.is_none() && state.distance(eq.state) < 0.01 {
                t_settle = Some(t);
                break;
            }
            t += 0.01;
        }
        let t_reach = t_reach.expect("trajectory reaches the manifold");
        let t_settle = t_settle.expect("trajectory settles at the equilibrium");
        assert!(
            t_settle - t_reach > t_reach,
            "{ic:?}: collapse took {t_reach}, travel took {}",
            t_settle - t_reach
        );
    }
}

#[test]
fn slower_pitch_forcing_tracks_the_manifold_better() {
    let profile = flat_plate();
    let surface = surface_ref();
    let mut means = Vec::new();
    for omega in [0.25, 0.5, 1.0] {
        let schedule = PitchSchedule::Sinusoid {
            theta_mean: PitchAngle::from_degrees(0.0),
            amplitude: 10f64.to_radians(),
            omega,
            phase: 0.0,
        };
        let period = schedule.forcing_period().unwrap();
        let sim = scenarios::simulate_controlled(
            VelocityState::new(0.2, 0.0),
            schedule,
            &profile,
            (0.0, 10.0 * period),
            &scenarios::scenario_options(),
        )
        .unwrap();
        // Sample only where the momentary pitch passes (almost) exactly
        // through a surface slice, so slice quantization in θ cannot mask
        // the forcing-rate trend.
        let mut sum = 0.0;
        let mut count = 0usize;
        let t_end = sim.final_time();
        let n = 20_000;
        for i in 0..n {
            let t = 2.0 * period + (t_end - 2.0 * period) * i as f64 / (n - 1) as f64;
            let sample = sim.sample(t);
            let slice = surface.slice_nearest(sample.theta).unwrap();
            if (slice.theta.radians() - sample.theta.radians()).abs() < 0.05f64.to_radians() {
                sum += slice.distance_to(sample.state);
                count += 1;
            }
        }
        assert!(count > 100, "too few slice crossings at omega = {omega}");
        means.push((omega, sum / count as f64));
    }
    for pair in means.windows(2) {
        assert!(
            pair[0].1 <= pair[1].1 + 1e-6,
            "adherence must not improve with faster forcing: {means:?}"
        );
    }
}

#[test]
fn flutter_amplitude_sets_the_loop_size() {
    let profile = flat_plate();
    let mut diameters = Vec::new();
    for amplitude_deg in [5.0f64, 10.0, 15.0] {
        let schedule = PitchSchedule::Sinusoid {
            theta_mean: PitchAngle::from_degrees(0.0),
            amplitude: amplitude_deg.to_radians(),
            omega: 0.5,
            phase: 0.0,
        };
        let period = schedule.forcing_period().unwrap();
        let sim = scenarios::simulate_controlled(
            VelocityState::new(0.2, 0.0),
            schedule,
            &profile,
            (0.0, 12.0 * period),
            &scenarios::scenario_options(),
        )
        .unwrap();
        let cycle = scenarios::limit_cycle_check(&sim, &schedule).unwrap();
        assert!(cycle.converged);
        // Fluttering descends vertically on average for the symmetric plate.
        let mean_vx: f64 = cycle.loop_points.iter().map(|s| s.vx).sum::<f64>()
            / cycle.loop_points.len() as f64;
        assert!(mean_vx.abs() < 0.05, "loop drifts horizontally: {mean_vx}");

        let max_vx = cycle.loop_points.iter().map(|s| s.vx).fold(f64::MIN, f64::max);
        let min_vx = cycle.loop_points.iter().map(|s| s.vx).fold(f64::MAX, f64::min);
        diameters.push(max_vx - min_vx);
    }
    assert!(
        diameters[0] < diameters[1] && diameters[1] < diameters[2],
        "loop diameter must grow with amplitude: {diameters:?}"
    );
}

#[test]
fn repulsion_factor_invariant_under_tolerance_refinement() {
    let profile = flat_plate();
    let coarse = glider::OdeOptions::default();
    let fine = glider::OdeOptions {
        rel_tol: coarse.rel_tol / 10.0,
        abs_tol: coarse.abs_tol / 10.0,
        ..coarse
    };
    for state in [
        VelocityState::new(0.3, -0.4),
        VelocityState::new(-0.5, -0.8),
        VelocityState::new(0.9, -0.2),
    ] {
        let a = repulsion::repulsion_factor(
            state,
            theta_ref(),
            &profile,
            -0.35,
            GradientMethod::Variational,
            &coarse,
        )
        .unwrap();
        let b = repulsion::repulsion_factor(
            state,
            theta_ref(),
            &profile,
            -0.35,
            GradientMethod::Variational,
            &fine,
        )
        .unwrap();
        assert!(
            (a - b).abs() <= 1e-3 * (1.0 + b.abs()),
            "rho changed under refinement at {state:?}: {a} vs {b}"
        );
    }
}

#[test]
fn all_equilibria_lie_on_the_traced_curve() {
    for (name, theta_deg) in [
        ("flat-plate", -5.0),
        ("high-lift", 0.0),
        ("high-lift", -5.0),
        ("cambered", -12.0),
        ("bluff", 3.0),
    ] {
        let profile = glider::profiles::builtin(name).unwrap();
        let theta = PitchAngle::from_degrees(theta_deg);
        let curve = manifold::trace_tvm(
            theta,
            &profile,
            (-1.5, 1.5),
            TraceStrategy::OutsideInSweep,
            &TvmOptions::default(),
        )
        .unwrap();
        for eq in glider::equilibria::find_equilibria(theta, &profile) {
            if eq.state.vx.abs() > 1.5 {
                continue;
            }
            let d = curve.distance_to(eq.state);
            assert!(
                d < 1e-3,
                "{name} at {theta_deg} deg: {} equilibrium sits {d} off the curve",
                eq.kind
            );
        }
    }
}

#[test]
fn saddle_arcs_ride_the_bisection_curve() {
    // The unstable manifold of the saddle connects the two stable glides
    // along the TVM; its arcs must coincide with the independently bisected
    // curve.
    let profile = glider::profiles::high_lift();
    let theta = PitchAngle::from_degrees(0.0);
    let options = TvmOptions::default();
    let curve = manifold::trace_tvm(
        theta,
        &profile,
        (-1.5, 1.5),
        TraceStrategy::PerSliceBisection,
        &options,
    )
    .unwrap();
    let saddle = glider::equilibria::find_equilibria(theta, &profile)
        .into_iter()
        .find(|e| e.kind == glider::equilibria::EquilibriumKind::Saddle)
        .unwrap();
    let arcs = manifold::unstable_manifold_expansion(&saddle, theta, &profile, &options).unwrap();
    for arc in &arcs {
        let mut t = arc.times()[0];
        let t_end = arc.final_time();
        while t <= t_end {
            let state = arc.sample(t);
            if state.vx.abs() < 1.4 {
                let d = curve.distance_to(state);
                assert!(d < 1e-3, "arc point {state:?} sits {d} off the curve");
            }
            t += 0.25;
        }
    }
}

#[test]
fn focus_node_discriminant_matches_eigenvalues() {
    // At an equilibrium, trace = -v* C_D tau and det = 2 v*^2 C_D^2 delta,
    // so the eigenvalues are complex exactly when tau^2 < 8 delta. That
    // closed form must agree with the numerically computed Jacobian
    // spectrum at every root.
    use rand::{Rng, SeedableRng};
    let profiles = [
        flat_plate(),
        glider::profiles::high_lift(),
        glider::profiles::cambered(),
        glider::profiles::bluff(),
    ];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
    let mut checked = 0;
    for i in 0..80 {
        let theta = PitchAngle::from_degrees(rng.gen_range(-45.0..45.0));
        let profile = &profiles[i % profiles.len()];
        for eq in glider::equilibria::find_equilibria(theta, profile) {
            let discriminant = eq.tau * eq.tau - 8.0 * eq.delta;
            if discriminant.abs() < 1e-6 {
                continue; // boundary between node and focus
            }
            let has_imag = eq.eigenvalues.iter().any(|e| e.im.abs() > 1e-9);
            assert_eq!(
                discriminant < 0.0,
                has_imag,
                "{}: tau^2 - 8 delta = {discriminant} vs eigenvalues {:?}",
                profile.name(),
                eq.eigenvalues
            );
            checked += 1;
        }
    }
    assert!(checked >= 80);
}
