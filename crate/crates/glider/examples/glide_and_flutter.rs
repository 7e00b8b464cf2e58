//! Prescribed-pitch kinematics on the extended TVM: a slow pitch-up ramp
//! reproduces the accelerate / shallow / flare stages of an animal glide,
//! and slow sinusoidal pitch settles into a fluttering limit cycle.

use std::path::Path;

use glider::dynamics::PitchAngle;
use glider::dynamics::VelocityState;
use glider::export::{self, RunMeta};
use glider::manifold::{self, TraceStrategy, TvmOptions};
use glider::profiles;
use glider::scenarios::{self, PitchSchedule};

fn main() -> glider::Result<()> {
    let out = Path::new("examples-out/scenarios");
    std::fs::create_dir_all(out)?;

    // Gliding: high-lift shape, pitch ramped from a steep dive toward a
    // braking attitude.
    let high_lift = profiles::high_lift();
    let ramp = PitchSchedule::LinearRamp {
        theta_start: PitchAngle::from_degrees(-20.0),
        theta_end: PitchAngle::from_degrees(10.0),
        duration: 30.0,
    };
    let glide = scenarios::simulate_controlled(
        VelocityState::new(0.2, 0.0),
        ramp,
        &high_lift,
        (0.0, 30.0),
        &scenarios::scenario_options(),
    )?;
    for t in [0.0, 3.0, 8.0, 15.0, 22.0, 30.0] {
        let s = glide.sample(t);
        println!(
            "glide t = {t:4.1}: theta {:+6.1} deg  speed {:.3}  (vx, vz) = ({:+.3}, {:+.3})",
            s.theta.degrees(),
            s.speed(),
            s.state.vx,
            s.state.vz
        );
    }
    write_sim(out, "glide.csv", &glide, high_lift.name())?;

    // Fluttering: flat plate, sinusoidal pitch between the fast (onto the
    // manifold) and slow (along it) timescales.
    let flat = profiles::flat_plate();
    let flutter = PitchSchedule::Sinusoid {
        theta_mean: PitchAngle::from_degrees(0.0),
        amplitude: 10f64.to_radians(),
        omega: 0.5,
        phase: 0.0,
    };
    let period = flutter.forcing_period().unwrap();
    let sim = scenarios::simulate_controlled(
        VelocityState::new(0.2, 0.0),
        flutter,
        &flat,
        (0.0, 12.0 * period),
        &scenarios::scenario_options(),
    )?;
    let cycle = scenarios::limit_cycle_check(&sim, &flutter)?;
    println!(
        "\nflutter: limit cycle converged = {}, stroboscopic return distance = {:.2e}",
        cycle.converged, cycle.return_distance
    );

    let grid: Vec<PitchAngle> = (0..25).map(|i| PitchAngle::from_degrees(-12.0 + i as f64)).collect();
    let surface = manifold::extended_tvm_surface(
        &flat,
        &grid,
        (-1.5, 1.5),
        TraceStrategy::OutsideInSweep,
        &TvmOptions::default(),
    );
    let adherence = scenarios::tvm_adherence(&sim, &surface, 2000)?;
    println!(
        "flutter rides the extended TVM: post-transient max distance {:.3}, mean {:.4}",
        adherence.post_transient_max, adherence.post_transient_mean
    );
    write_sim(out, "flutter.csv", &sim, flat.name())?;
    println!("wrote {}", out.display());
    Ok(())
}

fn write_sim(
    out: &Path,
    file: &str,
    sim: &scenarios::SimulationResult,
    profile: &str,
) -> glider::Result<()> {
    let rows = sim.resample(1001);
    let dist = vec![f64::NAN; rows.len()];
    let meta = RunMeta {
        profile: profile.to_string(),
        theta_deg: f64::NAN,
        rel_tol: 1e-8,
        abs_tol: 1e-10,
        termination: format!("{:?}", sim.termination).to_lowercase(),
    };
    export::write_simulation_csv(&out.join(file), &rows, &dist, &meta)
}
