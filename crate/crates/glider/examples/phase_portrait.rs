//! Acceleration field and sample trajectories in velocity space, written as
//! plot-ready CSV. Every trajectory collapses onto the terminal velocity
//! manifold and then creeps toward the equilibrium glide.

use std::path::Path;

use glider::dynamics::{self, IntegrateOptions, PitchAngle, VelocityState};
use glider::export::{self, RunMeta};
use glider::profiles::flat_plate;

fn main() -> glider::Result<()> {
    let out = Path::new("examples-out/phase_portrait");
    std::fs::create_dir_all(out)?;
    let profile = flat_plate();
    let theta = PitchAngle::from_degrees(-5.0);

    let mut rows = Vec::new();
    for i in 0..41 {
        for j in 0..41 {
            let vx = -1.5 + 3.0 * i as f64 / 40.0;
            let vz = -2.0 + 2.5 * j as f64 / 40.0;
            let (ax, az) = dynamics::acceleration(VelocityState::new(vx, vz), theta, &profile);
            rows.push((vx, vz, ax, az));
        }
    }
    export::write_vector_field_csv(&out.join("vector_field.csv"), &rows)?;

    let options = IntegrateOptions::default();
    let launches = [
        VelocityState::new(0.2, 0.0),
        VelocityState::new(-1.2, 0.3),
        VelocityState::new(1.4, -1.9),
        VelocityState::new(-0.4, -1.8),
        VelocityState::new(0.9, 0.4),
    ];
    for (k, ic) in launches.iter().enumerate() {
        let trajectory =
            dynamics::integrate_with_position(*ic, (0.0, 0.0), theta, &profile, (0.0, 15.0), &options);
        let meta = RunMeta {
            profile: profile.name().to_string(),
            theta_deg: theta.degrees(),
            rel_tol: options.ode.rel_tol,
            abs_tol: options.ode.abs_tol,
            termination: format!("{:?}", trajectory.termination).to_lowercase(),
        };
        export::write_trajectory_csv(&out.join(format!("trajectory_{k}.csv")), &trajectory, &meta)?;
        let end = trajectory.rows().last().unwrap();
        println!(
            "launch ({:+.2}, {:+.2}) -> ({:+.4}, {:+.4}) after t = {:.1}  [{:?}]",
            ic.vx,
            ic.vz,
            end[2],
            end[3],
            trajectory.times().last().unwrap(),
            trajectory.termination
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
