//! The vertical-acceleration nullcline approximates the TVM but is not the
//! same curve: vertical acceleration on the manifold is small yet nonzero,
//! and trajectories cross the nullcline while they can never cross the TVM.

use std::f64::consts::PI;
use std::path::Path;

use glider::dynamics::{self, IntegrateOptions, PitchAngle, VelocityState};
use glider::export;
use glider::manifold::{self, TraceStrategy, TvmOptions};
use glider::profiles::flat_plate;

fn main() -> glider::Result<()> {
    let out = Path::new("examples-out/nullcline");
    std::fs::create_dir_all(out)?;
    let profile = flat_plate();
    let theta = PitchAngle::from_degrees(-5.0);

    let nullcline = manifold::vz_nullcline(theta, &profile, (1e-3, PI - 1e-3), 720)?;
    export::write_nullcline_csv(&out.join("nullcline.csv"), &nullcline)?;
    let singular: Vec<String> = nullcline
        .singular_angles
        .iter()
        .map(|g| format!("{:.2} deg", g.to_degrees()))
        .collect();
    println!("nullcline singular angles: {}", singular.join(", "));

    let tvm = manifold::trace_tvm(theta, &profile, (-1.5, 1.5), TraceStrategy::OutsideInSweep, &TvmOptions::default())?;
    export::write_tvm_csv(&out.join("tvm.csv"), &tvm)?;

    let max_az = tvm
        .states()
        .map(|s| dynamics::acceleration(s, theta, &profile).1.abs())
        .fold(0.0, f64::max);
    println!("max |vdot_z| along the TVM: {max_az:.4} (zero would mean the curves coincide)");

    // A trajectory crossing the nullcline: the sign of vdot_z flips.
    let traj = dynamics::integrate(
        VelocityState::new(0.2, 0.0),
        theta,
        &profile,
        (0.0, 10.0),
        &IntegrateOptions::default(),
    );
    let mut flips = 0;
    let mut prev = f64::NAN;
    let mut t = 0.0;
    while t <= traj.final_time() {
        let az = dynamics::acceleration(traj.sample(t), theta, &profile).1;
        if prev.is_finite() && prev.signum() != az.signum() {
            flips += 1;
        }
        prev = az;
        t += 0.05;
    }
    println!("launch (0.2, 0) crosses the nullcline {flips} time(s) on its way to equilibrium");
    println!("wrote {}", out.display());
    Ok(())
}
