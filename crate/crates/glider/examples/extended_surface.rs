//! Stack TVM slices over a pitch range into the extended surface in
//! (vx, vz, θ) and check its left-right antisymmetry.

use std::path::Path;

use glider::dynamics::{PitchAngle, VelocityState};
use glider::export;
use glider::manifold::{self, TraceStrategy, TvmCurve, TvmOptions, TvmPoint};
use glider::profiles::flat_plate;

fn main() -> glider::Result<()> {
    let out = Path::new("examples-out/surface");
    std::fs::create_dir_all(out)?;
    let profile = flat_plate();
    let grid: Vec<PitchAngle> = (0..=36)
        .map(|i| PitchAngle::from_degrees(-45.0 + 2.5 * i as f64))
        .collect();

    let surface = manifold::extended_tvm_surface(
        &profile,
        &grid,
        (-1.5, 1.5),
        TraceStrategy::OutsideInSweep,
        &TvmOptions::default(),
    );
    export::write_surface_csv(&out.join("tvm_surface.csv"), &surface)?;
    println!("{} slices, {} gaps", surface.slices.len(), surface.gaps.len());

    // The flat plate's left-right symmetry shows up as antisymmetry of the
    // surface under (theta, vx) -> (-theta, -vx).
    let mut worst = 0.0f64;
    for slice in &surface.slices {
        let mirrored = mirror(slice);
        if let Some(partner) = surface
            .slices
            .iter()
            .find(|s| (s.theta.radians() + slice.theta.radians()).abs() < 1e-12)
        {
            worst = worst.max(manifold::hausdorff_distance(&mirrored, partner));
        }
    }
    println!("worst slice-to-mirrored-slice Hausdorff distance: {worst:.2e}");
    println!("wrote {}", out.display());
    Ok(())
}

fn mirror(curve: &TvmCurve) -> TvmCurve {
    let mut points: Vec<TvmPoint> = curve
        .points
        .iter()
        .map(|p| TvmPoint {
            state: VelocityState::new(-p.state.vx, p.state.vz),
            accel_tangential: p.accel_tangential,
        })
        .collect();
    points.reverse();
    TvmCurve {
        theta: PitchAngle::from_radians(-curve.theta.radians()),
        points,
    }
}
