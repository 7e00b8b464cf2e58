//! Build coefficient profiles from tabulated measurements.
//!
//! Tables may cover only part of the circle; declared shape symmetries
//! extend them, and anything still unreachable falls back to clamped
//! end values with a warning flag on the profile.

use glider::profiles::{self, AngleOfAttack, SymmetryClass};

fn main() -> glider::Result<()> {
    // A snake-like partial table: measured only from -10 to 60 degrees.
    let rows: Vec<(f64, f64, f64)> = (0..=14)
        .map(|i| {
            let deg = -10.0 + 5.0 * i as f64;
            let a = deg.to_radians();
            (deg, 1.2 * (2.0 * a).sin(), 1.4 - (2.0 * a).cos())
        })
        .collect();
    let partial = profiles::load_table(
        &rows,
        SymmetryClass {
            left_right: true,
            ..SymmetryClass::none()
        },
        Some((-10.0, 60.0)),
    )?;
    println!(
        "partial table: measured range {:?} deg, clamped extension in use: {}",
        partial
            .measured_range()
            .map(|(lo, hi)| (lo.to_degrees(), hi.to_degrees())),
        partial.uses_clamped_extension()
    );

    // 150 deg is unmeasured but reachable by the left-right fold.
    let fold = partial.extend_by_symmetry(150f64.to_radians())?;
    println!(
        "150 deg folds to {:.1} deg with lift sign {:+}",
        fold.alpha.to_degrees(),
        fold.lift_sign
    );
    let (cl, cd) = partial.evaluate(AngleOfAttack::from_degrees(150.0));
    println!("C_L(150 deg) = {cl:+.4}, C_D(150 deg) = {cd:.4}");

    // 260 deg is beyond every fold: evaluation clamps, the explicit fold
    // query reports the gap.
    match partial.extend_by_symmetry(260f64.to_radians()) {
        Err(err) => println!("fold query at 260 deg: {err}"),
        Ok(_) => unreachable!(),
    }
    let (cl, cd) = partial.evaluate(AngleOfAttack::from_degrees(260.0));
    println!("clamped evaluation at 260 deg: C_L = {cl:+.4}, C_D = {cd:.4}");

    // Full-circle tables never clamp; compare against the analytic model.
    let dense = profiles::tabulate(
        "plate-2deg",
        |a| (1.2 * (2.0 * a).sin(), 1.4 - (2.0 * a).cos()),
        0.0,
        180.0,
        2.0,
        SymmetryClass::all(),
    )?;
    let analytic = profiles::flat_plate();
    let mut worst = 0.0f64;
    let mut alpha = 0.0;
    while alpha < std::f64::consts::TAU {
        let (cl_t, cd_t) = dense.evaluate(alpha.into());
        let (cl_a, cd_a) = analytic.evaluate(alpha.into());
        worst = worst.max((cl_t - cl_a).abs()).max((cd_t - cd_a).abs());
        alpha += 0.003;
    }
    println!("2-degree table vs analytic flat plate: max coefficient error {worst:.2e}");
    Ok(())
}
