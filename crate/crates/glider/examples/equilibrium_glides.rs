//! Find and classify the equilibrium glides of each built-in shape.
//!
//! Every root of `h(γ) = cot γ − (C_L/C_D)(γ+θ)` on (0°, 180°) is an
//! equilibrium; when there are several, every second one is a saddle.

use glider::dynamics::PitchAngle;
use glider::equilibria;
use glider::profiles;

fn main() {
    let theta = PitchAngle::from_degrees(-5.0);
    for name in profiles::BUILTIN_NAMES {
        let profile = profiles::builtin(name).unwrap();
        let eqs = equilibria::find_equilibria(theta, &profile);
        println!("{name} at theta = {:.1} deg: {} equilibrium glide(s)", theta.degrees(), eqs.len());
        for eq in &eqs {
            println!(
                "  gamma* = {:7.3} deg  v* = {:.4}  (vx, vz) = ({:+.4}, {:+.4})  delta = {:+.3}  tau = {:+.3}  {}",
                eq.gamma_star.to_degrees(),
                eq.v_star,
                eq.state.vx,
                eq.state.vz,
                eq.delta,
                eq.tau,
                eq.kind
            );
        }
    }

    // The flat plate at zero pitch sits at the degenerate vertical-descent
    // point: one eigenvalue is exactly zero.
    let flat = profiles::flat_plate();
    let eq = &equilibria::find_equilibria(PitchAngle::from_radians(0.0), &flat)[0];
    println!(
        "\nflat plate at theta = 0: gamma* = {:.4} deg, eigenvalues {:.5} and {:.1e}",
        eq.gamma_star.to_degrees(),
        eq.eigenvalues[0].re,
        eq.eigenvalues[1].re
    );
}
