//! Convert nondimensional results back to dimensional units through the
//! universal glide scaling parameter epsilon = rho c S / (2 m).

use glider::dynamics::{self, DimensionalParams, PitchAngle};
use glider::equilibria;
use glider::profiles::flat_plate;

fn main() -> glider::Result<()> {
    // A small plate falling in air.
    let params = DimensionalParams {
        m: 0.005,   // kg
        g: 9.81,    // m/s^2
        rho: 1.225, // kg/m^3
        c: 0.1,     // m
        s: 0.2,     // m
    };
    let scaling = dynamics::epsilon_from_dimensional(&params)?;
    println!("epsilon        = {:.4}", scaling.epsilon);
    println!("velocity scale = {:.4} m/s", scaling.velocity_scale);
    println!("time scale     = {:.4} s", scaling.time_scale);

    let profile = flat_plate();
    let eq = &equilibria::find_equilibria(PitchAngle::from_degrees(-5.0), &profile)[0];
    println!(
        "\nequilibrium glide at theta = -5 deg: v* = {:.4} nondimensional = {:.3} m/s",
        eq.v_star,
        eq.v_star * scaling.velocity_scale
    );
    println!(
        "sink rate {:.3} m/s, forward speed {:.3} m/s",
        -eq.state.vz * scaling.velocity_scale,
        eq.state.vx * scaling.velocity_scale
    );

    // The 1D sanity check: terminal velocity of pure vertical descent.
    let v_t = dynamics::terminal_velocity_1d(2.4)?;
    println!(
        "\n1D terminal velocity at C_D = 2.4: {:.4} nondimensional = {:.3} m/s",
        v_t,
        v_t * scaling.velocity_scale
    );
    Ok(())
}
