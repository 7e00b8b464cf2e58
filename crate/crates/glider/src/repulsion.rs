//! Trajectory-normal repulsion factor fields.
//!
//! For an autonomous planar flow every trajectory is an invariant curve, and
//! `ρ_T = ⟨n_T, ∇F_T n_0⟩` measures how strongly it repels its neighbors
//! normal-wise over the window `T`, where `n` is the unit normal obtained by
//! rotating the local acceleration 90° counterclockwise. Computed backward in
//! time (`T < 0`), high ρ marks the forward-time attractors: the ridge of
//! the backward field singles out the terminal velocity manifold.

use rayon::prelude::*;

use crate::dynamics::{self, GradientMethod, PitchAngle, VelocityState};
use crate::error::{Error, Result};
use crate::ode::OdeOptions;
use crate::profiles::CoefficientProfile;

/// Acceleration magnitude below which the trajectory normal is undefined.
pub const ACCEL_DEGENERATE: f64 = 1e-10;
/// Default backward window: long enough to sharpen the ridge, short enough
/// that only the fast corners of the usual domain escape.
pub const DEFAULT_WINDOW: f64 = -0.35;

/// Unit normal to the trajectory through `state`: the acceleration rotated
/// 90° counterclockwise and normalized.
pub fn normal_vector(
    state: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
) -> Result<[f64; 2]> {
    let (ax, az) = dynamics::acceleration(state, theta, profile);
    let magnitude = ax.hypot(az);
    if magnitude <= ACCEL_DEGENERATE {
        return Err(Error::DegenerateTangent { magnitude });
    }
    Ok([-az / magnitude, ax / magnitude])
}

/// Repulsion factor `ρ_T = ⟨n_T, ∇F_T n_0⟩` over the signed window `T`.
pub fn repulsion_factor(
    x0: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
    window: f64,
    method: GradientMethod,
    ode: &OdeOptions,
) -> Result<f64> {
    let n0 = normal_vector(x0, theta, profile)?;
    let (end, grad) = dynamics::flow_map_gradient(x0, theta, profile, window, method, ode)?;
    let n_t = normal_vector(end, theta, profile)?;
    let mapped = dynamics::mat_vec_2x2(&grad, n0);
    Ok(n_t[0] * mapped[0] + n_t[1] * mapped[1])
}

/// Rectangular evaluation lattice.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub vx_range: (f64, f64),
    pub vz_range: (f64, f64),
    pub nx: usize,
    pub nz: usize,
}

impl GridSpec {
    pub fn vx_at(&self, col: usize) -> f64 {
        if self.nx < 2 {
            return self.vx_range.0;
        }
        self.vx_range.0 + (self.vx_range.1 - self.vx_range.0) * col as f64 / (self.nx - 1) as f64
    }

    pub fn vz_at(&self, row: usize) -> f64 {
        if self.nz < 2 {
            return self.vz_range.0;
        }
        self.vz_range.0 + (self.vz_range.1 - self.vz_range.0) * row as f64 / (self.nz - 1) as f64
    }

    pub fn node(&self, col: usize, row: usize) -> VelocityState {
        VelocityState::new(self.vx_at(col), self.vz_at(row))
    }

    pub fn vz_spacing(&self) -> f64 {
        if self.nz < 2 {
            return 0.0;
        }
        (self.vz_range.1 - self.vz_range.0) / (self.nz - 1) as f64
    }
}

/// Gridded repulsion values; nodes where the backward trajectory escapes or
/// the normal degenerates are masked (`None`).
#[derive(Debug, Clone)]
pub struct RepulsionField {
    pub grid: GridSpec,
    pub theta: PitchAngle,
    pub window: f64,
    /// Column-major: `values[col * grid.nz + row]`.
    pub values: Vec<Option<f64>>,
}

impl RepulsionField {
    pub fn value(&self, col: usize, row: usize) -> Option<f64> {
        self.values[col * self.grid.nz + row]
    }

    pub fn column(&self, col: usize) -> &[Option<f64>] {
        &self.values[col * self.grid.nz..(col + 1) * self.grid.nz]
    }

    pub fn masked_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}

/// Evaluates the repulsion factor on every grid node in parallel. Output is
/// deterministic and independent of the worker count.
pub fn repulsion_field(
    grid: GridSpec,
    theta: PitchAngle,
    profile: &CoefficientProfile,
    window: f64,
    method: GradientMethod,
    ode: &OdeOptions,
) -> RepulsionField {
    let values: Vec<Option<f64>> = (0..grid.nx * grid.nz)
        .into_par_iter()
        .map(|idx| {
            let (col, row) = (idx / grid.nz, idx % grid.nz);
            repulsion_factor(grid.node(col, row), theta, profile, window, method, ode).ok()
        })
        .collect();
    RepulsionField {
        grid,
        theta,
        window,
        values,
    }
}

/// One ridge sample: the per-column repulsion maximum.
#[derive(Debug, Clone, Copy)]
pub struct RidgePoint {
    pub vx: f64,
    pub vz: f64,
    pub rho: f64,
}

/// Per-column argmax of the field with three-point parabolic sub-cell
/// refinement. Fully masked columns yield `None` gaps, never interpolation.
pub fn ridge_extract(field: &RepulsionField) -> Result<Vec<Option<RidgePoint>>> {
    let grid = &field.grid;
    let unmasked_columns = (0..grid.nx)
        .filter(|&c| field.column(c).iter().any(Option::is_some))
        .count();
    if unmasked_columns < 2 {
        return Err(Error::EmptyField);
    }

    let mut ridge = Vec::with_capacity(grid.nx);
    for col in 0..grid.nx {
        let column = field.column(col);
        let best = column
            .iter()
            .enumerate()
            .filter_map(|(row, v)| v.map(|rho| (row, rho)))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let Some((row, rho)) = best else {
            ridge.push(None);
            continue;
        };

        let mut vz = grid.vz_at(row);
        if row > 0 && row + 1 < grid.nz {
            if let (Some(lo), Some(hi)) = (column[row - 1], column[row + 1]) {
                let denom = lo - 2.0 * rho + hi;
                if denom.abs() > 1e-300 {
                    let offset = (0.5 * (lo - hi) / denom).clamp(-0.5, 0.5);
                    vz += offset * grid.vz_spacing();
                }
            }
        }
        ridge.push(Some(RidgePoint {
            vx: grid.vx_at(col),
            vz,
            rho,
        }));
    }
    Ok(ridge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::flat_plate;
    use crate::equilibria;

    #[test]
    fn normal_is_ccw_rotation_of_acceleration() {
        let p = flat_plate();
        let theta = PitchAngle::from_radians(0.0);
        // Free fall: a = (0, −1) rotates to (1, 0).
        let n = normal_vector(VelocityState::new(0.0, 0.0), theta, &p).unwrap();
        assert!((n[0] - 1.0).abs() < 1e-14 && n[1].abs() < 1e-14);
        // Too-fast descent: a = (0, +1.4) rotates to (−1, 0).
        let n = normal_vector(VelocityState::new(0.0, -1.0), theta, &p).unwrap();
        assert!((n[0] + 1.0).abs() < 1e-14 && n[1].abs() < 1e-14);
        assert!((n[0].hypot(n[1]) - 1.0).abs() < 1e-14);

        // At the equilibrium the tangent is degenerate.
        let eq = &equilibria::find_equilibria(theta, &p)[0];
        assert!(matches!(
            normal_vector(eq.state, theta, &p),
            Err(Error::DegenerateTangent { .. })
        ));
    }

    #[test]
    fn zero_window_gives_unit_factor() {
        let p = flat_plate();
        let theta = PitchAngle::from_degrees(-5.0);
        let ode = OdeOptions::default();
        for method in [GradientMethod::FiniteDifference, GradientMethod::Variational] {
            let rho = repulsion_factor(
                VelocityState::new(0.7, -0.3),
                theta,
                &p,
                0.0,
                method,
                &ode,
            )
            .unwrap();
            assert!((rho - 1.0).abs() < 1e-12, "rho_0 = {rho}");
        }
    }

    #[test]
    fn gradient_methods_agree_on_rho() {
        let p = flat_plate();
        let theta = PitchAngle::from_degrees(-5.0);
        let ode = OdeOptions::default();
        // Moderate speeds: fast states escape backward within the window.
        for state in [
            VelocityState::new(0.3, -0.4),
            VelocityState::new(-0.6, -0.5),
            VelocityState::new(0.8, -0.2),
        ] {
            let a = repulsion_factor(state, theta, &p, -0.35, GradientMethod::FiniteDifference, &ode)
                .unwrap();
            let b = repulsion_factor(state, theta, &p, -0.35, GradientMethod::Variational, &ode)
                .unwrap();
            assert!(
                (a - b).abs() <= 1e-4 * (1.0 + a.abs()),
                "method mismatch at {state:?}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn single_node_grid() {
        let p = flat_plate();
        let grid = GridSpec {
            vx_range: (0.3, 0.3),
            vz_range: (-0.4, -0.4),
            nx: 1,
            nz: 1,
        };
        let field = repulsion_field(
            grid,
            PitchAngle::from_degrees(-5.0),
            &p,
            -0.2,
            GradientMethod::Variational,
            &OdeOptions::default(),
        );
        assert_eq!(field.values.len(), 1);
        assert!(field.value(0, 0).is_some());
    }

    #[test]
    fn node_at_equilibrium_is_masked() {
        let p = flat_plate();
        let theta = PitchAngle::from_degrees(-5.0);
        let eq = &equilibria::find_equilibria(theta, &p)[0];
        let grid = GridSpec {
            vx_range: (eq.state.vx, eq.state.vx),
            vz_range: (eq.state.vz, eq.state.vz),
            nx: 1,
            nz: 1,
        };
        let field = repulsion_field(
            grid,
            theta,
            &p,
            -0.35,
            GradientMethod::Variational,
            &OdeOptions::default(),
        );
        assert!(field.value(0, 0).is_none());
    }

    #[test]
    fn ridge_recovers_synthetic_maximum() {
        // rho(vx, vz) = −(vz − f(vx))² with f known: the ridge must land on f
        // to sub-cell accuracy.
        let grid = GridSpec {
            vx_range: (-1.0, 1.0),
            vz_range: (-2.0, 0.0),
            nx: 41,
            nz: 81,
        };
        let f = |vx: f64| -1.0 + 0.3 * (2.0 * vx).sin();
        let mut values = Vec::new();
        for col in 0..grid.nx {
            for row in 0..grid.nz {
                let (vx, vz) = (grid.vx_at(col), grid.vz_at(row));
                values.push(Some(-(vz - f(vx)).powi(2)));
            }
        }
        let field = RepulsionField {
            grid,
            theta: PitchAngle::from_radians(0.0),
            window: -0.35,
            values,
        };
        let ridge = ridge_extract(&field).unwrap();
        let cell = grid.vz_spacing();
        for point in ridge.into_iter().flatten() {
            assert!(
                (point.vz - f(point.vx)).abs() < 0.3 * cell,
                "ridge off the synthetic maximum at vx = {}",
                point.vx
            );
        }
    }

    #[test]
    fn masked_column_leaves_gap() {
        let grid = GridSpec {
            vx_range: (0.0, 1.0),
            vz_range: (0.0, 1.0),
            nx: 3,
            nz: 3,
        };
        let mut values = vec![Some(1.0); 9];
        for row in 0..3 {
            values[grid.nz + row] = None; // middle column fully masked
        }
        let field = RepulsionField {
            grid,
            theta: PitchAngle::from_radians(0.0),
            window: -0.1,
            values,
        };
        let ridge = ridge_extract(&field).unwrap();
        assert!(ridge[0].is_some());
        assert!(ridge[1].is_none());
        assert!(ridge[2].is_some());
    }
}
