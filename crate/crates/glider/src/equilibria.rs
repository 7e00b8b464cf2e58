//! Equilibrium glides and their bifurcations over pitch.
//!
//! Every fixed point with `v > 0` must satisfy `cot γ* = (C_L/C_D)(γ* + θ)`,
//! so equilibria are the zeros of the scalar residual
//! `h(γ) = cot γ − (C_L/C_D)(γ+θ)` on `(0, π)`. Because the lift-to-drag
//! ratio is finite and `cot` blows up at both ends, `h` always has at least
//! one zero, and outside grazing cases an odd number of them; whenever there
//! are several, every second one (ordered by `γ*`) is a saddle. The speed at
//! an equilibrium comes from the `v_z`-nullcline,
//! `v* = (C_L cos γ* + C_D sin γ*)^{-1/2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{self, PitchAngle, PolarVelocity, VelocityState};
use crate::error::{Error, Result};
use crate::profiles::CoefficientProfile;

/// Offset of the root scan from the singular endpoints of `(0, π)`.
const SCAN_MARGIN: f64 = 1e-4;
/// Uniform samples in the root scan.
const SCAN_SAMPLES: usize = 2000;
/// Bisection stops once the bracket is this narrow.
const ROOT_WIDTH_TOL: f64 = 1e-13;
/// Corrector target for `|h|`.
const RESIDUAL_TOL: f64 = 1e-12;
/// A root with `|dh/dγ|` below this counts as grazing.
const TANGENCY_TOL: f64 = 1e-8;
/// Eigenvalues with `|Re λ|` below this mark a center/degenerate point.
const CENTER_RE_TOL: f64 = 1e-7;
/// Imaginary parts above this make a focus.
const FOCUS_IM_TOL: f64 = 1e-9;
const CORRECTOR_MAX_ITERS: usize = 25;
/// Keep γ strictly inside the open interval during continuation.
const GAMMA_GUARD: f64 = 1e-6;

/// Classification of an equilibrium glide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumKind {
    StableNode,
    StableFocus,
    Saddle,
    Center,
    Degenerate,
    UnstableNode,
    UnstableFocus,
}

impl EquilibriumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquilibriumKind::StableNode => "stable-node",
            EquilibriumKind::StableFocus => "stable-focus",
            EquilibriumKind::Saddle => "saddle",
            EquilibriumKind::Center => "center",
            EquilibriumKind::Degenerate => "degenerate",
            EquilibriumKind::UnstableNode => "unstable-node",
            EquilibriumKind::UnstableFocus => "unstable-focus",
        }
    }

    pub fn is_stable_attractor(&self) -> bool {
        matches!(
            self,
            EquilibriumKind::StableNode | EquilibriumKind::StableFocus
        )
    }
}

impl std::fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A classified equilibrium glide at fixed pitch.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    /// Glide angle in `(0, π)`.
    pub gamma_star: f64,
    /// Speed from the nullcline relation.
    pub v_star: f64,
    pub state: VelocityState,
    pub delta: f64,
    pub tau: f64,
    /// Sorted by real part.
    pub eigenvalues: [Complex64; 2],
    pub kind: EquilibriumKind,
    /// Grazing root: `|dh/dγ|` under the tangency tolerance, so the usual
    /// parity count does not apply.
    pub tangent: bool,
}

/// Equilibrium residual `h(γ) = cot γ − (C_L/C_D)(γ+θ)` on the open `(0, π)`.
pub fn h(gamma: f64, theta: PitchAngle, profile: &CoefficientProfile) -> Result<f64> {
    if !(gamma > 0.0 && gamma < PI) {
        return Err(Error::GammaOutOfDomain { gamma });
    }
    let (ratio, _) = profile.ratio_and_derivative((gamma + theta.radians()).into());
    Ok(gamma.cos() / gamma.sin() - ratio)
}

/// `dh/dγ = −csc²γ − (C_L/C_D)'(γ+θ)`. At a root of `h` this equals `−Δ`.
pub fn dh_dgamma(gamma: f64, theta: PitchAngle, profile: &CoefficientProfile) -> f64 {
    let (_, ratio_prime) = profile.ratio_and_derivative((gamma + theta.radians()).into());
    let s = gamma.sin();
    -1.0 / (s * s) - ratio_prime
}

/// Classification pair `Δ = 1 + (C_L/C_D)² + (C_L/C_D)'` and
/// `τ = C_L'/C_D + 3`, evaluated at `α = γ* + θ`.
pub fn delta_tau(gamma_star: f64, theta: PitchAngle, profile: &CoefficientProfile) -> (f64, f64) {
    let alpha = gamma_star + theta.radians();
    let (ratio, ratio_prime) = profile.ratio_and_derivative(alpha.into());
    let c = profile.evaluate_with_derivatives(alpha.into());
    let delta = 1.0 + ratio * ratio + ratio_prime;
    let tau = c.dlift / c.drag + 3.0;
    (delta, tau)
}

/// Builds the classified [`Equilibrium`] at a refined root `γ*`.
pub fn classify(gamma_star: f64, theta: PitchAngle, profile: &CoefficientProfile) -> Equilibrium {
    let alpha = gamma_star + theta.radians();
    let (cl, cd) = profile.evaluate(alpha.into());
    let v_star = (cl * gamma_star.cos() + cd * gamma_star.sin()).powf(-0.5);
    let state = PolarVelocity::new(v_star, gamma_star).to_state();
    let (delta, tau) = delta_tau(gamma_star, theta, profile);
    let jac = dynamics::jacobian(state, theta, profile);
    let mut eigenvalues = dynamics::eigenvalues_2x2(&jac);
    eigenvalues.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());

    let min_abs_re = eigenvalues
        .iter()
        .map(|e| e.re.abs())
        .fold(f64::MAX, f64::min);
    let has_imag = eigenvalues.iter().any(|e| e.im.abs() > FOCUS_IM_TOL);
    // The zero eigenvalue of the flat plate at θ = 0 must not be
    // misclassified, so the near-zero test precedes the Δ sign test.
    let kind = if min_abs_re < CENTER_RE_TOL {
        if has_imag {
            EquilibriumKind::Center
        } else {
            EquilibriumKind::Degenerate
        }
    } else if delta < 0.0 {
        EquilibriumKind::Saddle
    } else if eigenvalues.iter().all(|e| e.re < 0.0) {
        if has_imag {
            EquilibriumKind::StableFocus
        } else {
            EquilibriumKind::StableNode
        }
    } else if has_imag {
        EquilibriumKind::UnstableFocus
    } else {
        EquilibriumKind::UnstableNode
    };

    let tangent = dh_dgamma(gamma_star, theta, profile).abs() < TANGENCY_TOL;
    Equilibrium {
        gamma_star,
        v_star,
        state,
        delta,
        tau,
        eigenvalues,
        kind,
        tangent,
    }
}

/// Finds all equilibrium glides at the given pitch, ordered by `γ*`.
///
/// A dense scan of `h` brackets sign changes which bisection then refines to
/// machine width. Grazing roots carry the `tangent` flag; the guaranteed odd
/// count only applies when no root is flagged.
pub fn find_equilibria(theta: PitchAngle, profile: &CoefficientProfile) -> Vec<Equilibrium> {
    let lo = SCAN_MARGIN;
    let hi = PI - SCAN_MARGIN;
    let eval = |gamma: f64| h(gamma, theta, profile).expect("scan stays inside (0, pi)");

    let mut roots = Vec::new();
    let mut prev_gamma = lo;
    let mut prev_h = eval(lo);
    for i in 1..=SCAN_SAMPLES {
        let gamma = lo + (hi - lo) * i as f64 / SCAN_SAMPLES as f64;
        let value = eval(gamma);
        if prev_h == 0.0 {
            roots.push(prev_gamma);
        } else if prev_h * value < 0.0 {
            roots.push(bisect_root(&eval, prev_gamma, gamma, prev_h));
        }
        prev_gamma = gamma;
        prev_h = value;
    }
    if prev_h == 0.0 {
        roots.push(prev_gamma);
    }

    roots
        .into_iter()
        .map(|gamma_star| classify(gamma_star, theta, profile))
        .collect()
}

fn bisect_root(eval: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut h_lo: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo < ROOT_WIDTH_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let h_mid = eval(mid);
        if h_mid == 0.0 {
            return mid;
        }
        if h_lo * h_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            h_lo = h_mid;
        }
    }
    0.5 * (lo + hi)
}

/// Step-size control for pseudo-arclength continuation.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub initial: f64,
    pub min: f64,
    pub max: f64,
    pub max_points: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            initial: 1e-2,
            min: 1e-4,
            max: 5e-2,
            max_points: 20_000,
        }
    }
}

/// A θ-continued family of equilibria.
#[derive(Debug, Clone)]
pub struct BifurcationBranch {
    /// Points in traversal order; θ need not be monotone across folds.
    pub points: Vec<(PitchAngle, Equilibrium)>,
    /// Set when the corrector diverged below the minimum step.
    pub truncated: Option<String>,
}

impl BifurcationBranch {
    pub fn theta_extent(&self) -> (f64, f64) {
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for (theta, _) in &self.points {
            lo = lo.min(theta.radians());
            hi = hi.max(theta.radians());
        }
        (lo, hi)
    }

    /// Indices where the branch folds back in θ (saddle-node bifurcations).
    pub fn fold_indices(&self) -> Vec<usize> {
        let mut folds = Vec::new();
        for i in 1..self.points.len().saturating_sub(1) {
            let a = self.points[i - 1].0.radians();
            let b = self.points[i].0.radians();
            let c = self.points[i + 1].0.radians();
            if (b - a) * (c - b) < 0.0 {
                folds.push(i);
            }
        }
        folds
    }
}

/// Traces the equilibrium branch through `seed` across `theta_range` by
/// pseudo-arclength continuation on `h(γ; θ) = 0`: secant predictor,
/// orthogonal Newton corrector, adaptive arclength step. Folds are traversed,
/// not treated as endpoints.
pub fn continue_branch(
    seed: &Equilibrium,
    theta0: PitchAngle,
    theta_range: (f64, f64),
    profile: &CoefficientProfile,
    step_control: &StepControl,
) -> BifurcationBranch {
    let forward = trace_direction(seed, theta0, theta_range, profile, step_control, 1.0);
    let backward = trace_direction(seed, theta0, theta_range, profile, step_control, -1.0);

    let mut points = backward.points;
    points.reverse();
    points.push((theta0, seed.clone()));
    points.extend(forward.points);
    BifurcationBranch {
        points,
        truncated: forward.truncated.or(backward.truncated),
    }
}

struct DirectionTrace {
    points: Vec<(PitchAngle, Equilibrium)>,
    truncated: Option<String>,
}

fn trace_direction(
    seed: &Equilibrium,
    theta0: PitchAngle,
    theta_range: (f64, f64),
    profile: &CoefficientProfile,
    control: &StepControl,
    direction: f64,
) -> DirectionTrace {
    let seed_point = [theta0.radians(), seed.gamma_star];
    let mut points = Vec::new();
    let mut truncated = None;

    let mut tangent = match oriented_initial_tangent(seed_point, profile, control, direction) {
        Some(t) => t,
        None => {
            return DirectionTrace {
                points,
                truncated: Some(format!(
                    "no corrector-consistent tangent at theta = {:.4} deg",
                    theta0.degrees()
                )),
            }
        }
    };

    let range_distance = |theta: f64| (theta_range.0 - theta).max(theta - theta_range.1).max(0.0);
    let mut current = seed_point;
    let mut step = control.initial.clamp(control.min, control.max);
    while points.len() < control.max_points {
        let pred = [
            current[0] + step * tangent[0],
            current[1] + step * tangent[1],
        ];
        match correct(pred, tangent, profile) {
            Some(next) => {
                let previous = current;
                let secant = [next[0] - current[0], next[1] - current[1]];
                let norm = secant[0].hypot(secant[1]);
                if norm > 1e-14 {
                    tangent = [secant[0] / norm, secant[1] / norm];
                }
                current = next;
                let theta = PitchAngle::from_radians(next[0]);
                points.push((theta, classify(next[1], theta, profile)));

                // Stop once outside the pitch range and moving away from it;
                // a seed beyond the range may legitimately walk back in.
                let d_new = range_distance(next[0]);
                if d_new > 0.0 && d_new >= range_distance(previous[0]) {
                    break;
                }
                // Loop closure (isola): returned to the seed.
                if points.len() > 10 {
                    let d = (next[0] - seed_point[0]).hypot(next[1] - seed_point[1]);
                    if d < 0.5 * step {
                        break;
                    }
                }
                step = (step * 1.5).min(control.max);
            }
            None => {
                if step <= control.min * (1.0 + 1e-9) {
                    truncated = Some(format!(
                        "corrector diverged below minimum step at theta = {:.4} deg, gamma = {:.4} deg",
                        current[0].to_degrees(),
                        current[1].to_degrees()
                    ));
                    break;
                }
                step = (step * 0.5).max(control.min);
            }
        }
    }
    DirectionTrace { points, truncated }
}

/// Tangent of the zero set at `point`, oriented so the first corrected step
/// moves θ in `direction`. At a fold or a degenerate seed the analytic
/// tangent is vertical in θ, so orientation is settled by probing both signs.
fn oriented_initial_tangent(
    point: [f64; 2],
    profile: &CoefficientProfile,
    control: &StepControl,
    direction: f64,
) -> Option<[f64; 2]> {
    let t = nullspace_tangent(point, profile);
    if t[0].abs() > 1e-10 {
        return Some(if t[0] * direction < 0.0 { [-t[0], -t[1]] } else { t });
    }
    let step = control.initial.clamp(control.min, control.max);
    for cand in [t, [-t[0], -t[1]]] {
        let pred = [point[0] + step * cand[0], point[1] + step * cand[1]];
        if let Some(next) = correct(pred, cand, profile) {
            if (next[0] - point[0]) * direction > 0.0 {
                return Some(cand);
            }
        }
    }
    None
}

fn nullspace_tangent(point: [f64; 2], profile: &CoefficientProfile) -> [f64; 2] {
    let theta = PitchAngle::from_radians(point[0]);
    let (_, ratio_prime) = profile.ratio_and_derivative((point[1] + point[0]).into());
    let h_theta = -ratio_prime;
    let h_gamma = dh_dgamma(point[1], theta, profile);
    let t = [h_gamma, -h_theta];
    let norm = t[0].hypot(t[1]);
    if norm < 1e-300 {
        [0.0, 1.0]
    } else {
        [t[0] / norm, t[1] / norm]
    }
}

/// Newton corrector for `h(γ; θ) = 0` with corrections orthogonal to the
/// predictor tangent.
fn correct(pred: [f64; 2], tangent: [f64; 2], profile: &CoefficientProfile) -> Option<[f64; 2]> {
    let mut x = pred;
    for _ in 0..CORRECTOR_MAX_ITERS {
        if !(x[1] > GAMMA_GUARD && x[1] < PI - GAMMA_GUARD) {
            return None;
        }
        let theta = PitchAngle::from_radians(x[0]);
        let residual = h(x[1], theta, profile).ok()?;
        let orth = (x[0] - pred[0]) * tangent[0] + (x[1] - pred[1]) * tangent[1];

        let (_, ratio_prime) = profile.ratio_and_derivative((x[1] + x[0]).into());
        let h_theta = -ratio_prime;
        let h_gamma = dh_dgamma(x[1], theta, profile);
        let det = h_theta * tangent[1] - h_gamma * tangent[0];
        if det.abs() < 1e-300 {
            return None;
        }
        let dx0 = (-residual * tangent[1] + h_gamma * orth) / det;
        let dx1 = (-h_theta * orth + residual * tangent[0]) / det;
        x = [x[0] + dx0, x[1] + dx1];

        let update = dx0.hypot(dx1);
        if update > 0.5 {
            return None;
        }
        if residual.abs() < RESIDUAL_TOL && update < 1e-10 {
            return Some(x);
        }
    }
    None
}

/// Union of per-θ scans and continued branches.
#[derive(Debug)]
pub struct BifurcationDiagram {
    pub branches: Vec<BifurcationBranch>,
    /// `find_equilibria` output at every grid pitch.
    pub per_theta: Vec<(PitchAngle, Vec<Equilibrium>)>,
}

/// Sweeps `find_equilibria` over the grid and continues a branch from every
/// root not already covered by an existing branch.
pub fn bifurcation_diagram(
    profile: &CoefficientProfile,
    theta_grid: &[PitchAngle],
    step_control: &StepControl,
) -> BifurcationDiagram {
    let per_theta: Vec<(PitchAngle, Vec<Equilibrium>)> = theta_grid
        .par_iter()
        .map(|&theta| (theta, find_equilibria(theta, profile)))
        .collect();

    let mut branches: Vec<BifurcationBranch> = Vec::new();
    if let (Some(first), Some(last)) = (theta_grid.first(), theta_grid.last()) {
        let range = (
            first.radians().min(last.radians()),
            first.radians().max(last.radians()),
        );
        // A scan root within this distance of an existing branch point is the
        // same solution; continuation spacing is at most `step_control.max`.
        let coverage = (2.0 * step_control.max).max(0.06);
        for (theta, eqs) in &per_theta {
            for eq in eqs {
                let covered = branches.iter().any(|branch| {
                    branch.points.iter().any(|(bt, be)| {
                        (bt.radians() - theta.radians()).hypot(be.gamma_star - eq.gamma_star)
                            < coverage
                    })
                });
                if !covered {
                    branches.push(continue_branch(eq, *theta, range, profile, step_control));
                }
            }
        }
    }
    BifurcationDiagram {
        branches,
        per_theta,
    }
}
