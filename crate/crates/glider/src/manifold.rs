//! The terminal velocity manifold (TVM) and the `v_z`-nullcline.
//!
//! The TVM is the attracting invariant curve in velocity space onto which
//! every trajectory collapses before creeping toward an equilibrium glide —
//! the two-dimensional analogue of the 1D terminal-velocity point, and a
//! barrier to transport. Because it repels in backward time, a point's side
//! of the manifold is decided by integrating backward and watching which way
//! the vertical velocity diverges; interval bisection on that classification
//! pins the curve to arbitrary tolerance. Curves at many pitches stack into
//! the extended TVM surface.

use std::ops::ControlFlow;

use rayon::prelude::*;

use crate::dynamics::{self, IntegrateOptions, PitchAngle, Trajectory, VelocityState};
use crate::equilibria::{self, Equilibrium, EquilibriumKind};
use crate::error::{Error, Result};
use crate::ode;
use crate::profiles::CoefficientProfile;

/// Backward-time |v_z| threshold that decides a trajectory's origin.
pub const VZ_DECIDE: f64 = 3.0;
/// Longest backward window tried before reporting indeterminate.
pub const T_BACK_MAX: f64 = 5.0;
/// Local |dvz/dvx| above which a slice is re-scanned horizontally.
const STEEP_SLOPE: f64 = 4.0;
/// Strategy-A seeds sit this far outside the lateral domain edges.
const SEED_OFFSET: f64 = 0.5;
/// Offset of unstable-manifold seeds along the unstable eigenvector.
const SADDLE_SEED: f64 = 1e-6;
/// Spatial spacing target when sampling swept trajectories.
const SWEEP_SAMPLE_DS: f64 = 0.004;
/// Forward horizon for sweep arcs; near-fixed-point termination usually
/// stops them much earlier.
const SWEEP_T_MAX: f64 = 400.0;

/// Where a backward-time trajectory originated relative to the TVM.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Above,
    Below,
    /// Neither side within the decision window: numerically on-manifold or
    /// near a fixed point.
    Indeterminate,
}

/// Options shared by the classification, bisection, and tracing routines.
#[derive(Debug, Clone, Copy)]
pub struct TvmOptions {
    pub vz_decide: f64,
    pub t_back_max: f64,
    /// Bisection interval tolerance.
    pub tol: f64,
    /// `v_z` bracket used for seed slices.
    pub vz_bracket: (f64, f64),
    /// Number of vertical slices for per-slice bisection.
    pub slices: usize,
    /// Points on the resampled output curve.
    pub points: usize,
    pub ode: ode::OdeOptions,
}

impl Default for TvmOptions {
    fn default() -> Self {
        Self {
            vz_decide: VZ_DECIDE,
            t_back_max: T_BACK_MAX,
            tol: 1e-10,
            vz_bracket: (-4.0, 1.0),
            // Dense enough that the chord error between bisected slices
            // stays below the cross-strategy agreement budget of 1e-4.
            slices: 161,
            points: 400,
            ode: ode::OdeOptions::default(),
        }
    }
}

/// How to trace the TVM at one pitch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceStrategy {
    /// Bisect one seed outside each lateral domain edge, integrate forward,
    /// and collect the swept curve, together with the unstable-manifold arcs
    /// of any saddles.
    OutsideInSweep,
    /// Independent bisection on many vertical slices, with steep segments
    /// re-scanned horizontally.
    PerSliceBisection,
}

/// Integrates backward from `point` and reports which side of the TVM it
/// came from. Points on the manifold (or at a fixed point) never commit and
/// classify as indeterminate.
pub fn classify_origin(
    point: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
    options: &TvmOptions,
) -> Origin {
    let decide = options.vz_decide;
    let rhs = |_t: f64, y: &[f64; 2]| {
        let (ax, az) = dynamics::acceleration((*y).into(), theta, profile);
        [ax, az]
    };
    let solution = ode::integrate(
        rhs,
        0.0,
        -options.t_back_max,
        point.into(),
        &options.ode,
        |_t, y| {
            if y[1].abs() >= decide || y[0].hypot(y[1]) > dynamics::V_ESCAPE {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    let vz = solution.final_state()[1];
    if vz >= decide {
        Origin::Above
    } else if vz <= -decide {
        Origin::Below
    } else {
        Origin::Indeterminate
    }
}

/// Bisection on the origin classification along the straight segment from
/// `below_end` to `above_end`. Endpoints must classify to opposite decided
/// sides; indeterminate midpoints shrink the interval from whichever side
/// last decided.
fn bisect_segment(
    below_end: VelocityState,
    above_end: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
    options: &TvmOptions,
) -> Result<VelocityState> {
    let class_lo = classify_origin(below_end, theta, profile, options);
    let class_hi = classify_origin(above_end, theta, profile, options);
    if class_lo == Origin::Indeterminate || class_hi == Origin::Indeterminate {
        return Err(Error::IndeterminateEndpoint);
    }
    if class_lo == class_hi {
        return Err(Error::InvalidBracket {
            low: class_lo,
            high: class_hi,
        });
    }

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let span = below_end.distance(above_end);
    let at = |s: f64| VelocityState {
        vx: below_end.vx + s * (above_end.vx - below_end.vx),
        vz: below_end.vz + s * (above_end.vz - below_end.vz),
    };
    let mut last_decided = class_lo;
    while (hi - lo) * span > options.tol {
        let mid = 0.5 * (lo + hi);
        match classify_origin(at(mid), theta, profile, options) {
            c if c == class_lo => {
                lo = mid;
                last_decided = c;
            }
            c if c == class_hi => {
                hi = mid;
                last_decided = c;
            }
            _ => {
                // On-manifold midpoint: shrink from the side that last
                // produced a decision.
                if last_decided == class_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
    }
    Ok(at(0.5 * (lo + hi)))
}

/// Bisection search for the TVM crossing on a fixed-`v_x` slice.
///
/// `vz_bracket.0` must classify below the manifold and `vz_bracket.1` above.
pub fn bisect_slice(
    vx_fixed: f64,
    vz_bracket: (f64, f64),
    theta: PitchAngle,
    profile: &CoefficientProfile,
    options: &TvmOptions,
) -> Result<VelocityState> {
    bisect_segment(
        VelocityState::new(vx_fixed, vz_bracket.0),
        VelocityState::new(vx_fixed, vz_bracket.1),
        theta,
        profile,
        options,
    )
}

/// Bisection that widens the bracket when both endpoints classify to the
/// same side, which happens at extreme pitch where the manifold climbs out
/// of the default window. Extension stops inside the escape radius.
fn bisect_slice_extending(
    vx: f64,
    bracket: (f64, f64),
    theta: PitchAngle,
    profile: &CoefficientProfile,
    options: &TvmOptions,
) -> Result<VelocityState> {
    let step = (bracket.1 - bracket.0).abs().max(2.0);
    let (mut lo, mut hi) = bracket;
    for _ in 0..3 {
        match bisect_slice(vx, (lo, hi), theta, profile, options) {
            Ok(point) => return Ok(point),
            Err(Error::InvalidBracket {
                low: Origin::Below,
                high: Origin::Below,
            }) if hi + step <= 8.0 => hi += step,
            Err(Error::InvalidBracket {
                low: Origin::Above,
                high: Origin::Above,
            }) if lo - step >= -8.0 => lo -= step,
            Err(err) => return Err(err),
        }
    }
    Err(Error::SeedNotFound { vx })
}

/// One point of a traced TVM curve.
#[derive(Debug, Clone, Copy)]
pub struct TvmPoint {
    pub state: VelocityState,
    /// Acceleration component along the curve tangent, oriented toward
    /// increasing `v_x`.
    pub accel_tangential: f64,
}

/// The terminal velocity manifold at one pitch, ordered by `v_x` and
/// resampled to uniform arclength.
#[derive(Debug, Clone)]
pub struct TvmCurve {
    pub theta: PitchAngle,
    pub points: Vec<TvmPoint>,
}

impl TvmCurve {
    pub fn states(&self) -> impl Iterator<Item = VelocityState> + '_ {
        self.points.iter().map(|p| p.state)
    }

    /// Mean spacing between adjacent points.
    pub fn spacing(&self) -> f64 {
        let total: f64 = self
            .points
            .windows(2)
            .map(|w| w[0].state.distance(w[1].state))
            .sum();
        total / (self.points.len().saturating_sub(1).max(1)) as f64
    }

    /// Euclidean distance from `point` to the curve polyline.
    pub fn distance_to(&self, point: VelocityState) -> f64 {
        distance_to_curve(point, self)
    }

    /// Signed normal offset: positive on the side the upward normal of the
    /// nearest segment points to. Used to check that trajectories never
    /// change sides away from the tolerance tube.
    pub fn signed_offset(&self, point: VelocityState) -> f64 {
        let (dist, segment) = nearest_segment(point, self);
        let a = self.points[segment].state;
        let b = self.points[segment + 1].state;
        let cross = (b.vx - a.vx) * (point.vz - a.vz) - (b.vz - a.vz) * (point.vx - a.vx);
        dist.copysign(cross)
    }

    /// Linear interpolation of `v_z` at a given `v_x`, if within range.
    pub fn vz_at(&self, vx: f64) -> Option<f64> {
        let points = &self.points;
        if points.is_empty() {
            return None;
        }
        if vx < points[0].state.vx || vx > points[points.len() - 1].state.vx {
            return None;
        }
        let idx = points
            .partition_point(|p| p.state.vx <= vx)
            .clamp(1, points.len() - 1);
        let (a, b) = (points[idx - 1].state, points[idx].state);
        if (b.vx - a.vx).abs() < 1e-300 {
            return Some(0.5 * (a.vz + b.vz));
        }
        let t = (vx - a.vx) / (b.vx - a.vx);
        Some(a.vz + t.clamp(0.0, 1.0) * (b.vz - a.vz))
    }
}

/// Distance from a point to a curve polyline with segment projection.
pub fn distance_to_curve(point: VelocityState, curve: &TvmCurve) -> f64 {
    nearest_segment(point, curve).0
}

fn nearest_segment(point: VelocityState, curve: &TvmCurve) -> (f64, usize) {
    assert!(curve.points.len() >= 2, "curve must not be empty");
    let mut best = (f64::INFINITY, 0);
    for (i, w) in curve.points.windows(2).enumerate() {
        let (a, b) = (w[0].state, w[1].state);
        let (dx, dz) = (b.vx - a.vx, b.vz - a.vz);
        let len_sq = dx * dx + dz * dz;
        let t = if len_sq > 0.0 {
            (((point.vx - a.vx) * dx + (point.vz - a.vz) * dz) / len_sq).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let proj = VelocityState::new(a.vx + t * dx, a.vz + t * dz);
        let d = point.distance(proj);
        if d < best.0 {
            best = (d, i);
        }
    }
    best
}

/// Symmetric Hausdorff distance between two curves.
pub fn hausdorff_distance(a: &TvmCurve, b: &TvmCurve) -> f64 {
    let d_ab = a
        .states()
        .map(|p| distance_to_curve(p, b))
        .fold(0.0, f64::max);
    let d_ba = b
        .states()
        .map(|p| distance_to_curve(p, a))
        .fold(0.0, f64::max);
    d_ab.max(d_ba)
}

/// Traces the TVM over the `v_x` domain at fixed pitch.
pub fn trace_tvm(
    theta: PitchAngle,
    profile: &CoefficientProfile,
    domain: (f64, f64),
    strategy: TraceStrategy,
    options: &TvmOptions,
) -> Result<TvmCurve> {
    if !domain.0.is_finite() || !domain.1.is_finite() || domain.1 <= domain.0 {
        return Err(Error::Config {
            field: "domain".to_string(),
            message: format!("empty vx domain ({}, {})", domain.0, domain.1),
        });
    }
    let raw = match strategy {
        TraceStrategy::OutsideInSweep => sweep_points(theta, profile, domain, options)?,
        TraceStrategy::PerSliceBisection => slice_points(theta, profile, domain, options)?,
    };
    build_curve(raw, theta, profile, domain, options.points)
}

/// Strategy A: bisect a seed outside each lateral edge, integrate forward,
/// and join the swept arcs with the unstable manifolds of interior saddles.
fn sweep_points(
    theta: PitchAngle,
    profile: &CoefficientProfile,
    domain: (f64, f64),
    options: &TvmOptions,
) -> Result<Vec<VelocityState>> {
    let mut points = Vec::new();
    for seed_vx in [domain.0 - SEED_OFFSET, domain.1 + SEED_OFFSET] {
        let seed = bisect_slice_extending(seed_vx, options.vz_bracket, theta, profile, options)
            .map_err(|_| Error::SeedNotFound { vx: seed_vx })?;
        let trajectory = sweep_forward(seed, theta, profile, options);
        sample_trajectory(&trajectory, profile, &mut points);
    }

    let equilibria = equilibria::find_equilibria(theta, profile);
    for eq in &equilibria {
        if eq.state.vx >= domain.0 && eq.state.vx <= domain.1 {
            points.push(eq.state);
        }
        if eq.kind == EquilibriumKind::Saddle {
            let arcs = unstable_manifold_expansion(eq, theta, profile, options)?;
            for arc in &arcs {
                sample_trajectory(arc, profile, &mut points);
            }
        }
    }
    Ok(points)
}

fn sweep_forward(
    seed: VelocityState,
    theta: PitchAngle,
    profile: &CoefficientProfile,
    options: &TvmOptions,
) -> Trajectory {
    let integrate_options = IntegrateOptions {
        ode: options.ode,
        ..IntegrateOptions::default()
    };
    dynamics::integrate(seed, theta, profile, (0.0, SWEEP_T_MAX), &integrate_options)
}

/// Dense spatial sampling of a trajectory: walk the interpolant with time
/// steps sized to the local speed of the curve in velocity space.
fn sample_trajectory(
    trajectory: &Trajectory,
    profile: &CoefficientProfile,
    out: &mut Vec<VelocityState>,
) {
    let t0 = trajectory.times()[0];
    let t_end = trajectory.final_time();
    let dir = (t_end - t0).signum();
    if dir == 0.0 {
        out.push(trajectory.state_at(0));
        return;
    }
    let mut t = t0;
    let mut samples = 0usize;
    loop {
        let state = trajectory.sample(t);
        out.push(state);
        samples += 1;
        if (t - t_end) * dir >= 0.0 || samples > 200_000 {
            break;
        }
        let (ax, az) = dynamics::acceleration(state, trajectory.theta, profile);
        let curve_speed = ax.hypot(az).max(1e-3);
        let dt = (SWEEP_SAMPLE_DS / curve_speed).clamp(1e-4, 0.5);
        t += dt * dir;
        if (t - t_end) * dir > 0.0 {
            t = t_end;
        }
    }
}

/// Strategy B: independent bisection on uniformly spaced vertical slices,
/// with steep spans re-scanned along horizontal slices.
fn slice_points(
    theta: PitchAngle,
    profile: &CoefficientProfile,
    domain: (f64, f64),
    options: &TvmOptions,
) -> Result<Vec<VelocityState>> {
    let n = options.slices.max(2);
    let solved: Vec<Option<VelocityState>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let vx = domain.0 + (domain.1 - domain.0) * i as f64 / (n - 1) as f64;
            bisect_slice_extending(vx, options.vz_bracket, theta, profile, options).ok()
        })
        .collect();
    let mut points: Vec<VelocityState> = solved.into_iter().flatten().collect();
    if points.len() < 2 {
        return Err(Error::SeedNotFound { vx: domain.0 });
    }

    // Where the curve is steeper than the vertical-slice resolution can
    // represent, bisect along horizontal segments between the neighbors.
    let mut extra = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dx = b.vx - a.vx;
        let dz = b.vz - a.vz;
        if dx.abs() < 1e-12 || (dz / dx).abs() <= STEEP_SLOPE {
            continue;
        }
        let steps = ((dz.abs() / dx.abs() / STEEP_SLOPE).ceil() as usize).min(16);
        for k in 1..=steps {
            let vz = a.vz + dz * k as f64 / (steps + 1) as f64;
            let pad = 0.25 * dx.abs().max(options.tol * 10.0);
            let lo = VelocityState::new(a.vx.min(b.vx) - pad, vz);
            let hi = VelocityState::new(a.vx.max(b.vx) + pad, vz);
            // Orientation along the horizontal segment is not known a
            // priori; try both.
            if let Ok(p) = bisect_segment(lo, hi, theta, profile, options)
                .or_else(|_| bisect_segment(hi, lo, theta, profile, options))
            {
                extra.push(p);
            }
        }
    }
    points.extend(extra);
    Ok(points)
}

/// Forward-integrates the two arcs of a saddle's unstable manifold, seeded a
/// small offset along the unstable eigenvector. Arcs end at a stable
/// equilibrium (near-fixed-point window) or when they leave the escape
/// radius.
pub fn unstable_manifold_expansion(
    saddle: &Equilibrium,
    theta: PitchAngle,
    profile: &CoefficientProfile,
    options: &TvmOptions,
) -> Result<[Trajectory; 2]> {
    let jac = dynamics::jacobian(saddle.state, theta, profile);
    let unstable = saddle
        .eigenvalues
        .iter()
        .find(|e| e.im.abs() < 1e-12 && e.re > 0.0)
        .ok_or(Error::NotASaddle)?;
    let dir = dynamics::real_eigenvector(&jac, unstable.re);

    let integrate_options = IntegrateOptions {
        ode: options.ode,
        ..IntegrateOptions::default()
    };
    let arcs = [1.0f64, -1.0f64].map(|sign| {
        let seed = VelocityState::new(
            saddle.state.vx + sign * SADDLE_SEED * dir[0],
            saddle.state.vz + sign * SADDLE_SEED * dir[1],
        );
        dynamics::integrate(seed, theta, profile, (0.0, SWEEP_T_MAX), &integrate_options)
    });
    Ok(arcs)
}

/// Orders raw points by `v_x`, clips to the domain, resamples to uniform
/// arclength, and attaches the signed tangential acceleration.
fn build_curve(
    mut raw: Vec<VelocityState>,
    theta: PitchAngle,
    profile: &CoefficientProfile,
    domain: (f64, f64),
    n_points: usize,
) -> Result<TvmCurve> {
    raw.retain(|p| p.vx.is_finite() && p.vz.is_finite());
    raw.sort_by(|a, b| a.vx.partial_cmp(&b.vx).unwrap());

    // Pin the curve exactly at the domain edges before clipping, so curves
    // from different strategies (and mirrored pitches) share their extent.
    let mut crossings = Vec::new();
    for edge in [domain.0, domain.1] {
        for w in raw.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.vx < edge && b.vx > edge {
                let t = (edge - a.vx) / (b.vx - a.vx);
                crossings.push(VelocityState::new(edge, a.vz + t * (b.vz - a.vz)));
                break;
            }
        }
    }
    raw.extend(crossings);
    raw.sort_by(|a, b| a.vx.partial_cmp(&b.vx).unwrap());
    raw.retain(|p| p.vx >= domain.0 - 1e-12 && p.vx <= domain.1 + 1e-12);
    raw.dedup_by(|a, b| a.distance(*b) < 1e-9);
    if raw.len() < 2 {
        return Err(Error::SeedNotFound { vx: domain.0 });
    }

    let resampled = resample_by_arclength(&raw, n_points.max(2));
    let points = attach_tangential_acceleration(&resampled, theta, profile);
    Ok(TvmCurve { theta, points })
}

fn resample_by_arclength(raw: &[VelocityState], n: usize) -> Vec<VelocityState> {
    let mut arclength = Vec::with_capacity(raw.len());
    let mut total = 0.0;
    arclength.push(0.0);
    for w in raw.windows(2) {
        total += w[0].distance(w[1]);
        arclength.push(total);
    }
    if total <= 0.0 {
        return vec![raw[0]; n];
    }

    let mut out = Vec::with_capacity(n);
    let mut cursor = 0;
    for i in 0..n {
        let target = total * i as f64 / (n - 1) as f64;
        while cursor + 1 < arclength.len() - 1 && arclength[cursor + 1] < target {
            cursor += 1;
        }
        let span = arclength[cursor + 1] - arclength[cursor];
        let t = if span > 0.0 {
            ((target - arclength[cursor]) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (a, b) = (raw[cursor], raw[cursor + 1]);
        out.push(VelocityState::new(
            a.vx + t * (b.vx - a.vx),
            a.vz + t * (b.vz - a.vz),
        ));
    }
    out
}

fn attach_tangential_acceleration(
    states: &[VelocityState],
    theta: PitchAngle,
    profile: &CoefficientProfile,
) -> Vec<TvmPoint> {
    let n = states.len();
    (0..n)
        .map(|i| {
            let prev = states[i.saturating_sub(1)];
            let next = states[(i + 1).min(n - 1)];
            let (mut tx, mut tz) = (next.vx - prev.vx, next.vz - prev.vz);
            let norm = tx.hypot(tz);
            if norm > 0.0 {
                tx /= norm;
                tz /= norm;
            }
            let (ax, az) = dynamics::acceleration(states[i], theta, profile);
            TvmPoint {
                state: states[i],
                accel_tangential: ax * tx + az * tz,
            }
        })
        .collect()
}

/// One sample of the `v_z`-nullcline.
#[derive(Debug, Clone, Copy)]
pub struct NullclineSample {
    pub gamma: f64,
    pub v: f64,
    pub state: VelocityState,
}

/// The `v_z = 0` isocline `v = (C_L cos γ + C_D sin γ)^{-1/2}`, a close but
/// inexact approximation to the TVM.
#[derive(Debug, Clone)]
pub struct NullclineCurve {
    pub theta: PitchAngle,
    pub samples: Vec<NullclineSample>,
    /// Glide angles where the nullcline denominator vanishes.
    pub singular_angles: Vec<f64>,
}

/// Samples the nullcline over `gamma_range`, skipping angles where the
/// denominator is nonpositive.
pub fn vz_nullcline(
    theta: PitchAngle,
    profile: &CoefficientProfile,
    gamma_range: (f64, f64),
    n_samples: usize,
) -> Result<NullclineCurve> {
    let n = n_samples.max(2);
    let mut samples = Vec::new();
    for i in 0..n {
        let gamma = gamma_range.0 + (gamma_range.1 - gamma_range.0) * i as f64 / (n - 1) as f64;
        let (cl, cd) = profile.evaluate((gamma + theta.radians()).into());
        let denom = cl * gamma.cos() + cd * gamma.sin();
        if denom <= 0.0 {
            continue;
        }
        let v = denom.powf(-0.5);
        samples.push(NullclineSample {
            gamma,
            v,
            state: VelocityState::new(v * gamma.cos(), -v * gamma.sin()),
        });
    }
    if samples.is_empty() {
        return Err(Error::EmptyBranch);
    }
    Ok(NullclineCurve {
        theta,
        samples,
        singular_angles: nullcline_singularities(theta, profile),
    })
}

/// All γ in `[0, 2π)` where the nullcline denominator
/// `C_L(γ+θ) cos γ + C_D(γ+θ) sin γ` vanishes, i.e. `tan γ = −C_L/C_D`.
pub fn nullcline_singularities(theta: PitchAngle, profile: &CoefficientProfile) -> Vec<f64> {
    let denom = |gamma: f64| {
        let (cl, cd) = profile.evaluate((gamma + theta.radians()).into());
        cl * gamma.cos() + cd * gamma.sin()
    };
    let n = 3600;
    let step = std::f64::consts::TAU / n as f64;
    let mut roots = Vec::new();
    let mut prev = denom(0.0);
    for i in 0..n {
        let gamma = (i + 1) as f64 * step;
        let value = denom(gamma);
        if prev == 0.0 {
            roots.push(i as f64 * step);
        } else if prev * value < 0.0 {
            let mut lo = i as f64 * step;
            let mut hi = gamma;
            let mut d_lo = prev;
            for _ in 0..80 {
                if hi - lo < 1e-13 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let d_mid = denom(mid);
                if d_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if d_lo * d_mid < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    d_lo = d_mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = value;
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    roots
}

/// The TVM stacked over a pitch grid into a surface in `(v_x, v_z, θ)`.
#[derive(Debug, Clone)]
pub struct TvmSurface {
    /// θ-ordered slices.
    pub slices: Vec<TvmCurve>,
    /// Pitches whose slice failed, with the reason; gaps are explicit rather
    /// than interpolated.
    pub gaps: Vec<(PitchAngle, String)>,
}

impl TvmSurface {
    pub fn theta_range(&self) -> Option<(f64, f64)> {
        let first = self.slices.first()?;
        let last = self.slices.last()?;
        Some((first.theta.radians(), last.theta.radians()))
    }

    /// Slice with pitch nearest to `theta`.
    pub fn slice_nearest(&self, theta: PitchAngle) -> Option<&TvmCurve> {
        self.slices.iter().min_by(|a, b| {
            let da = (a.theta.radians() - theta.radians()).abs();
            let db = (b.theta.radians() - theta.radians()).abs();
            da.partial_cmp(&db).unwrap()
        })
    }
}

/// Traces per-θ TVM slices in parallel and stitches them into a surface.
/// Failed slices become explicit gaps.
pub fn extended_tvm_surface(
    profile: &CoefficientProfile,
    theta_grid: &[PitchAngle],
    domain: (f64, f64),
    strategy: TraceStrategy,
    options: &TvmOptions,
) -> TvmSurface {
    let mut grid: Vec<PitchAngle> = theta_grid.to_vec();
    grid.sort_by(|a, b| a.radians().partial_cmp(&b.radians()).unwrap());
    grid.dedup_by(|a, b| a.radians() == b.radians());

    let results: Vec<(PitchAngle, Result<TvmCurve>)> = grid
        .par_iter()
        .map(|&theta| (theta, trace_tvm(theta, profile, domain, strategy, options)))
        .collect();

    let mut slices = Vec::new();
    let mut gaps = Vec::new();
    for (theta, result) in results {
        match result {
            Ok(curve) => slices.push(curve),
            Err(err) => gaps.push((theta, err.to_string())),
        }
    }
    TvmSurface { slices, gaps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{self, flat_plate};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn v_star() -> f64 {
        (1.0_f64 / 2.4).sqrt()
    }

    #[test]
    fn nullcline_reference_values() {
        let p = flat_plate();
        let theta = PitchAngle::from_radians(0.0);
        // Two-sample curve puts samples exactly at γ = 45° and 90°.
        let curve = vz_nullcline(theta, &p, (PI / 4.0, PI / 2.0), 2).unwrap();
        let q = &curve.samples[0];
        assert_relative_eq!(q.v, (1.3 * 2.0_f64.sqrt()).powf(-0.5), epsilon = 1e-12);
        assert_relative_eq!(q.v, 0.737515, epsilon = 1e-5);
        let mid = &curve.samples[1];
        assert_relative_eq!(mid.v, v_star(), epsilon = 1e-12);
        assert!(mid.state.vx.abs() < 1e-12);
        assert_relative_eq!(mid.state.vz, -v_star(), epsilon = 1e-12);

        // Every sample satisfies the zero-vertical-acceleration defining
        // relation.
        let dense = vz_nullcline(theta, &p, (0.05, PI - 0.05), 1801).unwrap();
        for s in dense.samples.iter().step_by(37) {
            let (_, az) = dynamics::acceleration(s.state, theta, &p);
            assert!(az.abs() < 1e-10, "nullcline sample has vdot_z = {az}");
        }
    }

    #[test]
    fn nullcline_singularities_of_flat_plate() {
        let p = flat_plate();
        let theta = PitchAngle::from_radians(0.0);
        let singular = nullcline_singularities(theta, &p);
        // The denominator vanishes where lift vanishes on the horizontal:
        // γ = 0 and γ = 180°.
        assert!(
            singular.iter().any(|g| g.abs() < 1e-6 || (g - std::f64::consts::TAU).abs() < 1e-6),
            "{singular:?}"
        );
        assert!(singular.iter().any(|g| (g - PI).abs() < 1e-6), "{singular:?}");
        // None strictly inside the descending branch (0, π).
        for &g in &singular {
            assert!(
                g < 1e-6 || (g - PI).abs() < 1e-6 || g > PI + 1e-6,
                "unexpected singularity at {g}"
            );
        }
        // The denominator changes sign across each reported angle.
        let denom = |gamma: f64| {
            let (cl, cd) = p.evaluate((gamma + theta.radians()).into());
            cl * gamma.cos() + cd * gamma.sin()
        };
        for &g in &singular {
            assert!(denom(g - 1e-4) * denom(g + 1e-4) < 0.0, "no sign change at {g}");
        }
    }

    #[test]
    fn nullcline_empty_branch() {
        let p = flat_plate();
        // Ascending-flight angles where the denominator is negative.
        assert!(matches!(
            vz_nullcline(PitchAngle::from_radians(0.0), &p, (PI + 0.3, PI + 0.5), 50),
            Err(Error::EmptyBranch)
        ));
    }

    #[test]
    fn origin_classification() {
        let p = flat_plate();
        let theta = PitchAngle::from_degrees(-5.0);
        let opts = TvmOptions::default();
        assert_eq!(
            classify_origin(VelocityState::new(0.2, 0.5), theta, &p, &opts),
            Origin::Above
        );
        assert_eq!(
            classify_origin(VelocityState::new(0.2, -2.5), theta, &p, &opts),
            Origin::Below
        );
        let eq = &crate::equilibria::find_equilibria(theta, &p)[0];
        assert_eq!(
            classify_origin(eq.state, theta, &p, &opts),
            Origin::Indeterminate
        );
    }

    #[test]
    fn bisect_vertical_axis_slice() {
        let p = flat_plate();
        let theta = PitchAngle::from_radians(0.0);
        let opts = TvmOptions::default();
        // The vx = 0 axis is invariant by left-right symmetry; the TVM
        // crossing is the vertical-descent equilibrium. The decision window
        // (|v_z| beyond 3 within 5 time units) leaves an indeterminate band
        // of width ~3·exp(−|λ_ss|·5) ≈ 1e-6 around the manifold, which
        // bounds the localization accuracy regardless of the interval
        // tolerance.
        let hit = bisect_slice(0.0, (-2.5, -0.1), theta, &p, &opts).unwrap();
        assert!(
            (hit.vz + v_star()).abs() < 5e-6,
            "expected the vertical equilibrium, got {hit:?}"
        );

        assert!(matches!(
            bisect_slice(0.0, (-2.5, -1.0), theta, &p, &opts),
            Err(Error::InvalidBracket { .. })
        ));

        // Tolerance controls the bracket width.
        let coarse = TvmOptions { tol: 1e-5, ..opts };
        let hit_coarse = bisect_slice(0.0, (-2.5, -0.1), theta, &p, &coarse).unwrap();
        assert!((hit_coarse.vz + v_star()).abs() < 1e-4);
    }

    #[test]
    fn strategies_agree_against_direct_bisection() {
        let p = flat_plate();
        let theta = PitchAngle::from_degrees(-5.0);
        let opts = TvmOptions::default();
        let sweep = trace_tvm(theta, &p, (-1.0, 1.0), TraceStrategy::OutsideInSweep, &opts).unwrap();
        let slices =
            trace_tvm(theta, &p, (-1.0, 1.0), TraceStrategy::PerSliceBisection, &opts).unwrap();
        for k in 0..21 {
            let vx = -0.95 + 1.9 * k as f64 / 20.0;
            let truth = bisect_slice(vx, opts.vz_bracket, theta, &p, &opts).unwrap();
            for (curve, name) in [(&sweep, "sweep"), (&slices, "slices")] {
                let vz = curve.vz_at(vx).unwrap();
                assert!(
                    (vz - truth.vz).abs() < 2e-10 + 1e-4,
                    "{name} strategy off at vx={vx}: {vz} vs {}",
                    truth.vz
                );
            }
        }
    }

    #[test]
    fn curve_attracts_and_holds_trajectories() {
        use rand::{Rng, SeedableRng};
        let p = flat_plate();
        let theta = PitchAngle::from_degrees(-5.0);
        let opts = TvmOptions::default();
        let curve = trace_tvm(theta, &p, (-1.5, 1.5), TraceStrategy::OutsideInSweep, &opts).unwrap();

        let integrate_options = IntegrateOptions::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let ic = VelocityState::new(rng.gen_range(-1.5..1.5), rng.gen_range(-2.0..0.5));
            let traj = dynamics::integrate(ic, theta, &p, (0.0, 10.0), &integrate_options);
            let end = traj.final_state();
            assert!(
                curve.distance_to(end) < 0.05,
                "trajectory from {ic:?} ended {:.3} away",
                curve.distance_to(end)
            );
        }

        // Invariance: a forward run from a curve sample stays on the curve.
        let start = curve.points[curve.points.len() / 3].state;
        let traj = dynamics::integrate(start, theta, &p, (0.0, 10.0), &integrate_options);
        let mut t = 0.0;
        while t < traj.final_time() {
            let d = curve.distance_to(traj.sample(t));
            assert!(d < 0.02, "left the curve by {d} at t={t}");
            t += 0.25;
        }
    }

    #[test]
    fn saddle_arcs_connect_stable_glides() {
        let p = profiles::high_lift();
        let theta = PitchAngle::from_radians(0.0);
        let eqs = crate::equilibria::find_equilibria(theta, &p);
        assert_eq!(eqs.len(), 3);
        let saddle = &eqs[1];
        let arcs = unstable_manifold_expansion(saddle, theta, &p, &TvmOptions::default()).unwrap();
        let mut endpoints: Vec<VelocityState> = arcs.iter().map(|a| a.final_state()).collect();
        endpoints.sort_by(|a, b| a.vx.partial_cmp(&b.vx).unwrap());
        // Heteroclinic structure: one arc per stable equilibrium.
        assert!(endpoints[0].distance(eqs[2].state) < 1e-3 || endpoints[0].distance(eqs[0].state) < 1e-3);
        assert!(endpoints[1].distance(eqs[0].state) < 1e-3 || endpoints[1].distance(eqs[2].state) < 1e-3);
        assert!(endpoints[0].distance(endpoints[1]) > 0.1, "arcs must separate");

        // Seeding from a stable node is rejected.
        assert!(matches!(
            unstable_manifold_expansion(&eqs[0], theta, &p, &TvmOptions::default()),
            Err(Error::NotASaddle)
        ));
    }

    #[test]
    fn distance_to_polyline() {
        let mk = |vx: f64, vz: f64| TvmPoint {
            state: VelocityState::new(vx, vz),
            accel_tangential: 0.0,
        };
        let curve = TvmCurve {
            theta: PitchAngle::from_radians(0.0),
            points: vec![mk(0.0, 0.0), mk(1.0, 0.0), mk(2.0, 0.0)],
        };
        // A vertex.
        assert_eq!(distance_to_curve(VelocityState::new(1.0, 0.0), &curve), 0.0);
        // Normal offset to a long straight segment.
        assert_relative_eq!(
            distance_to_curve(VelocityState::new(0.5, 0.1), &curve),
            0.1,
            epsilon = 1e-14
        );
        // Symmetric points on either side give equal distances.
        let up = distance_to_curve(VelocityState::new(1.3, 0.25), &curve);
        let down = distance_to_curve(VelocityState::new(1.3, -0.25), &curve);
        assert_relative_eq!(up, down, epsilon = 1e-14);
        // And opposite signed offsets.
        assert!(curve.signed_offset(VelocityState::new(1.3, 0.25))
            * curve.signed_offset(VelocityState::new(1.3, -0.25))
            < 0.0);
    }

    #[test]
    fn single_theta_surface_is_one_slice() {
        let p = flat_plate();
        let grid = [PitchAngle::from_degrees(-5.0)];
        let surface = extended_tvm_surface(
            &p,
            &grid,
            (-1.0, 1.0),
            TraceStrategy::OutsideInSweep,
            &TvmOptions::default(),
        );
        assert_eq!(surface.slices.len(), 1);
        assert!(surface.gaps.is_empty());
        let direct = trace_tvm(
            PitchAngle::from_degrees(-5.0),
            &p,
            (-1.0, 1.0),
            TraceStrategy::OutsideInSweep,
            &TvmOptions::default(),
        )
        .unwrap();
        assert!(hausdorff_distance(&surface.slices[0], &direct) < 1e-12);
    }
}
