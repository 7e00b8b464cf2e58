//! Lift and drag coefficient functions of angle of attack.
//!
//! A [`CoefficientProfile`] is either the analytic flat-plate model or a
//! tabulated set of measurements interpolated by a monotone cubic Hermite
//! spline. Declared shape symmetries extend partially measured tables to the
//! full circle; angles that no symmetry fold reaches fall back to clamped
//! end-value extension and set a warning flag on the profile.
//!
//! Angles in files and at the CLI boundary are degrees; everything in here is
//! radians.

mod interp;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use interp::MonotoneCubic;

/// Endpoint slack when testing whether a folded angle lies in the stored
/// table domain.
const DOMAIN_EPS: f64 = 1e-9;
/// Spacing of the construction-time validation grid (0.1 degree).
const VALIDATION_STEP: f64 = 0.1 * PI / 180.0;
/// Minimum number of table rows needed for a trustworthy C¹ interpolant.
const MIN_TABLE_ROWS: usize = 4;

/// Angle of attack, canonicalized into `[0, 2π)`.
///
/// Profiles with 180° rotational symmetry reduce further into `[0, π)` at
/// evaluation time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleOfAttack {
    radians: f64,
}

impl AngleOfAttack {
    pub fn from_radians(radians: f64) -> Self {
        Self {
            radians: radians.rem_euclid(TAU),
        }
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Self::from_radians(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.radians
    }
}

impl From<f64> for AngleOfAttack {
    fn from(radians: f64) -> Self {
        Self::from_radians(radians)
    }
}

/// Shape symmetries and the coefficient symmetries they imply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct SymmetryClass {
    /// Same shape after rotating 180°: both coefficients have period π.
    pub rotational_180: bool,
    /// Same drag pitched up or down: C_L odd and C_D even about α = 0,
    /// forcing C_L(0) = 0.
    pub top_bottom: bool,
    /// Top-bottom symmetry rotated by 90°: C_L odd and C_D even about
    /// α = 90°, forcing C_L(90°) = 0.
    pub left_right: bool,
}

impl SymmetryClass {
    pub fn all() -> Self {
        Self {
            rotational_180: true,
            top_bottom: true,
            left_right: true,
        }
    }

    pub fn none() -> Self {
        Self::default()
    }

    /// Coefficient period implied by the symmetries.
    pub fn period(&self) -> f64 {
        if self.rotational_180 {
            PI
        } else {
            TAU
        }
    }
}

/// How a query angle was mapped into the stored table domain.
#[derive(Debug, Clone, Copy)]
pub struct FoldedAngle {
    /// Angle inside the stored domain (may be negative for tables measured
    /// through zero, e.g. −10°..60°).
    pub alpha: f64,
    /// −1 when an odd reflection was applied; multiplies the stored lift.
    pub lift_sign: f64,
    /// dᾱ/dα of the fold map (±1); multiplies stored derivatives.
    pub(crate) slope: f64,
    /// True when no symmetry fold reached the domain and the angle was
    /// clamped to the nearest endpoint.
    pub(crate) clamped: bool,
}

/// Coefficients and their α-derivatives at one angle of attack.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientSlopes {
    pub lift: f64,
    pub drag: f64,
    pub dlift: f64,
    pub ddrag: f64,
}

#[derive(Debug, Clone)]
enum ProfileData {
    FlatPlate,
    Table {
        lift: MonotoneCubic,
        drag: MonotoneCubic,
    },
}

/// Lift and drag as functions of angle of attack.
///
/// Immutable after construction and safe to share across worker threads.
#[derive(Debug, Clone)]
pub struct CoefficientProfile {
    name: String,
    data: ProfileData,
    symmetry: SymmetryClass,
    /// Stored domain in radians; the full period for analytic profiles.
    domain: (f64, f64),
    measured_range: Option<(f64, f64)>,
    clamped_extension: bool,
}

impl fmt::Display for CoefficientProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// The analytic flat-plate model: `C_D = 1.4 − cos 2α`, `C_L = 1.2 sin 2α`.
pub fn flat_plate() -> CoefficientProfile {
    CoefficientProfile {
        name: "flat-plate".to_string(),
        data: ProfileData::FlatPlate,
        symmetry: SymmetryClass::all(),
        domain: (0.0, PI),
        measured_range: None,
        clamped_extension: false,
    }
}

/// Builds a profile from tabulated `(alpha_deg, C_L, C_D)` rows.
///
/// Rows must be strictly increasing in α with positive drag throughout; the
/// declared symmetries extend the table to the full circle and construction
/// verifies the extended drag stays positive on a dense grid.
pub fn load_table(
    rows: &[(f64, f64, f64)],
    symmetry: SymmetryClass,
    measured_range_deg: Option<(f64, f64)>,
) -> Result<CoefficientProfile> {
    load_named_table("table", rows, symmetry, measured_range_deg)
}

pub fn load_named_table(
    name: &str,
    rows: &[(f64, f64, f64)],
    symmetry: SymmetryClass,
    measured_range_deg: Option<(f64, f64)>,
) -> Result<CoefficientProfile> {
    if rows.len() < MIN_TABLE_ROWS {
        return Err(Error::InsufficientRows {
            min: MIN_TABLE_ROWS,
            got: rows.len(),
        });
    }
    for (i, pair) in rows.windows(2).enumerate() {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::NonMonotoneAlpha { row: i + 1 });
        }
    }
    for (i, &(alpha_deg, _, cd)) in rows.iter().enumerate() {
        if cd <= 0.0 {
            return Err(Error::NonPositiveDrag {
                context: format!("row {i} (alpha = {alpha_deg} deg) has C_D = {cd}"),
            });
        }
    }

    let xs: Vec<f64> = rows.iter().map(|r| r.0.to_radians()).collect();
    let cls: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let cds: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let lift = MonotoneCubic::fit(&xs, &cls);
    let drag = MonotoneCubic::fit(&xs, &cds);
    let domain = (xs[0], *xs.last().unwrap());

    let mut profile = CoefficientProfile {
        name: name.to_string(),
        data: ProfileData::Table { lift, drag },
        symmetry,
        domain,
        measured_range: Some(
            measured_range_deg
                .map(|(lo, hi)| (lo.to_radians(), hi.to_radians()))
                .unwrap_or(domain),
        ),
        clamped_extension: false,
    };

    // Coverage and positivity sweep over one full period of the extended
    // profile.
    let period = symmetry.period();
    let steps = (period / VALIDATION_STEP).ceil() as usize;
    let mut needs_clamp = false;
    for i in 0..steps {
        let alpha = i as f64 * period / steps as f64;
        let fold = profile.fold(alpha);
        needs_clamp |= fold.clamped;
        let (_, cd) = profile.evaluate(AngleOfAttack::from_radians(alpha));
        if cd <= 0.0 {
            return Err(Error::NonPositiveDrag {
                context: format!(
                    "extended table interpolates to C_D = {cd} at alpha = {:.2} deg",
                    alpha.to_degrees()
                ),
            });
        }
    }
    profile.clamped_extension = needs_clamp;
    Ok(profile)
}

impl CoefficientProfile {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symmetry(&self) -> SymmetryClass {
        self.symmetry
    }

    /// Measured α range in radians, if the profile came from a table.
    pub fn measured_range(&self) -> Option<(f64, f64)> {
        self.measured_range
    }

    /// True when some angles are only reachable by clamped end-value
    /// extension rather than a symmetry fold.
    pub fn uses_clamped_extension(&self) -> bool {
        self.clamped_extension
    }

    /// `(C_L, C_D)` at the given angle of attack.
    pub fn evaluate(&self, alpha: AngleOfAttack) -> (f64, f64) {
        let c = self.evaluate_with_derivatives(alpha);
        (c.lift, c.drag)
    }

    /// Coefficients plus their α-derivatives.
    pub fn evaluate_with_derivatives(&self, alpha: AngleOfAttack) -> CoefficientSlopes {
        match &self.data {
            ProfileData::FlatPlate => {
                let a = alpha.radians();
                let (s, c) = (2.0 * a).sin_cos();
                CoefficientSlopes {
                    lift: 1.2 * s,
                    drag: 1.4 - c,
                    dlift: 2.4 * c,
                    ddrag: 2.0 * s,
                }
            }
            ProfileData::Table { lift, drag } => {
                let fold = self.fold(alpha.radians());
                let (cl, dcl) = lift.value_and_derivative(fold.alpha);
                let (cd, dcd) = drag.value_and_derivative(fold.alpha);
                let deriv_scale = if fold.clamped { 0.0 } else { fold.slope };
                CoefficientSlopes {
                    lift: fold.lift_sign * cl,
                    drag: cd,
                    dlift: fold.lift_sign * deriv_scale * dcl,
                    ddrag: deriv_scale * dcd,
                }
            }
        }
    }

    /// Lift-to-drag ratio and its α-derivative. Well defined everywhere
    /// because C_D > 0 is enforced at construction.
    pub fn ratio_and_derivative(&self, alpha: AngleOfAttack) -> (f64, f64) {
        let c = self.evaluate_with_derivatives(alpha);
        let ratio = c.lift / c.drag;
        let ratio_prime = (c.dlift * c.drag - c.lift * c.ddrag) / (c.drag * c.drag);
        (ratio, ratio_prime)
    }

    /// Maps a raw angle into the stored domain using only declared symmetry
    /// folds, returning the folded angle and the lift sign multiplier.
    ///
    /// Errors with [`Error::OutOfMeasuredRange`] when no fold chain reaches
    /// the stored domain, which can only happen for partial tables.
    pub fn extend_by_symmetry(&self, alpha_raw: f64) -> Result<FoldedAngle> {
        let fold = self.fold(alpha_raw);
        if fold.clamped {
            Err(Error::OutOfMeasuredRange {
                alpha_deg: alpha_raw.to_degrees(),
            })
        } else {
            Ok(fold)
        }
    }

    /// Deterministic fingerprint of the profile contents, for run manifests.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv1a::new();
        h.write(self.name.as_bytes());
        h.write(&[
            self.symmetry.rotational_180 as u8,
            self.symmetry.top_bottom as u8,
            self.symmetry.left_right as u8,
        ]);
        let mut alpha = 0.0;
        while alpha < self.symmetry.period() {
            let (cl, cd) = self.evaluate(AngleOfAttack::from_radians(alpha));
            h.write(&cl.to_bits().to_le_bytes());
            h.write(&cd.to_bits().to_le_bytes());
            alpha += 0.25_f64.to_radians();
        }
        h.finish()
    }

    fn fold(&self, alpha_raw: f64) -> FoldedAngle {
        let period = self.symmetry.period();
        let (lo, hi) = self.domain;
        let reduced = alpha_raw.rem_euclid(period);

        let mut candidates: Vec<(f64, f64, f64)> = vec![(reduced, 1.0, 1.0)];
        if self.symmetry.top_bottom {
            candidates.push((-reduced, -1.0, -1.0));
        }
        if self.symmetry.left_right {
            candidates.push((PI - reduced, -1.0, -1.0));
        }
        if self.symmetry.top_bottom && self.symmetry.left_right && !self.symmetry.rotational_180 {
            // Composition of the two reflections: translation by 180°.
            candidates.push((reduced - PI, 1.0, 1.0));
        }

        for &(image, lift_sign, slope) in &candidates {
            if let Some(alpha) = shift_into(image, lo, hi, period) {
                return FoldedAngle {
                    alpha,
                    lift_sign,
                    slope,
                    clamped: false,
                };
            }
        }

        // Clamped end-value extension: take the fold image closest to the
        // stored domain and pin it to the nearer endpoint.
        let mut best: Option<(f64, FoldedAngle)> = None;
        for &(image, lift_sign, slope) in &candidates {
            let (dist, clamped_alpha) = clamp_distance(image, lo, hi, period);
            if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                best = Some((
                    dist,
                    FoldedAngle {
                        alpha: clamped_alpha,
                        lift_sign,
                        slope,
                        clamped: true,
                    },
                ));
            }
        }
        best.expect("candidate list is never empty").1
    }
}

/// Shifts `alpha` by whole periods into `[lo, hi]` if possible.
fn shift_into(alpha: f64, lo: f64, hi: f64, period: f64) -> Option<f64> {
    for k in -2..=2 {
        let a = alpha + f64::from(k) * period;
        if a >= lo - DOMAIN_EPS && a <= hi + DOMAIN_EPS {
            return Some(a.clamp(lo, hi));
        }
    }
    None
}

/// Distance from the periodic orbit of `alpha` to `[lo, hi]` plus the nearest
/// endpoint.
fn clamp_distance(alpha: f64, lo: f64, hi: f64, period: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, lo);
    for k in -2..=2 {
        let a = alpha + f64::from(k) * period;
        let (dist, endpoint) = if a < lo {
            (lo - a, lo)
        } else if a > hi {
            (a - hi, hi)
        } else {
            (0.0, a)
        };
        if dist < best.0 {
            best = (dist, endpoint);
        }
    }
    best
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Self(0xcbf29ce484222325)
    }
    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }
    fn finish(&self) -> u64 {
        self.0
    }
}

/// Tabulates an analytic coefficient pair on `[lo_deg, hi_deg]` at the given
/// spacing. Used by the built-in synthetic shapes and by tests that compare
/// the table pipeline against an analytic oracle.
pub fn tabulate(
    name: &str,
    coeffs: impl Fn(f64) -> (f64, f64),
    lo_deg: f64,
    hi_deg: f64,
    step_deg: f64,
    symmetry: SymmetryClass,
) -> Result<CoefficientProfile> {
    let mut rows = Vec::new();
    let n = ((hi_deg - lo_deg) / step_deg).round() as usize;
    for i in 0..=n {
        let alpha_deg = lo_deg + i as f64 * step_deg;
        let (cl, cd) = coeffs(alpha_deg.to_radians());
        rows.push((alpha_deg, cl, cd));
    }
    load_named_table(name, &rows, symmetry, None)
}

/// Synthetic high-lift shape with a steep lift-to-drag peak; its equilibrium
/// criterion has three roots near zero pitch, giving a saddle between two
/// stable glides.
pub fn high_lift() -> CoefficientProfile {
    tabulate(
        "high-lift",
        |a| {
            (
                2.8 * (2.0 * a).sin() + 0.8 * (4.0 * a).sin(),
                1.2 - (2.0 * a).cos() + 0.25 * (1.0 - (4.0 * a).cos()),
            )
        },
        0.0,
        180.0,
        2.0,
        SymmetryClass::all(),
    )
    .expect("builtin high-lift table is valid")
}

/// Synthetic cambered shape with no symmetry, tabulated over the full circle.
pub fn cambered() -> CoefficientProfile {
    tabulate(
        "cambered",
        |a| {
            (
                1.1 * (2.0 * a).sin() + 0.4 * a.sin() + 0.1,
                1.5 - 0.9 * (2.0 * a).cos() + 0.2 * a.sin(),
            )
        },
        0.0,
        360.0,
        2.0,
        SymmetryClass::none(),
    )
    .expect("builtin cambered table is valid")
}

/// Synthetic bluff shape: weak lift, heavy drag, tabulated only on [0°, 90°]
/// so every other angle goes through a symmetry fold.
pub fn bluff() -> CoefficientProfile {
    tabulate(
        "bluff",
        |a| (0.6 * (2.0 * a).sin(), 2.0 - 0.8 * (2.0 * a).cos()),
        0.0,
        90.0,
        2.0,
        SymmetryClass::all(),
    )
    .expect("builtin bluff table is valid")
}

/// Looks up a built-in profile by name.
pub fn builtin(name: &str) -> Option<CoefficientProfile> {
    match name {
        "flat-plate" => Some(flat_plate()),
        "high-lift" => Some(high_lift()),
        "cambered" => Some(cambered()),
        "bluff" => Some(bluff()),
        _ => None,
    }
}

pub const BUILTIN_NAMES: &[&str] = &["flat-plate", "high-lift", "cambered", "bluff"];

/// Reads a coefficient table file: CSV with header `alpha_deg,cl,cd`,
/// comment lines starting with `#`, and optional metadata comments
/// `# sym_rot180: true`, `# sym_topbottom: true`, `# sym_leftright: true`,
/// `# measured_range_deg: <lo> <hi>`. Symmetry flags passed by the caller
/// override file metadata.
pub fn load_table_csv(
    path: &Path,
    symmetry_override: Option<SymmetryClass>,
) -> Result<CoefficientProfile> {
    let text = std::fs::read_to_string(path)?;
    let display = path.display().to_string();
    let mut rows = Vec::new();
    let mut file_symmetry = SymmetryClass::none();
    let mut measured_range = None;
    let mut saw_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some((key, value)) = comment.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "sym_rot180" => file_symmetry.rotational_180 = parse_bool(value),
                    "sym_topbottom" => file_symmetry.top_bottom = parse_bool(value),
                    "sym_leftright" => file_symmetry.left_right = parse_bool(value),
                    "measured_range_deg" => {
                        let parts: Vec<f64> = value
                            .split_whitespace()
                            .filter_map(|t| t.parse().ok())
                            .collect();
                        if parts.len() == 2 {
                            measured_range = Some((parts[0], parts[1]));
                        }
                    }
                    _ => {}
                }
            }
            continue;
        }
        if !saw_header {
            saw_header = true;
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["alpha_deg", "cl", "cd"] {
                return Err(Error::TableParse {
                    path: display,
                    line: idx + 1,
                    message: format!("expected header `alpha_deg,cl,cd`, got `{line}`"),
                });
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::TableParse {
                path: display,
                line: idx + 1,
                message: format!("expected 3 comma-separated fields, got {}", fields.len()),
            });
        }
        let mut parsed = [0.0f64; 3];
        for (slot, field) in parsed.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| Error::TableParse {
                path: display.clone(),
                line: idx + 1,
                message: format!("could not parse `{field}` as a number"),
            })?;
        }
        rows.push((parsed[0], parsed[1], parsed[2]));
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "table".to_string());
    load_named_table(
        &name,
        &rows,
        symmetry_override.unwrap_or(file_symmetry),
        measured_range,
    )
}

fn parse_bool(value: &str) -> bool {
    matches!(value, "true" | "1" | "yes")
}
