//! Residuals for the differential conditions satisfied by the catalog and
//! constructed surfaces: the curvature equation `lap log(1-K) = cK`, the
//! flat-metric curvature of `(1-K)^{1/3} ds^2`, holomorphicity of the order
//! coefficients, constancy of the ellipse eccentricities, and the Laplace
//! identities tying form norms to bundle curvatures.
//!
//! All Laplacians are finite differences of pointwise-exact jet quantities;
//! jets are never nested.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::frames::{
    gauss_curvature, hopf_coefficient, invariants_at, osculating_flag, InvariantRecord, OrderBlock,
};
use crate::surfaces::{eval_jet, Grid, ImmersionSpec};
use crate::{Error, Result};

/// Default finite-difference step in parameter units.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Richardson extrapolation levels applied on top of the second-order stencil.
pub const RICHARDSON_LEVELS: u32 = 1;

/// Floor on 1 - K below which a point counts as a curvature-one locus.
pub const CURVATURE_ONE_FLOOR: f64 = 1e-8;

/// Relative size below which an order coefficient counts as vanishing.
pub const COEFFICIENT_ZERO_REL: f64 = 1e-6;

/// Relative floor for the argument of the logarithm in the split variants.
pub const LOG_ARGUMENT_REL_FLOOR: f64 = 1e-9;

/// Laplace operator of the metric `F |dz|^2` by finite differences.
///
/// Uses the five-point second difference at steps `h` and `h/2` with one
/// Richardson step, then divides by the conformal factor; `metric_factor` is
/// F at the point (pass 1 for the Euclidean plane). Any evaluation error on
/// the nine-point stencil is reported as [`Error::EvaluationFailure`] naming
/// the failing point.
///
/// # Panics
///
/// Panics if `h` is not positive.
pub fn laplacian_fd<E>(field: &E, metric_factor: f64, point: (f64, f64), h: f64) -> Result<f64>
where
    E: Fn((f64, f64)) -> Result<f64>,
{
    assert!(h > 0.0, "step must be positive");
    let eval = |q: (f64, f64)| -> Result<f64> {
        field(q)
            .map_err(|e| Error::EvaluationFailure(format!("stencil point ({}, {}): {e}", q.0, q.1)))
    };
    let (x, y) = point;
    let center = eval(point)?;
    let ring = |hh: f64| -> Result<f64> {
        Ok(eval((x + hh, y))? + eval((x - hh, y))? + eval((x, y + hh))? + eval((x, y - hh))?)
    };
    let coarse = (ring(h)? - 4.0 * center) / (h * h);
    let half = 0.5 * h;
    let fine = (ring(half)? - 4.0 * center) / (half * half);
    Ok((4.0 * fine - coarse) / (3.0 * metric_factor))
}

/// Conformal factor and Gauss curvature from one jet evaluation.
fn metric_at(spec: &ImmersionSpec, point: (f64, f64)) -> Result<(f64, f64)> {
    let jv = eval_jet(spec, point, 3)?;
    let f = osculating_flag(&jv, 0)?.conformal_factor;
    let k = gauss_curvature(&jv)?;
    Ok((f, k))
}

/// Residual of the curvature equation: `lap log(1-K) - cK` at the point.
///
/// # Panics
///
/// Panics if `h` is not positive.
pub fn ricci_residual_with_step(
    spec: &ImmersionSpec,
    point: (f64, f64),
    c: f64,
    h: f64,
) -> Result<f64> {
    let (f, k) = metric_at(spec, point)?;
    if 1.0 - k <= CURVATURE_ONE_FLOOR {
        return Err(Error::CurvatureOne);
    }
    let field = |q: (f64, f64)| -> Result<f64> {
        let kq = gauss_curvature(&eval_jet(spec, q, 3)?)?;
        let v = 1.0 - kq;
        if v <= 0.0 {
            return Err(Error::CurvatureOne);
        }
        Ok(v.ln())
    };
    let lap = laplacian_fd(&field, f, point, h)?;
    Ok(lap - c * k)
}

/// [`ricci_residual_with_step`] at the default step.
pub fn ricci_residual(spec: &ImmersionSpec, point: (f64, f64), c: f64) -> Result<f64> {
    ricci_residual_with_step(spec, point, c, DEFAULT_STEP)
}

/// Gauss curvature of the conformal metric `(1-K)^{1/3} ds^2`, which is
/// `(1-K)^{-1/3} (K - lap log(1-K) / 6)`.
///
/// Computed as `-(1-K)^{-1/3}/6` times [`ricci_residual_with_step`] with
/// c = 6, so the two residuals vanish together exactly.
pub fn flat_metric_residual_with_step(
    spec: &ImmersionSpec,
    point: (f64, f64),
    h: f64,
) -> Result<f64> {
    let (_, k) = metric_at(spec, point)?;
    let r6 = ricci_residual_with_step(spec, point, 6.0, h)?;
    Ok(-(1.0 - k).powf(-1.0 / 3.0) / 6.0 * r6)
}

/// [`flat_metric_residual_with_step`] at the default step.
pub fn flat_metric_residual(spec: &ImmersionSpec, point: (f64, f64)) -> Result<f64> {
    flat_metric_residual_with_step(spec, point, DEFAULT_STEP)
}

/// Central-difference conjugate derivative (d/dx + i d/dy)/2 of a complex
/// field, together with the largest field magnitude seen on the stencil.
fn dbar_central<E>(field: &E, point: (f64, f64), h: f64) -> Result<(Complex64, f64)>
where
    E: Fn((f64, f64)) -> Result<Complex64>,
{
    let (x, y) = point;
    let east = field((x + h, y))?;
    let west = field((x - h, y))?;
    let north = field((x, y + h))?;
    let south = field((x, y - h))?;
    let dx = (east - west) / (2.0 * h);
    let dy = (north - south) / (2.0 * h);
    let stencil_max = [east, west, north, south]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok((0.5 * (dx + Complex64::i() * dy), stencil_max))
}

/// Normalized antiholomorphic derivative of the order-r coefficient.
///
/// The numerator is the central-difference conjugate derivative of the
/// coordinate coefficient of the order-r quadratic differential; the
/// denominator is the local coefficient scale, taken as the larger of the
/// stencil magnitude and the squared length of the level-r top derivative so
/// that identically vanishing coefficients report noise against their
/// natural scale. Degenerate flags on the stencil propagate unchanged.
///
/// # Panics
///
/// Panics if `r` is zero or `h` is not positive.
pub fn holomorphicity_residual(
    spec: &ImmersionSpec,
    r: usize,
    point: (f64, f64),
    h: f64,
) -> Result<f64> {
    assert!(r >= 1, "order must be at least 1");
    assert!(h > 0.0, "step must be positive");
    let jet_order = r + 1;
    let coeff = |q: (f64, f64)| -> Result<Complex64> {
        hopf_coefficient(&eval_jet(spec, q, jet_order)?, r)
    };
    let flag = osculating_flag(&eval_jet(spec, point, jet_order)?, r)?;
    let top = &flag.levels[r - 1].top_derivative;
    let center: Complex64 = top.iter().map(|c| c * c).sum();
    let top_scale: f64 = top.iter().map(|c| c.norm_sqr()).sum();
    let (dbar, stencil_max) = dbar_central(&coeff, point, h)?;
    let denom = stencil_max.max(center.norm()).max(top_scale) + f64::EPSILON;
    Ok(dbar.norm() / denom)
}

/// Range of the order-r eccentricity over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct EccentricityReport {
    pub order: usize,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Sweeps the order-r eccentricity over the grid; points where the flag
/// degenerates are skipped and counted, never errors. When every point is
/// skipped the range fields are zero.
pub fn eccentricity_constancy(
    spec: &ImmersionSpec,
    r: usize,
    grid: &Grid,
) -> Result<EccentricityReport> {
    assert!(r >= 1, "order must be at least 1");
    let jet_order = (r + 1).max(3);
    let values = grid
        .points()
        .par_iter()
        .map(|&p| match invariants_at(spec, p, r, jet_order) {
            Ok(rec) => Ok(Some(rec.orders[r - 1].ecc)),
            Err(Error::DegenerateFlag(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut evaluated = 0usize;
    for v in values.iter().flatten() {
        min = min.min(*v);
        max = max.max(*v);
        evaluated += 1;
    }
    if evaluated == 0 {
        min = 0.0;
        max = 0.0;
    }
    Ok(EccentricityReport {
        order: r,
        min,
        max,
        spread: max - min,
        evaluated,
        skipped: values.len() - evaluated,
    })
}

/// Selects which Laplace identity to evaluate at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityVariant {
    /// `lap log |alpha_{s+1}|^2 = 2((s+1)K - K_s^*)`, valid below the top
    /// constant-eccentricity order regardless of the order coefficient.
    General,
    /// `lap log(|alpha_{s+1}|^2 + 2^s K_s^perp) = 2((s+1)K - K_s^*)`; needs
    /// a nonvanishing order-s coefficient, that is a noncircular ellipse.
    SplitPlus,
    /// `lap log(|alpha_{s+1}|^2 - 2^s K_s^perp) = 2((s+1)K + K_s^*)`; same
    /// hypothesis as [`IdentityVariant::SplitPlus`].
    SplitMinus,
    /// `lap log |alpha_{s+1}|^2 = 2((s+1)K - K_s^*)` under a vanishing
    /// order-s coefficient, that is a circular ellipse.
    Circular,
}

fn identity_quantity(block: &OrderBlock, s: usize, variant: IdentityVariant) -> f64 {
    match variant {
        IdentityVariant::General | IdentityVariant::Circular => block.norm_sq,
        IdentityVariant::SplitPlus => block.norm_sq + 2f64.powi(s as i32) * block.k_perp,
        IdentityVariant::SplitMinus => block.norm_sq - 2f64.powi(s as i32) * block.k_perp,
    }
}

/// Size of the bilinear order coefficient relative to the Hermitian norm of
/// the top derivative: 1 for a segment ellipse, 0 for a circle.
fn coefficient_rel(block: &OrderBlock, conformal_factor: f64, s: usize) -> f64 {
    let hermitian_norm_sq =
        block.norm_sq * conformal_factor.powi(s as i32 + 1) / 2f64.powi(s as i32 + 2);
    if hermitian_norm_sq > 0.0 {
        block.phi_coeff.norm() / hermitian_norm_sq
    } else {
        0.0
    }
}

fn identity_center(spec: &ImmersionSpec, s: usize, point: (f64, f64)) -> Result<InvariantRecord> {
    match invariants_at(spec, point, s, (s + 2).max(3)) {
        Ok(rec) => Ok(rec),
        Err(Error::DegenerateFlag(level)) => Err(Error::VariantInapplicable(format!(
            "flag degenerates at level {level}, no order-{s} data at this point"
        ))),
        Err(e) => Err(e),
    }
}

fn identity_residual_at(
    spec: &ImmersionSpec,
    s: usize,
    point: (f64, f64),
    variant: IdentityVariant,
    h: f64,
    center: &InvariantRecord,
) -> Result<f64> {
    let block = &center.orders[s - 1];
    let f = center.conformal_factor;
    let k = center.gauss_curvature;
    let coeff_rel = coefficient_rel(block, f, s);
    match variant {
        IdentityVariant::SplitPlus | IdentityVariant::SplitMinus => {
            if coeff_rel <= COEFFICIENT_ZERO_REL {
                return Err(Error::VariantInapplicable(format!(
                    "order-{s} coefficient vanishes (relative size {coeff_rel:.2e}); \
                     the split variants need a noncircular ellipse"
                )));
            }
        }
        IdentityVariant::Circular => {
            if coeff_rel > COEFFICIENT_ZERO_REL {
                return Err(Error::VariantInapplicable(format!(
                    "order-{s} coefficient is nonzero (relative size {coeff_rel:.2e}); \
                     the circular variant needs it to vanish"
                )));
            }
        }
        IdentityVariant::General => {}
    }
    let q_center = identity_quantity(block, s, variant);
    if q_center <= LOG_ARGUMENT_REL_FLOOR * block.norm_sq {
        return Err(Error::VariantInapplicable(format!(
            "log argument {q_center:.3e} is below the relative floor at this point"
        )));
    }
    let k_star = block
        .k_star
        .ok_or(Error::DivisionByDegenerateNormalCurvature)?;

    let stencil_order = (s + 1).max(3);
    let field = |q: (f64, f64)| -> Result<f64> {
        let rec = invariants_at(spec, q, s, stencil_order)?;
        let v = identity_quantity(&rec.orders[s - 1], s, variant);
        if v <= 0.0 {
            return Err(Error::EvaluationFailure(format!(
                "nonpositive log argument {v:.3e}"
            )));
        }
        Ok(v.ln())
    };
    let left = laplacian_fd(&field, f, point, h)?;
    let order_factor = (s + 1) as f64;
    let right = match variant {
        IdentityVariant::General | IdentityVariant::Circular | IdentityVariant::SplitPlus => {
            2.0 * (order_factor * k - k_star)
        }
        IdentityVariant::SplitMinus => 2.0 * (order_factor * k + k_star),
    };
    Ok(left - right)
}

/// Left minus right of the selected Laplace identity at order s.
///
/// A flag that degenerates before level s, or an order coefficient that
/// fails the variant's hypothesis, yields [`Error::VariantInapplicable`].
///
/// # Panics
///
/// Panics if `s` is zero or `h` is not positive.
pub fn laplacian_identity_residual_with_step(
    spec: &ImmersionSpec,
    s: usize,
    point: (f64, f64),
    variant: IdentityVariant,
    h: f64,
) -> Result<f64> {
    assert!(s >= 1, "order must be at least 1");
    assert!(h > 0.0, "step must be positive");
    let center = identity_center(spec, s, point)?;
    identity_residual_at(spec, s, point, variant, h, &center)
}

/// [`laplacian_identity_residual_with_step`] at the default step.
pub fn laplacian_identity_residual(
    spec: &ImmersionSpec,
    s: usize,
    point: (f64, f64),
    variant: IdentityVariant,
) -> Result<f64> {
    laplacian_identity_residual_with_step(spec, s, point, variant, DEFAULT_STEP)
}

/// Worst applicable Laplace identity residual at order s: the circular
/// variant where the order coefficient vanishes, otherwise the larger of the
/// two split variants in absolute value.
fn laplace_identity_auto(spec: &ImmersionSpec, s: usize, point: (f64, f64), h: f64) -> Result<f64> {
    let center = identity_center(spec, s, point)?;
    let block = &center.orders[s - 1];
    if coefficient_rel(block, center.conformal_factor, s) <= COEFFICIENT_ZERO_REL {
        identity_residual_at(spec, s, point, IdentityVariant::Circular, h, &center)
    } else {
        let plus = identity_residual_at(spec, s, point, IdentityVariant::SplitPlus, h, &center)?;
        let minus = identity_residual_at(spec, s, point, IdentityVariant::SplitMinus, h, &center)?;
        Ok(if plus.abs() >= minus.abs() {
            plus
        } else {
            minus
        })
    }
}

/// A condition that can be swept over a grid into a [`ConditionReport`].
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    /// `lap log(1-K) = cK` with the given constant.
    Ricci { c: f64 },
    /// Vanishing curvature of the conformal metric `(1-K)^{1/3} ds^2`.
    FlatMetric,
    /// Holomorphicity of the order-r coefficient.
    Holomorphic { r: usize },
    /// Constancy of the order-r eccentricity; residuals are deviations from
    /// the grid mean.
    Exceptional { r: usize },
    /// Laplace identity at order s, variant chosen per point.
    LaplaceIdentity { s: usize },
}

impl Condition {
    /// Stable identifier used on the command line and in reports.
    pub fn id(&self) -> String {
        match self {
            Condition::Ricci { c } if *c == 6.0 => "ricci6".into(),
            Condition::Ricci { c } if *c == 4.0 => "ricci4".into(),
            Condition::Ricci { c } => format!("ricci{c}"),
            Condition::FlatMetric => "flat-metric".into(),
            Condition::Holomorphic { r } => format!("holomorphic:{r}"),
            Condition::Exceptional { r } => format!("exceptional:{r}"),
            Condition::LaplaceIdentity { s } => format!("prop32:{s}"),
        }
    }

    /// Parses a condition identifier.
    pub fn parse(id: &str) -> Result<Condition> {
        match id {
            "ricci6" => return Ok(Condition::Ricci { c: 6.0 }),
            "ricci4" => return Ok(Condition::Ricci { c: 4.0 }),
            "flat-metric" => return Ok(Condition::FlatMetric),
            _ => {}
        }
        if let Some(rest) = id.strip_prefix("holomorphic:") {
            return Ok(Condition::Holomorphic {
                r: parse_order(rest, id)?,
            });
        }
        if let Some(rest) = id.strip_prefix("exceptional:") {
            return Ok(Condition::Exceptional {
                r: parse_order(rest, id)?,
            });
        }
        if let Some(rest) = id.strip_prefix("prop32:") {
            return Ok(Condition::LaplaceIdentity {
                s: parse_order(rest, id)?,
            });
        }
        Err(Error::ConstraintViolation(format!(
            "unknown condition id `{id}`"
        )))
    }

    /// Pass threshold on the maximal absolute residual.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            Condition::LaplaceIdentity { .. } => 1e-4,
            _ => 1e-6,
        }
    }

    /// The constant c for the curvature equation, if this condition has one.
    pub fn ricci_constant(&self) -> Option<f64> {
        match self {
            Condition::Ricci { c } => Some(*c),
            _ => None,
        }
    }
}

fn parse_order(text: &str, id: &str) -> Result<usize> {
    let n: usize = text
        .parse()
        .map_err(|_| Error::ConstraintViolation(format!("bad order in condition id `{id}`")))?;
    if n == 0 {
        return Err(Error::ConstraintViolation(format!(
            "order must be at least 1 in condition id `{id}`"
        )));
    }
    Ok(n)
}

/// One grid point in a [`ConditionReport`]; `residual` is absent when the
/// point was flagged.
#[derive(Debug, Clone, Serialize)]
pub struct PointResult {
    pub x: f64,
    pub y: f64,
    pub residual: Option<f64>,
}

/// A grid point excluded from the statistics, with the reason.
#[derive(Debug, Clone, Serialize)]
pub struct FlaggedPoint {
    pub x: f64,
    pub y: f64,
    pub reason: String,
}

/// Maximal residual magnitudes of the same sweep at the report step and at
/// half that step.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceAudit {
    pub h_coarse: f64,
    pub h_fine: f64,
    pub max_abs_coarse: f64,
    pub max_abs_fine: f64,
}

/// Residual sweep of one condition over a grid.
///
/// Points are kept in grid order; flagged points stay in `points` with a
/// null residual and are listed in `flagged` with reasons. The statistics
/// cover evaluated points only. The convergence audit is absent for the
/// eccentricity condition, which uses no stencil.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub condition: String,
    pub c: Option<f64>,
    pub grid: Grid,
    pub h: f64,
    pub richardson: u32,
    pub evaluated: usize,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub points: Vec<PointResult>,
    pub flagged: Vec<FlaggedPoint>,
    pub convergence: Option<ConvergenceAudit>,
}

impl ConditionReport {
    /// True when every grid point was flagged as a curvature-one locus.
    pub fn curvature_one_everywhere(&self) -> bool {
        self.evaluated == 0
            && !self.flagged.is_empty()
            && self.flagged.iter().all(|p| p.reason == "curvature-one")
    }

    /// True when every grid point was flagged for a degenerate flag.
    pub fn degenerate_everywhere(&self) -> bool {
        self.evaluated == 0
            && !self.flagged.is_empty()
            && self.flagged.iter().all(|p| {
                p.reason.starts_with("degenerate-flag")
                    || p.reason.starts_with("variant-inapplicable")
            })
    }
}

/// Maps errors that disqualify a single point to a flag reason; anything
/// else aborts the sweep.
fn flag_reason(e: &Error) -> Option<String> {
    match e {
        Error::CurvatureOne => Some("curvature-one".into()),
        Error::DegenerateFlag(level) => Some(format!("degenerate-flag:{level}")),
        Error::VariantInapplicable(msg) => Some(format!("variant-inapplicable: {msg}")),
        Error::DivisionByDegenerateNormalCurvature => Some("degenerate-normal-curvature".into()),
        Error::EvaluationFailure(msg) => Some(format!("evaluation-failure: {msg}")),
        _ => None,
    }
}

type Outcome = std::result::Result<f64, String>;

fn residual_sweep(
    spec: &ImmersionSpec,
    condition: &Condition,
    pts: &[(f64, f64)],
    h: f64,
) -> Result<Vec<Outcome>> {
    pts.par_iter()
        .map(|&p| {
            let res = match condition {
                Condition::Ricci { c } => ricci_residual_with_step(spec, p, *c, h),
                Condition::FlatMetric => flat_metric_residual_with_step(spec, p, h),
                Condition::Holomorphic { r } => holomorphicity_residual(spec, *r, p, h),
                Condition::LaplaceIdentity { s } => laplace_identity_auto(spec, *s, p, h),
                Condition::Exceptional { .. } => unreachable!("handled by the caller"),
            };
            match res {
                Ok(v) if v.is_finite() => Ok(Ok(v)),
                Ok(v) => Ok(Err(format!("nonfinite residual {v}"))),
                Err(e) => flag_reason(&e).map(Err).ok_or(e),
            }
        })
        .collect()
}

fn exceptional_sweep(spec: &ImmersionSpec, r: usize, pts: &[(f64, f64)]) -> Result<Vec<Outcome>> {
    let jet_order = (r + 1).max(3);
    let eccs = pts
        .par_iter()
        .map(|&p| match invariants_at(spec, p, r, jet_order) {
            Ok(rec) => Ok(Ok(rec.orders[r - 1].ecc)),
            Err(e) => flag_reason(&e).map(Err).ok_or(e),
        })
        .collect::<Result<Vec<Outcome>>>()?;
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in eccs.iter().flatten() {
        sum += v;
        n += 1;
    }
    if n == 0 {
        return Ok(eccs);
    }
    let mean = sum / n as f64;
    Ok(eccs.into_iter().map(|v| v.map(|e| e - mean)).collect())
}

fn max_abs_of(outcomes: &[Outcome]) -> f64 {
    outcomes
        .iter()
        .filter_map(|v| v.as_ref().ok())
        .fold(0.0, |m, v| m.max(v.abs()))
}

/// Sweeps one condition over the grid at step `h`, producing per-point
/// residuals, statistics over the evaluated points, and a convergence audit
/// at half the step for stencil-based conditions.
///
/// # Panics
///
/// Panics if `h` is not positive.
pub fn evaluate_condition(
    spec: &ImmersionSpec,
    condition: &Condition,
    grid: &Grid,
    h: f64,
) -> Result<ConditionReport> {
    assert!(h > 0.0, "step must be positive");
    let pts = grid.points();
    let (outcomes, convergence) = match condition {
        Condition::Exceptional { r } => (exceptional_sweep(spec, *r, &pts)?, None),
        _ => {
            let coarse = residual_sweep(spec, condition, &pts, h)?;
            let fine = residual_sweep(spec, condition, &pts, 0.5 * h)?;
            let audit = ConvergenceAudit {
                h_coarse: h,
                h_fine: 0.5 * h,
                max_abs_coarse: max_abs_of(&coarse),
                max_abs_fine: max_abs_of(&fine),
            };
            (coarse, Some(audit))
        }
    };
    let mut max_abs = 0.0f64;
    let mut sum_abs = 0.0f64;
    let mut evaluated = 0usize;
    let mut points = Vec::with_capacity(pts.len());
    let mut flagged = Vec::new();
    for (&(x, y), outcome) in pts.iter().zip(&outcomes) {
        match outcome {
            Ok(v) => {
                evaluated += 1;
                max_abs = max_abs.max(v.abs());
                sum_abs += v.abs();
                points.push(PointResult {
                    x,
                    y,
                    residual: Some(*v),
                });
            }
            Err(reason) => {
                points.push(PointResult {
                    x,
                    y,
                    residual: None,
                });
                flagged.push(FlaggedPoint {
                    x,
                    y,
                    reason: reason.clone(),
                });
            }
        }
    }
    let mean_abs = if evaluated > 0 {
        sum_abs / evaluated as f64
    } else {
        0.0
    };
    Ok(ConditionReport {
        condition: condition.id(),
        c: condition.ricci_constant(),
        grid: *grid,
        h,
        richardson: RICHARDSON_LEVELS,
        evaluated,
        max_abs,
        mean_abs,
        points,
        flagged,
        convergence,
    })
}
