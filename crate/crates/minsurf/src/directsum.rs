//! Weighted direct sums of associated-family members of a flat torus in the
//! five-sphere: the coefficient-vector recursion, the closed-form invariant
//! constants it predicts, certification of those predictions against measured
//! invariants, the associated family, and the polar surface.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::frames::{invariants_at, osculating_flag};
use crate::surfaces::{
    eval_jet, substantial_check, validate_conformal, validate_minimal, DirectSumSpec, Grid,
    ImmersionSpec, SurfaceKind,
};
use crate::{Error, Result};

/// Tolerance on the weight normalization and phase-window checks.
pub const ADMISSIBILITY_TOL: f64 = 1e-10;

/// A recursion output below this fraction of its input counts as zero.
const ZERO_VECTOR_REL: f64 = 1e-12;

/// Residual ceiling for the base-curve validators.
const PROXY_TOL: f64 = 1e-8;

/// Relative first-order coefficient size above which the base is rejected.
const ISOTROPY_REL: f64 = 1e-6;

/// Base-curve sample count for the rank check.
const PROXY_SAMPLES: usize = 12;

/// Smallest admissible alignment between consecutive line-field samples.
const SIGN_CONTINUITY_FLOOR: f64 = 0.1;

/// Hermitian inner product, complex-linear in the first argument.
fn hdot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

fn norm_sq(u: &[Complex64]) -> f64 {
    u.iter().map(|c| c.norm_sqr()).sum()
}

fn conj_vec(u: &[Complex64]) -> Vec<Complex64> {
    u.iter().map(|c| c.conj()).collect()
}

/// Componentwise phase twist `u_j e^{-i theta_j}`.
fn twist(u: &[Complex64], phases: &[f64]) -> Vec<Complex64> {
    u.iter()
        .zip(phases)
        .map(|(c, &t)| c * Complex64::from_polar(1.0, -t))
        .collect()
}

/// Exact power of two with an exponent given as a multiple of one third.
fn pow2_third(numerator: i64) -> f64 {
    debug_assert_eq!(numerator.rem_euclid(3), 0, "exponent must be integral");
    2f64.powi((numerator / 3) as i32)
}

/// Closed-form invariant sizes implied by the coefficient vectors, indexed
/// by order (entry `s - 1` holds order `s`, for `s = 1 ..= 3m - 1`).
#[derive(Debug, Clone, Serialize)]
pub struct PredictedConstants {
    /// Squared-norm constant of the order form.
    pub b_hat: Vec<f64>,
    /// Normal-curvature constant.
    pub c_hat: Vec<f64>,
    /// Coefficient factor of the order Hopf differential, present at orders
    /// congruent to 2 mod 3.
    pub d_hat: Vec<Option<Complex64>>,
    /// Eccentricity of the order ellipse.
    pub rho_hat: Vec<f64>,
}

/// Coefficient vectors of a weighted direct sum together with the invariant
/// constants they predict.
#[derive(Debug, Clone, Serialize)]
pub struct CVectors {
    pub m: usize,
    pub weights: Vec<f64>,
    pub phases: Vec<f64>,
    /// `vectors[s - 1]` holds the s-th vector, for `s = 1 ..= 3m`.
    pub vectors: Vec<Vec<Complex64>>,
    pub constants: PredictedConstants,
}

/// Subtracts from `source` its projections onto the earlier vectors in the
/// `plain` residue class and onto the conjugates of those in the `conjugated`
/// class. Both families are mutually orthogonal, so the order of subtraction
/// does not matter.
fn orthogonal_residual(
    source: &[Complex64],
    vectors: &[Vec<Complex64>],
    upto: usize,
    plain: usize,
    conjugated: usize,
) -> Vec<Complex64> {
    let mut out = source.to_vec();
    for t in 1..=upto {
        let stored = &vectors[t - 1];
        let target = if t % 6 == plain {
            stored.clone()
        } else if t % 6 == conjugated {
            conj_vec(stored)
        } else {
            continue;
        };
        let coeff = hdot(source, &target) / norm_sq(&target);
        for (o, w) in out.iter_mut().zip(&target) {
            *o -= coeff * w;
        }
    }
    #[cfg(debug_assertions)]
    for t in 1..=upto {
        if t % 6 != plain && t % 6 != conjugated {
            continue;
        }
        let stored = &vectors[t - 1];
        let target = if t % 6 == plain {
            stored.clone()
        } else {
            conj_vec(stored)
        };
        let overlap = hdot(&out, &target).norm();
        let scale = norm_sq(source).sqrt() * norm_sq(&target).sqrt();
        debug_assert!(
            overlap <= 1e-10 * scale.max(f64::MIN_POSITIVE),
            "projection left an overlap of {overlap:.3e} at step {t}"
        );
    }
    out
}

/// Runs the coefficient-vector recursion for the given weights and phases
/// and evaluates the predicted constants.
///
/// The step from the s-th vector to the next depends on s mod 6: twist and
/// scale in the odd-residue steps, pure scaling in residues 2 and 5, and an
/// orthogonal-complement projection in residues 0 and 3. Errors with
/// [`Error::ZeroVector`] when a projection annihilates its input.
///
/// # Panics
///
/// Panics when `weights` is empty or the lengths differ.
pub fn c_vector_recursion(weights: &[f64], phases: &[f64]) -> Result<CVectors> {
    assert!(!weights.is_empty(), "need at least one summand");
    assert_eq!(weights.len(), phases.len(), "one phase per weight");
    let m = weights.len();
    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(3 * m);
    vectors.push(weights.iter().map(|&w| Complex64::new(w, 0.0)).collect());
    for s in 1..3 * m {
        let prev = &vectors[s - 1];
        let next: Vec<Complex64> = match s % 6 {
            1 => twist(prev, phases).iter().map(|c| 2.0 * c).collect(),
            2 => prev.iter().map(|c| 2.0 * c).collect(),
            3 => orthogonal_residual(prev, &vectors, s, 4, 2)
                .iter()
                .map(|c| -c)
                .collect(),
            4 => twist(prev, phases).iter().map(|c| -2.0 * c).collect(),
            5 => prev.iter().map(|c| -2.0 * c).collect(),
            _ => orthogonal_residual(prev, &vectors, s, 1, 5),
        };
        if norm_sq(&next).sqrt() < ZERO_VECTOR_REL * norm_sq(prev).sqrt() {
            return Err(Error::ZeroVector(s + 1));
        }
        vectors.push(next);
    }
    let constants = predicted_constants(&vectors);
    Ok(CVectors {
        m,
        weights: weights.to_vec(),
        phases: phases.to_vec(),
        vectors,
        constants,
    })
}

/// Evaluates the closed-form constants from a full vector sequence.
///
/// The first-order constants do not depend on the summand data at all: for
/// every admissible weight system the doubled twist preserves the unit
/// square sum, so they are emitted as the exact universal values rather than
/// recomputed through rounded rotations.
fn predicted_constants(vectors: &[Vec<Complex64>]) -> PredictedConstants {
    let top = vectors.len();
    let mut b_hat = Vec::with_capacity(top - 1);
    let mut c_hat = Vec::with_capacity(top - 1);
    let mut d_hat = Vec::with_capacity(top - 1);
    let mut rho_hat = Vec::with_capacity(top - 1);
    for s in 1..top {
        if s == 1 {
            b_hat.push(2.0);
            c_hat.push(1.0);
            d_hat.push(None);
            rho_hat.push(1.0);
            continue;
        }
        let next = &vectors[s];
        let nsq = norm_sq(next);
        let s64 = s as i64;
        let (b_num, c_num) = match s % 3 {
            0 => (3 - 4 * s64, 3 - 7 * s64),
            1 => (1 - 4 * s64, 1 - 7 * s64),
            _ => (-1 - 4 * s64, -1 - 7 * s64),
        };
        b_hat.push(pow2_third(b_num) * nsq);
        if s % 3 == 2 {
            let bilinear = hdot(next, &conj_vec(next));
            let quartic = (nsq * nsq - bilinear.norm_sqr()).max(0.0);
            c_hat.push(pow2_third(c_num) * quartic.sqrt());
            d_hat.push(Some(pow2_third(-4 * (s64 + 1)) * bilinear.conj()));
            rho_hat.push((1.0 - bilinear.norm_sqr() / (nsq * nsq)).max(0.0).sqrt());
        } else {
            c_hat.push(pow2_third(c_num) * nsq);
            d_hat.push(None);
            rho_hat.push(1.0);
        }
    }
    PredictedConstants {
        b_hat,
        c_hat,
        d_hat,
        rho_hat,
    }
}

/// Worst absolute value in each family of inner products that the recursion
/// forces to vanish, over vector indices from 2 up.
#[derive(Debug, Clone, Serialize)]
pub struct OrthogonalityReport {
    /// Conjugate pairings across the residue pairs (1, 5) and (2, 4) mod 6.
    pub conjugate_cross: f64,
    /// Plain and conjugate pairings between distinct vectors whose index is
    /// 0 or 3 mod 6.
    pub real_family: f64,
    /// Plain pairings between distinct vectors sharing residue 1, 2, 4, or
    /// 5 mod 6.
    pub within_residue: f64,
    /// Pairings of residue 0, 1, or 5 vectors against the weight vector.
    pub against_weights: f64,
}

impl OrthogonalityReport {
    /// Largest violation across all four families.
    pub fn max_violation(&self) -> f64 {
        self.conjugate_cross
            .max(self.real_family)
            .max(self.within_residue)
            .max(self.against_weights)
    }
}

/// Measures every inner product the recursion forces to vanish.
pub fn orthogonality_report(cv: &CVectors) -> OrthogonalityReport {
    let top = cv.vectors.len();
    let first = &cv.vectors[0];
    let mut report = OrthogonalityReport {
        conjugate_cross: 0.0,
        real_family: 0.0,
        within_residue: 0.0,
        against_weights: 0.0,
    };
    for t in 2..=top {
        let vt = &cv.vectors[t - 1];
        if matches!(t % 6, 0 | 1 | 5) {
            report.against_weights = report.against_weights.max(hdot(vt, first).norm());
        }
        for u in 2..=top {
            let vu = &cv.vectors[u - 1];
            let conjugate = hdot(vt, &conj_vec(vu)).norm();
            if (t % 6 == 1 && u % 6 == 5) || (t % 6 == 2 && u % 6 == 4) {
                report.conjugate_cross = report.conjugate_cross.max(conjugate);
            }
            if t != u && t % 6 == u % 6 {
                if matches!(t % 6, 0 | 3) {
                    let plain = hdot(vt, vu).norm();
                    report.real_family = report.real_family.max(conjugate.max(plain));
                } else {
                    report.within_residue = report.within_residue.max(hdot(vt, vu).norm());
                }
            }
        }
    }
    report
}

/// Checks the admissibility constraints on direct-sum weights and phases:
/// unit square sum, no vanishing weight, phases strictly increasing in
/// [0, pi).
pub fn validate_summands(weights: &[f64], phases: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::ConstraintViolation(
            "a direct sum needs at least one summand".into(),
        ));
    }
    if weights.len() != phases.len() {
        return Err(Error::ConstraintViolation(format!(
            "{} weights but {} phases",
            weights.len(),
            phases.len()
        )));
    }
    let total: f64 = weights.iter().map(|w| w * w).sum();
    if (total - 1.0).abs() > ADMISSIBILITY_TOL {
        return Err(Error::ConstraintViolation(format!(
            "weights must have unit square sum, got {total}"
        )));
    }
    for (j, w) in weights.iter().enumerate() {
        if w.abs() <= ADMISSIBILITY_TOL {
            return Err(Error::ConstraintViolation(format!(
                "weight {} is zero",
                j + 1
            )));
        }
    }
    for (j, t) in phases.iter().enumerate() {
        if !(0.0..PI).contains(t) {
            return Err(Error::ConstraintViolation(format!(
                "phase {} is {t}, outside [0, pi)",
                j + 1
            )));
        }
    }
    for pair in phases.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::ConstraintViolation(format!(
                "phases must be strictly increasing, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    Ok(())
}

/// Checks that `base` is a conformal minimal torus in the five-sphere with
/// vanishing first-order coefficient, filling all six ambient directions.
pub(crate) fn pseudoholomorphic_proxy(base: &ImmersionSpec) -> Result<()> {
    let fail = |what: String| Error::BaseNotPseudoholomorphic(what);
    if base.ambient_dim() != 6 {
        return Err(fail(format!(
            "ambient dimension is {}, need 6",
            base.ambient_dim()
        )));
    }
    let grid = Grid::new(5, 5, base.default_domain());
    let (diag, cross) =
        validate_conformal(base, &grid).map_err(|e| fail(format!("conformality check: {e}")))?;
    if diag.max(cross) > PROXY_TOL {
        return Err(fail(format!(
            "conformality residual {:.3e}",
            diag.max(cross)
        )));
    }
    let minimal =
        validate_minimal(base, &grid).map_err(|e| fail(format!("minimality check: {e}")))?;
    if minimal > PROXY_TOL {
        return Err(fail(format!("minimality residual {minimal:.3e}")));
    }
    for p in grid.points() {
        let record = invariants_at(base, p, 1, 3)
            .map_err(|e| fail(format!("first-order invariants at ({}, {}): {e}", p.0, p.1)))?;
        let block = &record.orders[0];
        let scale = block.norm_sq * record.conformal_factor.powi(2) / 8.0;
        if block.phi_coeff.norm() > ISOTROPY_REL * scale.max(f64::MIN_POSITIVE) {
            return Err(fail(format!(
                "first-order coefficient {:.3e} at ({}, {})",
                block.phi_coeff.norm(),
                p.0,
                p.1
            )));
        }
    }
    let rank =
        substantial_check(base, PROXY_SAMPLES).map_err(|e| fail(format!("rank check: {e}")))?;
    if !rank.is_substantial() {
        return Err(fail(format!(
            "fills only {} of 6 ambient directions",
            rank.numeric_rank
        )));
    }
    Ok(())
}

/// Assembles the immersion of a weighted direct sum after validating the
/// weights, the phases, and the base curve.
pub fn build_direct_sum(spec: DirectSumSpec) -> Result<ImmersionSpec> {
    validate_summands(&spec.weights, &spec.angles)?;
    pseudoholomorphic_proxy(&spec.base)?;
    let label = format!(
        "direct sum of {} members over {}",
        spec.weights.len(),
        spec.base.label
    );
    Ok(ImmersionSpec {
        kind: SurfaceKind::DirectSum(spec),
        label,
    })
}

/// The associated-family member of `spec` at angle `phi`.
///
/// Exp-type surfaces rotate their frequency vectors by `-phi / 3`; direct
/// sums shift every phase by `phi` modulo pi and re-sort the summands.
/// Surfaces with neither structure are rejected with
/// [`Error::UnsupportedKind`].
pub fn associated_family(spec: &ImmersionSpec, phi: f64) -> Result<ImmersionSpec> {
    if phi == 0.0 {
        return Ok(spec.clone());
    }
    match &spec.kind {
        SurfaceKind::DirectSum(d) => {
            let mut pairs: Vec<(f64, f64)> = d
                .angles
                .iter()
                .zip(&d.weights)
                .map(|(&t, &w)| {
                    let mut shifted = (t + phi).rem_euclid(PI);
                    if shifted >= PI {
                        shifted = 0.0;
                    }
                    (shifted, w)
                })
                .collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("phases are finite"));
            build_direct_sum(DirectSumSpec {
                weights: pairs.iter().map(|p| p.1).collect(),
                angles: pairs.iter().map(|p| p.0).collect(),
                base: d.base.clone(),
            })
        }
        _ => {
            let surface = spec.resolve_exp_type()?;
            Ok(ImmersionSpec::exp_type(
                surface.rotated_frequencies(-phi / 3.0),
                format!("associated({}, {phi})", spec.label),
            ))
        }
    }
}

/// Measured-versus-predicted gaps for one order of the summed surface.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub order: usize,
    pub b_hat: f64,
    pub c_hat: f64,
    /// Worst relative gap between the measured squared form norm and its
    /// prediction.
    pub norm_gap: f64,
    /// Worst relative gap for the normal curvature.
    pub k_perp_gap: f64,
    /// Worst relative gap for the order coefficient against the predicted
    /// power of the base coefficient.
    pub hopf_gap: f64,
}

/// Certification of the summed surface against the predicted constants.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub label: String,
    pub summands: usize,
    pub grid: Grid,
    pub rows: Vec<ComparisonRow>,
    /// Worst gap between the conformal factors of the sum and the base.
    pub isometry_gap: f64,
    /// Worst componentwise minimality residual of the sum.
    pub minimality_residual: f64,
}

impl ComparisonReport {
    /// Largest gap across all rows and the isometry check.
    pub fn max_gap(&self) -> f64 {
        let rows = self
            .rows
            .iter()
            .map(|r| r.norm_gap.max(r.k_perp_gap).max(r.hopf_gap))
            .fold(0.0f64, f64::max);
        rows.max(self.isometry_gap).max(self.minimality_residual)
    }
}

/// Exponent of `1 - K` in the order-s predictions.
fn prediction_exponent(s: usize) -> i32 {
    match s % 3 {
        0 => (s / 3) as i32,
        1 => ((s + 2) / 3) as i32,
        _ => ((s + 1) / 3) as i32,
    }
}

/// Builds the direct sum, measures its invariants over the grid, and
/// compares them with the closed-form predictions order by order.
pub fn compare_predicted_measured(spec: &DirectSumSpec, grid: &Grid) -> Result<ComparisonReport> {
    let sum = build_direct_sum(spec.clone())?;
    let cv = c_vector_recursion(&spec.weights, &spec.angles)?;
    let m = spec.weights.len();
    let top = 3 * m - 1;
    let mut rows: Vec<ComparisonRow> = (1..=top)
        .map(|s| ComparisonRow {
            order: s,
            b_hat: cv.constants.b_hat[s - 1],
            c_hat: cv.constants.c_hat[s - 1],
            norm_gap: 0.0,
            k_perp_gap: 0.0,
            hopf_gap: 0.0,
        })
        .collect();
    let mut isometry_gap = 0.0f64;
    for p in grid.points() {
        let record = invariants_at(&sum, p, top, (top + 1).max(3))?;
        let base_record = invariants_at(&spec.base, p, 2, 4)?;
        isometry_gap =
            isometry_gap.max((record.conformal_factor - base_record.conformal_factor).abs());
        let one_minus_k = 1.0 - record.gauss_curvature;
        let base_phi = base_record.orders[1].phi_coeff;
        for s in 1..=top {
            let block = &record.orders[s - 1];
            let factor = one_minus_k.powi(prediction_exponent(s));
            let norm_pred = rows[s - 1].b_hat * factor;
            let norm_gap = (block.norm_sq - norm_pred).abs() / norm_pred.max(f64::MIN_POSITIVE);
            let k_pred = rows[s - 1].c_hat * factor;
            let k_scale = k_pred.max(norm_pred / 2f64.powi(s as i32));
            let k_gap = (block.k_perp - k_pred).abs() / k_scale.max(f64::MIN_POSITIVE);
            let hopf_pred = match cv.constants.d_hat[s - 1] {
                Some(d) => d * base_phi.powu(((s + 1) / 3) as u32),
                None => Complex64::new(0.0, 0.0),
            };
            let hopf_scale = block.norm_sq * record.conformal_factor.powi(s as i32 + 1)
                / 2f64.powi(s as i32 + 2);
            let hopf_gap = (block.phi_coeff - hopf_pred).norm()
                / hopf_pred.norm().max(hopf_scale).max(f64::MIN_POSITIVE);
            let row = &mut rows[s - 1];
            row.norm_gap = row.norm_gap.max(norm_gap);
            row.k_perp_gap = row.k_perp_gap.max(k_gap);
            row.hopf_gap = row.hopf_gap.max(hopf_gap);
        }
    }
    let minimality_residual = validate_minimal(&sum, grid)?;
    Ok(ComparisonReport {
        label: sum.label,
        summands: m,
        grid: grid.clone(),
        rows,
        isometry_gap,
        minimality_residual,
    })
}

/// Relative gap, at one order, between the measured coefficient of a family
/// member and `e^{2 i phi}` times the coefficient of the original surface.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseLawGap {
    pub order: usize,
    pub gap: f64,
}

/// Checks, order by order, how the coefficients of the family member at
/// angle `phi` compare with `e^{2 i phi}` times those of `spec`, at `point`,
/// over every order congruent to 2 mod 3 that the surface carries.
///
/// On a direct sum the shift acts on the order-s coefficient as
/// `e^{2 i (s + 1) phi / 3}`, so the entry for order 2 is the meaningful
/// law and higher entries measure the growing phase weight.
pub fn phase_law_gaps(
    spec: &ImmersionSpec,
    phi: f64,
    point: (f64, f64),
) -> Result<Vec<PhaseLawGap>> {
    let member = associated_family(spec, phi)?;
    let top = match &spec.kind {
        SurfaceKind::DirectSum(d) => 3 * d.weights.len() - 1,
        _ => 2,
    };
    let record = invariants_at(spec, point, top, (top + 1).max(3))?;
    let member_record = invariants_at(&member, point, top, (top + 1).max(3))?;
    let rotation = Complex64::from_polar(1.0, 2.0 * phi);
    let mut gaps = Vec::new();
    for s in (2..=top).step_by(3) {
        let block = &record.orders[s - 1];
        let expected = rotation * block.phi_coeff;
        let measured = member_record.orders[s - 1].phi_coeff;
        let scale =
            block.norm_sq * record.conformal_factor.powi(s as i32 + 1) / 2f64.powi(s as i32 + 2);
        let gap = (measured - expected).norm() / expected.norm().max(scale).max(f64::MIN_POSITIVE);
        gaps.push(PhaseLawGap { order: s, gap });
    }
    Ok(gaps)
}

/// Worst gap reported by [`phase_law_gaps`] across all orders.
pub fn phase_law_residual(spec: &ImmersionSpec, phi: f64, point: (f64, f64)) -> Result<f64> {
    Ok(phase_law_gaps(spec, phi, point)?
        .iter()
        .map(|g| g.gap)
        .fold(0.0, f64::max))
}

/// Best orthogonal alignment gap between two equally sized point clouds,
/// as the root mean square of `R u_i - v_i` over the minimizing orthogonal
/// map `R`.
///
/// # Panics
///
/// Panics when the clouds are empty or their shapes differ.
pub fn procrustes_rms(source: &[Vec<f64>], target: &[Vec<f64>]) -> f64 {
    assert_eq!(source.len(), target.len(), "clouds must pair up");
    assert!(!source.is_empty(), "need at least one point");
    let dim = source[0].len();
    let mut cross = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    for (u, v) in source.iter().zip(target) {
        assert_eq!(u.len(), dim, "ragged source cloud");
        assert_eq!(v.len(), dim, "ragged target cloud");
        for r in 0..dim {
            for c in 0..dim {
                cross[(r, c)] += v[r] * u[c];
            }
        }
    }
    let svd = nalgebra::SVD::new(cross, true, true);
    let u = svd.u.expect("SVD with U requested");
    let v_t = svd.v_t.expect("SVD with V requested");
    let rotation = u * v_t;
    let mut total = 0.0f64;
    for (src, dst) in source.iter().zip(target) {
        let mapped = &rotation * nalgebra::DVector::from_column_slice(src);
        total += mapped
            .iter()
            .zip(dst)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
    }
    (total / source.len() as f64).sqrt()
}

/// Unit samples of the second normal line along the grid, oriented to vary
/// continuously, with the congruence gap back to the sampled surface.
#[derive(Debug, Clone, Serialize)]
pub struct PolarReport {
    pub grid: Grid,
    /// One unit vector per grid point, in grid order.
    pub samples: Vec<Vec<f64>>,
    /// Procrustes gap between the samples and the surface positions.
    pub congruence_rms: f64,
}

/// Samples the second normal line of a curve in the five-sphere and orients
/// it into a continuous unit field.
///
/// Walks the grid in serpentine order so consecutive points stay adjacent,
/// flipping signs to keep neighbouring samples aligned. Errors with
/// [`Error::SignDiscontinuity`] when neighbouring lines are too far apart
/// to orient, and propagates [`Error::DegenerateFlag`] where the flag stops
/// before the second level.
pub fn polar_surface(spec: &ImmersionSpec, grid: &Grid) -> Result<PolarReport> {
    pseudoholomorphic_proxy(spec)?;
    let points = grid.points();
    let mut order: Vec<usize> = (0..points.len()).collect();
    for row in order.chunks_mut(grid.nx) {
        let row_index = row[0] / grid.nx;
        if row_index % 2 == 1 {
            row.reverse();
        }
    }
    let mut samples: Vec<Option<Vec<f64>>> = vec![None; points.len()];
    let mut positions: Vec<Vec<f64>> = vec![Vec::new(); points.len()];
    let mut previous: Option<Vec<f64>> = None;
    for idx in order {
        let p = points[idx];
        let jv = eval_jet(spec, p, 3)?;
        let flag = osculating_flag(&jv, 2)?;
        if flag.levels[1].dim() != 1 {
            return Err(Error::ConstraintViolation(format!(
                "second normal space at ({}, {}) is a plane, not a line",
                p.0, p.1
            )));
        }
        let mut section = flag.levels[1].basis[0].clone();
        if let Some(prev) = &previous {
            let overlap: f64 = prev.iter().zip(&section).map(|(a, b)| a * b).sum();
            if overlap.abs() < SIGN_CONTINUITY_FLOOR {
                return Err(Error::SignDiscontinuity);
            }
            if overlap < 0.0 {
                for c in &mut section {
                    *c = -*c;
                }
            }
        }
        previous = Some(section.clone());
        positions[idx] = flag.position;
        samples[idx] = Some(section);
    }
    let samples: Vec<Vec<f64>> = samples
        .into_iter()
        .map(|s| s.expect("walk is total"))
        .collect();
    let congruence_rms = procrustes_rms(&samples, &positions);
    Ok(PolarReport {
        grid: grid.clone(),
        samples,
        congruence_rms,
    })
}
