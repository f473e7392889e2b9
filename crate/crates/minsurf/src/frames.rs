//! Osculating flags and pointwise invariants of conformal minimal surfaces
//! in round spheres: higher fundamental forms, curvature-ellipse data,
//! normal and intrinsic bundle curvatures, and Hopf-differential
//! coefficients.
//!
//! Conventions used throughout: the metric is `ds^2 = F |dz|^2` with
//! `F = <f_x, f_x>`, the complex derivative is `d = (d_x - i d_y) / 2`, and
//! coordinate-coframe coefficients carry explicit powers of `F`.

use num_complex::Complex64;

use crate::jets::{extract_partial, jet_add, jet_analytic, jet_mul, AnalyticFn, Jet2, JetVec};
use crate::surfaces::{eval_jet, ImmersionSpec};
use crate::{Error, Result};

/// A flag level degenerates when the projected derivative retains less than
/// this fraction of the raw derivative norm.
pub const DEGENERACY_FACTOR: f64 = 1e-9;

/// Normal curvatures below this cannot be divided by in the intrinsic
/// curvature formula.
pub const KPERP_THRESHOLD: f64 = 1e-9;

/// One normal level of the osculating flag.
#[derive(Debug, Clone)]
pub struct FlagLevel {
    /// Projection of the (s+1)-st complex derivative onto this level,
    /// as a complexified ambient vector.
    pub top_derivative: Vec<Complex64>,
    /// Oriented orthonormal basis of the level (one or two vectors).
    pub basis: Vec<Vec<f64>>,
}

impl FlagLevel {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Orthogonal decomposition span{f} + T + N_1 + ... at one point.
#[derive(Debug, Clone)]
pub struct OsculatingFlag {
    pub point: (f64, f64),
    /// Unit position vector.
    pub position: Vec<f64>,
    /// Orthonormal tangent basis obtained from (f_x, f_y).
    pub tangent: [Vec<f64>; 2],
    /// Normal levels in order; level s holds the (s+1)-st form data.
    pub levels: Vec<FlagLevel>,
    /// Conformal factor F at the point.
    pub conformal_factor: f64,
}

/// Ellipse and curvature data for one normal order.
#[derive(Debug, Clone)]
pub struct OrderBlock {
    /// Components of the (r+1)-st form along the oriented level basis,
    /// packed as H_{2r+1} and H_{2r+2}.
    pub h1: Complex64,
    pub h2: Complex64,
    /// Squared norm of the full (r+1)-st fundamental form.
    pub norm_sq: f64,
    /// Normal curvature, twice the signed semi-axis product.
    pub k_perp: f64,
    /// Ellipse semi-axes, kappa >= mu >= 0.
    pub kappa: f64,
    pub mu: f64,
    /// Eccentricity in [0, 1]; 0 for circles by convention.
    pub ecc: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    /// Coordinate-coframe coefficient of the order-r Hopf differential.
    pub phi_coeff: Complex64,
    /// Intrinsic curvature of the level plane bundle, when defined.
    pub k_star: Option<f64>,
}

/// All pointwise invariants at one parameter point.
#[derive(Debug, Clone)]
pub struct InvariantRecord {
    pub x: f64,
    pub y: f64,
    pub conformal_factor: f64,
    pub gauss_curvature: f64,
    /// Blocks for normal orders 1, 2, ... in order.
    pub orders: Vec<OrderBlock>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Complex derivative vectors d^k f for k = 0..=max_k.
fn complex_derivatives(jv: &JetVec, max_k: usize) -> Result<Vec<Vec<Complex64>>> {
    let dim = jv.ambient_dim();
    let mut out = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        let mut dk = vec![Complex64::ZERO; dim];
        let scale = 0.5f64.powi(k as i32);
        for j in 0..=k {
            let phase = Complex64::i().powu(j as u32).conj();
            let weight = phase * binomial(k, j) * scale;
            for (c, comp) in jv.components().iter().enumerate() {
                dk[c] += weight * extract_partial(comp, k - j, j)?;
            }
        }
        out.push(dk);
    }
    Ok(out)
}

/// Removes the components of `v` along the orthonormal rows of `basis`,
/// twice for numerical orthogonality.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(v, -c, b);
        }
    }
}

struct FlagBuild {
    flag: OsculatingFlag,
    /// Level at which the projection collapsed, if the build stopped early.
    degenerate_at: Option<usize>,
}

/// Builds normal levels until `want_levels` are found, the projection
/// degenerates, or the jet order is exhausted.
fn build_flag(jv: &JetVec, want_levels: usize) -> Result<FlagBuild> {
    let max_k = (want_levels + 1).min(jv.order());
    let derivs = complex_derivatives(jv, max_k)?;
    let position: Vec<f64> = derivs[0].iter().map(|c| c.re).collect();
    let f_norm = norm(&position);
    debug_assert!((f_norm - 1.0).abs() < 1e-9, "position should be unit");

    let mut basis: Vec<Vec<f64>> = vec![position.iter().map(|v| v / f_norm).collect()];

    // Tangent plane from the real and imaginary parts of the first
    // derivative (f_x / 2 and -f_y / 2).
    let conformal_factor = {
        let fx: Vec<f64> = derivs[1].iter().map(|c| 2.0 * c.re).collect();
        dot(&fx, &fx)
    };
    let mut tangent = Vec::with_capacity(2);
    for part in [
        derivs[1].iter().map(|c| c.re).collect::<Vec<f64>>(),
        derivs[1].iter().map(|c| -c.im).collect::<Vec<f64>>(),
    ] {
        let mut v = part;
        let scale = norm(&v);
        orthogonalize(&mut v, &basis);
        let n = norm(&v);
        if n < DEGENERACY_FACTOR * scale.max(1e-300) {
            return Err(Error::EvaluationFailure(
                "tangent plane is degenerate at this point".into(),
            ));
        }
        v.iter_mut().for_each(|c| *c /= n);
        basis.push(v.clone());
        tangent.push(v);
    }
    let tangent: [Vec<f64>; 2] = [tangent[0].clone(), tangent[1].clone()];

    let mut levels = Vec::new();
    let mut degenerate_at = None;
    for s in 1..=want_levels {
        if s + 1 > jv.order() {
            break;
        }
        let raw = &derivs[s + 1];
        let raw_scale = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mut re: Vec<f64> = raw.iter().map(|c| c.re).collect();
        let mut im: Vec<f64> = raw.iter().map(|c| c.im).collect();
        orthogonalize(&mut re, &basis);
        orthogonalize(&mut im, &basis);
        let proj_norm = (dot(&re, &re) + dot(&im, &im)).sqrt();
        if proj_norm < DEGENERACY_FACTOR * raw_scale.max(1e-300) {
            degenerate_at = Some(s);
            break;
        }
        let top: Vec<Complex64> = re
            .iter()
            .zip(&im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        // Oriented level basis from the ordered pair (Re A, -Im A).
        let mut level_basis = Vec::new();
        for cand in [re.clone(), im.iter().map(|v| -v).collect::<Vec<f64>>()] {
            let mut v = cand;
            orthogonalize(&mut v, &basis);
            orthogonalize(&mut v, &level_basis);
            let n = norm(&v);
            if n >= DEGENERACY_FACTOR * proj_norm {
                v.iter_mut().for_each(|c| *c /= n);
                level_basis.push(v);
            }
        }
        debug_assert!(!level_basis.is_empty());
        for v in &level_basis {
            basis.push(v.clone());
        }
        levels.push(FlagLevel {
            top_derivative: top,
            basis: level_basis,
        });
    }
    Ok(FlagBuild {
        flag: OsculatingFlag {
            point: (0.0, 0.0),
            position,
            tangent,
            levels,
            conformal_factor,
        },
        degenerate_at,
    })
}

/// Osculating flag with normal levels 1..=max_order.
///
/// The jet order must be at least `max_order + 1`; the underlying surface is
/// assumed conformal and minimal within validator tolerance.
pub fn osculating_flag(jv: &JetVec, max_order: usize) -> Result<OsculatingFlag> {
    if jv.order() < max_order + 1 {
        return Err(Error::OrderExceeded {
            requested: max_order + 1,
            order: jv.order(),
        });
    }
    let build = build_flag(jv, max_order)?;
    if build.flag.levels.len() < max_order {
        return Err(Error::DegenerateFlag(
            build.degenerate_at.unwrap_or(build.flag.levels.len() + 1),
        ));
    }
    Ok(build.flag)
}

/// Gauss curvature from the exact jet of log F: `K = -(2/F) d dbar log F`.
///
/// Requires jet order at least 3.
pub fn gauss_curvature(jv: &JetVec) -> Result<f64> {
    let order = jv.order().min(3);
    if order < 3 {
        return Err(Error::OrderExceeded {
            requested: 3,
            order: jv.order(),
        });
    }
    let mut f_jet = Jet2::zero(order - 1);
    for comp in jv.components() {
        let dx = comp.truncated(order).deriv_x();
        f_jet = jet_add(&f_jet, &jet_mul(&dx, &dx));
        let dy = comp.truncated(order).deriv_y();
        f_jet = jet_add(&f_jet, &jet_mul(&dy, &dy));
    }
    // F = <f_x, f_x> = <f_y, f_y>; the sum above is 2F.
    f_jet = f_jet.scale(Complex64::new(0.5, 0.0));
    let log_f = jet_analytic(AnalyticFn::Log, &f_jet)?;
    let lap = extract_partial(&log_f, 2, 0)? + extract_partial(&log_f, 0, 2)?;
    let f_value = f_jet.value().re;
    Ok(-0.5 * lap.re / f_value)
}

/// Singular values of the ambient x 2 matrix with columns w, v, and the
/// eccentricity of the ellipse they span.
///
/// The eccentricity comes straight from the eigenvalue discriminant,
/// `e^2 = 2 disc / (tr + disc)`, which loses less to cancellation than
/// recombining the two singular values.
fn ellipse_axes(w: &[f64], v: &[f64]) -> (f64, f64, f64) {
    let a = dot(w, w);
    let b = dot(v, v);
    let c = dot(w, v);
    let tr = a + b;
    let disc = ((a - b) * (a - b) + 4.0 * c * c).sqrt();
    let big = (0.5 * (tr + disc)).max(0.0).sqrt();
    let small = (0.5 * (tr - disc)).max(0.0).sqrt();
    let ecc = if tr + disc > 0.0 {
        (2.0 * disc / (tr + disc)).sqrt().min(1.0)
    } else {
        0.0
    };
    (big, small, ecc)
}

/// All invariants at a point, for normal orders 1..=max_order.
///
/// The intrinsic curvature of the top order is present only when the jet
/// order allows probing one level beyond it.
pub fn invariants_at_point(jv: &JetVec, max_order: usize) -> Result<InvariantRecord> {
    if jv.order() < (max_order + 1).max(3) {
        return Err(Error::OrderExceeded {
            requested: (max_order + 1).max(3),
            order: jv.order(),
        });
    }
    let build = build_flag(jv, max_order + 1)?;
    let flag = &build.flag;
    if flag.levels.len() < max_order {
        return Err(Error::DegenerateFlag(
            build.degenerate_at.unwrap_or(flag.levels.len() + 1),
        ));
    }
    let f = flag.conformal_factor;
    let k = gauss_curvature(jv)?;

    // Per level: the ellipse pair (w, v) with w = 2 F^{-(r+1)/2} Re A and
    // v = -2 F^{-(r+1)/2} Im A, expressed in ambient coordinates.
    let mut blocks = Vec::with_capacity(max_order);
    for (idx, level) in flag.levels.iter().enumerate().take(max_order) {
        let r = idx + 1;
        let scale = 2.0 * f.powf(-0.5 * (r + 1) as f64);
        let w: Vec<f64> = level.top_derivative.iter().map(|c| scale * c.re).collect();
        let v: Vec<f64> = level.top_derivative.iter().map(|c| -scale * c.im).collect();
        let u1 = &level.basis[0];
        let u2 = level.basis.get(1);
        let h1 = Complex64::new(dot(&w, u1), dot(&v, u1));
        let h2 = match u2 {
            Some(u2) => Complex64::new(dot(&w, u2), dot(&v, u2)),
            None => Complex64::ZERO,
        };
        let norm_sq = 2.0f64.powi(r as i32) * (h1.norm_sqr() + h2.norm_sqr());
        let k_perp = (Complex64::i() * (h1 * h2.conj() - h1.conj() * h2)).re;
        debug_assert!(k_perp >= -1e-12, "orientation should make K_perp >= 0");
        let (kappa, mu, ecc) = ellipse_axes(&w, &v);
        let a_plus = kappa + mu;
        let a_minus = kappa - mu;
        let phi_coeff: Complex64 = level.top_derivative.iter().map(|c| c * c).sum();
        blocks.push(OrderBlock {
            h1,
            h2,
            norm_sq,
            k_perp,
            kappa,
            mu,
            ecc,
            a_plus,
            a_minus,
            phi_coeff,
            k_star: None,
        });
    }

    // Norm of the form at a given flag level (level s holds the (s+1)-st
    // form): zero beyond a proven flag end, unknown when the jets ran out.
    let norm_sq_of_level = |s: usize| -> Option<f64> {
        if let Some(level) = flag.levels.get(s - 1) {
            let scale = 2.0 * f.powf(-0.5 * (s + 1) as f64);
            let total: f64 = level
                .top_derivative
                .iter()
                .map(|c| c.norm_sqr() * scale * scale)
                .sum();
            Some(2.0f64.powi(s as i32) * total)
        } else if build.degenerate_at.is_some() {
            Some(0.0)
        } else {
            None
        }
    };
    for r in 1..=max_order {
        let next_norm = norm_sq_of_level(r + 1);
        let block = &blocks[r - 1];
        let k_star = if block.k_perp.abs() < KPERP_THRESHOLD {
            None
        } else if r == 1 {
            next_norm.map(|n3| block.k_perp - n3 / (2.0 * block.k_perp))
        } else {
            let prev_perp = blocks[r - 2].k_perp;
            if prev_perp.abs() < KPERP_THRESHOLD {
                None
            } else {
                let prev_norm = blocks[r - 2].norm_sq;
                next_norm.map(|n| {
                    block.k_perp / (prev_perp * prev_perp) * prev_norm / 2.0f64.powi(r as i32 - 2)
                        - n / (2.0f64.powi(r as i32) * block.k_perp)
                })
            }
        };
        blocks[r - 1].k_star = k_star;
    }

    Ok(InvariantRecord {
        x: 0.0,
        y: 0.0,
        conformal_factor: f,
        gauss_curvature: k,
        orders: blocks,
    })
}

/// Wrapper around [`invariants_at_point`] that stamps the parameter point.
pub fn invariants_at(
    spec: &ImmersionSpec,
    point: (f64, f64),
    max_order: usize,
    jet_order: usize,
) -> Result<InvariantRecord> {
    let jv = eval_jet(spec, point, jet_order)?;
    let mut record = invariants_at_point(&jv, max_order)?;
    record.x = point.0;
    record.y = point.1;
    Ok(record)
}

/// Coordinate-coframe coefficient of the order-r Hopf differential: the
/// complex-bilinear square of the level-r top derivative. Its squared
/// modulus equals `F^{2r+2} 2^{-2r-4} (norm^4 - 4^r Kperp^2)`.
pub fn hopf_coefficient(jv: &JetVec, r: usize) -> Result<Complex64> {
    let flag = osculating_flag(jv, r)?;
    let a = &flag.levels[r - 1].top_derivative;
    Ok(a.iter().map(|c| c * c).sum())
}

/// Intrinsic curvature of the level-r plane bundle for each record in the
/// stream, from the norm and normal-curvature fields.
pub fn intrinsic_bundle_curvature(records: &[InvariantRecord], r: usize) -> Result<Vec<f64>> {
    records
        .iter()
        .map(|rec| {
            let block = rec.orders.get(r - 1).ok_or(Error::DegenerateFlag(r))?;
            block
                .k_star
                .ok_or(Error::DivisionByDegenerateNormalCurvature)
        })
        .collect()
}

/// Best SO(2) rotation angle aligning an orthonormal 2-frame pair, from the
/// polar factor of the 2 x 2 overlap matrix.
fn frame_rotation_angle(from: (&[f64], &[f64]), to: (&[f64], &[f64])) -> Result<f64> {
    let m11 = dot(from.0, to.0);
    let m12 = dot(from.0, to.1);
    let m21 = dot(from.1, to.0);
    let m22 = dot(from.1, to.1);
    let det = m11 * m22 - m12 * m21;
    if det <= 0.0 {
        return Err(Error::FrameDiscontinuity);
    }
    let a = m11 + m22;
    let b = m21 - m12;
    if a * a + b * b < 0.25 {
        return Err(Error::FrameDiscontinuity);
    }
    Ok(b.atan2(a))
}

fn holonomy_estimate(spec: &ImmersionSpec, r: usize, point: (f64, f64), h: f64) -> Result<f64> {
    let corners = [
        point,
        (point.0 + h, point.1),
        (point.0 + h, point.1 + h),
        (point.0, point.1 + h),
    ];
    let mut frames = Vec::with_capacity(4);
    let mut center_f = 0.0;
    for corner in corners {
        let jv = eval_jet(spec, corner, r + 2)?;
        let flag = osculating_flag(&jv, r)?;
        let level = &flag.levels[r - 1];
        if level.dim() != 2 {
            return Err(Error::DegenerateFlag(r));
        }
        center_f += 0.25 * flag.conformal_factor;
        frames.push((level.basis[0].clone(), level.basis[1].clone()));
    }
    let mut total = 0.0;
    for i in 0..4 {
        let from = &frames[i];
        let to = &frames[(i + 1) % 4];
        total += frame_rotation_angle((&from.0, &from.1), (&to.0, &to.1))?;
    }
    let area = center_f * h * h;
    // The counterclockwise loop turns the transported frame by -K* x area.
    Ok(-total / area)
}

/// Finite-difference curvature of the induced connection on the level-r
/// plane bundle: parallel-transport holonomy around a small coordinate
/// square at `point`, normalized by metric area, with one Richardson step.
/// Used as an independent oracle for the intrinsic-curvature formula.
pub fn connection_curvature_fd(
    spec: &ImmersionSpec,
    r: usize,
    point: (f64, f64),
    h: f64,
) -> Result<f64> {
    let coarse = holonomy_estimate(spec, r, point, h)?;
    let fine = holonomy_estimate(spec, r, point, 0.5 * h)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Column names of the flat serialization, for orders 1..=max_order.
pub fn record_field_names(max_order: usize) -> Vec<String> {
    let mut names = vec!["x".into(), "y".into(), "F".into(), "K".into()];
    for r in 1..=max_order {
        let h_odd = 2 * r + 1;
        let h_even = 2 * r + 2;
        names.push(format!("H{h_odd}_re"));
        names.push(format!("H{h_odd}_im"));
        names.push(format!("H{h_even}_re"));
        names.push(format!("H{h_even}_im"));
        names.push(format!("norm2_{}", r + 1));
        names.push(format!("Kperp_{r}"));
        names.push(format!("kappa_{r}"));
        names.push(format!("mu_{r}"));
        names.push(format!("ecc_{r}"));
        names.push(format!("a_plus_{r}"));
        names.push(format!("a_minus_{r}"));
        names.push(format!("phi_{r}_re"));
        names.push(format!("phi_{r}_im"));
        names.push(format!("Kstar_{r}"));
    }
    names
}

/// Values matching [`record_field_names`]; `None` marks absent entries.
pub fn record_values(record: &InvariantRecord) -> Vec<Option<f64>> {
    let mut out = vec![
        Some(record.x),
        Some(record.y),
        Some(record.conformal_factor),
        Some(record.gauss_curvature),
    ];
    for block in &record.orders {
        out.push(Some(block.h1.re));
        out.push(Some(block.h1.im));
        out.push(Some(block.h2.re));
        out.push(Some(block.h2.im));
        out.push(Some(block.norm_sq));
        out.push(Some(block.k_perp));
        out.push(Some(block.kappa));
        out.push(Some(block.mu));
        out.push(Some(block.ecc));
        out.push(Some(block.a_plus));
        out.push(Some(block.a_minus));
        out.push(Some(block.phi_coeff.re));
        out.push(Some(block.phi_coeff.im));
        out.push(block.k_star);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const JET_ORDER: usize = 8;

    fn jets_of(name: &str, point: (f64, f64)) -> JetVec {
        let spec = ImmersionSpec::catalog(name).unwrap();
        eval_jet(&spec, point, JET_ORDER).unwrap()
    }

    #[test]
    fn great_circle_flag_is_degenerate() {
        let jv = jets_of("great-circle", (0.3, 0.0));
        assert!(matches!(
            osculating_flag(&jv, 1),
            Err(Error::DegenerateFlag(1))
        ));
    }

    #[test]
    fn clifford_torus_first_normal_space_is_a_line() {
        let flag = osculating_flag(&jets_of("clifford-torus", (0.2, 0.7)), 1).unwrap();
        assert_eq!(flag.levels[0].dim(), 1);
    }

    #[test]
    fn equilateral_torus_flag_dimensions() {
        let flag = osculating_flag(&jets_of("equilateral-torus", (0.5, -0.3)), 2).unwrap();
        assert_eq!(flag.levels[0].dim(), 2);
        assert_eq!(flag.levels[1].dim(), 1);
    }

    #[test]
    fn flag_subspaces_are_orthogonal() {
        let flag = osculating_flag(&jets_of("equilateral-torus", (1.1, 0.4)), 2).unwrap();
        let mut all = vec![flag.position.clone()];
        all.extend_from_slice(&flag.tangent);
        for level in &flag.levels {
            all.extend(level.basis.iter().cloned());
        }
        for i in 0..all.len() {
            for j in 0..all.len() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(dot(&all[i], &all[j]), expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn equilateral_torus_is_flat_with_unit_norm_forms() {
        let rec = invariants_at_point(&jets_of("equilateral-torus", (0.9, 2.2)), 2).unwrap();
        assert_relative_eq!(rec.gauss_curvature, 0.0, epsilon = 1e-10);
        assert_relative_eq!(rec.orders[0].norm_sq, 2.0, epsilon = 1e-10);
        assert_relative_eq!(rec.conformal_factor, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn veronese_constant_curvature_and_circular_ellipse() {
        for point in [(0.0, 0.0), (1.3, 0.4), (4.0, -0.8)] {
            let spec = ImmersionSpec::catalog("veronese").unwrap();
            let jv = eval_jet(&spec, point, JET_ORDER).unwrap();
            let rec = invariants_at_point(&jv, 1).unwrap();
            assert_relative_eq!(rec.gauss_curvature, 1.0 / 3.0, epsilon = 1e-9);
            assert_relative_eq!(rec.orders[0].ecc, 0.0, epsilon = 1e-7);
            assert_relative_eq!(rec.orders[0].k_perp, 2.0 / 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn gauss_equation_on_the_catalog() {
        for name in ["clifford-torus", "equilateral-torus", "veronese"] {
            let rec = invariants_at_point(&jets_of(name, (0.37, 1.21)), 1).unwrap();
            let lhs = rec.orders[0].norm_sq;
            let rhs = 2.0 * (1.0 - rec.gauss_curvature);
            assert!(
                (lhs - rhs).abs() <= 1e-8 * lhs.abs().max(rhs.abs()).max(1.0),
                "{name}: |alpha_2|^2 = {lhs} vs 2(1-K) = {rhs}"
            );
        }
    }

    #[test]
    fn first_hopf_coefficient_vanishes_for_isotropic_surfaces() {
        for name in ["equilateral-torus", "veronese"] {
            let phi1 = hopf_coefficient(&jets_of(name, (0.8, 0.15)), 1).unwrap();
            assert!(phi1.norm() < 1e-10, "{name}: {phi1}");
        }
    }

    #[test]
    fn second_hopf_coefficient_of_the_equilateral_torus() {
        for point in [(0.0, 0.0), (0.7, -1.9)] {
            let phi2 = hopf_coefficient(&jets_of("equilateral-torus", point), 2).unwrap();
            assert_relative_eq!(phi2.norm(), 0.125, epsilon = 1e-10);
        }
    }

    #[test]
    fn hopf_modulus_identity() {
        for (name, r) in [
            ("clifford-torus", 1),
            ("equilateral-torus", 1),
            ("equilateral-torus", 2),
            ("veronese", 1),
        ] {
            let jv = jets_of(name, (0.45, 0.82));
            let rec = invariants_at_point(&jv, r).unwrap();
            let block = &rec.orders[r - 1];
            let f = rec.conformal_factor;
            let lhs = block.phi_coeff.norm_sqr();
            let rhs = f.powi(2 * r as i32 + 2)
                * 2.0f64.powi(-2 * r as i32 - 4)
                * (block.norm_sq * block.norm_sq
                    - 4.0f64.powi(r as i32) * block.k_perp * block.k_perp);
            // The right side subtracts terms of size norm_sq^2, so compare
            // against that scale rather than the (possibly tiny) difference.
            let scale = (block.norm_sq * block.norm_sq).max(1e-12);
            assert!(
                (lhs - rhs).abs() <= 1e-8 * scale,
                "{name} r={r}: lhs {lhs} rhs {rhs}"
            );
        }
    }

    #[test]
    fn ellipse_identities_hold() {
        for (name, orders) in [
            ("clifford-torus", 1),
            ("equilateral-torus", 2),
            ("veronese", 1),
        ] {
            let rec = invariants_at_point(&jets_of(name, (1.7, 0.6)), orders).unwrap();
            for (idx, block) in rec.orders.iter().enumerate() {
                let r = idx as i32 + 1;
                assert_relative_eq!(
                    block.k_perp,
                    2.0 * block.kappa * block.mu,
                    epsilon = 1e-10,
                    max_relative = 1e-10
                );
                assert_relative_eq!(
                    block.norm_sq,
                    2.0f64.powi(r) * (block.kappa * block.kappa + block.mu * block.mu),
                    epsilon = 1e-10,
                    max_relative = 1e-10
                );
                assert_relative_eq!(
                    block.a_plus,
                    (block.norm_sq / 2.0f64.powi(r) + block.k_perp).sqrt(),
                    epsilon = 1e-9
                );
                assert!(block.kappa >= block.mu && block.mu >= -1e-15);
                assert!((0.0..=1.0 + 1e-12).contains(&block.ecc));
            }
        }
    }

    #[test]
    fn intrinsic_curvature_of_the_veronese_bundle() {
        let rec = invariants_at_point(&jets_of("veronese", (0.25, 0.5)), 1).unwrap();
        let kstar = rec.orders[0].k_star.expect("flag end is provable here");
        assert_relative_eq!(kstar, rec.orders[0].k_perp, epsilon = 1e-9);
        assert_relative_eq!(kstar, 2.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn intrinsic_curvature_of_the_equilateral_torus_vanishes() {
        let rec = invariants_at_point(&jets_of("equilateral-torus", (0.4, 1.2)), 1).unwrap();
        let kstar = rec.orders[0]
            .k_star
            .expect("norm of the third form is known");
        assert_relative_eq!(kstar, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn record_stream_exposes_intrinsic_curvature() {
        let recs: Vec<InvariantRecord> = [(0.3, 0.9), (1.0, 0.0)]
            .iter()
            .map(|&p| invariants_at_point(&jets_of("veronese", p), 1).unwrap())
            .collect();
        let kstars = intrinsic_bundle_curvature(&recs, 1).unwrap();
        for k in kstars {
            assert_relative_eq!(k, 2.0 / 3.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn holonomy_oracle_matches_the_formula() {
        let veronese = ImmersionSpec::catalog("veronese").unwrap();
        let fd = connection_curvature_fd(&veronese, 1, (0.4, 0.1), 1e-2).unwrap();
        assert!((fd - 2.0 / 3.0).abs() < 1e-4, "holonomy estimate {fd}");

        let torus = ImmersionSpec::catalog("equilateral-torus").unwrap();
        let fd = connection_curvature_fd(&torus, 1, (0.8, 0.3), 1e-2).unwrap();
        assert!(fd.abs() < 1e-4, "holonomy estimate {fd}");
    }

    #[test]
    fn field_names_and_values_stay_aligned() {
        let rec = invariants_at_point(&jets_of("equilateral-torus", (0.0, 0.0)), 2).unwrap();
        let names = record_field_names(2);
        let values = record_values(&rec);
        assert_eq!(names.len(), values.len());
        assert_eq!(names[0], "x");
        assert_eq!(names[4], "H3_re");
        assert_eq!(names[17], "Kstar_1");
    }
}
