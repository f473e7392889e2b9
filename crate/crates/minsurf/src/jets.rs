//! Truncated bivariate Taylor arithmetic over complex doubles.
//!
//! A [`Jet2`] holds the Taylor coefficients of a smooth function of two real
//! variables at a base point, up to a fixed truncation order. Coefficients are
//! factorial-normalized (`coeff(i, j) = partial_x^i partial_y^j f / (i! j!)`),
//! which keeps repeated products stable at the orders used here.

use num_complex::Complex64;

use crate::{Error, Result};

/// Truncation order used when callers do not override it.
pub const DEFAULT_ORDER: usize = 8;

/// Relative half-width of the band around the positive real axis inside which
/// a constant term counts as admissible for `log`, `sqrt`, and real powers.
const REAL_AXIS_TOL: f64 = 1e-9;

/// Truncated Taylor expansion of a scalar function of two real variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    order: usize,
    coeffs: Vec<Complex64>,
}

/// Analytic functions applicable to a jet through series composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticFn {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Reciprocal,
    /// Real exponent; integer exponents are exact for any constant term.
    Pow(f64),
}

fn tri_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

fn tri_idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Jet2 {
    /// Jet with all coefficients zero.
    pub fn zero(order: usize) -> Self {
        Jet2 {
            order,
            coeffs: vec![Complex64::ZERO; tri_len(order)],
        }
    }

    /// Jet of the constant function `c`.
    pub fn constant(order: usize, c: Complex64) -> Self {
        let mut jet = Jet2::zero(order);
        jet.coeffs[0] = c;
        jet
    }

    /// Jet of the coordinate function `x` based at `x0`.
    pub fn variable_x(order: usize, x0: f64) -> Self {
        let mut jet = Jet2::constant(order, Complex64::new(x0, 0.0));
        if order >= 1 {
            jet.coeffs[tri_idx(1, 0)] = Complex64::ONE;
        }
        jet
    }

    /// Jet of the coordinate function `y` based at `y0`.
    pub fn variable_y(order: usize, y0: f64) -> Self {
        let mut jet = Jet2::constant(order, Complex64::new(y0, 0.0));
        if order >= 1 {
            jet.coeffs[tri_idx(0, 1)] = Complex64::ONE;
        }
        jet
    }

    /// Truncation order.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Taylor coefficient of `x^i y^j`; zero outside the stored range.
    pub fn coeff(&self, i: usize, j: usize) -> Complex64 {
        if i + j <= self.order {
            self.coeffs[tri_idx(i, j)]
        } else {
            Complex64::ZERO
        }
    }

    /// Overwrites the Taylor coefficient of `x^i y^j`.
    ///
    /// # Panics
    /// Panics if `i + j` exceeds the jet order.
    pub fn set_coeff(&mut self, i: usize, j: usize, c: Complex64) {
        assert!(i + j <= self.order, "coefficient index exceeds jet order");
        self.coeffs[tri_idx(i, j)] = c;
    }

    /// Value of the function at the base point.
    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Copy truncated to `order` (must not exceed the current order).
    pub fn truncated(&self, order: usize) -> Self {
        assert!(order <= self.order, "cannot extend a jet's order");
        let mut out = Jet2::zero(order);
        out.coeffs.copy_from_slice(&self.coeffs[..tri_len(order)]);
        out
    }

    /// Jet scaled by a complex constant.
    pub fn scale(&self, c: Complex64) -> Self {
        Jet2 {
            order: self.order,
            coeffs: self.coeffs.iter().map(|&a| a * c).collect(),
        }
    }

    /// Coefficientwise complex conjugate (the jet of the conjugate function).
    pub fn conj(&self) -> Self {
        Jet2 {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| a.conj()).collect(),
        }
    }

    /// Jet of the x-derivative; the order drops by one.
    ///
    /// # Panics
    /// Panics if the order is zero.
    pub fn deriv_x(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut out = Jet2::zero(self.order - 1);
        for i in 0..self.order {
            for j in 0..self.order - i {
                out.coeffs[tri_idx(i, j)] = self.coeff(i + 1, j) * (i + 1) as f64;
            }
        }
        out
    }

    /// Jet of the y-derivative; the order drops by one.
    ///
    /// # Panics
    /// Panics if the order is zero.
    pub fn deriv_y(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut out = Jet2::zero(self.order - 1);
        for i in 0..self.order {
            for j in 0..self.order - i {
                out.coeffs[tri_idx(i, j)] = self.coeff(i, j + 1) * (j + 1) as f64;
            }
        }
        out
    }
}

/// Coefficientwise sum, truncated to the smaller operand order.
pub fn jet_add(a: &Jet2, b: &Jet2) -> Jet2 {
    let order = a.order.min(b.order);
    let mut out = Jet2::zero(order);
    for k in 0..tri_len(order) {
        out.coeffs[k] = a.coeffs[k] + b.coeffs[k];
    }
    out
}

/// Coefficientwise difference, truncated to the smaller operand order.
pub fn jet_sub(a: &Jet2, b: &Jet2) -> Jet2 {
    jet_add(a, &b.scale(-Complex64::ONE))
}

/// Truncated Cauchy product at the smaller operand order.
pub fn jet_mul(a: &Jet2, b: &Jet2) -> Jet2 {
    let order = a.order.min(b.order);
    let mut out = Jet2::zero(order);
    for da in 0..=order {
        for ja in 0..=da {
            let ia = da - ja;
            let ca = a.coeffs[tri_idx(ia, ja)];
            if ca == Complex64::ZERO {
                continue;
            }
            for db in 0..=order - da {
                for jb in 0..=db {
                    let ib = db - jb;
                    let cb = b.coeffs[tri_idx(ib, jb)];
                    if cb != Complex64::ZERO {
                        out.coeffs[tri_idx(ia + ib, ja + jb)] += ca * cb;
                    }
                }
            }
        }
    }
    out
}

/// Mixed partial `partial_x^i partial_y^j` of the underlying function at the
/// base point, recovered from the factorial-normalized coefficient.
pub fn extract_partial(a: &Jet2, i: usize, j: usize) -> Result<Complex64> {
    if i + j > a.order {
        return Err(Error::OrderExceeded {
            requested: i + j,
            order: a.order,
        });
    }
    Ok(a.coeff(i, j) * factorial(i) * factorial(j))
}

/// Composes the univariate Taylor series of `func` with the jet `a`.
pub fn jet_analytic(func: AnalyticFn, a: &Jet2) -> Result<Jet2> {
    let u0 = a.value();
    match func {
        AnalyticFn::Exp => {
            let e = u0.exp();
            let series = series_from(|k| e / factorial(k), a.order);
            Ok(compose(&series, a))
        }
        AnalyticFn::Sin => {
            let cycle = [u0.sin(), u0.cos(), -u0.sin(), -u0.cos()];
            let series = series_from(|k| cycle[k % 4] / factorial(k), a.order);
            Ok(compose(&series, a))
        }
        AnalyticFn::Cos => {
            let cycle = [u0.cos(), -u0.sin(), -u0.cos(), u0.sin()];
            let series = series_from(|k| cycle[k % 4] / factorial(k), a.order);
            Ok(compose(&series, a))
        }
        AnalyticFn::Log => {
            require_positive_real(u0, "log")?;
            let p = u0.inv();
            let mut series = vec![u0.ln()];
            let mut pk = Complex64::ONE;
            for k in 1..=a.order {
                pk *= p;
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                series.push(pk * sign / k as f64);
            }
            Ok(compose(&series, a))
        }
        AnalyticFn::Sqrt => {
            require_positive_real(u0, "sqrt")?;
            Ok(compose(&binomial_series(u0, 0.5, a.order), a))
        }
        AnalyticFn::Reciprocal => {
            if u0.norm() == 0.0 {
                return Err(Error::DomainError(
                    "reciprocal of a jet with zero constant term".into(),
                ));
            }
            let mut series = Vec::with_capacity(a.order + 1);
            let mut g = u0.inv();
            series.push(g);
            for _ in 1..=a.order {
                g = -g / u0;
                series.push(g);
            }
            Ok(compose(&series, a))
        }
        AnalyticFn::Pow(e) => {
            if e.fract() == 0.0 && e.abs() < 1e9 {
                return integer_power(a, e as i64);
            }
            require_positive_real(u0, "pow with non-integer exponent")?;
            Ok(compose(&binomial_series(u0, e, a.order), a))
        }
    }
}

fn require_positive_real(u0: Complex64, what: &str) -> Result<()> {
    let band = REAL_AXIS_TOL * u0.re.abs().max(1.0);
    if u0.re <= 0.0 || u0.im.abs() > band {
        return Err(Error::DomainError(format!(
            "{what} needs a positive real constant term, got {u0}"
        )));
    }
    Ok(())
}

fn series_from(coeff: impl Fn(usize) -> Complex64, order: usize) -> Vec<Complex64> {
    (0..=order).map(coeff).collect()
}

/// Series of `u -> u^e` around `u0` via the generalized binomial recurrence.
fn binomial_series(u0: Complex64, e: f64, order: usize) -> Vec<Complex64> {
    let mut series = Vec::with_capacity(order + 1);
    let mut g = u0.powf(e);
    series.push(g);
    for k in 1..=order {
        g = g * (e - (k - 1) as f64) / (k as f64) / u0;
        series.push(g);
    }
    series
}

/// Evaluates `sum_k series[k] * (a - a0)^k` by Horner recursion in jet space.
fn compose(series: &[Complex64], a: &Jet2) -> Jet2 {
    let mut h = a.clone();
    h.coeffs[0] = Complex64::ZERO;
    let mut acc = Jet2::constant(a.order, *series.last().unwrap());
    for &g in series.iter().rev().skip(1) {
        acc = jet_mul(&acc, &h);
        acc.coeffs[0] += g;
    }
    acc
}

fn integer_power(a: &Jet2, e: i64) -> Result<Jet2> {
    let base = if e < 0 {
        jet_analytic(AnalyticFn::Reciprocal, a)?
    } else {
        a.clone()
    };
    let mut n = e.unsigned_abs();
    let mut acc = Jet2::constant(a.order, Complex64::ONE);
    let mut sq = base;
    while n > 0 {
        if n & 1 == 1 {
            acc = jet_mul(&acc, &sq);
        }
        n >>= 1;
        if n > 0 {
            sq = jet_mul(&sq, &sq);
        }
    }
    Ok(acc)
}

/// Jets of the ambient coordinates of a map into Euclidean space, sharing one
/// base point and order.
#[derive(Debug, Clone)]
pub struct JetVec {
    components: Vec<Jet2>,
}

impl JetVec {
    /// Bundles component jets; they must share a common order.
    ///
    /// # Panics
    /// Panics if the components disagree on order or the list is empty.
    pub fn new(components: Vec<Jet2>) -> Self {
        let order = components
            .first()
            .expect("a jet vector needs at least one component")
            .order();
        assert!(
            components.iter().all(|c| c.order() == order),
            "jet vector components must share one order"
        );
        JetVec { components }
    }

    /// Number of ambient coordinates.
    pub fn ambient_dim(&self) -> usize {
        self.components.len()
    }

    /// Shared truncation order.
    pub fn order(&self) -> usize {
        self.components[0].order()
    }

    /// Component jets.
    pub fn components(&self) -> &[Jet2] {
        &self.components
    }

    /// Mixed partial of every component at the base point.
    pub fn partial(&self, i: usize, j: usize) -> Result<Vec<Complex64>> {
        self.components
            .iter()
            .map(|c| extract_partial(c, i, j))
            .collect()
    }
}
