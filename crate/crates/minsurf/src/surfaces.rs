//! Surface catalog, jet-valued evaluation of immersions into round spheres,
//! and validators for the sphere, conformality, minimality, and
//! substantiality properties the frame computations assume.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::jets::{
    extract_partial, jet_add, jet_analytic, jet_mul, jet_sub, AnalyticFn, Jet2, JetVec,
};
use crate::{Error, Result};

/// Largest jet order the evaluators accept.
pub const MAX_JET_ORDER: usize = 16;

/// Residual below which a constructor-level structural constraint passes.
pub const CONSTRAINT_TOL: f64 = 1e-12;

/// Conformality residual admitted before frame formulas are trusted.
pub const CONFORMAL_TOL: f64 = 1e-8;

/// Singular values above this certify directions as substantially filled.
pub const SUBSTANTIAL_THRESHOLD: f64 = 1e-3;

/// Common frequency modulus after normalization; makes the induced metric
/// the identity for accepted exp-type surfaces.
pub const NORMALIZED_FREQUENCY: f64 = std::f64::consts::SQRT_2;

/// Names accepted by [`ImmersionSpec::catalog`].
pub const CATALOG: &[&str] = &[
    "great-circle",
    "clifford-torus",
    "equilateral-torus",
    "veronese",
];

/// Rectangle of parameter values; either side may be degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Domain {
    /// Square domain covering one period box of the standard tori.
    pub fn standard() -> Self {
        Domain {
            x: (0.0, std::f64::consts::TAU),
            y: (0.0, std::f64::consts::TAU),
        }
    }
}

/// Uniform sampling grid over a parameter domain.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub domain: Domain,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, domain: Domain) -> Self {
        Grid { nx, ny, domain }
    }

    /// Sample points in row order: y varies slowest, x fastest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(self.nx * self.ny);
        for iy in 0..self.ny {
            let y = lerp(self.domain.y, iy, self.ny);
            for ix in 0..self.nx {
                pts.push((lerp(self.domain.x, ix, self.nx), y));
            }
        }
        pts
    }
}

fn lerp(range: (f64, f64), i: usize, n: usize) -> f64 {
    if n <= 1 {
        0.5 * (range.0 + range.1)
    } else {
        range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
    }
}

/// Flat minimal torus given by sinusoids on orthogonal coordinate 2-planes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTypeSurface {
    amplitudes: Vec<f64>,
    frequencies: Vec<[f64; 2]>,
    phases: Vec<f64>,
}

impl ExpTypeSurface {
    /// Builds without constraint checks; prefer [`make_exp_type`].
    pub fn unchecked(amplitudes: Vec<f64>, frequencies: Vec<[f64; 2]>, phases: Vec<f64>) -> Self {
        assert!(
            amplitudes.len() == frequencies.len() && amplitudes.len() == phases.len(),
            "amplitude, frequency, and phase lists must have equal length"
        );
        ExpTypeSurface {
            amplitudes,
            frequencies,
            phases,
        }
    }

    pub fn m_planes(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.m_planes()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn frequencies(&self) -> &[[f64; 2]] {
        &self.frequencies
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Copy with every frequency vector rotated by `angle`.
    pub fn rotated_frequencies(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let frequencies = self
            .frequencies
            .iter()
            .map(|&[fx, fy]| [c * fx - s * fy, s * fx + c * fy])
            .collect();
        ExpTypeSurface {
            amplitudes: self.amplitudes.clone(),
            frequencies,
            phases: self.phases.clone(),
        }
    }
}

/// Checks the unit-sphere, common-modulus, and conformality constraints,
/// normalizes the common frequency modulus to √2, and returns the surface.
pub fn make_exp_type(
    amplitudes: Vec<f64>,
    frequencies: Vec<[f64; 2]>,
    phases: Vec<f64>,
) -> Result<ExpTypeSurface> {
    let m = amplitudes.len();
    if m < 2 {
        return Err(Error::ConstraintViolation(
            "at least two coordinate planes are required".into(),
        ));
    }
    if frequencies.len() != m || phases.len() != m {
        return Err(Error::ConstraintViolation(
            "amplitude, frequency, and phase lists must have equal length".into(),
        ));
    }
    let sum_sq: f64 = amplitudes.iter().map(|a| a * a).sum();
    if (sum_sq - 1.0).abs() > CONSTRAINT_TOL {
        return Err(Error::ConstraintViolation(format!(
            "unit-sphere constraint: sum of squared amplitudes is {sum_sq}, expected 1"
        )));
    }
    let mu = (frequencies[0][0].powi(2) + frequencies[0][1].powi(2)).sqrt();
    for (j, f) in frequencies.iter().enumerate() {
        let norm = (f[0] * f[0] + f[1] * f[1]).sqrt();
        if (norm - mu).abs() > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolation(format!(
                "minimality constraint: frequency {j} has modulus {norm}, expected common {mu}"
            )));
        }
    }
    let mut gram = [[0.0f64; 2]; 2];
    for (a, f) in amplitudes.iter().zip(&frequencies) {
        for r in 0..2 {
            for c in 0..2 {
                gram[r][c] += a * a * f[r] * f[c];
            }
        }
    }
    let half_mu_sq = 0.5 * mu * mu;
    let conf_residual = (gram[0][0] - half_mu_sq)
        .abs()
        .max((gram[1][1] - half_mu_sq).abs())
        .max(gram[0][1].abs())
        .max(gram[1][0].abs());
    if conf_residual > CONSTRAINT_TOL * mu.powi(2).max(1.0) {
        return Err(Error::ConstraintViolation(format!(
            "conformality constraint: amplitude-weighted frequency Gram matrix deviates from (mu^2/2) I by {conf_residual}"
        )));
    }
    let scale = NORMALIZED_FREQUENCY / mu;
    let frequencies = frequencies
        .iter()
        .map(|&[fx, fy]| [fx * scale, fy * scale])
        .collect();
    Ok(ExpTypeSurface {
        amplitudes,
        frequencies,
        phases,
    })
}

/// Weighted orthogonal sum of associated-family members of a base curve.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSumSpec {
    pub weights: Vec<f64>,
    pub angles: Vec<f64>,
    pub base: Box<ImmersionSpec>,
}

/// How a surface is parametrized.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    Catalog(String),
    ExpType(ExpTypeSurface),
    DirectSum(DirectSumSpec),
    Associated {
        base: Box<ImmersionSpec>,
        angle: f64,
    },
}

/// A parametrized immersion into a round sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionSpec {
    pub kind: SurfaceKind,
    pub label: String,
}

impl ImmersionSpec {
    /// Looks up a catalog surface by name.
    pub fn catalog(name: &str) -> Result<Self> {
        if CATALOG.contains(&name) {
            Ok(ImmersionSpec {
                kind: SurfaceKind::Catalog(name.to_string()),
                label: name.to_string(),
            })
        } else {
            Err(Error::UnknownCatalogName(name.to_string()))
        }
    }

    /// Wraps an exp-type surface.
    pub fn exp_type(surface: ExpTypeSurface, label: impl Into<String>) -> Self {
        ImmersionSpec {
            kind: SurfaceKind::ExpType(surface),
            label: label.into(),
        }
    }

    /// Dimension of the ambient Euclidean space (the sphere lives in one less).
    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            SurfaceKind::Catalog(name) => match name.as_str() {
                "great-circle" => 6,
                "clifford-torus" => 4,
                "equilateral-torus" => 6,
                "veronese" => 5,
                _ => unreachable!("catalog names are validated on construction"),
            },
            SurfaceKind::ExpType(s) => s.ambient_dim(),
            SurfaceKind::DirectSum(d) => 6 * d.weights.len(),
            SurfaceKind::Associated { base, .. } => base.ambient_dim(),
        }
    }

    /// Parameter window used when the caller does not supply one.
    pub fn default_domain(&self) -> Domain {
        match &self.kind {
            SurfaceKind::Catalog(name) => match name.as_str() {
                "great-circle" => Domain {
                    x: (0.0, std::f64::consts::TAU),
                    y: (0.0, 0.0),
                },
                "veronese" => Domain {
                    x: (0.0, std::f64::consts::TAU),
                    y: (-1.0, 1.0),
                },
                _ => Domain::standard(),
            },
            SurfaceKind::DirectSum(d) => d.base.default_domain(),
            SurfaceKind::Associated { base, .. } => base.default_domain(),
            _ => Domain::standard(),
        }
    }

    /// Default 16 x 16 grid over the default domain.
    pub fn default_grid(&self) -> Grid {
        Grid::new(16, 16, self.default_domain())
    }

    /// The underlying exp-type data, when this spec reduces to one.
    pub fn resolve_exp_type(&self) -> Result<ExpTypeSurface> {
        match &self.kind {
            SurfaceKind::ExpType(s) => Ok(s.clone()),
            SurfaceKind::Catalog(name) => catalog_exp_type(name).ok_or_else(|| {
                Error::UnsupportedKind(format!("catalog surface `{name}` is not of exp type"))
            }),
            SurfaceKind::Associated { base, angle } => {
                Ok(base.resolve_exp_type()?.rotated_frequencies(-angle / 3.0))
            }
            SurfaceKind::DirectSum(_) => Err(Error::UnsupportedKind(
                "direct sums are not a single exp-type surface".into(),
            )),
        }
    }

    /// Parses the plain-text key = value surface description.
    ///
    /// Keys: `kind` (catalog | exp_type | direct_sum | associated), `name`,
    /// `amplitudes`, `frequencies` (pairs separated by `;`), `phases`,
    /// `weights`, `theta`, `angle`, `base` (catalog name).
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut map = std::collections::BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::ConstraintViolation(format!("config line `{line}` is not key = value"))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let kind = map
            .get("kind")
            .ok_or_else(|| Error::ConstraintViolation("config is missing `kind`".into()))?
            .clone();
        let get = |key: &str| -> Result<&String> {
            map.get(key).ok_or_else(|| {
                Error::ConstraintViolation(format!("config kind `{kind}` is missing `{key}`"))
            })
        };
        match kind.as_str() {
            "catalog" => ImmersionSpec::catalog(get("name")?),
            "exp_type" => {
                let amplitudes = parse_list(get("amplitudes")?)?;
                let frequencies = parse_pairs(get("frequencies")?)?;
                let phases = match map.get("phases") {
                    Some(v) => parse_list(v)?,
                    None => vec![0.0; amplitudes.len()],
                };
                let surface = make_exp_type(amplitudes, frequencies, phases)?;
                Ok(ImmersionSpec::exp_type(surface, "config exp-type"))
            }
            "direct_sum" => {
                let weights = parse_list(get("weights")?)?;
                let angles = parse_list(get("theta")?)?;
                let base = match map.get("base") {
                    Some(name) => ImmersionSpec::catalog(name)?,
                    None => ImmersionSpec::catalog("equilateral-torus")?,
                };
                Ok(ImmersionSpec {
                    label: format!("direct sum over {}", base.label),
                    kind: SurfaceKind::DirectSum(DirectSumSpec {
                        weights,
                        angles,
                        base: Box::new(base),
                    }),
                })
            }
            "associated" => {
                let angle: f64 = get("angle")?.parse().map_err(|_| {
                    Error::ConstraintViolation("`angle` must be a real number".into())
                })?;
                let base = match map.get("base") {
                    Some(name) => ImmersionSpec::catalog(name)?,
                    None => ImmersionSpec::catalog("equilateral-torus")?,
                };
                Ok(ImmersionSpec {
                    label: format!("associated({}, {angle})", base.label),
                    kind: SurfaceKind::Associated {
                        base: Box::new(base),
                        angle,
                    },
                })
            }
            other => Err(Error::ConstraintViolation(format!(
                "unknown config kind `{other}`"
            ))),
        }
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::ConstraintViolation(format!("bad number `{}`", s.trim())))
        })
        .collect()
}

fn parse_pairs(text: &str) -> Result<Vec<[f64; 2]>> {
    text.split(';')
        .map(|pair| {
            let nums: Vec<f64> = pair
                .split([',', ' '])
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::ConstraintViolation(format!("bad pair `{pair}`")))?;
            if nums.len() != 2 {
                return Err(Error::ConstraintViolation(format!(
                    "frequency `{pair}` must have two components"
                )));
            }
            Ok([nums[0], nums[1]])
        })
        .collect()
}

/// Exp-type data of the catalog tori.
fn catalog_exp_type(name: &str) -> Option<ExpTypeSurface> {
    let sqrt2 = std::f64::consts::SQRT_2;
    match name {
        "clifford-torus" => Some(ExpTypeSurface::unchecked(
            vec![0.5f64.sqrt(); 2],
            vec![[sqrt2, 0.0], [0.0, sqrt2]],
            vec![0.0; 2],
        )),
        "equilateral-torus" => Some(ExpTypeSurface::unchecked(
            vec![(1.0f64 / 3.0).sqrt(); 3],
            (0..3)
                .map(|j| {
                    let ang = std::f64::consts::TAU * j as f64 / 3.0;
                    [sqrt2 * ang.cos(), sqrt2 * ang.sin()]
                })
                .collect(),
            vec![0.0; 3],
        )),
        _ => None,
    }
}

/// Jets of the Mercator parametrization of the unit 2-sphere:
/// (sech y cos x, sech y sin x, tanh y).
fn mercator_jets(point: (f64, f64), order: usize) -> Result<[Jet2; 3]> {
    let x = Jet2::variable_x(order, point.0);
    let y = Jet2::variable_y(order, point.1);
    let ey = jet_analytic(AnalyticFn::Exp, &y)?;
    let emy = jet_analytic(AnalyticFn::Reciprocal, &ey)?;
    let half = Complex64::new(0.5, 0.0);
    let cosh = jet_add(&ey, &emy).scale(half);
    let sinh = jet_sub(&ey, &emy).scale(half);
    let sech = jet_analytic(AnalyticFn::Reciprocal, &cosh)?;
    let tanh = jet_mul(&sinh, &sech);
    let cos_x = jet_analytic(AnalyticFn::Cos, &x)?;
    let sin_x = jet_analytic(AnalyticFn::Sin, &x)?;
    Ok([jet_mul(&sech, &cos_x), jet_mul(&sech, &sin_x), tanh])
}

fn exp_type_jets(surface: &ExpTypeSurface, point: (f64, f64), order: usize) -> Result<Vec<Jet2>> {
    let mut components = Vec::with_capacity(surface.ambient_dim());
    for j in 0..surface.m_planes() {
        let [fx, fy] = surface.frequencies[j];
        let base = fx * point.0 + fy * point.1 + surface.phases[j];
        let mut theta = Jet2::constant(order, Complex64::new(base, 0.0));
        if order >= 1 {
            theta.set_coeff(1, 0, Complex64::new(fx, 0.0));
            theta.set_coeff(0, 1, Complex64::new(fy, 0.0));
        }
        let amp = Complex64::new(surface.amplitudes[j], 0.0);
        components.push(jet_analytic(AnalyticFn::Cos, &theta)?.scale(amp));
        components.push(jet_analytic(AnalyticFn::Sin, &theta)?.scale(amp));
    }
    Ok(components)
}

/// Taylor expansion of every ambient coordinate of the surface at `point`.
pub fn eval_jet(spec: &ImmersionSpec, point: (f64, f64), order: usize) -> Result<JetVec> {
    if order > MAX_JET_ORDER {
        return Err(Error::OrderExceeded {
            requested: order,
            order: MAX_JET_ORDER,
        });
    }
    match &spec.kind {
        SurfaceKind::Catalog(name) => match name.as_str() {
            "great-circle" => {
                let [a, b, c] = mercator_jets(point, order)?;
                let zero = Jet2::zero(order);
                Ok(JetVec::new(vec![a, b, c, zero.clone(), zero.clone(), zero]))
            }
            "veronese" => {
                let [x, y, z] = mercator_jets(point, order)?;
                let s3 = Complex64::new(3.0f64.sqrt(), 0.0);
                let xx = jet_mul(&x, &x);
                let yy = jet_mul(&y, &y);
                let zz = jet_mul(&z, &z);
                let c4 = jet_sub(&xx, &yy).scale(s3 * 0.5);
                let c5 = jet_sub(&jet_add(&xx, &yy), &zz.scale(Complex64::new(2.0, 0.0)))
                    .scale(Complex64::new(0.5, 0.0));
                Ok(JetVec::new(vec![
                    jet_mul(&y, &z).scale(s3),
                    jet_mul(&z, &x).scale(s3),
                    jet_mul(&x, &y).scale(s3),
                    c4,
                    c5,
                ]))
            }
            other => {
                let surface = catalog_exp_type(other)
                    .ok_or_else(|| Error::UnknownCatalogName(other.to_string()))?;
                Ok(JetVec::new(exp_type_jets(&surface, point, order)?))
            }
        },
        SurfaceKind::ExpType(surface) => Ok(JetVec::new(exp_type_jets(surface, point, order)?)),
        SurfaceKind::Associated { .. } => {
            let surface = spec.resolve_exp_type()?;
            Ok(JetVec::new(exp_type_jets(&surface, point, order)?))
        }
        SurfaceKind::DirectSum(d) => {
            let base = d.base.resolve_exp_type()?;
            if base.ambient_dim() != 6 {
                return Err(Error::UnsupportedKind(
                    "direct sums require a base curve with six ambient coordinates".into(),
                ));
            }
            let mut components = Vec::with_capacity(6 * d.weights.len());
            for (w, theta) in d.weights.iter().zip(&d.angles) {
                let member = base.rotated_frequencies(-theta / 3.0);
                let amp = Complex64::new(*w, 0.0);
                for jet in exp_type_jets(&member, point, order)? {
                    components.push(jet.scale(amp));
                }
            }
            Ok(JetVec::new(components))
        }
    }
}

/// Ambient position at a parameter point.
pub fn eval_point(spec: &ImmersionSpec, point: (f64, f64)) -> Result<Vec<f64>> {
    Ok(eval_jet(spec, point, 0)?
        .components()
        .iter()
        .map(|c| c.value().re)
        .collect())
}

/// Maximum deviation of the squared ambient norm from 1 over the grid.
pub fn validate_sphere(spec: &ImmersionSpec, grid: &Grid) -> Result<f64> {
    let mut worst = 0.0f64;
    for p in grid.points() {
        let f = eval_point(spec, p)?;
        let norm_sq: f64 = f.iter().map(|v| v * v).sum();
        worst = worst.max((norm_sq - 1.0).abs());
    }
    Ok(worst)
}

/// Maximum conformality residuals over the grid:
/// `(max ||f_x|^2 - |f_y|^2|, max |<f_x, f_y>|)`.
pub fn validate_conformal(spec: &ImmersionSpec, grid: &Grid) -> Result<(f64, f64)> {
    let mut worst_diag = 0.0f64;
    let mut worst_cross = 0.0f64;
    for p in grid.points() {
        let jv = eval_jet(spec, p, 1)?;
        let fx = jv.partial(1, 0)?;
        let fy = jv.partial(0, 1)?;
        let exx: f64 = fx.iter().map(|v| v.re * v.re).sum();
        let eyy: f64 = fy.iter().map(|v| v.re * v.re).sum();
        let exy: f64 = fx.iter().zip(&fy).map(|(a, b)| a.re * b.re).sum();
        worst_diag = worst_diag.max((exx - eyy).abs());
        worst_cross = worst_cross.max(exy.abs());
    }
    Ok((worst_diag, worst_cross))
}

/// Maximum componentwise residual of `Delta f + 2 F f` over the grid; zero
/// exactly when the conformal immersion is minimal in the sphere.
pub fn validate_minimal(spec: &ImmersionSpec, grid: &Grid) -> Result<f64> {
    let (diag, cross) = validate_conformal(spec, grid)?;
    if diag > CONFORMAL_TOL || cross > CONFORMAL_TOL {
        return Err(Error::NotConformal(format!(
            "conformality residuals ({diag:.3e}, {cross:.3e}) exceed {CONFORMAL_TOL:.0e}"
        )));
    }
    let mut worst = 0.0f64;
    for p in grid.points() {
        let jv = eval_jet(spec, p, 2)?;
        let fx = jv.partial(1, 0)?;
        let conformal_factor: f64 = fx.iter().map(|v| v.re * v.re).sum();
        for comp in jv.components() {
            let lap = extract_partial(comp, 2, 0)? + extract_partial(comp, 0, 2)?;
            let residual = lap + comp.value() * 2.0 * conformal_factor;
            worst = worst.max(residual.norm());
        }
    }
    Ok(worst)
}

/// Rank data of the sampled image: positions plus first derivatives along
/// the nondegenerate domain directions.
#[derive(Debug, Clone)]
pub struct SubstantialReport {
    pub smallest_singular_value: f64,
    pub numeric_rank: usize,
    pub defect_dim: usize,
    /// Orthonormal basis of the unfilled ambient directions, one row each.
    pub defect_basis: Vec<Vec<f64>>,
}

impl SubstantialReport {
    pub fn is_substantial(&self) -> bool {
        self.smallest_singular_value > SUBSTANTIAL_THRESHOLD
    }
}

/// Samples positions and domain-direction derivatives and reports how much
/// of the ambient space the surface fills.
pub fn substantial_check(spec: &ImmersionSpec, sample_count: usize) -> Result<SubstantialReport> {
    let dim = spec.ambient_dim();
    assert!(
        sample_count >= dim,
        "need at least as many samples as ambient dimensions"
    );
    let domain = spec.default_domain();
    let use_x = domain.x.1 > domain.x.0;
    let use_y = domain.y.1 > domain.y.0;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5afe5eed);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for _ in 0..sample_count {
        let x = rng.gen_range(domain.x.0..=domain.x.1.max(domain.x.0 + f64::MIN_POSITIVE));
        let y = if use_y {
            rng.gen_range(domain.y.0..=domain.y.1)
        } else {
            domain.y.0
        };
        let jv = eval_jet(spec, (x, y), 1)?;
        rows.push(jv.partial(0, 0)?.iter().map(|v| v.re).collect());
        if use_x {
            rows.push(jv.partial(1, 0)?.iter().map(|v| v.re).collect());
        }
        if use_y {
            rows.push(jv.partial(0, 1)?.iter().map(|v| v.re).collect());
        }
    }
    let nrows = rows.len();
    let scale = 1.0 / (nrows as f64).sqrt();
    let mat = nalgebra::DMatrix::from_fn(nrows, dim, |r, c| rows[r][c] * scale);
    let svd = nalgebra::SVD::new(mat, false, true);
    let mut singular: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let numeric_rank = singular
        .iter()
        .filter(|&&s| s > SUBSTANTIAL_THRESHOLD)
        .count();
    let v_t = svd.v_t.expect("SVD with V requested");
    let defect_basis = (numeric_rank..dim)
        .map(|r| v_t.row(r).iter().copied().collect())
        .collect();
    Ok(SubstantialReport {
        smallest_singular_value: *singular.last().unwrap(),
        numeric_rank,
        defect_dim: dim - numeric_rank,
        defect_basis,
    })
}
