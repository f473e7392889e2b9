//! Implementations of the six commands.

use crate::report::{
    self, AuditReport, AuditRow, CatalogEntry, CheckReport, CvectorsReport, DirectsumReport,
    Flagged, Format, Gate, InvariantSummary, InvariantsReport, ListReport, MinMax, OrderSummary,
    PhaseLaw, PolarCmdReport, Validation, SCHEMA_VERSION,
};
use crate::settings::Settings;
use crate::{Failure, EXIT_CONDITION_FAIL, EXIT_CURVATURE_ONE, EXIT_DEGENERATE, EXIT_PASS};
use minsurf::conditions::{evaluate_condition, Condition};
use minsurf::directsum::{
    build_direct_sum, c_vector_recursion, compare_predicted_measured, orthogonality_report,
    phase_law_gaps, polar_surface, validate_summands,
};
use minsurf::frames::{invariants_at, record_field_names, record_values, InvariantRecord};
use minsurf::surfaces::{
    validate_conformal, validate_minimal, validate_sphere, DirectSumSpec, Grid, ImmersionSpec,
    SurfaceKind, CATALOG,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Ceiling on the sphere, conformality, and minimality residuals of a
/// constructed direct sum.
const VALIDATION_TOL: f64 = 1e-8;
/// Ceiling on the orthogonality violations of command-line coefficient
/// vectors, which carry the rounding of decimal weight input.
const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Ceiling on audited orthogonality violations from exact random draws.
const AUDIT_TOL: f64 = 1e-12;
/// Default ceiling on certification gaps and congruence error.
const GAP_TOL: f64 = 1e-6;
/// Minimal phase separation accepted for an audit draw.
const AUDIT_PHASE_GAP: f64 = 1e-3;

fn describe(name: &str) -> &'static str {
    match name {
        "great-circle" => "totally geodesic circle; every normal form vanishes",
        "clifford-torus" => "flat torus in the three-sphere",
        "equilateral-torus" => "flat substantial torus in the five-sphere",
        "veronese" => "constant-curvature sphere in the four-sphere",
        _ => "",
    }
}

/// Surface from `--surface` or `--spec`, falling back to `default_name`.
fn resolve_surface(s: &Settings, default_name: Option<&str>) -> Result<ImmersionSpec, Failure> {
    match (&s.surface, &s.spec) {
        (Some(_), Some(_)) => Err(Failure::config(
            "surface: give either --surface or --spec, not both",
        )),
        (Some(name), None) => Ok(ImmersionSpec::catalog(name)?),
        (None, Some(path)) => {
            let body = std::fs::read_to_string(path).map_err(|e| {
                Failure::config(format!("spec: cannot read {}: {e}", path.display()))
            })?;
            let spec = ImmersionSpec::from_config_str(&body)?;
            if let SurfaceKind::DirectSum(d) = &spec.kind {
                return Ok(build_direct_sum(d.clone())?);
            }
            Ok(spec)
        }
        (None, None) => match default_name {
            Some(name) => Ok(ImmersionSpec::catalog(name)?),
            None => Err(Failure::config(
                "surface: no surface selected; pass --surface or --spec",
            )),
        },
    }
}

/// Grid from the settings, with per-command default dimensions.
fn resolve_grid(s: &Settings, spec: &ImmersionSpec, default_dims: (usize, usize)) -> Grid {
    let (nx, ny) = s.grid.unwrap_or(default_dims);
    let domain = s.domain.unwrap_or_else(|| spec.default_domain());
    Grid::new(nx, ny, domain)
}

/// Scales weights to unit square sum, keeping zero entries zero.
fn normalized_weights(raw: &[f64]) -> Result<Vec<f64>, Failure> {
    let total: f64 = raw.iter().map(|w| w * w).sum();
    if total <= 0.0 {
        return Err(Failure::config("a: weights are all zero"));
    }
    let scale = total.sqrt();
    Ok(raw.iter().map(|w| w / scale).collect())
}

pub fn list(s: &Settings) -> Result<i32, Failure> {
    let surfaces: Vec<CatalogEntry> = CATALOG
        .iter()
        .map(|name| {
            let spec = ImmersionSpec::catalog(name).expect("catalog names are valid");
            let ambient_dim = spec.ambient_dim();
            CatalogEntry {
                name: name.to_string(),
                ambient_dim,
                sphere_dim: ambient_dim - 1,
                domain: spec.default_domain(),
                description: describe(name),
            }
        })
        .collect();
    match s.format {
        Format::Json => report::emit_json(
            s.out.as_deref(),
            &ListReport {
                schema: SCHEMA_VERSION,
                command: "list",
                surfaces,
            },
        )?,
        Format::Csv => {
            let rows: Vec<_> = surfaces
                .iter()
                .map(|e| {
                    (
                        e.name.clone(),
                        e.ambient_dim,
                        e.sphere_dim,
                        e.domain.x.0,
                        e.domain.x.1,
                        e.domain.y.0,
                        e.domain.y.1,
                        e.description,
                    )
                })
                .collect();
            let header = [
                "name",
                "ambient_dim",
                "sphere_dim",
                "x0",
                "x1",
                "y0",
                "y1",
                "description",
            ];
            report::emit_csv(s.out.as_deref(), &header, &rows)?;
        }
    }
    Ok(EXIT_PASS)
}

pub fn invariants(s: &Settings) -> Result<i32, Failure> {
    let spec = resolve_surface(s, None)?;
    let grid = resolve_grid(s, &spec, (spec.default_grid().nx, spec.default_grid().ny));
    let max_order = s.max_order;
    let jet_order = (max_order + 2).max(3);
    let points = grid.points();
    let results: Vec<minsurf::Result<InvariantRecord>> = points
        .par_iter()
        .map(|&p| invariants_at(&spec, p, max_order, jet_order))
        .collect();

    let columns = record_field_names(max_order);
    let mut rows = Vec::with_capacity(points.len());
    let mut flagged = Vec::new();
    let mut gauss: Option<MinMax> = None;
    let mut extremes = vec![
        (
            MinMax {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY
            },
            MinMax {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY
            }
        );
        max_order
    ];
    let mut evaluated = 0usize;
    for (&(x, y), outcome) in points.iter().zip(results) {
        match outcome {
            Ok(rec) => {
                evaluated += 1;
                let g = gauss.get_or_insert(MinMax {
                    min: f64::INFINITY,
                    max: f64::NEG_INFINITY,
                });
                g.min = g.min.min(rec.gauss_curvature);
                g.max = g.max.max(rec.gauss_curvature);
                for (block, (ecc, k_perp)) in rec.orders.iter().zip(extremes.iter_mut()) {
                    ecc.min = ecc.min.min(block.ecc);
                    ecc.max = ecc.max.max(block.ecc);
                    k_perp.min = k_perp.min.min(block.k_perp);
                    k_perp.max = k_perp.max.max(block.k_perp);
                }
                rows.push(record_values(&rec));
            }
            Err(minsurf::Error::DegenerateFlag(level)) => {
                let mut row = vec![Some(x), Some(y)];
                row.resize(columns.len(), None);
                rows.push(row);
                flagged.push(Flagged {
                    x,
                    y,
                    reason: format!("degenerate-flag:{level}"),
                });
            }
            Err(other) => return Err(other.into()),
        }
    }
    let orders = if evaluated > 0 {
        extremes
            .into_iter()
            .enumerate()
            .map(|(i, (ecc, k_perp))| OrderSummary {
                order: i + 1,
                ecc,
                k_perp,
            })
            .collect()
    } else {
        Vec::new()
    };
    let summary = InvariantSummary {
        evaluated,
        flagged: flagged.len(),
        gauss,
        orders,
    };
    let degenerate_everywhere = evaluated == 0 && !flagged.is_empty();
    match s.format {
        Format::Json => report::emit_json(
            s.out.as_deref(),
            &InvariantsReport {
                schema: SCHEMA_VERSION,
                command: "invariants",
                surface: spec.label.clone(),
                grid,
                max_order,
                summary,
                columns,
                rows,
                flagged,
            },
        )?,
        Format::Csv => report::emit_csv(s.out.as_deref(), &columns, &rows)?,
    }
    if degenerate_everywhere {
        eprintln!(
            "invariants on {}: degenerate flag at every grid point",
            spec.label
        );
        return Ok(EXIT_DEGENERATE);
    }
    Ok(EXIT_PASS)
}

pub fn check(s: &Settings, condition_id: &str) -> Result<i32, Failure> {
    let condition = Condition::parse(condition_id)?;
    let spec = resolve_surface(s, None)?;
    let grid = resolve_grid(s, &spec, (spec.default_grid().nx, spec.default_grid().ny));
    let tolerance = s.tolerance.unwrap_or_else(|| condition.default_tolerance());
    let result = evaluate_condition(&spec, &condition, &grid, s.h)?;
    let passed = result.evaluated > 0 && result.max_abs < tolerance;
    match s.format {
        Format::Json => report::emit_json(
            s.out.as_deref(),
            &CheckReport {
                schema: SCHEMA_VERSION,
                command: "check",
                surface: spec.label.clone(),
                condition: result.condition.clone(),
                tolerance,
                passed,
                report: result.clone(),
            },
        )?,
        Format::Csv => {
            let rows: Vec<(f64, f64, Option<f64>)> = result
                .points
                .iter()
                .map(|p| (p.x, p.y, p.residual))
                .collect();
            report::emit_csv(s.out.as_deref(), &["x", "y", "residual"], &rows)?;
        }
    }
    if result.curvature_one_everywhere() {
        eprintln!(
            "check {} on {}: curvature-one at every grid point",
            result.condition, spec.label
        );
        return Ok(EXIT_CURVATURE_ONE);
    }
    if result.evaluated == 0 {
        eprintln!(
            "check {} on {}: no grid point could be evaluated",
            result.condition, spec.label
        );
        return Ok(EXIT_DEGENERATE);
    }
    eprintln!(
        "check {} on {}: max |residual| {:e} against tolerance {:e} -> {}",
        result.condition,
        spec.label,
        result.max_abs,
        tolerance,
        if passed { "pass" } else { "fail" }
    );
    Ok(if passed {
        EXIT_PASS
    } else {
        EXIT_CONDITION_FAIL
    })
}

pub fn directsum(s: &Settings) -> Result<i32, Failure> {
    let raw_a =
        s.a.as_deref()
            .ok_or_else(|| Failure::config("a: missing weight list"))?;
    let phases = s
        .theta
        .clone()
        .ok_or_else(|| Failure::config("theta: missing phase list"))?;
    let weights = normalized_weights(raw_a)?;
    let base = resolve_surface(s, Some("equilateral-torus"))?;
    let dspec = DirectSumSpec {
        weights,
        angles: phases,
        base: Box::new(base.clone()),
    };
    let sum = build_direct_sum(dspec.clone())?;
    let grid = resolve_grid(s, &sum, (3, 3));
    let tolerance = s.tolerance.unwrap_or(GAP_TOL);

    let sphere = validate_sphere(&sum, &grid)?;
    let (conformal_diag, conformal_cross) = validate_conformal(&sum, &grid)?;
    let minimal = validate_minimal(&sum, &grid)?;
    let validation = Validation {
        sphere,
        conformal_diag,
        conformal_cross,
        minimal,
    };
    let cvectors = c_vector_recursion(&dspec.weights, &dspec.angles)?;
    let orthogonality = orthogonality_report(&cvectors);
    let comparison = compare_predicted_measured(&dspec, &grid)?;
    let center = (
        0.5 * (grid.domain.x.0 + grid.domain.x.1),
        0.5 * (grid.domain.y.0 + grid.domain.y.1),
    );
    let gaps = phase_law_gaps(&sum, s.phi, center)?;
    let order2_gap = gaps
        .iter()
        .find(|g| g.order == 2)
        .map(|g| g.gap)
        .expect("every sum carries order 2");
    let ricci = Condition::Ricci { c: 6.0 };
    let ricci6 = evaluate_condition(&sum, &ricci, &grid, s.h)?;

    let validation_max = sphere.max(conformal_diag).max(conformal_cross).max(minimal);
    let gates = vec![
        gate("validation", validation_max, VALIDATION_TOL),
        gate(
            "orthogonality",
            orthogonality.max_violation(),
            ORTHOGONALITY_TOL,
        ),
        gate("prediction", comparison.max_gap(), tolerance),
        gate("phase-law", order2_gap, tolerance),
        gate("ricci6", ricci6.max_abs, ricci.default_tolerance()),
    ];
    let passed = gates.iter().all(|g| g.passed);
    let summands = dspec.weights.len();

    match s.format {
        Format::Json => report::emit_json(
            s.out.as_deref(),
            &DirectsumReport {
                schema: SCHEMA_VERSION,
                command: "directsum",
                label: sum.label.clone(),
                base: base.label.clone(),
                weights: dspec.weights.clone(),
                phases: dspec.angles.clone(),
                trivial_identity: summands == 1,
                tolerance,
                validation,
                cvectors: cvectors.clone(),
                orthogonality,
                comparison: comparison.clone(),
                phase_law: PhaseLaw {
                    phi: s.phi,
                    x: center.0,
                    y: center.1,
                    order2_gap,
                    gaps,
                },
                ricci6,
                gates,
                passed,
            },
        )?,
        Format::Csv => {
            let rows: Vec<_> = comparison
                .rows
                .iter()
                .map(|r| {
                    let d = cvectors.constants.d_hat[r.order - 1];
                    (
                        r.order,
                        r.b_hat,
                        r.c_hat,
                        d.map(|v| v.re),
                        d.map(|v| v.im),
                        cvectors.constants.rho_hat[r.order - 1],
                        r.norm_gap,
                        r.k_perp_gap,
                        r.hopf_gap,
                    )
                })
                .collect();
            let header = [
                "order",
                "b_hat",
                "c_hat",
                "d_hat_re",
                "d_hat_im",
                "rho_hat",
                "norm_gap",
                "k_perp_gap",
                "hopf_gap",
            ];
            report::emit_csv(s.out.as_deref(), &header, &rows)?;
        }
    }
    eprintln!(
        "directsum of {summands} over {}: max prediction gap {:e}, phase-law gap {:e} -> {}",
        base.label,
        comparison.max_gap(),
        order2_gap,
        if passed { "pass" } else { "fail" }
    );
    Ok(if passed {
        EXIT_PASS
    } else {
        EXIT_CONDITION_FAIL
    })
}

fn gate(name: &'static str, value: f64, threshold: f64) -> Gate {
    Gate {
        name,
        value,
        threshold,
        passed: value < threshold,
    }
}

pub fn cvectors(s: &Settings) -> Result<i32, Failure> {
    match (&s.a, s.audit) {
        (Some(_), Some(_)) => Err(Failure::config(
            "cvectors: give either --a/--theta or --audit, not both",
        )),
        (Some(raw_a), None) => {
            let phases = s
                .theta
                .clone()
                .ok_or_else(|| Failure::config("theta: missing phase list"))?;
            let weights = normalized_weights(raw_a)?;
            validate_summands(&weights, &phases)?;
            let cvectors = c_vector_recursion(&weights, &phases)?;
            let orthogonality = orthogonality_report(&cvectors);
            let max_violation = orthogonality.max_violation();
            match s.format {
                Format::Json => report::emit_json(
                    s.out.as_deref(),
                    &CvectorsReport {
                        schema: SCHEMA_VERSION,
                        command: "cvectors",
                        mode: "explicit",
                        weights,
                        phases,
                        cvectors: cvectors.clone(),
                        orthogonality,
                        max_violation,
                    },
                )?,
                Format::Csv => {
                    let constants = &cvectors.constants;
                    let rows: Vec<_> = (1..constants.b_hat.len() + 1)
                        .map(|order| {
                            let d = constants.d_hat[order - 1];
                            (
                                order,
                                constants.b_hat[order - 1],
                                constants.c_hat[order - 1],
                                d.map(|v| v.re),
                                d.map(|v| v.im),
                                constants.rho_hat[order - 1],
                            )
                        })
                        .collect();
                    let header = ["order", "b_hat", "c_hat", "d_hat_re", "d_hat_im", "rho_hat"];
                    report::emit_csv(s.out.as_deref(), &header, &rows)?;
                }
            }
            Ok(EXIT_PASS)
        }
        (None, Some(draws)) => audit(s, draws),
        (None, None) => Err(Failure::config(
            "cvectors: provide --a and --theta, or --audit COUNT",
        )),
    }
}

fn audit(s: &Settings, draws: usize) -> Result<i32, Failure> {
    let tolerance = s.tolerance.unwrap_or(AUDIT_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut rows = Vec::with_capacity(draws);
    let mut max_violation = 0.0f64;
    for draw in 0..draws {
        let m = s.m.unwrap_or(if draw % 2 == 0 { 2 } else { 3 });
        let (weights, phases) = random_summands(&mut rng, m);
        validate_summands(&weights, &phases)?;
        let cvectors = c_vector_recursion(&weights, &phases)?;
        let violation = orthogonality_report(&cvectors).max_violation();
        max_violation = max_violation.max(violation);
        rows.push(AuditRow {
            draw,
            m,
            max_violation: violation,
        });
    }
    let passed = max_violation < tolerance;
    match s.format {
        Format::Json => report::emit_json(
            s.out.as_deref(),
            &AuditReport {
                schema: SCHEMA_VERSION,
                command: "cvectors",
                mode: "audit",
                seed: s.seed,
                draws,
                tolerance,
                rows,
                max_violation,
                passed,
            },
        )?,
        Format::Csv => {
            let flat: Vec<_> = rows
                .iter()
                .map(|r| (r.draw, r.m, r.max_violation))
                .collect();
            report::emit_csv(s.out.as_deref(), &["draw", "m", "max_violation"], &flat)?;
        }
    }
    eprintln!(
        "cvectors audit over {draws} draws: max violation {:e} against tolerance {:e} -> {}",
        max_violation,
        tolerance,
        if passed { "pass" } else { "fail" }
    );
    Ok(if passed {
        EXIT_PASS
    } else {
        EXIT_CONDITION_FAIL
    })
}

/// Draws admissible weights and phases: unit square sum, phases sorted in
/// [0, pi) with pairwise separation.
fn random_summands(rng: &mut ChaCha8Rng, m: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.25..1.0)).collect();
        let mut phases: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..PI)).collect();
        phases.sort_by(f64::total_cmp);
        if phases.windows(2).all(|p| p[1] - p[0] > AUDIT_PHASE_GAP) {
            let weights = normalized_weights(&raw).expect("draws are nonzero");
            return (weights, phases);
        }
    }
}

pub fn polar(s: &Settings) -> Result<i32, Failure> {
    let spec = resolve_surface(s, Some("equilateral-torus"))?;
    let grid = resolve_grid(s, &spec, (spec.default_grid().nx, spec.default_grid().ny));
    let tolerance = s.tolerance.unwrap_or(GAP_TOL);
    let result = polar_surface(&spec, &grid)?;
    let passed = result.congruence_rms < tolerance;
    match s.format {
        Format::Json => report::emit_json(
            s.out.as_deref(),
            &PolarCmdReport {
                schema: SCHEMA_VERSION,
                command: "polar",
                surface: spec.label.clone(),
                tolerance,
                passed,
                report: result.clone(),
            },
        )?,
        Format::Csv => {
            let rows: Vec<Vec<f64>> = grid
                .points()
                .iter()
                .zip(&result.samples)
                .map(|(&(x, y), sample)| {
                    let mut row = vec![x, y];
                    row.extend_from_slice(sample);
                    row
                })
                .collect();
            let width = result.samples.first().map(|v| v.len()).unwrap_or(0);
            let mut header = vec!["x".to_string(), "y".to_string()];
            header.extend((1..=width).map(|i| format!("s{i}")));
            report::emit_csv(s.out.as_deref(), &header, &rows)?;
        }
    }
    eprintln!(
        "polar of {}: congruence gap {:e} against tolerance {:e} -> {}",
        spec.label,
        result.congruence_rms,
        tolerance,
        if passed { "pass" } else { "fail" }
    );
    Ok(if passed {
        EXIT_PASS
    } else {
        EXIT_CONDITION_FAIL
    })
}
