use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Serialize;
use serde_json::{json, Value};
use walras_core::economy::{check_assumptions, Economy, EconomySpec, PriceVector};
use walras_core::oracle::{
    cobb_douglas_perron, grid_search_equilibrium, projection_oracle, GridSpec, MAX_GRID_DIM,
    MAX_PROJECTION_DIM,
};
use walras_core::simplex::{project_trimmed, TrimmedSimplex};
use walras_core::solver::{solve, solve_multistart, solve_traced, SolverReport};
use walras_core::WalrasError;

use crate::report::{write_trace, EconomySource, Report};
use crate::settings::Settings;
use crate::{CommonArgs, Failure};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_ASSUMPTION: u8 = 3;

type Outcome = Result<u8, Failure>;

fn settings(args: &CommonArgs) -> Result<Settings, Failure> {
    Settings::from_overrides(&args.overrides, args.seed).map_err(Failure::input)
}

fn load_economy(args: &CommonArgs) -> Result<(Economy, EconomySource), Failure> {
    let path = args
        .economy
        .as_deref()
        .ok_or_else(|| Failure::input(anyhow!("--economy <file> is required")))?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::input)?;
    let economy = parse_economy(path, &text).map_err(Failure::input)?;
    let source = EconomySource {
        path: path.to_path_buf(),
        dim: economy.dim(),
        consumers: economy.consumers().len(),
        weight_sums: economy.weight_sums().to_vec(),
    };
    Ok((economy, source))
}

fn parse_economy(path: &Path, text: &str) -> anyhow::Result<Economy> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: EconomySpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let at = e.path().to_string();
        let inner = e.into_inner();
        anyhow!(
            "{}:{}:{}: malformed economy at `{at}`: {inner}",
            path.display(),
            inner.line(),
            inner.column()
        )
    })?;
    Economy::from_spec(spec).with_context(|| format!("{}", path.display()))
}

/// Input errors exit 1, everything the numerics can throw exits 2.
fn core_failure(error: WalrasError) -> Failure {
    let code = match error {
        WalrasError::Domain(_) | WalrasError::InvalidEconomy(_) => EXIT_INPUT,
        _ => EXIT_SOLVER,
    };
    Failure {
        code,
        error: error.into(),
    }
}

fn to_value<T: Serialize>(value: &T) -> Result<Value, Failure> {
    serde_json::to_value(value).map_err(|e| Failure {
        code: EXIT_SOLVER,
        error: e.into(),
    })
}

fn finish(report: &Report, args: &CommonArgs, code: u8) -> Outcome {
    report.write(args.out.as_deref()).map_err(Failure::input)?;
    Ok(code)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Runs the solver, folding a boundary-trapped search into its last report.
fn run_solver(
    economy: &Economy,
    settings: &Settings,
    trace: Option<&Path>,
) -> Result<(SolverReport, &'static str), Failure> {
    let multistart = settings.oracle.multistart;
    if trace.is_some() && multistart > 1 {
        return Err(Failure::input(anyhow!(
            "--trace cannot be combined with multistart > 1"
        )));
    }
    let outcome = match trace {
        Some(path) => solve_traced(economy, &settings.solver).and_then(|(report, rows)| {
            write_trace(path, economy.dim(), &rows)
                .map_err(|e| WalrasError::Domain(format!("{e:#}")))?;
            Ok(report)
        }),
        None if multistart > 1 => solve_multistart(economy, &settings.solver, multistart),
        None => solve(economy, &settings.solver),
    };
    match outcome {
        Ok(report) if report.converged => Ok((report, "converged")),
        Ok(report) => Ok((report, "not_converged")),
        Err(WalrasError::BoundaryTrapped { report }) => Ok((*report, "boundary_trapped")),
        Err(e) => Err(core_failure(e)),
    }
}

pub fn cmd_solve(args: &CommonArgs) -> Outcome {
    let settings = settings(args)?;
    let (economy, source) = load_economy(args)?;
    let (result, status) = run_solver(&economy, &settings, args.trace.as_deref())?;
    let mut report = Report::new(
        "solve",
        Some(source),
        json!({ "solver": settings.solver, "multistart": settings.oracle.multistart }),
    );
    report.status = status.into();
    report.result = to_value(&result)?;
    let code = if result.converged {
        EXIT_OK
    } else {
        EXIT_SOLVER
    };
    finish(&report, args, code)
}

pub fn cmd_check(args: &CommonArgs) -> Outcome {
    let settings = settings(args)?;
    let (economy, source) = load_economy(args)?;
    let result = check_assumptions(&economy, &settings.check).map_err(core_failure)?;
    let pass = result.verdicts.all_pass();
    let mut report = Report::new("check", Some(source), to_value(&settings.check)?);
    report.status = if pass { "pass" } else { "fail" }.into();
    report.result = to_value(&result)?;
    finish(&report, args, if pass { EXIT_OK } else { EXIT_ASSUMPTION })
}

pub fn cmd_project(args: &CommonArgs) -> Outcome {
    let settings = settings(args)?;
    let point = args
        .point
        .clone()
        .or(settings.oracle.point.clone())
        .ok_or_else(|| Failure::input(anyhow!("project needs --point x1,x2,...")))?;
    let epsilon = args
        .epsilon
        .or(settings.oracle.epsilon)
        .ok_or_else(|| Failure::input(anyhow!("project needs --epsilon")))?;
    let simplex = TrimmedSimplex::new(point.len(), epsilon).map_err(core_failure)?;
    let projection = project_trimmed(&point, &simplex).map_err(core_failure)?;
    let displacement = max_abs_diff(projection.as_slice(), &point);

    let mut report = Report::new(
        "project",
        None,
        json!({ "grid_resolution": settings.oracle.grid_resolution_for(point.len()) }),
    );
    let mut result = json!({
        "point": point,
        "epsilon": simplex.epsilon(),
        "projection": projection,
        "max_abs_displacement": displacement,
    });
    if point.len() <= MAX_PROJECTION_DIM {
        let resolution = settings.oracle.grid_resolution_for(point.len());
        let lattice = projection_oracle(&point, &simplex, resolution).map_err(core_failure)?;
        result["oracle"] = json!({
            "resolution": resolution,
            "projection": lattice,
            "delta": max_abs_diff(lattice.as_slice(), projection.as_slice()),
        });
    } else {
        report.notices.push(format!(
            "projection oracle skipped: more than {MAX_PROJECTION_DIM} coordinates"
        ));
    }
    report.status = "ok".into();
    report.result = result;
    finish(&report, args, EXIT_OK)
}

struct OracleRun {
    name: &'static str,
    p: PriceVector,
    extra: Value,
    /// Largest delta from the solver that still counts as agreement.
    allowance: f64,
}

/// Every oracle that applies to `economy`; refusals become notices.
fn run_oracles(
    economy: &Economy,
    settings: &Settings,
    notices: &mut Vec<String>,
) -> Result<Vec<OracleRun>, Failure> {
    let o = &settings.oracle;
    let mut runs = Vec::new();
    match cobb_douglas_perron(economy, o.perron_tol, o.perron_max_iters) {
        Ok(p) => runs.push(OracleRun {
            name: "perron",
            p,
            extra: json!({ "tol": o.perron_tol }),
            allowance: o.compare_tol,
        }),
        Err(WalrasError::Refused(why)) => notices.push(format!("perron oracle skipped: {why}")),
        Err(e) => return Err(core_failure(e)),
    }
    let dim = economy.dim();
    if dim > MAX_GRID_DIM {
        notices.push(format!(
            "grid oracle skipped: {dim} commodities exceeds the limit of {MAX_GRID_DIM}"
        ));
        return Ok(runs);
    }
    let resolution = o.grid_resolution_for(dim);
    let grid = GridSpec::new(resolution, o.grid_epsilon).map_err(core_failure)?;
    match grid_search_equilibrium(economy, &grid) {
        Ok((p, max_abs_excess)) => {
            let spacing = grid.spacing(dim);
            runs.push(OracleRun {
                name: "grid",
                p,
                extra: json!({
                    "resolution": resolution,
                    "spacing": spacing,
                    "max_abs_excess": max_abs_excess,
                }),
                allowance: o.compare_tol + o.grid_tol_spacings * spacing,
            })
        }
        Err(WalrasError::Refused(why)) => notices.push(format!("grid oracle skipped: {why}")),
        Err(e) => return Err(core_failure(e)),
    }
    Ok(runs)
}

pub fn cmd_oracle(args: &CommonArgs) -> Outcome {
    let settings = settings(args)?;
    let (economy, source) = load_economy(args)?;
    let mut report = Report::new("oracle", Some(source), to_value(&settings.oracle)?);
    let runs = run_oracles(&economy, &settings, &mut report.notices)?;
    let mut result = serde_json::Map::new();
    for run in &runs {
        let z = economy.excess_demand(&run.p).map_err(core_failure)?;
        let mut entry = json!({
            "p": run.p,
            "clearing_residual": z.z.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        });
        merge(&mut entry, &run.extra);
        result.insert(run.name.into(), entry);
    }
    report.status = "ok".into();
    report.result = Value::Object(result);
    finish(&report, args, EXIT_OK)
}

pub fn cmd_compare(args: &CommonArgs) -> Outcome {
    let settings = settings(args)?;
    let (economy, source) = load_economy(args)?;
    let (solved, solver_status) = run_solver(&economy, &settings, None)?;
    let mut report = Report::new("compare", Some(source), to_value(&settings)?);
    let runs = run_oracles(&economy, &settings, &mut report.notices)?;

    let mut agree = solved.converged;
    let mut oracles = serde_json::Map::new();
    for run in &runs {
        let delta = max_abs_diff(run.p.as_slice(), solved.p_star.as_slice());
        let within = delta <= run.allowance;
        agree &= within;
        let mut entry = json!({
            "p": run.p,
            "delta": delta,
            "allowance": run.allowance,
            "within_tolerance": within,
        });
        merge(&mut entry, &run.extra);
        oracles.insert(run.name.into(), entry);
    }
    if runs.is_empty() {
        report
            .notices
            .push("no oracle applies to this economy".into());
    }
    report.status = if !solved.converged {
        solver_status.into()
    } else if agree {
        "agree".into()
    } else {
        "disagree".into()
    };
    report.result = json!({ "solver": solved, "oracles": oracles });
    finish(&report, args, if agree { EXIT_OK } else { EXIT_SOLVER })
}

fn merge(into: &mut Value, extra: &Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, extra) {
        for (k, v) in b {
            a.insert(k.clone(), v.clone());
        }
    }
}
