use std::fmt;
use std::path::Path;
use std::time::Instant;

use crystalwalk::albanese::{LatticeAnalysis, LatticeState};
use crystalwalk::heat_kernel::{
    a1_numeric, exact_transition_on, gaussian_leading, lclt_sup_error, Propagator,
};
use crystalwalk::lattice::{graph_value, load_graph, parse_params, validate};
use crystalwalk::montecarlo::{clt_report, increment_fourth_moments, sample_paths, Mode};
use crystalwalk::perturbation::{a1_analytic, eigen_derivatives};
use crystalwalk::{analyze_with, AnalysisOptions, Builtin, Error, QuotientGraph};
use serde_json::{json, Value};

use crate::args::{
    A1Args, A1Mode, AnalyzeArgs, CltArgs, CltMode, Command, Common, Format, HeatArgs, LcltArgs,
    RealizeArgs, ValidateArgs,
};
use crate::output::{self, Envelope};

#[derive(Debug)]
pub enum Failure {
    /// Malformed or out-of-range flags.
    Usage(String),
    /// The input graph or its parameters are invalid.
    Invalid(String),
    /// A computation failed.
    Compute(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) | Failure::Compute(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e.root() {
            Error::Params(_)
            | Error::Parse { .. }
            | Error::DanglingInverse { .. }
            | Error::UnknownVertex { .. }
            | Error::DimensionMismatch { .. }
            | Error::Invalid(_) => Failure::Invalid(message),
            Error::Argument(_) => Failure::Usage(message),
            _ => Failure::Compute(message),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

pub fn run(command: &Command) -> Outcome {
    let started = Instant::now();
    match command {
        Command::Analyze(a) => analyze(command, a, started),
        Command::Realize(a) => realize(command, a, started),
        Command::Heat(a) => heat(command, a, started),
        Command::Lclt(a) => lclt(command, a, started),
        Command::A1(a) => a1(command, a, started),
        Command::Clt(a) => clt(command, a, started),
        Command::Validate(a) => validate_cmd(command, a, started),
    }
}

fn load(common: &Common) -> Result<QuotientGraph, Failure> {
    match (&common.source.lattice, &common.source.input) {
        (Some(name), None) => {
            let lattice: Builtin = name
                .parse()
                .map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let params = match &common.params {
                Some(text) => parse_params(text)?,
                None => lattice.simple_params(),
            };
            Ok(lattice.build(&params)?)
        }
        (None, Some(path)) => load_graph(path).map_err(|e| match e {
            Error::Io(io) => Failure::Usage(format!("cannot read {}: {io}", path.display())),
            e => e.into(),
        }),
        _ => Err(Failure::Usage(
            "give exactly one of --lattice and --input".into(),
        )),
    }
}

fn analysis(common: &Common, g: &QuotientGraph) -> Result<LatticeAnalysis, Failure> {
    let options = AnalysisOptions {
        search_depth: common.depth,
    };
    Ok(analyze_with(g, &options)?)
}

fn envelope<'a>(command: &'a Command, started: Instant, g: &QuotientGraph) -> Envelope<'a> {
    Envelope {
        command,
        started,
        graph: Some(graph_value(g)),
    }
}

fn vertex(g: &QuotientGraph, id: Option<&str>, flag: &str) -> Result<usize, Failure> {
    match id {
        None => Ok(0),
        Some(id) => g.vertex_index(id).ok_or_else(|| {
            Failure::Usage(format!(
                "--{flag}: no vertex {id:?} (vertices: {})",
                g.vertices().join(", ")
            ))
        }),
    }
}

fn analyze(command: &Command, args: &AnalyzeArgs, started: Instant) -> Outcome {
    let g = load(&args.common)?;
    let a = analysis(&args.common, &g)?;
    let mut result = a.report();
    result["refined_graph"] = graph_value(&a.graph);
    let report = envelope(command, started, &g).json(&result);
    output::write_json(args.common.output.as_deref(), &report)?;
    Ok(())
}

fn parse_window(text: &str, dim: usize) -> Result<Vec<(i64, i64)>, Failure> {
    let bad = || {
        Failure::Usage(format!(
            "--window: expected {dim} ranges lo:hi separated by commas, got {text:?}"
        ))
    };
    let window = text
        .split(',')
        .map(|r| {
            let (lo, hi) = r.trim().split_once(':').ok_or_else(bad)?;
            Ok((
                lo.trim().parse().map_err(|_| bad())?,
                hi.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect::<Result<Vec<(i64, i64)>, Failure>>()?;
    if window.len() != dim {
        return Err(bad());
    }
    Ok(window)
}

fn realize(command: &Command, args: &RealizeArgs, started: Instant) -> Outcome {
    let g = load(&args.common)?;
    let window = parse_window(&args.window, g.dim())?;
    let a = analysis(&args.common, &g)?;
    let table = a.export_realization(&window);
    let env = envelope(command, started, &g);
    let out = args.common.output.as_deref();
    match args.format {
        Format::Json => output::write_json(out, &env.json(&table))?,
        Format::Csv => {
            let mut header = vec!["vertex".to_string(), "cell".to_string()];
            header.extend(output::coordinate_names(g.dim()));
            let rows = table.points.iter().map(|p| {
                let mut row = vec![p.vertex.clone(), serde_json::to_string(&p.cell).unwrap()];
                row.extend(p.coords.iter().map(|&c| output::float(c)));
                row
            });
            let text = env.csv_preamble() + &output::csv_text(&header, rows)?;
            output::write_bytes(out, text.as_bytes())?;
            let edges_path = args.edges.clone().or_else(|| out.map(output::companion));
            if let Some(path) = edges_path {
                let header = ["from_row".to_string(), "to_row".to_string()];
                let rows = table
                    .edges
                    .iter()
                    .map(|(i, j)| vec![i.to_string(), j.to_string()]);
                std::fs::write(path, output::csv_text(&header, rows)?)?;
            }
        }
    }
    Ok(())
}

fn heat(command: &Command, args: &HeatArgs, started: Instant) -> Outcome {
    let original = load(&args.common)?;
    let report = validate(&original);
    if !report.is_empty() {
        return Err(Error::Invalid(report).into());
    }
    let g = if args.refined {
        analysis(&args.common, &original)?.graph
    } else {
        original.clone()
    };
    let start = vertex(&g, args.start.as_deref(), "start")?;
    let table = exact_transition_on(&g, start, args.n)?;
    let env = envelope(command, started, &original);
    let out = args.common.output.as_deref();
    let names = g.vertices();
    match args.format {
        Format::Json => {
            let entries: Vec<Value> = table
                .entries()
                .map(|(v, cell, p)| json!({"vertex": names[v], "cell": cell, "p": p}))
                .collect();
            let result = json!({
                "n": args.n,
                "start": names[start],
                "vertices": names,
                "total_mass": table.total_mass(),
                "bounds": table.bounds(),
                "entries": entries,
            });
            output::write_json(out, &env.json(&result))?;
        }
        Format::Csv => {
            let mut header = vec!["vertex".to_string()];
            header.extend((1..=g.dim()).map(|k| format!("c{k}")));
            header.push("p".into());
            let rows = table.entries().map(|(v, cell, p)| {
                let mut row = vec![names[v].clone()];
                row.extend(cell.iter().map(i64::to_string));
                row.push(output::float(p));
                row
            });
            let text = env.csv_preamble() + &output::csv_text(&header, rows)?;
            output::write_bytes(out, text.as_bytes())?;
        }
    }
    Ok(())
}

/// Target `(v, round(nρ))` relative to `x`, in analysed-graph coordinates.
fn drift_target(a: &LatticeAnalysis, x: &LatticeState, n: usize) -> LatticeState {
    let cell = x
        .cell
        .iter()
        .zip(a.rho())
        .map(|(c, r)| c + (n as f64 * r).round() as i64)
        .collect();
    LatticeState::new(x.vertex, cell)
}

fn lclt(command: &Command, args: &LcltArgs, started: Instant) -> Outcome {
    if args.n_list.is_empty() || args.n_list.contains(&0) {
        return Err(Failure::Usage(
            "--n-list: step counts must be positive".into(),
        ));
    }
    let g = load(&args.common)?;
    let a = analysis(&args.common, &g)?;
    let x = a.base_state();
    let mut ns = args.n_list.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut prop = Propagator::new(&a.graph, x.vertex, *ns.last().unwrap())?;
    let mut series = Vec::with_capacity(ns.len());
    for &n in &ns {
        prop.advance_to(n);
        let y = drift_target(&a, &x, n);
        let rel: Vec<i64> = y.cell.iter().zip(&x.cell).map(|(b, c)| b - c).collect();
        let ratio = a
            .admissible(n, &x, &y)
            .then(|| prop.get(y.vertex, &rel) / gaussian_leading(&a, n, &x, &y));
        let sup = lclt_sup_error(&a, &prop.table(), None);
        series.push((n, ratio, sup));
    }
    let env = envelope(command, started, &g);
    let out = args.common.output.as_deref();
    match args.format {
        Format::Json => {
            let points: Vec<Value> = series
                .iter()
                .map(|(n, u, s)| json!({"n": n, "U_n": u, "sup_error": s}))
                .collect();
            let result = json!({
                "x": x,
                "target": "y = x + round(nρ)",
                "series": points,
            });
            output::write_json(out, &env.json(&result))?;
        }
        Format::Csv => {
            let header = ["n", "U_n", "sup_error"].map(String::from);
            let rows = series.iter().map(|(n, u, s)| {
                vec![
                    n.to_string(),
                    u.map(output::float).unwrap_or_default(),
                    output::float(*s),
                ]
            });
            let text = env.csv_preamble() + &output::csv_text(&header, rows)?;
            output::write_bytes(out, text.as_bytes())?;
        }
    }
    Ok(())
}

fn a1(command: &Command, args: &A1Args, started: Instant) -> Outcome {
    let g = load(&args.common)?;
    let a = analysis(&args.common, &g)?;
    let d = g.dim();
    let xv = vertex(&g, args.x.as_deref(), "x")?;
    let yv = match &args.y {
        Some(id) => vertex(&g, Some(id), "y")?,
        None => xv,
    };
    let shift = args.shift.clone().unwrap_or_else(|| vec![0; d]);
    if shift.len() != d {
        return Err(Failure::Usage(format!("--shift needs {d} integers")));
    }
    let n_eval = *args
        .n_list
        .last()
        .ok_or_else(|| Failure::Usage("--n-list is empty".into()))?;

    let x = a.locate(xv, &vec![0; d]);
    let y = |n: usize| a.drift_target(yv, &shift, n);

    let analytic = match args.mode {
        A1Mode::Numeric => None,
        _ => {
            let p = eigen_derivatives(&a)?;
            let r = a1_analytic(&a, &p, &x, &y(n_eval), n_eval);
            Some((r, p.residual))
        }
    };
    let numeric = match args.mode {
        A1Mode::Analytic => None,
        _ => Some(a1_numeric(&a, &x, y, &args.n_list)?),
    };

    let value_a = analytic.as_ref().map(|(r, _)| r.value);
    let value_n = numeric.as_ref().map(|r| r.estimate);
    let difference = value_a.zip(value_n).map(|(p, q)| (p - q).abs());
    let names = g.vertices();
    let result = json!({
        "a1_analytic": value_a,
        "a1_analytic_printed": analytic.as_ref().map(|(r, _)| r.printed),
        "a1_numeric": value_n,
        "residuals": {
            "perturbation": analytic.as_ref().map(|(_, res)| *res),
            "fit": numeric.as_ref().map(|r| r.residual),
            "difference": difference,
        },
        "coordinates": {
            "x": {"vertex": names[xv], "cell": vec![0; d]},
            "y": {"vertex": names[yv], "shift": shift},
            "n": n_eval,
            "z": analytic.as_ref().map(|(r, _)| r.z.clone()).unwrap_or_else(|| a.z(n_eval, &x, &y(n_eval))),
        },
        "terms": analytic.as_ref().map(|(r, _)| r.terms.clone()),
        "numeric": numeric,
    });
    let report = envelope(command, started, &g).json(&result);
    output::write_json(args.common.output.as_deref(), &report)?;
    Ok(())
}

fn clt(command: &Command, args: &CltArgs, started: Instant) -> Outcome {
    let g = load(&args.common)?;
    let a = analysis(&args.common, &g)?;
    let mode = match args.mode {
        CltMode::First => Mode::FirstKind,
        CltMode::Second => Mode::SecondKind,
    };
    let stats = sample_paths(&a, args.n, &args.t, args.paths, args.seed, mode)?;
    let report = clt_report(&stats, &a, mode)?;
    if let Some(path) = &args.samples {
        write_samples(path, &stats.t_values, &stats.scaled_points, a.dim())?;
    }
    let result = json!({
        "report": report,
        "steps": stats.steps,
        "fourth_moments": increment_fourth_moments(&stats),
    });
    let env = envelope(command, started, &g);
    output::write_json(args.common.output.as_deref(), &env.json(&result))?;
    Ok(())
}

fn write_samples(path: &Path, t: &[f64], points: &[Vec<Vec<f64>>], d: usize) -> Outcome {
    let mut header = vec!["path".to_string(), "t".to_string()];
    header.extend(output::coordinate_names(d));
    let rows = points.iter().zip(t).flat_map(|(at_t, &tk)| {
        at_t.iter().enumerate().map(move |(i, p)| {
            let mut row = vec![i.to_string(), output::float(tk)];
            row.extend(p.iter().map(|&v| output::float(v)));
            row
        })
    });
    std::fs::write(path, output::csv_text(&header, rows)?)?;
    Ok(())
}

fn validate_cmd(command: &Command, args: &ValidateArgs, started: Instant) -> Outcome {
    let g = load(&args.common)?;
    let report = validate(&g);
    let result = json!({
        "valid": report.is_empty(),
        "violations": report.violations,
    });
    let env = envelope(command, started, &g);
    output::write_json(args.common.output.as_deref(), &env.json(&result))?;
    if report.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invalid(format!(
            "{} violation(s)\n{report}",
            report.len()
        )))
    }
}
