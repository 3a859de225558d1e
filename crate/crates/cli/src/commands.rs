use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use ductsr::expr::{parse, Compiled, EvalStack, Expr};
use ductsr::filterlang::{
    explain, facts_from_frontier, parse_facts_file, solve, write_facts, ConstraintProgram, Selection,
};
use ductsr::flowgen::{
    assemble_dataset, export_csv, read_records, CaseRow, FlowError, FlowRecord, TEST_FILE, TRAIN_FILE,
};
use ductsr::metrics::MetricReport;
use ductsr::sr::{evolve, FrontierRecord, ParetoFrontier, Samples, Target};

use crate::{CliError, RunConfig};

fn flow_err(e: FlowError) -> CliError {
    match e {
        FlowError::Divergence { .. } => CliError::Numerical(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Input(format!("{}: {e}", path.display()))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(path))
}

fn say(out: &mut dyn Write, text: &str) {
    // console output is best effort; files carry the results
    let _ = out.write_all(text.as_bytes());
}

/// Case table with the `u_max / Re` ratio column.
pub fn format_case_table(rows: &[CaseRow]) -> String {
    let mut s = format!("{:>10} {:>12} {:>12} {:>10}\n", "c", "Re", "u_max", "u_max/Re");
    for r in rows {
        s += &format!(
            "{:>10} {:>12.4} {:>12.4} {:>10.4}\n",
            r.c,
            r.re,
            r.u_max,
            r.u_max / r.re
        );
    }
    s
}

/// Solves every case and writes `train.csv`, `test.csv` and `cases.csv`
/// into the output directory.
pub fn cmd_generate(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<CaseRow>, CliError> {
    cfg.validate()?;
    let ds = assemble_dataset(&cfg.geometry, &cfg.c_train, &cfg.c_test, cfg.nx, cfg.ny, cfg.nz).map_err(flow_err)?;
    ensure_dir(&cfg.out_dir)?;
    export_csv(&ds, &cfg.out_dir).map_err(flow_err)?;
    say(out, &format_case_table(&ds.case_table));
    say(
        out,
        &format!(
            "wrote {} train and {} test records to {}\n",
            ds.train.len(),
            ds.test.len(),
            cfg.out_dir.display()
        ),
    );
    Ok(ds.case_table)
}

fn load_records(dir: &Path, file: &str) -> Result<Vec<FlowRecord>, CliError> {
    let path = dir.join(file);
    if !path.is_file() {
        return Err(CliError::Input(format!(
            "{}: dataset file not found (run `generate` first)",
            path.display()
        )));
    }
    let records = read_records(&path).map_err(flow_err)?;
    if records.is_empty() {
        return Err(CliError::Input(format!("{}: no records", path.display())));
    }
    Ok(records)
}

pub fn frontier_paths(dir: &Path, target: Target) -> (PathBuf, PathBuf) {
    (
        dir.join(format!("frontier_{target}.json")),
        dir.join(format!("frontier_{target}.facts")),
    )
}

/// Frontier listing: id, complexity, loss and expression.
pub fn format_frontier(f: &ParetoFrontier) -> String {
    let mut s = format!("{:>3} {:>10} {:>14}  {}\n", "ID", "Complexity", "Loss", "Equation");
    for e in f.entries() {
        s += &format!("{:>3} {:>10} {:>14.6e}  {}\n", e.id, e.complexity, e.loss, e.expression);
    }
    s
}

/// Runs the search on `train.csv` from `data_dir` and writes
/// `frontier_<target>.json` and `frontier_<target>.facts`.
pub fn cmd_fit(
    cfg: &RunConfig,
    target: Target,
    data_dir: &Path,
    out: &mut dyn Write,
) -> Result<ParetoFrontier, CliError> {
    cfg.sr.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let train = load_records(data_dir, TRAIN_FILE)?;
    let samples = Samples::from_records(&train, target);
    let frontier = evolve(&cfg.sr, &samples).map_err(|e| CliError::Input(e.to_string()))?;
    if frontier.is_empty() {
        return Err(CliError::Numerical(
            "every candidate evaluated to non-finite values".into(),
        ));
    }
    ensure_dir(&cfg.out_dir)?;
    let (json, facts) = frontier_paths(&cfg.out_dir, target);
    write_file(&json, &(frontier.to_json() + "\n"))?;
    write_file(&facts, &write_facts(&facts_from_frontier(&frontier)))?;
    say(out, &format_frontier(&frontier));
    say(out, &format!("wrote {} and {}\n", json.display(), facts.display()));
    Ok(frontier)
}

pub const FILTER_REPORT: &str = "filter_report.json";

/// Filters a facts file. `constraints` falls back to the run config's
/// constraint fields. The caller maps an unsatisfiable selection to exit 3.
pub fn cmd_filter(
    cfg: &RunConfig,
    facts_path: &Path,
    constraints: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Selection, CliError> {
    let text = fs::read_to_string(facts_path).map_err(io_err(facts_path))?;
    let facts = parse_facts_file(&text).map_err(|e| CliError::Input(format!("{}: {e}", facts_path.display())))?;
    let program = match constraints {
        Some(p) => {
            let t = fs::read_to_string(p).map_err(io_err(p))?;
            ConstraintProgram::parse(&t).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
        None => cfg.constraints.clone(),
    };
    let selection = solve(&facts, &program);
    let verdicts = explain(&facts, &program);
    ensure_dir(&cfg.out_dir)?;
    let report = cfg.out_dir.join(FILTER_REPORT);
    write_file(&report, &(selection.to_json() + "\n"))?;
    say(out, &selection.render());
    say(out, "\nVERDICTS\n");
    for v in &verdicts {
        say(out, &format!("ID {}: {}\n", v.id, v.describe()));
    }
    say(out, &format!("\nwrote {}\n", report.display()));
    Ok(selection)
}

#[derive(Debug, Clone, Serialize)]
pub struct EquationReport {
    pub id: usize,
    pub expression: String,
    pub target: String,
    pub train: MetricReport,
    pub test: MetricReport,
}

#[derive(Serialize)]
struct IdentityRow<'a> {
    split: &'a str,
    actual: f64,
    predicted: f64,
}

#[derive(Serialize)]
struct ProfileRow {
    re: f64,
    x: f64,
    z: f64,
    y: f64,
    actual: f64,
    predicted: f64,
}

#[derive(Serialize)]
struct GridRow {
    re: f64,
    x: f64,
    y: f64,
    z: f64,
    actual: f64,
    predicted: f64,
}

fn predict(e: &Expr, records: &[FlowRecord], what: &str) -> Result<Vec<f64>, CliError> {
    let program = Compiled::new(e);
    let col = |f: fn(&FlowRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    let (x, y, z, re) = (col(|r| r.x), col(|r| r.y), col(|r| r.z), col(|r| r.re));
    let mut stack = EvalStack::new();
    program
        .eval_columns(program.constants(), [&x, &y, &z, &re], &mut stack)
        .map(|v| v.to_vec())
        .ok_or_else(|| CliError::Numerical(format!("equation `{e}` is not finite on the {what} data")))
}

fn csv_text<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn nearest(values: impl Iterator<Item = f64>, to: f64) -> Option<f64> {
    values.min_by(|a, b| (a - to).abs().total_cmp(&(b - to).abs()))
}

/// Target from a `frontier_<t>.json` file name, when it has that shape.
pub fn target_from_path(path: &Path) -> Option<Target> {
    let stem = path.file_stem()?.to_str()?;
    stem.strip_prefix("frontier_")?.parse().ok()
}

/// Scores one frontier equation on the train and test splits and writes
/// `report_<t>_<id>.json` plus identity, profile and grid CSVs.
pub fn cmd_report(
    cfg: &RunConfig,
    frontier_path: &Path,
    id: usize,
    data_dir: &Path,
    target: Option<Target>,
    out: &mut dyn Write,
) -> Result<EquationReport, CliError> {
    cfg.validate()?;
    let text = fs::read_to_string(frontier_path).map_err(io_err(frontier_path))?;
    let records: Vec<FrontierRecord> =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", frontier_path.display())))?;
    let rec = records
        .iter()
        .find(|r| r.id == id)
        .ok_or_else(|| CliError::Input(format!("no equation with id {id} in {}", frontier_path.display())))?;
    let expr = parse(&rec.expression).map_err(|e| CliError::Input(format!("equation {id}: {e}")))?;
    let target = target.or_else(|| target_from_path(frontier_path)).unwrap_or(Target::U);
    let train = load_records(data_dir, TRAIN_FILE)?;
    let test = load_records(data_dir, TEST_FILE)?;

    let train_pred = predict(&expr, &train, "train")?;
    let test_pred = predict(&expr, &test, "test")?;
    let actual = |rs: &[FlowRecord]| rs.iter().map(|r| target.of(r)).collect::<Vec<_>>();
    let (train_actual, test_actual) = (actual(&train), actual(&test));
    let metric = |a: &[f64], p: &[f64]| -> Result<MetricReport, CliError> {
        let mut m = MetricReport::compute(a, p).map_err(|e| CliError::Numerical(e.to_string()))?;
        // constant data fitted exactly: report 0 rather than leaving NMAE undefined
        if m.nmae_percent.is_none() && m.mae == 0.0 {
            m.nmae_percent = Some(0.0);
        }
        Ok(m)
    };
    let report = EquationReport {
        id,
        expression: rec.expression.clone(),
        target: target.to_string(),
        train: metric(&train_actual, &train_pred)?,
        test: metric(&test_actual, &test_pred)?,
    };

    let identity: Vec<IdentityRow> = train_actual
        .iter()
        .zip(&train_pred)
        .map(|(a, p)| IdentityRow {
            split: "train",
            actual: *a,
            predicted: *p,
        })
        .chain(test_actual.iter().zip(&test_pred).map(|(a, p)| IdentityRow {
            split: "test",
            actual: *a,
            predicted: *p,
        }))
        .collect();
    let station = nearest(
        test.iter().map(|r| r.x),
        cfg.x_station.unwrap_or(cfg.geometry.length / 2.0),
    )
    .expect("test data is non-empty");
    let z_mid = nearest(test.iter().map(|r| r.z), 0.0).expect("test data is non-empty");
    let mut grid = Vec::new();
    let mut profile = Vec::new();
    for ((r, a), p) in test.iter().zip(&test_actual).zip(&test_pred) {
        if r.x != station {
            continue;
        }
        grid.push(GridRow {
            re: r.re,
            x: r.x,
            y: r.y,
            z: r.z,
            actual: *a,
            predicted: *p,
        });
        if r.z == z_mid {
            profile.push(ProfileRow {
                re: r.re,
                x: r.x,
                z: r.z,
                y: r.y,
                actual: *a,
                predicted: *p,
            });
        }
    }
    let files = [
        (
            format!("report_{target}_{id}.json"),
            serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        ),
        (format!("identity_{target}_{id}.csv"), csv_text(&identity)?),
        (format!("profile_{target}_{id}.csv"), csv_text(&profile)?),
        (format!("grid_{target}_{id}.csv"), csv_text(&grid)?),
    ];
    ensure_dir(&cfg.out_dir)?;
    for (name, body) in &files {
        write_file(&cfg.out_dir.join(name), body)?;
    }

    let nmae = |m: &MetricReport| m.nmae_percent.map_or("n/a".to_string(), |v| format!("{v:.4}%"));
    say(out, &format!("ID {id}: {}\n", rec.expression));
    say(
        out,
        &format!("{:>8} {:>14} {:>14} {:>10}\n", "split", "MSE", "MAE", "NMAE"),
    );
    for (name, m) in [("train", &report.train), ("test", &report.test)] {
        say(
            out,
            &format!("{name:>8} {:>14.6e} {:>14.6e} {:>10}\n", m.mse, m.mae, nmae(m)),
        );
    }
    say(
        out,
        &format!("wrote {} files to {}\n", files.len(), cfg.out_dir.display()),
    );
    Ok(report)
}
