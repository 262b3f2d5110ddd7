//! Command-line front end. Every command prints `{"config": ..., "result": ...}`
//! (or a CSV with `#` config lines), so each artifact records how it was made.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::compliance::{compliance_report, EstimatorSettings};
use crate::error::Error;
use crate::levels::{optimal_weights, sweep_levels, LevelsOptimum};
use crate::models::ModelSet;
use crate::montecarlo::{estimate_anu, estimate_au, experiment_3d_1sparse, Experiment3d};
use crate::oracle::run_validation;
use crate::regularizers::parse_regularizer;
use crate::rng::resolve_workers;
use crate::svg::{heatmap, Panel};

#[derive(Debug, Parser)]
#[command(name = "regcomp", version, about = "Compliance measures of convex regularizers")]
pub struct Cli {
    /// Base seed of every random stream.
    #[arg(long, global = true, env = "REGCOMP_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses the available parallelism.
    #[arg(long, global = true, env = "REGCOMP_WORKERS", default_value_t = 0)]
    pub workers: usize,
    /// Write the artifact here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// delta_nec, delta_suff and gamma_nec of a regularizer for a model.
    Compliance(ComplianceArgs),
    /// Optimal two-level weights for one (k1, k2, n1, n2).
    OptimalWeights(OptimalWeightsArgs),
    /// Optimal two-level weights over a square of sparsities with n = factor·k.
    SweepLevels(SweepArgs),
    /// Monte Carlo estimate of the volume compliance A^U (and optionally A^NU).
    McVolume(McVolumeArgs),
    /// Ranks weighted ℓ¹ norms on 1-sparse vectors of ℝ³ by volume compliance.
    #[command(name = "experiment-3d")]
    Experiment3d(Experiment3dArgs),
    /// Compares every closed form with its brute-force reference.
    Oracle(OracleArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ComplianceArgs {
    /// Model as `sparse:k=2,n=10`, `lowrank:r=1,n=6` or `levels:k1=..,k2=..,n1=..,n2=..`.
    #[arg(long)]
    pub model: String,
    /// `l1`, `nuclear`, `wl1:1,2,..`, `levels:w1=..,w2=..`, inline JSON or `@file.json`.
    #[arg(long = "reg")]
    pub regularizer: String,
    /// Samples of the B estimator when no closed form applies.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// β-grid of the levels oracle.
    #[arg(long, default_value_t = 10_000)]
    pub levels_grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimalWeightsArgs {
    #[arg(long)]
    pub k1: usize,
    #[arg(long)]
    pub k2: usize,
    #[arg(long)]
    pub n1: usize,
    #[arg(long)]
    pub n2: usize,
    #[arg(long, default_value_t = 100_000)]
    pub grid: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 2)]
    pub kmin: usize,
    #[arg(long, default_value_t = 20)]
    pub kmax: usize,
    #[arg(long, default_value_t = 4)]
    pub factor: usize,
    #[arg(long, default_value_t = 100_000)]
    pub grid: usize,
    /// Also write the log10 C1 / log10 C2 heatmap here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct McVolumeArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long = "reg")]
    pub regularizer: String,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Model points for the A^NU upper bound; skipped when absent.
    #[arg(long)]
    pub x_samples: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct Experiment3dArgs {
    /// Ratios used for both w2/w1 and w3/w1.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1,1.5,2")]
    pub ratios: Vec<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Random instances per check.
    #[arg(long, default_value_t = 1000)]
    pub cases: u64,
}

/// Failure of a run, mapped to the process exit code.
#[derive(Debug, thiserror::Error)]
enum RunError {
    #[error(transparent)]
    Library(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Config(String),
}

impl RunError {
    fn exit_code(&self) -> i32 {
        match self {
            RunError::Library(e) if !e.is_config_error() => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            RunError::Library(e) => e.kind(),
            RunError::Io { .. } => "io",
            RunError::Config(_) => "config",
        }
    }
}

/// What a command produced: the artifact text and whether every check held.
struct Outcome {
    text: String,
    ok: bool,
}

/// Parses `args` (including the program name) and runs the command. Returns
/// 0 on success, 1 on numeric failure or oracle violation, 2 on bad
/// configuration; diagnostics go to `stderr` as one JSON line.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(stdout, "{e}");
            return 0;
        }
        Err(e) => {
            let diag = json!({"error": "usage", "message": e.to_string().trim_end()});
            let _ = writeln!(stderr, "{diag}");
            return 2;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            if let Err(e) = emit(&cli, &outcome.text, stdout) {
                return report(&e, stderr);
            }
            if outcome.ok {
                0
            } else {
                1
            }
        }
        Err(e) => report(&e, stderr),
    }
}

fn report(e: &RunError, stderr: &mut dyn Write) -> i32 {
    let diag = json!({"error": e.kind(), "message": e.to_string()});
    let _ = writeln!(stderr, "{diag}");
    e.exit_code()
}

fn emit(cli: &Cli, text: &str, stdout: &mut dyn Write) -> Result<(), RunError> {
    match &cli.output {
        Some(path) => write_file(path, text),
        None => stdout.write_all(text.as_bytes()).map_err(|source| RunError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn config(cli: &Cli, name: &str, args: &impl Serialize) -> Value {
    json!({
        "command": name,
        "args": args,
        "seed": cli.seed,
        "workers": resolve_workers(cli.workers),
        "format": cli.format,
    })
}

fn envelope(config: Value, result: impl Serialize) -> Result<String, RunError> {
    let doc = json!({"config": config, "result": result});
    let mut text =
        serde_json::to_string_pretty(&doc).map_err(|e| RunError::Library(Error::Numerical(e.to_string())))?;
    text.push('\n');
    Ok(text)
}

fn require_format(cli: &Cli, allowed: &[Format]) -> Result<(), RunError> {
    if allowed.contains(&cli.format) {
        Ok(())
    } else {
        Err(RunError::Config(format!(
            "format {:?} is not available for this command",
            cli.format
        )))
    }
}

fn execute(cli: &Cli) -> Result<Outcome, RunError> {
    match &cli.command {
        Command::Compliance(a) => {
            require_format(cli, &[Format::Json])?;
            let model: ModelSet = a.model.parse()?;
            let reg = parse_regularizer(&a.regularizer, &model)?;
            let settings = EstimatorSettings {
                samples: a.samples,
                seed: cli.seed,
                workers: cli.workers,
                levels_grid: a.levels_grid,
            };
            let report = compliance_report(&model, &reg, &settings)?;
            ok(envelope(config(cli, "compliance", a), report)?)
        }
        Command::OptimalWeights(a) => {
            require_format(cli, &[Format::Json])?;
            let opt = optimal_weights(a.k1, a.k2, a.n1, a.n2, a.grid)?;
            ok(envelope(config(cli, "optimal-weights", a), tagged(&opt)?)?)
        }
        Command::SweepLevels(a) => {
            let rows = sweep_levels(a.kmin, a.kmax, a.factor, a.grid, cli.workers)?;
            let cfg = config(cli, "sweep-levels", a);
            if let Some(path) = &a.svg {
                write_file(path, &sweep_svg(&rows, a.kmin, a.kmax))?;
            }
            let text = match cli.format {
                Format::Json => {
                    let tagged_rows = rows.iter().map(tagged).collect::<Result<Vec<_>, _>>()?;
                    envelope(cfg, tagged_rows)?
                }
                Format::Csv => sweep_csv(&cfg, &rows),
                Format::Svg => sweep_svg(&rows, a.kmin, a.kmax),
            };
            ok(text)
        }
        Command::McVolume(a) => {
            require_format(cli, &[Format::Json])?;
            let model: ModelSet = a.model.parse()?;
            let reg = parse_regularizer(&a.regularizer, &model)?;
            let au = estimate_au(&model, &reg, a.samples, cli.seed, cli.workers)?;
            let anu = a
                .x_samples
                .map(|x| estimate_anu(&model, &reg, x, a.samples, cli.seed, cli.workers))
                .transpose()?;
            let result = json!({
                "method": "monte_carlo",
                "model": model,
                "regularizer": reg,
                "au": au,
                "anu_upper_bound": anu,
            });
            ok(envelope(config(cli, "mc-volume", a), result)?)
        }
        Command::Experiment3d(a) => {
            require_format(cli, &[Format::Json, Format::Csv])?;
            let grid: Vec<(f64, f64)> = a
                .ratios
                .iter()
                .flat_map(|&r2| a.ratios.iter().map(move |&r3| (r2, r3)))
                .collect();
            let exp = experiment_3d_1sparse(&grid, a.samples, cli.seed, cli.workers)?;
            let cfg = config(cli, "experiment-3d", a);
            let text = match cli.format {
                Format::Csv => experiment_csv(&cfg, &exp),
                _ => {
                    let mut value = serde_json::to_value(&exp).map_err(|e| Error::Numerical(e.to_string()))?;
                    value["method"] = json!("monte_carlo");
                    envelope(cfg, value)?
                }
            };
            ok(text)
        }
        Command::Oracle(a) => {
            require_format(cli, &[Format::Json])?;
            let report = run_validation(a.cases, cli.seed, cli.workers)?;
            let passed = report.passed();
            let result = json!({"method": "brute_force", "passed": passed, "report": report});
            Ok(Outcome {
                text: envelope(config(cli, "oracle", a), result)?,
                ok: passed,
            })
        }
    }
}

fn ok(text: String) -> Result<Outcome, RunError> {
    Ok(Outcome { text, ok: true })
}

/// A levels optimum with its method tag: the weights come from a grid search.
fn tagged(opt: &LevelsOptimum) -> Result<Value, RunError> {
    let mut v = serde_json::to_value(opt).map_err(|e| Error::Numerical(e.to_string()))?;
    v["method"] = json!("structured_search");
    Ok(v)
}

fn csv_header(cfg: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = cfg {
        for (k, v) in map {
            let _ = writeln!(out, "# {k}={v}");
        }
    }
    out
}

fn sweep_csv(cfg: &Value, rows: &[LevelsOptimum]) -> String {
    let mut out = csv_header(cfg);
    out.push_str("# method=structured_search\n");
    out.push_str("k1,k2,nu1_star,ratio,delta_nec,c1,c2\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{:e},{:e},{:e}",
            r.k1, r.k2, r.nu1_star, r.ratio, r.delta_nec, r.c1, r.c2
        );
    }
    out
}

fn sweep_svg(rows: &[LevelsOptimum], kmin: usize, kmax: usize) -> String {
    let side = kmax - kmin + 1;
    let mut c1 = vec![vec![f64::NAN; side]; side];
    let mut c2 = vec![vec![f64::NAN; side]; side];
    for r in rows {
        let (i, j) = (r.k1 - kmin, r.k2 - kmin);
        c1[i][j] = r.c1.log10();
        c2[i][j] = r.c2.log10();
    }
    heatmap(
        &[
            Panel {
                title: "log10 C1",
                values: &c1,
            },
            Panel {
                title: "log10 C2",
                values: &c2,
            },
        ],
        kmin,
        "k1",
        "k2",
    )
}

fn experiment_csv(cfg: &Value, exp: &Experiment3d) -> String {
    let mut out = csv_header(cfg);
    out.push_str("# method=monte_carlo\n");
    out.push_str("r2,r3,estimate,ci_low,ci_high,rank\n");
    for r in &exp.rows {
        let v = r.volume;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.r2, r.r3, v.estimate, v.ci_low, v.ci_high, r.rank
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["regcomp"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn compliance_closed_form() {
        let (code, out, _) = call(&["compliance", "--model", "sparse:k=2,n=10", "--reg", "l1"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        let r = &v["result"];
        assert!((r["delta_suff"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((r["delta_nec"].as_f64().unwrap() - 29.0 / 41.0).abs() < 1e-12);
        assert_eq!(r["method"], "closed_form");
        assert_eq!(v["config"]["command"], "compliance");
    }

    #[test]
    fn bad_model_exits_2_with_json() {
        let (code, out, err) = call(&["compliance", "--model", "sparse:k=2", "--reg", "l1"]);
        assert_eq!(code, 2);
        assert!(out.is_empty());
        let d: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(d["error"], "invalid_model");
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, err) = call(&["oracle", "--bogus"]);
        assert_eq!(code, 2);
        let d: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(d["error"], "usage");
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("sweep-levels"));
    }

    #[test]
    fn wrong_format_is_config_error() {
        let (code, _, _) = call(&["--format", "svg", "oracle", "--cases", "1"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn full_space_secant_has_zero_volume() {
        let (code, out, _) = call(&[
            "mc-volume",
            "--model",
            "sparse:k=2,n=3",
            "--reg",
            "l1",
            "--samples",
            "1000",
        ]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["result"]["au"]["estimate"].as_f64(), Some(0.0));
    }

    #[test]
    fn sweep_csv_has_config_lines() {
        let (code, out, _) = call(&[
            "--format",
            "csv",
            "sweep-levels",
            "--kmin",
            "2",
            "--kmax",
            "3",
            "--grid",
            "200",
        ]);
        assert_eq!(code, 0);
        assert!(out.starts_with("# "));
        assert!(out.contains("k1,k2,nu1_star,ratio,delta_nec,c1,c2\n"));
        let data: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 5);
    }
}
