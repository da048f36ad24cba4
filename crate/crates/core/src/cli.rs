//! Command-line front end. Exit status: 0 success, 1 a checked bound or
//! invariant failed, 2 usage, config or I/O error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{
    bench, counterexample_report, halfspectrum_report, parity_scan_report, phi_psi_report, verify_suite,
    CounterexampleKind, ExperimentConfig, TruncationRule,
};
use crate::krawtchouk::build_table;
use crate::report::ExperimentReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const THREADS_ENV: &str = "CUBEVAR_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cubevar", version, about = "Variation of spherical means on the Hamming cube")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    AllOnes,
    Truncated,
    Corollary,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run every module's invariant checks.
    Verify,
    /// Export exact and floating Krawtchouk tables.
    KrawTable,
    /// Reproduce the counterexamples to dimension-free bounds.
    Counterexample {
        #[arg(long, value_enum, default_value = "all-ones")]
        kind: Kind,
    },
    /// Character scan of fixed-parity and full-range variation.
    ParityScan,
    /// Scan the multiplier sums Φ and Ψ.
    PhiPsi,
    /// Random search over spectra supported on |y| ≤ n/2.
    HalfSpectrum,
    /// Time the FWHT, a full S_k sweep and the pointwise variation.
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Dimensions, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Variation exponents, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub q: Option<u8>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Worker threads; falls back to CUBEVAR_THREADS, then the core count.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value = "both")]
    pub format: Format,
    /// Config override `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    /// Applied in order after the config file.
    pub overrides: Vec<(String, String)>,
    pub output_dir: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
}

impl RunSpec {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let c = cli.common;
        let mut overrides = Vec::new();
        for kv in &c.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("--set expects key=value, got {kv:?}")))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        let join = |xs: &[String]| xs.join(",");
        if let Some(n) = &c.n {
            overrides.push(("n_list".into(), join(&n.iter().map(|x| x.to_string()).collect::<Vec<_>>())));
        }
        if let Some(r) = &c.r {
            overrides.push(("r_list".into(), join(&r.iter().map(|x| x.to_string()).collect::<Vec<_>>())));
        }
        if let Some(q) = c.q {
            overrides.push(("q".into(), q.to_string()));
        }
        if let Some(s) = c.seed {
            overrides.push(("seed".into(), s.to_string()));
        }
        if let Some(t) = c.trials {
            overrides.push(("trials".into(), t.to_string()));
        }
        Ok(Self {
            command: cli.command,
            config_path: c.config,
            overrides,
            output_dir: c.out,
            format: c.format,
            threads: c.threads,
        })
    }
}

/// Truncation rule as written in a config, resolved once all keys are read.
#[derive(Debug, Clone)]
struct Draft {
    config: ExperimentConfig,
    rule: String,
    alpha: f64,
    constant: f64,
}

impl Default for Draft {
    fn default() -> Self {
        Self { config: ExperimentConfig::default(), rule: "power".into(), alpha: 0.5, constant: 1.0 }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("cannot parse {s:?}")))
        .collect()
}

fn parse_one<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("cannot parse {value:?}"))
}

impl Draft {
    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "n_list" | "n" => self.config.n_list = parse_list(value)?,
            "r_list" | "r" => self.config.r_list = parse_list(value)?,
            "q" => {
                self.config.q = match value {
                    "" | "none" => None,
                    v => Some(parse_one(v)?),
                }
            }
            "seed" | "random_seed" => self.config.seed = parse_one(value)?,
            "trials" => self.config.trials = parse_one(value)?,
            "truncation" => match value {
                "power" | "constant" => self.rule = value.into(),
                other => return Err(format!("unknown truncation rule {other:?} (power|constant)")),
            },
            "alpha" => self.alpha = parse_one(value)?,
            "constant" => self.constant = parse_one(value)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    fn finish(mut self) -> Result<ExperimentConfig> {
        self.config.truncation = match self.rule.as_str() {
            "constant" => TruncationRule::Constant { value: self.constant },
            _ => TruncationRule::Power { alpha: self.alpha },
        };
        self.config.validate()?;
        Ok(self.config)
    }
}

fn parse_into(draft: &mut Draft, text: &str) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("line {}: expected `key = value`", i + 1)))?;
        draft.set(k.trim(), v.trim()).map_err(|e| Error::InvalidParameter(format!("line {}: {e}", i + 1)))?;
    }
    Ok(())
}

/// Parses `key = value` lines (`#` starts a comment). Keys: `n_list`,
/// `r_list`, `q`, `seed`, `trials`, `truncation` (`power`|`constant`),
/// `alpha`, `constant`.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config_with(Some(path), &[])
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut draft = Draft::default();
    parse_into(&mut draft, text)?;
    draft.finish()
}

/// File values first, then `overrides` in order.
pub fn parse_config_with(path: Option<&Path>, overrides: &[(String, String)]) -> Result<ExperimentConfig> {
    let mut draft = Draft::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read config {}: {e}", path.display())))?;
        parse_into(&mut draft, &text)?;
    }
    for (k, v) in overrides {
        draft.set(k, v).map_err(|e| Error::InvalidParameter(format!("override {k}: {e}")))?;
    }
    draft.finish()
}

/// Prints a summary line; a closed stdout (e.g. piped into `head`) is not an error.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("cannot write {}: {e}", path.display()))
}

fn write_report(report: &ExperimentReport, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    if matches!(format, Format::Json | Format::Both) {
        let path = dir.join(format!("{}.json", report.name));
        fs::write(&path, report.to_json()).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    if matches!(format, Format::Csv | Format::Both) {
        let path = dir.join(format!("{}.csv", report.name));
        fs::write(&path, report.to_csv()).map_err(|e| io_err(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

fn write_kraw_tables(config: &ExperimentConfig, dir: &Path, format: Format) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for &n in &config.n_list {
        let table = build_table(n)?;
        if matches!(format, Format::Csv | Format::Both) {
            let path = dir.join(format!("kraw_table_n{n}.csv"));
            let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
            table.write_csv(file).map_err(|e| io_err(&path, e))?;
            say(&format!("kraw-table n={n} rows={} -> {}", (n + 1) * (n + 1), path.display()));
        }
        if matches!(format, Format::Json | Format::Both) {
            let path = dir.join(format!("kraw_table_n{n}.json"));
            let rows: Vec<_> = (0..=n)
                .flat_map(|k| (0..=n).map(move |x| (k, x)))
                .map(|(k, x)| {
                    let e = table.exact(k, x);
                    serde_json::json!({
                        "n": n, "k": k, "x": x,
                        "numerator": e.numer().to_string(),
                        "denominator": e.denom().to_string(),
                        "float": table.float(k, x),
                    })
                })
                .collect();
            let text = serde_json::to_string_pretty(&rows).map_err(|e| Error::Json(e.to_string()))?;
            fs::write(&path, text).map_err(|e| io_err(&path, e))?;
            say(&format!("kraw-table n={n} json -> {}", path.display()));
        }
    }
    Ok(())
}

/// Exit status implied by a report: [`EXIT_ASSERTION`] if any `bound_holds`
/// record is not 1 or any verify record is marked `FAIL`.
pub fn report_status(report: &ExperimentReport) -> i32 {
    let failed = report
        .records
        .iter()
        .any(|r| (r.metric == "bound_holds" && r.value != 1.0) || r.witness == "FAIL");
    if failed {
        EXIT_ASSERTION
    } else {
        EXIT_OK
    }
}

fn execute(spec: &RunSpec, config: &ExperimentConfig) -> Result<i32> {
    let mut reports = Vec::new();
    let mut status = EXIT_OK;
    match spec.command {
        Command::KrawTable => {
            write_kraw_tables(config, &spec.output_dir, spec.format)?;
            return Ok(EXIT_OK);
        }
        Command::Verify => {
            for &n in &config.n_list {
                let out = verify_suite(n, config.seed, config.trials)?;
                if !out.passed {
                    status = EXIT_ASSERTION;
                }
                reports.push(out.report);
            }
        }
        Command::Counterexample { kind } => {
            let kind = match kind {
                Kind::AllOnes => CounterexampleKind::AllOnes,
                Kind::Truncated => CounterexampleKind::Truncated,
                Kind::Corollary => CounterexampleKind::Corollary,
            };
            reports.push(counterexample_report(config, kind)?);
        }
        Command::ParityScan => reports.push(parity_scan_report(config)?),
        Command::PhiPsi => reports.push(phi_psi_report(config)?),
        Command::HalfSpectrum => reports.push(halfspectrum_report(config)?),
        Command::Bench => {
            let r = config.r_list[0];
            let mut all = ExperimentReport::start("bench").param("n_list", &config.n_list).param("r", r);
            for &n in &config.n_list {
                bench(n, r, config.seed)?.records.into_iter().for_each(|rec| all.push(rec));
            }
            reports.push(all.finish());
        }
    }
    // Verify runs one report per n; keep their files apart.
    let multi = reports.len() > 1;
    for (i, report) in reports.iter_mut().enumerate() {
        if multi {
            report.name = format!("{}_n{}", report.name, config.n_list[i]);
        }
        status = status.max(report_status(report));
        for rec in &report.records {
            say(&rec.summary());
        }
        write_report(report, &spec.output_dir, spec.format)?;
    }
    Ok(status)
}

fn thread_count(spec: &RunSpec) -> Result<Option<usize>> {
    if let Some(t) = spec.threads {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        _ => Ok(None),
    }
}

pub fn run(spec: &RunSpec) -> i32 {
    let result = (|| {
        let config = parse_config_with(spec.config_path.as_deref(), &spec.overrides)?;
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(t) = thread_count(spec)? {
            pool = pool.num_threads(t);
        }
        let pool = pool.build().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        pool.install(|| execute(spec, &config))
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Parses `args` (including the program name) and runs.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match RunSpec::from_cli(cli) {
        Ok(spec) => run(&spec),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let c = parse_config_str("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.n_list, vec![8]);
        assert_eq!(c.r_list, vec![2.0]);
        assert_eq!((c.seed, c.trials), (0, 100));
    }

    #[test]
    fn lists_and_comments() {
        let c = parse_config_str("# grid\nr_list = 1,2,3\nn_list = 4, 8  # dims\n\nseed=9\nq = 1\n").unwrap();
        assert_eq!(c.r_list, vec![1.0, 2.0, 3.0]);
        assert_eq!(c.n_list, vec![4, 8]);
        assert_eq!(c.seed, 9);
        assert_eq!(c.q, Some(1));
    }

    #[test]
    fn alpha_outside_unit_interval_rejected() {
        assert!(parse_config_str("alpha = 1.5").is_err());
        assert!(parse_config_str("truncation = power\nalpha = 0").is_err());
        // Irrelevant under the constant rule.
        let c = parse_config_str("truncation = constant\nconstant = 2\nalpha = 1.5").unwrap();
        assert_eq!(c.truncation, TruncationRule::Constant { value: 2.0 });
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_config_str("seed = 1\nbogus = 2\n").unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("bogus"), "{e}");
        let e = parse_config_str("n_list = 4\nr_list 2\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = parse_config_str("trials = many").unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
    }

    #[test]
    fn overrides_win() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        fs::write(&path, "seed = 1\nn_list = 4\n").unwrap();
        let c = parse_config_with(Some(&path), &[("seed".into(), "5".into())]).unwrap();
        assert_eq!((c.seed, c.n_list.clone()), (5, vec![4]));
        assert_eq!(parse_config(&path).unwrap().seed, 1);
        assert!(parse_config(&dir.path().join("missing")).is_err());
    }

    #[test]
    fn failing_records_set_status() {
        use crate::report::Record;
        let mut rep = ExperimentReport::start("x");
        rep.push(Record::new("x", 4, "bound_holds", 1.0));
        assert_eq!(report_status(&rep), EXIT_OK);
        rep.push(Record::new("x", 5, "bound_holds", 0.0));
        assert_eq!(report_status(&rep), EXIT_ASSERTION);
        let mut rep = ExperimentReport::start("verify");
        rep.push(Record::new("verify", 4, "check", 3.0).witness("FAIL"));
        assert_eq!(report_status(&rep), EXIT_ASSERTION);
    }

    #[test]
    fn flags_become_overrides() {
        let cli = Cli::try_parse_from(["cubevar", "verify", "--n", "3,4", "--seed", "42", "--set", "trials=7"]).unwrap();
        let spec = RunSpec::from_cli(cli).unwrap();
        let c = parse_config_with(None, &spec.overrides).unwrap();
        assert_eq!(c.n_list, vec![3, 4]);
        assert_eq!(c.seed, 42);
        assert_eq!(c.trials, 7);
        assert_eq!(spec.command, Command::Verify);
    }
}
