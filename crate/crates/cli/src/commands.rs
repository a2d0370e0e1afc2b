//! Argument definitions and subcommand implementations.

use std::io::Write;
use std::path::{Path, PathBuf};

use benford_ecp::critical::{Calibrator, CriticalValueMethod, CriticalValueTable};
use benford_ecp::digits::{MissingDigitPolicy, NegativePolicy};
use benford_ecp::ecp::{ecp_closed_form, ecp_simulated};
use benford_ecp::simulation::{run_grid_with, GridOptions, GridReport, GridSpec};
use benford_ecp::statistics::{classify_mad, classify_ssd, observe_all};
use benford_ecp::{
    count_digits, degenerate_contaminant, estimate_ecp, uniform_contaminant,
    ContaminantDistribution, EcpEstimate, IngestPolicy, SearchConfig, StatisticKind,
    StatisticValue,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cache::CriticalValues;
use crate::error::{CliError, CliResult};
use crate::input::{read_values, InputFormat};
use crate::report::{
    format_percent, format_statistic, render_text, AnalysisReport, SkippedDetail, StatisticRow,
};
use crate::tables;

pub const DEFAULT_SEED: u64 = 20_250_101;
const REPORT_LEVELS: [f64; 2] = [0.95, 0.99];

#[derive(Debug, Parser)]
#[command(
    name = "ecp",
    version,
    about = "Benford divergence statistics and Equivalent Contamination Proportions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute every statistic, its critical values and its ECP for a dataset.
    Analyze(AnalyzeArgs),
    /// Convert a reported statistic into an ECP.
    EcpFromStat(EcpFromStatArgs),
    /// Simulate a grid of sample sizes and contamination levels.
    Simulate(SimulateArgs),
    /// Emit planning tables or expected-statistic curves.
    Tables(TablesArgs),
    /// Calibrate null critical values.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NegativesArg {
    Abs,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MissingArg {
    Drop,
    Reject,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// uniform, degenerate:D or file:PATH
    #[arg(long, default_value = "uniform")]
    pub contaminant: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: OutputFormat,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Header name or 1-based index of the value column.
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
    #[arg(long)]
    pub skip_header: bool,
    #[arg(long, value_enum, default_value = "abs")]
    pub negatives: NegativesArg,
    #[arg(long, value_enum, default_value = "drop")]
    pub zeros: MissingArg,
    /// Label shown in the report; defaults to the file name.
    #[arg(long)]
    pub label: Option<String>,
    /// Replications per iteration of simulated ECP searches.
    #[arg(long, default_value_t = 5000)]
    pub reps: usize,
    /// Replications of the null calibration.
    #[arg(long, default_value_t = 100_000)]
    pub calibration_reps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EcpMethodArg {
    Auto,
    ClosedForm,
    Simulated,
}

#[derive(Debug, Clone, Args)]
pub struct EcpFromStatArgs {
    #[arg(long)]
    pub kind: StatisticKind,
    #[arg(long)]
    pub value: f64,
    #[arg(long)]
    pub n: u64,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: EcpMethodArg,
    #[arg(long, default_value_t = 5000)]
    pub reps: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [100u64, 1000, 10_000, 100_000])]
    pub sizes: Vec<u64>,
    /// Contamination levels as fractions (0.05) or percentages (5%).
    #[arg(long, value_delimiter = ',', value_parser = parse_fraction, default_values = ["0.01", "0.05", "0.25", "0.75", "0.95", "0.99"])]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,
    #[arg(long, value_delimiter = ',')]
    pub kinds: Vec<StatisticKind>,
    #[arg(long, default_value_t = 5000)]
    pub search_reps: usize,
    /// Null replications for significance markers; defaults to --reps.
    #[arg(long)]
    pub calibration_reps: Option<usize>,
    /// Also write the structured grid document here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(name = "panelA", alias = "panel-a")]
    PanelA,
    #[value(name = "panelB", alias = "panel-b")]
    PanelB,
    #[value(name = "figure1")]
    Figure1,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    #[arg(value_enum)]
    pub which: Which,
    #[arg(long, value_delimiter = ',', default_values_t = [0.95, 0.99])]
    pub levels: Vec<f64>,
    /// Sample sizes (panelA and figure1).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<u64>,
    /// Contamination levels (panelB).
    #[arg(long, value_delimiter = ',', value_parser = parse_fraction)]
    pub fractions: Vec<f64>,
    /// Null replications for MAD (and any Monte Carlo) critical values.
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,
    /// Critical-value method for SSD.
    #[arg(long, default_value = "independent-cells")]
    pub ssd_critical: CriticalValueMethod,
    /// Critical-value method for MAD.
    #[arg(long, default_value = "scaled-monte-carlo")]
    pub mad_critical: CriticalValueMethod,
    /// Points on the f grid of figure1.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub kind: StatisticKind,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.95, 0.99])]
    pub levels: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,
    /// analytic, monte-carlo, formula or independent-cells; defaults by statistic.
    #[arg(long)]
    pub method: Option<CriticalValueMethod>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (num, scale) = match t.strip_suffix('%') {
        Some(p) => (p, 0.01),
        None => (t, 1.0),
    };
    let v = num
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("not a number: {s:?}"))?;
    Ok(v * scale)
}

fn delimiter_byte(c: char) -> CliResult<u8> {
    if c.is_ascii() {
        Ok(c as u8)
    } else {
        Err(CliError::Input(format!(
            "delimiter {c:?} must be a single ASCII character"
        )))
    }
}

/// Parses `uniform`, `degenerate:D` or `file:PATH`.
pub fn parse_contaminant(spec: &str) -> CliResult<(ContaminantDistribution, Option<String>)> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("uniform") {
        return Ok((uniform_contaminant(), None));
    }
    if let Some(rest) = spec.strip_prefix("degenerate") {
        let digit = match rest.strip_prefix(':') {
            Some(d) => d
                .trim()
                .parse::<u8>()
                .map_err(|_| CliError::Input(format!("bad degenerate digit {d:?}")))?,
            None if rest.is_empty() => 9,
            None => return Err(CliError::Input(format!("unknown contaminant {spec:?}"))),
        };
        return Ok((degenerate_contaminant(digit)?, None));
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        return Ok(ContaminantDistribution::parse_custom(&text)?);
    }
    Err(CliError::Input(format!(
        "unknown contaminant {spec:?}; expected uniform, degenerate:D or file:PATH"
    )))
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::write("stdout", e))
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::write(path.display().to_string(), e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Analyze(a) => analyze(&a).map(|_| 0),
        Command::EcpFromStat(a) => ecp_from_stat(&a).map(|_| 0),
        Command::Simulate(a) => simulate(&a),
        Command::Tables(a) => tables_cmd(&a).map(|_| 0),
        Command::Calibrate(a) => calibrate(&a).map(|_| 0),
    }
}

/// Builds the report for `analyze`.
pub fn build_report(args: &AnalyzeArgs) -> CliResult<AnalysisReport> {
    let (contaminant, warning) = parse_contaminant(&args.common.contaminant)?;
    let mut warnings: Vec<String> = warning.into_iter().collect();
    let format = InputFormat {
        column: args.column.clone(),
        delimiter: args.delimiter.map(delimiter_byte).transpose()?,
        skip_header: args.skip_header,
    };
    let parsed = read_values(&args.input, &format)?;
    if parsed.unparsed > 0 {
        warnings.push(format!(
            "{} entries were not numbers and were skipped",
            parsed.unparsed
        ));
    }
    let policy = IngestPolicy {
        negatives: match args.negatives {
            NegativesArg::Abs => NegativePolicy::Abs,
            NegativesArg::Drop => NegativePolicy::Drop,
        },
        zeros: match args.zeros {
            MissingArg::Drop => MissingDigitPolicy::Drop,
            MissingArg::Reject => MissingDigitPolicy::Reject,
        },
        non_finite: MissingDigitPolicy::Drop,
    };
    let tally = count_digits(&parsed.values, policy)?;
    let counts = &tally.counts;
    let n = counts.n();
    let observed = observe_all(counts)?;

    let calibrator = Calibrator::new(args.calibration_reps, args.common.seed)?;
    let critical = CriticalValues::from_env(calibrator);
    let search = SearchConfig {
        replications: args.reps,
        ..SearchConfig::with_seed(args.common.seed)
    };
    let mut rows = Vec::with_capacity(observed.len());
    let mut mad = 0.0;
    let mut ssd = 0.0;
    for obs in &observed {
        match obs.kind {
            StatisticKind::Mad => mad = obs.value,
            StatisticKind::Ssd => ssd = obs.value,
            _ => {}
        }
        let table = critical.table(obs.kind, n, &REPORT_LEVELS)?;
        let (p95, p99) = (table.levels[0].threshold, table.levels[1].threshold);
        let ecp = estimate_ecp(obs, &contaminant, &search)?;
        rows.push(StatisticRow {
            kind: obs.kind,
            value: obs.value,
            critical_method: table.method,
            critical_95: p95,
            critical_99: p99,
            significant_95: obs.value > p95,
            significant_99: obs.value > p99,
            ecp,
        });
    }
    let label = args.label.clone().unwrap_or_else(|| {
        args.input
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_else(|| args.input.display().to_string())
    });
    Ok(AnalysisReport {
        label,
        n,
        skipped: parsed.unparsed + tally.skipped(),
        skipped_detail: SkippedDetail {
            unparsed: parsed.unparsed,
            zero: tally.skipped_zero,
            negative: tally.skipped_negative,
            non_finite: tally.skipped_non_finite,
        },
        contaminant: contaminant.name().to_string(),
        seed: args.common.seed,
        counts: counts.counts().to_vec(),
        statistics: rows,
        mad_conformity: classify_mad(mad).to_string(),
        ssd_conformity: classify_ssd(ssd).to_string(),
        warnings,
    })
}

fn analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let report = build_report(args)?;
    warn_all(&report.warnings);
    let text = match args.common.format {
        OutputFormat::Text => render_text(&report),
        OutputFormat::Structured => to_json(&report),
    };
    emit(&args.common.out, &text)
}

/// Structured output of `ecp-from-stat`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcpFromStatOutput {
    pub kind: StatisticKind,
    pub observed: f64,
    pub n: u64,
    pub contaminant: String,
    pub estimate: EcpEstimate,
}

pub fn ecp_from_stat_output(args: &EcpFromStatArgs) -> CliResult<EcpFromStatOutput> {
    let (contaminant, warning) = parse_contaminant(&args.common.contaminant)?;
    warn_all(&warning.into_iter().collect::<Vec<_>>());
    if args.n < 2 {
        return Err(CliError::Input(format!(
            "sample size {} is below the minimum of 2",
            args.n
        )));
    }
    let observed = StatisticValue::new(args.kind, args.value, args.n)?;
    let search = SearchConfig {
        replications: args.reps,
        ..SearchConfig::with_seed(args.common.seed)
    };
    let estimate = match args.method {
        EcpMethodArg::Auto => estimate_ecp(&observed, &contaminant, &search)?,
        EcpMethodArg::ClosedForm => ecp_closed_form(args.kind, args.value, args.n, &contaminant)?,
        EcpMethodArg::Simulated => {
            ecp_simulated(args.kind, args.value, args.n, &contaminant, &search)?
        }
    };
    Ok(EcpFromStatOutput {
        kind: args.kind,
        observed: args.value,
        n: args.n,
        contaminant: contaminant.name().to_string(),
        estimate,
    })
}

pub fn render_ecp_text(o: &EcpFromStatOutput) -> String {
    let e = &o.estimate;
    let mut s = String::new();
    s.push_str(&format!("statistic: {}\n", o.kind));
    s.push_str(&format!("observed: {}\n", o.observed));
    s.push_str(&format!("n: {}\n", o.n));
    s.push_str(&format!("contaminant: {}\n", o.contaminant));
    s.push_str(&format!("ECP: {}\n", format_percent(e.f)));
    if let Some(se) = e.std_error {
        s.push_str(&format!("std error: {}\n", format_percent(se)));
    }
    s.push_str(&format!(
        "method: {}{}\n",
        e.method,
        if e.approximate { " (approximate)" } else { "" }
    ));
    s.push_str(&format!("clamp: {}\n", e.clamped));
    s.push_str(&format!("iterations: {}\n", e.iterations));
    s
}

fn ecp_from_stat(args: &EcpFromStatArgs) -> CliResult<()> {
    let output = ecp_from_stat_output(args)?;
    let text = match args.common.format {
        OutputFormat::Text => render_ecp_text(&output),
        OutputFormat::Structured => to_json(&output),
    };
    emit(&args.common.out, &text)
}

pub fn grid_spec(args: &SimulateArgs) -> CliResult<(GridSpec, GridOptions)> {
    let (contaminant, warning) = parse_contaminant(&args.common.contaminant)?;
    warn_all(&warning.into_iter().collect::<Vec<_>>());
    let spec = GridSpec {
        sizes: args.sizes.clone(),
        fractions: args.fractions.clone(),
        replications: args.reps,
        seed: args.common.seed,
        kinds: if args.kinds.is_empty() {
            StatisticKind::ALL.to_vec()
        } else {
            args.kinds.clone()
        },
        contaminant,
    };
    spec.validate()?;
    let mut options = GridOptions::for_spec(&spec);
    options.search.replications = args.search_reps;
    if let Some(r) = args.calibration_reps {
        options.calibration_replications = r;
    }
    Ok((spec, options))
}

fn opt_percent(e: Option<&EcpEstimate>) -> [String; 4] {
    match e {
        Some(e) => [
            format!("{:.2}", 100.0 * e.f),
            e.std_error
                .map(|s| format!("{:.2}", 100.0 * s))
                .unwrap_or_default(),
            e.method.to_string(),
            e.clamped.to_string(),
        ],
        None => Default::default(),
    }
}

pub fn grid_table(report: &GridReport) -> tables::Table {
    let headers = [
        "kind",
        "n",
        "f",
        "mean",
        "std_error",
        "significance",
        "ecp",
        "ecp_se",
        "ecp_method",
        "ecp_clamp",
        "ecp_simulated",
        "ecp_simulated_se",
        "ecp_simulated_method",
        "ecp_simulated_clamp",
        "errors",
    ]
    .map(String::from)
    .to_vec();
    let rows = report
        .cells
        .iter()
        .map(|c| {
            let mut row = vec![
                c.kind.to_string(),
                c.n.to_string(),
                format!("{}", c.f),
                format_statistic(c.mean),
                format!("{:.3e}", c.std_error),
                c.significance
                    .map(|s| s.marker().to_string())
                    .unwrap_or_default(),
            ];
            row.extend(opt_percent(c.ecp.as_ref()));
            row.extend(opt_percent(c.ecp_simulated.as_ref()));
            row.push(c.errors.join("; "));
            row
        })
        .collect();
    tables::Table { headers, rows }
}

fn simulate(args: &SimulateArgs) -> CliResult<i32> {
    let (spec, options) = grid_spec(args)?;
    let report = run_grid_with(&spec, options)?;
    let table = grid_table(&report).to_delimited(delimiter_byte(args.delimiter)?);
    match args.common.format {
        OutputFormat::Text => emit(&args.common.out, &table)?,
        OutputFormat::Structured => emit(&args.common.out, &to_json(&report))?,
    }
    if let Some(path) = &args.json {
        write_file(path, &to_json(&report))?;
    }
    let failed = report.failed_cells();
    if failed > 0 {
        eprintln!("{failed} grid cells failed");
        return Ok(1);
    }
    Ok(0)
}

fn tables_cmd(args: &TablesArgs) -> CliResult<()> {
    let (contaminant, warning) = parse_contaminant(&args.common.contaminant)?;
    warn_all(&warning.into_iter().collect::<Vec<_>>());
    let calibrator = Calibrator::new(args.reps, args.common.seed)?
        .with_method(StatisticKind::Ssd, args.ssd_critical)?
        .with_method(StatisticKind::Mad, args.mad_critical)?;
    let table = match args.which {
        Which::PanelA => {
            let sizes = if args.sizes.is_empty() {
                tables::PANEL_A_SIZES.to_vec()
            } else {
                args.sizes.clone()
            };
            tables::panel_a(&sizes, &args.levels, &calibrator, &contaminant)?
        }
        Which::PanelB => {
            let fractions = if args.fractions.is_empty() {
                tables::PANEL_B_FRACTIONS.to_vec()
            } else {
                args.fractions.clone()
            };
            tables::panel_b(&fractions, &args.levels, &calibrator, &contaminant)?
        }
        Which::Figure1 => {
            let sizes = if args.sizes.is_empty() {
                tables::FIGURE_SIZES.to_vec()
            } else {
                args.sizes.clone()
            };
            if args.steps == 0 {
                return Err(CliError::Input("--steps must be positive".into()));
            }
            tables::figure1(&sizes, args.steps, &contaminant)?
        }
    };
    let text = match args.common.format {
        OutputFormat::Text => table.to_delimited(delimiter_byte(args.delimiter)?),
        OutputFormat::Structured => {
            let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
                .rows
                .iter()
                .map(|r| {
                    table
                        .headers
                        .iter()
                        .cloned()
                        .zip(r.iter().map(|c| serde_json::Value::String(c.clone())))
                        .collect()
                })
                .collect();
            to_json(&rows)
        }
    };
    emit(&args.common.out, &text)
}

pub fn calibration_tables(args: &CalibrateArgs) -> CliResult<Vec<CriticalValueTable>> {
    let mut calibrator = Calibrator::new(args.reps, args.common.seed)?;
    if let Some(m) = args.method {
        calibrator = calibrator.with_method(args.kind, m)?;
    }
    let critical = CriticalValues::from_env(calibrator);
    args.n
        .iter()
        .map(|&n| critical.table(args.kind, n, &args.levels))
        .collect()
}

fn calibrate(args: &CalibrateArgs) -> CliResult<()> {
    let tables = calibration_tables(args)?;
    let text = match args.common.format {
        OutputFormat::Structured => to_json(&tables),
        OutputFormat::Text => {
            let mut s = String::new();
            for t in &tables {
                for l in &t.levels {
                    s.push_str(&format!(
                        "{} n={} level={} threshold={} method={}\n",
                        t.kind, t.n, l.level, l.threshold, t.method
                    ));
                }
            }
            s
        }
    };
    emit(&args.common.out, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_accept_percentages() {
        assert_eq!(parse_fraction("5%").unwrap(), 0.05);
        assert_eq!(parse_fraction("0.25").unwrap(), 0.25);
        assert!(parse_fraction("x").is_err());
    }

    #[test]
    fn contaminant_flags() {
        assert_eq!(parse_contaminant("uniform").unwrap().0.name(), "uniform");
        assert_eq!(
            parse_contaminant("degenerate:9").unwrap().0.name(),
            "degenerate(9)"
        );
        assert_eq!(
            parse_contaminant("degenerate").unwrap().0.name(),
            "degenerate(9)"
        );
        assert!(parse_contaminant("degenerate:0").is_err());
        assert!(parse_contaminant("normal").is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        std::fs::write(&path, "0.2 0.1 0.1 0.1 0.1 0.1 0.1 0.1 0.1").unwrap();
        let (c, w) = parse_contaminant(&format!("file:{}", path.display())).unwrap();
        assert_eq!(c.name(), "custom");
        assert!(w.is_none());
        assert!(parse_contaminant("file:/no/such/file").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
