//! Batch front end: calibrate from a price CSV, price options, simulate paths
//! and tabulate transition densities. All outputs are files (or stdout).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bgig::calibration::{calibrate_with, CalibrationOptions, CalibrationReport};
use bgig::distributions::BgigParams;
use bgig::pricing::{price_rows, LewisConfig, McConfig, TableMethod};
use bgig::process::{simulate_grid_paths, simulate_integer_paths, TransitionDensity};
use bgig::risk_neutral::martingale_gap;
use chrono::{NaiveDate, NaiveDateTime};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_INFEASIBLE: u8 = 5;

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Display) -> Self {
        Failure { code, msg: msg.to_string() }
    }
}

impl From<bgig::Error> for Failure {
    fn from(e: bgig::Error) -> Self {
        use bgig::Error::*;
        let code = match &e {
            _ if e.is_numerical() => EXIT_NUMERICAL,
            InvalidParameter(_) => EXIT_USAGE,
            _ => EXIT_INFEASIBLE,
        };
        Failure::new(code, e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(EXIT_IO, e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Parser)]
#[command(name = "bgig", version, about = "BGIG calibration, pricing, simulation and densities")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit physical and risk-neutral parameters to a date,close CSV.
    Calibrate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Sampling interval of the closes in model time units.
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        /// Fraction of returns trimmed from each tail before the moment fit.
        #[arg(long, default_value_t = 0.0)]
        trim_q: f64,
        #[arg(long, default_value_t = 0.0)]
        rate: f64,
        /// Estimate a+ and a- on the untrimmed returns.
        #[arg(long)]
        untrimmed_extremes: bool,
        /// Use the extreme-value estimator of a+ and a- when delta is not 1.
        #[arg(long)]
        allow_nonunit_delta: bool,
    },
    /// European call and put prices over a strike list.
    Price {
        /// Calibration JSON (risk-neutral fields used) or a bare parameter JSON
        /// taken as risk-neutral.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        strikes: Vec<f64>,
        #[arg(long)]
        maturity: f64,
        #[arg(long, default_value_t = 0.0)]
        rate: f64,
        #[arg(long, default_value_t = 1.0)]
        spot: f64,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Sample paths in long format (path_id, time, value).
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Integer horizon; the path is recorded at 0, 1, ..., horizon.
        #[arg(long, conflicts_with = "grid")]
        horizon: Option<usize>,
        /// Increasing observation times, comma separated.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1)]
        paths: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the risk-neutral fields of a calibration JSON.
        #[arg(long)]
        risk_neutral: bool,
    },
    /// Transition density of X_t on a uniform grid.
    Density {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        x_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        x_max: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long)]
        risk_neutral: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Mc,
    Lewis,
    Both,
}

#[derive(Deserialize)]
struct PriceCsvRow {
    date: String,
    close: f64,
}

/// Either a calibration report or six bare parameters.
#[derive(Deserialize)]
#[serde(untagged)]
enum ParamsFile {
    Report(CalibrationReport),
    Bare { a_plus: f64, b_plus: f64, p_plus: f64, a_minus: f64, b_minus: f64, p_minus: f64 },
}

fn parse_date(s: &str) -> Option<NaiveDateTime> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .or_else(|| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").ok())
}

fn read_prices(path: &Path) -> CliResult<Vec<f64>> {
    let file = File::open(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let mut closes = Vec::new();
    let mut last: Option<NaiveDateTime> = None;
    for (i, rec) in rdr.deserialize::<PriceCsvRow>().enumerate() {
        let line = i + 2;
        let row = rec.map_err(|e| Failure::new(EXIT_PARSE, format!("line {line}: {e}")))?;
        let date = parse_date(&row.date)
            .ok_or_else(|| Failure::new(EXIT_PARSE, format!("line {line}: bad date {:?}", row.date)))?;
        if last.is_some_and(|d| date <= d) {
            return Err(Failure::new(EXIT_PARSE, format!("line {line}: dates must increase strictly")));
        }
        if !(row.close > 0.0 && row.close.is_finite()) {
            return Err(Failure::new(EXIT_PARSE, format!("line {line}: close must be positive, got {}", row.close)));
        }
        last = Some(date);
        closes.push(row.close);
    }
    Ok(closes)
}

fn read_params(path: &Path, risk_neutral: bool) -> CliResult<BgigParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
    let file: ParamsFile = serde_json::from_str(&text)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: not a parameter file: {e}", path.display())))?;
    let params = match file {
        ParamsFile::Report(r) if risk_neutral => r.rn_params(),
        ParamsFile::Report(r) => r.params(),
        ParamsFile::Bare { a_plus, b_plus, p_plus, a_minus, b_minus, p_minus } => {
            BgigParams::new(a_plus, b_plus, p_plus, a_minus, b_minus, p_minus)
        }
    };
    params.map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn sink(output: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_writer(output: &Option<PathBuf>, header: &[&str]) -> CliResult<csv::Writer<Box<dyn Write>>> {
    let mut w = csv::Writer::from_writer(sink(output)?);
    w.write_record(header).map_err(csv_err)?;
    Ok(w)
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::new(EXIT_IO, e)
}

fn usage(cond: bool, msg: &str) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(Failure::new(EXIT_USAGE, msg))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Command::Calibrate { input, output, delta, trim_q, rate, untrimmed_extremes, allow_nonunit_delta } => {
            let prices = read_prices(&input)?;
            let opts = CalibrationOptions { untrimmed_extremes, allow_nonunit_delta, ..Default::default() };
            let (cal, ess) = calibrate_with(&prices, delta, trim_q, rate, &opts)?;
            if !ess.martingale_checkable() {
                eprintln!("warning: risk-neutral a+ = {} <= 2, E[exp(X_1)] is infinite", ess.rn_params.plus.a);
            }
            let report = CalibrationReport::new(&cal, &ess);
            let mut out = sink(&output)?;
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::new(EXIT_IO, e))?;
            writeln!(out)?;
            out.flush()?;
        }
        Command::Price { input, output, strikes, maturity, rate, spot, method, paths, seed } => {
            usage(maturity > 0.0 && maturity.is_finite(), "--maturity must be positive")?;
            usage(spot > 0.0 && spot.is_finite(), "--spot must be positive")?;
            usage(strikes.iter().all(|k| *k > 0.0 && k.is_finite()), "--strikes must be positive")?;
            usage(rate.is_finite(), "--rate must be finite")?;
            let rn = read_params(&input, true)?;
            match martingale_gap(&rn, rate) {
                Ok(g) if g.abs() > 1e-8 => eprintln!("warning: parameters violate the martingale condition, gap {g:e}"),
                Err(e) => eprintln!("warning: martingale condition not checkable: {e}"),
                _ => {}
            }
            let method = match method {
                Method::Mc => TableMethod::Mc,
                Method::Lewis => TableMethod::Lewis,
                Method::Both => TableMethod::Both,
            };
            let mc = McConfig { n_paths: paths, seed };
            let rows = price_rows(&rn, spot, &strikes, maturity, rate, method, &mc, &LewisConfig::default())?;
            let mut w = csv_writer(
                &output,
                &["strike", "call_lewis", "call_mc", "call_mc_se", "put_lewis", "put_mc", "put_mc_se"],
            )?;
            for r in rows {
                w.write_record([
                    num(r.strike),
                    opt_num(r.call_lewis),
                    opt_num(r.call_mc),
                    opt_num(r.call_mc_se),
                    opt_num(r.put_lewis),
                    opt_num(r.put_mc),
                    opt_num(r.put_mc_se),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
        }
        Command::Simulate { input, output, horizon, grid, paths, seed, risk_neutral } => {
            let params = read_params(&input, risk_neutral)?;
            let sims = match (horizon, grid) {
                (Some(h), None) => simulate_integer_paths(&params, h, paths, seed)?,
                (None, Some(g)) => simulate_grid_paths(&params, &g, paths, seed)?,
                _ => return Err(Failure::new(EXIT_USAGE, "exactly one of --horizon and --grid is required")),
            };
            let mut w = csv_writer(&output, &["path_id", "time", "value"])?;
            for (i, path) in sims.iter().enumerate() {
                for (t, v) in path.times.iter().zip(&path.values) {
                    w.write_record([i.to_string(), num(*t), num(*v)]).map_err(csv_err)?;
                }
            }
            w.flush()?;
        }
        Command::Density { input, output, x_min, x_max, points, t, risk_neutral } => {
            usage(x_min.is_finite() && x_max.is_finite() && x_min < x_max, "--x-min must be below --x-max")?;
            usage(points >= 1, "--points must be at least 1")?;
            usage(t > 0.0 && t.is_finite(), "--t must be positive")?;
            let params = read_params(&input, risk_neutral)?;
            let dens = TransitionDensity::new(&params, t)?;
            let mut w = csv_writer(&output, &["x", "pdf"])?;
            let step = if points > 1 { (x_max - x_min) / (points - 1) as f64 } else { 0.0 };
            for i in 0..points {
                let x = x_min + step * i as f64;
                w.write_record([num(x), num(dens.pdf(x))]).map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
