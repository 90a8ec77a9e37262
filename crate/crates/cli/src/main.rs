//! `lwchi2`: evaluate log-Lambert W x chi-squared distributions and their
//! linear combinations, rebuild the quantile table, run exact LRTs and
//! Monte Carlo checks.
//!
//! Exit codes: 0 success, 2 usage or domain error, 3 numerical
//! non-convergence.

mod files;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lwchi2::convolve::{combo_cdf, combo_cdf_many, combo_pdf_many, combo_quantile, QuadratureSettings};
use lwchi2::inference::{
    asymptotic_test, canonical_lrt_distribution, canonical_lrt_test, regression_lrt_null,
    regression_lrt_statistic, variance_lrt_test, ConfidenceInterval, TestOutcome, VarianceIntervalRule,
};
use lwchi2::lwdist::{BaseDistribution, ChiSquared, LWChiSquared, Theta};
use lwchi2::oracle::{self, EmpiricalSummary, TabulatedCdf};
use nalgebra::DMatrix;
use serde_json::{json, Value};

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: 2, msg: msg.into() }
    }
}

impl From<lwchi2::Error> for Failure {
    fn from(e: lwchi2::Error) -> Self {
        let code = if matches!(e, lwchi2::Error::Convergence(_)) { 3 } else { 2 };
        Self { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Self::usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Parser)]
#[command(name = "lwchi2", version, about = "Log-Lambert W x chi-squared distributions and exact LRTs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a single LW x chi2 distribution.
    Dist(DistArgs),
    /// Quantiles of the standard LW x chi2 for several dof.
    Table1(Table1Args),
    /// Evaluate a linear combination read from a JSON file.
    Conv(ConvArgs),
    /// Exact likelihood-ratio tests.
    #[command(subcommand)]
    Lrt(LrtCmd),
    /// Monte Carlo summary of a distribution.
    Mc(McArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DistFn {
    Cdf,
    Pdf,
    Qf,
    Cf,
    Cumulants,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvFn {
    Cdf,
    Pdf,
    Qf,
}

#[derive(Args)]
struct Format {
    /// Significant digits in the output.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u8).range(1..=15))]
    digits: u8,
}

#[derive(Args)]
struct LwSpec {
    /// Degrees of freedom.
    #[arg(long)]
    nu: Option<f64>,
    /// Use theta = (nu (ln nu - 1), nu, 1).
    #[arg(long, conflicts_with = "theta")]
    standard: bool,
    /// Explicit theta1,theta2,theta3.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
    theta: Option<Vec<f64>>,
}

impl LwSpec {
    fn given(&self) -> bool {
        self.nu.is_some() || self.standard || self.theta.is_some()
    }

    fn build(&self) -> CliResult<LWChiSquared> {
        let nu = self.nu.ok_or_else(|| Failure::usage("--nu is required"))?;
        let theta = match (&self.theta, self.standard) {
            (Some(t), false) if t.len() == 3 => Theta::new(t[0], t[1], t[2])?,
            (Some(_), _) => return Err(Failure::usage("--theta takes exactly three values")),
            (None, true) => Theta::standard(nu)?,
            (None, false) => return Err(Failure::usage("give either --standard or --theta")),
        };
        Ok(LWChiSquared::new(nu, theta)?)
    }
}

#[derive(Args)]
struct Points {
    /// Evaluation points for cdf/pdf.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    y: Vec<f64>,
    /// Probabilities for qf.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    /// Frequencies for cf.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    t: Vec<f64>,
    /// Evenly spaced points lo,hi,count (added to the explicit ones).
    #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true)]
    grid: Option<Vec<f64>>,
}

impl Points {
    fn collect(&self, explicit: &[f64], flag: &str) -> CliResult<Vec<f64>> {
        let mut out = explicit.to_vec();
        if let Some(g) = &self.grid {
            let [lo, hi, n] = g[..] else {
                return Err(Failure::usage("--grid takes lo,hi,count"));
            };
            if !(n >= 1.0) || n.fract() != 0.0 || !(hi >= lo) {
                return Err(Failure::usage("--grid needs lo <= hi and a positive integer count"));
            }
            let n = n as usize;
            out.extend((0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }));
        }
        if out.is_empty() {
            return Err(Failure::usage(format!("no points given; use --{flag} or --grid")));
        }
        Ok(out)
    }
}

#[derive(Args)]
struct DistArgs {
    #[arg(value_enum)]
    function: DistFn,
    #[command(flatten)]
    lw: LwSpec,
    #[command(flatten)]
    points: Points,
    /// Highest cumulant order.
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[command(flatten)]
    format: Format,
}

#[derive(Args)]
struct Table1Args {
    /// Probabilities (rows).
    #[arg(long, value_delimiter = ',', default_value = "0.7,0.75,0.8,0.85,0.9,0.95,0.975,0.99,0.999,0.9999")]
    p: Vec<f64>,
    /// Degrees of freedom (columns); "inf" gives chi2_1.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,5,10,20,30,100,inf")]
    nu: Vec<String>,
    #[command(flatten)]
    format: Format,
}

#[derive(Args)]
struct QuadArgs {
    /// Absolute tolerance of the inversion.
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Node budget of the inversion.
    #[arg(long)]
    max_nodes: Option<usize>,
}

impl QuadArgs {
    fn settings(&self) -> CliResult<QuadratureSettings> {
        let mut q = QuadratureSettings::default();
        if let Some(t) = self.abs_tol {
            q.abs_tol = t;
        }
        if let Some(n) = self.max_nodes {
            q.max_nodes = n;
        }
        q.validate()?;
        Ok(q)
    }
}

#[derive(Args)]
struct ConvArgs {
    #[arg(value_enum)]
    function: ConvFn,
    /// Combination file (JSON list of terms).
    #[arg(long)]
    file: PathBuf,
    #[command(flatten)]
    points: Points,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    format: Format,
}

#[derive(Subcommand)]
enum LrtCmd {
    /// Test sigma^2 = sigma0^2 from a sample variance.
    Variance {
        #[arg(long)]
        s2: f64,
        #[arg(long)]
        sigma0_sq: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        format: Format,
    },
    /// Test beta = beta0, sigma^2 = sigma0^2 in a linear model.
    Regression {
        /// CSV with a header; every column except the response is a regressor.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "y")]
        response: String,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        beta0: Vec<f64>,
        #[arg(long)]
        sigma0_sq: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        format: Format,
    },
    /// Test canonical variance components (CSV rho,nu,U,theta0[,theta_true]).
    Canonical {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Write the statistic's law (under theta_true if present) as a combination file.
        #[arg(long)]
        write_combo: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
        #[command(flatten)]
        format: Format,
    },
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    lw: LwSpec,
    /// Sample chi2 with this dof instead.
    #[arg(long, conflicts_with_all = ["nu", "standard", "theta", "combo"])]
    chi2: Option<f64>,
    /// Sample a combination file instead.
    #[arg(long, conflicts_with_all = ["nu", "standard", "theta"])]
    combo: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    count: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Empirical quantiles to report.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.25,0.5,0.75,0.95,0.99")]
    quantiles: Vec<f64>,
    /// Skip the KS distance to the analytic CDF.
    #[arg(long)]
    no_ks: bool,
    /// Interpolation nodes for the KS distance of a combination.
    #[arg(long, default_value_t = 1000)]
    ks_nodes: usize,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    format: Format,
}

/// Rounds to `digits` significant digits.
fn round_sig(v: f64, digits: u8) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", digits as usize - 1, v).parse().unwrap_or(v)
}

fn fmt_num(v: f64, digits: u8) -> String {
    let r = round_sig(v, digits);
    if r.is_nan() {
        "nan".into()
    } else if r.is_infinite() {
        if r > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{r}")
    }
}

fn json_num(v: f64, digits: u8) -> Value {
    if v.is_finite() {
        json!(round_sig(v, digits))
    } else {
        Value::Null
    }
}

fn csv_out(header: &[&str], rows: Vec<Vec<String>>) -> CliResult<()> {
    let stdout = std::io::stdout();
    let mut w = csv::Writer::from_writer(stdout.lock());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn json_out(v: &Value) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| Failure::usage(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn cmd_dist(a: &DistArgs) -> CliResult<()> {
    let d = a.lw.build()?;
    let digits = a.format.digits;
    let pair = |x: f64, v: f64| vec![fmt_num(x, digits), fmt_num(v, digits)];
    match a.function {
        DistFn::Cdf => {
            let ys = a.points.collect(&a.points.y, "y")?;
            let rows = ys.iter().map(|&y| Ok(pair(y, d.cdf(y)?))).collect::<CliResult<_>>()?;
            csv_out(&["point", "value"], rows)
        }
        DistFn::Pdf => {
            let ys = a.points.collect(&a.points.y, "y")?;
            let rows = ys.iter().map(|&y| Ok(pair(y, d.pdf(y)?))).collect::<CliResult<_>>()?;
            csv_out(&["point", "value"], rows)
        }
        DistFn::Qf => {
            let ps = a.points.collect(&a.points.p, "p")?;
            let rows = ps.iter().map(|&p| Ok(pair(p, d.quantile(p)?))).collect::<CliResult<_>>()?;
            csv_out(&["point", "value"], rows)
        }
        DistFn::Cf => {
            let ts = a.points.collect(&a.points.t, "t")?;
            let rows = ts
                .iter()
                .map(|&t| {
                    let z = d.cf(t);
                    vec![fmt_num(t, digits), fmt_num(z.re, digits), fmt_num(z.im, digits)]
                })
                .collect();
            csv_out(&["point", "re", "im"], rows)
        }
        DistFn::Cumulants => {
            let c = d.cumulants(a.order)?;
            let mut rows: Vec<Vec<String>> = c
                .kappa
                .iter()
                .enumerate()
                .map(|(i, &k)| vec![format!("kappa{}", i + 1), fmt_num(k, digits)])
                .collect();
            rows.push(vec!["mean".into(), fmt_num(c.mean, digits)]);
            rows.push(vec!["variance".into(), fmt_num(c.variance, digits)]);
            rows.push(vec!["skewness".into(), fmt_num(c.skewness, digits)]);
            rows.push(vec!["kurtosis_excess_ratio".into(), fmt_num(c.kurtosis_excess_ratio, digits)]);
            csv_out(&["point", "value"], rows)
        }
    }
}

/// One table cell: the standard LW quantile, or chi2_1 for "inf".
fn table1_cell(nu: &str, p: f64) -> CliResult<f64> {
    if nu.eq_ignore_ascii_case("inf") {
        return Ok(ChiSquared::new(1.0)?.quantile(p)?);
    }
    let v: f64 = nu.parse().map_err(|_| Failure::usage(format!("bad dof \"{nu}\"")))?;
    Ok(LWChiSquared::standard(v)?.quantile(p)?)
}

fn cmd_table1(a: &Table1Args) -> CliResult<()> {
    if a.p.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
        return Err(Failure::usage("probabilities must lie in (0, 1)"));
    }
    let mut header = vec!["p"];
    header.extend(a.nu.iter().map(String::as_str));
    let rows = a
        .p
        .iter()
        .map(|&p| {
            let mut row = vec![fmt_num(p, a.format.digits)];
            for nu in &a.nu {
                row.push(fmt_num(table1_cell(nu, p)?, a.format.digits));
            }
            Ok(row)
        })
        .collect::<CliResult<_>>()?;
    csv_out(&header, rows)
}

fn cmd_conv(a: &ConvArgs) -> CliResult<()> {
    let c = files::read_combo(&a.file)?;
    let q = a.quad.settings()?;
    let digits = a.format.digits;
    let (xs, vs) = match a.function {
        ConvFn::Cdf => {
            let ys = a.points.collect(&a.points.y, "y")?;
            let v = combo_cdf_many(&c, &ys, &q)?;
            (ys, v)
        }
        ConvFn::Pdf => {
            let ys = a.points.collect(&a.points.y, "y")?;
            let v = combo_pdf_many(&c, &ys, &q)?;
            (ys, v)
        }
        ConvFn::Qf => {
            let ps = a.points.collect(&a.points.p, "p")?;
            let v = ps.iter().map(|&p| combo_quantile(&c, p, &q)).collect::<Result<Vec<_>, _>>()?;
            (ps, v)
        }
    };
    let rows = xs.iter().zip(&vs).map(|(&x, &v)| vec![fmt_num(x, digits), fmt_num(v, digits)]).collect();
    csv_out(&["point", "value"], rows)
}

fn decision(t: &TestOutcome) -> &'static str {
    if t.reject() {
        "reject"
    } else {
        "accept"
    }
}

fn outcome_json(t: &TestOutcome, digits: u8) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("statistic".into(), json_num(t.statistic, digits));
    m.insert("null_quantile".into(), json_num(t.null_quantile, digits));
    m.insert("p_value".into(), json_num(t.p_value, digits));
    m.insert("alpha".into(), json!(t.alpha));
    m.insert("decision".into(), json!(decision(t)));
    m
}

fn ci_json(ci: &ConfidenceInterval, digits: u8) -> Value {
    json!({
        "lower": json_num(ci.lower, digits),
        "upper": json_num(ci.upper, digits),
        "level": json_num(ci.level, digits),
    })
}

fn cmd_lrt(cmd: &LrtCmd) -> CliResult<()> {
    match cmd {
        LrtCmd::Variance { s2, sigma0_sq, nu, alpha, format } => {
            let t = variance_lrt_test(*s2, *sigma0_sq, *nu, *alpha)?;
            let lrt = VarianceIntervalRule::lrt(*nu, *alpha)?.interval(*s2)?;
            let ml = VarianceIntervalRule::min_length(*nu, *alpha)?.interval(*s2)?;
            let mut m = outcome_json(&t, format.digits);
            m.insert("ci_lrt".into(), ci_json(&lrt, format.digits));
            m.insert("ci_minlength".into(), ci_json(&ml, format.digits));
            json_out(&Value::Object(m))
        }
        LrtCmd::Regression { data, response, beta0, sigma0_sq, alpha, quad, format } => {
            let (y, cols) = files::read_regression(data, response)?;
            let n = y.len();
            let k = cols.len();
            let flat: Vec<f64> = cols.concat();
            let x = DMatrix::from_column_slice(n, k, &flat);
            let statistic = regression_lrt_statistic(&y, &x, beta0, *sigma0_sq)?;
            if !(*alpha > 0.0 && *alpha < 1.0) {
                return Err(Failure::usage("alpha must lie in (0, 1)"));
            }
            let q = quad.settings()?;
            let null = regression_lrt_null(n, k)?;
            let t = TestOutcome {
                statistic,
                null_quantile: combo_quantile(&null, 1.0 - alpha, &q)?,
                p_value: (1.0 - combo_cdf(&null, statistic, &q)?).clamp(0.0, 1.0),
                alpha: *alpha,
            };
            let mut m = outcome_json(&t, format.digits);
            m.insert("n".into(), json!(n));
            m.insert("k".into(), json!(k));
            json_out(&Value::Object(m))
        }
        LrtCmd::Canonical { file, alpha, write_combo, quad, format } => {
            let data = files::read_varcomp(file)?;
            let q = quad.settings()?;
            let t = canonical_lrt_test(&data.model, &data.theta0, *alpha, &q)?;
            let dof = data.model.len() as f64;
            let asym = asymptotic_test(t.statistic, dof, *alpha)?;
            let mut m = outcome_json(&t, format.digits);
            let mut am = outcome_json(&asym, format.digits);
            am.remove("statistic");
            am.insert("dof".into(), json!(dof));
            m.insert("asymptotic".into(), Value::Object(am));
            let law = canonical_lrt_distribution(&data.model, &data.theta0, data.theta_true.as_deref())?;
            if data.theta_true.is_some() {
                let power = 1.0 - combo_cdf(&law, t.null_quantile, &q)?;
                m.insert("power".into(), json_num(power.clamp(0.0, 1.0), format.digits));
            }
            if let Some(path) = write_combo {
                std::fs::write(path, files::combo_to_json(&law))?;
            }
            json_out(&Value::Object(m))
        }
    }
}

fn cmd_mc(a: &McArgs) -> CliResult<()> {
    let digits = a.format.digits;
    if a.count == 0 {
        return Err(Failure::usage("--count must be at least 1"));
    }
    if a.quantiles.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Failure::usage("quantile levels must lie in [0, 1]"));
    }
    let (target, summary, ks): (Value, EmpiricalSummary, Option<f64>) = if let Some(nu) = a.chi2 {
        let s = oracle::sample_chi2(nu, a.count, a.seed)?;
        let ks = if a.no_ks {
            None
        } else {
            let c = ChiSquared::new(nu)?;
            Some(oracle::ks_statistic(&s, |x| c.cdf(x).unwrap_or(f64::NAN)))
        };
        (json!({"kind": "chi2", "nu": nu}), s, ks)
    } else if let Some(path) = &a.combo {
        let c = files::read_combo(path)?;
        let s = oracle::sample_combination(&c, a.count, a.seed)?;
        let ks = if a.no_ks {
            None
        } else {
            let tab = TabulatedCdf::over_samples(&c, &s, a.ks_nodes, &a.quad.settings()?)?;
            Some(oracle::ks_statistic(&s, |x| tab.eval(x)))
        };
        (json!({"kind": "combination", "file": path.display().to_string()}), s, ks)
    } else if a.lw.given() {
        let d = a.lw.build()?;
        let s = oracle::sample_lw(&d, a.count, a.seed)?;
        let ks = if a.no_ks { None } else { Some(oracle::ks_statistic(&s, |y| d.cdf(y).unwrap_or(f64::NAN))) };
        (json!({"kind": "lw_chi2", "nu": d.nu(), "theta": d.theta().as_array()}), s, ks)
    } else {
        return Err(Failure::usage("give --nu with --standard/--theta, --chi2 or --combo"));
    };
    let mut qs = serde_json::Map::new();
    for &p in &a.quantiles {
        qs.insert(format!("{p}"), json_num(summary.quantile(p)?, digits));
    }
    json_out(&json!({
        "target": target,
        "count": a.count,
        "seed": a.seed,
        "mean": json_num(summary.mean, digits),
        "variance": json_num(summary.variance, digits),
        "std_error": json_num(summary.std_error(), digits),
        "quantiles": Value::Object(qs),
        "ks": ks.map(|v| json_num(v, digits)).unwrap_or(Value::Null),
    }))
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.cmd {
        Cmd::Dist(a) => cmd_dist(a),
        Cmd::Table1(a) => cmd_table1(a),
        Cmd::Conv(a) => cmd_conv(a),
        Cmd::Lrt(c) => cmd_lrt(c),
        Cmd::Mc(a) => cmd_mc(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_num(4.760_591_23, 6), "4.76059");
        assert_eq!(fmt_num(22.268_864_7, 6), "22.2689");
        assert_eq!(fmt_num(0.0, 6), "0");
        assert_eq!(fmt_num(1.234_567_890_123_456_7e-7, 15), "0.000000123456789012346");
        assert_eq!(fmt_num(f64::INFINITY, 6), "inf");
        assert_eq!(json_num(f64::NAN, 6), Value::Null);
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
