//! Command-line surface for the measure-calculus library: tabulate
//! distribution functions, sample eigenfunctions of the measure Laplacian,
//! run the verification suites, and print eigenvalue counting tables.
//!
//! Output contract: CSV has a header row, LF line endings, and decimals with
//! 17 significant digits so every value round-trips bit for bit. SVG output
//! is deterministic for a fixed request. Files are written to a temporary
//! sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mgcalc::verify::Comparison;
use mgcalc::{
    counting_function, eigenpair, families, measure_suite, run_suite, weyl_ratio,
    BoundaryCondition, CdfEvaluator, EigenPair, Error, MeasureSpec, Suite, VerificationReport,
    VerifyOptions,
};

#[derive(Parser)]
#[command(
    name = "mgcalc",
    version,
    about = "Distribution functions of singular measures and the eigensystem of their Laplacian"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the distribution function F on a uniform x grid
    Cdf(CdfArgs),
    /// Sample eigenfunctions of the measure Laplacian as CSV or SVG
    Eigen(EigenArgs),
    /// Run invariant suites and print one row per check
    Verify(VerifyArgs),
    /// Tabulate the eigenvalue counting function and its Weyl ratio
    Count(CountArgs),
}

/// Measure selection shared by the evaluation commands.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct MeasureSelect {
    /// Built-in measure: lebesgue, chebyshev, salem:P,Q, cantor-4.3, cantor-classic
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Path to a JSON measure spec
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
}

/// Same selection, but optional: verify falls back to the preset battery.
#[derive(Args)]
#[group(required = false, multiple = false)]
struct MeasureOverride {
    /// Also run the per-measure checks on this built-in measure
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Also run the per-measure checks on this JSON measure spec
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct CdfArgs {
    #[command(flatten)]
    measure: MeasureSelect,
    /// Rows in the uniform x grid (at least 2)
    #[arg(long, default_value_t = 101)]
    grid: usize,
    /// Absolute tolerance of one CDF evaluation
    #[arg(long, default_value_t = CdfEvaluator::DEFAULT_TOL)]
    tol: f64,
    /// Output path (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EigenArgs {
    #[command(flatten)]
    measure: MeasureSelect,
    /// Boundary condition
    #[arg(long, value_enum, default_value_t = BcArg::Dirichlet)]
    bc: BcArg,
    /// Comma-separated eigenfunction indices
    #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
    n: Vec<u32>,
    /// Sample count on the uniform t grid (at least 2). Samples sit at
    /// x = pseudo_inverse(t), so gap plateaus appear as jumps in x
    #[arg(long, default_value_t = 257)]
    samples: usize,
    /// Absolute tolerance of the CDF evaluator behind the sampler
    #[arg(long, default_value_t = CdfEvaluator::DEFAULT_TOL)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Output path (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which invariant family to run
    #[arg(long, default_value = "all", value_name = "NAME")]
    suite: String,
    /// Override the suite's default bound / evaluator tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Quadrature node count for integral-backed checks
    #[arg(long = "M", default_value_t = 100_000, value_name = "INT")]
    quad: usize,
    #[command(flatten)]
    measure: MeasureOverride,
}

#[derive(Args)]
struct CountArgs {
    /// Upper end of the spectral parameter range
    #[arg(value_name = "XMAX")]
    xmax: f64,
    /// Boundary condition
    #[arg(long, value_enum, default_value_t = BcArg::Dirichlet)]
    bc: BcArg,
    /// Number of geometrically spaced rows ending at XMAX
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Output path (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BcArg {
    Dirichlet,
    Neumann,
}

impl From<BcArg> for BoundaryCondition {
    fn from(bc: BcArg) -> BoundaryCondition {
        match bc {
            BcArg::Dirichlet => BoundaryCondition::Dirichlet,
            BcArg::Neumann => BoundaryCondition::VonNeumann,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Svg,
}

/// Failure carrying the exit code contract: 2 for unreadable or invalid
/// input, 3 for precision loss, 1 for verification failures.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Failure {
        let code = match err {
            Error::Precision { .. } | Error::DegenerateBracket { .. } => 3,
            Error::IterationLimit { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    match command {
        Command::Cdf(args) => run_cdf(args).map(|()| ExitCode::SUCCESS),
        Command::Eigen(args) => run_eigen(args).map(|()| ExitCode::SUCCESS),
        Command::Verify(args) => run_verify(args),
        Command::Count(args) => run_count(args).map(|()| ExitCode::SUCCESS),
    }
}

impl MeasureSelect {
    fn resolve(&self) -> Result<MeasureSpec, Failure> {
        load_measure(self.preset.as_deref(), self.spec.as_deref())
            .map(|m| m.expect("clap enforces that one selector is present").1)
    }
}

impl MeasureOverride {
    fn resolve(&self) -> Result<Option<(String, MeasureSpec)>, Failure> {
        load_measure(self.preset.as_deref(), self.spec.as_deref())
    }
}

fn load_measure(
    preset: Option<&str>,
    spec: Option<&Path>,
) -> Result<Option<(String, MeasureSpec)>, Failure> {
    if let Some(name) = preset {
        return Ok(Some((name.to_string(), families::preset(name)?)));
    }
    let Some(path) = spec else {
        return Ok(None);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read spec {}: {e}", path.display())))?;
    let spec = MeasureSpec::from_json_str(&text)?;
    Ok(Some((path.display().to_string(), spec)))
}

fn run_cdf(args: CdfArgs) -> Result<(), Failure> {
    if args.grid < 2 {
        return Err(invalid("--grid must be at least 2"));
    }
    let spec = args.measure.resolve()?;
    let evaluator = CdfEvaluator::with_params(spec, args.tol, CdfEvaluator::DEFAULT_DEPTH_LIMIT)?;
    let iv = evaluator.interval();
    let xs = uniform_grid(iv.a(), iv.b(), args.grid);
    let fs = evaluator.cdf_grid(&xs)?;
    let mut csv = String::from("x,F\n");
    for (x, f) in xs.iter().zip(&fs) {
        let _ = writeln!(csv, "{},{}", fmt17(*x), fmt17(*f));
    }
    write_output(args.out.as_deref(), csv.as_bytes())
}

fn run_eigen(args: EigenArgs) -> Result<(), Failure> {
    if args.samples < 2 {
        return Err(invalid("--samples must be at least 2"));
    }
    if args.n.is_empty() {
        return Err(invalid("--n must list at least one index"));
    }
    let bc = BoundaryCondition::from(args.bc);
    let spec = args.measure.resolve()?;
    let evaluator = CdfEvaluator::with_params(spec, args.tol, CdfEvaluator::DEFAULT_DEPTH_LIMIT)?;
    let pairs = args
        .n
        .iter()
        .map(|&n| eigenpair(n, bc, &evaluator))
        .collect::<Result<Vec<EigenPair>, Error>>()?;
    let ts = uniform_grid(0.0, 1.0, args.samples);
    let xs = evaluator.pseudo_inverse_grid(&ts)?;
    let columns: Vec<(String, Vec<f64>)> = pairs
        .iter()
        .map(|pair| {
            let label = match bc {
                BoundaryCondition::Dirichlet => format!("f_{}", pair.n()),
                BoundaryCondition::VonNeumann => format!("g_{}", pair.n()),
            };
            (label, ts.iter().map(|&t| pair.eval_at_cdf(t)).collect())
        })
        .collect();
    let bytes = match args.format {
        FormatArg::Csv => {
            let mut csv = String::from("x");
            for (label, _) in &columns {
                let _ = write!(csv, ",{label}");
            }
            csv.push('\n');
            for (i, x) in xs.iter().enumerate() {
                let _ = write!(csv, "{}", fmt17(*x));
                for (_, values) in &columns {
                    let _ = write!(csv, ",{}", fmt17(values[i]));
                }
                csv.push('\n');
            }
            csv
        }
        FormatArg::Svg => render_svg(&xs, &columns),
    };
    write_output(args.out.as_deref(), bytes.as_bytes())
}

fn run_count(args: CountArgs) -> Result<(), Failure> {
    if !args.xmax.is_finite() || args.xmax <= 0.0 {
        return Err(invalid("XMAX must be positive"));
    }
    if args.samples < 1 {
        return Err(invalid("--samples must be at least 1"));
    }
    let bc = BoundaryCondition::from(args.bc);
    let mut csv = String::from("x,N,weyl_ratio\n");
    // Three decades of geometric spacing ending exactly at xmax.
    for i in 0..args.samples {
        let x = if args.samples == 1 {
            args.xmax
        } else {
            let back = (args.samples - 1 - i) as f64 / (args.samples - 1) as f64;
            args.xmax * 10f64.powf(-3.0 * back)
        };
        let count = counting_function(x, bc);
        let ratio = weyl_ratio(x, bc)?;
        let _ = writeln!(csv, "{},{count},{}", fmt17(x), fmt17(ratio));
    }
    write_output(args.out.as_deref(), csv.as_bytes())
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    let suite = Suite::parse(&args.suite)?;
    let options = VerifyOptions {
        tol: args.tol,
        quad_size: args.quad,
    };
    let mut reports = run_suite(suite, &options)?;
    if let Some((label, spec)) = args.measure.resolve()? {
        reports.push(measure_suite(&label, &spec, &options)?);
    }
    print_reports(&reports);
    let failed: usize = reports
        .iter()
        .flat_map(|r| &r.checks)
        .filter(|c| c.gate && !c.passed)
        .count();
    if failed == 0 {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failed} check(s) failed");
        Ok(ExitCode::from(1))
    }
}

fn print_reports(reports: &[VerificationReport]) {
    for report in reports {
        println!("suite: {}", report.suite);
        for check in &report.checks {
            let status = if !check.gate {
                "info"
            } else if check.passed {
                "PASS"
            } else {
                "FAIL"
            };
            let op = match check.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            println!(
                "{status:>4}  {:<52} {:>13.6e} {op} {:.6e}",
                check.name, check.measured, check.bound
            );
        }
    }
}

fn uniform_grid(a: f64, b: f64, len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| (a + (b - a) * i as f64 / (len - 1) as f64).clamp(a.min(b), b.max(a)))
        .collect()
}

/// 17 significant digits: enough for f64 values to parse back bit for bit.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let Some(path) = path else {
        return std::io::stdout()
            .write_all(bytes)
            .map_err(|e| invalid(format!("cannot write to stdout: {e}")));
    };
    let file_name = path
        .file_name()
        .ok_or_else(|| invalid(format!("output path {} has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(|e| invalid(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        invalid(format!("cannot move output into {}: {e}", path.display()))
    })
}

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 520.0;
const PLOT_LEFT: f64 = 64.0;
const PLOT_RIGHT: f64 = 776.0;
const PLOT_TOP: f64 = 24.0;
const PLOT_BOTTOM: f64 = 456.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#7f7f7f",
];

/// Fixed-layout line plot. Every coordinate is derived deterministically
/// from the data, so a fixed request yields byte-identical output.
fn render_svg(xs: &[f64], columns: &[(String, Vec<f64>)]) -> String {
    let (xmin, xmax) = span(xs.iter().copied());
    let (ymin, ymax) = span(columns.iter().flat_map(|(_, v)| v.iter().copied()));
    let map_x = |x: f64| PLOT_LEFT + (x - xmin) / (xmax - xmin) * (PLOT_RIGHT - PLOT_LEFT);
    let map_y = |y: f64| PLOT_BOTTOM - (y - ymin) / (ymax - ymin) * (PLOT_BOTTOM - PLOT_TOP);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" \
         viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"{PLOT_LEFT}\" y=\"{PLOT_TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#333333\" stroke-width=\"1\"/>",
        PLOT_RIGHT - PLOT_LEFT,
        PLOT_BOTTOM - PLOT_TOP
    );
    for k in 0..=4 {
        let fx = xmin + (xmax - xmin) * k as f64 / 4.0;
        let px = map_x(fx);
        let _ = writeln!(
            svg,
            "<line x1=\"{px:.2}\" y1=\"{PLOT_BOTTOM}\" x2=\"{px:.2}\" y2=\"{}\" \
             stroke=\"#333333\" stroke-width=\"1\"/>",
            PLOT_BOTTOM + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{px:.2}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" \
             text-anchor=\"middle\">{fx:.3}</text>",
            PLOT_BOTTOM + 20.0
        );
        let fy = ymin + (ymax - ymin) * k as f64 / 4.0;
        let py = map_y(fy);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{py:.2}\" x2=\"{PLOT_LEFT}\" y2=\"{py:.2}\" \
             stroke=\"#333333\" stroke-width=\"1\"/>",
            PLOT_LEFT - 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\" \
             text-anchor=\"end\">{fy:.3}</text>",
            PLOT_LEFT - 8.0,
            py + 4.0
        );
    }
    for (i, (label, values)) in columns.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (x, y) in xs.iter().zip(values) {
            let _ = write!(points, "{:.2},{:.2} ", map_x(*x), map_y(*y));
        }
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.trim_end()
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"13\" \
             fill=\"{color}\">{label}</text>",
            PLOT_RIGHT - 60.0,
            PLOT_TOP + 18.0 + 16.0 * i as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        // Degenerate span: widen so the polyline sits mid-plot.
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips_awkward_values() {
        for v in [
            0.1,
            2.0 / 3.0,
            f64::MIN_POSITIVE,
            1.0 + f64::EPSILON,
            -0.49999999999999994,
        ] {
            let text = fmt17(v);
            assert_eq!(
                text.parse::<f64>().unwrap().to_bits(),
                v.to_bits(),
                "{text}"
            );
        }
    }

    #[test]
    fn uniform_grid_pins_both_endpoints() {
        let grid = uniform_grid(-1.0, 1.0, 5);
        assert_eq!(grid, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let grid = uniform_grid(0.0, 0.3, 4);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[3], 0.3);
    }

    #[test]
    fn span_widens_flat_data_and_survives_nan() {
        assert_eq!(span([2.0, 2.0].into_iter()), (1.5, 2.5));
        assert_eq!(span(std::iter::empty()), (0.0, 1.0));
        assert_eq!(span([0.0, 4.0].into_iter()), (0.0, 4.0));
    }

    #[test]
    fn error_kinds_map_to_the_exit_code_contract() {
        let validation = families::preset("nope").expect_err("unknown preset");
        assert_eq!(Failure::from(validation).code, 2);
        let spec = families::preset("salem:0.9999999,0.5").expect("valid parameters");
        let evaluator = CdfEvaluator::new(spec).expect("evaluator builds");
        let precision = evaluator.pseudo_inverse(0.5).expect_err("depth exhaustion");
        assert_eq!(Failure::from(precision).code, 3);
        assert_eq!(invalid("nope").code, 2);
    }

    #[test]
    fn selectors_are_mutually_exclusive_and_required() {
        assert!(Cli::try_parse_from(["mgcalc", "cdf", "--preset", "lebesgue"]).is_ok());
        assert!(Cli::try_parse_from(["mgcalc", "cdf"]).is_err());
        assert!(
            Cli::try_parse_from(["mgcalc", "cdf", "--preset", "lebesgue", "--spec", "m.json"])
                .is_err()
        );
        // verify runs without a measure, but still rejects both at once.
        assert!(Cli::try_parse_from(["mgcalc", "verify"]).is_ok());
        assert!(Cli::try_parse_from([
            "mgcalc", "verify", "--preset", "lebesgue", "--spec", "m.json"
        ])
        .is_err());
        assert!(Cli::try_parse_from(["mgcalc", "eigen", "--preset", "lebesgue"]).is_err());
        assert!(
            Cli::try_parse_from(["mgcalc", "eigen", "--preset", "lebesgue", "--n", "1,2"]).is_ok()
        );
    }
}
