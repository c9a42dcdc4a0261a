//! Command-line surface: configuration, descriptor ingestion and dispatch.

mod output;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use output::{csv_string, emit_csv, format_number, CsvTable, Table};

use crate::approx::{bohr_coefficient, partial_sum_curve, DEFAULT_T};
use crate::convops::{heat_apply, infinite_convolution, infinite_convolution_quad, ConvOptions, HeatMethod, Kernel};
use crate::corpus::corpus_get;
use crate::error::{invalid, MetapError, Result};
use crate::funcspace::{
    descriptor_from_json, FunctionDescriptor, Multiplier, ScalarMap, WeightFunction, Window, C64,
};
use crate::gennorms::{
    besicovitch_seminorm_curve, geometric_grid, stepanov_seminorm, weyl_seminorm_curve, Gauge, SeminormCurve,
    SeminormSpec, DEFAULT_POINTS, DEFAULT_RATIO, DEFAULT_T0,
};
use crate::periods::{normality_check, relative_density, scan_eps_periods, semi_periodicity_check, SemiType};
use crate::pseudometrics::{check_space_axioms, distance, MetricFamily, PseudometricSpec};
use crate::verify::{report_json, verify};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Closed interval written `a:b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for Span {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected `a:b`, got `{s}`"))?;
        let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
        let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(format!("need finite a <= b, got `{s}`"));
        }
        Ok(Span { lo, hi })
    }
}

impl Span {
    fn window(&self) -> Result<Window> {
        Window::interval(self.lo, self.hi)
    }
}

/// Complex number written `re` or `re,im`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl FromStr for Complex {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}`"));
        match s.split_once(',') {
            Some((a, b)) => Ok(Complex { re: parse(a)?, im: parse(b)? }),
            None => Ok(Complex { re: parse(s)?, im: 0.0 }),
        }
    }
}

impl Complex {
    fn c64(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// Sample points written `a:b:step`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Points {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl FromStr for Points {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected `a:b:step`, got `{s}`"));
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}`")))
            .collect::<std::result::Result<_, _>>()?;
        if !(v.iter().all(|x| x.is_finite()) && v[0] <= v[1] && v[2] > 0.0) {
            return Err(format!("need finite a <= b and step > 0, got `{s}`"));
        }
        Ok(Points { lo: v[0], hi: v[1], step: v[2] })
    }
}

impl Points {
    fn values(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.lo + k as f64 * self.step).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeName {
    Sup,
    WeightedSup,
    Lp,
    Bvp,
    BvpSlow,
    Arctan,
    Exhaustion,
    Discrete,
    Stepanov,
    Weyl,
    Besicovitch,
}

/// Distance used to compare translates and approximants.
#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeArgs {
    #[arg(long, value_enum, default_value = "sup")]
    pub metric: GaugeName,
    /// Exponent of Lp, BV-p and seminorm gauges.
    #[arg(long = "metric-p", default_value_t = 1.0)]
    pub metric_p: f64,
    /// Weight exponent `b` of `(1 + |t|)^b` for weighted-sup and lp.
    #[arg(long, default_value_t = 0.0)]
    pub nu_b: f64,
    /// Window of metrics; outer window of Stepanov and Weyl gauges.
    #[arg(long, default_value = "0:10")]
    pub window: Span,
    /// Sample points per unit length [default: 16 for metrics, 64 for seminorms].
    #[arg(long)]
    pub density: Option<f64>,
    /// Besicovitch growth exponent [default: 1/p].
    #[arg(long = "metric-a")]
    pub metric_a: Option<f64>,
    /// First point of the Besicovitch T grid or Weyl l grid.
    #[arg(long, default_value_t = DEFAULT_T0)]
    pub t0: f64,
    #[arg(long, default_value_t = DEFAULT_RATIO)]
    pub ratio: f64,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub points: usize,
}

impl GaugeArgs {
    pub fn gauge(&self) -> Result<Gauge> {
        let p = self.metric_p;
        let window = self.window.window()?;
        let nu = if self.nu_b == 0.0 { WeightFunction::one() } else { WeightFunction::PowerRadial { b: self.nu_b } };
        let metric = |family: MetricFamily| -> Result<Gauge> {
            Ok(Gauge::Metric { spec: PseudometricSpec::new(family, window.clone(), self.density.unwrap_or(16.0))? })
        };
        let with_density = |s: SeminormSpec| match self.density {
            Some(d) => s.with_grid_density(d),
            None => Ok(s),
        };
        match self.metric {
            GaugeName::Sup => metric(MetricFamily::sup()),
            GaugeName::WeightedSup => metric(MetricFamily::WeightedSup { nu }),
            GaugeName::Lp => metric(MetricFamily::WeightedLp { nu, p }),
            GaugeName::Bvp => metric(MetricFamily::BvpComposite { p }),
            GaugeName::BvpSlow => metric(MetricFamily::BvpSlow { p }),
            GaugeName::Arctan => metric(MetricFamily::ArctanSup),
            GaugeName::Exhaustion => metric(MetricFamily::CompactExhaustion),
            GaugeName::Discrete => metric(MetricFamily::DiscreteUnit),
            GaugeName::Stepanov => Ok(Gauge::Stepanov { spec: with_density(SeminormSpec::stepanov(p)?)?, outer: window }),
            GaugeName::Weyl => Ok(Gauge::Weyl {
                spec: with_density(SeminormSpec::weyl(p)?)?,
                outer: window,
                l_grid: geometric_grid(self.t0, self.ratio, self.points)?,
            }),
            GaugeName::Besicovitch => Ok(Gauge::Besicovitch {
                spec: with_density(SeminormSpec::besicovitch(p, self.metric_a.unwrap_or(1.0 / p))?)?,
                t_grid: geometric_grid(self.t0, self.ratio, self.points)?,
            }),
        }
    }
}

/// Where results go: a CSV curve and a JSON summary (stdout when absent).
#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputArgs {
    /// CSV file for the curve or table.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SeminormName {
    Stepanov,
    Weyl,
    Besicovitch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HeatMethodName {
    Analytic,
    Quadrature,
}

#[derive(Subcommand, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Stepanov value, Weyl curve or Besicovitch curve of `fn - against`.
    Seminorm {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        against: Option<String>,
        #[arg(long, value_enum)]
        family: SeminormName,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Besicovitch growth exponent [default: 1/p].
        #[arg(long)]
        a: Option<f64>,
        /// Cell `Omega` of Stepanov and Weyl seminorms.
        #[arg(long, default_value = "0:1")]
        cell: Span,
        /// Outer window of Stepanov and Weyl seminorms.
        #[arg(long, default_value = "0:100")]
        window: Span,
        /// Comparator: identity, abs, sign, arctan or power:ALPHA.
        #[arg(long, default_value = "identity")]
        phi: String,
        /// Quadrature nodes per unit length [default: 64 Stepanov/Weyl, 16 Besicovitch].
        #[arg(long)]
        grid_density: Option<f64>,
        /// Anchors per unit length of outer suprema.
        #[arg(long, default_value_t = 16.0)]
        anchor_density: f64,
        /// First point of the T grid (Besicovitch) or l grid (Weyl).
        #[arg(long, default_value_t = DEFAULT_T0)]
        t0: f64,
        #[arg(long, default_value_t = DEFAULT_RATIO)]
        ratio: f64,
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        points: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Distance between two descriptors.
    Distance {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value = "zero")]
        against: String,
        #[command(flatten)]
        gauge: GaugeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Epsilon-period scan of `gauge(f(. + tau), c f)`.
    Periods {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        c: Complex,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        range: Span,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[command(flatten)]
        gauge: GaugeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Residuals `gauge(f(. + m omega), c^m f)` over `m`.
    Semicheck {
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        c: Complex,
        #[arg(long, allow_hyphen_values = true)]
        omega: f64,
        /// Integer range `m1:m2`.
        #[arg(long = "m-range", default_value = "1:5", allow_hyphen_values = true)]
        m_range: String,
        /// Semi-periodicity type 1 (m >= 1) or 2 (m in Z).
        #[arg(long = "type", default_value_t = 1)]
        semi_type: u8,
        #[command(flatten)]
        gauge: GaugeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pairwise distances of translates and a greedy Cauchy subsequence.
    Normality {
        #[arg(long = "fn")]
        function: String,
        /// Translation points `a:b:step`.
        #[arg(long, allow_hyphen_values = true)]
        translates: Points,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        gauge: GaugeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Partial-sum approximation curve and optional Bohr coefficient.
    Approx {
        #[arg(long = "fn")]
        function: String,
        /// Truncation levels.
        #[arg(long, default_value = "1,2,4,8,16", value_delimiter = ',')]
        ns: Vec<usize>,
        /// Frequency of a Bohr coefficient to report.
        #[arg(long, allow_hyphen_values = true)]
        bohr: Option<f64>,
        /// Half-length of the Bohr mean.
        #[arg(long = "mean-t", default_value_t = DEFAULT_T)]
        mean_t: f64,
        #[command(flatten)]
        gauge: GaugeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One-sided convolution `int_0^inf R(s) f(t - s) ds` sampled on points.
    Convolve {
        #[arg(long = "fn")]
        function: String,
        /// `exp:MU` or `power:M:BETA:GAMMA`.
        #[arg(long)]
        kernel: String,
        #[arg(long, default_value = "0:10:1", allow_hyphen_values = true)]
        points: Points,
        /// Skip the closed form for trigonometric inputs.
        #[arg(long)]
        quadrature: bool,
        #[arg(long, default_value_t = ConvOptions::default().tail_tol)]
        tail_tol: f64,
        #[arg(long, default_value_t = ConvOptions::default().rel_tol)]
        rel_tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Heat semigroup applied to `fn`, sampled on points.
    Heat {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        t0: f64,
        #[arg(long, value_enum, default_value = "quadrature")]
        method: HeatMethodName,
        #[arg(long, default_value = "0:10:1", allow_hyphen_values = true)]
        points: Points,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Runs the expected-property list of a corpus entry.
    Verify {
        name: String,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Checks the pseudometric and space axioms on sample functions.
    Axioms {
        /// Sample descriptors, comma separated.
        #[arg(long = "fns", default_value = "sin,cos,const:1", value_delimiter = ',')]
        functions: Vec<String>,
        #[command(flatten)]
        gauge: GaugeArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Parser, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[command(name = "metap", version, about = "Almost-periodicity analyses on function descriptors")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Write the canonical configuration JSON to this file.
    #[arg(long, global = true)]
    pub config_out: Option<PathBuf>,
}

impl RunConfig {
    pub fn canonical(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_canonical(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| MetapError::Malformed(e.to_string()))
    }
}

/// Resolves `corpus:NAME[:N]`, `partial:N`, `zero`, `sin`, `cos`, `exp:W`,
/// `const:C` or a path to a descriptor JSON file. `partial:N` refers to the
/// corpus entry of `base`.
pub fn resolve_function(spec: &str, base: Option<&str>) -> Result<FunctionDescriptor> {
    let number = |s: &str| s.parse::<f64>().map_err(|_| invalid(format!("bad number `{s}` in `{spec}`")));
    let count = |s: &str| s.parse::<usize>().map_err(|_| invalid(format!("bad count `{s}` in `{spec}`")));
    if let Some(rest) = spec.strip_prefix("corpus:") {
        return Ok(match rest.split_once(':') {
            Some((name, n)) => corpus_get(name, Some(count(n)?))?.descriptor,
            None => corpus_get(rest, None)?.descriptor,
        });
    }
    if let Some(n) = spec.strip_prefix("partial:") {
        let base = base
            .and_then(|b| b.strip_prefix("corpus:"))
            .ok_or_else(|| invalid("`partial:N` needs a `corpus:` function"))?;
        let name = base.split(':').next().unwrap_or(base);
        return corpus_get(name, None)?.partial(count(n)?);
    }
    match spec {
        "zero" => return Ok(FunctionDescriptor::zero()),
        "sin" => return Ok(FunctionDescriptor::sin()),
        "cos" => return Ok(FunctionDescriptor::cos()),
        _ => {}
    }
    if let Some(w) = spec.strip_prefix("exp:") {
        return Ok(FunctionDescriptor::exp_i(number(w)?));
    }
    if let Some(c) = spec.strip_prefix("const:") {
        return Ok(FunctionDescriptor::constant(C64::new(number(c)?, 0.0)));
    }
    let path = spec.strip_prefix("json:").unwrap_or(spec);
    let text = std::fs::read_to_string(path)
        .map_err(|e| MetapError::Malformed(format!("cannot read descriptor `{path}`: {e}")))?;
    descriptor_from_json(&text)
}

fn parse_kernel(s: &str) -> Result<Kernel> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = |xs: &[&str]| -> Result<Vec<f64>> {
        xs.iter().map(|x| x.parse::<f64>().map_err(|_| invalid(format!("bad kernel parameter `{x}`")))).collect()
    };
    let k = match parts.as_slice() {
        ["exp", mu] => Kernel::ExpDecay { mu: nums(&[mu])?[0] },
        ["power", rest @ ..] if rest.len() == 3 => {
            let v = nums(rest)?;
            Kernel::PowerBound { m: v[0], beta: v[1], gamma: v[2] }
        }
        _ => return Err(invalid(format!("unknown kernel `{s}`; use exp:MU or power:M:BETA:GAMMA"))),
    };
    k.validate()?;
    Ok(k)
}

fn parse_m_range(s: &str) -> Result<(i64, i64)> {
    let (a, b) = s.split_once(':').ok_or_else(|| invalid(format!("expected `m1:m2`, got `{s}`")))?;
    let p = |x: &str| x.trim().parse::<i64>().map_err(|_| invalid(format!("bad integer `{x}`")));
    Ok((p(a)?, p(b)?))
}

/// Samples `f` on the points and tabulates real part, imaginary part and modulus.
fn sample_table(f: &FunctionDescriptor, points: &Points) -> Table {
    let ts = points.values();
    let rows = crate::par::map_slice(&ts, |&t| {
        let v = f.eval1(t);
        vec![t, v.re, v.im, v.norm()]
    });
    Table { columns: vec!["t".into(), "re".into(), "im".into(), "modulus".into()], rows }
}

/// Whether the run raised a numeric flag.
#[derive(Debug, Default)]
pub struct Outcome {
    pub numeric_flag: bool,
}

fn write_summary(output: &OutputArgs, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    write_text(output.summary.as_deref(), &text)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn write_table(output: &OutputArgs, table: &dyn CsvTable) -> Result<()> {
    if let Some(p) = &output.out {
        emit_csv(table, p)?;
    }
    Ok(())
}

fn numbers(xs: &[f64]) -> Vec<serde_json::Value> {
    xs.iter().map(|x| json_number(*x)).collect()
}

/// Non-finite values become strings so the summary stays valid JSON.
fn json_number(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format_number(x))
    }
}

pub fn dispatch(config: &RunConfig) -> Result<Outcome> {
    if let Some(p) = &config.config_out {
        std::fs::write(p, config.canonical()?)?;
    }
    match &config.command {
        Command::Seminorm {
            function,
            against,
            family,
            p,
            a,
            cell,
            window,
            phi,
            grid_density,
            anchor_density,
            t0,
            ratio,
            points,
            output,
        } => {
            let f = resolve_function(function, None)?;
            let h = match against {
                Some(g) => f.sub(&resolve_function(g, Some(function))?)?,
                None => f,
            };
            let phi = ScalarMap::parse(phi)?;
            let base = match family {
                SeminormName::Stepanov => SeminormSpec::stepanov(*p)?,
                SeminormName::Weyl => SeminormSpec::weyl(*p)?,
                SeminormName::Besicovitch => SeminormSpec::besicovitch(*p, a.unwrap_or(1.0 / p))?,
            };
            let mut spec = base.with_cell(cell.window()?)?.with_phi(phi)?.with_anchor_density(*anchor_density)?;
            if let Some(g) = grid_density {
                spec = spec.with_grid_density(*g)?;
            }
            let grid = geometric_grid(*t0, *ratio, *points)?;
            let curve = match family {
                SeminormName::Stepanov => {
                    let v = stepanov_seminorm(&h, &spec, &window.window()?)?;
                    SeminormCurve::new(vec![window.hi], vec![v])
                }
                SeminormName::Weyl => weyl_seminorm_curve(&h, &spec, &window.window()?, &grid)?,
                SeminormName::Besicovitch => besicovitch_seminorm_curve(&h, &spec, &grid)?,
            };
            write_table(output, &curve)?;
            write_summary(
                output,
                &json!({
                    "command": "seminorm",
                    "family": family,
                    "p": p,
                    "points": curve.values.len(),
                    "limit_estimate": json_number(curve.limit_estimate),
                    "estimator": curve.estimator,
                }),
            )?;
            Ok(Outcome::default())
        }
        Command::Distance { function, against, gauge, output } => {
            let f = resolve_function(function, None)?;
            let g = resolve_function(against, Some(function))?;
            let gauge = gauge.gauge()?;
            let (d, value) = match &gauge {
                Gauge::Metric { spec } => {
                    let d = distance(spec, &f, &g)?;
                    (d.value, serde_json::to_value(d)?)
                }
                other => {
                    let d = other.measure(&f, &g)?;
                    (d, json!({ "value": json_number(d) }))
                }
            };
            write_table(output, &Table { columns: vec!["distance".into()], rows: vec![vec![d]] })?;
            write_summary(output, &json!({ "command": "distance", "gauge": gauge.name(), "distance": value }))?;
            Ok(Outcome::default())
        }
        Command::Periods { function, c, eps, range, step, gauge, output } => {
            let f = resolve_function(function, None)?;
            let gauge = gauge.gauge()?;
            let report = scan_eps_periods(&f, &gauge, &Multiplier::new(c.c64())?, *eps, (range.lo, range.hi), *step, None)?;
            write_table(output, &report)?;
            let density = relative_density(&report).ok();
            write_summary(
                output,
                &json!({
                    "command": "periods",
                    "gauge": gauge.name(),
                    "c": [c.re, c.im],
                    "epsilon": eps,
                    "scan_range": [range.lo, range.hi],
                    "step": step,
                    "scanned": report.taus.len(),
                    "periods": report.periods.len(),
                    "clusters": report.clusters,
                    "max_gap": json_number(report.max_gap),
                    "relative_density": density.map(json_number),
                    "boundary_censored": report.boundary_censored,
                }),
            )?;
            Ok(Outcome::default())
        }
        Command::Semicheck { function, c, omega, m_range, semi_type, gauge, output } => {
            let f = resolve_function(function, None)?;
            let t = match semi_type {
                1 => SemiType::One,
                2 => SemiType::Two,
                other => return Err(invalid(format!("semi-periodicity type must be 1 or 2, got {other}"))),
            };
            let gauge = gauge.gauge()?;
            let r = semi_periodicity_check(&f, &Multiplier::new(c.c64())?, &[*omega], &gauge, parse_m_range(m_range)?, t)?;
            let table = Table {
                columns: vec!["m".into(), "residual".into()],
                rows: r.residuals.iter().map(|(_, m, v)| vec![*m as f64, *v]).collect(),
            };
            write_table(output, &table)?;
            write_summary(
                output,
                &json!({
                    "command": "semicheck",
                    "gauge": gauge.name(),
                    "max_residual": json_number(r.max_residual),
                    "argmax_m": r.argmax.1,
                    "semi_type": r.semi_type,
                }),
            )?;
            Ok(Outcome::default())
        }
        Command::Normality { function, translates, eps, gauge, output } => {
            let f = resolve_function(function, None)?;
            let gauge = gauge.gauge()?;
            let bs: Vec<Vec<f64>> = translates.values().into_iter().map(|b| vec![b]).collect();
            let r = normality_check(&f, &bs, &gauge, *eps)?;
            let idx = &r.indices;
            let table = Table {
                columns: vec!["i".into(), "j".into(), "distance".into()],
                rows: (0..idx.len())
                    .flat_map(|a| (0..idx.len()).map(move |b| (a, b)))
                    .map(|(a, b)| vec![idx[a] as f64, idx[b] as f64, r.matrix[a][b]])
                    .collect(),
            };
            write_table(output, &table)?;
            write_summary(
                output,
                &json!({
                    "command": "normality",
                    "gauge": gauge.name(),
                    "translates": bs.iter().map(|b| b[0]).collect::<Vec<_>>(),
                    "cauchy_indices": r.indices,
                    "cauchy_epsilon": r.cauchy_epsilon,
                }),
            )?;
            Ok(Outcome::default())
        }
        Command::Approx { function, ns, bohr, mean_t, gauge, output } => {
            let f = resolve_function(function, None)?;
            let gauge = gauge.gauge()?;
            let curve = partial_sum_curve(&f, ns, &gauge)?;
            write_table(output, &curve)?;
            let coef = match bohr {
                Some(l) => {
                    let b = bohr_coefficient(&f, &[*l], *mean_t)?;
                    Some(json!({
                        "lambda": l,
                        "t": mean_t,
                        "re": b.value[0].re,
                        "im": b.value[0].im,
                        "richardson_delta": b.richardson_delta,
                    }))
                }
                None => None,
            };
            write_summary(
                output,
                &json!({
                    "command": "approx",
                    "gauge": gauge.name(),
                    "indices": curve.indices,
                    "errors": numbers(&curve.errors),
                    "within_bounds": curve.within_bounds(1e-9),
                    "bohr": coef,
                }),
            )?;
            Ok(Outcome::default())
        }
        Command::Convolve { function, kernel, points, quadrature, tail_tol, rel_tol, output } => {
            let f = resolve_function(function, None)?;
            let k = parse_kernel(kernel)?;
            let opts = ConvOptions { tail_tol: *tail_tol, rel_tol: *rel_tol, ..ConvOptions::default() };
            let out = if *quadrature { infinite_convolution_quad(&k, &f, opts, None)? } else { infinite_convolution(&k, &f, opts)? };
            let table = sample_table(&out, points);
            write_table(output, &table)?;
            let max = table.rows.iter().map(|r| r[3]).fold(0.0, f64::max);
            write_summary(
                output,
                &json!({
                    "command": "convolve",
                    "kernel": k,
                    "mass": k.mass(),
                    "sup_bound": out.sup_bound().map(json_number),
                    "sampled_max": max,
                    "samples": table.rows.len(),
                }),
            )?;
            Ok(Outcome::default())
        }
        Command::Heat { function, t0, method, points, output } => {
            let f = resolve_function(function, None)?;
            let m = match method {
                HeatMethodName::Analytic => HeatMethod::Analytic,
                HeatMethodName::Quadrature => HeatMethod::Quadrature,
            };
            let out = heat_apply(&f, *t0, m, None)?;
            let table = sample_table(&out, points);
            write_table(output, &table)?;
            write_summary(
                output,
                &json!({ "command": "heat", "t0": t0, "method": m, "samples": table.rows.len() }),
            )?;
            Ok(Outcome::default())
        }
        Command::Verify { name, output } => {
            let report = verify(name)?;
            let table = Table {
                columns: vec!["property".into(), "measured".into(), "bound".into(), "passed".into(), "unconverged".into()],
                rows: report
                    .properties
                    .iter()
                    .enumerate()
                    .map(|(i, p)| vec![i as f64, p.measured, p.bound, if p.passed { 1.0 } else { 0.0 }, p.unconverged as f64])
                    .collect(),
            };
            write_table(output, &table)?;
            write_text(output.summary.as_deref(), &report_json(&report)?)?;
            Ok(Outcome { numeric_flag: !report.passed || report.unconverged() > 0 })
        }
        Command::Axioms { functions, gauge, output } => {
            let gauge = gauge.gauge()?;
            let Gauge::Metric { spec } = &gauge else {
                return Err(invalid("axiom checks need a metric gauge"));
            };
            let samples = functions.iter().map(|s| resolve_function(s, None)).collect::<Result<Vec<_>>>()?;
            let report = check_space_axioms(spec, &samples)?;
            write_summary(output, &serde_json::to_value(&report)?)?;
            Ok(Outcome { numeric_flag: !report.all_passed() })
        }
    }
}

/// Maps errors to the documented exit codes.
pub fn exit_code(err: &MetapError) -> i32 {
    match err {
        MetapError::Io(_) => EXIT_IO,
        MetapError::Csv(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => EXIT_IO,
        MetapError::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_VALIDATION,
    }
}

/// Parses `args`, dispatches and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&config) {
        Ok(o) if o.numeric_flag => EXIT_NUMERIC,
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::try_parse_from(std::iter::once("metap").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn canonical_form_round_trips() {
        let cases: &[&[&str]] = &[
            &["seminorm", "--family", "besicovitch", "--p", "1", "--a", "1", "--fn", "corpus:semi-anti", "--against", "partial:4"],
            &["periods", "--fn", "corpus:semi-anti", "--c=-1", "--eps", "0.05", "--range", "0:4000", "--metric", "sup"],
            &["verify", "semi-anti"],
            &["convolve", "--fn", "exp:3", "--kernel", "exp:1", "--points", "-5:5:0.5"],
            &["axioms", "--metric", "bvp", "--metric-p", "2", "--fns", "sin,cos"],
        ];
        for args in cases {
            let c = parse(args);
            let text = c.canonical().unwrap();
            let back = RunConfig::from_canonical(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.canonical().unwrap(), text);
        }
    }

    #[test]
    fn negative_multiplier_parses() {
        let c = parse(&["periods", "--fn", "sin", "--c=-1", "--eps", "0.1", "--range", "0:10"]);
        let Command::Periods { c, .. } = c.command else { panic!() };
        assert_eq!(c, Complex { re: -1.0, im: 0.0 });
    }

    #[test]
    fn function_specs_resolve() {
        assert!(resolve_function("corpus:haraux:12", None).unwrap().series_info().is_some());
        let p = resolve_function("partial:3", Some("corpus:semi-anti")).unwrap();
        assert_eq!(p.series_info().unwrap().1, 3);
        assert!(resolve_function("partial:3", Some("sin")).is_err());
        assert!(matches!(resolve_function("corpus:nope", None), Err(MetapError::UnknownCorpus(_))));
        assert!(matches!(resolve_function("/no/such/file.json", None), Err(MetapError::Malformed(_))));
        assert_eq!(resolve_function("const:2", None).unwrap().eval1(5.0), C64::new(2.0, 0.0));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["metap", "frobnicate"]), EXIT_VALIDATION);
        assert_eq!(run(["metap", "distance", "--fn", "corpus:nope"]), EXIT_VALIDATION);
        assert_eq!(exit_code(&MetapError::Numeric("x".into())), EXIT_NUMERIC);
        assert_eq!(exit_code(&MetapError::Io(std::io::Error::other("x"))), EXIT_IO);
    }

    #[test]
    fn spans_and_points() {
        assert_eq!("0:4000".parse::<Span>().unwrap(), Span { lo: 0.0, hi: 4000.0 });
        assert!("3:1".parse::<Span>().is_err());
        assert_eq!("0:1:0.25".parse::<Points>().unwrap().values(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!("0:1:0".parse::<Points>().is_err());
    }
}
