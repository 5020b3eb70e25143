//! Experiment runner: flat `key = value` configs, estimator dispatch and
//! CSV/JSON output.
//!
//! ```text
//! # comments start with '#'
//! system = binary-shift-odometer
//! estimator = corr-entropy
//! t = 2, 3
//! ks = 1..12
//! q = 2
//! samples = 2048
//! seed = 7
//! ```

use std::f64::consts::LN_2;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{build_power_system, CircleDoubleRotate, GeneratorSystem, TorusAffine};
use crate::error::{Error, Result};
use crate::estimators::{
    corr_entropy_series, correlation_sum, doubling_ratio, local_corr_entropy_series, local_entropy_series,
    top_entropy_series, BallMeasure, EmpiricalMeasure, EntropySeries, LocalCorrSampling, OmegaSampling,
    SeriesRow, OMEGA_DOMAIN, POINT_DOMAIN,
};
use crate::exact_binary::{
    bowen_cylinder_len, exact_corr_integral_series, exact_power_series, exact_top_entropy_series,
    resolution_length, BinaryShiftOdometer, ExactBinaryMeasure,
};
use crate::limits::{epsilon_trend, k_limit, LimitMethod, TrendFlag};
use crate::symbolic::{power_weights, sample_word, BernoulliSpec, Streams, SymbolWord};

/// Built-in systems, as named in configs.
pub const SYSTEMS: [(&str, &str); 3] = [
    (
        "binary-shift-odometer",
        "shift and odometer on {0,1}^N, fair-coin measure; supports exact mode",
    ),
    (
        "circle-double-rotate",
        "x -> 2x and x -> x + alpha on the circle, Lebesgue measure",
    ),
    ("torus-affine", "x -> 2x + c_i on the circle, Haar measure"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    CorrSum,
    CorrEntropy,
    LocalCorrEntropy,
    TopEntropy,
    LocalEntropy,
    Doubling,
    ExactSeries,
    PowerTest,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::CorrSum => "corr-sum",
            EstimatorKind::CorrEntropy => "corr-entropy",
            EstimatorKind::LocalCorrEntropy => "local-corr-entropy",
            EstimatorKind::TopEntropy => "top-entropy",
            EstimatorKind::LocalEntropy => "local-entropy",
            EstimatorKind::Doubling => "doubling",
            EstimatorKind::ExactSeries => "exact-series",
            EstimatorKind::PowerTest => "power-test",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "corr-sum" => EstimatorKind::CorrSum,
            "corr-entropy" => EstimatorKind::CorrEntropy,
            "local-corr-entropy" => EstimatorKind::LocalCorrEntropy,
            "top-entropy" => EstimatorKind::TopEntropy,
            "local-entropy" => EstimatorKind::LocalEntropy,
            "doubling" => EstimatorKind::Doubling,
            "exact-series" => EstimatorKind::ExactSeries,
            "power-test" => EstimatorKind::PowerTest,
            other => return Err(Error::EstimatorUnknown(other.to_string())),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::config("format", format!("expected csv or json, got `{}`", other))),
        }
    }
}

/// A validated experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub system: String,
    pub estimator: EstimatorKind,
    pub q: Option<f64>,
    pub epsilons: Vec<f64>,
    pub ks: Vec<usize>,
    /// Orbit length for correlation sums.
    pub n: usize,
    pub m_upsilon: usize,
    pub m_omega: usize,
    /// Sample size of empirical measures and separated-set searches.
    pub samples: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub exact: bool,
    pub alpha: Option<f64>,
    pub offsets: Option<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
    /// Sample depth of binary points; derived from the run when absent.
    pub depth: Option<usize>,
    /// Fixed driving word; sampled from the seed when absent.
    pub omega: Option<Vec<u32>>,
    pub power: u32,
    pub window: Option<(usize, usize)>,
    pub method: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: "binary-shift-odometer".into(),
            estimator: EstimatorKind::ExactSeries,
            q: None,
            epsilons: vec![0.25],
            ks: (1..=8).collect(),
            n: 1000,
            m_upsilon: 16,
            m_omega: 64,
            samples: 1024,
            seed: 42,
            output: None,
            format: OutputFormat::Csv,
            exact: false,
            alpha: None,
            offsets: None,
            weights: None,
            depth: None,
            omega: None,
            power: 2,
            window: None,
            method: None,
        }
    }
}

fn parse_num<T: FromStr>(field: &str, text: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{}`", text.trim())))
}

fn parse_list<T: FromStr>(field: &str, text: &str) -> Result<Vec<T>> {
    text.split(',').map(|item| parse_num(field, item)).collect()
}

/// `1..8`, `1,2,4` or a mix such as `1..4, 8, 16`; ranges are inclusive.
fn parse_ks(text: &str) -> Result<Vec<usize>> {
    let mut ks = Vec::new();
    for item in text.split(',') {
        match item.split_once("..") {
            Some((lo, hi)) => {
                let lo: usize = parse_num("ks", lo)?;
                let hi: usize = parse_num("ks", hi)?;
                ks.extend(lo..=hi);
            }
            None => ks.push(parse_num("ks", item)?),
        }
    }
    Ok(ks)
}

fn parse_bool(field: &str, text: &str) -> Result<bool> {
    match text {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::config(field, format!("expected true or false, got `{}`", other))),
    }
}

impl ExperimentConfig {
    /// Parses and validates a flat `key = value` config.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = std::collections::HashSet::new();
        let mut estimator = None;
        let mut t_list: Option<Vec<u32>> = None;
        let mut epsilons = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::config(key, "given more than once"));
            }
            match key {
                "system" => cfg.system = value.to_string(),
                "estimator" => estimator = Some(value.parse::<EstimatorKind>()?),
                "q" => cfg.q = Some(parse_num(key, value)?),
                "epsilons" | "epsilon" => epsilons = Some(parse_list::<f64>("epsilons", value)?),
                "t" => t_list = Some(parse_list::<u32>(key, value)?),
                "ks" | "k" => cfg.ks = parse_ks(value)?,
                "n" => cfg.n = parse_num(key, value)?,
                "m_upsilon" => cfg.m_upsilon = parse_num(key, value)?,
                "m_omega" => cfg.m_omega = parse_num(key, value)?,
                "samples" => cfg.samples = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                "format" => cfg.format = value.parse()?,
                "exact" => cfg.exact = parse_bool(key, value)?,
                "alpha" => cfg.alpha = Some(parse_num(key, value)?),
                "offsets" => cfg.offsets = Some(parse_list(key, value)?),
                "weights" => cfg.weights = Some(parse_list(key, value)?),
                "depth" => cfg.depth = Some(parse_num(key, value)?),
                "omega" => cfg.omega = Some(parse_list(key, value)?),
                "power" => cfg.power = parse_num(key, value)?,
                "window" => {
                    let (lo, hi) = value
                        .split_once("..")
                        .ok_or_else(|| Error::config(key, "expected `k_min..k_max`"))?;
                    cfg.window = Some((parse_num(key, lo)?, parse_num(key, hi)?));
                }
                "method" => cfg.method = Some(value.to_string()),
                other => return Err(Error::config(other, "unknown key")),
            }
        }
        cfg.estimator = estimator.ok_or_else(|| Error::config("estimator", "missing"))?;
        match (t_list, epsilons) {
            (Some(_), Some(_)) => return Err(Error::config("t", "give either t or epsilons, not both")),
            (Some(ts), None) => {
                if ts.contains(&0) {
                    return Err(Error::config("t", "radius exponents must be at least 1"));
                }
                cfg.epsilons = ts.iter().map(|&t| 0.5f64.powi(t as i32)).collect();
            }
            (None, Some(eps)) => cfg.epsilons = eps,
            (None, None) => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ExperimentConfig::parse(&fs::read_to_string(path)?)
    }

    /// Checks the invariants every run relies on.
    pub fn validate(&self) -> Result<()> {
        if !SYSTEMS.iter().any(|(name, _)| *name == self.system) {
            return Err(Error::SystemUnknown(self.system.clone()));
        }
        for (field, value) in [
            ("n", self.n),
            ("m_upsilon", self.m_upsilon),
            ("m_omega", self.m_omega),
            ("samples", self.samples),
            ("power", self.power as usize),
        ] {
            if value == 0 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        if self.epsilons.is_empty() {
            return Err(Error::config("epsilons", "must not be empty"));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::config("epsilons", "must be positive and finite"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("epsilons", "must be strictly decreasing"));
        }
        if self.ks.is_empty() || self.ks[0] == 0 {
            return Err(Error::config("ks", "must be non-empty and at least 1"));
        }
        if self.ks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("ks", "must be strictly increasing"));
        }
        if let Some(q) = self.q {
            if !q.is_finite() {
                return Err(Error::config("q", "must be finite"));
            }
        }
        if let Some(method) = &self.method {
            method
                .parse::<LimitMethod>()
                .map_err(|_| Error::config("method", format!("unknown limit method `{}`", method)))?;
        }
        if let Some(depth) = self.depth {
            if depth == 0 {
                return Err(Error::config("depth", "must be at least 1"));
            }
        }
        if let Some((lo, hi)) = self.window {
            if lo > hi {
                return Err(Error::config("window", "k_min exceeds k_max"));
            }
        }
        if self.system != "binary-shift-odometer" && (self.exact || self.estimator == EstimatorKind::ExactSeries) {
            return Err(Error::config("exact", "closed forms exist only for binary-shift-odometer"));
        }
        self.spec()?;
        Ok(())
    }

    fn generators(&self) -> u32 {
        match self.system.as_str() {
            "torus-affine" => self.offsets.as_ref().map_or(2, |o| o.len() as u32),
            _ => 2,
        }
    }

    fn spec(&self) -> Result<BernoulliSpec> {
        let spec = match &self.weights {
            Some(w) => BernoulliSpec::new(w.clone()).map_err(|e| Error::config("weights", e.to_string()))?,
            None => BernoulliSpec::uniform(self.generators()).map_err(|e| Error::config("system", e.to_string()))?,
        };
        if spec.alphabet() != self.generators() {
            return Err(Error::config(
                "weights",
                format!("{} weights for {} generators", spec.alphabet(), self.generators()),
            ));
        }
        Ok(spec)
    }

    fn k_max(&self) -> usize {
        *self.ks.last().unwrap()
    }

    fn limit_method(&self) -> LimitMethod {
        match &self.method {
            Some(m) => m.parse().unwrap_or(LimitMethod::TailMean),
            None if self.exact || self.estimator == EstimatorKind::ExactSeries => LimitMethod::SlopeFit,
            None => LimitMethod::TailMean,
        }
    }
}

/// One emitted number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub estimator: String,
    pub epsilon: f64,
    pub k: usize,
    pub q: Option<f64>,
    pub value: f64,
    pub stderr: f64,
    pub seed: u64,
    pub flags: Vec<String>,
}

/// A scalar derived from a series: a limit in `k`, a headline over `eps`,
/// or a ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub label: String,
    pub epsilon: Option<f64>,
    pub method: String,
    pub window: Option<(usize, usize)>,
    pub value: f64,
    pub stderr: f64,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryEntry>,
}

enum System {
    Binary(BinaryShiftOdometer),
    Circle(CircleDoubleRotate),
    Torus(TorusAffine),
}

impl ExperimentConfig {
    /// Deepest coordinate any run touches, with a 64-coordinate margin.
    fn binary_depth(&self) -> Result<usize> {
        if let Some(depth) = self.depth {
            return Ok(depth);
        }
        let eps_min = *self.epsilons.last().unwrap();
        let mut steps = self.k_max() * self.power as usize;
        if matches!(self.estimator, EstimatorKind::CorrSum | EstimatorKind::LocalCorrEntropy) {
            steps += self.n;
        }
        Ok(resolution_length(eps_min)? + steps + 64)
    }

    fn system(&self) -> Result<System> {
        Ok(match self.system.as_str() {
            "binary-shift-odometer" => System::Binary(BinaryShiftOdometer::new(self.binary_depth()?)?),
            "circle-double-rotate" => System::Circle(match self.alpha {
                Some(a) => CircleDoubleRotate::new(a).map_err(|e| Error::config("alpha", e.to_string()))?,
                None => CircleDoubleRotate::default(),
            }),
            "torus-affine" => System::Torus(match &self.offsets {
                Some(o) => TorusAffine::new(o.clone()).map_err(|e| Error::config("offsets", e.to_string()))?,
                None => TorusAffine::default(),
            }),
            other => return Err(Error::SystemUnknown(other.to_string())),
        })
    }

    fn driving_word(&self, p: &BernoulliSpec, streams: Streams) -> Result<SymbolWord> {
        let needed = self.k_max() - 1;
        match &self.omega {
            Some(symbols) => {
                let word = SymbolWord::new(symbols.clone(), p.alphabet())
                    .map_err(|e| Error::config("omega", e.to_string()))?;
                if word.len() < needed {
                    return Err(Error::config("omega", format!("needs at least {} symbols", needed)));
                }
                Ok(word)
            }
            None => Ok(sample_word(p, needed, &mut streams.derive(OMEGA_DOMAIN).stream(u64::MAX))),
        }
    }
}

fn series_rows(series: &EntropySeries, label: &str, seed: u64, extra: &[&str]) -> Vec<ResultRow> {
    series
        .rows
        .iter()
        .map(|r| {
            let mut flags: Vec<String> = extra.iter().map(|s| s.to_string()).collect();
            if !r.stable {
                flags.push("unstable".into());
            }
            ResultRow {
                estimator: label.to_string(),
                epsilon: series.epsilon,
                k: r.k,
                q: series.q,
                value: r.value,
                stderr: r.stderr,
                seed,
                flags,
            }
        })
        .collect()
}

/// Series produced by a run, with their row labels.
struct Labelled {
    label: String,
    series: Vec<EntropySeries>,
    summarize: bool,
}

fn run_generic<S>(cfg: &ExperimentConfig, sys: &S, p: &BernoulliSpec, streams: Streams) -> Result<Vec<Labelled>>
where
    S: GeneratorSystem,
{
    let measure = || EmpiricalMeasure::sample(sys, cfg.samples, streams.derive(POINT_DOMAIN));
    let start = || sys.sample_point(&mut streams.derive(POINT_DOMAIN).stream(u64::MAX));
    let sampling = OmegaSampling::new(cfg.m_omega);
    let label = cfg.estimator.as_str().to_string();
    let series = match cfg.estimator {
        EstimatorKind::CorrSum => {
            let x = start();
            let omega = cfg.driving_word(p, streams)?;
            let mut out = Vec::new();
            for &eps in &cfg.epsilons {
                let mut rows = Vec::new();
                for &k in &cfg.ks {
                    let c = correlation_sum(sys, &x, eps, &omega, k, cfg.n, cfg.m_upsilon, p, streams)?;
                    rows.push(SeriesRow {
                        k,
                        value: c.value,
                        stderr: c.stderr,
                        stable: c.stable,
                    });
                }
                out.push(EntropySeries {
                    kind: label.clone(),
                    epsilon: eps,
                    q: None,
                    rows,
                });
            }
            return Ok(vec![Labelled {
                label,
                series: out,
                summarize: false,
            }]);
        }
        EstimatorKind::CorrEntropy => corr_entropy_series(
            &measure()?,
            sys,
            &cfg.epsilons,
            &cfg.ks,
            cfg.q.unwrap_or(2.0),
            sampling,
            p,
            streams,
        )?,
        EstimatorKind::LocalCorrEntropy => local_corr_entropy_series(
            sys,
            &start(),
            &cfg.epsilons,
            &cfg.ks,
            LocalCorrSampling {
                n: cfg.n,
                upsilon_samples: cfg.m_upsilon,
                omega: sampling,
            },
            p,
            streams,
        )?,
        EstimatorKind::TopEntropy => top_entropy_series(sys, &cfg.epsilons, &cfg.ks, sampling, cfg.samples, p, streams)?,
        EstimatorKind::LocalEntropy => {
            let em = measure()?;
            let omega = cfg.driving_word(p, streams)?;
            local_entropy_series(&em, sys, &omega, &em.points()[0].clone(), &cfg.epsilons, &cfg.ks)?
        }
        EstimatorKind::Doubling => doubling_series(&measure()?, sys, cfg, p, streams)?,
        EstimatorKind::ExactSeries => {
            return Err(Error::config("estimator", "exact-series needs binary-shift-odometer"));
        }
        EstimatorKind::PowerTest => {
            let power = build_power_system(sys, cfg.power)?;
            let p_power = power_weights(p, cfg.power)?;
            let q = cfg.q.unwrap_or(2.0);
            let base = corr_entropy_series(&measure()?, sys, &cfg.epsilons, &cfg.ks, q, sampling, p, streams)?;
            let em_power = EmpiricalMeasure::sample(&power, cfg.samples, streams.derive(POINT_DOMAIN))?;
            let lifted = corr_entropy_series(&em_power, &power, &cfg.epsilons, &cfg.ks, q, sampling, &p_power, streams)?;
            return Ok(power_pair(cfg, base, lifted));
        }
    };
    Ok(vec![Labelled {
        label,
        series,
        summarize: true,
    }])
}

fn power_pair(cfg: &ExperimentConfig, base: Vec<EntropySeries>, lifted: Vec<EntropySeries>) -> Vec<Labelled> {
    vec![
        Labelled {
            label: "power-test/base".into(),
            series: base,
            summarize: true,
        },
        Labelled {
            label: format!("power-test/power{}", cfg.power),
            series: lifted,
            summarize: true,
        },
    ]
}

fn doubling_series<S, B>(
    measure: &B,
    sys: &S,
    cfg: &ExperimentConfig,
    p: &BernoulliSpec,
    streams: Streams,
) -> Result<Vec<EntropySeries>>
where
    S: GeneratorSystem,
    B: BallMeasure<S>,
{
    let omega = cfg.driving_word(p, streams)?;
    cfg.epsilons
        .iter()
        .map(|&eps| {
            let rows = cfg
                .ks
                .iter()
                .map(|&k| Ok(SeriesRow::exact(k, doubling_ratio(measure, sys, &omega, k, eps)?.log_term)))
                .collect::<Result<Vec<_>>>()?;
            Ok(EntropySeries {
                kind: "doubling".into(),
                epsilon: eps,
                q: None,
                rows,
            })
        })
        .collect()
}

fn run_binary_exact(
    cfg: &ExperimentConfig,
    sys: &BinaryShiftOdometer,
    p: &BernoulliSpec,
    streams: Streams,
) -> Result<Vec<Labelled>> {
    let k_max = cfg.k_max();
    let dyadic = |eps: f64| -> Result<u32> {
        let t = resolution_length(eps)?;
        if t == 0 {
            return Err(Error::config("epsilons", "exact series need epsilon below 1"));
        }
        Ok(t as u32)
    };
    let pick = |series: EntropySeries, eps: f64| EntropySeries {
        epsilon: eps,
        rows: series.rows.into_iter().filter(|r| cfg.ks.contains(&r.k)).collect(),
        ..series
    };
    let fair = p.weights().iter().all(|&w| w == 0.5);
    let centers = || ExactBinaryMeasure::sampled(sys, cfg.samples.min(64), streams.derive(POINT_DOMAIN));
    let label = cfg.estimator.as_str().to_string();
    let series: Vec<EntropySeries> = match cfg.estimator {
        EstimatorKind::ExactSeries | EstimatorKind::TopEntropy if fair => cfg
            .epsilons
            .iter()
            .map(|&eps| Ok(pick(exact_top_entropy_series(dyadic(eps)?, k_max)?, eps)))
            .collect::<Result<_>>()?,
        EstimatorKind::CorrEntropy if fair => cfg
            .epsilons
            .iter()
            .map(|&eps| Ok(pick(exact_corr_integral_series(dyadic(eps)?, k_max, cfg.q.unwrap_or(2.0))?, eps)))
            .collect::<Result<_>>()?,
        EstimatorKind::CorrEntropy | EstimatorKind::LocalCorrEntropy => corr_entropy_series(
            &centers()?,
            sys,
            &cfg.epsilons,
            &cfg.ks,
            cfg.q.unwrap_or(2.0),
            OmegaSampling::new(cfg.m_omega),
            p,
            streams,
        )?,
        EstimatorKind::CorrSum => {
            let omega = cfg.driving_word(p, streams)?;
            cfg.epsilons
                .iter()
                .map(|&eps| {
                    let rows = cfg
                        .ks
                        .iter()
                        .map(|&k| {
                            let len = bowen_cylinder_len(&omega, k, eps)?;
                            Ok(SeriesRow::exact(k, 0.5f64.powi(len as i32)))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(EntropySeries {
                        kind: label.clone(),
                        epsilon: eps,
                        q: None,
                        rows,
                    })
                })
                .collect::<Result<_>>()?
        }
        EstimatorKind::LocalEntropy => {
            let measure = centers()?;
            let omega = cfg.driving_word(p, streams)?;
            let x = BallMeasure::<BinaryShiftOdometer>::centers(&measure)[0].clone();
            local_entropy_series(&measure, sys, &omega, &x, &cfg.epsilons, &cfg.ks)?
        }
        EstimatorKind::Doubling => doubling_series(&centers()?, sys, cfg, p, streams)?,
        EstimatorKind::PowerTest if fair => {
            let base = cfg
                .epsilons
                .iter()
                .map(|&eps| Ok(pick(exact_power_series(dyadic(eps)?, 1, k_max)?, eps)))
                .collect::<Result<_>>()?;
            let lifted = cfg
                .epsilons
                .iter()
                .map(|&eps| Ok(pick(exact_power_series(dyadic(eps)?, cfg.power, k_max)?, eps)))
                .collect::<Result<_>>()?;
            return Ok(power_pair(cfg, base, lifted));
        }
        EstimatorKind::PowerTest => {
            let power = build_power_system(sys, cfg.power)?;
            let p_power = power_weights(p, cfg.power)?;
            let q = cfg.q.unwrap_or(2.0);
            let sampling = OmegaSampling::new(cfg.m_omega);
            let measure = centers()?;
            let base = corr_entropy_series(&measure, sys, &cfg.epsilons, &cfg.ks, q, sampling, p, streams)?;
            let lifted = corr_entropy_series(&measure, &power, &cfg.epsilons, &cfg.ks, q, sampling, &p_power, streams)?;
            return Ok(power_pair(cfg, base, lifted));
        }
        _ => {
            return Err(Error::config(
                "weights",
                format!("closed-form {} requires fair-coin weights", cfg.estimator),
            ))
        }
    };
    let summarize = cfg.estimator != EstimatorKind::CorrSum;
    Ok(vec![Labelled {
        label,
        series,
        summarize,
    }])
}

/// Runs an experiment. Output depends only on the config, including its seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let p = cfg.spec()?;
    let streams = Streams::new(cfg.seed);
    let exact = cfg.exact || cfg.estimator == EstimatorKind::ExactSeries;
    let labelled = match cfg.system()? {
        System::Binary(sys) if exact => run_binary_exact(cfg, &sys, &p, streams)?,
        System::Binary(sys) => run_generic(cfg, &sys, &p, streams)?,
        System::Circle(sys) => run_generic(cfg, &sys, &p, streams)?,
        System::Torus(sys) => run_generic(cfg, &sys, &p, streams)?,
    };

    let method = cfg.limit_method();
    let extra: Vec<&str> = if exact { vec!["exact"] } else { vec![] };
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    let mut headlines = Vec::new();
    for group in &labelled {
        let mut limits = Vec::new();
        for series in &group.series {
            rows.extend(series_rows(series, &group.label, cfg.seed, &extra));
            if !group.summarize {
                continue;
            }
            match k_limit(series, cfg.window, method) {
                Ok(est) => {
                    summary.push(SummaryEntry {
                        label: group.label.clone(),
                        epsilon: Some(series.epsilon),
                        method: method.to_string(),
                        window: Some(est.window),
                        value: est.value,
                        stderr: est.stderr,
                        flags: vec![],
                    });
                    limits.push((series.epsilon, est));
                }
                Err(Error::WindowTooSmall { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if !limits.is_empty() {
            let trend = epsilon_trend(&limits)?;
            let mut flags = vec![trend.flag.to_string()];
            if trend.monotone {
                flags.push("monotone".into());
            }
            summary.push(SummaryEntry {
                label: group.label.clone(),
                epsilon: Some(trend.values.last().unwrap().0),
                method: "headline".into(),
                window: None,
                value: trend.headline,
                stderr: trend.headline_stderr,
                flags,
            });
            headlines.push((trend.headline, trend.headline_stderr, trend.flag));
        }
    }
    if cfg.estimator == EstimatorKind::PowerTest && headlines.len() == 2 {
        let (base, base_se, _) = headlines[0];
        let (lifted, lifted_se, _) = headlines[1];
        let ratio = lifted / base;
        let se = ratio.abs() * ((lifted_se / lifted).powi(2) + (base_se / base).powi(2)).sqrt();
        summary.push(SummaryEntry {
            label: "power-test/ratio".into(),
            epsilon: None,
            method: "headline".into(),
            window: None,
            value: ratio,
            stderr: if se.is_finite() { se } else { 0.0 },
            flags: if headlines.iter().all(|h| h.2 == TrendFlag::Converged) {
                vec![]
            } else {
                vec![TrendFlag::NotConverged.to_string()]
            },
        });
    }
    check_finite(&rows, &summary)?;
    Ok(RunOutput { rows, summary })
}

fn check_finite(rows: &[ResultRow], summary: &[SummaryEntry]) -> Result<()> {
    let bad_row = rows
        .iter()
        .find(|r| !(r.value.is_finite() && r.stderr.is_finite()));
    if let Some(r) = bad_row {
        return Err(Error::InvalidArgument {
            name: "result",
            reason: format!("non-finite value at epsilon {} k {}", r.epsilon, r.k),
        });
    }
    if summary.iter().any(|s| !(s.value.is_finite() && s.stderr.is_finite())) {
        return Err(Error::InvalidArgument {
            name: "summary",
            reason: "non-finite limit".into(),
        });
    }
    Ok(())
}

pub const CSV_HEADER: [&str; 8] = ["estimator", "epsilon", "k", "q", "value", "stderr", "seed", "flags"];

/// Results as CSV text. Floats use the shortest representation that parses
/// back to the same value.
pub fn results_csv(rows: &[ResultRow]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::IoFailure(e.to_string());
    writer.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        writer
            .write_record([
                r.estimator.clone(),
                r.epsilon.to_string(),
                r.k.to_string(),
                r.q.map(|q| q.to_string()).unwrap_or_default(),
                r.value.to_string(),
                r.stderr.to_string(),
                r.seed.to_string(),
                r.flags.join(";"),
            ])
            .map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::IoFailure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::IoFailure(e.to_string()))
}

pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::IoFailure(e.to_string()))?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::IoFailure(format!("unexpected header {:?}", headers)));
    }
    let field = |rec: &csv::StringRecord, i: usize| rec.get(i).unwrap_or("").to_string();
    let num = |text: String| -> Result<f64> { text.parse().map_err(|_| Error::IoFailure(format!("bad number `{}`", text))) };
    reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::IoFailure(e.to_string()))?;
            let q = field(&rec, 3);
            let flags = field(&rec, 7);
            Ok(ResultRow {
                estimator: field(&rec, 0),
                epsilon: num(field(&rec, 1))?,
                k: field(&rec, 2).parse().map_err(|_| Error::IoFailure("bad k".into()))?,
                q: if q.is_empty() { None } else { Some(num(q)?) },
                value: num(field(&rec, 4))?,
                stderr: num(field(&rec, 5))?,
                seed: field(&rec, 6).parse().map_err(|_| Error::IoFailure("bad seed".into()))?,
                flags: if flags.is_empty() {
                    vec![]
                } else {
                    flags.split(';').map(str::to_string).collect()
                },
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    config: ExperimentConfig,
    rows: Vec<ResultRow>,
    summary: Vec<SummaryEntry>,
}

pub fn results_json(output: &RunOutput, cfg: &ExperimentConfig) -> Result<String> {
    let doc = JsonDocument {
        config: cfg.clone(),
        rows: output.rows.clone(),
        summary: output.summary.clone(),
    };
    serde_json::to_string_pretty(&doc)
        .map(|s| s + "\n")
        .map_err(|e| Error::IoFailure(e.to_string()))
}

/// Parses a JSON document written by [`emit_results`].
pub fn parse_results_json(text: &str) -> Result<(ExperimentConfig, RunOutput)> {
    let doc: JsonDocument = serde_json::from_str(text).map_err(|e| Error::IoFailure(e.to_string()))?;
    Ok((
        doc.config,
        RunOutput {
            rows: doc.rows,
            summary: doc.summary,
        },
    ))
}

/// Writes the rows (CSV) or rows, summary and config (JSON) to `path`.
pub fn emit_results(output: &RunOutput, cfg: &ExperimentConfig, path: &Path, format: OutputFormat) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => results_csv(&output.rows)?,
        OutputFormat::Json => results_json(output, cfg)?,
    };
    fs::write(path, text)?;
    Ok(())
}

/// Human-readable summary lines.
pub fn format_summary(summary: &[SummaryEntry]) -> String {
    let mut out = String::new();
    for s in summary {
        let eps = s.epsilon.map_or("-".to_string(), |e| e.to_string());
        let window = s.window.map_or("-".to_string(), |(a, b)| format!("{}..{}", a, b));
        out.push_str(&format!(
            "{:<28} eps={:<12} {:<10} k={:<8} value={:.9} stderr={:.3e} {}\n",
            s.label,
            eps,
            s.method,
            window,
            s.value,
            s.stderr,
            s.flags.join(";")
        ));
    }
    out
}

/// One comparison of the example reproduction.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    /// Tolerance is relative to the target when true.
    pub relative: bool,
}

impl Check {
    pub fn passed(&self) -> bool {
        let bound = if self.relative {
            self.tolerance * self.target.abs()
        } else {
            self.tolerance
        };
        (self.value - self.target).abs() <= bound
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: value {:.10} target {:.10} |diff| {:.3e} tol {}{}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.target,
            (self.value - self.target).abs(),
            self.tolerance,
            if self.relative { " (relative)" } else { "" }
        )
    }
}

/// Topological entropy of shift and odometer on `{0,1}^N`: the closed-form
/// series at `t = 2, 3` over `k = 1..64`, and a Monte Carlo run with 4096
/// sample points and sampled driving words, both slope-fitted against
/// `log 2 / 2`.
pub fn reproduce_paper_example(seed: u64) -> Result<Vec<Check>> {
    let target = LN_2 / 2.0;
    let mut checks = Vec::new();
    for t in [2u32, 3] {
        let series = exact_top_entropy_series(t, 64)?;
        let est = k_limit(&series, Some((8, 64)), LimitMethod::SlopeFit)?;
        checks.push(Check {
            name: format!("exact top entropy t={} k=8..64 slope-fit", t),
            value: est.value,
            target,
            tolerance: 1e-9,
            relative: false,
        });
    }
    let cfg = ExperimentConfig {
        estimator: EstimatorKind::TopEntropy,
        epsilons: vec![0.25],
        ks: (1..=8).collect(),
        samples: 4096,
        m_omega: 128,
        seed,
        method: Some("slope-fit".into()),
        ..ExperimentConfig::default()
    };
    let sys = BinaryShiftOdometer::new(cfg.binary_depth()?)?;
    let p = BernoulliSpec::uniform(2)?;
    let series = top_entropy_series(
        &sys,
        &cfg.epsilons,
        &cfg.ks,
        OmegaSampling::sampled(cfg.m_omega),
        cfg.samples,
        &p,
        Streams::new(seed),
    )?;
    let est = k_limit(&series[0], None, LimitMethod::SlopeFit)?;
    checks.push(Check {
        name: "monte carlo top entropy t=2 N=4096 sampled omega slope-fit".into(),
        value: est.value,
        target,
        tolerance: 0.10,
        relative: true,
    });
    Ok(checks)
}
