//! Monte Carlo estimators: correlation sums, q-order correlation integrals,
//! local correlation entropy, separated and spanning sets, doubling ratios
//! and local entropy along a word.
//!
//! Randomness is drawn from [`Streams`]: every driving word, orbit word and
//! sample point comes from its own indexed stream, so results do not depend
//! on how work is scheduled, and two calls with the same streams share
//! their random numbers.

pub mod pairs;

use rayon::prelude::*;

use crate::dynamics::{check_bowen, orbit_table, GeneratorSystem};
use crate::error::{Error, Result};
use crate::symbolic::{all_words, sample_word, BernoulliSpec, Streams, SymbolWord};
use pairs::{count_near, greedy_cover, greedy_separated, neighbour_counts, stage_table, PairRoute};

/// Stream domain for sample points.
pub const POINT_DOMAIN: u64 = 1;
/// Stream domain for the outer driving words `w`.
pub const OMEGA_DOMAIN: u64 = 2;
/// Stream domain for the orbit words `u` of correlation sums.
pub const UPSILON_DOMAIN: u64 = 3;

/// Default bound on `m^{k-1}` below which the outer average over driving
/// words is an exact enumeration.
pub const EXHAUSTIVE_LIMIT: u64 = 4096;

/// One `(k, value)` row of an entropy series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesRow {
    pub k: usize,
    pub value: f64,
    pub stderr: f64,
    /// False when the tail-stability check in `n` failed.
    pub stable: bool,
}

impl SeriesRow {
    pub fn exact(k: usize, value: f64) -> Self {
        SeriesRow {
            k,
            value,
            stderr: 0.0,
            stable: true,
        }
    }
}

/// Finite-`k` integrands of an entropy at a fixed `eps`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropySeries {
    pub kind: String,
    pub epsilon: f64,
    pub q: Option<f64>,
    pub rows: Vec<SeriesRow>,
}

impl EntropySeries {
    pub fn ks(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.k).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }
}

/// Correlation sum `C(G, x, eps, w, k, n)` averaged over sampled orbit words.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrSumEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    pub samples: usize,
    /// The same estimate over the first `n / 2` orbit points.
    pub half_value: f64,
    pub half_stderr: f64,
    /// Whether the values at `n` and `n / 2` agree within two standard errors.
    pub stable: bool,
}

/// Mean of a Monte Carlo quantity with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Sup-ratio of `2 eps` to `eps` ball masses over the centres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoublingDiagnostic {
    pub ratio: f64,
    /// `(1/k) log ratio`.
    pub log_term: f64,
}

/// How the outer average over driving words is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OmegaSampling {
    /// Words drawn when enumeration is too large.
    pub samples: usize,
    /// Enumerate all `m^{k-1}` prefixes when their number is at most this.
    pub exhaustive_limit: u64,
}

impl OmegaSampling {
    pub fn new(samples: usize) -> Self {
        OmegaSampling {
            samples,
            exhaustive_limit: EXHAUSTIVE_LIMIT,
        }
    }

    /// Always sample, never enumerate.
    pub fn sampled(samples: usize) -> Self {
        OmegaSampling {
            samples,
            exhaustive_limit: 0,
        }
    }

    /// Always enumerate.
    pub fn exhaustive() -> Self {
        OmegaSampling {
            samples: 1,
            exhaustive_limit: u64::MAX,
        }
    }
}

/// Driving-word prefixes with quadrature weights summing to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaDraw {
    pub words: Vec<SymbolWord>,
    pub weights: Vec<f64>,
    pub exhaustive: bool,
}

/// Prefixes of length `k - 1` for the outer integral over `w`.
///
/// Sampled word `i` comes from stream `i`, so the words used at a smaller
/// `k` are prefixes of those used at a larger one.
pub fn omega_words(p: &BernoulliSpec, k: usize, sampling: OmegaSampling, streams: Streams) -> Result<OmegaDraw> {
    if k == 0 {
        return Err(Error::KZero);
    }
    let len = k - 1;
    let count = u32::try_from(len)
        .ok()
        .and_then(|l| (p.alphabet() as u64).checked_pow(l));
    if let Some(count) = count.filter(|&c| c <= sampling.exhaustive_limit) {
        let words = all_words(p.alphabet(), len);
        debug_assert_eq!(words.len() as u64, count);
        let weights = words.iter().map(|w| p.word_probability(w)).collect();
        return Ok(OmegaDraw {
            words,
            weights,
            exhaustive: true,
        });
    }
    if sampling.samples == 0 {
        return Err(Error::InvalidArgument {
            name: "omega samples",
            reason: "at least one driving word is required".into(),
        });
    }
    let words = (0..sampling.samples as u64)
        .map(|i| sample_word(p, len, &mut streams.stream(i)))
        .collect();
    Ok(OmegaDraw {
        words,
        weights: vec![1.0 / sampling.samples as f64; sampling.samples],
        exhaustive: false,
    })
}

/// Weighted mean and the standard error of a weighted sample mean.
fn weighted(values: &[f64], weights: &[f64]) -> Estimate {
    let value: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
    let n = values.len();
    if n < 2 {
        return Estimate { value, stderr: 0.0 };
    }
    let spread: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * w * (v - value) * (v - value))
        .sum();
    Estimate {
        value,
        stderr: (spread * n as f64 / (n - 1) as f64).sqrt(),
    }
}

fn mean_and_stderr(values: &[f64]) -> Estimate {
    let n = values.len();
    weighted(values, &vec![1.0 / n as f64; n])
}

/// `log((1/n) sum exp(a_i))`. The maximum is subtracted first only when
/// the exponentials could overflow or underflow, so the result is
/// monotone in every argument across calls.
fn log_mean_exp(values: &[f64]) -> f64 {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let low = values.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if top < 700.0 && low > -700.0 { 0.0 } else { top };
    let sum: f64 = values.iter().map(|a| (a - shift).exp()).sum();
    shift + (sum / values.len() as f64).ln()
}

/// `(1/(q-1)) log mean mu^{q-1}` from log masses, or `mean log mu` at
/// `q = 1`. Equal masses return their common logarithm exactly, whatever
/// `q` is.
pub fn log_moment(log_masses: &[f64], q: f64) -> f64 {
    let first = log_masses[0];
    if log_masses.iter().all(|&l| l == first) {
        return first;
    }
    if q == 1.0 {
        log_masses.iter().sum::<f64>() / log_masses.len() as f64
    } else {
        let scaled: Vec<f64> = log_masses.iter().map(|l| (q - 1.0) * l).collect();
        log_mean_exp(&scaled) / (q - 1.0)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(eps))
    }
}

fn check_count(name: &'static str, value: usize) -> Result<()> {
    if value == 0 {
        Err(Error::InvalidArgument {
            name,
            reason: "must be at least 1".into(),
        })
    } else {
        Ok(())
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument {
            name: "q",
            reason: format!("order must be finite, got {}", q),
        })
    }
}

fn check_lists(eps_list: &[f64], k_list: &[usize]) -> Result<()> {
    if eps_list.is_empty() || k_list.is_empty() {
        return Err(Error::InvalidArgument {
            name: "lists",
            reason: "epsilon and k lists must be non-empty".into(),
        });
    }
    for &eps in eps_list {
        check_eps(eps)?;
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument {
            name: "epsilons",
            reason: "must be strictly decreasing".into(),
        });
    }
    if k_list[0] == 0 {
        return Err(Error::KZero);
    }
    if k_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument {
            name: "ks",
            reason: "must be strictly increasing".into(),
        });
    }
    Ok(())
}

fn check_spec<S: GeneratorSystem + ?Sized>(sys: &S, p: &BernoulliSpec) -> Result<()> {
    if p.alphabet() != sys.generators() {
        return Err(Error::AlphabetMismatch {
            expected: sys.generators(),
            found: p.alphabet(),
        });
    }
    Ok(())
}

/// A reference measure seen through a finite set of centres.
pub trait BallMeasure<S: GeneratorSystem + ?Sized>: Sync {
    fn centers(&self) -> &[S::Point];

    /// `log mu(B_{w,k}(x, eps))` for every centre `x`.
    fn log_ball_measures(&self, sys: &S, omega: &SymbolWord, k: usize, eps: f64) -> Result<Vec<f64>>;

    /// `log mu(B_{w,k}(x, eps))` for the centre with the given index.
    fn log_ball_measure_at(&self, sys: &S, omega: &SymbolWord, k: usize, index: usize, eps: f64) -> Result<f64> {
        Ok(self.log_ball_measures(sys, omega, k, eps)?[index])
    }

    /// `log(mu(B(x, 2 eps)) / mu(B(x, eps)))` for every centre.
    fn log_doubling_ratios(&self, sys: &S, omega: &SymbolWord, k: usize, eps: f64) -> Result<Vec<f64>> {
        let wide = self.log_ball_measures(sys, omega, k, 2.0 * eps)?;
        let narrow = self.log_ball_measures(sys, omega, k, eps)?;
        Ok(wide.iter().zip(&narrow).map(|(w, n)| w - n).collect())
    }

    /// True when ball masses are computed exactly rather than estimated.
    fn is_exact(&self) -> bool {
        false
    }
}

/// `N` points drawn from the reference measure. Ball masses are the
/// fraction of points in the ball; centres are sample points, so every
/// mass is at least `1/N`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure<P> {
    points: Vec<P>,
}

impl<P: Clone + PartialEq> EmpiricalMeasure<P> {
    pub fn from_points(points: Vec<P>) -> Result<Self> {
        check_count("points", points.len())?;
        Ok(EmpiricalMeasure { points })
    }

    /// Point `i` is drawn from stream `i`.
    pub fn sample<S: GeneratorSystem<Point = P> + ?Sized>(sys: &S, count: usize, streams: Streams) -> Result<Self> {
        check_count("points", count)?;
        Ok(EmpiricalMeasure {
            points: (0..count as u64)
                .map(|i| sys.sample_point(&mut streams.stream(i)))
                .collect(),
        })
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn index_of(&self, center: &P) -> Result<usize> {
        self.points
            .iter()
            .position(|p| p == center)
            .ok_or(Error::CenterNotInSample)
    }
}

impl<S, P> BallMeasure<S> for EmpiricalMeasure<P>
where
    S: GeneratorSystem<Point = P> + ?Sized,
    P: Clone + PartialEq + Send + Sync,
{
    fn centers(&self) -> &[P] {
        &self.points
    }

    fn log_ball_measures(&self, sys: &S, omega: &SymbolWord, k: usize, eps: f64) -> Result<Vec<f64>> {
        check_bowen(sys, omega, k)?;
        check_eps(eps)?;
        let table = stage_table(sys, omega.symbols(), k, &self.points, eps, PairRoute::Auto)?;
        let counts = neighbour_counts(sys, &table, eps, self.points.len());
        let log_n = (self.points.len() as f64).ln();
        Ok(counts.iter().map(|&c| (c as f64).ln() - log_n).collect())
    }

    fn log_ball_measure_at(&self, sys: &S, omega: &SymbolWord, k: usize, index: usize, eps: f64) -> Result<f64> {
        check_bowen(sys, omega, k)?;
        check_eps(eps)?;
        let table = stage_table(sys, omega.symbols(), k, &self.points, eps, PairRoute::Auto)?;
        let count = count_near(sys, &table, index, eps);
        Ok((count as f64).ln() - (self.points.len() as f64).ln())
    }
}

/// Empirical `mu(B_{w,k}(center, eps))`; the centre must be a sample point.
pub fn ball_measure<S: GeneratorSystem + ?Sized>(
    em: &EmpiricalMeasure<S::Point>,
    sys: &S,
    omega: &SymbolWord,
    k: usize,
    center: &S::Point,
    eps: f64,
) -> Result<f64> {
    check_eps(eps)?;
    let index = em.index_of(center)?;
    Ok(em.log_ball_measure_at(sys, omega, k, index, eps)?.exp())
}

/// Correlation sums of one orbit at `n` and `n / 2` points.
fn orbit_corr_sums<S: GeneratorSystem + ?Sized>(
    sys: &S,
    orbit: &[S::Point],
    eps: f64,
    omega: &[u32],
    k: usize,
    route: PairRoute,
) -> Result<(f64, f64)> {
    let n = orbit.len();
    let table = stage_table(sys, omega, k, orbit, eps, route)?;
    let full: usize = neighbour_counts(sys, &table, eps, n).iter().sum();
    let half_n = n / 2;
    let half = if half_n == 0 {
        1.0
    } else {
        let pairs: usize = neighbour_counts(sys, &table, eps, half_n).iter().sum();
        pairs as f64 / (half_n * half_n) as f64
    };
    Ok((full as f64 / (n * n) as f64, half))
}

fn orbit<S: GeneratorSystem + ?Sized>(
    sys: &S,
    x: &S::Point,
    n: usize,
    p: &BernoulliSpec,
    streams: Streams,
    index: u64,
) -> Result<Vec<S::Point>> {
    let upsilon = sample_word(p, n - 1, &mut streams.stream(index));
    Ok(orbit_table(sys, &upsilon, n, x)?.points)
}

fn summarize_corr_sum(per_upsilon: &[(f64, f64)], n: usize, k: usize, eps: f64) -> CorrSumEstimate {
    let full: Vec<f64> = per_upsilon.iter().map(|v| v.0).collect();
    let half: Vec<f64> = per_upsilon.iter().map(|v| v.1).collect();
    let a = mean_and_stderr(&full);
    let b = mean_and_stderr(&half);
    let stable = n < 2 || (a.value - b.value).abs() <= 2.0 * a.stderr.hypot(b.stderr);
    CorrSumEstimate {
        value: a.value,
        stderr: a.stderr,
        n,
        k,
        epsilon: eps,
        samples: per_upsilon.len(),
        half_value: b.value,
        half_stderr: b.stderr,
        stable,
    }
}

/// `C(G, x, eps, w, k, n)`: the fraction of ordered orbit pairs
/// `(f_{u,i} x, f_{u,j} x)`, `0 <= i, j < n`, within Bowen distance `eps`
/// under `w`, averaged over `samples` orbit words `u` drawn from `p`.
/// Orbit word `j` comes from stream `j` of `streams`.
#[allow(clippy::too_many_arguments)]
pub fn correlation_sum<S: GeneratorSystem + ?Sized>(
    sys: &S,
    x: &S::Point,
    eps: f64,
    omega: &SymbolWord,
    k: usize,
    n: usize,
    samples: usize,
    p: &BernoulliSpec,
    streams: Streams,
) -> Result<CorrSumEstimate> {
    correlation_sum_via(sys, x, eps, omega, k, n, samples, p, streams, PairRoute::Auto)
}

/// [`correlation_sum`] with an explicit pair-counting route.
#[allow(clippy::too_many_arguments)]
pub fn correlation_sum_via<S: GeneratorSystem + ?Sized>(
    sys: &S,
    x: &S::Point,
    eps: f64,
    omega: &SymbolWord,
    k: usize,
    n: usize,
    samples: usize,
    p: &BernoulliSpec,
    streams: Streams,
    route: PairRoute,
) -> Result<CorrSumEstimate> {
    check_eps(eps)?;
    check_count("n", n)?;
    check_count("samples", samples)?;
    check_bowen(sys, omega, k)?;
    check_spec(sys, p)?;
    if n == 1 || eps >= sys.diameter() {
        let exact = vec![(1.0, 1.0); samples];
        return Ok(summarize_corr_sum(&exact, n, k, eps));
    }
    let per_upsilon = (0..samples as u64)
        .into_par_iter()
        .map(|j| {
            let points = orbit(sys, x, n, p, streams, j)?;
            orbit_corr_sums(sys, &points, eps, omega.symbols(), k, route)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize_corr_sum(&per_upsilon, n, k, eps))
}

/// `c(G, mu, eps, k, q)`: the outer average over driving words of
/// `(1/(q-1)) log int mu(B_{w,k}(x, eps))^{q-1} dmu(x)`, with the `q = 1`
/// case `int log mu(B) dmu`. Driving words come from `omega_words` over
/// `streams`.
#[allow(clippy::too_many_arguments)]
pub fn corr_integral<S, B>(
    measure: &B,
    sys: &S,
    eps: f64,
    k: usize,
    q: f64,
    sampling: OmegaSampling,
    p: &BernoulliSpec,
    streams: Streams,
) -> Result<Estimate>
where
    S: GeneratorSystem + ?Sized,
    B: BallMeasure<S> + ?Sized,
{
    check_eps(eps)?;
    check_q(q)?;
    check_spec(sys, p)?;
    let draw = omega_words(p, k, sampling, streams)?;
    let values = draw
        .words
        .par_iter()
        .map(|w| Ok(log_moment(&measure.log_ball_measures(sys, w, k, eps)?, q)))
        .collect::<Result<Vec<f64>>>()?;
    let mut est = weighted(&values, &draw.weights);
    if draw.exhaustive && measure.is_exact() {
        est.stderr = 0.0;
    }
    Ok(est)
}

/// Rows `(k, -c(G, mu, eps, k, q) / k)` for every `eps`. Driving words come
/// from the `OMEGA_DOMAIN` family of `streams` and are shared by all rows.
#[allow(clippy::too_many_arguments)]
pub fn corr_entropy_series<S, B>(
    measure: &B,
    sys: &S,
    eps_list: &[f64],
    k_list: &[usize],
    q: f64,
    sampling: OmegaSampling,
    p: &BernoulliSpec,
    streams: Streams,
) -> Result<Vec<EntropySeries>>
where
    S: GeneratorSystem + ?Sized,
    B: BallMeasure<S> + ?Sized,
{
    check_lists(eps_list, k_list)?;
    let omega_streams = streams.derive(OMEGA_DOMAIN);
    eps_list
        .iter()
        .map(|&eps| {
            let rows = k_list
                .iter()
                .map(|&k| {
                    let c = corr_integral(measure, sys, eps, k, q, sampling, p, omega_streams)?;
                    Ok(SeriesRow {
                        k,
                        value: -c.value / k as f64,
                        stderr: c.stderr / k as f64,
                        stable: true,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(EntropySeries {
                kind: "corr-entropy".into(),
                epsilon: eps,
                q: Some(q),
                rows,
            })
        })
        .collect()
}

/// Sample sizes for the local correlation entropy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalCorrSampling {
    /// Orbit length `n`.
    pub n: usize,
    /// Orbit words per correlation sum.
    pub upsilon_samples: usize,
    pub omega: OmegaSampling,
}

/// Rows `(k, -(1/k) E_w log C(G, x, eps, w, k, n))`, the correlation sum at
/// a single large `n` standing in for its lower limit in `n`. A row is
/// flagged unstable when some correlation sum fails the `n / 2` check.
///
/// The same orbit words serve every `eps`, `k` and `w`.
pub fn local_corr_entropy_series<S: GeneratorSystem + ?Sized>(
    sys: &S,
    x: &S::Point,
    eps_list: &[f64],
    k_list: &[usize],
    sampling: LocalCorrSampling,
    p: &BernoulliSpec,
    streams: Streams,
) -> Result<Vec<EntropySeries>> {
    check_lists(eps_list, k_list)?;
    check_count("n", sampling.n)?;
    check_count("upsilon samples", sampling.upsilon_samples)?;
    check_spec(sys, p)?;
    let omega_streams = streams.derive(OMEGA_DOMAIN);
    let upsilon_streams = streams.derive(UPSILON_DOMAIN);
    let draws = k_list
        .iter()
        .map(|&k| omega_words(p, k, sampling.omega, omega_streams))
        .collect::<Result<Vec<_>>>()?;

    // per orbit word: [eps][k][w] -> (C at n, C at n/2)
    let per_upsilon = (0..sampling.upsilon_samples as u64)
        .into_par_iter()
        .map(|j| {
            let points = orbit(sys, x, sampling.n, p, upsilon_streams, j)?;
            let mut table = Vec::new();
            for &eps in eps_list {
                for (&k, draw) in k_list.iter().zip(&draws) {
                    for w in &draw.words {
                        let sums = if sampling.n == 1 || eps >= sys.diameter() {
                            (1.0, 1.0)
                        } else {
                            orbit_corr_sums(sys, &points, eps, w.symbols(), k, PairRoute::Auto)?
                        };
                        table.push(sums);
                    }
                }
            }
            Ok(table)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut slot = 0;
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut rows = Vec::with_capacity(k_list.len());
        for (&k, draw) in k_list.iter().zip(&draws) {
            let mut logs = Vec::with_capacity(draw.words.len());
            let mut inner_var = 0.0;
            let mut stable = true;
            for weight in &draw.weights {
                let samples: Vec<(f64, f64)> = per_upsilon.iter().map(|t| t[slot]).collect();
                slot += 1;
                let c = summarize_corr_sum(&samples, sampling.n, k, eps);
                stable &= c.stable;
                logs.push(c.value.ln());
                inner_var += (weight * c.stderr / c.value).powi(2);
            }
            let mut outer = weighted(&logs, &draw.weights);
            if draw.exhaustive {
                outer.stderr = 0.0;
            }
            rows.push(SeriesRow {
                k,
                value: -outer.value / k as f64,
                stderr: (outer.stderr.powi(2) + inner_var).sqrt() / k as f64,
                stable,
            });
        }
        out.push(EntropySeries {
            kind: "local-corr-entropy".into(),
            epsilon: eps,
            q: None,
            rows,
        });
    }
    Ok(out)
}

fn select<P: Clone>(sample: &[P], indices: Vec<usize>) -> Vec<P> {
    indices.into_iter().map(|i| sample[i].clone()).collect()
}

/// Greedy maximal `(w, k, eps)`-separated subset of `sample`, in input
/// order. It is also `(w, k, eps)`-spanning for the sample.
pub fn separated_set<S: GeneratorSystem + ?Sized>(
    sample: &[S::Point],
    sys: &S,
    omega: &SymbolWord,
    k: usize,
    eps: f64,
) -> Result<Vec<S::Point>> {
    separated_set_via(sample, sys, omega, k, eps, PairRoute::Auto)
}

/// [`separated_set`] with an explicit pair-comparison route.
pub fn separated_set_via<S: GeneratorSystem + ?Sized>(
    sample: &[S::Point],
    sys: &S,
    omega: &SymbolWord,
    k: usize,
    eps: f64,
    route: PairRoute,
) -> Result<Vec<S::Point>> {
    check_eps(eps)?;
    check_bowen(sys, omega, k)?;
    let table = stage_table(sys, omega.symbols(), k, sample, eps, route)?;
    Ok(select(sample, greedy_separated(sys, &table, eps)))
}

/// Greedy `(w, k, eps)`-spanning subset of `sample`: every sample point is
/// within `eps` of a returned point. Never larger than [`separated_set`].
pub fn spanning_set<S: GeneratorSystem + ?Sized>(
    sample: &[S::Point],
    sys: &S,
    omega: &SymbolWord,
    k: usize,
    eps: f64,
) -> Result<Vec<S::Point>> {
    check_eps(eps)?;
    check_bowen(sys, omega, k)?;
    let table = stage_table(sys, omega.symbols(), k, sample, eps, PairRoute::Auto)?;
    Ok(select(sample, greedy_cover(sys, &table, eps)))
}

/// Rows `(k, (1/k) E_w log #E(w, k, eps))` with `E` the greedy separated
/// subset of `n_sample` points drawn from the `POINT_DOMAIN` family.
#[allow(clippy::too_many_arguments)]
pub fn top_entropy_series<S: GeneratorSystem + ?Sized>(
    sys: &S,
    eps_list: &[f64],
    k_list: &[usize],
    sampling: OmegaSampling,
    n_sample: usize,
    p: &BernoulliSpec,
    streams: Streams,
) -> Result<Vec<EntropySeries>> {
    check_count("sample", n_sample)?;
    let point_streams = streams.derive(POINT_DOMAIN);
    let sample: Vec<S::Point> = (0..n_sample as u64)
        .map(|i| sys.sample_point(&mut point_streams.stream(i)))
        .collect();
    top_entropy_series_on(sys, &sample, eps_list, k_list, sampling, p, streams)
}

/// [`top_entropy_series`] over a given sample.
pub fn top_entropy_series_on<S: GeneratorSystem + ?Sized>(
    sys: &S,
    sample: &[S::Point],
    eps_list: &[f64],
    k_list: &[usize],
    sampling: OmegaSampling,
    p: &BernoulliSpec,
    streams: Streams,
) -> Result<Vec<EntropySeries>> {
    check_lists(eps_list, k_list)?;
    check_count("sample", sample.len())?;
    check_spec(sys, p)?;
    let omega_streams = streams.derive(OMEGA_DOMAIN);
    eps_list
        .iter()
        .map(|&eps| {
            let rows = k_list
                .iter()
                .map(|&k| {
                    let draw = omega_words(p, k, sampling, omega_streams)?;
                    let logs = draw
                        .words
                        .par_iter()
                        .map(|w| {
                            let table = stage_table(sys, w.symbols(), k, sample, eps, PairRoute::Auto)?;
                            Ok((greedy_separated(sys, &table, eps).len() as f64).ln())
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    let mut est = weighted(&logs, &draw.weights);
                    if draw.exhaustive {
                        est.stderr = 0.0;
                    }
                    Ok(SeriesRow {
                        k,
                        value: est.value / k as f64,
                        stderr: est.stderr / k as f64,
                        stable: true,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(EntropySeries {
                kind: "top-entropy".into(),
                epsilon: eps,
                q: None,
                rows,
            })
        })
        .collect()
}

/// `sup_x mu(B_{w,k}(x, 2 eps)) / mu(B_{w,k}(x, eps))` over the centres of
/// `measure`, with `(1/k) log` of it.
pub fn doubling_ratio<S, B>(measure: &B, sys: &S, omega: &SymbolWord, k: usize, eps: f64) -> Result<DoublingDiagnostic>
where
    S: GeneratorSystem + ?Sized,
    B: BallMeasure<S> + ?Sized,
{
    check_eps(eps)?;
    check_bowen(sys, omega, k)?;
    let top = measure
        .log_doubling_ratios(sys, omega, k, eps)?
        .into_iter()
        .fold(0.0f64, f64::max);
    Ok(DoublingDiagnostic {
        ratio: top.exp(),
        log_term: top / k as f64,
    })
}

/// Rows `(k, -(1/k) log mu(B_{w,k}(x, eps)))` along one driving word. The
/// point `x` must be a centre of `measure`.
pub fn local_entropy_series<S, B>(
    measure: &B,
    sys: &S,
    omega: &SymbolWord,
    x: &S::Point,
    eps_list: &[f64],
    k_list: &[usize],
) -> Result<Vec<EntropySeries>>
where
    S: GeneratorSystem + ?Sized,
    B: BallMeasure<S> + ?Sized,
{
    check_lists(eps_list, k_list)?;
    let index = measure
        .centers()
        .iter()
        .position(|c| c == x)
        .ok_or(Error::CenterNotInSample)?;
    eps_list
        .iter()
        .map(|&eps| {
            let rows = k_list
                .iter()
                .map(|&k| {
                    let log_mass = measure.log_ball_measure_at(sys, omega, k, index, eps)?;
                    let mut row = SeriesRow::exact(k, -log_mass / k as f64);
                    if !measure.is_exact() {
                        // binomial error of the mass, carried through the log
                        let mass = log_mass.exp();
                        let n = measure.centers().len() as f64;
                        row.stderr = ((1.0 - mass) / (n * mass)).sqrt() / k as f64;
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(EntropySeries {
                kind: "local-entropy".into(),
                epsilon: eps,
                q: None,
                rows,
            })
        })
        .collect()
}
