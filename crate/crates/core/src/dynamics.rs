//! Free semigroup dynamics: `m` self-maps of a compact metric space composed
//! along a driving word.
//!
//! For a word `w = (i_1, i_2, ..)` the orbit map is
//! `f_{w,n} = f_{i_n} ∘ .. ∘ f_{i_1}` with `f_{w,0}` the identity, and the
//! generalised Bowen distance over a window of `k` stages is
//! `max_{0 <= i < k} d(f_{w,i} x, f_{w,i} y)`. Only the first `k - 1`
//! symbols of `w` enter it.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::symbolic::{self, power_alphabet, power_symbol_digits, SymbolWord};

/// A finite family of continuous self-maps of a compact metric space,
/// together with its metric and a sampler for the reference measure.
///
/// Implementations must be immutable; every method may be called from many
/// threads at once.
pub trait GeneratorSystem: Send + Sync {
    type Point: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn name(&self) -> &str;

    /// Number of generators `m`.
    fn generators(&self) -> u32;

    /// Applies generator `symbol` (1-based) to `x`.
    fn apply(&self, symbol: u32, x: &Self::Point) -> Result<Self::Point>;

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// Declared upper bound on `distance` over the whole space.
    fn diameter(&self) -> f64;

    /// Draws a point from the reference measure.
    fn sample_point(&self, rng: &mut dyn RngCore) -> Self::Point;

    /// Exact bucketing of closed `eps`-balls.
    ///
    /// When `Some`, keys must satisfy `distance(x, y) <= eps` if and only if
    /// `ball_key(x, eps) == ball_key(y, eps)`. Only ultrametric spaces admit
    /// such keys; pair counting switches to hashing when every point in a
    /// batch has one.
    fn ball_key(&self, _x: &Self::Point, _eps: f64) -> Option<u64> {
        None
    }
}

fn check_word<S: GeneratorSystem + ?Sized>(sys: &S, word: &SymbolWord, needed: usize) -> Result<()> {
    word.ensure_alphabet(sys.generators())?;
    word.ensure_len(needed)
}

/// `f_{w,n}(x)`.
pub fn apply_word<S: GeneratorSystem + ?Sized>(
    sys: &S,
    word: &SymbolWord,
    n: usize,
    x: &S::Point,
) -> Result<S::Point> {
    check_word(sys, word, n)?;
    let mut point = x.clone();
    for &symbol in &word.symbols()[..n] {
        point = sys.apply(symbol, &point)?;
    }
    Ok(point)
}

/// The orbit `f_{w,0}(x), .., f_{w,n-1}(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTable<P> {
    pub word: SymbolWord,
    pub points: Vec<P>,
}

impl<P> OrbitTable<P> {
    pub fn base(&self) -> Option<&P> {
        self.points.first()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn orbit_table<S: GeneratorSystem + ?Sized>(
    sys: &S,
    word: &SymbolWord,
    n: usize,
    x: &S::Point,
) -> Result<OrbitTable<S::Point>> {
    let steps = n.saturating_sub(1);
    check_word(sys, word, steps)?;
    let mut points = Vec::with_capacity(n);
    if n > 0 {
        points.push(x.clone());
        for &symbol in &word.symbols()[..steps] {
            let next = sys.apply(symbol, points.last().unwrap())?;
            points.push(next);
        }
    }
    Ok(OrbitTable {
        word: word.prefix(steps)?,
        points,
    })
}

/// Appends the `k` Bowen stages of `x` under `word` to `out`. The word has
/// already been validated.
pub(crate) fn push_stages<S: GeneratorSystem + ?Sized>(
    sys: &S,
    word: &[u32],
    k: usize,
    x: &S::Point,
    out: &mut Vec<S::Point>,
) -> Result<()> {
    let start = out.len();
    out.push(x.clone());
    for &symbol in &word[..k - 1] {
        let next = sys.apply(symbol, &out[out.len() - 1])?;
        out.push(next);
    }
    debug_assert_eq!(out.len() - start, k);
    Ok(())
}

pub(crate) fn check_bowen<S: GeneratorSystem + ?Sized>(
    sys: &S,
    omega: &SymbolWord,
    k: usize,
) -> Result<()> {
    if k == 0 {
        return Err(Error::KZero);
    }
    check_word(sys, omega, k - 1)
}

/// Generalised Bowen distance `d^G_{w,k}(x, y)`.
pub fn bowen_distance<S: GeneratorSystem + ?Sized>(
    sys: &S,
    omega: &SymbolWord,
    k: usize,
    x: &S::Point,
    y: &S::Point,
) -> Result<f64> {
    check_bowen(sys, omega, k)?;
    let mut a = x.clone();
    let mut b = y.clone();
    let mut worst = sys.distance(&a, &b);
    for &symbol in &omega.symbols()[..k - 1] {
        a = sys.apply(symbol, &a)?;
        b = sys.apply(symbol, &b)?;
        worst = worst.max(sys.distance(&a, &b));
    }
    Ok(worst)
}

/// Membership of `y` in the closed Bowen ball `B^G_{w,k}(x, eps)`, stopping
/// at the first stage farther than `eps`.
pub fn in_bowen_ball<S: GeneratorSystem + ?Sized>(
    sys: &S,
    omega: &SymbolWord,
    k: usize,
    x: &S::Point,
    y: &S::Point,
    eps: f64,
) -> Result<bool> {
    check_bowen(sys, omega, k)?;
    if sys.distance(x, y) > eps {
        return Ok(false);
    }
    let mut a = x.clone();
    let mut b = y.clone();
    for &symbol in &omega.symbols()[..k - 1] {
        a = sys.apply(symbol, &a)?;
        b = sys.apply(symbol, &b)?;
        if sys.distance(&a, &b) > eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One step of the skew product `(w, x) -> (shift w, f_{w_1}(x))`.
pub fn skew_step<S: GeneratorSystem + ?Sized>(
    sys: &S,
    omega: &SymbolWord,
    x: &S::Point,
) -> Result<(SymbolWord, S::Point)> {
    if omega.is_empty() {
        return Err(Error::EmptyWord);
    }
    omega.ensure_alphabet(sys.generators())?;
    let image = sys.apply(omega.symbols()[0], x)?;
    Ok((symbolic::shift(omega, 1)?, image))
}

/// Birkhoff average `(1/n) sum_{i<n} phi(f_{w,i} x)`.
pub fn ergodic_average<S, F>(
    sys: &S,
    phi: F,
    omega: &SymbolWord,
    x: &S::Point,
    n: usize,
) -> Result<f64>
where
    S: GeneratorSystem + ?Sized,
    F: Fn(&S::Point) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidArgument {
            name: "n",
            reason: "at least one orbit point is required".into(),
        });
    }
    check_word(sys, omega, n - 1)?;
    let mut point = x.clone();
    let mut total = phi(&point);
    for &symbol in &omega.symbols()[..n - 1] {
        point = sys.apply(symbol, &point)?;
        total += phi(&point);
    }
    Ok(total / n as f64)
}

/// Generators `g_j = f_{i_t} ∘ .. ∘ f_{i_1}` of the `t`-power system, where
/// `(i_1, .., i_t)` are the little-endian digits of `j`.
#[derive(Debug)]
pub struct PowerSystem<'a, S: GeneratorSystem + ?Sized> {
    base: &'a S,
    power: u32,
    alphabet: u32,
    name: String,
}

pub fn build_power_system<S: GeneratorSystem + ?Sized>(base: &S, power: u32) -> Result<PowerSystem<'_, S>> {
    if power == 0 {
        return Err(Error::InvalidArgument {
            name: "power",
            reason: "power must be at least 1".into(),
        });
    }
    let alphabet = power_alphabet(base.generators(), power)?;
    Ok(PowerSystem {
        base,
        power,
        alphabet,
        name: format!("{}^{}", base.name(), power),
    })
}

impl<S: GeneratorSystem + ?Sized> PowerSystem<'_, S> {
    pub fn power(&self) -> u32 {
        self.power
    }

    pub fn base(&self) -> &S {
        self.base
    }
}

impl<S: GeneratorSystem + ?Sized> GeneratorSystem for PowerSystem<'_, S> {
    type Point = S::Point;

    fn name(&self) -> &str {
        &self.name
    }

    fn generators(&self) -> u32 {
        self.alphabet
    }

    fn apply(&self, symbol: u32, x: &Self::Point) -> Result<Self::Point> {
        if symbol == 0 || symbol > self.alphabet {
            return Err(Error::InvalidSymbol {
                symbol,
                alphabet: self.alphabet,
            });
        }
        let mut point = x.clone();
        for digit in power_symbol_digits(symbol, self.base.generators(), self.power) {
            point = self.base.apply(digit, &point)?;
        }
        Ok(point)
    }

    fn distance(&self, x: &Self::Point, y: &Self::Point) -> f64 {
        self.base.distance(x, y)
    }

    fn diameter(&self) -> f64 {
        self.base.diameter()
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Self::Point {
        self.base.sample_point(rng)
    }

    fn ball_key(&self, x: &Self::Point, eps: f64) -> Option<u64> {
        self.base.ball_key(x, eps)
    }
}

/// Distance on the circle `R/Z`.
pub fn circle_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    d.min(1.0 - d)
}

fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Default rotation number: the golden-mean conjugate `(sqrt 5 - 1) / 2`.
pub const GOLDEN_ROTATION: f64 = 0.618_033_988_749_894_9;

/// Doubling `x -> 2x` and the rotation `x -> x + alpha` on the circle, with
/// Lebesgue measure.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleDoubleRotate {
    alpha: f64,
}

impl CircleDoubleRotate {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument {
                name: "alpha",
                reason: "rotation must be finite".into(),
            });
        }
        Ok(CircleDoubleRotate { alpha: wrap(alpha) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for CircleDoubleRotate {
    fn default() -> Self {
        CircleDoubleRotate {
            alpha: GOLDEN_ROTATION,
        }
    }
}

impl GeneratorSystem for CircleDoubleRotate {
    type Point = f64;

    fn name(&self) -> &str {
        "circle-double-rotate"
    }

    fn generators(&self) -> u32 {
        2
    }

    fn apply(&self, symbol: u32, x: &f64) -> Result<f64> {
        match symbol {
            1 => Ok(wrap(2.0 * x)),
            2 => Ok(wrap(x + self.alpha)),
            _ => Err(Error::InvalidSymbol {
                symbol,
                alphabet: 2,
            }),
        }
    }

    fn distance(&self, x: &f64, y: &f64) -> f64 {
        circle_distance(*x, *y)
    }

    fn diameter(&self) -> f64 {
        0.5
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> f64 {
        rng.random::<f64>()
    }
}

/// Affine maps `x -> 2x + c_i` on the one-dimensional torus with Haar
/// measure. The metric is translation invariant, so Bowen balls are
/// translates of one another and every centre sees the same ball mass.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusAffine {
    offsets: Vec<f64>,
}

impl TorusAffine {
    pub fn new(offsets: Vec<f64>) -> Result<Self> {
        if offsets.is_empty() || offsets.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument {
                name: "offsets",
                reason: "need at least one finite translation".into(),
            });
        }
        Ok(TorusAffine {
            offsets: offsets.into_iter().map(wrap).collect(),
        })
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }
}

impl Default for TorusAffine {
    fn default() -> Self {
        TorusAffine {
            offsets: vec![0.0, 1.0 / 3.0],
        }
    }
}

impl GeneratorSystem for TorusAffine {
    type Point = f64;

    fn name(&self) -> &str {
        "torus-affine"
    }

    fn generators(&self) -> u32 {
        self.offsets.len() as u32
    }

    fn apply(&self, symbol: u32, x: &f64) -> Result<f64> {
        let c = self
            .offsets
            .get((symbol as usize).wrapping_sub(1))
            .ok_or(Error::InvalidSymbol {
                symbol,
                alphabet: self.generators(),
            })?;
        Ok(wrap(2.0 * x + c))
    }

    fn distance(&self, x: &f64, y: &f64) -> f64 {
        circle_distance(*x, *y)
    }

    fn diameter(&self) -> f64 {
        0.5
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> f64 {
        rng.random::<f64>()
    }
}

type MapFn<P> = Box<dyn Fn(&P) -> P + Send + Sync>;

/// A system assembled from closures, for experiments outside the built-ins.
pub struct CustomSystem<P> {
    name: String,
    maps: Vec<MapFn<P>>,
    metric: Box<dyn Fn(&P, &P) -> f64 + Send + Sync>,
    diameter: f64,
    sampler: Box<dyn Fn(&mut dyn RngCore) -> P + Send + Sync>,
}

impl<P> CustomSystem<P> {
    pub fn new(
        name: impl Into<String>,
        maps: Vec<MapFn<P>>,
        metric: impl Fn(&P, &P) -> f64 + Send + Sync + 'static,
        diameter: f64,
        sampler: impl Fn(&mut dyn RngCore) -> P + Send + Sync + 'static,
    ) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidArgument {
                name: "maps",
                reason: "a system needs at least one generator".into(),
            });
        }
        if !(diameter.is_finite() && diameter > 0.0) {
            return Err(Error::InvalidArgument {
                name: "diameter",
                reason: format!("must be positive and finite, got {}", diameter),
            });
        }
        Ok(CustomSystem {
            name: name.into(),
            maps,
            metric: Box::new(metric),
            diameter,
            sampler: Box::new(sampler),
        })
    }
}

impl<P> GeneratorSystem for CustomSystem<P>
where
    P: Clone + PartialEq + fmt::Debug + Send + Sync,
{
    type Point = P;

    fn name(&self) -> &str {
        &self.name
    }

    fn generators(&self) -> u32 {
        self.maps.len() as u32
    }

    fn apply(&self, symbol: u32, x: &P) -> Result<P> {
        let map = self
            .maps
            .get((symbol as usize).wrapping_sub(1))
            .ok_or(Error::InvalidSymbol {
                symbol,
                alphabet: self.generators(),
            })?;
        Ok(map(x))
    }

    fn distance(&self, x: &P, y: &P) -> f64 {
        (self.metric)(x, y)
    }

    fn diameter(&self) -> f64 {
        self.diameter
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> P {
        (self.sampler)(rng)
    }
}

/// A smooth test observable on the circle, `cos(2 pi x)`.
pub fn circle_cosine(x: &f64) -> f64 {
    (2.0 * PI * x).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{power_word_map, sample_word, BernoulliSpec, Streams};

    fn w(symbols: &[u32], m: u32) -> SymbolWord {
        SymbolWord::new(symbols.to_vec(), m).unwrap()
    }

    #[test]
    fn apply_word_identity_and_doubling() {
        let sys = CircleDoubleRotate::default();
        let word = w(&[1, 1], 2);
        assert_eq!(apply_word(&sys, &word, 0, &0.3).unwrap(), 0.3);
        let x = apply_word(&sys, &word, 2, &0.3).unwrap();
        assert!((x - 0.2).abs() < 1e-12);
        assert_eq!(
            apply_word(&sys, &word, 3, &0.3),
            Err(Error::WordTooShort { needed: 3, len: 2 })
        );
    }

    #[test]
    fn orbit_table_matches_reapplication() {
        let sys = CircleDoubleRotate::default();
        let spec = BernoulliSpec::uniform(2).unwrap();
        let streams = Streams::new(11);
        for i in 0..20 {
            let mut rng = streams.stream(i);
            let word = sample_word(&spec, 15, &mut rng);
            let x = sys.sample_point(&mut rng);
            let table = orbit_table(&sys, &word, 16, &x).unwrap();
            assert_eq!(table.len(), 16);
            assert_eq!(table.base(), Some(&x));
            for (j, p) in table.points.iter().enumerate() {
                assert_eq!(*p, apply_word(&sys, &word, j, &x).unwrap());
            }
        }
        assert_eq!(orbit_table(&sys, &w(&[], 2), 1, &0.4).unwrap().points, vec![0.4]);
    }

    #[test]
    fn bowen_distance_basics() {
        let sys = CircleDoubleRotate::default();
        let omega = w(&[1, 2, 1], 2);
        assert_eq!(bowen_distance(&sys, &omega, 1, &0.1, &0.3).unwrap(), circle_distance(0.1, 0.3));
        assert_eq!(bowen_distance(&sys, &omega, 4, &0.7, &0.7).unwrap(), 0.0);
        assert_eq!(bowen_distance(&sys, &omega, 0, &0.7, &0.7), Err(Error::KZero));
        assert!(matches!(
            bowen_distance(&sys, &omega, 5, &0.7, &0.7),
            Err(Error::WordTooShort { .. })
        ));
        // doubling expands 0.1 apart to 0.2 apart
        let d = bowen_distance(&sys, &w(&[1], 2), 2, &0.0, &0.1).unwrap();
        assert!((d - 0.2).abs() < 1e-12);
    }

    #[test]
    fn skew_step_iterates_to_apply_word() {
        let sys = TorusAffine::default();
        let spec = BernoulliSpec::uniform(2).unwrap();
        let streams = Streams::new(5);
        for i in 0..10 {
            let mut rng = streams.stream(i);
            let omega = sample_word(&spec, 12, &mut rng);
            let x = sys.sample_point(&mut rng);
            let (mut word, mut point) = (omega.clone(), x);
            for _ in 0..7 {
                let next = skew_step(&sys, &word, &point).unwrap();
                word = next.0;
                point = next.1;
            }
            assert_eq!(word, symbolic::shift(&omega, 7).unwrap());
            assert_eq!(point, apply_word(&sys, &omega, 7, &x).unwrap());
        }
        assert_eq!(skew_step(&sys, &w(&[], 2), &0.5), Err(Error::EmptyWord));
    }

    #[test]
    fn single_map_skew_step_is_classical_orbit() {
        let sys = TorusAffine::new(vec![0.25]).unwrap();
        let (_, y) = skew_step(&sys, &w(&[1, 1], 1), &0.1).unwrap();
        assert!((y - 0.45).abs() < 1e-12);
    }

    #[test]
    fn ergodic_average_basics() {
        let sys = CircleDoubleRotate::default();
        let omega = w(&[1, 2, 2, 1], 2);
        assert_eq!(ergodic_average(&sys, |_| 3.5, &omega, &0.2, 5).unwrap(), 3.5);
        assert_eq!(ergodic_average(&sys, |x| *x, &omega, &0.2, 1).unwrap(), 0.2);
        assert!(ergodic_average(&sys, |x| *x, &omega, &0.2, 6).is_err());
    }

    #[test]
    fn circle_cosine_average_vanishes() {
        // Lebesgue is invariant for both maps; cos(2 pi x) has mean zero
        let sys = CircleDoubleRotate::default();
        let spec = BernoulliSpec::uniform(2).unwrap();
        let mut rng = Streams::new(1).stream(0);
        let omega = sample_word(&spec, 20_000, &mut rng);
        let avg = ergodic_average(&sys, circle_cosine, &omega, &0.123, 20_000).unwrap();
        assert!(avg.abs() < 0.05, "{}", avg);
    }

    #[test]
    fn power_system_matches_base_at_multiples() {
        let sys = CircleDoubleRotate::default();
        assert_eq!(build_power_system(&sys, 1).unwrap().apply(2, &0.3).unwrap(), sys.apply(2, &0.3).unwrap());
        let power = build_power_system(&sys, 2).unwrap();
        assert_eq!(power.generators(), 4);
        let spec = BernoulliSpec::uniform(4).unwrap();
        let streams = Streams::new(77);
        for i in 0..100 {
            let mut rng = streams.stream(i);
            let varpi = sample_word(&spec, 4, &mut rng);
            let n = (i % 5) as usize;
            let x = sys.sample_point(&mut rng);
            let lifted = apply_word(&power, &varpi, n, &x).unwrap();
            let omega = power_word_map(&varpi, 2, 2).unwrap();
            let direct = apply_word(&sys, &omega, 2 * n, &x).unwrap();
            assert!(circle_distance(lifted, direct) <= 1e-12);
        }
    }

    #[test]
    fn power_system_rejects_overflow() {
        let sys = TorusAffine::new(vec![0.0; 3]).unwrap();
        assert!(matches!(
            build_power_system(&sys, 40),
            Err(Error::AlphabetOverflow { .. })
        ));
    }

    #[test]
    fn custom_system_round_trip() {
        let sys = CustomSystem::new(
            "interval-tent",
            vec![Box::new(|x: &f64| 1.0 - (2.0 * x - 1.0).abs()) as MapFn<f64>],
            |a: &f64, b: &f64| (a - b).abs(),
            1.0,
            |rng: &mut dyn RngCore| rng.random::<f64>(),
        )
        .unwrap();
        assert_eq!(sys.generators(), 1);
        assert_eq!(apply_word(&sys, &w(&[1], 1), 1, &0.25).unwrap(), 0.5);
        assert!(sys.apply(2, &0.1).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn word_strategy(len: usize) -> impl Strategy<Value = SymbolWord> {
            prop::collection::vec(1u32..=2, len).prop_map(|s| SymbolWord::new(s, 2).unwrap())
        }

        proptest! {
            #[test]
            fn bowen_metric_axioms(omega in word_strategy(6), k in 1usize..7, x in 0.0..1.0f64, y in 0.0..1.0f64, z in 0.0..1.0f64) {
                let sys = CircleDoubleRotate::default();
                let dxy = bowen_distance(&sys, &omega, k, &x, &y).unwrap();
                let dyx = bowen_distance(&sys, &omega, k, &y, &x).unwrap();
                let dxz = bowen_distance(&sys, &omega, k, &x, &z).unwrap();
                let dzy = bowen_distance(&sys, &omega, k, &z, &y).unwrap();
                prop_assert_eq!(dxy, dyx);
                prop_assert!(dxy <= dxz + dzy + 1e-12);
                prop_assert!(dxy <= sys.diameter());
            }

            #[test]
            fn bowen_distance_grows_with_k(omega in word_strategy(8), x in 0.0..1.0f64, y in 0.0..1.0f64) {
                let sys = TorusAffine::default();
                let mut last = 0.0;
                for k in 1..=9 {
                    let d = bowen_distance(&sys, &omega, k, &x, &y).unwrap();
                    prop_assert!(d >= last);
                    last = d;
                }
            }

            #[test]
            fn bowen_distance_ignores_late_symbols(a in word_strategy(8), b in word_strategy(8), k in 1usize..6, x in 0.0..1.0f64, y in 0.0..1.0f64) {
                let sys = CircleDoubleRotate::default();
                let mut mixed = a.symbols()[..k - 1].to_vec();
                mixed.extend_from_slice(&b.symbols()[k - 1..]);
                let mixed = SymbolWord::new(mixed, 2).unwrap();
                prop_assert_eq!(
                    bowen_distance(&sys, &a, k, &x, &y).unwrap(),
                    bowen_distance(&sys, &mixed, k, &x, &y).unwrap()
                );
            }

            #[test]
            fn orbit_cocycle(word in word_strategy(10), a in 0usize..5, b in 0usize..5, x in 0.0..1.0f64) {
                let sys = CircleDoubleRotate::default();
                let direct = apply_word(&sys, &word, a + b, &x).unwrap();
                let mid = apply_word(&sys, &word, a, &x).unwrap();
                let tail = symbolic::shift(&word, a).unwrap();
                prop_assert_eq!(direct, apply_word(&sys, &tail, b, &mid).unwrap());
            }

            #[test]
            fn early_exit_agrees_with_distance(omega in word_strategy(6), k in 1usize..7, x in 0.0..1.0f64, y in 0.0..1.0f64, eps in 0.001..0.5f64) {
                let sys = CircleDoubleRotate::default();
                let d = bowen_distance(&sys, &omega, k, &x, &y).unwrap();
                prop_assert_eq!(in_bowen_ball(&sys, &omega, k, &x, &y, eps).unwrap(), d <= eps);
            }
        }
    }
}
