//! Closed-form backend: the shift and the odometer acting on `{0,1}^N`.
//!
//! Points are finite prefixes `(x_1, .., x_D)`. The metric is
//! `d(x, y) = 2^{-L}` where `L` is the length of the longest common prefix,
//! so the closed ball of radius `2^{-t}` is the cylinder `[x_1 .. x_t]`.
//! The odometer preserves common prefixes and the shift consumes one
//! coordinate, hence the Bowen ball `B_{w,k}(x, 2^{-t})` is the cylinder of
//! length `t + s_{w,k}` with `s_{w,k}` the number of shifts among the first
//! `k - 1` symbols. With the fair-coin measure on both the space and the
//! driving words every entropy considered here has the closed form
//! `(t + (k - 1) / 2) log 2 / k`, with limit `log 2 / 2`.

use std::f64::consts::LN_2;

use rand::{Rng, RngCore};

use crate::dynamics::{GeneratorSystem, PowerSystem};
use crate::error::{Error, Result};
use crate::estimators::{BallMeasure, EntropySeries, SeriesRow};
use crate::symbolic::{power_word_map, SymbolWord};

/// Symbol of the shift generator.
pub const SHIFT: u32 = 1;
/// Symbol of the odometer generator.
pub const ODOMETER: u32 = 2;

/// Finite prefix of a point of `{0,1}^N`. Coordinate `i` (1-based) is bit
/// `i - 1` of the packed words; bits past `depth` are always zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryPoint {
    words: Vec<u64>,
    depth: usize,
}

impl BinaryPoint {
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidArgument {
                name: "bits",
                reason: "a binary point needs depth at least 1".into(),
            });
        }
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => words[i / 64] |= 1 << (i % 64),
                _ => {
                    return Err(Error::InvalidArgument {
                        name: "bits",
                        reason: format!("coordinate {} is {}, not 0 or 1", i + 1, b),
                    })
                }
            }
        }
        Ok(BinaryPoint {
            words,
            depth: bits.len(),
        })
    }

    /// The prefix whose first `depth` coordinates are the binary digits of
    /// `value`, least significant first.
    pub fn from_integer(value: u64, depth: usize) -> Result<Self> {
        if depth == 0 || (depth < 64 && value >> depth != 0) {
            return Err(Error::InvalidArgument {
                name: "value",
                reason: format!("{} does not fit in depth {}", value, depth),
            });
        }
        let mut words = vec![0u64; depth.div_ceil(64)];
        words[0] = value;
        Ok(BinaryPoint { words, depth })
    }

    /// Uniform random prefix of the given depth.
    pub fn random(depth: usize, rng: &mut dyn RngCore) -> Self {
        let depth = depth.max(1);
        let mut words: Vec<u64> = (0..depth.div_ceil(64)).map(|_| rng.random()).collect();
        mask_tail(&mut words, depth);
        BinaryPoint { words, depth }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Coordinate `i`, 1-based.
    pub fn bit(&self, i: usize) -> Result<u8> {
        if i == 0 || i > self.depth {
            return Err(Error::DepthExhausted {
                needed: i,
                depth: self.depth,
            });
        }
        Ok(((self.words[(i - 1) / 64] >> ((i - 1) % 64)) & 1) as u8)
    }

    pub fn bits(&self) -> Vec<u8> {
        (1..=self.depth).map(|i| self.bit(i).unwrap()).collect()
    }

    /// A copy extended with `extra` zero coordinates.
    pub fn padded(&self, extra: usize) -> BinaryPoint {
        let depth = self.depth + extra;
        let mut words = self.words.clone();
        words.resize(depth.div_ceil(64), 0);
        BinaryPoint { words, depth }
    }

    /// Length of the longest common prefix, capped at the smaller depth.
    pub fn common_prefix(&self, other: &BinaryPoint) -> usize {
        let limit = self.depth.min(other.depth);
        for (i, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let diff = a ^ b;
            if diff != 0 {
                return (i * 64 + diff.trailing_zeros() as usize).min(limit);
            }
        }
        limit
    }

    /// First `len` coordinates packed into an integer.
    fn low_bits(&self, len: usize) -> u64 {
        match len {
            0 => 0,
            64 => self.words[0],
            _ => self.words[0] & ((1u64 << len) - 1),
        }
    }
}

fn mask_tail(words: &mut [u64], depth: usize) {
    let rem = depth % 64;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}

/// The two generators of the example system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryGenerator {
    /// `(x_1, x_2, ..) -> (x_2, x_3, ..)`
    Shift,
    /// Add one to `x_1` and carry to the right.
    Odometer,
}

impl BinaryGenerator {
    pub fn from_symbol(symbol: u32) -> Result<Self> {
        match symbol {
            SHIFT => Ok(BinaryGenerator::Shift),
            ODOMETER => Ok(BinaryGenerator::Odometer),
            _ => Err(Error::InvalidSymbol {
                symbol,
                alphabet: 2,
            }),
        }
    }
}

/// Applies one generator to a truncated point.
///
/// The shift needs depth at least 2 and returns a point one coordinate
/// shorter. The odometer keeps the depth and fails with `CarryOverflow`
/// when every retained coordinate is 1, since the carry would leave the
/// prefix.
pub fn exact_apply(gen: BinaryGenerator, x: &BinaryPoint) -> Result<BinaryPoint> {
    match gen {
        BinaryGenerator::Shift => {
            if x.depth < 2 {
                return Err(Error::DepthExhausted {
                    needed: 2,
                    depth: x.depth,
                });
            }
            let depth = x.depth - 1;
            let mut words: Vec<u64> = x
                .words
                .iter()
                .enumerate()
                .map(|(i, w)| (w >> 1) | x.words.get(i + 1).map_or(0, |next| next << 63))
                .collect();
            words.truncate(depth.div_ceil(64));
            Ok(BinaryPoint { words, depth })
        }
        BinaryGenerator::Odometer => {
            let mut words = x.words.clone();
            let mut carry = true;
            for w in words.iter_mut() {
                let (sum, overflow) = w.overflowing_add(1);
                *w = sum;
                if !overflow {
                    carry = false;
                    break;
                }
            }
            let rem = x.depth % 64;
            let spilled = if rem == 0 {
                carry
            } else {
                words.last().is_some_and(|last| last >> rem != 0)
            };
            if spilled {
                return Err(Error::CarryOverflow { depth: x.depth });
            }
            Ok(BinaryPoint {
                words,
                depth: x.depth,
            })
        }
    }
}

/// Smallest `L >= 0` with `2^{-L} <= eps`: the closed `eps`-ball around a
/// point is the cylinder of its first `L` coordinates.
pub fn resolution_length(eps: f64) -> Result<usize> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let mut len = 0usize;
    let mut radius = 1.0f64;
    while radius > eps {
        len += 1;
        radius *= 0.5;
    }
    Ok(len)
}

/// Shift and odometer on `{0,1}^N`; the sampler draws fair coin prefixes of
/// a fixed depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryShiftOdometer {
    depth: usize,
}

impl BinaryShiftOdometer {
    pub fn new(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument {
                name: "depth",
                reason: "sample depth must be at least 1".into(),
            });
        }
        Ok(BinaryShiftOdometer { depth })
    }

    /// Depth large enough for `k_max` Bowen stages at resolution `eps`
    /// after `orbit_steps` further shifts, with a 64-coordinate margin that
    /// keeps odometer overflow out of reach in practice.
    pub fn for_window(eps: f64, k_max: usize, orbit_steps: usize) -> Result<Self> {
        let len = resolution_length(eps)?;
        BinaryShiftOdometer::new(len + k_max + orbit_steps + 64)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}

impl GeneratorSystem for BinaryShiftOdometer {
    type Point = BinaryPoint;

    fn name(&self) -> &str {
        "binary-shift-odometer"
    }

    fn generators(&self) -> u32 {
        2
    }

    fn apply(&self, symbol: u32, x: &BinaryPoint) -> Result<BinaryPoint> {
        exact_apply(BinaryGenerator::from_symbol(symbol)?, x)
    }

    /// `2^{-L}` for a common prefix of length `L`; prefixes that agree on
    /// their whole shared depth are identified (distance 0).
    fn distance(&self, x: &BinaryPoint, y: &BinaryPoint) -> f64 {
        let common = x.common_prefix(y);
        if common == x.depth.min(y.depth) {
            0.0
        } else {
            0.5f64.powi(common as i32)
        }
    }

    fn diameter(&self) -> f64 {
        1.0
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> BinaryPoint {
        BinaryPoint::random(self.depth, rng)
    }

    fn ball_key(&self, x: &BinaryPoint, eps: f64) -> Option<u64> {
        let len = resolution_length(eps).ok()?;
        if len > 64 || len > x.depth {
            return None;
        }
        Some(x.low_bits(len))
    }
}

/// A cylinder `[c_1 .. c_L]` anchored at the first coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cylinder {
    word: Vec<u8>,
}

impl Cylinder {
    pub fn new(word: Vec<u8>) -> Result<Self> {
        if word.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument {
                name: "word",
                reason: "cylinder coordinates must be 0 or 1".into(),
            });
        }
        Ok(Cylinder { word })
    }

    pub fn word(&self) -> &[u8] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Fair-coin measure `2^{-L}`.
    pub fn measure(&self) -> f64 {
        0.5f64.powi(self.word.len() as i32)
    }

    pub fn log_measure(&self) -> f64 {
        -(self.word.len() as f64) * LN_2
    }

    pub fn contains(&self, x: &BinaryPoint) -> Result<bool> {
        for (i, &b) in self.word.iter().enumerate() {
            if x.bit(i + 1)? != b {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Number of shifts among the first `k - 1` symbols of `omega`.
pub fn s_count(omega: &SymbolWord, k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::KZero);
    }
    omega.ensure_alphabet(2)?;
    omega.ensure_len(k - 1)?;
    Ok(omega.symbols()[..k - 1]
        .iter()
        .filter(|&&s| s == SHIFT)
        .count())
}

/// Length of the cylinder `B_{w,k}(x, eps)`: `L + s_{w,k}` where `L` is
/// the resolution length of `eps`, and 0 once `eps` reaches the diameter.
pub fn bowen_cylinder_len(omega: &SymbolWord, k: usize, eps: f64) -> Result<usize> {
    let len = resolution_length(eps)?;
    let shifts = s_count(omega, k)?;
    Ok(if len == 0 { 0 } else { len + shifts })
}

/// The Bowen ball `B_{w,k}(x, 2^{-t})` as a cylinder on `x`'s prefix.
pub fn exact_bowen_ball(omega: &SymbolWord, k: usize, x: &BinaryPoint, t: u32) -> Result<Cylinder> {
    if t == 0 {
        return Err(Error::InvalidArgument {
            name: "t",
            reason: "radius exponent must be at least 1".into(),
        });
    }
    let len = t as usize + s_count(omega, k)?;
    if x.depth < len {
        return Err(Error::DepthExhausted {
            needed: len,
            depth: x.depth,
        });
    }
    Ok(Cylinder {
        word: (1..=len).map(|i| x.bit(i).unwrap()).collect(),
    })
}

/// Systems whose Bowen balls on binary points are cylinders of length
/// `resolution + shifts`.
pub trait ShiftCounting: GeneratorSystem<Point = BinaryPoint> {
    /// Shifts of the base system performed before Bowen stage `k - 1`.
    fn window_shifts(&self, omega: &SymbolWord, k: usize) -> Result<usize>;
}

impl ShiftCounting for BinaryShiftOdometer {
    fn window_shifts(&self, omega: &SymbolWord, k: usize) -> Result<usize> {
        s_count(omega, k)
    }
}

impl ShiftCounting for PowerSystem<'_, BinaryShiftOdometer> {
    fn window_shifts(&self, omega: &SymbolWord, k: usize) -> Result<usize> {
        if k == 0 {
            return Err(Error::KZero);
        }
        omega.ensure_alphabet(self.generators())?;
        let prefix = omega.prefix(k - 1)?;
        let expanded = power_word_map(&prefix, 2, self.power())?;
        s_count(&expanded, expanded.len() + 1)
    }
}

/// Exact fair-coin ball masses at a fixed set of centres.
///
/// Every centre sees the same mass `2^{-(L + s)}`, so the centres only fix
/// the quadrature of the inner integral.
#[derive(Clone, Debug)]
pub struct ExactBinaryMeasure {
    centers: Vec<BinaryPoint>,
}

impl ExactBinaryMeasure {
    pub fn new(centers: Vec<BinaryPoint>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::InvalidArgument {
                name: "centers",
                reason: "at least one centre is required".into(),
            });
        }
        Ok(ExactBinaryMeasure { centers })
    }

    pub fn sampled<S: GeneratorSystem<Point = BinaryPoint>>(
        sys: &S,
        count: usize,
        streams: crate::symbolic::Streams,
    ) -> Result<Self> {
        ExactBinaryMeasure::new(
            (0..count as u64)
                .map(|i| sys.sample_point(&mut streams.stream(i)))
                .collect(),
        )
    }

    fn cylinder_len<S: ShiftCounting>(sys: &S, omega: &SymbolWord, k: usize, eps: f64) -> Result<usize> {
        let len = resolution_length(eps)?;
        let shifts = sys.window_shifts(omega, k)?;
        Ok(if len == 0 { 0 } else { len + shifts })
    }
}

impl<S: ShiftCounting> BallMeasure<S> for ExactBinaryMeasure {
    fn centers(&self) -> &[BinaryPoint] {
        &self.centers
    }

    fn log_ball_measures(&self, sys: &S, omega: &SymbolWord, k: usize, eps: f64) -> Result<Vec<f64>> {
        let len = Self::cylinder_len(sys, omega, k, eps)?;
        Ok(vec![-(len as f64) * LN_2; self.centers.len()])
    }

    fn log_ball_measure_at(
        &self,
        sys: &S,
        omega: &SymbolWord,
        k: usize,
        _index: usize,
        eps: f64,
    ) -> Result<f64> {
        let len = Self::cylinder_len(sys, omega, k, eps)?;
        Ok(-(len as f64) * LN_2)
    }

    fn log_doubling_ratios(&self, sys: &S, omega: &SymbolWord, k: usize, eps: f64) -> Result<Vec<f64>> {
        let narrow = Self::cylinder_len(sys, omega, k, eps)?;
        let wide = Self::cylinder_len(sys, omega, k, 2.0 * eps)?;
        Ok(vec![(narrow - wide) as f64 * LN_2; self.centers.len()])
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// `(t + (k - 1) / 2) log 2 / k`, the fair-coin average of
/// `(t + s_{w,k}) log 2 / k` over all driving words.
fn closed_form(t: f64, k: usize) -> f64 {
    (t + (k - 1) as f64 / 2.0) * LN_2 / k as f64
}

fn closed_series(kind: &str, epsilon: f64, q: Option<f64>, offset: f64, k_max: usize) -> EntropySeries {
    EntropySeries {
        kind: kind.to_string(),
        epsilon,
        q,
        rows: (1..=k_max)
            .map(|k| SeriesRow::exact(k, closed_form(offset, k)))
            .collect(),
    }
}

fn check_series_args(t: u32, k_max: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidArgument {
            name: "t",
            reason: "radius exponent must be at least 1".into(),
        });
    }
    if k_max == 0 {
        return Err(Error::KZero);
    }
    Ok(())
}

/// Rows `(k, -c(G, mu, 2^{-t}, k, q) / k)`. Ball masses do not depend on the
/// centre, so the value is the same for every `q`.
pub fn exact_corr_integral_series(t: u32, k_max: usize, q: f64) -> Result<EntropySeries> {
    check_series_args(t, k_max)?;
    if !q.is_finite() {
        return Err(Error::InvalidArgument {
            name: "q",
            reason: "order must be finite".into(),
        });
    }
    Ok(closed_series("exact-corr", 0.5f64.powi(t as i32), Some(q), t as f64, k_max))
}

/// Rows `(k, (1/k) E log #E(w, k, 2^{-t}))` with one separated point per
/// cylinder of length `t + s_{w,k}`.
pub fn exact_top_entropy_series(t: u32, k_max: usize) -> Result<EntropySeries> {
    check_series_args(t, k_max)?;
    Ok(closed_series("exact-top", 0.5f64.powi(t as i32), None, t as f64, k_max))
}

/// Rows `(k, (1/k) E H(join of the first-coordinate partition))`; the join
/// cells are cylinders of length `1 + s_{w,k}`.
pub fn exact_measure_entropy_series(k_max: usize) -> Result<EntropySeries> {
    check_series_args(1, k_max)?;
    Ok(closed_series("exact-measure", 0.5, None, 1.0, k_max))
}

/// `-c / k` for the `power`-power system at window `k` and radius
/// `2^{-t}`: each lifted step performs `power` base steps, half of them
/// shifts on average.
pub fn exact_power_series(t: u32, power: u32, k_max: usize) -> Result<EntropySeries> {
    check_series_args(t, k_max)?;
    if power == 0 {
        return Err(Error::InvalidArgument {
            name: "power",
            reason: "power must be at least 1".into(),
        });
    }
    Ok(EntropySeries {
        kind: format!("exact-power-{}", power),
        epsilon: 0.5f64.powi(t as i32),
        q: None,
        rows: (1..=k_max)
            .map(|k| {
                let mean_len = t as f64 + power as f64 * (k - 1) as f64 / 2.0;
                SeriesRow::exact(k, mean_len * LN_2 / k as f64)
            })
            .collect(),
    })
}

/// Total of `L + s_{w,k}` over every word in `words`, in integers.
pub fn total_cylinder_len<S: ShiftCounting>(sys: &S, words: &[SymbolWord], k: usize, t: u32) -> Result<u64> {
    let mut total = 0u64;
    for w in words {
        total += t as u64 + sys.window_shifts(w, k)? as u64;
    }
    Ok(total)
}
