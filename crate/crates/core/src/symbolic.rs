//! Finite words over `{1..m}`, Bernoulli measures on the one-sided symbol
//! space, the shift, and the digit re-encoding used by power systems.
//!
//! Symbols are 1-based. A word of length `n` stands for the prefix
//! `(i_1, .., i_n)` of an infinite driving sequence; only prefixes are ever
//! materialised because every quantity in this crate depends on finitely
//! many symbols.
//!
//! Randomness goes through [`Streams`]: a master seed plus a domain label
//! select a ChaCha8 key, and every logical task (one sampled word, one
//! sample point) reads its own stream. Results therefore do not depend on
//! how work is scheduled across threads.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const WEIGHT_TOLERANCE: f64 = 1e-12;

/// A finite word over the alphabet `{1..m}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymbolWord {
    symbols: Vec<u32>,
    alphabet: u32,
}

impl SymbolWord {
    pub fn new(symbols: Vec<u32>, alphabet: u32) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidArgument {
                name: "alphabet",
                reason: "alphabet size must be at least 1".into(),
            });
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s == 0 || s > alphabet) {
            return Err(Error::InvalidSymbol {
                symbol: bad,
                alphabet,
            });
        }
        Ok(SymbolWord { symbols, alphabet })
    }

    pub fn empty(alphabet: u32) -> Self {
        SymbolWord {
            symbols: Vec::new(),
            alphabet: alphabet.max(1),
        }
    }

    /// Parses the comma separated form, e.g. `"1,2,1"`. The empty string is
    /// the empty word.
    pub fn parse(text: &str, alphabet: u32) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return SymbolWord::new(Vec::new(), alphabet);
        }
        let symbols = text
            .split(',')
            .map(|tok| {
                tok.trim().parse::<u32>().map_err(|e| Error::InvalidArgument {
                    name: "word",
                    reason: format!("`{}`: {}", tok.trim(), e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SymbolWord::new(symbols, alphabet)
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The first `len` symbols.
    pub fn prefix(&self, len: usize) -> Result<SymbolWord> {
        if len > self.symbols.len() {
            return Err(Error::WordTooShort {
                needed: len,
                len: self.symbols.len(),
            });
        }
        Ok(SymbolWord {
            symbols: self.symbols[..len].to_vec(),
            alphabet: self.alphabet,
        })
    }

    pub(crate) fn ensure_alphabet(&self, expected: u32) -> Result<()> {
        if self.alphabet != expected {
            return Err(Error::AlphabetMismatch {
                expected,
                found: self.alphabet,
            });
        }
        Ok(())
    }

    pub(crate) fn ensure_len(&self, needed: usize) -> Result<()> {
        if self.symbols.len() < needed {
            return Err(Error::WordTooShort {
                needed,
                len: self.symbols.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", s)?;
        }
        Ok(())
    }
}

/// Probability vector `(p_1, .., p_m)` generating the Bernoulli measure on
/// the symbol space.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliSpec {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl BernoulliSpec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no weights given".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeights(format!(
                "every weight must be positive and finite, got {}",
                w
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {}, not 1",
                total
            )));
        }
        let cumulative = weights
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect();
        Ok(BernoulliSpec {
            weights,
            cumulative,
        })
    }

    pub fn uniform(alphabet: u32) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidWeights("alphabet size must be at least 1".into()));
        }
        BernoulliSpec::new(vec![1.0 / alphabet as f64; alphabet as usize])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alphabet(&self) -> u32 {
        self.weights.len() as u32
    }

    /// Probability of the cylinder of words starting with `word`.
    pub fn word_probability(&self, word: &SymbolWord) -> f64 {
        word.symbols()
            .iter()
            .map(|&s| self.weights[(s - 1) as usize])
            .product()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let last = self.cumulative.len() - 1;
        // the final cumulative entry may sit a rounding error below 1
        self.cumulative[..last]
            .iter()
            .position(|&c| u < c)
            .unwrap_or(last) as u32
            + 1
    }
}

/// Reproducible family of independent random streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
    domain: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Streams { seed, domain: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A sibling family for a different purpose, keyed by `label`.
    pub fn derive(&self, label: u64) -> Streams {
        Streams {
            seed: self.seed,
            domain: splitmix64(self.domain ^ splitmix64(label.wrapping_add(1))),
        }
    }

    /// The generator for task `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ self.domain));
        rng.set_stream(index);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws a word of length `len` with i.i.d. symbols distributed by `spec`.
pub fn sample_word<R: Rng + ?Sized>(spec: &BernoulliSpec, len: usize, rng: &mut R) -> SymbolWord {
    let symbols = (0..len).map(|_| spec.draw(rng)).collect();
    SymbolWord {
        symbols,
        alphabet: spec.alphabet(),
    }
}

/// The shift applied `steps` times: drops the first `steps` symbols.
pub fn shift(word: &SymbolWord, steps: usize) -> Result<SymbolWord> {
    if steps > word.len() {
        return Err(Error::StepsExceedLength {
            steps,
            len: word.len(),
        });
    }
    Ok(SymbolWord {
        symbols: word.symbols[steps..].to_vec(),
        alphabet: word.alphabet,
    })
}

/// `base^power` as an alphabet size.
pub fn power_alphabet(base: u32, power: u32) -> Result<u32> {
    base.checked_pow(power)
        .ok_or(Error::AlphabetOverflow { base, power })
}

/// Digits of the power-alphabet symbol `j`, little-endian base `base`:
/// `j - 1 = sum_s (i_s - 1) * base^(s-1)`.
pub fn power_symbol_digits(j: u32, base: u32, power: u32) -> Vec<u32> {
    let mut rest = j - 1;
    (0..power)
        .map(|_| {
            let digit = rest % base;
            rest /= base;
            digit + 1
        })
        .collect()
}

fn power_symbol_from_digits(digits: &[u32], base: u32) -> u32 {
    digits
        .iter()
        .rev()
        .fold(0u32, |acc, &d| acc * base + (d - 1))
        + 1
}

/// Expands a word over `base^power` symbols into the word over `base`
/// symbols whose consecutive blocks of `power` letters are the digits.
pub fn power_word_map(word: &SymbolWord, base: u32, power: u32) -> Result<SymbolWord> {
    check_power(power)?;
    word.ensure_alphabet(power_alphabet(base, power)?)?;
    let symbols = word
        .symbols()
        .iter()
        .flat_map(|&j| power_symbol_digits(j, base, power))
        .collect();
    Ok(SymbolWord {
        symbols,
        alphabet: base,
    })
}

/// Inverse of [`power_word_map`]. The input length must be a multiple of
/// `power`.
pub fn power_word_unmap(word: &SymbolWord, power: u32) -> Result<SymbolWord> {
    check_power(power)?;
    let base = word.alphabet();
    let alphabet = power_alphabet(base, power)?;
    if word.len() % power as usize != 0 {
        return Err(Error::InvalidArgument {
            name: "word",
            reason: format!(
                "length {} is not a multiple of the power {}",
                word.len(),
                power
            ),
        });
    }
    let symbols = word
        .symbols()
        .chunks(power as usize)
        .map(|block| power_symbol_from_digits(block, base))
        .collect();
    Ok(SymbolWord { symbols, alphabet })
}

/// Weights of the power alphabet: the weight of `j` is the product of the
/// weights of its digits.
pub fn power_weights(spec: &BernoulliSpec, power: u32) -> Result<BernoulliSpec> {
    check_power(power)?;
    let base = spec.alphabet();
    let alphabet = power_alphabet(base, power)?;
    let weights = (1..=alphabet)
        .map(|j| {
            power_symbol_digits(j, base, power)
                .iter()
                .map(|&d| spec.weights()[(d - 1) as usize])
                .product()
        })
        .collect();
    BernoulliSpec::new(weights)
}

fn check_power(power: u32) -> Result<()> {
    if power == 0 {
        return Err(Error::InvalidArgument {
            name: "power",
            reason: "power must be at least 1".into(),
        });
    }
    Ok(())
}

/// All `alphabet^len` words of length `len`, in lexicographic order.
pub fn all_words(alphabet: u32, len: usize) -> Vec<SymbolWord> {
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (1..=alphabet).map(move |s| {
                    let mut next = w.clone();
                    next.push(s);
                    next
                })
            })
            .collect();
    }
    out.into_iter()
        .map(|symbols| SymbolWord { symbols, alphabet })
        .collect()
}
