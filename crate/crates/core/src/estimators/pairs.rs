//! Pair counting over Bowen trajectories.
//!
//! Two routes produce identical counts. The keyed route applies when the
//! system buckets every stage point exactly (`ball_key`); closeness is then
//! equality of key tuples and a sort replaces the quadratic scan. The brute
//! route stores the `k` stage points of every start and compares pairs
//! stage by stage, leaving at the first stage farther than `eps`.

use std::collections::HashSet;

use crate::dynamics::{push_stages, GeneratorSystem};
use crate::error::{Error, Result};
use crate::symbolic::SymbolWord;

/// Which pair-counting route to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairRoute {
    /// Keyed when every stage point has a ball key, brute otherwise.
    Auto,
    /// Always compare stage points.
    Brute,
}

/// Stage data for `rows` starting points over a window of `k` stages.
pub(crate) enum StageTable<P> {
    Keys { k: usize, keys: Vec<u64> },
    Points { k: usize, points: Vec<P> },
}

impl<P> StageTable<P> {
    pub(crate) fn rows(&self) -> usize {
        match self {
            StageTable::Keys { k, keys } => keys.len() / k,
            StageTable::Points { k, points } => points.len() / k,
        }
    }
}

/// Builds the stage table of `starts` under the first `k - 1` symbols of
/// `word`, which must already be validated.
pub(crate) fn stage_table<S: GeneratorSystem + ?Sized>(
    sys: &S,
    word: &[u32],
    k: usize,
    starts: &[S::Point],
    eps: f64,
    route: PairRoute,
) -> Result<StageTable<S::Point>> {
    if route == PairRoute::Auto {
        if let Some(keys) = keyed_stages(sys, word, k, starts, eps)? {
            return Ok(StageTable::Keys { k, keys });
        }
    }
    let mut points = Vec::with_capacity(starts.len() * k);
    for x in starts {
        push_stages(sys, word, k, x, &mut points)?;
    }
    Ok(StageTable::Points { k, points })
}

fn keyed_stages<S: GeneratorSystem + ?Sized>(
    sys: &S,
    word: &[u32],
    k: usize,
    starts: &[S::Point],
    eps: f64,
) -> Result<Option<Vec<u64>>> {
    let mut keys = Vec::with_capacity(starts.len() * k);
    for x in starts {
        let Some(key) = sys.ball_key(x, eps) else {
            return Ok(None);
        };
        keys.push(key);
        let mut point = x.clone();
        for &symbol in &word[..k - 1] {
            point = sys.apply(symbol, &point)?;
            let Some(key) = sys.ball_key(&point, eps) else {
                return Ok(None);
            };
            keys.push(key);
        }
    }
    Ok(Some(keys))
}

fn close<S: GeneratorSystem + ?Sized>(sys: &S, a: &[S::Point], b: &[S::Point], eps: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| sys.distance(x, y) <= eps)
}

/// Rows of the first `rows` entries sorted by key tuple, then split into
/// runs of equal tuples.
fn key_classes(k: usize, keys: &[u64], rows: usize) -> Vec<Vec<usize>> {
    let row = |r: usize| &keys[r * k..(r + 1) * k];
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| row(a).cmp(row(b)).then(a.cmp(&b)));
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for r in order {
        match classes.last_mut() {
            Some(class) if row(class[0]) == row(r) => class.push(r),
            _ => classes.push(vec![r]),
        }
    }
    classes
}

/// For each of the first `rows` rows, the number of rows among the first
/// `rows` (itself included) within Bowen distance `eps`.
pub(crate) fn neighbour_counts<S: GeneratorSystem + ?Sized>(
    sys: &S,
    table: &StageTable<S::Point>,
    eps: f64,
    rows: usize,
) -> Vec<usize> {
    match table {
        StageTable::Keys { k, keys } => {
            let mut counts = vec![0; rows];
            for class in key_classes(*k, keys, rows) {
                for &r in &class {
                    counts[r] = class.len();
                }
            }
            counts
        }
        StageTable::Points { k, points } => {
            let mut counts = vec![1; rows];
            for i in 0..rows {
                let a = &points[i * k..(i + 1) * k];
                for j in i + 1..rows {
                    if close(sys, a, &points[j * k..(j + 1) * k], eps) {
                        counts[i] += 1;
                        counts[j] += 1;
                    }
                }
            }
            counts
        }
    }
}

/// Number of rows within `eps` of row `center`.
pub(crate) fn count_near<S: GeneratorSystem + ?Sized>(
    sys: &S,
    table: &StageTable<S::Point>,
    center: usize,
    eps: f64,
) -> usize {
    match table {
        StageTable::Keys { k, keys } => {
            let target = &keys[center * k..(center + 1) * k];
            keys.chunks(*k).filter(|row| *row == target).count()
        }
        StageTable::Points { k, points } => {
            let target = &points[center * k..(center + 1) * k];
            points
                .chunks(*k)
                .filter(|row| close(sys, target, row, eps))
                .count()
        }
    }
}

/// First-come greedy maximal separated subset, as row indices.
pub(crate) fn greedy_separated<S: GeneratorSystem + ?Sized>(
    sys: &S,
    table: &StageTable<S::Point>,
    eps: f64,
) -> Vec<usize> {
    match table {
        StageTable::Keys { k, keys } => {
            let mut seen: HashSet<&[u64]> = HashSet::new();
            keys.chunks(*k)
                .enumerate()
                .filter(|(_, row)| seen.insert(row))
                .map(|(r, _)| r)
                .collect()
        }
        StageTable::Points { k, points } => {
            let mut chosen: Vec<usize> = Vec::new();
            for (r, row) in points.chunks(*k).enumerate() {
                let separated = chosen
                    .iter()
                    .all(|&c| !close(sys, &points[c * k..(c + 1) * k], row, eps));
                if separated {
                    chosen.push(r);
                }
            }
            chosen
        }
    }
}

/// Greedy set cover: repeatedly take the row covering the most uncovered
/// rows (lowest index on ties). Never larger than the greedy separated set,
/// which is itself a cover.
pub(crate) fn greedy_cover<S: GeneratorSystem + ?Sized>(
    sys: &S,
    table: &StageTable<S::Point>,
    eps: f64,
) -> Vec<usize> {
    let (k, points) = match table {
        // key classes are disjoint balls, one representative each is optimal
        StageTable::Keys { .. } => return greedy_separated(sys, table, eps),
        StageTable::Points { k, points } => (*k, points),
    };
    let rows = table.rows();
    let mut neighbours: Vec<Vec<usize>> = (0..rows).map(|r| vec![r]).collect();
    for i in 0..rows {
        for j in i + 1..rows {
            if close(sys, &points[i * k..(i + 1) * k], &points[j * k..(j + 1) * k], eps) {
                neighbours[i].push(j);
                neighbours[j].push(i);
            }
        }
    }
    let mut covered = vec![false; rows];
    let mut gain: Vec<usize> = neighbours.iter().map(Vec::len).collect();
    let mut remaining = rows;
    let mut chosen = Vec::new();
    while remaining > 0 {
        let best = (0..rows)
            .max_by(|&a, &b| gain[a].cmp(&gain[b]).then(b.cmp(&a)))
            .unwrap();
        chosen.push(best);
        for &r in &neighbours[best] {
            if !covered[r] {
                covered[r] = true;
                remaining -= 1;
                for &s in &neighbours[r] {
                    gain[s] -= 1;
                }
            }
        }
    }
    let separated = greedy_separated(sys, table, eps);
    if separated.len() < chosen.len() {
        separated
    } else {
        chosen
    }
}

/// Neighbour counts of `starts` under `omega` over `k` stages, through the
/// chosen route. Exposed so the two routes can be compared.
pub fn neighbour_counts_via<S: GeneratorSystem + ?Sized>(
    sys: &S,
    omega: &SymbolWord,
    k: usize,
    starts: &[S::Point],
    eps: f64,
    route: PairRoute,
) -> Result<Vec<usize>> {
    crate::dynamics::check_bowen(sys, omega, k)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidEpsilon(eps));
    }
    let table = stage_table(sys, omega.symbols(), k, starts, eps, route)?;
    Ok(neighbour_counts(sys, &table, eps, starts.len()))
}
