//! Sparse frequency tables and exact solution counts.
//!
//! Everything here reduces to one pattern: group tuples by the value of the
//! slice constraint, histogram the degree-k power sums inside each class, and
//! autocorrelate. The table `h ↦ count` that falls out realises the leading
//! block (three variables a side), the trailing block (two a side), or a
//! joint moment histogram, and the full ten-variable count is the sparse dot
//! product of a leading and a trailing table.
//!
//! Costs scale with the sum of squared class sizes, never with the naive
//! `B^6`/`B^4` pair enumeration, and all arithmetic is 128-bit for keys and
//! 64-bit for counts.

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::triple::{BoxConfig, ExponentTriple, TripleClass};
use crate::util::{power_guard, power_table};

/// Which block a table realises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    /// Six-variable leading block: keys are `Σ(x_i^k - y_i^k)` subject to the
    /// degree-n slice vanishing.
    LeadingU,
    /// Four-variable trailing block: keys are `x1^k+x2^k-y1^k-y2^k` subject
    /// to the degree-m slice vanishing.
    TrailingV,
    /// Joint moment histogram used by the moment counts.
    MomentM,
}

impl TableKind {
    pub fn tag(&self) -> &'static str {
        match self {
            TableKind::LeadingU => "u",
            TableKind::TrailingV => "v",
            TableKind::MomentM => "m",
        }
    }
}

/// Sparse integer-keyed frequency table `h ↦ count`.
///
/// Entries are sorted by key, only nonzero counts are stored, and the table
/// is symmetric: `entry(h) = entry(-h)` for every `h` (swap the x and y
/// sides).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqTable {
    pub kind: TableKind,
    /// `(k, n)` for a leading table, `(k, m)` for a trailing one.
    pub exponents: (u32, u32),
    pub bound: u64,
    entries: Vec<(i128, u64)>,
    /// Sum of all counts.
    pub total: u128,
}

impl FreqTable {
    pub(crate) fn from_sorted_entries(
        kind: TableKind,
        exponents: (u32, u32),
        bound: u64,
        entries: Vec<(i128, u64)>,
    ) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, c)| c >= 1));
        let total = entries.iter().map(|&(_, c)| c as u128).sum();
        Self {
            kind,
            exponents,
            bound,
            entries,
            total,
        }
    }

    /// Count stored under `h`, zero if absent.
    pub fn entry(&self, h: i128) -> u64 {
        match self.entries.binary_search_by_key(&h, |&(k, _)| k) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    /// The `h = 0` count.
    pub fn zero(&self) -> u64 {
        self.entry(0)
    }

    /// All `(key, count)` pairs in ascending key order.
    pub fn entries(&self) -> &[(i128, u64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_count(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c).max().unwrap_or(0)
    }
}

/// Exact counts for one triple at one box bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountReport {
    pub triple: ExponentTriple,
    #[serde(rename = "b")]
    pub bound: u64,
    /// Exact number of solutions of the full linked system.
    #[serde(rename = "n")]
    pub total: u128,
    /// Exact number of diagonal solutions.
    #[serde(rename = "t")]
    pub diagonal: u128,
    /// `total - diagonal`.
    #[serde(rename = "e")]
    pub excess: u128,
    /// `Σ_{h≠0} u(h)·v(h)`, the non-diagonal coupling mass.
    pub residual: u128,
    #[serde(rename = "u0")]
    pub u_zero: u64,
    #[serde(rename = "v0")]
    pub v_zero: u64,
}

/// Class list: slice-constraint value ↦ histogram of degree-k sums.
/// Outer and inner vectors are sorted, counts are ordered-tuple counts.
type Classes = Vec<(i128, Vec<(i128, u64)>)>;

fn sort_classes(map: FxHashMap<i128, FxHashMap<i128, u64>>) -> Classes {
    let mut classes: Classes = map
        .into_iter()
        .map(|(s, hist)| {
            let mut vals: Vec<(i128, u64)> = hist.into_iter().collect();
            vals.sort_unstable_by_key(|&(t, _)| t);
            (s, vals)
        })
        .collect();
    classes.sort_unstable_by_key(|&(s, _)| s);
    classes
}

/// Ordered pairs `(x1, x2) ∈ [1,B]^2`, grouped by `x1^key_exp + x2^key_exp`,
/// histogrammed by `x1^val_exp + x2^val_exp`. Enumerates sorted pairs and
/// weights by the number of orderings.
fn pair_classes(bound: u64, key_exp: u32, val_exp: u32) -> Result<Classes> {
    let pk = power_table(bound, key_exp)?;
    let pv = power_table(bound, val_exp)?;
    let mut map: FxHashMap<i128, FxHashMap<i128, u64>> = FxHashMap::default();
    for a in 1..=bound as usize {
        for b in a..=bound as usize {
            let mult = if a == b { 1 } else { 2 };
            *map.entry(pk[a] + pk[b])
                .or_default()
                .entry(pv[a] + pv[b])
                .or_default() += mult;
        }
    }
    Ok(sort_classes(map))
}

/// Same for ordered triples, weighted by multiset orderings (1, 3 or 6).
fn triple_classes(bound: u64, key_exp: u32, val_exp: u32) -> Result<Classes> {
    let pk = power_table(bound, key_exp)?;
    let pv = power_table(bound, val_exp)?;
    let mut map: FxHashMap<i128, FxHashMap<i128, u64>> = FxHashMap::default();
    for a in 1..=bound as usize {
        for b in a..=bound as usize {
            for c in b..=bound as usize {
                let mult = if a == c {
                    1
                } else if a == b || b == c {
                    3
                } else {
                    6
                };
                *map.entry(pk[a] + pk[b] + pk[c])
                    .or_default()
                    .entry(pv[a] + pv[b] + pv[c])
                    .or_default() += mult;
            }
        }
    }
    Ok(sort_classes(map))
}

/// A class whose histogram has at least this many distinct values is
/// autocorrelated through a dense local difference array instead of hash
/// updates. Only the widest classes of degree-one slices reach it.
const DENSE_CLASS_MIN: usize = 1 << 12;
/// Widest key span a dense local array may cover.
const DENSE_SPAN_MAX: i128 = 1 << 23;

fn autocorrelate_class(vals: &[(i128, u64)], acc: &mut FxHashMap<i128, u64>) {
    let d = vals.len();
    let span = if d == 0 {
        0
    } else {
        vals[d - 1].0 - vals[0].0
    };
    if d >= DENSE_CLASS_MIN && span < DENSE_SPAN_MAX {
        autocorrelate_class_dense(vals, span as usize, acc);
    } else {
        autocorrelate_class_sparse(vals, acc);
    }
}

fn autocorrelate_class_sparse(vals: &[(i128, u64)], acc: &mut FxHashMap<i128, u64>) {
    for i in 0..vals.len() {
        let (ti, ci) = vals[i];
        *acc.entry(0).or_default() += ci * ci;
        for &(tj, cj) in &vals[i + 1..] {
            *acc.entry(tj - ti).or_default() += ci * cj;
        }
    }
}

fn autocorrelate_class_dense(vals: &[(i128, u64)], span: usize, acc: &mut FxHashMap<i128, u64>) {
    let mut dense = vec![0u64; span + 1];
    let mut zero = 0u64;
    for i in 0..vals.len() {
        let (ti, ci) = vals[i];
        zero += ci * ci;
        for &(tj, cj) in &vals[i + 1..] {
            dense[(tj - ti) as usize] += ci * cj;
        }
    }
    *acc.entry(0).or_default() += zero;
    for (h, &c) in dense.iter().enumerate().skip(1) {
        if c != 0 {
            *acc.entry(h as i128).or_default() += c;
        }
    }
}

/// Autocorrelates every class and assembles the symmetric sparse table.
///
/// Only keys `h >= 0` are accumulated (within a class, the pairs `(t_i, t_j)`
/// and `(t_j, t_i)` contribute equally to `±h`), and the negative half is
/// mirrored at the end, so symmetry holds by construction. Work is split
/// into `cfg.parallel_width` chunks of classes balanced by quadratic cost;
/// partial maps merge by keyed addition, which makes the result identical
/// for every width.
fn autocorrelate(
    classes: &Classes,
    cfg: &BoxConfig,
    key_range: u128,
    what: &str,
) -> Result<Vec<(i128, u64)>> {
    let projected: u128 = classes
        .iter()
        .map(|(_, v)| {
            let d = v.len() as u128;
            d * (d + 1) / 2
        })
        .sum();
    let needed = projected.min(key_range).saturating_mul(32);
    if needed > cfg.memory_budget as u128 {
        return Err(Error::BudgetExceeded {
            what: what.to_string(),
            needed,
            budget: cfg.memory_budget as u128,
        });
    }

    let chunks = chunk_by_cost(classes, cfg.chunks());
    let partials: Vec<FxHashMap<i128, u64>> = chunks
        .into_par_iter()
        .map(|range| {
            let mut acc = FxHashMap::default();
            for (_, vals) in &classes[range] {
                autocorrelate_class(vals, &mut acc);
            }
            acc
        })
        .collect();

    let mut half = FxHashMap::default();
    for part in partials {
        for (h, c) in part {
            *half.entry(h).or_insert(0u64) += c;
        }
    }

    let mut entries = Vec::with_capacity(half.len() * 2);
    for (&h, &c) in &half {
        if h == 0 {
            entries.push((0, c));
        } else {
            entries.push((h, c));
            entries.push((-h, c));
        }
    }
    entries.sort_unstable_by_key(|&(h, _)| h);
    Ok(entries)
}

/// Splits class indices into at most `parts` contiguous ranges with roughly
/// equal quadratic cost.
fn chunk_by_cost(classes: &Classes, parts: usize) -> Vec<std::ops::Range<usize>> {
    let costs: Vec<u128> = classes
        .iter()
        .map(|(_, v)| {
            let d = v.len() as u128;
            d * d + 1
        })
        .collect();
    chunk_weights(&costs, parts)
}

/// Splits `0..weights.len()` into at most `parts` contiguous ranges of
/// roughly equal total weight. Chunk boundaries depend on `parts`, the
/// merged result never does.
fn chunk_weights(weights: &[u128], parts: usize) -> Vec<std::ops::Range<usize>> {
    let total: u128 = weights.iter().sum();
    let parts = parts.max(1) as u128;
    let mut ranges = Vec::new();
    let mut start = 0usize;
    let mut acc = 0u128;
    let mut next_cut = total.div_ceil(parts);
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if acc >= next_cut && i + 1 < weights.len() {
            ranges.push(start..i + 1);
            start = i + 1;
            next_cut = acc + (total - acc) / (parts - ranges.len() as u128).max(1);
        }
    }
    if start < weights.len() {
        ranges.push(start..weights.len());
    }
    if ranges.is_empty() {
        ranges.push(0..0);
    }
    ranges
}

/// Guards against count overflow: the table total is at most
/// `(ordered tuples)^2`, which must fit `u64`.
fn mass_guard(bound: u64, tuple_len: u32) -> Result<()> {
    let tuples = (bound as u128).pow(tuple_len);
    if tuples * tuples > u64::MAX as u128 {
        return Err(Error::Overflow {
            what: format!("table counts for B={bound} may exceed 64 bits"),
        });
    }
    Ok(())
}

/// Builds the trailing-block table `v(h)`: the number of
/// `(x1,x2,y1,y2) ∈ [1,B]^4` with `x1^k+x2^k-y1^k-y2^k = h` and
/// `x1^m+x2^m = y1^m+y2^m`. Keys lie in `[-2B^k, 2B^k]`.
pub fn build_v_table(k: u32, m: u32, cfg: &BoxConfig) -> Result<FreqTable> {
    if k == m {
        return Err(Error::InvalidParameter(format!(
            "trailing table requires k != m, got k=m={k}"
        )));
    }
    cfg.check_bound()?;
    mass_guard(cfg.bound, 2)?;
    let classes = pair_classes(cfg.bound, m, k)?;
    let range = 4 * power_guard(cfg.bound, k)? as u128 + 1;
    let entries = autocorrelate(&classes, cfg, range, "trailing table")?;
    Ok(FreqTable::from_sorted_entries(
        TableKind::TrailingV,
        (k, m),
        cfg.bound,
        entries,
    ))
}

/// Builds the leading-block table `u(h)`: the number of
/// `(x,y) ∈ [1,B]^3 × [1,B]^3` with `Σ(x_i^k - y_i^k) = h` and
/// `Σ(x_i^n - y_i^n) = 0`. Keys lie in `[-3B^k, 3B^k]`.
pub fn build_u_table(k: u32, n: u32, cfg: &BoxConfig) -> Result<FreqTable> {
    if k == n {
        return Err(Error::InvalidParameter(format!(
            "leading table requires k != n, got k=n={k}"
        )));
    }
    cfg.check_bound()?;
    mass_guard(cfg.bound, 3)?;
    let classes = triple_classes(cfg.bound, n, k)?;
    let range = 6 * power_guard(cfg.bound, k)? as u128 + 1;
    let entries = autocorrelate(&classes, cfg, range, "leading table")?;
    Ok(FreqTable::from_sorted_entries(
        TableKind::LeadingU,
        (k, n),
        cfg.bound,
        entries,
    ))
}

/// Number of ordered triple pairs with equal multisets: `6B^3 - 9B^2 + 4B`.
pub fn ordered_triple_multisets(bound: u64) -> u128 {
    let b = bound as u128;
    6 * b * b * b - 9 * b * b + 4 * b
}

/// Number of ordered pair pairs with equal multisets: `2B^2 - B`.
pub fn ordered_pair_multisets(bound: u64) -> u128 {
    let b = bound as u128;
    2 * b * b - b
}

/// Exact diagonal count `T(B)`: solutions where the leading triples and the
/// trailing pairs agree as multisets. The closed forms are validated against
/// multiset brute force in the test suite rather than assumed.
pub fn diagonal_count(bound: u64) -> u128 {
    ordered_triple_multisets(bound) * ordered_pair_multisets(bound)
}

/// Exact count of the full linked system via the block decomposition
/// `N = Σ_h u(h)·v(h)`, reported together with its diagonal/residual split.
pub fn count_solutions(t: &ExponentTriple, cfg: &BoxConfig) -> Result<CountReport> {
    if t.classify() == TripleClass::Degenerate {
        return Err(Error::Degenerate {
            k: t.k,
            m: t.m,
            n: t.n,
        });
    }
    cfg.check_bound()?;
    let u = build_u_table(t.k, t.n, cfg)?;
    let v = build_v_table(t.k, t.m, cfg)?;
    // v has O(B^2) mass, u has O(B^3): iterate the small side, probe the big.
    let mut residual: u128 = 0;
    for &(h, c) in v.entries() {
        if h != 0 {
            residual += c as u128 * u.entry(h) as u128;
        }
    }
    let u_zero = u.zero();
    let v_zero = v.zero();
    let total = u_zero as u128 * v_zero as u128 + residual;
    let diagonal = diagonal_count(cfg.bound);
    let excess = total
        .checked_sub(diagonal)
        .expect("diagonal solutions cannot outnumber the total");
    Ok(CountReport {
        triple: *t,
        bound: cfg.bound,
        total,
        diagonal,
        excess,
        residual,
        u_zero,
        v_zero,
    })
}

/// Ordered solutions of `x1^m + x2^m = y1^m + y2^m` in `[1,B]^4` with
/// `{x1,x2} != {y1,y2}`: the autocorrelation mass of the pair power-sum
/// histogram minus the multiset diagonal.
pub fn taxicab_count(m: u32, bound: u64) -> Result<u64> {
    if m == 0 || bound == 0 {
        return Err(Error::InvalidParameter(
            "taxicab count needs m >= 1 and B >= 1".into(),
        ));
    }
    mass_guard(bound, 2)?;
    let p = power_table(bound, m)?;
    let mut hist: FxHashMap<i128, u64> = FxHashMap::default();
    for a in 1..=bound as usize {
        for b in a..=bound as usize {
            let mult = if a == b { 1 } else { 2 };
            *hist.entry(p[a] + p[b]).or_default() += mult;
        }
    }
    let mass: u128 = hist.values().map(|&c| c as u128 * c as u128).sum();
    Ok((mass - ordered_pair_multisets(bound)) as u64)
}

/// Ordered solutions of the single equation `Σ x_i^e = Σ y_i^e` over
/// `[1,B]^s × [1,B]^s` for `s ∈ {2, 3}`; used by the major-arc bound.
pub(crate) fn single_constraint_count(exp: u32, s: u32, bound: u64) -> Result<u128> {
    let p = power_table(bound, exp)?;
    let mut hist: FxHashMap<i128, u64> = FxHashMap::default();
    match s {
        2 => {
            for a in 1..=bound as usize {
                for b in a..=bound as usize {
                    let mult = if a == b { 1 } else { 2 };
                    *hist.entry(p[a] + p[b]).or_default() += mult;
                }
            }
        }
        3 => {
            for a in 1..=bound as usize {
                for b in a..=bound as usize {
                    for c in b..=bound as usize {
                        let mult = if a == c {
                            1
                        } else if a == b || b == c {
                            3
                        } else {
                            6
                        };
                        *hist.entry(p[a] + p[b] + p[c]).or_default() += mult;
                    }
                }
            }
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "single-constraint count supports s ∈ {{2,3}}, got {s}"
            )))
        }
    }
    Ok(hist.values().map(|&c| c as u128 * c as u128).sum())
}

/// Exact moment count: solutions of `Σ(x_i^k - y_i^k) = Σ(x_i^j - y_i^j) = 0`
/// over `[1,B]^s × [1,B]^s`.
///
/// Built from the joint `(k-sum, j-sum)` histogram of ordered s-tuples; the
/// moment is the sum of its squared counts. Enumeration runs over sorted
/// tuples weighted by orderings and is chunked by the leading coordinate.
pub fn moment_count(k: u32, j: u32, s: u32, cfg: &BoxConfig) -> Result<u128> {
    if k == j {
        return Err(Error::InvalidParameter(format!(
            "moment count requires k != j, got k=j={k}"
        )));
    }
    if s == 0 || s > 16 {
        return Err(Error::InvalidParameter(format!(
            "moment count supports 1 <= s <= 16, got s={s}"
        )));
    }
    cfg.check_bound()?;
    let bound = cfg.bound;
    power_guard(bound, k.max(j))?;

    let multisets = binomial_u128(bound as u128 + s as u128 - 1, s as u128).ok_or_else(|| {
        Error::Overflow {
            what: format!("multiset count for B={bound}, s={s}"),
        }
    })?;
    let needed = multisets.saturating_mul(56);
    if needed > cfg.memory_budget as u128 {
        return Err(Error::BudgetExceeded {
            what: "moment histogram".to_string(),
            needed,
            budget: cfg.memory_budget as u128,
        });
    }

    let pk = power_table(bound, k)?;
    let pj = power_table(bound, j)?;
    let s_fact: u64 = (1..=s as u64).product();

    // Chunk the leading coordinate so each range opens a similar number of
    // sorted tails: x1 = x opens C(B - x + s - 1, s - 1) multisets.
    let weights: Vec<u128> = (1..=bound)
        .map(|x| binomial_u128((bound - x) as u128 + s as u128 - 1, s as u128 - 1).unwrap_or(1))
        .collect();
    let ranges = chunk_weights(&weights, cfg.chunks());

    let partials: Vec<FxHashMap<(i128, i128), u64>> = ranges
        .into_par_iter()
        .map(|range| {
            let mut map: FxHashMap<(i128, i128), u64> = FxHashMap::default();
            for x1 in range {
                moment_rec(
                    x1 as u64 + 1,
                    1,
                    s,
                    bound,
                    0,
                    0,
                    1,
                    1,
                    s_fact,
                    &pk,
                    &pj,
                    &mut map,
                );
            }
            map
        })
        .collect();

    let mut joint: FxHashMap<(i128, i128), u64> = FxHashMap::default();
    for part in partials {
        for (key, c) in part {
            *joint.entry(key).or_insert(0) += c;
        }
    }
    Ok(joint.values().map(|&c| c as u128 * c as u128).sum())
}

/// Depth-first walk over sorted s-tuples extending `x`, weighting each leaf
/// by its number of orderings (`s! / Π run!`, with the run-factorial
/// denominator threaded through the descent).
#[allow(clippy::too_many_arguments)]
fn moment_rec(
    x: u64,
    depth: u32,
    s: u32,
    bound: u64,
    ksum: i128,
    jsum: i128,
    run: u64,
    denom: u64,
    s_fact: u64,
    pk: &[i128],
    pj: &[i128],
    map: &mut FxHashMap<(i128, i128), u64>,
) {
    let ksum = ksum + pk[x as usize];
    let jsum = jsum + pj[x as usize];
    if depth == s {
        *map.entry((ksum, jsum)).or_default() += s_fact / denom;
        return;
    }
    for nx in x..=bound {
        let (nrun, ndenom) = if nx == x {
            (run + 1, denom * (run + 1))
        } else {
            (1, denom)
        };
        moment_rec(
            nx,
            depth + 1,
            s,
            bound,
            ksum,
            jsum,
            nrun,
            ndenom,
            s_fact,
            pk,
            pj,
            map,
        );
    }
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}
