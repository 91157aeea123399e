//! Brute-force reference counters.
//!
//! Everything here enumerates raw ordered tuples and filters by the defining
//! equations, with no grouping or convolution tricks, so the results are
//! independent checks on the engine. Costs are exponential in the number of
//! variables; keep the bounds small.

use std::collections::{BTreeSet, HashMap};

use crate::triple::ExponentTriple;

fn pw(x: u64, e: u32) -> i128 {
    (x as i128).pow(e)
}

/// Solutions of the trailing pair system bucketed by `h`, as ordered
/// quadruples `(x1, x2, y1, y2)`.
pub fn pair_system_sets(k: u32, m: u32, bound: u64) -> HashMap<i128, BTreeSet<[i64; 4]>> {
    let mut out: HashMap<i128, BTreeSet<[i64; 4]>> = HashMap::new();
    for x1 in 1..=bound {
        for x2 in 1..=bound {
            for y1 in 1..=bound {
                for y2 in 1..=bound {
                    if pw(x1, m) + pw(x2, m) != pw(y1, m) + pw(y2, m) {
                        continue;
                    }
                    let h = pw(x1, k) + pw(x2, k) - pw(y1, k) - pw(y2, k);
                    out.entry(h)
                        .or_default()
                        .insert([x1 as i64, x2 as i64, y1 as i64, y2 as i64]);
                }
            }
        }
    }
    out
}

/// Counts of the trailing pair system per `h`.
pub fn pair_system_counts(k: u32, m: u32, bound: u64) -> HashMap<i128, u64> {
    pair_system_sets(k, m, bound)
        .into_iter()
        .map(|(h, set)| (h, set.len() as u64))
        .collect()
}

/// Counts of the leading triple system per `h`: six nested loops filtered by
/// the degree-n slice.
pub fn triple_system_counts(k: u32, n: u32, bound: u64) -> HashMap<i128, u64> {
    let mut out: HashMap<i128, u64> = HashMap::new();
    let b = bound;
    for x1 in 1..=b {
        for x2 in 1..=b {
            for x3 in 1..=b {
                let xn = pw(x1, n) + pw(x2, n) + pw(x3, n);
                let xk = pw(x1, k) + pw(x2, k) + pw(x3, k);
                for y1 in 1..=b {
                    for y2 in 1..=b {
                        for y3 in 1..=b {
                            if pw(y1, n) + pw(y2, n) + pw(y3, n) != xn {
                                continue;
                            }
                            let h = xk - pw(y1, k) - pw(y2, k) - pw(y3, k);
                            *out.entry(h).or_default() += 1;
                        }
                    }
                }
            }
        }
    }
    out
}

/// The ten-variable join oracle: enumerate both blocks independently,
/// bucket by the shared degree-k value, and join.
pub fn join_count(t: &ExponentTriple, bound: u64) -> u128 {
    let u = triple_system_counts(t.k, t.n, bound);
    let v = pair_system_counts(t.k, t.m, bound);
    let mut total: u128 = 0;
    for (h, uc) in &u {
        if let Some(vc) = v.get(h) {
            total += *uc as u128 * *vc as u128;
        }
    }
    total
}

/// Fully direct count over `[1,B]^10`; only feasible for `B <= 3`.
pub fn full_count_tiny(t: &ExponentTriple, bound: u64) -> u128 {
    assert!(bound <= 3, "full enumeration is 10 nested loops");
    let b = bound;
    let mut total: u128 = 0;
    let idx: Vec<u64> = (1..=b).collect();
    // x1..x3, y1..y3 leading; x4, x5, y4, y5 trailing.
    for &x1 in &idx {
        for &x2 in &idx {
            for &x3 in &idx {
                for &y1 in &idx {
                    for &y2 in &idx {
                        for &y3 in &idx {
                            if pw(x1, t.n) + pw(x2, t.n) + pw(x3, t.n)
                                != pw(y1, t.n) + pw(y2, t.n) + pw(y3, t.n)
                            {
                                continue;
                            }
                            let lead =
                                pw(x1, t.k) + pw(x2, t.k) + pw(x3, t.k) - pw(y1, t.k) - pw(y2, t.k)
                                    - pw(y3, t.k);
                            for &x4 in &idx {
                                for &x5 in &idx {
                                    for &y4 in &idx {
                                        for &y5 in &idx {
                                            if pw(x4, t.m) + pw(x5, t.m)
                                                != pw(y4, t.m) + pw(y5, t.m)
                                            {
                                                continue;
                                            }
                                            let trail = pw(x4, t.k) + pw(x5, t.k)
                                                - pw(y4, t.k)
                                                - pw(y5, t.k);
                                            if lead + trail == 0 {
                                                total += 1;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    total
}

/// Ordered multiset-equal pairs of triples and of pairs, counted by grouping
/// sorted tuples.
pub fn multiset_diagonal_counts(bound: u64) -> (u128, u128) {
    let mut triples: HashMap<[u64; 3], u128> = HashMap::new();
    for a in 1..=bound {
        for b in 1..=bound {
            for c in 1..=bound {
                let mut key = [a, b, c];
                key.sort_unstable();
                *triples.entry(key).or_default() += 1;
            }
        }
    }
    let a3 = triples.values().map(|&c| c * c).sum();
    let mut pairs: HashMap<[u64; 2], u128> = HashMap::new();
    for a in 1..=bound {
        for b in 1..=bound {
            let mut key = [a, b];
            key.sort_unstable();
            *pairs.entry(key).or_default() += 1;
        }
    }
    let a2 = pairs.values().map(|&c| c * c).sum();
    (a3, a2)
}

/// Ordered non-diagonal solutions of `x1^m + x2^m = y1^m + y2^m`.
pub fn taxicab_brute(m: u32, bound: u64) -> u64 {
    let mut count = 0;
    for x1 in 1..=bound {
        for x2 in 1..=bound {
            for y1 in 1..=bound {
                for y2 in 1..=bound {
                    if pw(x1, m) + pw(x2, m) == pw(y1, m) + pw(y2, m)
                        && !((x1, x2) == (y1, y2) || (x1, x2) == (y2, y1))
                    {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_and_full_agree_at_b2() {
        for (k, m, n) in [(4, 3, 1), (3, 2, 1), (2, 3, 1), (3, 1, 1)] {
            let t = ExponentTriple::new(k, m, n).unwrap();
            assert_eq!(join_count(&t, 2), full_count_tiny(&t, 2), "({k},{m},{n})");
        }
    }

    #[test]
    fn pair_sets_small_landmark() {
        let sets = pair_system_sets(3, 1, 4);
        let s30 = sets.get(&30).unwrap();
        assert_eq!(s30.len(), 4);
        assert!(s30.contains(&[1, 4, 2, 3]));
    }
}
