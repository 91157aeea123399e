//! Divisor-factorization solvers for the trailing pair system.
//!
//! For a fixed nonzero `h`, every solution of
//!
//! ```text
//! x1^k + x2^k - y1^k - y2^k = h
//! x1^m + x2^m = y1^m + y2^m
//! ```
//!
//! with `m ∈ {1, 2}` forces `d1 = y1 - x1` and `d2 = y2 - x1` to divide a
//! known nonzero integer, because the slice equation eliminates `x2` and the
//! remainder factors through the second forward difference of `t^k`. Walking
//! the (signed) divisor pairs and solving the one remaining polynomial
//! equation recovers the full solution set without touching `B^4` tuples.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::util::{isqrt_u128, power_guard};

/// One ordered solution of the trailing pair system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct PairSolution {
    pub x1: i64,
    pub x2: i64,
    pub y1: i64,
    pub y2: i64,
}

impl PairSolution {
    pub fn as_array(&self) -> [i64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }
}

/// Dense integer polynomial in the remaining unknown, with the divisor pair
/// `(d1, d2)` baked into its coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiPolynomial {
    /// Coefficients in ascending degree order; the top coefficient is nonzero.
    pub coefficients: Vec<i128>,
}

impl PsiPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Horner evaluation; `None` when an intermediate leaves `i128`, which
    /// at the guarded box sizes implies the true value is astronomically
    /// larger than any admissible divisor target.
    pub fn eval_checked(&self, x: i128) -> Option<i128> {
        let mut acc: i128 = 0;
        for &c in self.coefficients.iter().rev() {
            acc = acc.checked_mul(x)?.checked_add(c)?;
        }
        Some(acc)
    }

    fn eval_f64(&self, x: i128) -> f64 {
        let xf = x as f64;
        let mut acc = 0.0;
        for &c in self.coefficients.iter().rev() {
            acc = acc * xf + c as f64;
        }
        acc
    }

    /// True when every Horner intermediate stays inside `i128` for all
    /// `|x| <= max_abs_x`, so [`eval_checked`](Self::eval_checked) cannot
    /// miss a value there.
    fn exact_on(&self, max_abs_x: i128) -> bool {
        let mut bound: i128 = 0;
        for &c in self.coefficients.iter().rev() {
            bound = match bound
                .checked_mul(max_abs_x)
                .and_then(|v| v.checked_add(c.checked_abs().unwrap_or(i128::MAX)))
            {
                Some(v) => v,
                None => return false,
            };
        }
        true
    }

    /// Compares `P(x)` with `target`, falling back to the float estimate
    /// when the exact value overflows.
    fn cmp_at(&self, x: i128, target: i128) -> std::cmp::Ordering {
        match self.eval_checked(x) {
            Some(v) => v.cmp(&target),
            None => {
                let v = self.eval_f64(x);
                if v < target as f64 {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                }
            }
        }
    }
}

fn binom(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i as i128 + 1);
    }
    acc
}

fn checked_ipow(base: i128, exp: u32) -> Option<i128> {
    base.checked_pow(exp)
}

/// Builds `Ψ1` for exponent `k` and divisors `(d1, d2)`: the polynomial with
/// `d1·d2·Ψ1(x) = (x+d1+d2)^k - (x+d1)^k - (x+d2)^k + x^k` identically.
/// Its degree is `k-2` with leading coefficient `k(k-1)`.
pub fn build_psi1(k: u32, d1: i128, d2: i128) -> Result<PsiPolynomial> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "psi1 needs k >= 2, got k={k}"
        )));
    }
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidParameter("psi1 needs nonzero d1, d2".into()));
    }
    let overflow = || Error::Overflow {
        what: format!("psi1 coefficients for k={k}, d1={d1}, d2={d2}"),
    };
    let prod = d1.checked_mul(d2).ok_or_else(overflow)?;
    let mut coefficients = Vec::with_capacity(k as usize - 1);
    for j in 0..=k - 2 {
        let r = k - j;
        // S_r = (d1+d2)^r - d1^r - d2^r, always divisible by d1·d2.
        let s = d1
            .checked_add(d2)
            .and_then(|t| checked_ipow(t, r))
            .and_then(|t| t.checked_sub(checked_ipow(d1, r).unwrap_or(i128::MAX)))
            .and_then(|t| t.checked_sub(checked_ipow(d2, r)?))
            .ok_or_else(overflow)?;
        debug_assert_eq!(s % prod, 0);
        let c = binom(k, j).checked_mul(s / prod).ok_or_else(overflow)?;
        coefficients.push(c);
    }
    debug_assert_eq!(
        *coefficients.last().unwrap(),
        (k as i128) * (k as i128 - 1)
    );
    Ok(PsiPolynomial { coefficients })
}

fn poly_mul(a: &[i128], b: &[i128]) -> Option<Vec<i128>> {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = out[i + j].checked_add(ai.checked_mul(bj)?)?;
        }
    }
    Some(out)
}

fn poly_pow(a: &[i128], e: u32) -> Option<Vec<i128>> {
    let mut out = vec![1i128];
    for _ in 0..e {
        out = poly_mul(&out, a)?;
    }
    Some(out)
}

/// Builds `Ψ2` for exponent `k` and divisors `(d1, d2)`: the polynomial with
/// `d1·d2·Ψ2(x) = ((x+d1)^2+(x+d2)^2-x^2)^k - ((x+d1)^k+(x+d2)^k-x^k)^2`.
/// Its degree is `2k-2` for `k != 2`.
pub fn build_psi2(k: u32, d1: i128, d2: i128) -> Result<PsiPolynomial> {
    if k == 0 {
        return Err(Error::InvalidParameter("psi2 needs k >= 1".into()));
    }
    if d1 == 0 || d2 == 0 {
        return Err(Error::InvalidParameter("psi2 needs nonzero d1, d2".into()));
    }
    let overflow = || Error::Overflow {
        what: format!("psi2 coefficients for k={k}, d1={d1}, d2={d2}"),
    };
    let prod = d1.checked_mul(d2).ok_or_else(overflow)?;
    // (x+d1)^2 + (x+d2)^2 - x^2
    let a = vec![
        d1 * d1 + d2 * d2,
        2i128.checked_mul(d1 + d2).ok_or_else(overflow)?,
        1,
    ];
    // (x+d1)^k + (x+d2)^k - x^k
    let mut c = vec![0i128; k as usize + 1];
    for j in 0..=k {
        let term = binom(k, j)
            .checked_mul(
                checked_ipow(d1, k - j)
                    .and_then(|p| p.checked_add(checked_ipow(d2, k - j)?))
                    .ok_or_else(overflow)?,
            )
            .ok_or_else(overflow)?;
        c[j as usize] = term;
    }
    c[k as usize] -= 1; // the two leading 1s minus the x^k subtraction
    let ak = poly_pow(&a, k).ok_or_else(overflow)?;
    let cc = poly_mul(&c, &c).ok_or_else(overflow)?;
    let mut q = vec![0i128; ak.len().max(cc.len())];
    for (i, &v) in ak.iter().enumerate() {
        q[i] = v;
    }
    for (i, &v) in cc.iter().enumerate() {
        q[i] = q[i].checked_sub(v).ok_or_else(overflow)?;
    }
    while q.len() > 1 && *q.last().unwrap() == 0 {
        q.pop();
    }
    debug_assert!(q.len() <= 2 * k as usize - 1);
    for v in &mut q {
        debug_assert_eq!(*v % prod, 0);
        *v /= prod;
    }
    Ok(PsiPolynomial { coefficients: q })
}

static SMALL_PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
const SIEVE_LIMIT: u64 = 1 << 20;

fn small_primes() -> &'static [u64] {
    SMALL_PRIMES.get_or_init(|| {
        let n = SIEVE_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        let mut primes = Vec::new();
        for p in 2..=n {
            if sieve[p] {
                primes.push(p as u64);
                let mut q = p * p;
                while q <= n {
                    sieve[q] = false;
                    q += p;
                }
            }
        }
        primes
    })
}

/// Trial-division factorization; adequate at desk scale where every factored
/// quantity is at most a few times `B^k`.
fn factorize(mut n: u128) -> Vec<(u128, u32)> {
    debug_assert!(n >= 1);
    let mut out = Vec::new();
    for &p in small_primes() {
        let p = p as u128;
        if p * p > n {
            break;
        }
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        let limit = isqrt_u128(n);
        let mut p = (SIEVE_LIMIT as u128 | 1) + 2;
        while p <= limit {
            if n % p == 0 {
                let mut e = 0;
                while n % p == 0 {
                    n /= p;
                    e += 1;
                }
                out.push((p, e));
            }
            p += 2;
        }
        if n > 1 {
            out.push((n, 1));
        }
    }
    out
}

fn merge_factors(a: &[(u128, u32)], b: &[(u128, u32)]) -> Vec<(u128, u32)> {
    let mut out: Vec<(u128, u32)> = a.to_vec();
    for &(p, e) in b {
        match out.iter_mut().find(|(q, _)| *q == p) {
            Some((_, f)) => *f += e,
            None => out.push((p, e)),
        }
    }
    out.sort_unstable();
    out
}

/// All unsigned pairs `(d1, d2)` with `d1·d2` dividing the factored number,
/// both entries at most `limit`. Enumerated prime by prime.
fn divisor_pairs(factors: &[(u128, u32)], limit: u128) -> Vec<(i128, i128)> {
    let mut out = Vec::new();
    fn rec(
        factors: &[(u128, u32)],
        idx: usize,
        d1: u128,
        d2: u128,
        limit: u128,
        out: &mut Vec<(i128, i128)>,
    ) {
        if idx == factors.len() {
            out.push((d1 as i128, d2 as i128));
            return;
        }
        let (p, e) = factors[idx];
        let mut pa = 1u128;
        for a in 0..=e {
            let n1 = d1.saturating_mul(pa);
            if n1 > limit {
                break;
            }
            let mut pb = 1u128;
            for _b in 0..=e - a {
                let n2 = d2.saturating_mul(pb);
                if n2 > limit {
                    break;
                }
                rec(factors, idx + 1, n1, n2, limit, out);
                pb = pb.saturating_mul(p);
            }
            pa = pa.saturating_mul(p);
        }
    }
    rec(factors, 0, 1, 1, limit, &mut out);
    out
}

const SIGNS: [(i128, i128); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];

fn pow_i(x: i128, e: u32) -> i128 {
    x.pow(e)
}

/// Exact membership check against both defining equations and the box.
fn is_solution(k: u32, m: u32, h: i128, bound: i128, q: [i128; 4]) -> bool {
    let [x1, x2, y1, y2] = q;
    if !(q.iter().all(|&v| 1 <= v && v <= bound)) {
        return false;
    }
    pow_i(x1, k) + pow_i(x2, k) - pow_i(y1, k) - pow_i(y2, k) == h
        && pow_i(x1, m) + pow_i(x2, m) == pow_i(y1, m) + pow_i(y2, m)
}

/// The `x1` interval that keeps `x1`, `x1+d1`, `x1+d2`, `x1+d1+d2` in the box.
fn admissible_interval(d1: i128, d2: i128, bound: i128) -> (i128, i128) {
    let lo = [1, 1 - d1, 1 - d2, 1 - d1 - d2].into_iter().max().unwrap();
    let hi = [bound, bound - d1, bound - d2, bound - d1 - d2]
        .into_iter()
        .min()
        .unwrap();
    (lo, hi)
}

const SHORT_SCAN: i128 = 64;

/// Integer solutions of `psi(x) = target` on `[lo, hi]`.
///
/// Short intervals are scanned outright. Otherwise the turning points of the
/// polynomial all lie inside a Cauchy-type bound computed from its
/// derivative; that middle stretch is scanned and the two strictly monotone
/// tails are bisected.
fn integer_roots(psi: &PsiPolynomial, target: i128, lo: i128, hi: i128) -> Vec<i128> {
    let mut roots = Vec::new();
    if lo > hi {
        return roots;
    }
    let scan = |a: i128, b: i128, roots: &mut Vec<i128>| {
        let mut x = a;
        while x <= b {
            if psi.eval_checked(x) == Some(target) {
                roots.push(x);
            }
            x += 1;
        }
    };
    if hi - lo < SHORT_SCAN {
        scan(lo, hi, &mut roots);
        return roots;
    }
    match psi.degree() {
        0 => {
            if psi.coefficients[0] == target {
                // constant polynomial hitting the target everywhere
                scan(lo, hi, &mut roots);
            }
        }
        1 => {
            let c0 = psi.coefficients[0];
            let c1 = psi.coefficients[1];
            let num = target - c0;
            if num % c1 == 0 {
                let x = num / c1;
                if (lo..=hi).contains(&x) {
                    roots.push(x);
                }
            }
        }
        deg => {
            // All turning points satisfy |x| <= bound(psi'), so outside that
            // window the polynomial is strictly monotone.
            let lead = psi.coefficients[deg] as f64 * deg as f64;
            let mut max_ratio = 0.0f64;
            for (j, &c) in psi.coefficients.iter().enumerate().take(deg).skip(1) {
                let r = (c as f64 * j as f64 / lead).abs();
                max_ratio = max_ratio.max(r);
            }
            let x0 = (1.0 + max_ratio).ceil() as i128 + 2;
            let mid_lo = lo.max(-x0);
            let mid_hi = hi.min(x0);
            if mid_lo <= mid_hi {
                scan(mid_lo, mid_hi, &mut roots);
            }
            if lo < mid_lo.min(hi + 1) {
                bisect_monotone(psi, target, lo, (mid_lo - 1).min(hi), &mut roots);
            }
            if hi > mid_hi.max(lo - 1) {
                bisect_monotone(psi, target, (mid_hi + 1).max(lo), hi, &mut roots);
            }
            roots.sort_unstable();
            roots.dedup();
        }
    }
    roots
}

/// Binary search on a stretch where the polynomial is strictly monotone.
fn bisect_monotone(psi: &PsiPolynomial, target: i128, lo: i128, hi: i128, roots: &mut Vec<i128>) {
    use std::cmp::Ordering;
    if lo > hi {
        return;
    }
    let increasing = match (psi.eval_checked(lo), psi.eval_checked(hi)) {
        (Some(a), Some(b)) => b > a,
        _ => psi.eval_f64(hi) > psi.eval_f64(lo),
    };
    let (mut a, mut b) = (lo, hi);
    while a <= b {
        let mid = a + (b - a) / 2;
        let ord = psi.cmp_at(mid, target);
        match (ord, increasing) {
            (Ordering::Equal, _) => {
                roots.push(mid);
                return;
            }
            (Ordering::Less, true) | (Ordering::Greater, false) => a = mid + 1,
            (Ordering::Less, false) | (Ordering::Greater, true) => b = mid - 1,
        }
    }
}

/// Trailing-block solutions for `m = 1`, `k > 2` and fixed `h != 0`.
///
/// Writes `h = d1·d2·Ψ1(x1)` with `d1 = y1-x1`, `d2 = y2-x1`, walks every
/// signed divisor pair with entries inside `(-B, B)`, and solves the Ψ1
/// equation for `x1`; `x2 = x1+d1+d2` closes the linear slice.
pub fn solve_pair_m1(k: u32, h: i128, bound: u64) -> Result<Vec<PairSolution>> {
    if h == 0 {
        return Err(Error::InvalidParameter(
            "h must be nonzero; the diagonal case belongs to the tables".into(),
        ));
    }
    if k <= 2 {
        return Err(Error::InvalidParameter(format!(
            "m=1 divisor solver needs k > 2, got k={k} (use the (2,1) solver)"
        )));
    }
    power_guard(bound, k)?;
    let limit = (bound as u128).saturating_sub(1);
    if limit == 0 {
        return Ok(Vec::new());
    }
    let factors = factorize(h.unsigned_abs());
    let mut set = BTreeSet::new();
    for (a, b) in divisor_pairs(&factors, limit) {
        for (s1, s2) in SIGNS {
            let d1 = s1 * a;
            let d2 = s2 * b;
            let prod = d1 * d2;
            if prod == 0 || h % prod != 0 {
                continue;
            }
            let d3 = h / prod;
            let (lo, hi) = admissible_interval(d1, d2, bound as i128);
            if lo > hi {
                continue;
            }
            let psi = build_psi1(k, d1, d2)?;
            if !psi.exact_on(bound as i128) {
                return Err(Error::Overflow {
                    what: format!("psi1 evaluation for k={k}, h={h}, B={bound}"),
                });
            }
            for x1 in integer_roots(&psi, d3, lo, hi) {
                let quad = [x1, x1 + d1 + d2, x1 + d1, x1 + d2];
                debug_assert!(is_solution(k, 1, h, bound as i128, quad));
                if is_solution(k, 1, h, bound as i128, quad) {
                    set.insert(PairSolution {
                        x1: quad[0] as i64,
                        x2: quad[1] as i64,
                        y1: quad[2] as i64,
                        y2: quad[3] as i64,
                    });
                }
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Trailing-block solutions for `(k, m) = (2, 1)` and fixed `h != 0`.
///
/// Here `Ψ1 = 2`, so `2·d1·d2 = h`: odd `h` is impossible, and for even `h`
/// every `x1` keeping the four variables in the box yields a solution.
pub fn solve_pair_21(h: i128, bound: u64) -> Result<Vec<PairSolution>> {
    if h == 0 {
        return Err(Error::InvalidParameter(
            "h must be nonzero; the diagonal case belongs to the tables".into(),
        ));
    }
    power_guard(bound, 2)?;
    if h % 2 != 0 {
        return Ok(Vec::new());
    }
    let half = h / 2;
    let limit = (bound as u128).saturating_sub(1);
    if limit == 0 {
        return Ok(Vec::new());
    }
    let factors = factorize(half.unsigned_abs());
    let mut set = BTreeSet::new();
    for (a, b) in divisor_pairs(&factors, limit) {
        if (a as u128) * (b as u128) != half.unsigned_abs() {
            continue; // need the full product d1·d2 = h/2 here
        }
        for (s1, s2) in SIGNS {
            let d1 = s1 * a;
            let d2 = s2 * b;
            if d1 * d2 != half {
                continue;
            }
            let (lo, hi) = admissible_interval(d1, d2, bound as i128);
            for x1 in lo..=hi {
                let quad = [x1, x1 + d1 + d2, x1 + d1, x1 + d2];
                if is_solution(2, 1, h, bound as i128, quad) {
                    set.insert(PairSolution {
                        x1: quad[0] as i64,
                        x2: quad[1] as i64,
                        y1: quad[2] as i64,
                        y2: quad[3] as i64,
                    });
                }
            }
        }
    }
    Ok(set.into_iter().collect())
}

/// Trailing-block solutions for `m = 2`, `k != 2` and fixed `h != 0`.
///
/// For each fixed `x2` with `N = h·(2·x2^k - h) != 0`, the divisors
/// `d1 = y1-x1`, `d2 = y2-x1` of `N` determine `x1` through
/// `(x1+d1+d2)^2 = x2^2 + 2·d1·d2`. The square root admits an extraneous
/// branch and the `x2` role is one-sided, so candidates are validated
/// against both equations and the run is mirrored over the x1↔x2 swap
/// before deduplication.
pub fn solve_pair_m2(k: u32, h: i128, bound: u64) -> Result<Vec<PairSolution>> {
    if h == 0 {
        return Err(Error::InvalidParameter(
            "h must be nonzero; the diagonal case belongs to the tables".into(),
        ));
    }
    if k == 2 {
        return Err(Error::InvalidParameter(
            "m=2 divisor solver needs k != 2 (k = m is degenerate)".into(),
        ));
    }
    power_guard(bound, k.max(2))?;
    let limit = (bound as u128).saturating_sub(1);
    if limit == 0 {
        return Ok(Vec::new());
    }
    let h_factors = factorize(h.unsigned_abs());
    let mut set: BTreeSet<PairSolution> = BTreeSet::new();
    let overflow = || Error::Overflow {
        what: format!("m=2 solver intermediates for k={k}, h={h}, B={bound}"),
    };
    for x2 in 1..=bound as i128 {
        let t2 = 2i128
            .checked_mul(pow_i(x2, k))
            .and_then(|v| v.checked_sub(h))
            .ok_or_else(overflow)?;
        if t2 == 0 {
            // N vanishes only here; the mirrored role picks these up.
            continue;
        }
        let merged = merge_factors(&h_factors, &factorize(t2.unsigned_abs()));
        for (a, b) in divisor_pairs(&merged, limit) {
            for (s1, s2) in SIGNS {
                let d1 = s1 * a;
                let d2 = s2 * b;
                let disc = x2
                    .checked_mul(x2)
                    .and_then(|v| v.checked_add(2 * d1 * d2))
                    .ok_or_else(overflow)?;
                if disc < 0 {
                    continue;
                }
                let root = isqrt_u128(disc as u128) as i128;
                if root * root != disc {
                    continue;
                }
                let branches = if root == 0 {
                    vec![0]
                } else {
                    vec![root, -root]
                };
                for t in branches {
                    let x1 = t - d1 - d2;
                    let quad = [x1, x2, x1 + d1, x1 + d2];
                    if is_solution(k, 2, h, bound as i128, quad) {
                        set.insert(PairSolution {
                            x1: quad[0] as i64,
                            x2: quad[1] as i64,
                            y1: quad[2] as i64,
                            y2: quad[3] as i64,
                        });
                    }
                }
            }
        }
    }
    // Undo the one-sided role of x2.
    let mirrored: Vec<PairSolution> = set
        .iter()
        .map(|s| PairSolution {
            x1: s.x2,
            x2: s.x1,
            y1: s.y1,
            y2: s.y2,
        })
        .collect();
    set.extend(mirrored);
    Ok(set.into_iter().collect())
}

/// Dispatches to the solver covering `(k, m)`, erroring when none applies.
pub fn solve_pair(k: u32, m: u32, h: i128, bound: u64) -> Result<Vec<PairSolution>> {
    match (k, m) {
        (2, 1) => solve_pair_21(h, bound),
        (k, 1) if k > 2 => solve_pair_m1(k, h, bound),
        (k, 2) if k != 2 => solve_pair_m2(k, h, bound),
        _ => Err(Error::InvalidParameter(format!(
            "no divisor solver for (k,m)=({k},{m}); supported: m=1 with k>=2, m=2 with k!=2"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn psi1_spec_examples() {
        let p = build_psi1(3, 1, 2).unwrap();
        assert_eq!(p.coefficients, vec![9, 6]); // 6x + 9
        let p = build_psi1(2, 5, -7).unwrap();
        assert_eq!(p.coefficients, vec![2]); // constant 2
        let p = build_psi1(3, -1, -1).unwrap();
        assert_eq!(p.coefficients, vec![-6, 6]); // 6x - 6
    }

    #[test]
    fn psi1_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let k = rng.gen_range(2..=9u32);
            let d1 = rng.gen_range(-40..=40i128);
            let d2 = rng.gen_range(-40..=40i128);
            if d1 == 0 || d2 == 0 {
                continue;
            }
            let psi = build_psi1(k, d1, d2).unwrap();
            assert_eq!(psi.degree(), k as usize - 2);
            for x in -((k + 2) as i128)..=(k + 2) as i128 {
                let second_diff = (x + d1 + d2).pow(k) - (x + d1).pow(k) - (x + d2).pow(k)
                    + x.pow(k);
                assert_eq!(
                    d1 * d2 * psi.eval_checked(x).unwrap(),
                    second_diff,
                    "k={k} d1={d1} d2={d2} x={x}"
                );
            }
        }
    }

    #[test]
    fn psi2_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let k = rng.gen_range(1..=6u32);
            if k == 2 {
                continue;
            }
            let d1 = rng.gen_range(-12..=12i128);
            let d2 = rng.gen_range(-12..=12i128);
            if d1 == 0 || d2 == 0 {
                continue;
            }
            let psi = build_psi2(k, d1, d2).unwrap();
            assert_eq!(psi.degree(), 2 * k as usize - 2, "k={k}");
            for x in -6i128..=6 {
                let lhs = ((x + d1).pow(2) + (x + d2).pow(2) - x.pow(2)).pow(k)
                    - ((x + d1).pow(k) + (x + d2).pow(k) - x.pow(k)).pow(2);
                assert_eq!(d1 * d2 * psi.eval_checked(x).unwrap(), lhs);
            }
        }
    }

    #[test]
    fn psi2_constant_for_k1() {
        let psi = build_psi2(1, 3, -5).unwrap();
        assert_eq!(psi.coefficients, vec![-2]);
    }

    #[test]
    fn m1_spec_examples() {
        let sols = solve_pair_m1(3, 30, 4).unwrap();
        assert_eq!(sols.len(), 4);
        assert!(sols.contains(&PairSolution {
            x1: 1,
            x2: 4,
            y1: 2,
            y2: 3
        }));
        assert!(solve_pair_m1(3, 1, 100).unwrap().is_empty());
    }

    #[test]
    fn m1_matches_brute_force() {
        for k in [3u32, 4] {
            let b = 20;
            let brute = oracle::pair_system_sets(k, 1, b);
            for h in (-60..=60i128).filter(|&h| h != 0) {
                let sols = solve_pair_m1(k, h, b).unwrap();
                let got: std::collections::BTreeSet<[i64; 4]> =
                    sols.iter().map(|s| s.as_array()).collect();
                let want = brute.get(&h).cloned().unwrap_or_default();
                assert_eq!(got, want, "k={k} h={h}");
            }
        }
    }

    #[test]
    fn solver_21_spec_examples() {
        let sols = solve_pair_21(2, 3).unwrap();
        assert_eq!(sols.len(), 2);
        assert!(solve_pair_21(1, 100).unwrap().is_empty()); // parity
        assert_eq!(solve_pair_21(2, 10).unwrap().len(), 16); // 2(B-2) per sign class
    }

    #[test]
    fn solver_21_matches_brute_force() {
        let b = 15;
        let brute = oracle::pair_system_sets(2, 1, b);
        for h in (-40..=40i128).filter(|&h| h != 0) {
            let got: std::collections::BTreeSet<[i64; 4]> = solve_pair_21(h, b)
                .unwrap()
                .iter()
                .map(|s| s.as_array())
                .collect();
            let want = brute.get(&h).cloned().unwrap_or_default();
            assert_eq!(got, want, "h={h}");
        }
    }

    #[test]
    fn m2_matches_brute_force_k3() {
        let b = 20;
        let brute = oracle::pair_system_sets(3, 2, b);
        for h in (-100..=100i128).filter(|&h| h != 0) {
            let got: std::collections::BTreeSet<[i64; 4]> = solve_pair_m2(3, h, b)
                .unwrap()
                .iter()
                .map(|s| s.as_array())
                .collect();
            let want = brute.get(&h).cloned().unwrap_or_default();
            assert_eq!(got, want, "h={h}");
        }
    }

    #[test]
    fn m2_linear_case_matches_brute_force() {
        let b = 5;
        let brute = oracle::pair_system_sets(1, 2, b);
        for h in (-8..=8i128).filter(|&h| h != 0) {
            let got: std::collections::BTreeSet<[i64; 4]> = solve_pair_m2(1, h, b)
                .unwrap()
                .iter()
                .map(|s| s.as_array())
                .collect();
            let want = brute.get(&h).cloned().unwrap_or_default();
            assert_eq!(got, want, "h={h}");
        }
    }

    #[test]
    fn m2_vanishing_n_branch() {
        // h = 2·x2^k for some x2 in the box: that single x2 iteration is
        // skipped, the mirrored role restores its solutions.
        let b = 10;
        let h = 2 * 3i128.pow(3); // 54
        let brute = oracle::pair_system_sets(3, 2, b);
        let got: std::collections::BTreeSet<[i64; 4]> = solve_pair_m2(3, h, b)
            .unwrap()
            .iter()
            .map(|s| s.as_array())
            .collect();
        assert_eq!(got, brute.get(&h).cloned().unwrap_or_default());
    }

    #[test]
    fn counts_agree_with_v_table() {
        use crate::tables::build_v_table;
        use crate::triple::BoxConfig;
        let cfg = BoxConfig::new(12);
        for (k, m) in [(3u32, 1u32), (4, 1), (2, 1), (3, 2)] {
            let v = build_v_table(k, m, &cfg).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..40 {
                let h = rng.gen_range(1..=2 * 12i128.pow(k)) * if rng.gen() { 1 } else { -1 };
                let sols = solve_pair(k, m, h, 12).unwrap();
                assert_eq!(sols.len() as u64, v.entry(h), "k={k} m={m} h={h}");
            }
        }
    }

    #[test]
    fn rejects_h_zero_and_bad_shapes() {
        assert!(solve_pair_m1(3, 0, 10).is_err());
        assert!(solve_pair_21(0, 10).is_err());
        assert!(solve_pair_m2(3, 0, 10).is_err());
        assert!(solve_pair(3, 3, 5, 10).is_err());
        assert!(solve_pair_m1(2, 5, 10).is_err());
        assert!(solve_pair_m2(2, 5, 10).is_err());
    }

    #[test]
    fn root_finding_long_intervals() {
        // force the bisection path with a wide interval
        let psi = build_psi1(4, 1, 1).unwrap(); // 12x^2 + 24x + 14
        assert_eq!(psi.coefficients, vec![14, 24, 12]);
        // 12x^2 + 24x + 14 = 590 at x = 6 and x = -8
        assert_eq!(integer_roots(&psi, 590, -2000, 2000), vec![-8, 6]);
        assert!(integer_roots(&psi, 591, -2000, 2000).is_empty());
        // linear fast path
        let psi3 = build_psi1(3, 1, 2).unwrap();
        assert_eq!(integer_roots(&psi3, 15, -500, 500), vec![1]);
        assert!(integer_roots(&psi3, 16, -500, 500).is_empty());
    }
}
