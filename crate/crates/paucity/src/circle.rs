//! Weyl sums, exact quadrature, and the major-arc dissection.
//!
//! The two-parameter exponential sum `f(α1, α2) = Σ_{x<=B} e(α1·x^{k1} +
//! α2·x^{k2})` is evaluated with exact phase reduction: every `f64` argument
//! is a dyadic rational `±m/2^q`, so `α·x^k mod 1` is computed in integer
//! arithmetic before any trigonometry. The quadrature engine averages the
//! integrand over equispaced grids strictly wider than its trigonometric
//! degree, which makes the average equal to the underlying solution count
//! exactly, up to floating accumulation handled by compensated sums.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tables::single_constraint_count;
use crate::triple::{BoxConfig, ExponentTriple, MAX_EXPONENT};
use crate::util::{gcd, power_guard};

const TAU: f64 = std::f64::consts::TAU;

/// 256-bit little-endian accumulator, just wide enough for
/// `mantissa(f64) · B^k` under the global `5·B^k <= i128` guard.
#[derive(Clone, Copy)]
struct U256([u64; 4]);

impl U256 {
    fn from_u64(x: u64) -> Self {
        U256([x, 0, 0, 0])
    }

    fn mul_u64(self, m: u64) -> Self {
        let mut out = [0u64; 4];
        let mut carry: u128 = 0;
        for i in 0..4 {
            let t = self.0[i] as u128 * m as u128 + carry;
            out[i] = t as u64;
            carry = t >> 64;
        }
        debug_assert_eq!(carry, 0, "U256 overflow");
        U256(out)
    }

    fn pow_u64(x: u64, e: u32) -> Self {
        let mut acc = U256::from_u64(1);
        for _ in 0..e {
            acc = acc.mul_u64(x);
        }
        acc
    }

    /// Keeps the low `q` bits.
    fn mask_low(mut self, q: u32) -> Self {
        if q >= 256 {
            return self;
        }
        let full = (q / 64) as usize;
        let rem = q % 64;
        for i in 0..4 {
            if i > full || (i == full && rem == 0) {
                self.0[i] = 0;
            } else if i == full {
                self.0[i] &= (1u64 << rem) - 1;
            }
        }
        self
    }

    fn to_f64(self) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &l)| l as f64 * (2f64).powi(64 * i as i32))
            .sum()
    }
}

/// A finite `f64` decomposed as `±m·2^{-q}` with odd `m` (or flagged as an
/// integer, whose multiples contribute no phase).
#[derive(Clone, Copy)]
struct Dyadic {
    neg: bool,
    mantissa: u64,
    q: u32,
    integral: bool,
}

impl Dyadic {
    fn new(a: f64) -> Self {
        debug_assert!(a.is_finite());
        if a == 0.0 {
            return Dyadic {
                neg: false,
                mantissa: 0,
                q: 0,
                integral: true,
            };
        }
        let bits = a.to_bits();
        let neg = a < 0.0;
        let exp_bits = ((bits >> 52) & 0x7ff) as i32;
        let frac = bits & ((1u64 << 52) - 1);
        let (mut m, mut e) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        let tz = m.trailing_zeros();
        m >>= tz;
        e += tz as i32;
        if e >= 0 {
            // a is an integer: a·t ∈ Z for every integer t.
            return Dyadic {
                neg,
                mantissa: m,
                q: 0,
                integral: true,
            };
        }
        Dyadic {
            neg,
            mantissa: m,
            q: (-e) as u32,
            integral: false,
        }
    }

    /// Fractional part of `a·t` in `[0, 1)`, exact up to the final `f64`
    /// rounding: `(m·t mod 2^q) / 2^q` with the product held in 256 bits.
    fn frac_mul(&self, t: U256) -> f64 {
        if self.integral {
            return 0.0;
        }
        let prod = t.mul_u64(self.mantissa);
        let frac_bits = prod.mask_low(self.q);
        let mut phase = frac_bits.to_f64() * (2f64).powi(-(self.q as i32));
        if phase >= 1.0 {
            phase = 0.0; // rounding pushed m·t/2^q up to the next integer
        }
        if self.neg && phase > 0.0 {
            phase = 1.0 - phase;
        }
        phase
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Default)]
struct Kbn {
    sum: f64,
    comp: f64,
}

impl Kbn {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.comp += if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// The exponential sum `Σ_{1<=x<=B} e(α1·x^{k1} + α2·x^{k2})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WeylSum {
    pub k1: u32,
    pub k2: u32,
    pub bound: u64,
}

impl WeylSum {
    pub fn new(k1: u32, k2: u32, bound: u64) -> Result<Self> {
        for (name, e) in [("k1", k1), ("k2", k2)] {
            if e == 0 || e > MAX_EXPONENT {
                return Err(Error::InvalidParameter(format!(
                    "exponent {name}={e} out of range 1..={MAX_EXPONENT}"
                )));
            }
        }
        if bound == 0 {
            return Err(Error::InvalidParameter("box bound must be >= 1".into()));
        }
        power_guard(bound, k1.max(k2))?;
        Ok(Self { k1, k2, bound })
    }

    /// Evaluates the sum at real arguments. Phases are reduced mod 1 exactly
    /// (every `f64` is a dyadic rational); the value is periodic with period
    /// one in each argument and satisfies `|f| <= B`, `f(0,0) = B`.
    pub fn eval(&self, a1: f64, a2: f64) -> Complex64 {
        let d1 = Dyadic::new(a1);
        let d2 = Dyadic::new(a2);
        let mut re = Kbn::default();
        let mut im = Kbn::default();
        for x in 1..=self.bound {
            let p1 = d1.frac_mul(U256::pow_u64(x, self.k1));
            let p2 = d2.frac_mul(U256::pow_u64(x, self.k2));
            let mut phase = p1 + p2;
            if phase >= 1.0 {
                phase -= 1.0;
            }
            // center to [-1/2, 1/2] before scaling: smaller trig arguments
            let centered = if phase > 0.5 { phase - 1.0 } else { phase };
            let (s, c) = (TAU * centered).sin_cos();
            re.add(c);
            im.add(s);
        }
        Complex64::new(re.value(), im.value())
    }
}

/// Budget on `grid_α · (grid_β + grid_γ) · B` inner evaluations.
const QUADRATURE_EVAL_BUDGET: u128 = 6_000_000_000;
const QUADRATURE_INT_TOLERANCE: f64 = 1e-3;

/// Counts solutions of the full linked system by integrating
/// `|f_{k,n}(α,β)|^6 · |f_{k,m}(α,γ)|^4` over `[0,1)^3` with equispaced
/// grids wider than the trigonometric degree in each variable, making the
/// average exact; the result must land within `1e-3` of an integer.
///
/// The integrand splits into a `(α,β)` and a `(α,γ)` factor, so for each
/// grid point of α the two inner averages are formed once and multiplied.
pub fn quadrature_count(t: &ExponentTriple, cfg: &BoxConfig) -> Result<u128> {
    if t.is_degenerate() {
        return Err(Error::Degenerate {
            k: t.k,
            m: t.m,
            n: t.n,
        });
    }
    cfg.check_bound()?;
    let b = cfg.bound;
    let bk = power_guard(b, t.k)? as u128;
    let bn = power_guard(b, t.n)? as u128;
    let bm = power_guard(b, t.m)? as u128;
    // grid = 2·degree + 1, degrees 5B^k, 3B^n, 2B^m
    let ga = 10 * bk + 1;
    let gb = 6 * bn + 1;
    let gc = 4 * bm + 1;
    let work = ga * (gb + gc) * b as u128;
    if work > QUADRATURE_EVAL_BUDGET {
        return Err(Error::BudgetExceeded {
            what: "quadrature grid".to_string(),
            needed: work,
            budget: QUADRATURE_EVAL_BUDGET,
        });
    }
    let (ga, gb, gc) = (ga as u64, gb as u64, gc as u64);

    let xk: Vec<u64> = (1..=b).map(|x| (x as i128).pow(t.k) as u64).collect();
    let xn: Vec<u64> = (1..=b).map(|x| ((x as i128).pow(t.n) as u64) % gb).collect();
    let xm: Vec<u64> = (1..=b).map(|x| ((x as i128).pow(t.m) as u64) % gc).collect();

    let inner = |j: u64| -> f64 {
        // α = j / ga; phases (j·x^k mod ga)/ga are exact integers over ga.
        let pa: Vec<f64> = xk
            .iter()
            .map(|&v| (((j as u128 * v as u128) % ga as u128) as u64) as f64 / ga as f64)
            .collect();
        let mut su = Kbn::default();
        for i in 0..gb {
            let mut re = Kbn::default();
            let mut im = Kbn::default();
            for (x, &p) in pa.iter().enumerate() {
                let pb = ((i as u128 * xn[x] as u128) % gb as u128) as f64 / gb as f64;
                let mut phase = p + pb;
                if phase >= 1.0 {
                    phase -= 1.0;
                }
                let centered = if phase > 0.5 { phase - 1.0 } else { phase };
                let (s, c) = (TAU * centered).sin_cos();
                re.add(c);
                im.add(s);
            }
            let p2 = re.value() * re.value() + im.value() * im.value();
            su.add(p2 * p2 * p2); // |f|^6
        }
        let mut sv = Kbn::default();
        for i in 0..gc {
            let mut re = Kbn::default();
            let mut im = Kbn::default();
            for (x, &p) in pa.iter().enumerate() {
                let pc = ((i as u128 * xm[x] as u128) % gc as u128) as f64 / gc as f64;
                let mut phase = p + pc;
                if phase >= 1.0 {
                    phase -= 1.0;
                }
                let centered = if phase > 0.5 { phase - 1.0 } else { phase };
                let (s, c) = (TAU * centered).sin_cos();
                re.add(c);
                im.add(s);
            }
            let p2 = re.value() * re.value() + im.value() * im.value();
            sv.add(p2 * p2); // |f|^4
        }
        (su.value() / gb as f64) * (sv.value() / gc as f64)
    };

    // Fill per-α values in parallel, reduce sequentially in index order so
    // the float result is identical for every parallel width.
    let chunk = (ga as usize).div_ceil(cfg.chunks()).max(1);
    let values: Vec<f64> = (0..ga)
        .collect::<Vec<u64>>()
        .par_chunks(chunk)
        .flat_map_iter(|js| js.iter().map(|&j| inner(j)).collect::<Vec<f64>>())
        .collect();
    let mut acc = Kbn::default();
    for v in values {
        acc.add(v);
    }
    let integral = acc.value() / ga as f64;
    let rounded = integral.round();
    if (integral - rounded).abs() > QUADRATURE_INT_TOLERANCE {
        return Err(Error::NotIntegral {
            value: integral,
            tolerance: QUADRATURE_INT_TOLERANCE,
        });
    }
    Ok(rounded.max(0.0) as u128)
}

/// One interval `|qα - a| <= B^{δ-3}` around `a/q`, clipped to `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajorArc {
    pub q: u64,
    pub a: u64,
    pub center: f64,
    pub halfwidth: f64,
}

/// The major-arc dissection: all arcs with `q <= B^δ`, `0 <= a <= q`,
/// `gcd(a, q) = 1`, plus their merged union and its exact measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcDissection {
    pub delta: f64,
    #[serde(rename = "b")]
    pub bound: u64,
    pub q_max: u64,
    pub arcs: Vec<MajorArc>,
    /// Length of the union after overlap merging.
    pub measure: f64,
    #[serde(skip)]
    merged: Vec<(f64, f64)>,
}

impl ArcDissection {
    /// True when `alpha` lies inside some major arc.
    pub fn contains(&self, alpha: f64) -> bool {
        let i = self.merged.partition_point(|&(lo, _)| lo <= alpha);
        i > 0 && alpha <= self.merged[i - 1].1
    }

    /// Disjoint intervals covering the union, ascending.
    pub fn merged_intervals(&self) -> &[(f64, f64)] {
        &self.merged
    }
}

/// Builds the dissection for `0 < δ < 1/3`, `B >= 2`.
///
/// `q` runs up to the nearest integer to `B^δ`; with floor truncation the
/// denominator tier that sits a hair below an integer (e.g. `10^0.3 =
/// 1.995..`) would drop out of the dissection it plainly belongs to.
pub fn build_major_arcs(delta: f64, bound: u64) -> Result<ArcDissection> {
    if !(delta > 0.0 && delta < 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!(
            "delta must lie in (0, 1/3), got {delta}"
        )));
    }
    if bound < 2 {
        return Err(Error::InvalidParameter("arc dissection needs B >= 2".into()));
    }
    let bf = bound as f64;
    let q_max = (bf.powf(delta).round() as u64).max(1);
    let width = bf.powf(delta - 3.0);
    let mut arcs = Vec::new();
    for q in 1..=q_max {
        for a in 0..=q {
            if gcd(a, q) != 1 {
                continue;
            }
            arcs.push(MajorArc {
                q,
                a,
                center: a as f64 / q as f64,
                halfwidth: width / q as f64,
            });
        }
    }
    let mut raw: Vec<(f64, f64)> = arcs
        .iter()
        .map(|arc| {
            (
                (arc.center - arc.halfwidth).max(0.0),
                (arc.center + arc.halfwidth).min(1.0),
            )
        })
        .collect();
    raw.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in raw {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let measure = merged.iter().map(|&(lo, hi)| hi - lo).sum();
    Ok(ArcDissection {
        delta,
        bound,
        q_max,
        arcs,
        measure,
        merged,
    })
}

/// Rigorous upper bound for the major-arc share of the count: the number of
/// leading-block slice solutions times the number of trailing-block slice
/// solutions times the measure of the union. All three factors are exact.
pub fn major_arc_bound(t: &ExponentTriple, delta: f64, cfg: &BoxConfig) -> Result<f64> {
    cfg.check_bound()?;
    let dissection = build_major_arcs(delta, cfg.bound)?;
    let lead = single_constraint_count(t.n, 3, cfg.bound)? as f64;
    let trail = single_constraint_count(t.m, 2, cfg.bound)? as f64;
    Ok(lead * trail * dissection.measure)
}

/// Supremum scan of `|f_{3,1}|` over pseudo-random minor-arc points.
///
/// Draws `samples` pairs `(α, β)` with α rejected against the dissection and
/// β uniform, all from a seeded generator, and returns the largest modulus.
/// Deterministic for a fixed seed and bit-identical for every parallel
/// width (points are drawn sequentially, evaluated in parallel, reduced in
/// index order).
pub fn minor_arc_weyl_scan(
    delta: f64,
    cfg: &BoxConfig,
    samples: u32,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    cfg.check_bound()?;
    let dissection = build_major_arcs(delta, cfg.bound)?;
    let ws = WeylSum::new(3, 1, cfg.bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let alpha = loop {
            let a: f64 = rng.gen();
            if !dissection.contains(a) {
                break a;
            }
        };
        let beta: f64 = rng.gen();
        points.push((alpha, beta));
    }
    let chunk = points.len().div_ceil(cfg.chunks()).max(1);
    let moduli: Vec<f64> = points
        .par_chunks(chunk)
        .flat_map_iter(|ps| ps.iter().map(|&(a, b)| ws.eval(a, b).norm()).collect::<Vec<f64>>())
        .collect();
    Ok(moduli.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tables::count_solutions;

    #[test]
    fn weyl_trivial_values() {
        let ws = WeylSum::new(3, 1, 17).unwrap();
        let v = ws.eval(0.0, 0.0);
        assert_eq!(v, Complex64::new(17.0, 0.0));

        let ws = WeylSum::new(3, 1, 1).unwrap();
        for (a, b) in [(0.3, 0.25), (0.9, 0.0), (0.125, 0.625)] {
            let v = ws.eval(a, b);
            let want = Complex64::new((TAU * (a + b)).cos(), (TAU * (a + b)).sin());
            assert!((v - want).norm() < 1e-9, "({a},{b})");
        }
    }

    #[test]
    fn weyl_parity_cancellation() {
        // x^3 ≡ x (mod 2), so at α = 1/2 the terms alternate sign.
        let ws = WeylSum::new(3, 1, 64).unwrap();
        assert!(ws.eval(0.5, 0.0).norm() < 1e-9);
    }

    #[test]
    fn weyl_period_one() {
        let ws = WeylSum::new(3, 2, 40).unwrap();
        // dyadic α with few mantissa bits: α + 1 is exact, values identical
        let a = 0.15625;
        assert_eq!(ws.eval(a, 0.375), ws.eval(a + 1.0, 0.375));
        // generic arguments: equal up to roundoff in the shifted argument
        let a = 0.2761;
        assert!((ws.eval(a, 0.11) - ws.eval(a + 1.0, 0.11)).norm() < 1e-9);
    }

    #[test]
    fn weyl_modulus_bounded() {
        let ws = WeylSum::new(4, 2, 100).unwrap();
        for i in 0..50 {
            let a = i as f64 / 50.0;
            assert!(ws.eval(a, 1.0 - a).norm() <= 100.0 + 1e-9);
        }
    }

    #[test]
    fn quadrature_trivial_box() {
        let t = ExponentTriple::new(5, 3, 2).unwrap();
        assert_eq!(quadrature_count(&t, &BoxConfig::new(1)).unwrap(), 1);
    }

    #[test]
    fn quadrature_matches_convolution_count() {
        for (k, m, n, b) in [(4, 3, 1, 2), (3, 2, 1, 3), (3, 1, 2, 2)] {
            let t = ExponentTriple::new(k, m, n).unwrap();
            let cfg = BoxConfig::new(b);
            assert_eq!(
                quadrature_count(&t, &cfg).unwrap(),
                count_solutions(&t, &cfg).unwrap().total,
                "({k},{m},{n}) B={b}"
            );
        }
    }

    #[test]
    fn quadrature_grid_guard() {
        let t = ExponentTriple::new(5, 3, 2).unwrap();
        assert!(matches!(
            quadrature_count(&t, &BoxConfig::new(64)),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    /// Averaging e(t·j/G) over j < G returns [t = 0] when G > |t|.
    #[test]
    fn grid_exactness_on_monomials() {
        let g = 101u64;
        for t in [-100i64, -37, 0, 1, 55, 100] {
            let mut re = Kbn::default();
            let mut im = Kbn::default();
            for j in 0..g {
                let phase = (t as f64 * j as f64 / g as f64).rem_euclid(1.0);
                let (s, c) = (TAU * phase).sin_cos();
                re.add(c);
                im.add(s);
            }
            let avg = Complex64::new(re.value() / g as f64, im.value() / g as f64);
            let want = if t == 0 { 1.0 } else { 0.0 };
            assert!((avg - Complex64::new(want, 0.0)).norm() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn arcs_spec_example() {
        let d = build_major_arcs(0.3, 10).unwrap();
        let labels: Vec<(u64, u64)> = d.arcs.iter().map(|a| (a.q, a.a)).collect();
        assert_eq!(labels, vec![(1, 0), (1, 1), (2, 1)]);
        let want = 3.0 * 10f64.powf(-2.7);
        assert!((d.measure - want).abs() < 1e-12);
    }

    #[test]
    fn arcs_tiny_delta_keeps_only_q1() {
        let d = build_major_arcs(0.001, 100).unwrap();
        assert_eq!(d.q_max, 1);
        assert_eq!(d.arcs.len(), 2);
        let want = 2.0 * 100f64.powf(0.001 - 3.0);
        assert!((d.measure - want).abs() < 1e-15);
    }

    #[test]
    fn arcs_measure_bound() {
        for b in [100u64, 1000] {
            let d = build_major_arcs(0.25, b).unwrap();
            assert!(d.measure <= 4.0 * (b as f64).powf(2.0 * 0.25 - 3.0));
        }
    }

    #[test]
    fn arcs_disjoint_after_merge_and_membership() {
        let d = build_major_arcs(0.32, 50).unwrap();
        let m = d.merged_intervals();
        assert!(m.windows(2).all(|w| w[0].1 < w[1].0));
        assert!((d.measure - m.iter().map(|&(lo, hi)| hi - lo).sum::<f64>()).abs() < 1e-15);
        for arc in &d.arcs {
            assert!(d.contains(arc.center.clamp(0.0, 1.0 - 1e-12)));
        }
        assert!(!d.contains(0.2761));
    }

    #[test]
    fn major_arc_bound_decreases_relative_to_b5() {
        let t = ExponentTriple::new(3, 2, 1).unwrap();
        let mut prev = f64::INFINITY;
        for b in [16u64, 32, 64] {
            let bound = major_arc_bound(&t, 0.25, &BoxConfig::new(b)).unwrap();
            let ratio = bound / (b as f64).powi(5);
            assert!(ratio < prev, "B={b}");
            prev = ratio;
        }
    }

    #[test]
    fn scan_is_deterministic_and_bounded() {
        let cfg = BoxConfig::new(32);
        let s1 = minor_arc_weyl_scan(0.25, &cfg, 256, 7).unwrap();
        let s2 = minor_arc_weyl_scan(0.25, &cfg.with_parallel_width(1), 256, 7).unwrap();
        let s3 = minor_arc_weyl_scan(0.25, &cfg.with_parallel_width(8), 256, 7).unwrap();
        assert_eq!(s1.to_bits(), s2.to_bits());
        assert_eq!(s1.to_bits(), s3.to_bits());
        assert!(s1 <= 32.0);
        let other = minor_arc_weyl_scan(0.25, &cfg, 256, 8).unwrap();
        assert_ne!(s1.to_bits(), other.to_bits());
    }

    #[test]
    fn scan_points_avoid_major_arcs() {
        let cfg = BoxConfig::new(64);
        let d = build_major_arcs(0.25, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..2000 {
            let a: f64 = rng.gen();
            if d.contains(a) {
                continue;
            }
            // distance to every a/q with q <= q_max exceeds width/q
            for q in 1..=d.q_max {
                let nearest = (a * q as f64).round() / q as f64;
                let width = (64f64).powf(0.25 - 3.0) / q as f64;
                assert!((a - nearest).abs() > width || nearest > 1.0);
            }
        }
    }
}
