//! Small integer helpers shared across modules.

use crate::error::{Error, Result};

/// `x^e` in `i128`, or `None` on overflow.
pub(crate) fn checked_pow(x: u64, e: u32) -> Option<i128> {
    (x as i128).checked_pow(e)
}

/// Guards the global 128-bit ceiling: `5·B^k` must fit `i128`.
pub(crate) fn power_guard(bound: u64, exp: u32) -> Result<i128> {
    checked_pow(bound, exp)
        .and_then(|p| p.checked_mul(5))
        .map(|p| p / 5)
        .ok_or_else(|| Error::Overflow {
            what: format!("5·{bound}^{exp} exceeds i128"),
        })
}

/// Powers `0, 1^e, 2^e, .., b^e` (index 0 is a placeholder).
pub(crate) fn power_table(bound: u64, exp: u32) -> Result<Vec<i128>> {
    power_guard(bound, exp)?;
    let mut t = Vec::with_capacity(bound as usize + 1);
    t.push(0);
    for x in 1..=bound {
        t.push((x as i128).pow(exp));
    }
    Ok(t)
}

/// Floor square root.
pub(crate) fn isqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    // Start above the root (f64 seed plus a 2^-40 relative margin), then
    // Newton steps descend to the floor.
    let seed = (n as f64).sqrt() as u128;
    let mut x = (seed + (seed >> 40) + 2).min(1u128 << 64);
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            break;
        }
        x = y;
    }
    while x.checked_mul(x).map_or(true, |sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isqrt_exact_and_floor() {
        for n in 0u128..2000 {
            let s = isqrt_u128(n);
            assert!(s * s <= n && (s + 1) * (s + 1) > n, "n={n}");
        }
        assert_eq!(isqrt_u128(u128::MAX), (1 << 64) - 1);
    }

    #[test]
    fn guard_rejects_huge_boxes() {
        assert!(power_guard(1_000_000_000, 12).is_err());
        assert!(power_guard(1000, 12).is_ok());
    }

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd(0, 5), 5);
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(7, 1), 1);
    }
}
