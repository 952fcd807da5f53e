//! Exact integer combinatorics.

/// Binomial coefficient `C(n, k)` in exact 128-bit arithmetic (0 if `k > n`).
///
/// # Panics
/// Panics on overflow of `u128`, which cannot happen for `n ≤ 128`.
pub fn binomial(n: u64, k: u64) -> u128 {
    checked_binomial(n, k).expect("binomial overflow")
}

/// `C(n, k)`, or `None` if an intermediate product overflows `u128`.
pub fn checked_binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n−i) is divisible by (i+1) after the multiplication.
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// `n!` in exact 128-bit arithmetic.
///
/// # Panics
/// Panics for `n > 34` (overflow).
pub fn factorial(n: u64) -> u128 {
    (1..=u128::from(n)).fold(1u128, |acc, i| {
        acc.checked_mul(i).expect("factorial overflow")
    })
}
