//! Cantor pairing, the single coding of pairs used throughout the crate.
//!
//! `pair(a, b) = (a + b)(a + b + 1) / 2 + b`. Every natural number is the
//! code of exactly one pair, so [`unpair`] is total.

/// Cantor pairing of `(a, b)`, or `None` when the code does not fit in a `u64`.
pub fn pair(a: u64, b: u64) -> Option<u64> {
    let s = a as u128 + b as u128;
    let code = s.checked_mul(s + 1)? / 2 + b as u128;
    u64::try_from(code).ok()
}

/// Inverse of [`pair`].
pub fn unpair(code: u64) -> (u64, u64) {
    if code < 1 << 50 {
        // exact enough in f64 that one correction step suffices
        let mut w = (((8 * code + 1) as f64).sqrt() as u64 - 1) / 2;
        if w * (w + 1) / 2 > code {
            w -= 1;
        } else if (w + 1) * (w + 2) / 2 <= code {
            w += 1;
        }
        let b = code - w * (w + 1) / 2;
        return (w - b, b);
    }
    let z = code as u128;
    // w is the largest integer with w(w+1)/2 <= z
    let mut w = ((8 * z + 1).isqrt() - 1) / 2;
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let t = w * (w + 1) / 2;
    let b = z - t;
    let a = w - b;
    (a as u64, b as u64)
}

/// Key of the pair `(x, n)`: element `x` of a well order, payload `n`.
pub fn key(x: u64, n: u64) -> Option<u64> {
    pair(x, n)
}

/// Splits a key into `(element, payload)`.
pub fn split_key(k: u64) -> (u64, u64) {
    unpair(k)
}
