//! Base-t digit arithmetic for offset decomposition.
//!
//! The solver splits every point offset `j` into `h` base-t digits, where
//! `t` is the smallest base whose `h`-digit span covers the instance
//! (`t^h >= n`). This module computes that base, extracts and recomposes
//! digits, and precomputes the per-level constants (powers, strides,
//! digit-prefix values of `n-1`) that keep each solver step O(t).

use crate::error::{Error, Result};

/// `t^h`, saturating at `u64::MAX`.
fn saturating_pow(t: u64, h: u32) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..h {
        acc = acc.saturating_mul(t);
    }
    acc
}

/// `(a * b) % n` without intermediate overflow.
#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

/// Smallest integer base `t >= 1` with `t^h >= n`, found by integer
/// bisection. Floating-point roots misround near perfect powers, so no
/// `powf` is involved.
pub fn smallest_base(n: u64, h: u32) -> Result<u64> {
    if h < 2 {
        return Err(Error::usage(format!("level count h must be at least 2, got {h}")));
    }
    if n == 0 {
        return Err(Error::usage("point count must be at least 1"));
    }
    // Invariant: lo^h < n <= hi^h.
    let mut lo: u64 = 0;
    let mut hi: u64 = 1;
    while saturating_pow(hi, h) < n {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if saturating_pow(mid, h) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Little-endian digit expansion: `digits()[l]` is the coefficient of `t^l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitVector {
    digits: Vec<u64>,
}

impl DigitVector {
    /// Wraps raw digits. Range checks against a base happen in the
    /// consuming operations, not here.
    pub fn new(digits: Vec<u64>) -> DigitVector {
        DigitVector { digits }
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn get(&self, level: usize) -> u64 {
        self.digits[level]
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

/// Per-instance digit parameters, immutable after construction and freely
/// shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TaryParams {
    n: u64,
    h: u32,
    t: u64,
    /// Digits of `n-1`; the largest valid offset, acting as the per-level
    /// cap in the bounded table.
    cap_digits: DigitVector,
    /// `t^m` for m = 0..h, saturating.
    powers: Vec<u64>,
    /// `t^m mod n` for m = 0..h; exact at any magnitude.
    strides: Vec<u64>,
    /// Value of the low digits `m..=0` of `n-1`, i.e. `(n-1) mod-prefix`.
    cap_prefixes: Vec<u64>,
    /// `t^m` as binary64, for use as a summation weight.
    weights: Vec<f64>,
}

impl TaryParams {
    pub fn new(n: u64, h: u32) -> Result<TaryParams> {
        let t = smallest_base(n, h)?;
        let hs = h as usize;

        let mut powers = Vec::with_capacity(hs);
        let mut strides = Vec::with_capacity(hs);
        let mut weights = Vec::with_capacity(hs);
        let mut pow: u64 = 1;
        let mut stride: u64 = 1 % n;
        let mut weight: f64 = 1.0;
        for _ in 0..hs {
            powers.push(pow);
            strides.push(stride);
            weights.push(weight);
            pow = pow.saturating_mul(t);
            stride = mul_mod(stride, t, n);
            weight *= t as f64;
        }

        let mut digits = Vec::with_capacity(hs);
        let mut rest = n - 1;
        for _ in 0..hs {
            digits.push(rest % t);
            rest /= t;
        }
        debug_assert_eq!(rest, 0, "n-1 must fit in h base-t digits");

        let mut cap_prefixes = Vec::with_capacity(hs);
        let mut running: u64 = 0;
        for m in 0..hs {
            if digits[m] > 0 {
                running += digits[m] * powers[m];
            }
            cap_prefixes.push(running);
        }
        debug_assert_eq!(cap_prefixes[hs - 1], n - 1);

        Ok(TaryParams {
            n,
            h,
            t,
            cap_digits: DigitVector::new(digits),
            powers,
            strides,
            cap_prefixes,
            weights,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    /// The digit base `t`.
    pub fn base(&self) -> u64 {
        self.t
    }

    /// Digits of `n-1`, little-endian.
    pub fn cap_digits(&self) -> &DigitVector {
        &self.cap_digits
    }

    /// Digit `m` of `n-1`.
    pub fn cap_digit(&self, m: usize) -> u64 {
        self.cap_digits.get(m)
    }

    /// Value of digits `m..=0` of `n-1`.
    pub fn cap_prefix(&self, m: usize) -> u64 {
        self.cap_prefixes[m]
    }

    /// `t^m`, saturating at `u64::MAX`.
    pub fn power(&self, m: usize) -> u64 {
        self.powers[m]
    }

    /// `t^m mod n`.
    pub fn stride(&self, m: usize) -> u64 {
        self.strides[m]
    }

    /// `t^m` as a binary64 weight.
    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m]
    }
}

/// Expands `j` into `h` base-t digits by repeated division.
pub fn to_digits(j: u64, params: &TaryParams) -> Result<DigitVector> {
    let span = saturating_pow(params.t, params.h);
    if j >= span {
        return Err(Error::usage(format!(
            "value {j} does not fit in {} base-{} digits",
            params.h, params.t
        )));
    }
    let mut digits = Vec::with_capacity(params.h as usize);
    let mut rest = j;
    for _ in 0..params.h {
        digits.push(rest % params.t);
        rest /= params.t;
    }
    Ok(DigitVector::new(digits))
}

/// Recomposes a digit vector: sum of `digit[l] * t^l`.
pub fn from_digits(digits: &DigitVector, params: &TaryParams) -> Result<u64> {
    if digits.len() != params.h as usize {
        return Err(Error::usage(format!(
            "expected {} digits, got {}",
            params.h,
            digits.len()
        )));
    }
    let mut value: u64 = 0;
    for (level, &d) in digits.digits().iter().enumerate() {
        if d >= params.t {
            return Err(Error::usage(format!(
                "digit {d} at level {level} exceeds base {}",
                params.t
            )));
        }
        if d > 0 {
            let term = d
                .checked_mul(params.powers[level])
                .ok_or_else(|| Error::usage("digit value overflows u64"))?;
            value = value
                .checked_add(term)
                .ok_or_else(|| Error::usage("digit value overflows u64"))?;
        }
    }
    Ok(value)
}

/// Value of the digit suffix at levels `a..h`: sum of `digit[l] * t^l` for
/// `l >= a`. The empty suffix (`a == h`) is 0.
pub fn suffix_value(digits: &DigitVector, a: usize, params: &TaryParams) -> Result<u64> {
    let hs = params.h as usize;
    if a > hs {
        return Err(Error::usage(format!(
            "suffix start {a} exceeds level count {hs}"
        )));
    }
    if digits.len() != hs {
        return Err(Error::usage(format!(
            "expected {} digits, got {}",
            hs,
            digits.len()
        )));
    }
    let mut value: u64 = 0;
    for level in a..hs {
        let d = digits.get(level);
        if d > 0 {
            let term = d
                .checked_mul(params.powers[level])
                .ok_or_else(|| Error::usage("digit value overflows u64"))?;
            value = value
                .checked_add(term)
                .ok_or_else(|| Error::usage("digit value overflows u64"))?;
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_base_examples() {
        assert_eq!(smallest_base(16, 2).unwrap(), 4);
        assert_eq!(smallest_base(17, 2).unwrap(), 5);
        assert_eq!(smallest_base(1000, 3).unwrap(), 10);
        assert_eq!(smallest_base(1, 2).unwrap(), 1);
        assert_eq!(smallest_base(2, 7).unwrap(), 2);
    }

    #[test]
    fn smallest_base_rejects_h_below_two() {
        assert!(smallest_base(10, 1).is_err());
        assert!(smallest_base(10, 0).is_err());
        assert!(smallest_base(0, 2).is_err());
    }

    #[test]
    fn smallest_base_is_minimal() {
        // Near-perfect powers are where floating-point roots go wrong.
        let cases: &[(u64, u32)] = &[
            (10_u64.pow(15), 5),
            (10_u64.pow(15) + 1, 5),
            (10_u64.pow(15) - 1, 5),
            (1 << 32, 2),
            ((1 << 32) + 1, 2),
            (999_999_999, 3),
            (1_000_000_000, 3),
            (7, 2),
            (2, 2),
        ];
        for &(n, h) in cases {
            let t = smallest_base(n, h).unwrap();
            assert!(saturating_pow(t, h) >= n, "t^h >= n fails for {n}, {h}");
            if t >= 2 {
                assert!(saturating_pow(t - 1, h) < n, "minimality fails for {n}, {h}");
            }
        }
    }

    #[test]
    fn digit_examples() {
        let p = TaryParams::new(16, 2).unwrap();
        assert_eq!(p.base(), 4);
        assert_eq!(to_digits(7, &p).unwrap().digits(), &[3, 1]);
        assert_eq!(to_digits(0, &p).unwrap().digits(), &[0, 0]);
        assert_eq!(to_digits(15, &p).unwrap().digits(), &[3, 3]);
        assert!(to_digits(16, &p).is_err());
        assert_eq!(from_digits(&DigitVector::new(vec![3, 1]), &p).unwrap(), 7);
        assert_eq!(from_digits(&DigitVector::new(vec![0, 0]), &p).unwrap(), 0);
        assert_eq!(from_digits(&DigitVector::new(vec![3, 3]), &p).unwrap(), 15);
        assert!(from_digits(&DigitVector::new(vec![4, 0]), &p).is_err());
    }

    #[test]
    fn suffix_value_examples() {
        let p = TaryParams::new(16, 2).unwrap();
        let d = DigitVector::new(vec![3, 1]);
        assert_eq!(suffix_value(&d, 1, &p).unwrap(), 4);
        assert_eq!(suffix_value(&d, 2, &p).unwrap(), 0); // empty suffix
        assert_eq!(suffix_value(&d, 0, &p).unwrap(), 7);
        assert!(suffix_value(&d, 3, &p).is_err());
    }

    #[test]
    fn suffix_value_peels_one_digit_at_a_time() {
        let p = TaryParams::new(1000, 3).unwrap();
        for j in [0_u64, 1, 9, 10, 99, 100, 123, 999] {
            let d = to_digits(j, &p).unwrap();
            for a in 0..p.h() as usize {
                let here = suffix_value(&d, a, &p).unwrap();
                let above = suffix_value(&d, a + 1, &p).unwrap();
                assert_eq!(here - above, d.get(a) * p.power(a));
            }
        }
    }

    #[test]
    fn round_trip_is_exhaustive_at_small_spans() {
        for (n, h) in [(16_u64, 2_u32), (17, 2), (81, 4), (1000, 3), (4096, 3)] {
            let p = TaryParams::new(n, h).unwrap();
            let span = p.base().pow(h);
            for j in 0..span {
                let d = to_digits(j, &p).unwrap();
                assert!(d.digits().iter().all(|&x| x < p.base()));
                assert_eq!(from_digits(&d, &p).unwrap(), j);
            }
        }
    }

    #[test]
    fn params_invariants() {
        for (n, h) in [(2_u64, 2_u32), (4, 2), (5, 2), (16, 3), (100, 2), (1000, 3), (65536, 2)] {
            let p = TaryParams::new(n, h).unwrap();
            assert_eq!(from_digits(p.cap_digits(), &p).unwrap(), n - 1);
            assert_eq!(p.cap_prefix(h as usize - 1), n - 1);
            for m in 0..h as usize {
                assert_eq!(p.stride(m), p.power(m) % n);
            }
        }
    }

    #[test]
    fn degenerate_single_point_space() {
        let p = TaryParams::new(1, 2).unwrap();
        assert_eq!(p.base(), 1);
        assert_eq!(p.cap_digits().digits(), &[0, 0]);
        assert_eq!(p.cap_prefix(1), 0);
        assert_eq!(to_digits(0, &p).unwrap().digits(), &[0, 0]);
    }

    #[test]
    fn oversized_h_keeps_low_level_constants_exact() {
        // h far beyond log2(n): high powers saturate, strides stay exact.
        let p = TaryParams::new(1000, 80).unwrap();
        assert_eq!(p.base(), 2);
        assert_eq!(p.power(79), u64::MAX); // saturated
        assert_eq!(p.stride(79), 88); // 2^79 mod 1000
        for m in 0..10 {
            assert_eq!(p.power(m), 1 << m);
            assert_eq!(p.stride(m), (1 << m) % 1000);
        }
        assert_eq!(p.cap_prefix(79), 999);
    }
}
