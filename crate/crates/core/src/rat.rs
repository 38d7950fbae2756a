//! Exact rational arithmetic helpers.
//!
//! All prices, surpluses, capacities and utility parameters live in
//! arbitrary-precision rationals kept in lowest terms with positive
//! denominators. The representation is `num_rational::BigRational`, which
//! maintains exactly those invariants; this module adds the parsing,
//! formatting and bit-length utilities the solvers need.

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::Result;

/// Arbitrary-precision rational in lowest terms, denominator > 0.
pub type Rat = num_rational::BigRational;

/// Rational from small integers, mostly for tests and fixtures.
pub fn rq(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Rational from an integer.
pub fn ri(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// 2^k as a rational; k may be negative.
pub fn pow2(k: i64) -> Rat {
    if k >= 0 {
        Rat::from_integer(BigInt::one() << (k as usize))
    } else {
        Rat::new(BigInt::one(), BigInt::one() << ((-k) as usize))
    }
}

/// Parses a rational literal: integer `-12`, fraction `a/b`, decimal `0.25`,
/// or scientific `2.5e-3`. Decimal forms convert exactly (powers of ten).
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    // Split off an exponent part if present.
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("bad rational literal {s:?}")));
    }
    let neg = int_part.starts_with('-');
    let digits: String = format!(
        "{}{}",
        int_part.trim_start_matches(['+', '-']),
        frac_part
    );
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("bad rational literal {s:?}")));
    }
    let mantissa_int: BigInt = digits
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational literal {s:?}")))?;
    let scale = frac_part.len() as i64 - exp;
    let ten = BigInt::from(10);
    let mut value = Rat::from_integer(mantissa_int);
    if scale > 0 {
        value /= Rat::from_integer(num_traits::pow(ten, scale as usize));
    } else if scale < 0 {
        value *= Rat::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    if neg {
        value = -value;
    }
    Ok(value)
}

/// Lowest-terms string form, `a` or `a/b`.
pub fn rat_str(r: &Rat) -> String {
    r.to_string()
}

/// Number of bits in |x|; 0 for x = 0.
pub fn bits_of(x: &BigInt) -> u64 {
    x.bits()
}

/// Total bit length numerator + denominator, the unit of the input-size
/// parameter L.
pub fn rational_bits(r: &Rat) -> u64 {
    bits_of(r.numer()).max(1) + bits_of(r.denom())
}

/// Largest numerator/denominator bit length over a slice.
pub fn max_part_bits(ps: &[Rat]) -> u64 {
    ps.iter()
        .map(|r| bits_of(r.numer()).max(bits_of(r.denom())))
        .max()
        .unwrap_or(1)
        .max(1)
}

/// Smallest k >= 0 with 2^k >= x, for x >= 1.
pub fn ceil_log2_big(x: &BigInt) -> u64 {
    assert!(x.sign() == Sign::Plus, "ceil_log2_big needs x >= 1");
    let b = x.bits();
    if (BigInt::one() << (b - 1) as usize) == *x {
        b - 1
    } else {
        b
    }
}

/// Smallest integer k (possibly negative) with 2^k >= q, for q > 0.
pub fn ceil_log2_rat(q: &Rat) -> i64 {
    assert!(q.is_positive(), "ceil_log2_rat needs q > 0");
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    // 2^(nb-db-1) <= q < 2^(nb-db+1); scan the three candidates.
    let mut k = nb - db - 1;
    while pow2(k) < *q {
        k += 1;
    }
    k
}

/// Largest integer k with 2^k <= q, for q > 0.
pub fn floor_log2_rat(q: &Rat) -> i64 {
    let k = ceil_log2_rat(q);
    if pow2(k) == *q {
        k
    } else {
        k - 1
    }
}

/// Rational under-approximation of eps / (2 sqrt(m)), accurate to 32 extra
/// bits: the result e satisfies e <= eps/(2 sqrt m) < e * (1 + 2^-32).
pub fn epsilon_prime(epsilon: &Rat, m: usize) -> Result<Rat> {
    if !epsilon.is_positive() {
        return Err(Error::Validation("epsilon must be > 0".into()));
    }
    if m < 1 {
        return Err(Error::Validation("need m >= 1".into()));
    }
    // s = floor(sqrt(m * 2^64)); then (s+1)/2^32 >= sqrt(m) with relative
    // error below 2^-32, so eps * 2^31 / (s+1) under-approximates as needed.
    let scaled = BigInt::from(m) << 64usize;
    let s = scaled.sqrt();
    Ok(epsilon * Rat::new(BigInt::one() << 31usize, s + BigInt::one()))
}

/// Ceiling of a positive rational as a big integer.
pub fn ceil_to_big(q: &Rat) -> BigInt {
    q.ceil().to_integer()
}

/// Exact integer power of a rational with signed exponent.
pub fn rat_pow(base: &Rat, exp: i64) -> Rat {
    if exp == 0 {
        return Rat::one();
    }
    let mut acc = Rat::one();
    let mut b = if exp > 0 {
        base.clone()
    } else {
        base.recip()
    };
    let mut e = exp.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        e >>= 1;
        if e > 0 {
            b = &b * &b;
        }
    }
    acc
}

/// Sum of squares of a surplus vector, the solver potential.
pub fn norm2_sq(v: &[Rat]) -> Rat {
    v.iter().map(|s| s * s).fold(Rat::zero(), |a, b| a + b)
}

/// 1-norm of a vector.
pub fn norm1(v: &[Rat]) -> Rat {
    v.iter().map(|s| s.abs()).fold(Rat::zero(), |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("5").unwrap(), ri(5));
        assert_eq!(parse_rat("-12").unwrap(), ri(-12));
        assert_eq!(parse_rat("3/4").unwrap(), rq(3, 4));
        assert_eq!(parse_rat("-6/8").unwrap(), rq(-3, 4));
        assert_eq!(parse_rat("0.25").unwrap(), rq(1, 4));
        assert_eq!(parse_rat("1e-6").unwrap(), rq(1, 1_000_000));
        assert_eq!(parse_rat("2.5e-3").unwrap(), rq(1, 400));
        assert_eq!(parse_rat("1.5e3").unwrap(), ri(1500));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn formatting_lowest_terms() {
        assert_eq!(rat_str(&rq(6, 8)), "3/4");
        assert_eq!(rat_str(&rq(8, 4)), "2");
        assert_eq!(rat_str(&rq(-1, 2)), "-1/2");
    }

    #[test]
    fn log2_helpers() {
        assert_eq!(ceil_log2_big(&BigInt::from(1)), 0);
        assert_eq!(ceil_log2_big(&BigInt::from(2)), 1);
        assert_eq!(ceil_log2_big(&BigInt::from(3)), 2);
        assert_eq!(ceil_log2_big(&BigInt::from(1024)), 10);
        assert_eq!(ceil_log2_rat(&rq(5, 4)), 1);
        assert_eq!(ceil_log2_rat(&rq(1, 4)), -2);
        assert_eq!(ceil_log2_rat(&rq(1, 5)), -2);
        assert_eq!(floor_log2_rat(&rq(1, 4)), -2);
        assert_eq!(floor_log2_rat(&rq(3, 1)), 1);
    }

    #[test]
    fn epsilon_prime_bracket() {
        // e <= eps/(2 sqrt m) < e (1 + 2^-32), verified by squaring:
        // 4 m e^2 <= eps^2 and eps^2 < 4 m e^2 (1+2^-32)^2.
        for m in [2usize, 3, 4, 6, 10] {
            let eps = rq(1, 100);
            let e = epsilon_prime(&eps, m).unwrap();
            let four_m = ri(4 * m as i64);
            assert!(&four_m * &e * &e <= &eps * &eps);
            let slack = Rat::one() + pow2(-32);
            assert!(&eps * &eps < four_m * &e * &e * &slack * &slack);
        }
    }

    #[test]
    fn pow_and_norms() {
        assert_eq!(rat_pow(&rq(2, 3), 3), rq(8, 27));
        assert_eq!(rat_pow(&rq(2, 3), -2), rq(9, 4));
        assert_eq!(rat_pow(&rq(7, 2), 0), ri(1));
        assert_eq!(norm2_sq(&[ri(3), ri(-4)]), ri(25));
        assert_eq!(norm1(&[rq(-1, 2), rq(1, 3)]), rq(5, 6));
    }

    proptest! {
        #[test]
        fn parse_roundtrip(n in -1000i64..1000, d in 1i64..1000) {
            let r = rq(n, d);
            let s = rat_str(&r);
            prop_assert_eq!(parse_rat(&s).unwrap(), r);
        }

        #[test]
        fn decimal_exact(k in 0u32..12, n in 0u64..1_000_000) {
            let s = format!("{n}e-{k}");
            let expect = Rat::new(BigInt::from(n), num_traits::pow(BigInt::from(10), k as usize));
            prop_assert_eq!(parse_rat(&s).unwrap(), expect);
        }
    }
}
