//! Exact arithmetic: rationals, cached factorials, multinomials, and the
//! truncated power-series ring that hosts `g_m(u)`.

mod series;

pub use series::{g_series, series_det, TruncatedSeries};

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in canonical form (reduced, positive denominator).
pub type Rational = BigRational;

const SEGMENT: usize = 256;
const SEGMENTS: usize = 256;

type Segment = Box<[OnceLock<BigInt>]>;

// Append-only table: a slot is written once and read without locking afterwards.
static FACTORIALS: [OnceLock<Segment>; SEGMENTS] = [const { OnceLock::new() }; SEGMENTS];

fn slot(n: usize) -> Option<&'static OnceLock<BigInt>> {
    let seg = n / SEGMENT;
    if seg >= SEGMENTS {
        return None;
    }
    let segment = FACTORIALS[seg].get_or_init(|| (0..SEGMENT).map(|_| OnceLock::new()).collect());
    Some(&segment[n % SEGMENT])
}

/// `n!`, memoized in a process-wide table.
pub fn factorial(n: u64) -> BigInt {
    let n = n as usize;
    let Some(target) = slot(n) else {
        return (1..=n as u64).fold(BigInt::one(), |acc, i| acc * i);
    };
    if let Some(v) = target.get() {
        return v.clone();
    }
    let mut prev = BigInt::one();
    for i in 0..=n {
        let cell = slot(i).expect("index below table size");
        prev = cell
            .get_or_init(|| if i == 0 { BigInt::one() } else { &prev * i })
            .clone();
    }
    prev
}

/// `n! / prod(parts_i!)`; the parts must sum to `n`.
pub fn multinomial(n: u64, parts: &[u64]) -> Result<BigInt> {
    let sum: u64 = parts.iter().sum();
    if sum != n {
        return Err(Error::MultinomialMismatch { n, sum });
    }
    let denom = parts.iter().fold(BigInt::one(), |acc, &p| acc * factorial(p));
    Ok(factorial(n) / denom)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `1/n!` as a rational.
pub fn inv_factorial(n: u64) -> Rational {
    Rational::new(BigInt::one(), factorial(n))
}

/// `2^e` for a signed exponent.
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

pub fn sign(odd: bool) -> Rational {
    if odd {
        -Rational::one()
    } else {
        Rational::one()
    }
}

/// Parse `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator or denominator beyond f64 range: scale both down first
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

const TRIAL_DIVISION_LIMIT: u64 = 1 << 20;

fn factor_positive(mut n: BigInt) -> Vec<(BigInt, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p <= TRIAL_DIVISION_LIMIT {
        let bp = BigInt::from(p);
        if &bp * &bp > n {
            break;
        }
        let mut e = 0;
        while (&n % &bp).is_zero() {
            n /= &bp;
            e += 1;
        }
        if e > 0 {
            out.push((bp, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

fn render_factors(n: &BigInt) -> (String, usize) {
    let factors = factor_positive(n.abs());
    let parts: Vec<String> = factors
        .iter()
        .map(|(p, e)| if *e == 1 { p.to_string() } else { format!("{p}^{e}") })
        .collect();
    let count = parts.len();
    (if parts.is_empty() { "1".into() } else { parts.join("·") }, count)
}

/// Render a rational with numerator and denominator split into prime powers,
/// e.g. `23/(2^7·3·5·7)`.
pub fn factored(r: &Rational) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let (num, _) = render_factors(r.numer());
    if r.denom().is_one() {
        return format!("{sign}{num}");
    }
    let (den, count) = render_factors(r.denom());
    if count > 1 || den.contains('^') {
        format!("{sign}{num}/({den})")
    } else {
        format!("{sign}{num}/{den}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_small_values() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(1), BigInt::from(1));
        assert_eq!(factorial(6), BigInt::from(720));
        assert_eq!(factorial(20), BigInt::from(2432902008176640000u64));
    }

    #[test]
    fn factorial_beyond_first_segment() {
        let direct = (1..=600u64).fold(BigInt::one(), |acc, i| acc * i);
        assert_eq!(factorial(600), direct);
        assert_eq!(factorial(599) * 600, direct);
    }

    #[test]
    fn factorial_concurrent_population() {
        let handles: Vec<_> = (0..4)
            .map(|t| std::thread::spawn(move || factorial(300 + 7 * t)))
            .collect();
        for (t, h) in handles.into_iter().enumerate() {
            let n = 300 + 7 * t as u64;
            let direct = (1..=n).fold(BigInt::one(), |acc, i| acc * i);
            assert_eq!(h.join().unwrap(), direct);
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial(3, &[1, 1, 1]).unwrap(), BigInt::from(6));
        assert_eq!(multinomial(7, &[7]).unwrap(), BigInt::from(1));
        assert_eq!(multinomial(4, &[2, 2]).unwrap(), BigInt::from(6));
        assert_eq!(multinomial(0, &[]).unwrap(), BigInt::from(1));
    }

    #[test]
    fn multinomial_rejects_bad_sum() {
        assert_eq!(
            multinomial(4, &[1, 2]),
            Err(Error::MultinomialMismatch { n: 4, sum: 3 })
        );
    }

    #[test]
    fn rational_is_canonical() {
        let r = ratio(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
        assert_eq!(ratio(0, -5).denom(), &BigInt::from(1));
    }

    #[test]
    fn pow2_signed() {
        assert_eq!(pow2(3), int(8));
        assert_eq!(pow2(-2), ratio(1, 4));
        assert_eq!(pow2(0), int(1));
    }

    #[test]
    fn parse_round_trip() {
        for r in [ratio(23, 13440), ratio(-1, 8), int(1), int(0), ratio(-7159, 3)] {
            assert_eq!(parse_rational(&r.to_string()).unwrap(), r);
        }
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }

    #[test]
    fn factored_rendering() {
        assert_eq!(factored(&ratio(23, 13440)), "23/(2^7·3·5·7)");
        assert_eq!(factored(&ratio(-1, 8)), "-1/(2^3)");
        assert_eq!(factored(&ratio(1, 10)), "1/(2·5)");
        assert_eq!(factored(&ratio(1, 3)), "1/3");
        assert_eq!(factored(&int(-12)), "-2^2·3");
        assert_eq!(factored(&ratio(89 * 13103, 7)), "89·13103/7");
    }
}
