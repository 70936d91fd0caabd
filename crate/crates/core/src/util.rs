//! Exact-number helpers shared by reports.

use num::{BigInt, BigRational, BigUint, ToPrimitive, Zero};
use serde::Serializer;

pub fn ratio(p: impl Into<BigInt>, q: impl Into<BigInt>) -> BigRational {
    BigRational::new(p.into(), q.into())
}

pub fn ratio_u(p: &BigUint, q: &BigUint) -> BigRational {
    if q.is_zero() {
        return BigRational::zero();
    }
    BigRational::new(BigInt::from(p.clone()), BigInt::from(q.clone()))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `p/q`, or just `p` for integers.
pub fn fmt_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `p/q`, an integer or a decimal such as `0.25`.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let p: BigInt = digits.parse().ok()?;
        let q = num::pow(BigInt::from(10), frac.len());
        return Some(BigRational::new(p, q));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

pub fn ser_big<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn ser_ratio<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_ratio(v))
}

pub fn ser_ratio_vec<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(fmt_ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_ratio("3/6"), Some(ratio(1, 2)));
        assert_eq!(parse_ratio("0.25"), Some(ratio(1, 4)));
        assert_eq!(parse_ratio("2"), Some(ratio(2, 1)));
        assert_eq!(parse_ratio("1/0"), None);
        assert_eq!(fmt_ratio(&ratio(4, 8)), "1/2");
    }
}
