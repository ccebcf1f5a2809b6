//! Rational scalars and their string form.
//!
//! Every coordinate in the crate is a `BigRational`. Serialized values are
//! strings `"p/q"` (or `"p"` for integers).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::Error;

pub type Q = BigRational;
pub type Z = BigInt;

pub fn q(n: i64) -> Q {
    Q::from_integer(Z::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(Z::from(n), Z::from(d))
}

pub fn qz(n: &Z) -> Q {
    Q::from_integer(n.clone())
}

pub fn qvec(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| q(x)).collect()
}

pub fn zvec(v: &[i64]) -> Vec<Z> {
    v.iter().map(|&x| Z::from(x)).collect()
}

pub fn parse_q(s: &str) -> Result<Q, Error> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    match t.split_once('/') {
        Some((n, d)) => {
            let n: Z = n.trim().parse().map_err(|_| bad())?;
            let d: Z = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn fmt_vec(v: &[Q]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_q).collect();
    format!("({})", parts.join(", "))
}

pub fn to_strings(v: &[Q]) -> Vec<String> {
    v.iter().map(fmt_q).collect()
}

pub fn parse_vec(v: &[String]) -> Result<Vec<Q>, Error> {
    v.iter().map(|s| parse_q(s)).collect()
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(it: impl IntoIterator<Item = &'a Q>) -> Z {
    it.into_iter().fold(Z::one(), |acc, x| acc.lcm(x.denom()))
}

/// Floor of a rational as an integer.
pub fn floor_q(x: &Q) -> Z {
    x.floor().to_integer()
}

/// Fractional part in `[0, 1)`.
pub fn frac_q(x: &Q) -> Q {
    x - x.floor()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn is_zero_vec(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn add_vec(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(c: &Q, a: &[Q]) -> Vec<Q> {
    a.iter().map(|x| c * x).collect()
}

pub fn neg_vec(a: &[Q]) -> Vec<Q> {
    a.iter().map(|x| -x).collect()
}

/// Scales a nonzero rational vector to the primitive integer vector on the
/// same ray.
pub fn primitive_integer(v: &[Q]) -> Vec<Z> {
    let d = common_denominator(v);
    let ints: Vec<Z> = v.iter().map(|x| (x * qz(&d)).to_integer()).collect();
    let g = ints.iter().fold(Z::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

pub fn gcd_all<'a>(it: impl IntoIterator<Item = &'a Z>) -> Z {
    it.into_iter().fold(Z::zero(), |acc, x| acc.gcd(x))
}

pub fn abs_z(x: &Z) -> Z {
    x.abs()
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod serde_q {
    use super::{fmt_q, parse_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = QString::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }

    /// Accepts `"p/q"` strings as well as JSON integers.
    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum QString {
        S(String),
        I(i64),
    }

    impl QString {
        pub(crate) fn parse(&self) -> Result<Q, crate::Error> {
            match self {
                QString::S(s) => parse_q(s),
                QString::I(i) => Ok(super::q(*i)),
            }
        }
    }

    pub mod vec {
        use super::{fmt_q, QString, Q};
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(fmt_q))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
            let v: Vec<QString> = Vec::deserialize(d)?;
            v.iter().map(|x| x.parse().map_err(serde::de::Error::custom)).collect()
        }
    }

    pub mod mat {
        use super::{fmt_q, QString, Q};
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(m: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(m.iter().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
            let m: Vec<Vec<QString>> = Vec::deserialize(d)?;
            m.iter().map(|r| r.iter().map(|x| x.parse().map_err(serde::de::Error::custom)).collect()).collect()
        }
    }
}

/// Serde helpers writing integers as decimal strings.
pub mod serde_z {
    pub mod mat {
        use crate::rational::Z;
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(m: &[Vec<Z>], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(m.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Z>>, D::Error> {
            let m: Vec<Vec<String>> = Vec::deserialize(d)?;
            m.iter().map(|r| r.iter().map(|x| x.parse().map_err(serde::de::Error::custom)).collect()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "-3", "7/10", "-2/5"] {
            assert_eq!(fmt_q(&parse_q(s).unwrap()), s);
        }
        assert_eq!(fmt_q(&parse_q("4/2").unwrap()), "2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn primitive_vector() {
        let v = vec![qf(1, 2), qf(3, 4)];
        assert_eq!(primitive_integer(&v), zvec(&[2, 3]));
    }
}
