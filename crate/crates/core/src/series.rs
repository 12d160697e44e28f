//! Truncated power series with arbitrary-precision integer coefficients.
//!
//! A [`ZSeries`] is an element of `Z[[T]]` known modulo `T^{d+1}`, where `d`
//! is its truncation degree. Every binary operation takes the minimum of the
//! truncation degrees it can actually certify; nothing is silently extended.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::SeriesError;

/// Power series `Σ c_n T^n` known for `0 ≤ n ≤ trunc_degree`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZSeries {
    coeffs: Vec<BigInt>,
}

impl ZSeries {
    /// Builds a series from its coefficient list; the truncation degree is
    /// `coeffs.len() - 1`.
    ///
    /// Panics on an empty list: a series always knows at least its constant term.
    pub fn from_coeffs(coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least one coefficient");
        ZSeries { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64], trunc_degree: usize) -> Self {
        let mut c: Vec<BigInt> = coeffs.iter().map(|&x| BigInt::from(x)).collect();
        c.resize(trunc_degree + 1, BigInt::zero());
        c.truncate(trunc_degree + 1);
        ZSeries { coeffs: c }
    }

    pub fn zero(trunc_degree: usize) -> Self {
        ZSeries { coeffs: vec![BigInt::zero(); trunc_degree + 1] }
    }

    pub fn one(trunc_degree: usize) -> Self {
        let mut s = Self::zero(trunc_degree);
        s.coeffs[0] = BigInt::one();
        s
    }

    /// The series `T` (or `0` when `trunc_degree == 0`).
    pub fn variable(trunc_degree: usize) -> Self {
        Self::monomial(BigInt::one(), 1, trunc_degree)
    }

    /// `c·T^n` modulo `T^{trunc_degree+1}`.
    pub fn monomial(c: BigInt, n: usize, trunc_degree: usize) -> Self {
        let mut s = Self::zero(trunc_degree);
        if n <= trunc_degree {
            s.coeffs[n] = c;
        }
        s
    }

    pub fn trunc_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    /// Coefficient of `T^n`; panics when `n` is beyond the truncation.
    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coeffs[n]
    }

    pub fn set_coeff(&mut self, n: usize, c: BigInt) {
        self.coeffs[n] = c;
    }

    /// Order of vanishing: index of the first nonzero coefficient, or
    /// `trunc_degree + 1` when every known coefficient is zero.
    pub fn order(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(self.coeffs.len())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Reduces the truncation degree; a no-op when `degree` is not smaller.
    pub fn truncate(&self, degree: usize) -> Self {
        let d = degree.min(self.trunc_degree());
        ZSeries { coeffs: self.coeffs[..=d].to_vec() }
    }

    /// Product modulo `T^{n+1}`, capped at the degree both operands certify.
    pub fn mul_trunc(&self, other: &ZSeries, n: usize) -> ZSeries {
        let a_ord = self.order();
        let b_ord = other.order();
        let cap = (self.trunc_degree() + b_ord).min(other.trunc_degree() + a_ord);
        let deg = n.min(cap);
        let mut out = vec![BigInt::zero(); deg + 1];
        for (i, ai) in self.coeffs.iter().enumerate().take(deg + 1) {
            if ai.is_zero() {
                continue;
            }
            let top = (deg - i).min(other.trunc_degree());
            for (j, bj) in other.coeffs[..=top].iter().enumerate() {
                if !bj.is_zero() {
                    out[i + j] += ai * bj;
                }
            }
        }
        ZSeries { coeffs: out }
    }

    /// `self^e` modulo `T^{n+1}` by binary exponentiation.
    pub fn pow_trunc(&self, e: u64, n: usize) -> ZSeries {
        if e == 0 {
            return ZSeries::one(n);
        }
        let ord = self.order();
        // The result is known up to degree (e-1)·ord + trunc.
        let cap = (e as u128 - 1).saturating_mul(ord as u128).saturating_add(self.trunc_degree() as u128);
        let deg = (n as u128).min(cap) as usize;
        if ord > 0 && (ord as u128).saturating_mul(e as u128) > deg as u128 {
            return ZSeries::zero(deg);
        }
        let mut base = self.truncate(deg);
        let mut acc: Option<ZSeries> = None;
        let mut e = e;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul_trunc(&base, deg),
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul_trunc(&base, deg);
        }
        acc.expect("e > 0")
    }

    /// The substitution `T ↦ c·T`: coefficient `n` is multiplied by `c^n`.
    pub fn substitute_scaled(&self, c: &BigInt) -> ZSeries {
        let mut scale = BigInt::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for a in &self.coeffs {
            out.push(a * &scale);
            scale *= c;
        }
        ZSeries { coeffs: out }
    }

    /// Coefficientwise exact division by `d`.
    pub fn exact_div_scalar(&self, d: &BigInt) -> Result<ZSeries, SeriesError> {
        if d.is_zero() {
            return Err(SeriesError::DivisionByZero);
        }
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (n, a) in self.coeffs.iter().enumerate() {
            let (quo, rem) = a.div_rem(d);
            if !rem.is_zero() {
                return Err(SeriesError::NonDivisible(n));
            }
            out.push(quo);
        }
        Ok(ZSeries { coeffs: out })
    }

    pub fn scale(&self, c: &BigInt) -> ZSeries {
        ZSeries { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// `self(inner)` modulo `T^{n+1}`; `inner` must have zero constant term.
    ///
    /// The result is capped at the degree certified by both truncations.
    pub fn compose(&self, inner: &ZSeries, n: usize) -> ZSeries {
        assert!(inner.coeffs[0].is_zero(), "inner series must vanish at 0");
        let ord = inner.order().max(1);
        let tail = (self.trunc_degree() + 1).saturating_mul(ord) - 1;
        let deg = n.min(inner.trunc_degree()).min(tail);
        let mut acc = ZSeries::zero(deg);
        acc.coeffs[0] = self.coeffs[0].clone();
        let mut power = ZSeries::one(deg);
        for c in self.coeffs.iter().skip(1) {
            power = power.mul_trunc(inner, deg).pad_to(deg);
            if power.order() > deg {
                break;
            }
            if !c.is_zero() {
                for (k, pk) in power.coeffs.iter().enumerate() {
                    if !pk.is_zero() {
                        acc.coeffs[k] += c * pk;
                    }
                }
            }
        }
        acc
    }

    /// Formal derivative; the truncation degree drops by one (floored at 0).
    pub fn derivative(&self) -> ZSeries {
        if self.trunc_degree() == 0 {
            return ZSeries::zero(0);
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(n, c)| c * BigInt::from(n)).collect();
        ZSeries { coeffs }
    }

    /// Multiplicative inverse of a series with constant term `±1`.
    pub fn inverse_unit(&self) -> Option<ZSeries> {
        let c0 = &self.coeffs[0];
        if !(c0.is_one() || (-c0).is_one()) {
            return None;
        }
        let n = self.trunc_degree();
        let mut inv = vec![BigInt::zero(); n + 1];
        inv[0] = c0.clone();
        for k in 1..=n {
            let mut s = BigInt::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    s += &self.coeffs[j] * &inv[k - j];
                }
            }
            // c0 is its own inverse
            inv[k] = -(s * c0);
        }
        Some(ZSeries { coeffs: inv })
    }

    fn pad_to(mut self, degree: usize) -> ZSeries {
        if self.coeffs.len() < degree + 1 {
            self.coeffs.resize(degree + 1, BigInt::zero());
        }
        self
    }

    /// Largest `|c_n|` in bits; handy for size reporting.
    pub fn max_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.abs().bits()).max().unwrap_or(0)
    }
}

impl Add for &ZSeries {
    type Output = ZSeries;

    fn add(self, rhs: &ZSeries) -> ZSeries {
        let d = self.trunc_degree().min(rhs.trunc_degree());
        ZSeries { coeffs: (0..=d).map(|n| &self.coeffs[n] + &rhs.coeffs[n]).collect() }
    }
}

impl Sub for &ZSeries {
    type Output = ZSeries;

    fn sub(self, rhs: &ZSeries) -> ZSeries {
        let d = self.trunc_degree().min(rhs.trunc_degree());
        ZSeries { coeffs: (0..=d).map(|n| &self.coeffs[n] - &rhs.coeffs[n]).collect() }
    }
}

impl Neg for &ZSeries {
    type Output = ZSeries;

    fn neg(self) -> ZSeries {
        ZSeries { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

/// Coefficientwise sum; the truncation is the smaller of the two.
pub fn series_add(a: &ZSeries, b: &ZSeries) -> ZSeries {
    a + b
}

pub fn series_mul_trunc(a: &ZSeries, b: &ZSeries, n: usize) -> ZSeries {
    a.mul_trunc(b, n)
}

pub fn series_pow_trunc(a: &ZSeries, e: u64, n: usize) -> ZSeries {
    a.pow_trunc(e, n)
}

pub fn substitute_scaled(a: &ZSeries, c: &BigInt) -> ZSeries {
    a.substitute_scaled(c)
}

pub fn exact_div_scalar(a: &ZSeries, d: &BigInt) -> Result<ZSeries, SeriesError> {
    a.exact_div_scalar(d)
}

impl fmt::Display for ZSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match (n, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "T")?,
                (1, false) => write!(f, "{mag}*T")?,
                (_, true) => write!(f, "T^{n}")?,
                (_, false) => write!(f, "{mag}*T^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(T^{})", self.trunc_degree() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(c: &[i64], d: usize) -> ZSeries {
        ZSeries::from_i64s(c, d)
    }

    #[test]
    fn add_examples() {
        assert_eq!(&s(&[0, 1], 3) + &s(&[0, 1], 3), s(&[0, 2], 3));
        assert_eq!(&s(&[0, 1, -2], 3) + &s(&[0, 0, 2], 3), s(&[0, 1], 3));
    }

    #[test]
    fn add_takes_min_truncation() {
        let r = &s(&[1, 1, 1, 1], 3) + &s(&[1, 1], 1);
        assert_eq!(r.trunc_degree(), 1);
    }

    #[test]
    fn mul_examples() {
        let t = ZSeries::variable(4);
        assert_eq!(t.mul_trunc(&t, 4), s(&[0, 0, 1], 4));
        let a = s(&[0, 1, -2], 4);
        assert_eq!(a.mul_trunc(&a, 4), s(&[0, 0, 1, -4, 4], 4));
    }

    #[test]
    fn mul_caps_at_certified_degree() {
        // (T + O(T^3)) * (T + O(T^3)) is only known modulo T^4.
        let a = s(&[0, 1, 0], 2);
        assert_eq!(a.mul_trunc(&a, 10).trunc_degree(), 3);
    }

    #[test]
    fn pow_examples() {
        assert_eq!(s(&[0, 0, 1], 7).pow_trunc(3, 7), s(&[0, 0, 0, 0, 0, 0, 1], 7));
        assert_eq!(s(&[1, 1], 4).pow_trunc(4, 2), s(&[1, 4, 6], 2));
        assert_eq!(s(&[3, 1], 4).pow_trunc(0, 4), ZSeries::one(4));
    }

    #[test]
    fn substitute_and_divide() {
        assert_eq!(s(&[0, 1, -2], 2).substitute_scaled(&BigInt::from(2)), s(&[0, 2, -8], 2));
        assert_eq!(s(&[0, 4, -32], 2).exact_div_scalar(&BigInt::from(2)).unwrap(), s(&[0, 2, -16], 2));
        assert_eq!(s(&[0, 3], 1).exact_div_scalar(&BigInt::from(2)), Err(SeriesError::NonDivisible(1)));
    }

    #[test]
    fn inverse_and_compose() {
        let a = s(&[1, -2, 16, -352], 3);
        let inv = a.inverse_unit().unwrap();
        assert_eq!(a.mul_trunc(&inv, 3), ZSeries::one(3));
        // (1 + T) ∘ (2T) = 1 + 2T
        let c = s(&[1, 1], 3).compose(&s(&[0, 2], 3), 3);
        assert_eq!(c.truncate(1), s(&[1, 2], 1));
    }

    #[test]
    fn display() {
        assert_eq!(s(&[0, 1, -2, 16], 3).to_string(), "T - 2*T^2 + 16*T^3 + O(T^4)");
    }
}
