//! The coefficient ring `S = F_q[[t]]`.
//!
//! A [`Series`] is either an exact polynomial in `t` or a truncation known
//! modulo `t^N`. Arithmetic tracks precision pessimistically, and every
//! operation that would need unknown coefficients fails with
//! [`Error::PrecisionExhausted`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::upoly::UPoly;

/// Working precision used when an exact computation has to truncate.
pub const DEFAULT_PRECISION: usize = 16;

/// t-adic valuation of a series.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Val {
    Finite(usize),
    /// All known coefficients vanish; the true valuation is at least this.
    AtLeast(usize),
    Infinite,
}

impl Val {
    /// A lower bound usable in precision bookkeeping.
    pub fn lower_bound(self) -> usize {
        match self {
            Val::Finite(v) | Val::AtLeast(v) => v,
            Val::Infinite => usize::MAX,
        }
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            Val::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Finite(v) => write!(f, "{v}"),
            Val::AtLeast(v) => write!(f, ">={v}"),
            Val::Infinite => write!(f, "inf"),
        }
    }
}

/// An element of `F_q[[t]]`: coefficient of `t^i` at index `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Series {
    coeffs: Vec<Fe>,
    /// `None` for exact polynomials, otherwise coefficients are known mod `t^N`.
    prec: Option<usize>,
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)?;
        match self.prec {
            None => Ok(()),
            Some(n) => write!(f, " + O(t^{n})"),
        }
    }
}

fn trim(v: &mut Vec<Fe>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

impl Series {
    pub fn zero() -> Series {
        Series { coeffs: vec![], prec: None }
    }

    pub fn one() -> Series {
        Series::constant(Fe::ONE)
    }

    pub fn constant(c: Fe) -> Series {
        Series::exact(vec![c])
    }

    /// `c t^e`.
    pub fn monomial(c: Fe, e: usize) -> Series {
        let mut v = vec![Fe::ZERO; e + 1];
        v[e] = c;
        Series::exact(v)
    }

    pub fn t() -> Series {
        Series::monomial(Fe::ONE, 1)
    }

    /// An exact polynomial.
    pub fn exact(mut coeffs: Vec<Fe>) -> Series {
        trim(&mut coeffs);
        Series { coeffs, prec: None }
    }

    /// A truncation known modulo `t^prec`.
    pub fn truncated(mut coeffs: Vec<Fe>, prec: usize) -> Series {
        coeffs.truncate(prec);
        trim(&mut coeffs);
        Series { coeffs, prec: Some(prec) }
    }

    pub fn from_upoly(p: &UPoly) -> Series {
        Series::exact(p.0.clone())
    }

    pub fn to_upoly(&self) -> UPoly {
        UPoly::new(self.coeffs.clone())
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    pub fn precision(&self) -> Option<usize> {
        self.prec
    }

    /// Known coefficients (trailing zeros dropped).
    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe::ZERO)
    }

    /// Degree of the stored polynomial part.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn valuation(&self) -> Val {
        match self.coeffs.iter().position(|c| !c.is_zero()) {
            Some(i) => Val::Finite(i),
            None => match self.prec {
                None => Val::Infinite,
                Some(n) => Val::AtLeast(n),
            },
        }
    }

    /// Certainly zero (exact and vanishing).
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec.is_none()
    }

    /// No known nonzero coefficient.
    pub fn is_zero_to_precision(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == Val::Finite(0)
    }

    /// Coefficient of `t^0`.
    pub fn residue(&self) -> Fe {
        self.coeff(0)
    }

    fn combine_prec(a: Option<usize>, b: Option<usize>) -> Option<usize> {
        match (a, b) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => Some(x.min(y)),
        }
    }

    fn with_prec(mut coeffs: Vec<Fe>, prec: Option<usize>) -> Series {
        if let Some(n) = prec {
            coeffs.truncate(n);
        }
        trim(&mut coeffs);
        Series { coeffs, prec }
    }

    pub fn add(&self, o: &Series, f: &Field) -> Series {
        let n = self.coeffs.len().max(o.coeffs.len());
        let c = (0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect();
        Series::with_prec(c, Series::combine_prec(self.prec, o.prec))
    }

    pub fn neg(&self, f: &Field) -> Series {
        Series { coeffs: self.coeffs.iter().map(|&c| f.neg(c)).collect(), prec: self.prec }
    }

    pub fn sub(&self, o: &Series, f: &Field) -> Series {
        self.add(&o.neg(f), f)
    }

    pub fn scale(&self, c: Fe, f: &Field) -> Series {
        if c.is_zero() {
            return Series::with_prec(vec![], self.prec);
        }
        Series { coeffs: self.coeffs.iter().map(|&a| f.mul(a, c)).collect(), prec: self.prec }
    }

    pub fn mul(&self, o: &Series, f: &Field) -> Series {
        if self.is_zero() || o.is_zero() {
            return Series::zero();
        }
        let prec = match (self.prec, o.prec) {
            (None, None) => None,
            (Some(a), None) => Some(a.saturating_add(o.valuation().lower_bound())),
            (None, Some(b)) => Some(b.saturating_add(self.valuation().lower_bound())),
            (Some(a), Some(b)) => Some(
                a.saturating_add(o.valuation().lower_bound())
                    .min(b.saturating_add(self.valuation().lower_bound())),
            ),
        };
        let limit = prec.unwrap_or(usize::MAX);
        let len = (self.coeffs.len() + o.coeffs.len()).saturating_sub(1).min(limit);
        let mut out = vec![Fe::ZERO; len];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() || i >= len {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Series::with_prec(out, prec)
    }

    pub fn pow(&self, e: u32, f: &Field) -> Series {
        let mut r = Series::one();
        for _ in 0..e {
            r = r.mul(self, f);
        }
        r
    }

    /// `t^e x`. Negative shifts divide by `t^{-e}`.
    pub fn t_shift(&self, e: i64) -> Result<Series> {
        if e >= 0 {
            let e = e as usize;
            if self.coeffs.is_empty() {
                return Ok(Series { coeffs: vec![], prec: self.prec.map(|n| n + e) });
            }
            let mut c = vec![Fe::ZERO; e];
            c.extend_from_slice(&self.coeffs);
            return Ok(Series { coeffs: c, prec: self.prec.map(|n| n + e) });
        }
        let s = (-e) as usize;
        if let Val::Finite(v) = self.valuation() {
            if v < s {
                return Err(Error::NotDivisible { shift: s, valuation: v });
            }
        }
        if let Some(n) = self.prec {
            if n < s {
                return Err(Error::PrecisionExhausted(format!(
                    "dividing by t^{s} an element known mod t^{n}"
                )));
            }
        }
        let c = self.coeffs.get(s..).map(|x| x.to_vec()).unwrap_or_default();
        Ok(Series::with_prec(c, self.prec.map(|n| n - s)))
    }

    /// Substitute `t = s^e`.
    pub fn base_change(&self, e: usize) -> Series {
        assert!(e >= 1);
        let mut c = vec![Fe::ZERO; self.coeffs.len().saturating_sub(1) * e + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            c[i * e] = a;
        }
        Series::with_prec(c, self.prec.map(|n| n * e))
    }

    /// Forget coefficients from `t^n` on.
    pub fn truncate(&self, n: usize) -> Series {
        let prec = Some(self.prec.map_or(n, |p| p.min(n)));
        Series::with_prec(self.coeffs.clone(), prec)
    }

    /// Inverse of a unit, known to the given precision (exact when constant).
    pub fn inverse(&self, prec: usize, f: &Field) -> Result<Series> {
        if !self.is_unit() {
            return Err(Error::Invalid(format!("{self:?} is not a unit")));
        }
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(Series::constant(f.inv(self.coeffs[0]).unwrap()));
        }
        let n = self.prec.map_or(prec, |p| p.min(prec));
        let a0inv = f.inv(self.coeffs[0]).unwrap();
        let mut b = vec![Fe::ZERO; n];
        for k in 0..n {
            let mut s = if k == 0 { Fe::ONE } else { Fe::ZERO };
            for i in 1..=k {
                s = f.sub(s, f.mul(self.coeff(i), b[k - i]));
            }
            b[k] = f.mul(s, a0inv);
        }
        Ok(Series::truncated(b, n))
    }

    /// Apply a field map to every coefficient.
    pub fn map_coeffs(&self, g: impl Fn(Fe) -> Fe) -> Series {
        Series::with_prec(self.coeffs.iter().map(|&c| g(c)).collect(), self.prec)
    }

    /// Evaluate an exact polynomial at `t = c`.
    pub fn eval(&self, c: Fe, f: &Field) -> Result<Fe> {
        if !self.is_exact() {
            return Err(Error::PrecisionExhausted("evaluating a truncated series".into()));
        }
        Ok(self.to_upoly().eval(c, f))
    }

    /// Equality of the parts both operands know.
    pub fn agrees_with(&self, o: &Series) -> bool {
        let n = match Series::combine_prec(self.prec, o.prec) {
            Some(n) => n,
            None => self.coeffs.len().max(o.coeffs.len()),
        };
        (0..n).all(|i| self.coeff(i) == o.coeff(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;

    fn s(f: &Field, c: &[i64]) -> Series {
        Series::exact(c.iter().map(|&x| f.from_int(x)).collect())
    }

    #[test]
    fn t_shift_examples() {
        let f = Field::prime(3).unwrap();
        assert_eq!(s(&f, &[0, 0, 1, 1]).t_shift(-2).unwrap(), s(&f, &[1, 1]));
        let x = Series::truncated(vec![Fe::ZERO, Fe::ZERO, Fe::ONE], 5);
        let y = x.t_shift(-2).unwrap();
        assert_eq!(y, Series::truncated(vec![Fe::ONE], 3));
        assert_eq!(
            s(&f, &[1, 1]).t_shift(-1),
            Err(Error::NotDivisible { shift: 1, valuation: 0 })
        );
        let z = Series::truncated(vec![], 1);
        assert!(matches!(z.t_shift(-2), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn base_change_examples() {
        let f = Field::prime(3).unwrap();
        assert_eq!(s(&f, &[1, 1]).base_change(2), s(&f, &[1, 0, 1]));
        assert_eq!(s(&f, &[0, 1, 1]).base_change(3), s(&f, &[0, 0, 0, 1, 0, 0, 1]));
    }

    #[test]
    fn residue_examples() {
        let f = Field::prime(3).unwrap();
        assert_eq!(s(&f, &[1, 2]).residue(), Fe::ONE);
        assert_eq!(Series::t().residue(), Fe::ZERO);
    }

    #[test]
    fn valuation_states() {
        assert_eq!(Series::zero().valuation(), Val::Infinite);
        assert_eq!(Series::truncated(vec![], 4).valuation(), Val::AtLeast(4));
        assert_eq!(Series::t().valuation(), Val::Finite(1));
    }

    #[test]
    fn inverse_times_self_is_one() {
        let f = Field::prime(5).unwrap();
        let x = s(&f, &[2, 3, 1]);
        let y = x.inverse(10, &f).unwrap();
        let p = x.mul(&y, &f);
        assert_eq!(p, Series::truncated(vec![Fe::ONE], 10));
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::gf::Field;
    use proptest::prelude::*;

    fn series(q: u32) -> impl Strategy<Value = Series> {
        prop::collection::vec(0..q, 0..8).prop_map(move |v| {
            let f = Field::prime(q).unwrap();
            Series::exact(v.into_iter().map(|c| f.from_index(c)).collect())
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in series(5), b in series(5), c in series(5)) {
            let f = Field::prime(5).unwrap();
            prop_assert_eq!(a.mul(&b.add(&c, &f), &f), a.mul(&b, &f).add(&a.mul(&c, &f), &f));
            prop_assert_eq!(a.mul(&b, &f).mul(&c, &f), a.mul(&b.mul(&c, &f), &f));
            prop_assert_eq!(a.add(&b, &f), b.add(&a, &f));
            prop_assert_eq!(a.mul(&b, &f).residue(), f.mul(a.residue(), b.residue()));
        }

        #[test]
        fn valuation_is_additive(a in series(7), b in series(7)) {
            let f = Field::prime(7).unwrap();
            if let (Val::Finite(x), Val::Finite(y)) = (a.valuation(), b.valuation()) {
                prop_assert_eq!(a.mul(&b, &f).valuation(), Val::Finite(x + y));
            }
        }

        #[test]
        fn base_change_composes(a in series(3), e1 in 1usize..4, e2 in 1usize..4) {
            prop_assert_eq!(a.base_change(e1).base_change(e2), a.base_change(e1 * e2));
            if let Val::Finite(v) = a.valuation() {
                prop_assert_eq!(a.base_change(e1).valuation(), Val::Finite(v * e1));
            }
        }

        #[test]
        fn truncated_arithmetic_agrees_with_exact(a in series(3), b in series(3), n in 1usize..10) {
            let f = Field::prime(3).unwrap();
            let exact = a.mul(&b, &f);
            let trunc = a.truncate(n).mul(&b.truncate(n), &f);
            prop_assert!(trunc.agrees_with(&exact));
        }
    }
}
