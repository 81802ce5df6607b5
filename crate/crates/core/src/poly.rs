//! Homogeneous forms in `X_0, ..., X_n`.
//!
//! [`Form`] is generic over its coefficients: [`HomogForm`] has series
//! coefficients (the equations of a model over `S`), [`FieldForm`] has
//! field coefficients (central fibers, curves, tangent cones).
//!
//! Monomials are ordered graded-lexicographically with `X_0 > ... > X_n`;
//! iteration over a form visits the largest monomial first.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Embedding, Fe, Field};
use crate::ring::{Series, Val};
use crate::upoly::UPoly;

/// Exponent vector of a monomial.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u8>);

impl Monomial {
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn var(nvars: usize, i: usize) -> Monomial {
        let mut v = vec![0; nvars];
        v[i] = 1;
        Monomial(v)
    }

    pub fn one(nvars: usize) -> Monomial {
        Monomial(vec![0; nvars])
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    /// `<I, W>`.
    pub fn weight(&self, w: &[i64]) -> i64 {
        self.0.iter().zip(w).map(|(&e, &x)| e as i64 * x).sum()
    }

    /// All monomials of the given degree, largest first.
    pub fn all(nvars: usize, degree: u32) -> Vec<Monomial> {
        fn rec(nvars: usize, left: u32, cur: &mut Vec<u8>, out: &mut Vec<Monomial>) {
            if cur.len() == nvars - 1 {
                cur.push(left as u8);
                out.push(Monomial(cur.clone()));
                cur.pop();
                return;
            }
            for e in (0..=left).rev() {
                cur.push(e as u8);
                rec(nvars, left - e, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(nvars, degree, &mut Vec::new(), &mut out);
        out
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.degree().cmp(&self.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "X{i}")?;
            } else {
                write!(f, "X{i}^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Coefficient types a [`Form`] can carry. All arithmetic is relative to a field.
pub trait Coeff: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn from_fe(c: Fe) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self, f: &Field) -> Self;
    fn neg(&self, f: &Field) -> Self;
    fn mul(&self, o: &Self, f: &Field) -> Self;
    fn one() -> Self {
        Self::from_fe(Fe::ONE)
    }
}

impl Coeff for Fe {
    fn zero() -> Self {
        Fe::ZERO
    }
    fn from_fe(c: Fe) -> Self {
        c
    }
    fn is_zero(&self) -> bool {
        Fe::is_zero(*self)
    }
    fn add(&self, o: &Self, f: &Field) -> Self {
        f.add(*self, *o)
    }
    fn neg(&self, f: &Field) -> Self {
        f.neg(*self)
    }
    fn mul(&self, o: &Self, f: &Field) -> Self {
        f.mul(*self, *o)
    }
}

impl Coeff for Series {
    fn zero() -> Self {
        Series::zero()
    }
    fn from_fe(c: Fe) -> Self {
        Series::constant(c)
    }
    fn is_zero(&self) -> bool {
        Series::is_zero(self)
    }
    fn add(&self, o: &Self, f: &Field) -> Self {
        Series::add(self, o, f)
    }
    fn neg(&self, f: &Field) -> Self {
        Series::neg(self, f)
    }
    fn mul(&self, o: &Self, f: &Field) -> Self {
        Series::mul(self, o, f)
    }
}

impl Coeff for UPoly {
    fn zero() -> Self {
        UPoly::zero()
    }
    fn from_fe(c: Fe) -> Self {
        UPoly::constant(c)
    }
    fn is_zero(&self) -> bool {
        UPoly::is_zero(self)
    }
    fn add(&self, o: &Self, f: &Field) -> Self {
        UPoly::add(self, o, f)
    }
    fn neg(&self, f: &Field) -> Self {
        self.scale(f.neg(Fe::ONE), f)
    }
    fn mul(&self, o: &Self, f: &Field) -> Self {
        UPoly::mul(self, o, f)
    }
}

/// A homogeneous polynomial. Zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct Form<C> {
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Monomial, C>,
}

/// Forms over the series ring `S`.
pub type HomogForm = Form<Series>;
/// Forms over a finite field.
pub type FieldForm = Form<Fe>;

impl<C: Coeff> fmt::Debug for Form<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("({c:?})*{m:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<C: Coeff> Form<C> {
    pub fn zero(nvars: usize, degree: u32) -> Form<C> {
        Form { nvars, degree, terms: BTreeMap::new() }
    }

    /// Build from terms, summing repeated monomials; all must have the form's degree.
    pub fn from_terms(
        nvars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Monomial, C)>,
        f: &Field,
    ) -> Result<Form<C>> {
        let mut out = Form::zero(nvars, degree);
        for (m, c) in terms {
            if m.0.len() != nvars {
                return Err(Error::Invalid(format!("monomial {m:?} has wrong length, expected {nvars}")));
            }
            if m.degree() != degree {
                return Err(Error::Invalid(format!("monomial {m:?} is not of degree {degree}")));
            }
            out.add_term(m, c, f);
        }
        Ok(out)
    }

    /// The variable `X_i` as a linear form.
    pub fn var(nvars: usize, i: usize) -> Form<C> {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(nvars, i), C::one());
        Form { nvars, degree: 1, terms }
    }

    pub fn constant(nvars: usize, c: C) -> Form<C> {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(nvars), c);
        }
        Form { nvars, degree: 0, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn degree(&self) -> u32 {
        self.degree
    }
    pub fn terms(&self) -> &BTreeMap<Monomial, C> {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: C, f: &Field) {
        debug_assert_eq!(m.degree(), self.degree);
        let new = match self.terms.remove(&m) {
            Some(old) => old.add(&c, f),
            None => c,
        };
        if !new.is_zero() {
            self.terms.insert(m, new);
        }
    }

    pub fn add(&self, o: &Form<C>, f: &Field) -> Form<C> {
        assert_eq!(self.nvars, o.nvars);
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        assert_eq!(self.degree, o.degree, "adding forms of different degrees");
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone(), f);
        }
        out
    }

    pub fn neg(&self, f: &Field) -> Form<C> {
        self.map(|c| c.neg(f))
    }

    pub fn sub(&self, o: &Form<C>, f: &Field) -> Form<C> {
        self.add(&o.neg(f), f)
    }

    pub fn scale(&self, c: &C, f: &Field) -> Form<C> {
        let mut out = Form::zero(self.nvars, self.degree);
        for (m, a) in &self.terms {
            let v = a.mul(c, f);
            if !v.is_zero() {
                out.terms.insert(m.clone(), v);
            }
        }
        out
    }

    pub fn mul(&self, o: &Form<C>, f: &Field) -> Form<C> {
        assert_eq!(self.nvars, o.nvars);
        let mut out = Form::zero(self.nvars, self.degree + o.degree);
        for (m1, a) in &self.terms {
            for (m2, b) in &o.terms {
                out.add_term(m1.mul(m2), a.mul(b, f), f);
            }
        }
        out
    }

    pub fn pow(&self, e: u32, f: &Field) -> Form<C> {
        let mut r = Form::constant(self.nvars, C::one());
        for _ in 0..e {
            r = r.mul(self, f);
        }
        r
    }

    /// Coefficient-wise map, dropping terms that become zero.
    pub fn map<D: Coeff>(&self, g: impl Fn(&C) -> D) -> Form<D> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let v = g(c);
            if !v.is_zero() {
                terms.insert(m.clone(), v);
            }
        }
        Form { nvars: self.nvars, degree: self.degree, terms }
    }

    pub fn eval(&self, x: &[C], f: &Field) -> C {
        assert_eq!(x.len(), self.nvars);
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t = t.mul(&x[i], f);
                }
            }
            acc = acc.add(&t, f);
        }
        acc
    }

    /// `F(G_0, ..., G_n)` for forms `G_i` of a common degree in any number of variables.
    pub fn substitute(&self, subs: &[Form<C>], f: &Field) -> Form<C> {
        assert_eq!(subs.len(), self.nvars);
        let target_vars = subs[0].nvars;
        let e = subs.iter().find(|g| !g.is_zero()).map_or(0, |g| g.degree);
        let mut out = Form::zero(target_vars, self.degree * e);
        // cache powers per variable
        let mut powers: Vec<Vec<Form<C>>> = subs.iter().map(|g| vec![Form::constant(target_vars, C::one()), g.clone()]).collect();
        for (m, c) in &self.terms {
            let mut t = Form::constant(target_vars, c.clone());
            for (i, &ex) in m.0.iter().enumerate() {
                while powers[i].len() <= ex as usize {
                    let next = powers[i].last().unwrap().mul(&subs[i], f);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][ex as usize], f);
            }
            if t.is_zero() {
                continue;
            }
            for (mm, cc) in t.terms {
                out.add_term(mm, cc, f);
            }
        }
        out.degree = self.degree * e;
        out
    }

    /// Formal partial derivative with respect to `X_i`.
    pub fn derivative(&self, i: usize, f: &Field) -> Form<C> {
        let mut out = Form::zero(self.nvars, self.degree.saturating_sub(1));
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut mm = m.clone();
            mm.0[i] -= 1;
            out.add_term(mm, c.mul(&C::from_fe(f.from_int(e as i64)), f), f);
        }
        out
    }

    /// Variables actually appearing.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.nvars).filter(|&i| self.terms.keys().any(|m| m.0[i] > 0)).collect()
    }

    /// Permute variables: new `X_{perm[i]}` is old `X_i`.
    pub fn permute(&self, perm: &[usize]) -> Form<C> {
        let mut out = Form::zero(self.nvars, self.degree);
        for (m, c) in &self.terms {
            let mut v = vec![0u8; self.nvars];
            for (i, &e) in m.0.iter().enumerate() {
                v[perm[i]] = e;
            }
            out.terms.insert(Monomial(v), c.clone());
        }
        out
    }
}

impl Form<Fe> {
    /// Lift to series coefficients (exact constants).
    pub fn lift(&self) -> HomogForm {
        self.map(|&c| Series::constant(c))
    }

    /// Push coefficients through a field embedding.
    pub fn embed(&self, e: &Embedding) -> FieldForm {
        self.map(|&c| e.apply(c))
    }

    /// Evaluation on a point given by field elements.
    pub fn eval_point(&self, x: &[Fe], f: &Field) -> Fe {
        self.eval(x, f)
    }
}

impl Form<Series> {
    /// Reduction mod `t`.
    pub fn residue(&self) -> FieldForm {
        self.map(|c| c.residue())
    }

    /// `F(t^{w_0} X_0, ..., t^{w_n} X_n)`.
    pub fn weighted_scale(&self, w: &[i64]) -> Result<HomogForm> {
        assert_eq!(w.len(), self.nvars);
        let mut out = Form::zero(self.nvars, self.degree);
        for (m, c) in &self.terms {
            let shift = m.weight(w);
            out.terms.insert(m.clone(), c.t_shift(shift)?);
        }
        Ok(out)
    }

    /// Multiply every coefficient by `t^e` (negative `e` divides).
    pub fn t_shift(&self, e: i64) -> Result<HomogForm> {
        let mut out = Form::zero(self.nvars, self.degree);
        for (m, c) in &self.terms {
            out.terms.insert(m.clone(), c.t_shift(e)?);
        }
        Ok(out)
    }

    /// Substitute `t = s^e` in every coefficient.
    pub fn base_change(&self, e: usize) -> HomogForm {
        self.map(|c| c.base_change(e))
    }

    /// Minimum coefficient valuation; `None` when every term is precision-limited.
    pub fn content_valuation(&self) -> Val {
        let mut best = Val::Infinite;
        for c in self.terms.values() {
            best = min_val(best, c.valuation());
        }
        best
    }

    /// Coefficient of `t^k` as a form over the field.
    pub fn t_coefficient(&self, k: usize) -> FieldForm {
        self.map(|c| c.coeff(k))
    }

    /// True if all coefficients are exact polynomials.
    pub fn is_exact(&self) -> bool {
        self.terms.values().all(|c| c.is_exact())
    }
}

/// Minimum of two valuations; `AtLeast` beats `Finite` only when smaller.
pub fn min_val(a: Val, b: Val) -> Val {
    use Val::*;
    match (a, b) {
        (Infinite, x) | (x, Infinite) => x,
        (Finite(x), Finite(y)) => Finite(x.min(y)),
        (Finite(x), AtLeast(y)) | (AtLeast(y), Finite(x)) => {
            if x <= y {
                Finite(x)
            } else {
                AtLeast(y)
            }
        }
        (AtLeast(x), AtLeast(y)) => AtLeast(x.min(y)),
    }
}

/// `X = A Y`: row `i` of `matrix` expresses old `X_i` in the new `Y_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearChange {
    pub matrix: Vec<Vec<Series>>,
}

impl LinearChange {
    pub fn identity(n: usize) -> LinearChange {
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Series::one() } else { Series::zero() }).collect())
            .collect();
        LinearChange { matrix }
    }

    pub fn from_field(m: &[Vec<Fe>]) -> LinearChange {
        LinearChange { matrix: m.iter().map(|r| r.iter().map(|&c| Series::constant(c)).collect()).collect() }
    }

    pub fn size(&self) -> usize {
        self.matrix.len()
    }

    pub fn residue(&self) -> Vec<Vec<Fe>> {
        self.matrix.iter().map(|r| r.iter().map(|c| c.residue()).collect()).collect()
    }

    /// The determinant is a unit iff it is nonzero modulo `t`.
    pub fn is_unit(&self, f: &Field) -> bool {
        crate::linalg::rank(&self.residue(), f) == self.size()
    }

    pub fn is_identity(&self) -> bool {
        *self == LinearChange::identity(self.size())
    }

    /// `A B`.
    pub fn compose(&self, o: &LinearChange, f: &Field) -> LinearChange {
        let n = self.size();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(Series::zero(), |acc, k| acc.add(&self.matrix[i][k].mul(&o.matrix[k][j], f), f))
                    })
                    .collect()
            })
            .collect();
        LinearChange { matrix }
    }

    /// Inverse over `S`: exact when the entries are constants.
    pub fn inverse(&self, prec: usize, f: &Field) -> Result<LinearChange> {
        let n = self.size();
        let mut a: Vec<Vec<Series>> = self.matrix.clone();
        let mut inv = LinearChange::identity(n).matrix;
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| a[r][col].is_unit())
                .ok_or_else(|| Error::NotUnit("matrix is singular mod t".into()))?;
            a.swap(col, piv);
            inv.swap(col, piv);
            let pinv = a[col][col].inverse(prec, f)?;
            for j in 0..n {
                a[col][j] = a[col][j].mul(&pinv, f);
                inv[col][j] = inv[col][j].mul(&pinv, f);
            }
            for r in 0..n {
                if r == col || a[r][col].is_zero() {
                    continue;
                }
                let factor = a[r][col].clone();
                for j in 0..n {
                    a[r][j] = a[r][j].sub(&factor.mul(&a[col][j], f), f);
                    inv[r][j] = inv[r][j].sub(&factor.mul(&inv[col][j], f), f);
                }
            }
        }
        Ok(LinearChange { matrix: inv })
    }

    /// Rows as linear forms over `S`.
    pub fn linear_forms(&self) -> Vec<HomogForm> {
        let n = self.size();
        self.matrix
            .iter()
            .map(|row| {
                let mut g = HomogForm::zero(n, 1);
                for (j, c) in row.iter().enumerate() {
                    if !c.is_zero() {
                        g.terms.insert(Monomial::var(n, j), c.clone());
                    }
                }
                g
            })
            .collect()
    }

    pub fn base_change(&self, e: usize) -> LinearChange {
        LinearChange { matrix: self.matrix.iter().map(|r| r.iter().map(|c| c.base_change(e)).collect()).collect() }
    }
}

/// `F(A Y)`.
pub fn apply_linear(form: &HomogForm, a: &LinearChange, f: &Field) -> Result<HomogForm> {
    if a.size() != form.nvars() {
        return Err(Error::Invalid("matrix size does not match the number of variables".into()));
    }
    if !a.is_unit(f) {
        return Err(Error::NotUnit("determinant vanishes mod t".into()));
    }
    Ok(form.substitute(&a.linear_forms(), f))
}

/// `F(A Y)` for a field matrix on a field form.
pub fn apply_field_linear(form: &FieldForm, a: &[Vec<Fe>], f: &Field) -> FieldForm {
    let n = a.len();
    let subs: Vec<FieldForm> = a
        .iter()
        .map(|row| {
            let terms = row.iter().enumerate().map(|(j, &c)| (Monomial::var(n, j), c));
            FieldForm::from_terms(n, 1, terms, f).unwrap()
        })
        .collect();
    form.substitute(&subs, f)
}

pub fn weighted_scale(form: &HomogForm, w: &[i64]) -> Result<HomogForm> {
    form.weighted_scale(w)
}

/// Plücker coefficients `a_IJ = F_I G_J - F_J G_I` over ordered pairs `I < J`.
pub fn pencil_wedge<C: Coeff>(a: &Form<C>, b: &Form<C>, f: &Field) -> BTreeMap<(Monomial, Monomial), C> {
    let mut monos: Vec<&Monomial> = a.terms.keys().chain(b.terms.keys()).collect();
    monos.sort();
    monos.dedup();
    let mut out = BTreeMap::new();
    for (x, i) in monos.iter().enumerate() {
        for j in &monos[x + 1..] {
            let v = a.coeff(i).mul(&b.coeff(j), f).add(&a.coeff(j).mul(&b.coeff(i), f).neg(f), f);
            if !v.is_zero() {
                out.insert(((*i).clone(), (*j).clone()), v);
            }
        }
    }
    out
}

/// A map `P^1 -> P^n` given by binary forms of a common degree in `(s : u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryCurveMap {
    pub components: Vec<FieldForm>,
}

impl BinaryCurveMap {
    pub fn new(components: Vec<FieldForm>, f: &Field) -> Result<BinaryCurveMap> {
        if components.iter().all(|c| c.is_zero()) {
            return Err(Error::Invalid("all components vanish".into()));
        }
        let d = components.iter().find(|c| !c.is_zero()).unwrap().degree();
        if components.iter().any(|c| c.nvars() != 2 || (!c.is_zero() && c.degree() != d)) {
            return Err(Error::Invalid("components must be binary forms of one degree".into()));
        }
        let components = components.into_iter().map(|c| if c.is_zero() { FieldForm::zero(2, d) } else { c }).collect();
        let mut map = BinaryCurveMap { components };
        map.make_primitive(f);
        Ok(map)
    }

    pub fn nvars(&self) -> usize {
        self.components.len()
    }

    pub fn degree(&self) -> u32 {
        self.components[0].degree()
    }

    /// Image of `(s : u)`.
    pub fn at(&self, s: Fe, u: Fe, f: &Field) -> Vec<Fe> {
        self.components.iter().map(|c| c.eval(&[s, u], f)).collect()
    }

    /// Divide out the common binary-form factor of the components.
    fn make_primitive(&mut self, f: &Field) {
        let d = self.degree() as usize;
        let to_u = |c: &FieldForm| -> UPoly {
            // dehomogenize at u = 1: coefficient of s^i u^(d-i)
            let mut v = vec![Fe::ZERO; d + 1];
            for (m, &a) in c.terms() {
                v[m.0[0] as usize] = a;
            }
            UPoly::new(v)
        };
        let polys: Vec<_> = self.components.iter().map(to_u).collect();
        let mut g = UPoly::zero();
        for p in &polys {
            g = g.gcd(p, f);
        }
        // factors of u: all components have degree < d in s
        let max_s = polys.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
        let u_power = d - max_s;
        let gdeg = g.degree().unwrap_or(0);
        if gdeg == 0 && u_power == 0 {
            return;
        }
        let new_d = d - gdeg - u_power;
        self.components = polys
            .iter()
            .map(|p| {
                let q = if gdeg > 0 { p.divrem(&g, f).0 } else { p.clone() };
                let terms = (0..=new_d).map(|i| (Monomial(vec![i as u8, (new_d - i) as u8]), q.coeff(i)));
                FieldForm::from_terms(2, new_d as u32, terms, f).unwrap()
            })
            .collect();
    }
}

/// `F(L_0(s,u), ..., L_n(s,u))`; identically zero iff the curve lies on `F = 0`.
pub fn compose_line(form: &FieldForm, curve: &BinaryCurveMap, f: &Field) -> FieldForm {
    assert_eq!(form.nvars(), curve.nvars());
    form.substitute(&curve.components, f)
}

/// Symmetric Gram matrix of a quadric (char != 2): `F = X^T A X`.
pub fn gram_matrix<C: Coeff>(q: &Form<C>, f: &Field) -> Vec<Vec<C>> {
    assert_eq!(q.degree(), 2);
    let n = q.nvars();
    let half = C::from_fe(f.inv(f.from_int(2)).unwrap());
    let mut a = vec![vec![C::zero(); n]; n];
    for (m, c) in q.terms() {
        let idx: Vec<usize> = (0..n).filter(|&i| m.0[i] > 0).collect();
        if idx.len() == 1 {
            a[idx[0]][idx[0]] = c.clone();
        } else {
            let h = c.mul(&half, f);
            a[idx[0]][idx[1]] = h.clone();
            a[idx[1]][idx[0]] = h;
        }
    }
    a
}

/// Quadric from a symmetric matrix.
pub fn quadric_from_gram(a: &[Vec<Fe>], f: &Field) -> FieldForm {
    let n = a.len();
    let mut q = FieldForm::zero(n, 2);
    for i in 0..n {
        for j in i..n {
            let c = if i == j { a[i][i] } else { f.add(a[i][j], a[j][i]) };
            if !c.is_zero() {
                q.add_term(Monomial::var(n, i).mul(&Monomial::var(n, j)), c, f);
            }
        }
    }
    q
}

/// Parse-free helper: a field form from `(exponents, integer coefficient)` pairs.
pub fn field_form(nvars: usize, degree: u32, terms: &[(&[u8], i64)], f: &Field) -> FieldForm {
    FieldForm::from_terms(nvars, degree, terms.iter().map(|(e, c)| (Monomial(e.to_vec()), f.from_int(*c))), f)
        .expect("well-formed terms")
}

/// A series form from `(exponents, [c_0, c_1, ...])` pairs with integer coefficients in `t`.
pub fn series_form(nvars: usize, degree: u32, terms: &[(&[u8], &[i64])], f: &Field) -> HomogForm {
    HomogForm::from_terms(
        nvars,
        degree,
        terms
            .iter()
            .map(|(e, c)| (Monomial(e.to_vec()), Series::exact(c.iter().map(|&x| f.from_int(x)).collect()))),
        f,
    )
    .expect("well-formed terms")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_order_is_graded_lex() {
        let all = Monomial::all(3, 2);
        let expect: Vec<Vec<u8>> =
            vec![vec![2, 0, 0], vec![1, 1, 0], vec![1, 0, 1], vec![0, 2, 0], vec![0, 1, 1], vec![0, 0, 2]];
        assert_eq!(all.iter().map(|m| m.0.clone()).collect::<Vec<_>>(), expect);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
        assert_eq!(Monomial::all(6, 3).len(), 56);
    }

    #[test]
    fn swap_variables() {
        let f = Field::prime(3).unwrap();
        let q = series_form(2, 2, &[(&[2, 0], &[1]), (&[0, 2], &[0, 1])], &f);
        let swap = LinearChange::from_field(&[vec![Fe::ZERO, Fe::ONE], vec![Fe::ONE, Fe::ZERO]]);
        let r = apply_linear(&q, &swap, &f).unwrap();
        assert_eq!(r, series_form(2, 2, &[(&[0, 2], &[1]), (&[2, 0], &[0, 1])], &f));
        assert_eq!(apply_linear(&q, &LinearChange::identity(2), &f).unwrap(), q);
    }

    #[test]
    fn singular_matrix_rejected() {
        let f = Field::prime(3).unwrap();
        let q = series_form(2, 2, &[(&[2, 0], &[1])], &f);
        let m = LinearChange {
            matrix: vec![vec![Series::t(), Series::zero()], vec![Series::zero(), Series::one()]],
        };
        assert!(matches!(apply_linear(&q, &m, &f), Err(Error::NotUnit(_))));
    }

    #[test]
    fn weighted_scale_examples() {
        let f = Field::prime(5).unwrap();
        let q = series_form(3, 2, &[(&[1, 1, 0], &[1]), (&[0, 0, 2], &[1])], &f);
        assert_eq!(q.weighted_scale(&[0, 0, 0]).unwrap(), q);
        let r = q.weighted_scale(&[1, 1, 0]).unwrap();
        assert_eq!(r, series_form(3, 2, &[(&[1, 1, 0], &[0, 0, 1]), (&[0, 0, 2], &[1])], &f));
        let q2 = series_form(3, 2, &[(&[1, 0, 1], &[1]), (&[0, 2, 0], &[1])], &f);
        assert_eq!(q2.weighted_scale(&[2, 1, 0]).unwrap(), q2.t_shift(2).unwrap());
    }

    #[test]
    fn wedge_examples() {
        let f = Field::prime(3).unwrap();
        let a = series_form(4, 2, &[(&[1, 1, 0, 0], &[1])], &f);
        let b = series_form(4, 2, &[(&[1, 1, 0, 0], &[1]), (&[0, 0, 1, 1], &[0, 1])], &f);
        assert!(pencil_wedge(&a, &a, &f).is_empty());
        let w = pencil_wedge(&a, &b, &f);
        assert_eq!(w.len(), 1);
        let ((i, j), v) = w.iter().next().unwrap();
        assert_eq!((i.0.clone(), j.0.clone()), (vec![1, 1, 0, 0], vec![0, 0, 1, 1]));
        assert_eq!(*v, Series::t());
    }

    #[test]
    fn conic_parametrization_lies_on_quadric() {
        let f = Field::prime(5).unwrap();
        let q = field_form(3, 2, &[(&[1, 1, 0], 1), (&[0, 0, 2], -1)], &f);
        let comps = vec![
            field_form(2, 2, &[(&[2, 0], 1)], &f),
            field_form(2, 2, &[(&[0, 2], 1)], &f),
            field_form(2, 2, &[(&[1, 1], 1)], &f),
        ];
        let curve = BinaryCurveMap::new(comps, &f).unwrap();
        assert!(compose_line(&q, &curve, &f).is_zero());
    }

    #[test]
    fn constant_map_composes_to_value_times_power() {
        let f = Field::prime(7).unwrap();
        let g = field_form(3, 3, &[(&[3, 0, 0], 1), (&[0, 1, 2], 2)], &f);
        let pt = [f.from_int(1), f.from_int(2), f.from_int(3)];
        let comps: Vec<FieldForm> = pt.iter().map(|&c| field_form(2, 1, &[(&[0, 1], 0)], &f).add(&FieldForm::from_terms(2, 1, [(Monomial(vec![0, 1]), c)], &f).unwrap(), &f)).collect();
        let curve = BinaryCurveMap { components: comps };
        let r = compose_line(&g, &curve, &f);
        let v = g.eval(&pt, &f);
        assert_eq!(r, FieldForm::from_terms(2, 3, [(Monomial(vec![0, 3]), v)], &f).unwrap());
    }

    #[test]
    fn primitive_curves_drop_common_factors() {
        let f = Field::prime(5).unwrap();
        // (s u : u^2) = u (s : u)
        let c = BinaryCurveMap::new(
            vec![field_form(2, 2, &[(&[1, 1], 1)], &f), field_form(2, 2, &[(&[0, 2], 1)], &f)],
            &f,
        )
        .unwrap();
        assert_eq!(c.degree(), 1);
    }
}
