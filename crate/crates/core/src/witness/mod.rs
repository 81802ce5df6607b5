//! Constructive witnesses over finite fields: smooth and rational points, descent of
//! points along Frobenius orbits, rational curves joining points, the scheme of lines
//! through a point, tangent cones and plane sections.
//!
//! Every emitted object carries a [`Certificate`] whose identities are recomputed
//! exactly before it is returned; a failing identity is an error, never a silent result.

mod connect;
mod local;
mod points;
#[cfg(test)]
mod tests;

use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf::{Embedding, Fe, Field};
use crate::linalg;
use crate::poly::{apply_field_linear, BinaryCurveMap, FieldForm, Monomial};
use crate::scheme::canonicalize;

pub use connect::{r_connect_ci22, r_connect_cubic};
pub use local::{
    lines_through_point, plane_conic, tangent_cone, tangent_section, ConicKind, ConicReport, LinesThroughPointScheme,
    TangentConeReport, TangentSection,
};
pub use points::{
    descend_even_cubic, descend_odd, quadric_point, smooth_point_from_double_point, smooth_point_on_cubic, CubicPoint,
    NormalFormTag,
};

/// A point of `P^{n-1}` over `field`, first nonzero coordinate 1.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjPoint {
    pub field: Arc<Field>,
    pub coords: Vec<Fe>,
}

impl ProjPoint {
    pub fn new(field: &Arc<Field>, mut coords: Vec<Fe>) -> Result<ProjPoint> {
        if coords.iter().all(|c| c.is_zero()) {
            return Err(Error::Invalid("all coordinates vanish".into()));
        }
        canonicalize(&mut coords, field);
        Ok(ProjPoint { field: field.clone(), coords })
    }

    pub fn from_ints(field: &Arc<Field>, coords: &[i64]) -> Result<ProjPoint> {
        ProjPoint::new(field, coords.iter().map(|&c| field.from_int(c)).collect())
    }

    pub fn nvars(&self) -> usize {
        self.coords.len()
    }

    pub fn indices(&self) -> Vec<u32> {
        self.coords.iter().map(|&c| self.field.index(c)).collect()
    }

    /// All forms (over the point's field) vanish here.
    pub fn lies_on(&self, eqs: &[FieldForm]) -> bool {
        eqs.iter().all(|e| e.eval_point(&self.coords, &self.field).is_zero())
    }

    pub fn frobenius(&self, power: i64) -> ProjPoint {
        let coords = self.coords.iter().map(|&c| self.field.frobenius(c, power)).collect();
        ProjPoint::new(&self.field, coords).unwrap()
    }

    /// Fixed by the Frobenius of the ground field the point's field was built over.
    pub fn frobenius_fixed(&self) -> bool {
        self.coords.iter().all(|&c| self.field.frobenius(c, 1) == c)
    }

    /// The same point over a subfield, when its coordinates lie there.
    pub fn descend(&self, base: &Arc<Field>) -> Option<ProjPoint> {
        let emb = Embedding::cached(base, &self.field).ok()?;
        let coords = self.coords.iter().map(|&c| emb.preimage(c)).collect::<Option<Vec<_>>>()?;
        ProjPoint::new(base, coords).ok()
    }

    pub fn embed(&self, target: &Arc<Field>) -> Result<ProjPoint> {
        let emb = Embedding::cached(&self.field, target)?;
        ProjPoint::new(target, self.coords.iter().map(|&c| emb.apply(c)).collect())
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ProjPoint", 2)?;
        st.serialize_field("field_size", &self.field.size())?;
        st.serialize_field("coords", &self.indices())?;
        st.end()
    }
}

/// One exactly checked identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub identity: String,
    pub holds: bool,
}

/// The identities verified for a witness, and how many candidates were tried.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub checks: Vec<Check>,
    pub draws: usize,
}

impl Certificate {
    pub(crate) fn record(&mut self, identity: impl Into<String>, holds: bool) {
        self.checks.push(Check { identity: identity.into(), holds });
    }

    pub fn all_hold(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.holds)
    }

    /// Fails on the first identity that does not hold.
    pub(crate) fn seal(self) -> Result<Certificate> {
        if let Some(c) = self.checks.iter().find(|c| !c.holds) {
            return Err(Error::CertificateFailed(c.identity.clone()));
        }
        if self.checks.is_empty() {
            return Err(Error::CertificateFailed("no identity recorded".into()));
        }
        Ok(self)
    }
}

/// A point together with its certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointWitness {
    pub point: ProjPoint,
    /// The Jacobian of the defining forms has full rank at the point.
    pub smooth: bool,
    pub certificate: Certificate,
}

/// A rational curve `P^1 -> P^{n-1}` with its certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveWitness {
    pub field: Arc<Field>,
    pub curve: BinaryCurveMap,
    pub certificate: Certificate,
}

impl Serialize for CurveWitness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // each component as coefficient indices of s^d, s^(d-1) u, ..., u^d
        let d = self.curve.degree();
        let comps: Vec<Vec<u32>> = self
            .curve
            .components
            .iter()
            .map(|c| (0..=d).rev().map(|i| self.field.index(c.coeff(&Monomial(vec![i as u8, (d - i) as u8])))).collect())
            .collect();
        let mut st = s.serialize_struct("CurveWitness", 4)?;
        st.serialize_field("field_size", &self.field.size())?;
        st.serialize_field("degree", &d)?;
        st.serialize_field("components", &comps)?;
        st.serialize_field("certificate", &self.certificate)?;
        st.end()
    }
}

/// Do `a` and `b` give the same projective point?
pub(crate) fn same_point(a: &[Fe], b: &[Fe], f: &Field) -> bool {
    if a.iter().all(|c| c.is_zero()) || b.iter().all(|c| c.is_zero()) {
        return false;
    }
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    canonicalize(&mut a, f);
    canonicalize(&mut b, f);
    a == b
}

/// Rank of the Jacobian matrix of `eqs` at `x`.
pub(crate) fn jacobian_rank(eqs: &[FieldForm], x: &[Fe], f: &Field) -> usize {
    let n = x.len();
    let rows: Vec<Vec<Fe>> =
        eqs.iter().map(|e| (0..n).map(|i| e.derivative(i, f).eval_point(x, f)).collect()).collect();
    linalg::rank(&rows, f)
}

/// Coordinates `X = P Y` in which a chosen point is `e_0`.
#[derive(Clone, Debug)]
pub(crate) struct Frame {
    pub p: Vec<Vec<Fe>>,
    pub pinv: Vec<Vec<Fe>>,
}

impl Frame {
    /// `P` completes `x` to a basis with unit vectors; its first column is `x`.
    pub fn at(x: &[Fe], f: &Field) -> Frame {
        let (p, _) = linalg::complete_columns(&[x.to_vec()], x.len(), f);
        Frame::from_matrix(p, f)
    }

    pub fn from_matrix(p: Vec<Vec<Fe>>, f: &Field) -> Frame {
        let pinv = linalg::inverse(&p, f).expect("frame matrix is invertible");
        Frame { p, pinv }
    }

    /// `F(P Y)`.
    pub fn pull(&self, g: &FieldForm, f: &Field) -> FieldForm {
        apply_field_linear(g, &self.p, f)
    }

    /// Old coordinates of a point given in the frame.
    pub fn push_point(&self, y: &[Fe], f: &Field) -> Vec<Fe> {
        linalg::mat_vec(&self.p, y, f)
    }

    /// Frame coordinates of a point.
    pub fn pull_point(&self, x: &[Fe], f: &Field) -> Vec<Fe> {
        linalg::mat_vec(&self.pinv, x, f)
    }

    /// Components `X_i = sum_j P_ij Y_j` of a curve given in frame coordinates.
    pub fn push_curve(&self, comps: &[FieldForm], f: &Field) -> Vec<FieldForm> {
        let d = comps.iter().find(|c| !c.is_zero()).map_or(0, |c| c.degree());
        self.p
            .iter()
            .map(|row| {
                row.iter().zip(comps).fold(FieldForm::zero(2, d), |acc, (&c, y)| {
                    if c.is_zero() || y.is_zero() {
                        acc
                    } else {
                        acc.add(&y.scale(&c, f), f)
                    }
                })
            })
            .collect()
    }
}

/// `g = sum_k Y_0^{d-k} parts[k]` with `parts[k]` of degree `k` in `Y_1..Y_{n-1}`.
pub(crate) fn expand_at_origin(g: &FieldForm, f: &Field) -> Vec<FieldForm> {
    let n = g.nvars();
    let d = g.degree();
    let mut parts: Vec<FieldForm> = (0..=d).map(|k| FieldForm::zero(n - 1, k)).collect();
    for (m, &c) in g.terms() {
        let k = d - m.0[0] as u32;
        parts[k as usize].add_term(Monomial(m.0[1..].to_vec()), c, f);
    }
    parts
}

/// Ternary (or `m`-ary) restriction `g(sum_j s_j b_j)` to the span of `basis`.
pub(crate) fn restrict_to_span(g: &FieldForm, basis: &[Vec<Fe>], f: &Field) -> FieldForm {
    let m = basis.len();
    let n = g.nvars();
    let subs: Vec<FieldForm> = (0..n)
        .map(|i| FieldForm::from_terms(m, 1, (0..m).map(|j| (Monomial::var(m, j), basis[j][i])), f).unwrap())
        .collect();
    g.substitute(&subs, f)
}

/// `sum_j s_j b_j`.
pub(crate) fn combine(basis: &[Vec<Fe>], s: &[Fe], f: &Field) -> Vec<Fe> {
    let n = basis[0].len();
    (0..n).map(|i| basis.iter().zip(s).fold(Fe::ZERO, |acc, (b, &c)| f.add(acc, f.mul(c, b[i])))).collect()
}
