use std::sync::Arc;

use serde::Serialize;

use super::{combine, expand_at_origin, jacobian_rank, restrict_to_span, Certificate, Frame, PointWitness, ProjPoint};
use crate::error::{Error, Result};
use crate::fiber::{linear_factors_cubic, projective_points, vertex_space};
use crate::gf::{Embedding, Fe, Field};
use crate::linalg;
use crate::poly::FieldForm;
use crate::scheme::first_point;

/// The plane normal forms of cubics without smooth rational points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalFormTag {
    /// A product of three Galois-conjugate linear forms.
    ThreeConjugateHyperplanes,
    /// A cube of a rational linear form.
    TripleHyperplane,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CubicPoint {
    Point(PointWitness),
    Tag(NormalFormTag),
}

fn require_odd(f: &Field) -> Result<()> {
    if f.p() == 2 {
        return Err(Error::UnsupportedCase("characteristic 2".into()));
    }
    Ok(())
}

fn gradient(g: &FieldForm, f: &Field) -> Vec<FieldForm> {
    (0..g.nvars()).map(|i| g.derivative(i, f)).collect()
}

fn nonzero_at(forms: &[FieldForm], x: &[Fe], f: &Field) -> bool {
    forms.iter().any(|d| !d.eval_point(x, f).is_zero())
}

/// Certificate with incidence and smoothness recomputed from scratch.
fn witness(eqs: &[FieldForm], field: &Arc<Field>, coords: Vec<Fe>, mut cert: Certificate) -> Result<PointWitness> {
    let point = ProjPoint::new(field, coords)?;
    cert.record("all defining forms vanish at the point", point.lies_on(eqs));
    let smooth = jacobian_rank(eqs, &point.coords, field) == eqs.len();
    Ok(PointWitness { point, smooth, certificate: cert.seal()? })
}

/// A smooth rational point of a cubic, or the normal form explaining why there is none.
///
/// The scan is exhaustive in canonical order. If all rational points are singular
/// and one of them has multiplicity two, the point is produced from it by
/// [`smooth_point_from_double_point`].
pub fn smooth_point_on_cubic(g: &FieldForm, field: &Arc<Field>) -> Result<CubicPoint> {
    require_odd(field)?;
    let n = g.nvars();
    if g.degree() != 3 || g.is_zero() {
        return Err(Error::Invalid("expected a nonzero cubic form".into()));
    }
    if n < 3 {
        return Err(Error::Invalid("a cubic of positive dimension needs at least three variables".into()));
    }
    let f = &**field;
    let grad = gradient(g, f);
    let eqs = [g.clone()];
    if let Some(x) = first_point(f, n, &eqs, |x| nonzero_at(&grad, x, f)) {
        let mut cert = Certificate::default();
        cert.record("a partial derivative is nonzero", nonzero_at(&grad, &x, f));
        return Ok(CubicPoint::Point(witness(&eqs, field, x, cert)?));
    }
    let hess: Vec<FieldForm> = grad.iter().flat_map(|d| gradient(d, f)).collect();
    if let Some(z) = first_point(f, n, &eqs, |x| nonzero_at(&hess, x, f)) {
        let frame = Frame::at(&z, f);
        let q = &expand_at_origin(&frame.pull(g, f), f)[2];
        let dir = projective_points(n - 1, f)
            .find(|v| !q.eval_point(v, f).is_zero())
            .ok_or_else(|| Error::CertificateFailed("tangent cone vanishes on every rational direction".into()))?;
        return smooth_point_from_double_point(g, field, &z, &dir).map(CubicPoint::Point);
    }
    if n - vertex_space(g, f).len() == 1 {
        return Ok(CubicPoint::Tag(NormalFormTag::TripleHyperplane));
    }
    let factors = linear_factors_cubic(g, field)?;
    if factors.len() == 3 && factors.iter().all(|l| l.rational.is_none()) {
        Ok(CubicPoint::Tag(NormalFormTag::ThreeConjugateHyperplanes))
    } else {
        Err(Error::CertificateFailed("no smooth or double rational point, yet not a normal form".into()))
    }
}

/// The point `[-C(v), v Q(v)]` for a double point `z`, where `F = Y_0 Q + C` in the
/// frame obtained by completing `z` with unit vectors and `v` is a direction in the
/// last `n - 1` frame coordinates with `Q(v) != 0`. It is smooth since `dF/dY_0 = Q(v)^3`.
pub fn smooth_point_from_double_point(g: &FieldForm, field: &Arc<Field>, z: &[Fe], direction: &[Fe]) -> Result<PointWitness> {
    let f = &**field;
    let n = g.nvars();
    if z.len() != n || direction.len() != n - 1 {
        return Err(Error::Invalid("point or direction has the wrong length".into()));
    }
    let frame = Frame::at(z, f);
    let parts = expand_at_origin(&frame.pull(g, f), f);
    if !parts[0].is_zero() || !parts[1].is_zero() || parts[2].is_zero() {
        return Err(Error::Invalid("z is not a point of multiplicity two".into()));
    }
    let qv = parts[2].eval_point(direction, f);
    if qv.is_zero() {
        return Err(Error::Invalid("the tangent cone vanishes in this direction".into()));
    }
    let cv = parts[3].eval_point(direction, f);
    let mut y = vec![f.neg(cv)];
    y.extend(direction.iter().map(|&d| f.mul(d, qv)));
    let x = frame.push_point(&y, f);
    let mut cert = Certificate::default();
    cert.record("a partial derivative is nonzero", nonzero_at(&gradient(g, f), &x, f));
    witness(&[g.clone()], field, x, cert)
}

/// The canonical-least rational point of a quadric; with `want_smooth`, the least
/// smooth one when there is any, else the least point flagged non-smooth.
pub fn quadric_point(q: &FieldForm, field: &Arc<Field>, want_smooth: bool) -> Result<PointWitness> {
    require_odd(field)?;
    if q.degree() != 2 || q.is_zero() {
        return Err(Error::Invalid("expected a nonzero quadratic form".into()));
    }
    let f = &**field;
    let n = q.nvars();
    let eqs = [q.clone()];
    let grad = gradient(q, f);
    let smooth_hit = if want_smooth { first_point(f, n, &eqs, |x| nonzero_at(&grad, x, f)) } else { None };
    let x = match smooth_hit {
        Some(x) => x,
        None => first_point(f, n, &eqs, |_| true).ok_or_else(|| Error::NoPoint(format!("quadric in {n} variables")))?,
    };
    witness(&eqs, field, x, Certificate::default())
}

struct Orbit {
    ext: Arc<Field>,
    emb: Arc<Embedding>,
    /// Rational basis of the span of the Frobenius orbit.
    basis: Vec<Vec<Fe>>,
}

/// The span of `p, sigma p, ..., sigma^{k-1} p`; its reduced echelon basis is Galois-stable,
/// hence rational.
fn orbit_span(p: &ProjPoint, base: &Arc<Field>, k: u32) -> Result<Orbit> {
    let ext = p.field.clone();
    if ext.degree() != k * base.degree() {
        return Err(Error::Invalid(format!("the point must be defined over a degree-{k} extension")));
    }
    let emb = Embedding::cached(base, &ext)?;
    let orbit: Vec<Vec<Fe>> = (0..k as i64).map(|i| p.frobenius(i).coords).collect();
    let (rows, piv) = linalg::rref(&orbit, &ext);
    let basis = rows[..piv.len()]
        .iter()
        .map(|r| r.iter().map(|&c| emb.preimage(c)).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::CertificateFailed("the orbit span is not defined over the base".into()))?;
    Ok(Orbit { ext, emb, basis })
}

fn check_on(eqs: &[FieldForm], p: &ProjPoint, emb: &Embedding) -> Result<()> {
    let lifted: Vec<FieldForm> = eqs.iter().map(|e| e.embed(emb)).collect();
    if !p.lies_on(&lifted) {
        return Err(Error::Invalid("the point does not lie on the variety".into()));
    }
    Ok(())
}

/// Records both the base-field incidence and Frobenius fixedness of the lift.
fn descent_certificate(case: &str, out: &[Fe], orbit: &Orbit, draws: usize) -> Result<Certificate> {
    let mut cert = Certificate { draws, ..Certificate::default() };
    cert.record(format!("case: {case}"), true);
    let lifted = ProjPoint::new(&orbit.ext, out.iter().map(|&c| orbit.emb.apply(c)).collect())?;
    cert.record("the output is fixed by Frobenius", lifted.frobenius_fixed());
    Ok(cert)
}

/// A rational point of a quadric or a complete intersection of two quadrics from a point
/// over the cubic extension, through the span of its Frobenius orbit.
pub fn descend_odd(eqs: &[FieldForm], base: &Arc<Field>, p: &ProjPoint) -> Result<PointWitness> {
    if eqs.is_empty() || eqs.len() > 2 || eqs.iter().any(|e| e.degree() != 2) {
        return Err(Error::Invalid("expected one or two quadrics".into()));
    }
    if p.field == *base {
        let mut cert = Certificate::default();
        cert.record("case: the point is already rational", true);
        return witness(eqs, base, p.coords.clone(), cert);
    }
    let orbit = orbit_span(p, base, 3)?;
    check_on(eqs, p, &orbit.emb)?;
    if let Some(r) = p.descend(base) {
        let mut cert = Certificate::default();
        cert.record("case: the point is already rational", true);
        return witness(eqs, base, r.coords, cert);
    }
    let f = &**base;
    let b = &orbit.basis;
    let (case, out) = match b.len() {
        // three points of a line on a quadric: the line lies in it
        2 => ("line in X", b[0].clone()),
        3 => {
            let cut: Vec<FieldForm> = eqs.iter().map(|e| restrict_to_span(e, b, f)).filter(|g| !g.is_zero()).collect();
            if cut.is_empty() {
                ("plane in X", b[0].clone())
            } else {
                let s = first_point(f, 3, &cut, |_| true)
                    .ok_or_else(|| Error::CertificateFailed("plane section without rational point".into()))?;
                (if cut.len() == 1 { "conic" } else { "degree-4 cycle" }, combine(b, &s, f))
            }
        }
        _ => return Err(Error::CertificateFailed("orbit of a non-rational point spans a point".into())),
    };
    let cert = descent_certificate(case, &out, &orbit, 0)?;
    witness(eqs, base, out, cert)
}

/// A rational point of a cubic from a point over the quadratic extension: the third
/// intersection of the line through the point and its conjugate, or the least rational
/// point of that line when it lies on the cubic.
pub fn descend_even_cubic(g: &FieldForm, base: &Arc<Field>, p: &ProjPoint) -> Result<PointWitness> {
    if g.degree() != 3 {
        return Err(Error::Invalid("expected a cubic".into()));
    }
    let orbit = orbit_span(p, base, 2)?;
    check_on(std::slice::from_ref(g), p, &orbit.emb)?;
    if orbit.basis.len() != 2 {
        return Err(Error::Invalid("the point is rational".into()));
    }
    let f = &**base;
    let b = &orbit.basis;
    let h = restrict_to_span(g, b, f);
    let (case, out, draws) = if h.is_zero() {
        ("line in X", b[0].clone(), 0)
    } else {
        let candidates = f.elements().map(|t| vec![Fe::ONE, t]).chain(std::iter::once(vec![Fe::ZERO, Fe::ONE]));
        let mut draws = 0;
        let mut hit = None;
        for s in candidates {
            draws += 1;
            if h.eval_point(&s, f).is_zero() {
                hit = Some(s);
                break;
            }
        }
        let s = hit.ok_or_else(|| Error::CertificateFailed("the residual intersection is not rational".into()))?;
        ("residual intersection", combine(b, &s, f), draws)
    };
    let cert = descent_certificate(case, &out, &orbit, draws)?;
    witness(std::slice::from_ref(g), base, out, cert)
}
