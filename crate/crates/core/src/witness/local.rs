use std::sync::Arc;

use serde::Serialize;

use super::{expand_at_origin, jacobian_rank, restrict_to_span, Certificate, Frame, ProjPoint};
use crate::error::{Error, Result};
use crate::fiber::{classify_pencil, classify_quadric, quadric_rank, split_rank_two, ClassifyOptions, FiberReport};
use crate::gf::{Fe, Field, MAX_FIELD_SIZE};
use crate::linalg;
use crate::poly::{FieldForm, Monomial};
use crate::scheme::{self, DimReport, SchemeHandle, DEFAULT_COUNT_BUDGET};
use crate::upoly::UPoly;

fn linear_coefficients(l: &FieldForm) -> Vec<Fe> {
    (0..l.nvars()).map(|j| l.coeff(&Monomial::var(l.nvars(), j))).collect()
}

fn require_on(eqs: &[FieldForm], x: &ProjPoint, field: &Arc<Field>) -> Result<()> {
    if x.field != *field || x.nvars() != eqs[0].nvars() {
        return Err(Error::Invalid("point over another field or of the wrong length".into()));
    }
    if !x.lies_on(eqs) {
        return Err(Error::Invalid("point does not lie on the variety".into()));
    }
    Ok(())
}

/// The lines through a point, as a subscheme of the `P^{n-1}` of directions.
#[derive(Clone, Debug, Serialize)]
pub struct LinesThroughPointScheme {
    #[serde(skip)]
    pub scheme: SchemeHandle,
    pub equation_degrees: Vec<u32>,
    pub expected_dim: i64,
    pub dim: DimReport,
    /// The dimension exceeds the expected one.
    pub excess: bool,
    /// Zero-dimensional plane cases: number of geometric points.
    pub geometric_points: Option<u64>,
    /// Every geometric point has a tangent space of dimension zero.
    pub reduced: Option<bool>,
    /// Length counted with multiplicity.
    pub length: Option<u64>,
}

/// Directions `v` with the line through `x` and `v` on the variety. With `x = e_0`,
/// a cubic `Y_0^2 L + Y_0 Q + C` gives `L = Q = C = 0`, two quadrics
/// `Y_0 l + q`, `Y_0 l' + q'` give `l = l' = q = q' = 0`.
pub fn lines_through_point(eqs: &[FieldForm], field: &Arc<Field>, x: &ProjPoint) -> Result<LinesThroughPointScheme> {
    require_on(eqs, x, field)?;
    let f = &**field;
    let n = eqs[0].nvars();
    let frame = Frame::at(&x.coords, f);
    let mut forms = Vec::new();
    for e in eqs {
        forms.extend(expand_at_origin(&frame.pull(e, f), f).into_iter().skip(1));
    }
    let forms: Vec<FieldForm> = forms.into_iter().filter(|g| !g.is_zero()).collect();
    let cut: i64 = eqs.iter().map(|e| e.degree() as i64).sum();
    let expected_dim = n as i64 - 2 - cut;
    let s = SchemeHandle::new(field, n - 1, forms);
    let dim = scheme::dim_with_retry(&s, DEFAULT_COUNT_BUDGET)?;
    let d = dim.dim.ok_or_else(|| Error::InconclusiveDimension(format!("lines through a point: counts {:?}", dim.counts)))?;
    let (geometric_points, reduced, length) = if d == 0 { plane_length(&s)? } else { (None, None, None) };
    Ok(LinesThroughPointScheme {
        equation_degrees: s.equations.iter().map(|e| e.degree()).collect(),
        scheme: s,
        expected_dim,
        excess: d > expected_dim,
        dim,
        geometric_points,
        reduced,
        length,
    })
}

fn divisors(d: u32) -> impl Iterator<Item = u32> {
    (1..=d).filter(move |e| d % e == 0)
}

fn mobius(mut n: u32) -> i64 {
    let mut out = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            out = -out;
        }
        p += 1;
    }
    if n > 1 {
        out = -out;
    }
    out
}

/// Geometric points of a finite set whose closed points have degree at most `dmax`,
/// from the counts over `F_{q^k}`: `sum_{d <= dmax} sum_{e | d} mu(d / e) N_e`.
fn geometric_total(dmax: u32, mut count: impl FnMut(u32) -> Result<u64>) -> Result<u64> {
    let counts = (1..=dmax).map(&mut count).collect::<Result<Vec<u64>>>()?;
    let mut total = 0i64;
    for d in 1..=dmax {
        for e in divisors(d) {
            total += mobius(d / e) * counts[e as usize - 1] as i64;
        }
    }
    Ok(total.max(0) as u64)
}

/// Two plane curves left after the linear equations, as ternary forms.
fn plane_pair(s: &SchemeHandle) -> Option<(FieldForm, FieldForm)> {
    let f = &*s.field;
    let linear: Vec<Vec<Fe>> = s.equations.iter().filter(|e| e.degree() == 1).map(linear_coefficients).collect();
    let basis = linalg::kernel(&linear, s.nvars, f);
    if basis.len() != 3 {
        return None;
    }
    let rest: Vec<FieldForm> =
        s.equations.iter().filter(|e| e.degree() > 1).map(|e| restrict_to_span(e, &basis, f)).collect();
    match rest.as_slice() {
        [a, b] => Some((a.clone(), b.clone())),
        _ => None,
    }
}

/// Zero-dimensional intersections of two plane curves: geometric points from counts over
/// `F_{q^k}`, reducedness from the Jacobian at each point (a point is reduced when it has
/// no tangent vector over `F_{q^k}[e]/(e^2)`), and the length. For a reduced scheme the
/// length is the number of points; otherwise it is the total root multiplicity of the
/// resultant under a projection whose roots separate the points.
fn plane_length(s: &SchemeHandle) -> Result<(Option<u64>, Option<bool>, Option<u64>)> {
    let Some((g1, g2)) = plane_pair(s) else { return Ok((None, None, None)) };
    let field = &s.field;
    let dmax = g1.degree() * g2.degree();
    if (field.size() as u64).saturating_pow(dmax) > MAX_FIELD_SIZE {
        return Ok((None, None, None));
    }
    let plane = SchemeHandle::new(field, 3, vec![g1.clone(), g2.clone()]);
    let total = geometric_total(dmax, |k| scheme::count_points(&plane, k, DEFAULT_COUNT_BUDGET))?;
    let mut reduced = true;
    for k in 1..=dmax {
        let (ext, pts) = scheme::points(&plane, k, DEFAULT_COUNT_BUDGET)?;
        let emb = crate::gf::Embedding::cached(field, &ext)?;
        let lifted = [g1.embed(&emb), g2.embed(&emb)];
        if pts.iter().any(|p| jacobian_rank(&lifted, p, &ext) < 2) {
            reduced = false;
            break;
        }
    }
    if reduced {
        return Ok((Some(total), Some(true), Some(total)));
    }
    let length = resultant_length(field, &g1, &g2, total)?;
    Ok((Some(total), Some(false), length))
}

/// `h = sum_k a_k(Y_0, Y_1) Y_2^k` dehomogenized at `Y_1 = 1`: entry `k` is `a_k(y, 1)`.
fn y2_coefficients(h: &FieldForm) -> Vec<UPoly> {
    let d = h.degree() as usize;
    let mut out = vec![vec![Fe::ZERO; d + 1]; d + 1];
    for (m, &c) in h.terms() {
        out[m.0[2] as usize][m.0[0] as usize] = c;
    }
    out.into_iter().map(UPoly::new).collect()
}

/// The resultant in `Y_2` as a polynomial in `Y_0` (at `Y_1 = 1`); the projective degree is
/// `deg g1 * deg g2`, the deficit being the multiplicity at `(1 : 0)`.
fn projected_resultant(h1: &FieldForm, h2: &FieldForm, f: &Field) -> UPoly {
    let (a, b) = (y2_coefficients(h1), y2_coefficients(h2));
    let (d1, d2) = (a.len() - 1, b.len() - 1);
    let size = d1 + d2;
    let mut rows = vec![vec![UPoly::zero(); size]; size];
    for r in 0..d2 {
        for k in 0..=d1 {
            rows[r][r + k] = a[d1 - k].clone();
        }
    }
    for r in 0..d1 {
        for k in 0..=d2 {
            rows[d2 + r][r + k] = b[d2 - k].clone();
        }
    }
    linalg::det_upoly(&rows, f)
}

fn distinct_projective_roots(r: &UPoly, deficit: usize, field: &Arc<Field>, dmax: u32) -> Result<u64> {
    let finite = geometric_total(dmax, |k| {
        let (ext, emb) = scheme::extension(field, k)?;
        let lifted = UPoly::new(r.0.iter().map(|&c| emb.apply(c)).collect());
        Ok(lifted.roots(&ext).len() as u64)
    })?;
    Ok(finite + u64::from(deficit > 0))
}

fn resultant_length(field: &Arc<Field>, g1: &FieldForm, g2: &FieldForm, points: u64) -> Result<Option<u64>> {
    let f = &**field;
    let dmax = g1.degree() * g2.degree();
    for c in crate::fiber::projective_points(3, f).take(super::connect::RETRY_BUDGET) {
        if g1.eval_point(&c, f).is_zero() || g2.eval_point(&c, f).is_zero() {
            continue;
        }
        let (cols, _) = linalg::complete_columns(&[c], 3, f);
        let ct = linalg::transpose(&cols);
        let p = linalg::transpose(&[ct[1].clone(), ct[2].clone(), ct[0].clone()]);
        let frame = Frame::from_matrix(p, f);
        let r = projected_resultant(&frame.pull(g1, f), &frame.pull(g2, f), f);
        let Some(deg) = r.degree() else { continue };
        let deficit = dmax as usize - deg;
        if distinct_projective_roots(&r, deficit, field, dmax)? == points {
            return Ok(Some(dmax as u64));
        }
    }
    Ok(None)
}

/// Lowest-order part of a variety at a point.
#[derive(Clone, Debug, Serialize)]
pub struct TangentConeReport {
    /// Order of the lowest nonzero part (1 at a smooth point of a hypersurface).
    pub multiplicity: u32,
    /// Independent linear parts, as coefficient indices in the frame with `x = e_0`.
    pub tangent_equations: Vec<Vec<u32>>,
    /// The cone itself: the quadratic part restricted to the tangent space at a smooth
    /// point, the lowest part otherwise.
    #[serde(skip)]
    pub cone: Vec<FieldForm>,
    /// Gram rank when the cone is one quadric.
    pub cone_rank: Option<usize>,
    pub cone_nvars: usize,
    pub report: Option<FiberReport>,
}

/// Translates `x` to `e_0` and extracts the projective tangent cone. At a smooth point of
/// a hypersurface `Y_0^{d-1} L + Y_0^{d-2} Q + ...` this is `Q` on `L = 0`; for a pencil,
/// the pair of quadratic parts on the tangent space; at a singular point the lowest part.
pub fn tangent_cone(eqs: &[FieldForm], field: &Arc<Field>, x: &ProjPoint) -> Result<TangentConeReport> {
    require_on(eqs, x, field)?;
    let f = &**field;
    let frame = Frame::at(&x.coords, f);
    let parts: Vec<Vec<FieldForm>> = eqs.iter().map(|e| expand_at_origin(&frame.pull(e, f), f)).collect();
    let m = eqs[0].nvars() - 1;
    let linear: Vec<Vec<Fe>> = parts.iter().map(|p| linear_coefficients(&p[1])).filter(|v| v.iter().any(|c| !c.is_zero())).collect();
    let (rows, piv) = linalg::rref(&linear, f);
    let tangent: Vec<Vec<Fe>> = rows[..piv.len()].to_vec();
    let tangent_equations = tangent.iter().map(|r| crate::fiber::indices(r, f)).collect();
    let mut out = TangentConeReport {
        multiplicity: 1,
        tangent_equations,
        cone: vec![],
        cone_rank: None,
        cone_nvars: 0,
        report: None,
    };
    if tangent.len() == eqs.len() {
        // smooth point: quadratic parts on the tangent space
        let basis = linalg::kernel(&tangent, m, f);
        out.cone_nvars = basis.len();
        out.cone = parts.iter().filter(|p| p.len() > 2).map(|p| restrict_to_span(&p[2], &basis, f)).collect();
        if basis.is_empty() {
            return Ok(out);
        }
        match out.cone.as_slice() {
            [q] => {
                out.cone_rank = Some(quadric_rank(q, f));
                if !q.is_zero() {
                    out.report = Some(classify_quadric(q, field)?);
                }
            }
            [a, b] => out.report = classify_pencil(a, b, field, &ClassifyOptions::default()).ok(),
            _ => {}
        }
        return Ok(out);
    }
    if eqs.len() != 1 {
        return Err(Error::UnsupportedCase("tangent cone at a singular point of a pencil".into()));
    }
    let k = (1..parts[0].len()).find(|&k| !parts[0][k].is_zero()).unwrap_or(0);
    let cone = parts[0][k].clone();
    out.multiplicity = k as u32;
    out.cone_nvars = m;
    if k == 2 {
        out.cone_rank = Some(quadric_rank(&cone, f));
        out.report = Some(classify_quadric(&cone, field)?);
    }
    out.cone = vec![cone];
    Ok(out)
}

/// Singular points of the tangent hyperplane section of a cubic at a smooth point.
#[derive(Clone, Debug, Serialize)]
pub struct TangentSection {
    /// Singular points of the section over `F_{q^k}`, `k = 1..=3`.
    pub singular_counts: Vec<u64>,
    /// Rational singular points, in the ambient coordinates.
    pub rational_singular_points: Vec<ProjPoint>,
    /// Gram rank of the quadratic part of the section at `x`.
    pub rank_at_x: usize,
    /// `x` is the only singular point and an ordinary double point of the section.
    pub node_at_x_only: bool,
}

/// Restricts a cubic to its tangent hyperplane at `x` and scans the singular points of
/// the section. For a surface the section is a plane cubic, whose singular points are all
/// defined over `F_{q^k}` with `k <= 3`.
pub fn tangent_section(g: &FieldForm, field: &Arc<Field>, x: &ProjPoint) -> Result<TangentSection> {
    let eqs = [g.clone()];
    require_on(&eqs, x, field)?;
    let f = &**field;
    let n = g.nvars();
    let grad: Vec<Fe> = (0..n).map(|i| g.derivative(i, f).eval_point(&x.coords, f)).collect();
    if grad.iter().all(|c| c.is_zero()) {
        return Err(Error::Invalid("x is a singular point".into()));
    }
    let mut basis = vec![x.coords.clone()];
    for k in linalg::kernel(&[grad], n, f) {
        let mut trial = basis.clone();
        trial.push(k);
        if linalg::rank(&trial, f) == trial.len() {
            basis = trial;
        }
    }
    let h = restrict_to_span(g, &basis, f);
    let rank_at_x = quadric_rank(&expand_at_origin(&h, f)[2], f);
    let sing = scheme::jacobian_scheme(field, &[h]);
    let singular_counts = (1..=3).map(|k| scheme::count_points(&sing, k, DEFAULT_COUNT_BUDGET)).collect::<Result<Vec<_>>>()?;
    let (_, pts) = scheme::points(&sing, 1, DEFAULT_COUNT_BUDGET)?;
    let rational_singular_points =
        pts.iter().map(|p| ProjPoint::new(field, super::combine(&basis, p, f))).collect::<Result<Vec<_>>>()?;
    let node_at_x_only = singular_counts.iter().all(|&c| c == 1)
        && rational_singular_points.first() == Some(x)
        && rank_at_x == n - 2;
    Ok(TangentSection { singular_counts, rational_singular_points, rank_at_x, node_at_x_only })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConicKind {
    Smooth,
    TwoLines,
    ConjugateLines,
    DoubleLine,
    /// The plane lies in the quadric.
    Plane,
}

/// The section of a quadric by the plane through three points, in the plane coordinates
/// `a x1 + b x2 + c x3`.
#[derive(Clone, Debug, Serialize)]
pub struct ConicReport {
    #[serde(skip)]
    pub conic: FieldForm,
    pub kind: ConicKind,
    pub report: Option<FiberReport>,
    pub certificate: Certificate,
}

pub fn plane_conic(q: &FieldForm, field: &Arc<Field>, x1: &ProjPoint, x2: &ProjPoint, x3: &ProjPoint) -> Result<ConicReport> {
    let eqs = [q.clone()];
    for x in [x1, x2, x3] {
        require_on(&eqs, x, field)?;
    }
    let f = &**field;
    let basis = vec![x1.coords.clone(), x2.coords.clone(), x3.coords.clone()];
    if linalg::rank(&basis, f) < 3 {
        return Err(Error::CollinearPoints);
    }
    let conic = restrict_to_span(q, &basis, f);
    let mut cert = Certificate::default();
    for i in 0..3 {
        cert.record(format!("the conic passes through x{}", i + 1), conic.eval_point(&linalg::unit(3, i), f).is_zero());
    }
    let certificate = cert.seal()?;
    if conic.is_zero() {
        return Ok(ConicReport { conic, kind: ConicKind::Plane, report: None, certificate });
    }
    let kind = match quadric_rank(&conic, f) {
        3 => ConicKind::Smooth,
        2 if split_rank_two(&conic, f).is_some_and(|r| r.split) => ConicKind::TwoLines,
        2 => ConicKind::ConjugateLines,
        _ => ConicKind::DoubleLine,
    };
    let report = Some(classify_quadric(&conic, field)?);
    Ok(ConicReport { conic, kind, report, certificate })
}
