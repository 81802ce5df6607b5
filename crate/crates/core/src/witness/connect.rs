use std::sync::Arc;

use super::{expand_at_origin, jacobian_rank, same_point, Certificate, CurveWitness, Frame, ProjPoint};
use crate::error::{Error, Result};
use crate::fiber::split_rank_two;
use crate::gf::{Fe, Field};
use crate::linalg;
use crate::poly::{compose_line, BinaryCurveMap, FieldForm, Monomial};
use crate::scheme::first_point;
use crate::upoly::UPoly;

/// Genericity retries before giving up.
pub const RETRY_BUDGET: usize = 100;

fn check_points(eqs: &[FieldForm], field: &Arc<Field>, pts: &[&ProjPoint]) -> Result<()> {
    if field.p() == 2 {
        return Err(Error::UnsupportedCase("characteristic 2".into()));
    }
    for p in pts {
        if p.field != *field || p.nvars() != eqs[0].nvars() {
            return Err(Error::Invalid("point over another field or of the wrong length".into()));
        }
        if !p.lies_on(eqs) {
            return Err(Error::Invalid("point does not lie on the variety".into()));
        }
    }
    Ok(())
}

/// `a s + b u` for each pair of coordinates.
fn binary_line(a: &[Fe], b: &[Fe], f: &Field) -> Vec<FieldForm> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| FieldForm::from_terms(2, 1, [(Monomial(vec![1, 0]), x), (Monomial(vec![0, 1]), y)], f).unwrap())
        .collect()
}

/// `h(s, 1)`.
fn dehomogenize(h: &FieldForm) -> UPoly {
    let mut v = vec![Fe::ZERO; h.degree() as usize + 1];
    for (m, &c) in h.terms() {
        v[m.0[0] as usize] = c;
    }
    UPoly::new(v)
}

fn coefficients(l: &FieldForm) -> Vec<Fe> {
    (0..l.nvars()).map(|j| l.coeff(&Monomial::var(l.nvars(), j))).collect()
}

/// `F(X)` with `F` in `n + 1` variables restricted to `X_0 = 0`.
fn drop_first(g: &FieldForm, f: &Field) -> FieldForm {
    let n = g.nvars();
    let terms = g.terms().iter().filter(|(m, _)| m.0[0] == 0).map(|(m, &c)| (Monomial(m.0[1..].to_vec()), c));
    FieldForm::from_terms(n - 1, g.degree(), terms, f).unwrap()
}

fn seal_curve(field: &Arc<Field>, comps: Vec<FieldForm>, mut cert: Certificate, eqs: &[FieldForm], ends: &[(&str, [Fe; 2], &[Fe])], max_deg: u32) -> Result<CurveWitness> {
    let f = &**field;
    let curve = BinaryCurveMap::new(comps, f)?;
    for (i, e) in eqs.iter().enumerate() {
        cert.record(format!("equation {i} composes to the zero form"), compose_line(e, &curve, f).is_zero());
    }
    for (name, [s, u], x) in ends {
        cert.record(format!("f{name} is the prescribed point"), same_point(&curve.at(*s, *u, f), x, f));
    }
    cert.record(format!("degree at most {max_deg}"), curve.degree() <= max_deg);
    Ok(CurveWitness { field: field.clone(), curve, certificate: cert.seal()? })
}

/// A rational curve on a cubic with `f(0 : 1) = z` and `f(1 : 0) = u`, where `z` is a
/// double point. In coordinates with `z = e_0` and `F = Y_0 Q + C`, a point `w` with
/// `Q(w) = 0 != C(w)` is chosen so that the line through `w` and the projection `v` of
/// `u` misses `Q = C = 0`; the curve is `[-C(l), l Q(l)]` on that line `l`. When `u` lies
/// on a line through `z` inside the cubic, that line is returned.
pub fn r_connect_cubic(g: &FieldForm, field: &Arc<Field>, z: &ProjPoint, u: &ProjPoint) -> Result<CurveWitness> {
    let eqs = [g.clone()];
    check_points(&eqs, field, &[z, u])?;
    if g.degree() != 3 {
        return Err(Error::Invalid("expected a cubic".into()));
    }
    if z == u {
        return Err(Error::Invalid("endpoints coincide".into()));
    }
    let f = &**field;
    let n = g.nvars();
    let frame = Frame::at(&z.coords, f);
    let parts = expand_at_origin(&frame.pull(g, f), f);
    if !parts[1].is_zero() || parts[2].is_zero() {
        return Err(Error::Invalid("z is not a point of multiplicity two".into()));
    }
    let (q, c) = (&parts[2], &parts[3]);
    let uy = frame.pull_point(&u.coords, f);
    let v = &uy[1..];
    let (qv, cv) = (q.eval_point(v, f), c.eval_point(v, f));
    let mut cert = Certificate::default();
    let comps_y: Vec<FieldForm> = if qv.is_zero() && cv.is_zero() {
        cert.record("case: the line through z and u lies on the cubic", true);
        binary_line(&uy, &linalg::unit(n, 0), f)
    } else {
        let mut draws = 0;
        let mut exhausted = false;
        let usable = |w: &[Fe]| {
            if c.eval_point(w, f).is_zero() || linalg::rank(&[v.to_vec(), w.to_vec()], f) < 2 {
                return false;
            }
            let l = binary_line(v, w, f);
            let (ql, cl) = (q.substitute(&l, f), c.substitute(&l, f));
            !ql.is_zero() && dehomogenize(&ql).gcd(&dehomogenize(&cl), f).degree() == Some(0)
        };
        let hit = first_point(f, n - 1, std::slice::from_ref(q), |w| {
            draws += 1;
            if draws > RETRY_BUDGET {
                exhausted = true;
                return true;
            }
            usable(w)
        });
        let w = match hit {
            Some(w) if !exhausted => w,
            _ => {
                let conjugate_pair = split_rank_two(q, f).is_some_and(|r| !r.split);
                return Err(if conjugate_pair {
                    Error::TangentConeObstruction("the tangent cone at z is a conjugate pair of hyperplanes".into())
                } else {
                    Error::GenericityExhausted(draws.min(RETRY_BUDGET))
                });
            }
        };
        cert.draws = draws;
        let l = binary_line(v, &w, f);
        let ql = q.substitute(&l, f);
        let mut comps = vec![c.substitute(&l, f).neg(f)];
        comps.extend(l.iter().map(|li| li.mul(&ql, f)));
        comps
    };
    let comps = frame.push_curve(&comps_y, f);
    let ends: [(&str, [Fe; 2], &[Fe]); 2] = [("(0:1) = z", [Fe::ZERO, Fe::ONE], &z.coords), ("(1:0) = u", [Fe::ONE, Fe::ZERO], &u.coords)];
    seal_curve(field, comps, cert, &eqs, &ends, 3)
}

/// Polar form `Q(x + y) - Q(x) - Q(y)`.
fn polar(q: &FieldForm, x: &[Fe], y: &[Fe], f: &Field) -> Fe {
    let s: Vec<Fe> = x.iter().zip(y).map(|(&a, &b)| f.add(a, b)).collect();
    f.sub(f.sub(q.eval_point(&s, f), q.eval_point(x, f)), q.eval_point(y, f))
}

/// A rational curve of degree at most 4 on `A = B = 0` with `f(0) = f(inf) = x` and
/// `f(1) = y`.
///
/// In coordinates with `x = e_0` the pencil member through `y` tangent at `x` reads
/// `Z_0 Z_1 + m` and a second member `Z_0 Z_2 + g`. Projection from `x` maps the
/// section `Z_1 = 0` to the quadric `Q = m(0, .)`, with inverse
/// `[-q'(Z'), 0, Z_2 Z']` for `q' = g(0, .)`. A conic of `Q` through the image `u` of
/// `y` and two points `v, w` of `Q` on `Z_2 = 0` with `q' != 0` is pushed through it.
pub fn r_connect_ci22(a: &FieldForm, b: &FieldForm, field: &Arc<Field>, x: &ProjPoint, y: &ProjPoint) -> Result<CurveWitness> {
    let eqs = [a.clone(), b.clone()];
    check_points(&eqs, field, &[x, y])?;
    if a.degree() != 2 || b.degree() != 2 {
        return Err(Error::Invalid("expected two quadrics".into()));
    }
    let f = &**field;
    let nn = a.nvars();
    if nn < 5 {
        return Err(Error::Invalid("needs at least P^4".into()));
    }
    if jacobian_rank(&eqs, &x.coords, f) < 2 {
        return Err(Error::Invalid("x is a singular point".into()));
    }
    if x == y {
        return Err(Error::Invalid("endpoints coincide".into()));
    }
    let frame0 = Frame::at(&x.coords, f);
    let la = coefficients(&expand_at_origin(&frame0.pull(a, f), f)[1]);
    let lb = coefficients(&expand_at_origin(&frame0.pull(b, f), f)[1]);
    let yy = frame0.pull_point(&y.coords, f);
    let dot = |l: &[Fe]| l.iter().zip(&yy[1..]).fold(Fe::ZERO, |acc, (&c, &t)| f.add(acc, f.mul(c, t)));
    let (lam, mu) = (dot(&lb), f.neg(dot(&la)));
    if lam.is_zero() && mu.is_zero() {
        // y in the tangent space at x: no member singles it out
        return Err(Error::GenericityExhausted(1));
    }
    let ell: Vec<Fe> = la.iter().zip(&lb).map(|(&p, &r)| f.add(f.mul(lam, p), f.mul(mu, r))).collect();
    let (other, gvec) = if lam.is_zero() { (a, &la) } else { (b, &lb) };
    let (r, _) = linalg::complete_rows(&[ell, gvec.clone()], nn - 1, f);
    let rinv = linalg::inverse(&r, f).expect("completed rows are invertible");
    let mut t = vec![vec![Fe::ZERO; nn]; nn];
    t[0][0] = Fe::ONE;
    for i in 0..nn - 1 {
        for j in 0..nn - 1 {
            t[i + 1][j + 1] = rinv[i][j];
        }
    }
    let frame = Frame::from_matrix(linalg::mat_mul(&frame0.p, &t, f), f);
    let member = a.scale(&lam, f).add(&b.scale(&mu, f), f);
    let qm = drop_first(&expand_at_origin(&frame.pull(&member, f), f)[2], f);
    let qg = drop_first(&expand_at_origin(&frame.pull(other, f), f)[2], f);
    // Z_2.. coordinates of y; Z_1(y) = 0 by the choice of member
    let u: Vec<Fe> = frame.pull_point(&y.coords, f)[2..].to_vec();
    let m = nn - 2;
    let q0 = drop_first(&qm, f);
    let qg0 = drop_first(&qg, f);
    let mut cands: Vec<Vec<Fe>> = Vec::new();
    first_point(f, m - 1, std::slice::from_ref(&q0), |w| {
        if !qg0.eval_point(w, f).is_zero() {
            let mut full = vec![Fe::ZERO];
            full.extend_from_slice(w);
            cands.push(full);
        }
        cands.len() >= 32
    });
    let mut draws = 0;
    let mut chosen = None;
    'pairs: for i in 0..cands.len() {
        for j in i + 1..cands.len() {
            draws += 1;
            if draws > RETRY_BUDGET {
                break 'pairs;
            }
            let (v, w) = (&cands[i], &cands[j]);
            let c = [polar(&qm, &u, v, f), polar(&qm, &u, w, f), polar(&qm, v, w, f)];
            if c.iter().all(|x| !x.is_zero()) {
                chosen = Some((v.clone(), w.clone(), c));
                break 'pairs;
            }
        }
    }
    let (v, w, [c1, c2, c3]) = chosen.ok_or(Error::GenericityExhausted(draws.min(RETRY_BUDGET)))?;
    let s = FieldForm::var(2, 0);
    let tt = FieldForm::var(2, 1);
    let beta = tt.scale(&c2, f);
    let gamma = s.scale(&f.neg(c1), f);
    let lin = beta.scale(&c1, f).add(&gamma.scale(&c2, f), f);
    let bg = beta.mul(&gamma, f).scale(&f.neg(c3), f);
    let conic: Vec<FieldForm> = (0..m)
        .map(|i| bg.scale(&u[i], f).add(&lin.mul(&beta.scale(&v[i], f).add(&gamma.scale(&w[i], f), f), f), f))
        .collect();
    let mut comps = vec![qg.substitute(&conic, f).neg(f), FieldForm::zero(2, 4)];
    comps.extend(conic.iter().map(|ci| conic[0].mul(ci, f)));
    let mut cert = Certificate { draws, ..Certificate::default() };
    cert.record("the conic through u, v, w is smooth", !f.mul(f.mul(c1, c2), c3).is_zero());
    let comps = frame.push_curve(&comps, f);
    let ends: [(&str, [Fe; 2], &[Fe]); 3] = [
        ("(0:1) = x", [Fe::ZERO, Fe::ONE], &x.coords),
        ("(1:0) = x", [Fe::ONE, Fe::ZERO], &x.coords),
        ("(1:1) = y", [Fe::ONE, Fe::ONE], &y.coords),
    ];
    seal_curve(field, comps, cert, &eqs, &ends, 4)
}
