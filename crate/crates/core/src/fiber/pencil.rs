use std::sync::Arc;

use super::quadric::{quadric_linear_factors, quadric_rank, split_rank_two};
use super::{
    adaptive_dim, change_by_columns, linear_component, rational_points, vanishes_on_hyperplane, vertex_last_columns,
    ClassifyOptions, Evidence, FiberReport,
};
use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::linalg;
use crate::poly::{gram_matrix, pencil_wedge, FieldForm};
use crate::scheme::{self, jacobian_scheme};
use crate::upoly::UPoly;

/// The `q + 1` members `F + mu G` and `G`, tagged with `(lambda, mu)`.
pub fn pencil_members(a: &FieldForm, b: &FieldForm, f: &Field) -> Vec<((Fe, Fe), FieldForm)> {
    let mut out: Vec<((Fe, Fe), FieldForm)> =
        f.elements().map(|mu| ((Fe::ONE, mu), a.add(&b.scale(&mu, f), f))).collect();
    out.push(((Fe::ZERO, Fe::ONE), b.clone()));
    out
}

/// Whether some member over the algebraic closure has rank at most two: `A` itself, or a root
/// of the gcd of the 3x3 minors of `x A + B`.
fn has_low_rank_member(a: &FieldForm, b: &FieldForm, f: &Field) -> bool {
    if quadric_rank(a, f) <= 2 {
        return true;
    }
    let ga = gram_matrix(a, f);
    let gb = gram_matrix(b, f);
    let n = ga.len();
    let m: Vec<Vec<UPoly>> =
        (0..n).map(|i| (0..n).map(|j| UPoly::new(vec![gb[i][j], ga[i][j]])).collect()).collect();
    let triples: Vec<[usize; 3]> =
        (0..n).flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| [i, j, k]))).collect();
    let mut g = UPoly::zero();
    for rows in &triples {
        for cols in &triples {
            let minor: Vec<Vec<UPoly>> = rows.iter().map(|&i| cols.iter().map(|&j| m[i][j].clone()).collect()).collect();
            g = g.gcd(&linalg::det_upoly(&minor, f), f);
            if g.degree() == Some(0) {
                return false;
            }
        }
    }
    true
}

/// Whether the two quadrics share a linear factor over the algebraic closure.
fn common_linear_factor(a: &FieldForm, b: &FieldForm, field: &Arc<Field>) -> Result<bool> {
    let f = &**field;
    if quadric_rank(a, f) > 2 || quadric_rank(b, f) > 2 {
        return Ok(false);
    }
    let (ext, emb) = scheme::extension(field, 2)?;
    let (ae, be) = (a.embed(&emb), b.embed(&emb));
    Ok(quadric_linear_factors(&ae, &ext).iter().any(|l| vanishes_on_hyperplane(&be, l, &ext)))
}

pub fn classify_pencil(a: &FieldForm, b: &FieldForm, field: &Arc<Field>, opts: &ClassifyOptions) -> Result<FiberReport> {
    let f = &**field;
    if a.degree() != 2 || b.degree() != 2 || a.nvars() != b.nvars() || a.is_zero() || b.is_zero() {
        return Err(Error::Invalid("classify_pencil needs two nonzero quadrics in the same variables".into()));
    }
    if f.p() == 2 {
        return Err(Error::UnsupportedCase("quadrics in characteristic 2".into()));
    }
    if pencil_wedge(a, b, f).is_empty() {
        return Err(Error::NotCompleteIntersection("the residue forms are proportional".into()));
    }
    if common_linear_factor(a, b, field)? {
        return Err(Error::NotCompleteIntersection("the residue forms share a linear factor".into()));
    }
    let n1 = a.nvars();
    let n = n1 as i64 - 1;
    let mut rep = FiberReport::blank("pencil", n1);
    let mut split_member = false;
    for ((lam, mu), m) in pencil_members(a, b, f) {
        let label = format!("{}:{}", f.index(lam), f.index(mu));
        let r = quadric_rank(&m, f);
        rep.evidence.push(Evidence::GramRank { member: label.clone(), rank: r, nvars: n1 });
        let tag = (f.index(lam), f.index(mu));
        if r == 1 {
            split_member = true;
            rep.linear_factor_member.get_or_insert(tag);
        } else if r == 2 {
            let rt = split_rank_two(&m, f).unwrap();
            rep.evidence.push(Evidence::RankTwoMember { member: label, split: rt.split });
            if rt.split {
                split_member = true;
                rep.linear_factor_member.get_or_insert(tag);
            } else {
                rep.conjugate_hyperplane_member.get_or_insert((tag.0, tag.1, f.index(rt.normal_coefficient(f))));
            }
        }
    }

    let mut stacked = gram_matrix(a, f);
    stacked.extend(gram_matrix(b, f));
    let vert = linalg::kernel(&stacked, n1, f);
    rep.vertex_space_dim = vert.len() as i64 - 1;
    rep.cone_over_curve = n >= 4 && rep.vertex_space_dim == n - 4;
    rep.cone_over_plane_curve = false;
    rep.evidence.push(Evidence::VertexKernel { dim: vert.len() });

    let low_rank = has_low_rank_member(a, b, f);
    rep.evidence.push(Evidence::Note {
        text: format!("member of rank at most 2 over the algebraic closure: {low_rank}"),
    });

    let cols = vertex_last_columns(&vert, n1, f);
    let (ma, mb) = (change_by_columns(a, &cols, f), change_by_columns(b, &cols, f));
    let sing = jacobian_scheme(field, &[ma, mb]);
    let (sd, ev) = adaptive_dim(&sing, opts, "singular locus")?;
    let top = match &ev {
        Evidence::Counts { counts, .. } => (counts.len() as u32, *counts.last().unwrap_or(&0)),
        _ => unreachable!(),
    };
    rep.evidence.push(ev);
    rep.singular_dim = sd;
    rep.reduced = sd < n - 2;

    let mut comp = None;
    let mut unique = true;
    if sd == n - 3 {
        let s0 = jacobian_scheme(field, &[a.clone(), b.clone()]);
        let pts = rational_points(&s0, opts);
        comp = linear_component(&s0, &pts, n - 3);
        rep.evidence.push(Evidence::Containment { what: "linear singular component".into(), holds: comp.is_some() });
        // the rest of the singular locus must be of smaller dimension
        let big_q = (f.size() as u64).pow(top.0);
        let on_comp = (0..=(n - 3) as u32).map(|e| big_q.pow(e)).sum::<u64>();
        let rest = top.1.saturating_sub(on_comp);
        unique = 3 * rest < big_q.pow((n - 3) as u32);
        rep.evidence.push(Evidence::Containment { what: "no second top-dimensional singular component".into(), holds: unique });
    }
    rep.geometrically_integral = rep.reduced && !low_rank && (sd != n - 3 || (comp.is_some() && unique));
    rep.irreducible_over_base = rep.geometrically_integral || !split_member;
    if rep.geometrically_integral {
        rep.normal = Some(sd <= n - 4);
        if sd == n - 3 {
            rep.nonnormal_linear_component = comp.map(|eqs| eqs.iter().map(|l| super::indices(l, f)).collect());
        }
    }
    rep.check()?;
    Ok(rep)
}
