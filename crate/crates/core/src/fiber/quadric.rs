use std::sync::Arc;

use super::{indices, Evidence, FiberReport};
use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::linalg;
use crate::poly::{gram_matrix, FieldForm, Monomial};

pub fn quadric_rank(q: &FieldForm, f: &Field) -> usize {
    linalg::rank(&gram_matrix(q, f), f)
}

/// A rank-two quadric written as a binary form `a Y_0^2 + b Y_0 Y_1 + c Y_1^2`
/// in coordinates `Y = P^{-1} X`.
#[derive(Clone, Debug)]
pub struct RankTwo {
    /// Rows of `P^{-1}`: `Y_i` as linear forms in `X`.
    pub coords: Vec<Vec<Fe>>,
    pub a: Fe,
    pub b: Fe,
    pub c: Fe,
    pub disc: Fe,
    pub split: bool,
}

impl RankTwo {
    /// `a'` with the quadric equivalent to a multiple of `Y_0^2 + a' Y_1^2`.
    pub fn normal_coefficient(&self, f: &Field) -> Fe {
        if self.a.is_zero() {
            return f.neg(Fe::ONE);
        }
        let four_a2 = f.mul(f.from_int(4), f.mul(self.a, self.a));
        f.neg(f.div(self.disc, four_a2).unwrap())
    }

    /// The two linear factors over `f` when the form splits.
    pub fn factors(&self, f: &Field) -> Option<[Vec<Fe>; 2]> {
        let comb = |alpha: Fe, beta: Fe| -> Vec<Fe> {
            self.coords[0].iter().zip(&self.coords[1]).map(|(&x, &y)| f.add(f.mul(alpha, x), f.mul(beta, y))).collect()
        };
        if self.a.is_zero() {
            return Some([comb(Fe::ZERO, Fe::ONE), comb(self.b, self.c)]);
        }
        let s = f.sqrt(self.disc)?;
        let two_a = f.mul(f.from_int(2), self.a);
        let z1 = f.div(f.sub(s, self.b), two_a).unwrap();
        let z2 = f.div(f.sub(f.neg(s), self.b), two_a).unwrap();
        Some([comb(Fe::ONE, f.neg(z1)), comb(Fe::ONE, f.neg(z2))])
    }
}

/// Coordinates adapted to the radical of the Gram matrix: returns `P^{-1}` rows
/// and `Q(P Y)`, which only involves `Y_0, ..., Y_{r-1}`.
fn radical_coordinates(q: &FieldForm, f: &Field) -> (Vec<Vec<Fe>>, FieldForm, usize) {
    let n = q.nvars();
    let g = gram_matrix(q, f);
    let ker = linalg::kernel(&g, n, f);
    let (cols, kept) = linalg::complete_columns(&ker, n, f);
    let cols_t = linalg::transpose(&cols);
    // extras first, radical last
    let mut order: Vec<Vec<Fe>> = cols_t[kept..].to_vec();
    order.extend(cols_t[..kept].iter().cloned());
    let p = linalg::transpose(&order);
    let inv = linalg::inverse(&p, f).expect("completed basis is invertible");
    let moved = crate::poly::apply_field_linear(q, &p, f);
    (inv, moved, n - kept)
}

pub fn split_rank_two(q: &FieldForm, f: &Field) -> Option<RankTwo> {
    let (inv, moved, r) = radical_coordinates(q, f);
    if r != 2 {
        return None;
    }
    let n = q.nvars();
    let mono = |i: u8, j: u8| {
        let mut v = vec![0u8; n];
        v[0] = i;
        v[1] = j;
        Monomial(v)
    };
    let (a, b, c) = (moved.coeff(&mono(2, 0)), moved.coeff(&mono(1, 1)), moved.coeff(&mono(0, 2)));
    let disc = f.sub(f.mul(b, b), f.mul(f.from_int(4), f.mul(a, c)));
    let split = f.sqrt(disc).is_some();
    Some(RankTwo { coords: inv[..2].to_vec(), a, b, c, disc, split })
}

/// Linear factors of a quadric defined over the field of its coefficients.
pub fn quadric_linear_factors(q: &FieldForm, field: &Arc<Field>) -> Vec<Vec<Fe>> {
    let f = &**field;
    match quadric_rank(q, f) {
        1 => {
            let (inv, _, _) = radical_coordinates(q, f);
            vec![inv[0].clone()]
        }
        2 => match split_rank_two(q, f).and_then(|r| r.factors(f)) {
            Some([a, b]) => vec![a, b],
            None => vec![],
        },
        _ => vec![],
    }
}

pub fn classify_quadric(q: &FieldForm, field: &Arc<Field>) -> Result<FiberReport> {
    let f = &**field;
    if q.degree() != 2 || q.is_zero() {
        return Err(Error::Invalid("classify_quadric needs a nonzero quadric".into()));
    }
    let n1 = q.nvars();
    let n = n1 as i64 - 1;
    let r = quadric_rank(q, f);
    let mut rep = FiberReport::blank("quadric", n1);
    rep.evidence.push(Evidence::GramRank { member: "Q".into(), rank: r, nvars: n1 });
    rep.vertex_space_dim = (n1 - r) as i64 - 1;
    rep.singular_dim = rep.vertex_space_dim;
    rep.cone_over_plane_curve = r == 3 && n >= 3;
    match r {
        1 => {
            rep.reduced = false;
            rep.geometrically_integral = false;
            rep.irreducible_over_base = true;
            let l = quadric_linear_factors(q, field);
            rep.evidence.push(Evidence::LinearFactor { form: indices(&l[0], f), field_size: f.size() });
        }
        2 => {
            let rt = split_rank_two(q, f).unwrap();
            rep.geometrically_integral = false;
            rep.irreducible_over_base = !rt.split;
            rep.evidence.push(Evidence::RankTwoMember { member: "Q".into(), split: rt.split });
            if rt.split {
                rep.linear_factor_member = Some((1, 0));
            } else {
                rep.conjugate_hyperplane_member = Some((1, 0, f.index(rt.normal_coefficient(f))));
            }
        }
        _ => {
            rep.normal = Some(true);
        }
    }
    rep.check()?;
    Ok(rep)
}
