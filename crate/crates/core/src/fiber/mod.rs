//! Central-fiber classification over `F_q`.
//!
//! Quadrics are decided by exact linear algebra. Cubics and pencils combine
//! exact vertex and factor computations with singular-locus dimensions
//! estimated by point counting; each verdict carries its evidence.

mod cubic;
mod pencil;
mod quadric;


use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::linalg;
use crate::poly::{FieldForm, Monomial};
use crate::scheme::{self, DimReport, SchemeHandle};

pub use cubic::{classify_cubic, linear_factors_cubic, vertex_space};
pub use pencil::{classify_pencil, pencil_members};
pub use quadric::{classify_quadric, quadric_linear_factors, quadric_rank, split_rank_two, RankTwo};

/// Limits for the counting parts of the classifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifyOptions {
    /// Largest extension degree counted before the retry.
    pub kmax: u32,
    /// Cap on lines examined per count; `K` is lowered to fit.
    pub budget: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { kmax: 3, budget: 4_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    GramRank { member: String, rank: usize, nvars: usize },
    RankTwoMember { member: String, split: bool },
    VertexKernel { dim: usize },
    Counts { scheme: String, q: u64, counts: Vec<u64>, dim: Option<i64> },
    LinearFactor { form: Vec<u32>, field_size: u32 },
    Containment { what: String, holds: bool },
    Note { text: String },
}

/// A classified central fiber.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberReport {
    pub kind: String,
    pub nvars: usize,
    pub reduced: bool,
    pub irreducible_over_base: bool,
    pub geometrically_integral: bool,
    /// `-1` when empty.
    pub singular_dim: i64,
    /// `-1` when there is no vertex.
    pub vertex_space_dim: i64,
    /// Cone over a plane curve (cubics and quadrics: vertex of dimension `n-3`).
    pub cone_over_plane_curve: bool,
    /// Pencils: cone over a curve in `P^3` (vertex of dimension `n-4`).
    pub cone_over_curve: bool,
    /// Normality verdict for integral fibers of the supported families.
    pub normal: Option<bool>,
    /// Equations (as coefficient indices) of the linear singular component of a non-normal fiber.
    pub nonnormal_linear_component: Option<Vec<Vec<u32>>>,
    /// A member `X_0^2 + a X_1^2` with `-a` a non-square, as `(lambda, mu, a)` indices.
    pub conjugate_hyperplane_member: Option<(u32, u32, u32)>,
    /// A member with a linear factor over `F_q`, as `(lambda, mu)` indices.
    pub linear_factor_member: Option<(u32, u32)>,
    pub three_conjugate_hyperplanes: bool,
    pub evidence: Vec<Evidence>,
}

impl FiberReport {
    fn blank(kind: &str, nvars: usize) -> FiberReport {
        FiberReport {
            kind: kind.into(),
            nvars,
            reduced: true,
            irreducible_over_base: true,
            geometrically_integral: true,
            singular_dim: -1,
            vertex_space_dim: -1,
            cone_over_plane_curve: false,
            cone_over_curve: false,
            normal: None,
            nonnormal_linear_component: None,
            conjugate_hyperplane_member: None,
            linear_factor_member: None,
            three_conjugate_hyperplanes: false,
            evidence: Vec::new(),
        }
    }

    /// The implications every report must satisfy.
    pub fn check(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::CertificateFailed(format!("fiber report violates: {s}")));
        if self.geometrically_integral && !(self.irreducible_over_base && self.reduced) {
            return bad("geometrically integral implies irreducible and reduced");
        }
        if self.vertex_space_dim >= 0 && self.singular_dim >= 0 && self.vertex_space_dim > self.singular_dim {
            return bad("vertex space inside the singular locus");
        }
        if self.vertex_space_dim >= 0 && self.singular_dim < 0 {
            return bad("a vertex is singular");
        }
        if self.evidence.is_empty() {
            return bad("every verdict carries evidence");
        }
        Ok(())
    }
}

/// Singular-locus and similar dimensions: counts with `K` lowered to fit the budget,
/// retried with `K + 1` when inconclusive.
pub fn adaptive_dim(s: &SchemeHandle, opts: &ClassifyOptions, label: &str) -> Result<(i64, Evidence)> {
    let fits = |k: u32| scheme::lines_needed(s, k) <= opts.budget;
    let mut k = opts.kmax;
    while k > 1 && !fits(k) {
        k -= 1;
    }
    if !fits(k) {
        return Err(Error::BudgetExceeded(format!("counting {label} over F_q")));
    }
    let mut r = scheme::dim_by_counting(s, k, opts.budget)?;
    if r.dim.is_none() && fits(k + 1) {
        let extra = scheme::count_points(s, k + 1, opts.budget)?;
        r.counts.push(extra);
        r.dim = scheme::with_dimension_floor(s, scheme::estimate_dim(&r.counts, r.q, s.nvars as i64 - 1));
    }
    let DimReport { dim, counts, q } = r;
    let ev = Evidence::Counts { scheme: label.into(), q, counts: counts.clone(), dim };
    match dim {
        Some(d) => Ok((d, ev)),
        None => Err(Error::InconclusiveDimension(format!("{label}: counts {counts:?} over q = {q}"))),
    }
}

pub(crate) fn indices(v: &[Fe], f: &Field) -> Vec<u32> {
    v.iter().map(|&c| f.index(c)).collect()
}

/// `F(P Y)` with `P` given by columns.
pub(crate) fn change_by_columns(g: &FieldForm, cols: &[Vec<Fe>], f: &Field) -> FieldForm {
    let p = linalg::transpose(cols);
    crate::poly::apply_field_linear(g, &p, f)
}

/// Linear forms cutting out the span of `pts`, if that span lies inside the scheme.
pub(crate) fn linear_span_inside(s: &SchemeHandle, pts: &[Vec<Fe>]) -> Option<Vec<Vec<Fe>>> {
    let f = &*s.field;
    let n = s.nvars;
    if pts.is_empty() {
        return None;
    }
    let (rref, pivots) = linalg::rref(pts, f);
    let basis: Vec<Vec<Fe>> = rref.into_iter().take(pivots.len()).collect();
    let m = basis.len();
    let subs: Vec<FieldForm> = (0..n)
        .map(|i| FieldForm::from_terms(m, 1, (0..m).map(|j| (Monomial::var(m, j), basis[j][i])), f).unwrap())
        .collect();
    if s.equations.iter().all(|e| e.substitute(&subs, f).is_zero()) {
        Some(linalg::kernel(&basis, n, f))
    } else {
        None
    }
}

/// Rational singular points, capped to keep listings small.
pub(crate) fn rational_points(s: &SchemeHandle, opts: &ClassifyOptions) -> Vec<Vec<Fe>> {
    if scheme::lines_needed(s, 1) > opts.budget {
        return vec![];
    }
    scheme::points(s, 1, opts.budget).map(|(_, p)| p).unwrap_or_default()
}


/// A linear subspace of projective dimension `dim`, spanned by some of `pts` and lying
/// in the scheme, grown greedily from each of the first few points. Returns its equations.
pub(crate) fn linear_component(s: &SchemeHandle, pts: &[Vec<Fe>], dim: i64) -> Option<Vec<Vec<Fe>>> {
    let f = &*s.field;
    if dim < 0 {
        return None;
    }
    for seed in pts.iter().take(24) {
        let mut basis = vec![seed.clone()];
        for x in pts {
            if basis.len() as i64 > dim {
                break;
            }
            let mut trial = basis.clone();
            trial.push(x.clone());
            if linalg::rank(&trial, f) == trial.len() && linear_span_inside(s, &trial).is_some() {
                basis = trial;
            }
        }
        if basis.len() as i64 == dim + 1 {
            return linear_span_inside(s, &basis);
        }
    }
    None
}

/// Columns of `P` with the given subspace last, so `F(P Y)` is free of the trailing variables
/// when the subspace is a vertex.
pub(crate) fn vertex_last_columns(vertex: &[Vec<Fe>], n: usize, f: &Field) -> Vec<Vec<Fe>> {
    let (cols, kept) = linalg::complete_columns(vertex, n, f);
    let cols_t = linalg::transpose(&cols);
    let mut order: Vec<Vec<Fe>> = cols_t[kept..].to_vec();
    order.extend(cols_t[..kept].iter().cloned());
    order
}

/// Drops trailing variables a form does not involve.
pub(crate) fn truncate_vars(g: &FieldForm, r: usize, f: &Field) -> FieldForm {
    let terms = g.terms().iter().map(|(m, &c)| {
        debug_assert!(m.0[r..].iter().all(|&e| e == 0));
        (Monomial(m.0[..r].to_vec()), c)
    });
    FieldForm::from_terms(r, g.degree(), terms, f).unwrap()
}

/// Does the form vanish identically on the hyperplane `a . X = 0`?
pub(crate) fn vanishes_on_hyperplane(g: &FieldForm, a: &[Fe], f: &Field) -> bool {
    let n = a.len();
    let Some(i0) = a.iter().position(|c| !c.is_zero()) else { return false };
    let inv = f.inv(a[i0]).unwrap();
    let m = n - 1;
    let others: Vec<usize> = (0..n).filter(|&j| j != i0).collect();
    // quick rejection at the points e_j - (a_j / a_i0) e_i0
    for &j in &others {
        let mut x = vec![Fe::ZERO; n];
        x[j] = Fe::ONE;
        x[i0] = f.neg(f.mul(a[j], inv));
        if !g.eval_point(&x, f).is_zero() {
            return false;
        }
    }
    let subs: Vec<FieldForm> = (0..n)
        .map(|i| {
            if i == i0 {
                let terms = others.iter().enumerate().map(|(k, &j)| (Monomial::var(m, k), f.neg(f.mul(a[j], inv))));
                FieldForm::from_terms(m, 1, terms, f).unwrap()
            } else {
                let k = others.iter().position(|&j| j == i).unwrap();
                FieldForm::var(m, k)
            }
        })
        .collect();
    g.substitute(&subs, f).is_zero()
}

/// Projective points of `P^{n-1}(f)` with first nonzero coordinate 1.
pub(crate) fn projective_points(n: usize, f: &Field) -> impl Iterator<Item = Vec<Fe>> + '_ {
    let q = f.size() as u64;
    (0..n).flat_map(move |lead| {
        let tail = n - 1 - lead;
        (0..q.pow(tail as u32)).map(move |mut code| {
            let mut v = vec![Fe::ZERO; n];
            v[lead] = Fe::ONE;
            for c in v[lead + 1..].iter_mut().rev() {
                *c = f.from_index((code % q) as u32);
                code /= q;
            }
            v
        })
    })
}
