//! Seeded random instances.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use semistab::gf::{Fe, Field};
use semistab::linalg;
use semistab::poly::{FieldForm, HomogForm, Monomial};
use semistab::ring::Series;
use semistab::scheme::{self, SchemeHandle};
use semistab::upoly::UPoly;
use semistab::witness::ProjPoint;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fe(f: &Field, rng: &mut ChaCha8Rng) -> Fe {
    f.from_index(rng.gen_range(0..f.size()))
}

pub fn field_form(f: &Field, n: usize, d: u32, rng: &mut ChaCha8Rng) -> FieldForm {
    let terms: Vec<(Monomial, Fe)> = Monomial::all(n, d).into_iter().map(|m| (m, fe(f, rng))).collect();
    FieldForm::from_terms(n, d, terms, f).unwrap()
}

/// Random polynomial of degree at most `deg`, divisible by `t^v` with `v` small.
pub fn poly(f: &Field, deg: usize, rng: &mut ChaCha8Rng) -> Vec<Fe> {
    let v = if rng.gen_bool(0.4) { rng.gen_range(1..=deg.max(1)) } else { 0 };
    (0..=deg).map(|i| if i < v { Fe::ZERO } else { fe(f, rng) }).collect()
}

/// A form whose coefficients are random exact polynomials in `t`.
pub fn series_form(f: &Field, n: usize, d: u32, deg: usize, rng: &mut ChaCha8Rng) -> HomogForm {
    let terms: Vec<(Monomial, Series)> = Monomial::all(n, d).into_iter().map(|m| (m, Series::exact(poly(f, deg, rng)))).collect();
    HomogForm::from_terms(n, d, terms, f).unwrap()
}

pub fn constant(g: &FieldForm) -> HomogForm {
    g.map(|&c| Series::constant(c))
}

pub fn invertible(f: &Field, n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<Fe>> {
    loop {
        let m: Vec<Vec<Fe>> = (0..n).map(|_| (0..n).map(|_| fe(f, rng)).collect()).collect();
        if !linalg::det(&m, f).is_zero() {
            return m;
        }
    }
}

/// `t`-adic valuation of a polynomial, `None` for zero.
pub fn val(p: &UPoly) -> Option<usize> {
    p.0.iter().position(|c| !c.is_zero())
}

/// No singular point over `F_{q^k}` for `k <= kmax`.
pub fn no_singular_points(eqs: &[FieldForm], field: &Arc<Field>, kmax: u32) -> bool {
    let sing = scheme::jacobian_scheme(field, eqs);
    (1..=kmax).all(|k| scheme::count_points(&sing, k, u64::MAX).unwrap() == 0)
}

/// A uniformly chosen rational point, if there is one.
pub fn rational_point(eqs: &[FieldForm], field: &Arc<Field>, rng: &mut ChaCha8Rng) -> Option<ProjPoint> {
    let n = eqs[0].nvars();
    let (_, pts) = scheme::points(&SchemeHandle::new(field, n, eqs.to_vec()), 1, scheme::DEFAULT_COUNT_BUDGET).ok()?;
    if pts.is_empty() {
        return None;
    }
    let i = rng.gen_range(0..pts.len());
    ProjPoint::new(field, pts[i].clone()).ok()
}

/// Same projective point.
pub fn proportional(a: &[Fe], b: &[Fe], f: &Field) -> bool {
    a.iter().any(|c| !c.is_zero()) && b.iter().any(|c| !c.is_zero()) && linalg::rank(&[a.to_vec(), b.to_vec()], f) == 1
}
