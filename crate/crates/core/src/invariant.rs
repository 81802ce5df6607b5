//! Valuations of classical invariants: Gram determinants of quadrics, the
//! discriminant of `det(lambda A + mu B)` for pencils of quadrics, and the
//! discriminant of ternary cubics.

use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::linalg::{det_upoly, min_precision};
use crate::poly::{gram_matrix, Form, HomogForm, Monomial};
use crate::ring::{Series, Val};
use crate::upoly::UPoly;

fn as_val(p: &UPoly, prec: Option<usize>) -> Val {
    match prec {
        None => Series::from_upoly(p).valuation(),
        Some(n) => Series::truncated(p.0.clone(), n).valuation(),
    }
}

fn upoly_form(g: &HomogForm) -> Form<UPoly> {
    g.map(|c| c.to_upoly())
}

fn precision_of(eqs: &[HomogForm]) -> Option<usize> {
    min_precision(eqs.iter().flat_map(|e| e.terms().values()))
}

/// Gram determinant of a quadric, as a polynomial in `t`.
pub fn quadric_det(q: &HomogForm, f: &Field) -> UPoly {
    det_upoly(&gram_matrix(&upoly_form(q), f), f)
}

/// Coefficients `c_0..c_m` (in `t`) of `det(x A + B)`.
pub fn pencil_binary_form(a: &HomogForm, b: &HomogForm, f: &Field) -> Vec<UPoly> {
    let ga = gram_matrix(&upoly_form(a), f);
    let gb = gram_matrix(&upoly_form(b), f);
    let m = ga.len();
    let dmax = ga.iter().chain(&gb).flatten().filter_map(|p| p.degree()).max().unwrap_or(0);
    // Kronecker substitution x = y^k keeps the t-degrees (< k) apart.
    let k = m * dmax + 1;
    let mut xk = vec![Fe::ZERO; k + 1];
    xk[k] = Fe::ONE;
    let xk = UPoly::new(xk);
    let mat: Vec<Vec<UPoly>> =
        (0..m).map(|i| (0..m).map(|j| ga[i][j].mul(&xk, f).add(&gb[i][j], f)).collect()).collect();
    let d = det_upoly(&mat, f);
    (0..=m).map(|i| UPoly::new((0..k).map(|r| d.coeff(i * k + r)).collect())).collect()
}

/// Discriminant of `sum c_i x^i` of formal degree `m = c.len() - 1`, up to sign.
///
/// Subtracting `m` times the first row of `f` from the first row of `f'` in the
/// Sylvester matrix leaves `c_m` alone in the first column, so the complementary
/// minor is the discriminant; this stays valid when `c_m` vanishes.
pub fn binary_discriminant(c: &[UPoly], f: &Field) -> UPoly {
    let m = c.len() - 1;
    if m < 2 {
        return UPoly::constant(Fe::ONE);
    }
    let size = 2 * m - 1;
    let zero = UPoly::zero();
    let mut rows: Vec<Vec<UPoly>> = Vec::with_capacity(size);
    // f rows: coefficients from c_m down to c_0
    for r in 0..m - 1 {
        let mut row = vec![zero.clone(); size];
        for j in 0..=m {
            row[r + j] = c[m - j].clone();
        }
        rows.push(row);
    }
    // f' rows: (m - j) c_{m-j} for j = 0..m-1
    for r in 0..m {
        let mut row = vec![zero.clone(); size];
        for j in 0..m {
            row[r + j] = c[m - j].scale(f.from_int((m - j) as i64), f);
        }
        rows.push(row);
    }
    let mf = f.from_int(m as i64);
    let r0 = rows[0].clone();
    let first = m - 1;
    for j in 0..size {
        rows[first][j] = rows[first][j].sub(&r0[j].scale(mf, f), f);
    }
    let minor: Vec<Vec<UPoly>> = rows[1..].iter().map(|r| r[1..].to_vec()).collect();
    det_upoly(&minor, f)
}

/// Discriminant of a ternary cubic, up to a nonzero constant in characteristic at least 5:
/// the 6x6 determinant of the partials and the partials of their Jacobian determinant.
pub fn ternary_cubic_discriminant<C: crate::poly::Coeff>(g: &Form<C>, f: &Field) -> Vec<Vec<C>> {
    let partials: Vec<Form<C>> = (0..3).map(|i| g.derivative(i, f)).collect();
    let hess: Vec<Vec<Form<C>>> = partials.iter().map(|p| (0..3).map(|j| p.derivative(j, f)).collect()).collect();
    let det3 = |m: &Vec<Vec<Form<C>>>| {
        let t = |a: usize, b: usize, c: usize| m[0][a].mul(&m[1][b], f).mul(&m[2][c], f);
        t(0, 1, 2).add(&t(1, 2, 0), f).add(&t(2, 0, 1), f).sub(&t(2, 1, 0), f).sub(&t(0, 2, 1), f).sub(&t(1, 0, 2), f)
    };
    let h = det3(&hess);
    let mut quadrics = partials;
    for j in 0..3 {
        quadrics.push(h.derivative(j, f));
    }
    let monos = Monomial::all(3, 2);
    quadrics.iter().map(|q| monos.iter().map(|m| q.coeff(m)).collect()).collect()
}

/// `t`-adic valuation of the invariant attached to the equations.
pub fn invariant_valuation(eqs: &[HomogForm], f: &Field) -> Result<Val> {
    let n = eqs[0].nvars();
    let prec = precision_of(eqs);
    let value = match eqs {
        [q] if q.degree() == 2 => quadric_det(q, f),
        [a, b] if a.degree() == 2 && b.degree() == 2 => binary_discriminant(&pencil_binary_form(a, b, f), f),
        [c] if c.degree() == 3 && n == 3 => det_upoly(&ternary_cubic_discriminant(&upoly_form(c), f), f),
        [c] if c.degree() == 3 => {
            return Err(Error::UnsupportedCase(format!("no invariant for cubics in {n} variables")))
        }
        _ => return Err(Error::UnsupportedCase("invariant needs a quadric, a pencil of quadrics or a ternary cubic".into())),
    };
    Ok(as_val(&value, prec))
}
