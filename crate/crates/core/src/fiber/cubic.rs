use std::sync::Arc;

use super::{
    adaptive_dim, change_by_columns, indices, linear_component, projective_points, rational_points, truncate_vars,
    vanishes_on_hyperplane, vertex_last_columns, ClassifyOptions, Evidence, FiberReport,
};
use crate::error::{Error, Result};
use crate::gf::{Embedding, Fe, Field};
use crate::linalg;
use crate::poly::{FieldForm, Monomial};
use crate::scheme::{self, jacobian_scheme};

/// Basis of the vertex: directions `p` with `F(X + s p) = F(X)`.
pub fn vertex_space(g: &FieldForm, f: &Field) -> Vec<Vec<Fe>> {
    let n = g.nvars();
    let partials: Vec<FieldForm> = (0..n).map(|i| g.derivative(i, f)).collect();
    let monos = Monomial::all(n, g.degree().saturating_sub(1));
    let mat: Vec<Vec<Fe>> = monos.iter().map(|m| partials.iter().map(|p| p.coeff(m)).collect()).collect();
    let ker = linalg::kernel(&mat, n, f);
    if f.p() > g.degree() || ker.is_empty() {
        return ker;
    }
    // In small characteristic a vanishing directional derivative is not enough;
    // test translation invariance on every vector of the candidate space.
    let lifted_vars: Vec<FieldForm> = (0..n).map(|i| FieldForm::var(n + 1, i)).collect();
    let widened = g.substitute(&lifted_vars, f);
    let q = f.size() as u64;
    let dim = ker.len() as u32;
    let mut good: Vec<Vec<Fe>> = Vec::new();
    for code in 1..q.pow(dim) {
        let mut c = code;
        let mut p = vec![Fe::ZERO; n];
        for k in &ker {
            let s = f.from_index((c % q) as u32);
            c /= q;
            for (x, y) in p.iter_mut().zip(k) {
                *x = f.add(*x, f.mul(s, *y));
            }
        }
        let subs: Vec<FieldForm> = (0..n)
            .map(|i| {
                let terms = [(Monomial::var(n + 1, i), Fe::ONE), (Monomial::var(n + 1, n), p[i])];
                FieldForm::from_terms(n + 1, 1, terms, f).unwrap()
            })
            .collect();
        if g.substitute(&subs, f) == widened {
            good.push(p);
        }
    }
    let (r, piv) = linalg::rref(&good, f);
    r.into_iter().take(piv.len()).collect()
}

/// A linear factor `form . X` found over `field`; `rational` holds it over the base when it descends.
#[derive(Clone, Debug)]
pub struct LinearFactor {
    pub field: Arc<Field>,
    pub form: Vec<Fe>,
    pub rational: Option<Vec<Fe>>,
}

fn normalize(v: &mut [Fe], f: &Field) {
    if let Some(&lead) = v.iter().find(|c| !c.is_zero()) {
        let inv = f.inv(lead).unwrap();
        for c in v.iter_mut() {
            *c = f.mul(*c, inv);
        }
    }
}

/// Linear factors of a cubic over `F_{q^3}` when at most three variables are essential,
/// over `F_q` otherwise. Any other geometric factor would force a rational one.
pub fn linear_factors_cubic(g: &FieldForm, field: &Arc<Field>) -> Result<Vec<LinearFactor>> {
    let f = &**field;
    let n = g.nvars();
    let vert = vertex_space(g, f);
    let r = n - vert.len();
    let cols = vertex_last_columns(&vert, n, f);
    let ess = truncate_vars(&change_by_columns(g, &cols, f), r, f);
    let pinv = linalg::inverse(&linalg::transpose(&cols), f).expect("invertible");
    let (ext, emb) = if r <= 3 { scheme::extension(field, 3)? } else { (field.clone(), Arc::new(Embedding::identity(field))) };
    let e = &*ext;
    let ess_e = ess.embed(&emb);
    let pinv_e: Vec<Vec<Fe>> = pinv.iter().map(|row| row.iter().map(|&c| emb.apply(c)).collect()).collect();
    let mut out = Vec::new();
    for a in projective_points(r, e) {
        if !vanishes_on_hyperplane(&ess_e, &a, e) {
            continue;
        }
        let mut form: Vec<Fe> = (0..n)
            .map(|j| (0..r).fold(Fe::ZERO, |acc, i| e.add(acc, e.mul(a[i], pinv_e[i][j]))))
            .collect();
        normalize(&mut form, e);
        let rational: Option<Vec<Fe>> = form.iter().map(|&c| emb.preimage(c)).collect();
        out.push(LinearFactor { field: ext.clone(), form, rational });
        if out.len() == 3 {
            break;
        }
    }
    Ok(out)
}

/// `L^2 | F` for a rational linear form `L`.
fn square_divides(g: &FieldForm, l: &[Fe], f: &Field) -> bool {
    vanishes_on_hyperplane(g, l, f) && (0..g.nvars()).all(|i| {
        let d = g.derivative(i, f);
        d.is_zero() || vanishes_on_hyperplane(&d, l, f)
    })
}

pub fn classify_cubic(g: &FieldForm, field: &Arc<Field>, opts: &ClassifyOptions) -> Result<FiberReport> {
    let f = &**field;
    if g.degree() != 3 || g.is_zero() {
        return Err(Error::Invalid("classify_cubic needs a nonzero cubic".into()));
    }
    if f.p() == 2 {
        return Err(Error::UnsupportedCase("cubics in characteristic 2".into()));
    }
    let n1 = g.nvars();
    let n = n1 as i64 - 1;
    let mut rep = FiberReport::blank("cubic", n1);
    let vert = vertex_space(g, f);
    rep.vertex_space_dim = vert.len() as i64 - 1;
    rep.cone_over_plane_curve = n >= 3 && rep.vertex_space_dim == n - 3;
    rep.evidence.push(Evidence::VertexKernel { dim: vert.len() });

    let factors = linear_factors_cubic(g, field)?;
    for lf in &factors {
        rep.evidence.push(Evidence::LinearFactor { form: indices(&lf.form, &lf.field), field_size: lf.field.size() });
    }
    if !factors.is_empty() {
        let rational: Vec<&Vec<Fe>> = factors.iter().filter_map(|lf| lf.rational.as_ref()).collect();
        let nonreduced = rational.iter().any(|l| square_divides(g, l, f));
        rep.geometrically_integral = false;
        rep.irreducible_over_base = rational.is_empty();
        rep.three_conjugate_hyperplanes = rational.is_empty();
        rep.reduced = !nonreduced;
        rep.singular_dim = if nonreduced { n - 1 } else { n - 2 };
        rep.evidence.push(Evidence::Note {
            text: format!("reducible: {} rational of {} linear factors", rational.len(), factors.len()),
        });
        rep.check()?;
        return Ok(rep);
    }
    rep.evidence.push(Evidence::Note { text: "no linear factor over any extension".into() });

    let cols = vertex_last_columns(&vert, n1, f);
    let moved = change_by_columns(g, &cols, f);
    let sing = jacobian_scheme(field, &[moved]);
    let (sd, ev) = adaptive_dim(&sing, opts, "singular locus")?;
    rep.evidence.push(ev);
    rep.singular_dim = sd;
    rep.reduced = sd < n - 1;
    rep.normal = Some(sd <= n - 3);
    if sd == n - 2 {
        let s0 = jacobian_scheme(field, std::slice::from_ref(g));
        let pts = rational_points(&s0, opts);
        let comp = linear_component(&s0, &pts, n - 2);
        rep.evidence.push(Evidence::Containment { what: "linear singular component".into(), holds: comp.is_some() });
        rep.nonnormal_linear_component = comp.map(|eqs| eqs.iter().map(|l| indices(l, f)).collect());
    }
    rep.check()?;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::field_form;

    fn opts() -> ClassifyOptions {
        ClassifyOptions::default()
    }

    #[test]
    fn cone_over_plane_cubic() {
        let f = Field::prime(7).unwrap();
        let g = field_form(5, 3, &[(&[3, 0, 0, 0, 0], 1), (&[0, 3, 0, 0, 0], 1), (&[0, 0, 3, 0, 0], 1)], &f);
        let r = classify_cubic(&g, &f, &opts()).unwrap();
        assert_eq!(r.vertex_space_dim, 1);
        assert!(r.cone_over_plane_curve && r.geometrically_integral);
        assert_eq!(r.singular_dim, 1);
    }

    #[test]
    fn norm_form_is_three_conjugate_planes() {
        let f3 = Field::prime(3).unwrap();
        let f27 = Field::gf(3, 3).unwrap();
        let emb = Embedding::new(&f3, &f27).unwrap();
        let th = f27.generator();
        // product of the three Frobenius conjugates of X0 + th X1 + th^2 X2
        let mut prod = FieldForm::constant(3, Fe::ONE);
        for k in 0..3 {
            let c = f27.pow(th, 3u64.pow(k));
            let lin = [(Monomial::var(3, 0), Fe::ONE), (Monomial::var(3, 1), c), (Monomial::var(3, 2), f27.mul(c, c))];
            prod = prod.mul(&FieldForm::from_terms(3, 1, lin, &f27).unwrap(), &f27);
        }
        let terms = prod.terms().iter().map(|(m, &c)| (m.clone(), emb.preimage(c).expect("norm is rational")));
        let g = FieldForm::from_terms(3, 3, terms, &f3).unwrap();
        let r = classify_cubic(&g, &f3, &opts()).unwrap();
        assert!(r.three_conjugate_hyperplanes && r.irreducible_over_base && !r.geometrically_integral);
        assert_eq!(r.vertex_space_dim, -1);
    }

    fn brute_singular(g: &FieldForm, f: &Field) -> usize {
        let n = g.nvars();
        let eqs: Vec<FieldForm> = std::iter::once(g.clone()).chain((0..n).map(|i| g.derivative(i, f))).collect();
        projective_points(n, f).filter(|x| eqs.iter().all(|e| e.eval_point(x, f).is_zero())).count()
    }

    #[test]
    fn isolated_singularities_are_normal() {
        let f = Field::prime(7).unwrap();
        let g = field_form(4, 3, &[(&[1, 1, 1, 0], 1), (&[0, 0, 0, 3], 1)], &f);
        // brute force: the three coordinate points, over F_7 and F_49
        assert_eq!(brute_singular(&g, &f), 3);
        let (f49, e) = scheme::extension(&f, 2).unwrap();
        assert_eq!(brute_singular(&g.embed(&e), &f49), 3);
        let r = classify_cubic(&g, &f, &opts()).unwrap();
        assert!(r.geometrically_integral);
        assert_eq!(r.singular_dim, 0);
        assert_eq!(r.normal, Some(true));
    }

    #[test]
    fn cuspidal_curve_is_not_normal() {
        let f = Field::prime(5).unwrap();
        let g = field_form(3, 3, &[(&[2, 0, 1], 1), (&[0, 3, 0], 1)], &f);
        let r = classify_cubic(&g, &f, &opts()).unwrap();
        assert!(r.geometrically_integral);
        assert_eq!(r.normal, Some(false));
        let comp = r.nonnormal_linear_component.unwrap();
        assert_eq!(comp.len(), 2);
    }

    #[test]
    fn reducible_and_nonreduced() {
        let f = Field::prime(5).unwrap();
        let dbl = field_form(3, 3, &[(&[2, 1, 0], 1)], &f);
        let r = classify_cubic(&dbl, &f, &opts()).unwrap();
        assert!(!r.reduced && r.singular_dim == 1);
        let split = field_form(3, 3, &[(&[3, 0, 0], 1), (&[1, 2, 0], 1), (&[1, 0, 2], 1)], &f);
        let r = classify_cubic(&split, &f, &opts()).unwrap();
        assert!(r.reduced && !r.irreducible_over_base && !r.three_conjugate_hyperplanes);
    }
}
