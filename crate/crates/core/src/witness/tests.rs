use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gf::{Embedding, Fe, Field};
use crate::poly::{compose_line, field_form, FieldForm, Monomial};
use crate::scheme::{extension, first_point};

fn random_form(f: &Field, n: usize, d: u32, rng: &mut ChaCha8Rng) -> FieldForm {
    let terms = Monomial::all(n, d).into_iter().map(|m| (m, f.from_index(rng.gen_range(0..f.size()))));
    FieldForm::from_terms(n, d, terms, f).unwrap()
}

fn fermat(n: usize, f: &Field) -> FieldForm {
    let terms: Vec<(Monomial, Fe)> = (0..n)
        .map(|i| {
            let mut e = vec![0u8; n];
            e[i] = 3;
            (Monomial(e), Fe::ONE)
        })
        .collect();
    FieldForm::from_terms(n, 3, terms, f).unwrap()
}

#[test]
fn double_point_projection_example() {
    let f = Field::prime(7).unwrap();
    let g = field_form(3, 3, &[(&[1, 1, 1], 1), (&[0, 3, 0], 1), (&[0, 0, 3], 1)], &f);
    let z = [Fe::ONE, Fe::ZERO, Fe::ZERO];
    let w = smooth_point_from_double_point(&g, &f, &z, &[Fe::ONE, Fe::ONE]).unwrap();
    assert_eq!(w.point, ProjPoint::from_ints(&f, &[-2, 1, 1]).unwrap());
    assert!(w.smooth && w.certificate.all_hold());
    // dF/dX0 = X1 X2 = 1 at the point
    assert_eq!(g.derivative(0, &f).eval_point(&[f.from_int(-2), Fe::ONE, Fe::ONE], &f), Fe::ONE);
}

#[test]
fn norm_form_has_no_smooth_point() {
    let f3 = Field::prime(3).unwrap();
    let (f27, emb) = extension(&f3, 3).unwrap();
    let th = f27.generator();
    let mut prod = FieldForm::constant(3, Fe::ONE);
    for k in 0..3 {
        let c = f27.pow(th, 3u64.pow(k));
        let lin = [(Monomial::var(3, 0), Fe::ONE), (Monomial::var(3, 1), c), (Monomial::var(3, 2), f27.mul(c, c))];
        prod = prod.mul(&FieldForm::from_terms(3, 1, lin, &f27).unwrap(), &f27);
    }
    let terms = prod.terms().iter().map(|(m, &c)| (m.clone(), emb.preimage(c).unwrap()));
    let g = FieldForm::from_terms(3, 3, terms, &f3).unwrap();
    assert_eq!(smooth_point_on_cubic(&g, &f3).unwrap(), CubicPoint::Tag(NormalFormTag::ThreeConjugateHyperplanes));
    let cube = field_form(3, 3, &[(&[3, 0, 0], 1)], &f3);
    assert_eq!(smooth_point_on_cubic(&cube, &f3).unwrap(), CubicPoint::Tag(NormalFormTag::TripleHyperplane));
}

#[test]
fn smooth_cubic_surface_has_smooth_point() {
    let f = Field::prime(7).unwrap();
    let g = fermat(4, &f);
    let CubicPoint::Point(w) = smooth_point_on_cubic(&g, &f).unwrap() else { panic!("expected a point") };
    assert!(w.smooth && w.point.lies_on(&[g.clone()]));
    assert!((0..4).any(|i| !g.derivative(i, &f).eval_point(&w.point.coords, &f).is_zero()));
}

#[test]
fn quadric_point_examples() {
    let f3 = Field::prime(3).unwrap();
    let q = field_form(3, 2, &[(&[2, 0, 0], 1), (&[0, 2, 0], 1), (&[0, 0, 2], 1)], &f3);
    assert_eq!(quadric_point(&q, &f3, false).unwrap().point, ProjPoint::from_ints(&f3, &[1, 1, 1]).unwrap());
    let q = field_form(3, 2, &[(&[1, 1, 0], 1), (&[0, 0, 2], 1)], &f3);
    assert_eq!(quadric_point(&q, &f3, true).unwrap().point, ProjPoint::from_ints(&f3, &[1, 0, 0]).unwrap());
    // X0^2 + X1^2 is a conjugate pair over F3: only the vertex is rational
    let q = field_form(3, 2, &[(&[2, 0, 0], 1), (&[0, 2, 0], 1)], &f3);
    let w = quadric_point(&q, &f3, true).unwrap();
    assert_eq!(w.point, ProjPoint::from_ints(&f3, &[0, 0, 1]).unwrap());
    assert!(!w.smooth);
    let binary = field_form(2, 2, &[(&[2, 0], 1), (&[0, 2], 1)], &f3);
    assert!(matches!(quadric_point(&binary, &f3, false), Err(Error::NoPoint(_))));
}

fn lift(eqs: &[FieldForm], emb: &Embedding) -> Vec<FieldForm> {
    eqs.iter().map(|e| e.embed(emb)).collect()
}

/// The `skip`-th point over the extension that is not rational.
fn nonrational_point(eqs: &[FieldForm], base: &Arc<Field>, k: u32, skip: usize) -> ProjPoint {
    let (ext, emb) = extension(base, k).unwrap();
    let lifted = lift(eqs, &emb);
    let mut seen = 0;
    let x = first_point(&ext, eqs[0].nvars(), &lifted, |x| {
        let p = ProjPoint::new(&ext, x.to_vec()).unwrap();
        if p.descend(base).is_some() {
            return false;
        }
        seen += 1;
        seen > skip
    })
    .unwrap();
    ProjPoint::new(&ext, x).unwrap()
}

#[test]
fn odd_descent_on_quadrics() {
    let f3 = Field::prime(3).unwrap();
    let q = field_form(5, 2, &[(&[2, 0, 0, 0, 0], 1), (&[0, 2, 0, 0, 0], 1), (&[0, 0, 2, 0, 0], 1), (&[0, 0, 0, 2, 0], 1), (&[0, 0, 0, 0, 2], 2)], &f3);
    for skip in [0, 17, 140, 900] {
        let p = nonrational_point(&[q.clone()], &f3, 3, skip);
        let w = descend_odd(&[q.clone()], &f3, &p).unwrap();
        assert!(w.point.field == f3 && w.point.lies_on(&[q.clone()]));
        assert!(w.certificate.all_hold());
    }
    // rational input comes back unchanged
    let r = ProjPoint::from_ints(&f3, &[1, 1, 1, 0, 0]).unwrap();
    assert_eq!(descend_odd(&[q.clone()], &f3, &r).unwrap().point, r);
}

#[test]
fn odd_descent_on_a_line_inside_the_quadric() {
    let f3 = Field::prime(3).unwrap();
    let (f27, _) = extension(&f3, 3).unwrap();
    // X0 X1 + X2 X3 contains the line X0 = X2 = 0
    let q = field_form(4, 2, &[(&[1, 1, 0, 0], 1), (&[0, 0, 1, 1], 1)], &f3);
    let p = ProjPoint::new(&f27, vec![Fe::ZERO, Fe::ONE, Fe::ZERO, f27.generator()]).unwrap();
    let w = descend_odd(&[q.clone()], &f3, &p).unwrap();
    assert!(w.point.coords[0].is_zero() && w.point.coords[2].is_zero());
    assert!(w.certificate.checks.iter().any(|c| c.identity.contains("line in X")));
}

#[test]
fn odd_descent_on_a_pencil() {
    let f3 = Field::prime(3).unwrap();
    let a = field_form(5, 2, &[(&[2, 0, 0, 0, 0], 1), (&[0, 2, 0, 0, 0], 1), (&[0, 0, 2, 0, 0], 1), (&[0, 0, 0, 2, 0], 1), (&[0, 0, 0, 0, 2], 1)], &f3);
    let b = field_form(5, 2, &[(&[0, 2, 0, 0, 0], 1), (&[0, 0, 2, 0, 0], 2), (&[0, 0, 0, 1, 1], 1)], &f3);
    let eqs = [a, b];
    for skip in [0, 5, 30] {
        let p = nonrational_point(&eqs, &f3, 3, skip);
        let w = descend_odd(&eqs, &f3, &p).unwrap();
        assert!(w.point.lies_on(&eqs) && w.certificate.all_hold());
    }
}

#[test]
fn even_descent_on_cubics() {
    let f5 = Field::prime(5).unwrap();
    let g = fermat(4, &f5);
    for skip in [0, 3, 50, 400] {
        let p = nonrational_point(&[g.clone()], &f5, 2, skip);
        let w = descend_even_cubic(&g, &f5, &p).unwrap();
        assert!(w.point.field == f5 && w.point.lies_on(&[g.clone()]) && w.certificate.all_hold());
        // brute force: the output is on the line through p and its conjugate
        let (ext, _) = extension(&f5, 2).unwrap();
        let lifted = w.point.embed(&ext).unwrap();
        let rows = vec![p.coords.clone(), p.frobenius(1).coords, lifted.coords];
        assert_eq!(crate::linalg::rank(&rows, &ext), 2);
    }
    // X0 X1 X2 + X3 (X0^2 + X1^2 + X2^2 + X3^2) contains the line X0 = X3 = 0
    let g = field_form(4, 3, &[(&[1, 1, 1, 0], 1), (&[2, 0, 0, 1], 1), (&[0, 2, 0, 1], 1), (&[0, 0, 2, 1], 1), (&[0, 0, 0, 3], 1)], &f5);
    let (f25, _) = extension(&f5, 2).unwrap();
    let p = ProjPoint::new(&f25, vec![Fe::ZERO, Fe::ONE, f25.generator(), Fe::ZERO]).unwrap();
    let w = descend_even_cubic(&g, &f5, &p).unwrap();
    assert_eq!(w.point, ProjPoint::from_ints(&f5, &[0, 1, 0, 0]).unwrap());
}

/// A cubic with a double point at `e_0`: `X0 Q + C`.
fn cubic_with_double_point(f: &Field, n: usize, rng: &mut ChaCha8Rng) -> FieldForm {
    let vars: Vec<FieldForm> = (1..n).map(|i| FieldForm::var(n, i)).collect();
    let pad = |g: &FieldForm| g.substitute(&vars, f);
    let q = pad(&random_form(f, n - 1, 2, rng));
    let c = pad(&random_form(f, n - 1, 3, rng));
    FieldForm::var(n, 0).mul(&q, f).add(&c, f)
}

#[test]
fn cubic_connecting_curves() {
    let f = Field::prime(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut done = 0;
    while done < 20 {
        let g = cubic_with_double_point(&f, 5, &mut rng);
        let z = ProjPoint::new(&f, crate::linalg::unit(5, 0)).unwrap();
        let skip = rng.gen_range(0..40);
        let mut seen = 0;
        let Some(u) = first_point(&f, 5, &[g.clone()], |x| {
            seen += 1;
            x != z.coords.as_slice() && seen > skip
        }) else {
            continue;
        };
        let u = ProjPoint::new(&f, u).unwrap();
        let Ok(w) = r_connect_cubic(&g, &f, &z, &u) else { continue };
        assert!(w.certificate.all_hold());
        assert!(compose_line(&g, &w.curve, &f).is_zero());
        assert!(same_point(&w.curve.at(Fe::ZERO, Fe::ONE, &f), &z.coords, &f));
        assert!(same_point(&w.curve.at(Fe::ONE, Fe::ZERO, &f), &u.coords, &f));
        done += 1;
    }
}

#[test]
fn cubic_connecting_line() {
    let f = Field::prime(7).unwrap();
    // X0 (X1 X2 + X3 X4) + X1^3 + X2^3 contains the line through e0 and e3
    let g = field_form(5, 3, &[(&[1, 1, 1, 0, 0], 1), (&[1, 0, 0, 1, 1], 1), (&[0, 3, 0, 0, 0], 1), (&[0, 0, 3, 0, 0], 1)], &f);
    let z = ProjPoint::from_ints(&f, &[1, 0, 0, 0, 0]).unwrap();
    let u = ProjPoint::from_ints(&f, &[2, 0, 0, 1, 0]).unwrap();
    let w = r_connect_cubic(&g, &f, &z, &u).unwrap();
    assert_eq!(w.curve.degree(), 1);
}

#[test]
fn ci22_connecting_curves() {
    let f = Field::prime(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 6;
    let mut done = 0;
    let mut attempts = 0;
    while done < 10 {
        attempts += 1;
        assert!(attempts < 60, "too many degenerate draws");
        // quadrics through e0 with independent tangent hyperplanes X1, X2 at e0
        let vars: Vec<FieldForm> = (1..n).map(|i| FieldForm::var(n, i)).collect();
        let x0 = FieldForm::var(n, 0);
        let a = x0.mul(&FieldForm::var(n, 1), &f).add(&random_form(&f, n - 1, 2, &mut rng).substitute(&vars, &f), &f);
        let b = x0.mul(&FieldForm::var(n, 2), &f).add(&random_form(&f, n - 1, 2, &mut rng).substitute(&vars, &f), &f);
        let x = ProjPoint::new(&f, crate::linalg::unit(n, 0)).unwrap();
        let skip = rng.gen_range(0..30);
        let mut seen = 0;
        let eqs = [a.clone(), b.clone()];
        let Some(y) = first_point(&f, n, &eqs, |p| {
            seen += 1;
            p != x.coords.as_slice() && seen > skip
        }) else {
            continue;
        };
        let y = ProjPoint::new(&f, y).unwrap();
        match r_connect_ci22(&a, &b, &f, &x, &y) {
            Ok(w) => {
                assert!(w.certificate.all_hold() && w.curve.degree() <= 4);
                assert!(compose_line(&a, &w.curve, &f).is_zero() && compose_line(&b, &w.curve, &f).is_zero());
                for (s, u, p) in [(0, 1, &x), (1, 0, &x), (1, 1, &y)] {
                    let at = w.curve.at(f.from_int(s), f.from_int(u), &f);
                    assert!(same_point(&at, &p.coords, &f));
                }
                done += 1;
            }
            Err(Error::GenericityExhausted(_)) => continue,
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}

#[test]
fn lines_on_smooth_ci22_in_p5() {
    let f = Field::prime(7).unwrap();
    let a = field_form(6, 2, &[(&[2, 0, 0, 0, 0, 0], 1), (&[0, 2, 0, 0, 0, 0], 1), (&[0, 0, 2, 0, 0, 0], 1), (&[0, 0, 0, 2, 0, 0], 1), (&[0, 0, 0, 0, 2, 0], 1), (&[0, 0, 0, 0, 0, 2], 1)], &f);
    let b = field_form(6, 2, &[(&[0, 2, 0, 0, 0, 0], 1), (&[0, 0, 2, 0, 0, 0], 2), (&[0, 0, 0, 2, 0, 0], 3), (&[0, 0, 0, 0, 2, 0], 4), (&[0, 0, 0, 0, 0, 2], 5)], &f);
    let eqs = [a, b];
    let mut checked = 0;
    first_point(&f, 6, &eqs, |x| {
        let p = ProjPoint::new(&f, x.to_vec()).unwrap();
        let r = lines_through_point(&eqs, &f, &p).unwrap();
        assert_eq!(r.dim.dim, Some(0));
        assert_eq!(r.expected_dim, 0);
        if r.reduced == Some(true) {
            assert_eq!(r.length, Some(4));
        }
        checked += 1;
        checked == 3
    });
    assert_eq!(checked, 3);
}

#[test]
fn tangent_cone_of_quadric_is_a_hyperplane() {
    let f = Field::prime(5).unwrap();
    let q = field_form(4, 2, &[(&[1, 1, 0, 0], 1), (&[0, 0, 1, 1], 1)], &f);
    let x = ProjPoint::from_ints(&f, &[1, 0, 0, 0]).unwrap();
    let r = tangent_cone(&[q], &f, &x).unwrap();
    assert_eq!(r.multiplicity, 1);
    assert_eq!(r.tangent_equations.len(), 1);
    // at a vertex the cone is the quadric itself
    let cone = field_form(4, 2, &[(&[0, 2, 0, 0], 1), (&[0, 0, 2, 0], 1), (&[0, 0, 0, 2], 1)], &f);
    let r = tangent_cone(&[cone], &f, &x).unwrap();
    assert_eq!((r.multiplicity, r.cone_rank), (2, Some(3)));
}

#[test]
fn plane_sections_of_quadrics() {
    let f = Field::prime(5).unwrap();
    let q = field_form(4, 2, &[(&[1, 1, 0, 0], 1), (&[0, 0, 1, 1], 1)], &f);
    let p = |v: &[i64]| ProjPoint::from_ints(&f, v).unwrap();
    // the tangent plane X1 = 0 at e0 cuts the two rulings
    let r = plane_conic(&q, &f, &p(&[1, 0, 0, 0]), &p(&[0, 0, 1, 0]), &p(&[0, 0, 0, 1])).unwrap();
    assert_eq!(r.kind, ConicKind::TwoLines);
    assert!(matches!(
        plane_conic(&q, &f, &p(&[1, 0, 0, 0]), &p(&[0, 0, 1, 0]), &p(&[1, 0, 1, 0])),
        Err(Error::CollinearPoints)
    ));
    // smooth quadric threefold: a general plane section is a smooth conic
    let q = field_form(5, 2, &[(&[2, 0, 0, 0, 0], 1), (&[0, 2, 0, 0, 0], 1), (&[0, 0, 2, 0, 0], 1), (&[0, 0, 0, 2, 0], 1), (&[0, 0, 0, 0, 2], 1)], &f);
    let mut pts = Vec::new();
    first_point(&f, 5, &[q.clone()], |x| {
        let cand = x.to_vec();
        let mut trial = pts.clone();
        trial.push(cand.clone());
        if crate::linalg::rank(&trial, &f) == trial.len() {
            pts.push(cand);
        }
        pts.len() == 3
    });
    let [a, b, c] = [0, 1, 2].map(|i| ProjPoint::new(&f, pts[i].clone()).unwrap());
    let r = plane_conic(&q, &f, &a, &b, &c).unwrap();
    assert!(r.certificate.all_hold());
    assert!(matches!(r.kind, ConicKind::Smooth | ConicKind::TwoLines | ConicKind::ConjugateLines));
}

#[test]
fn nodal_tangent_section_of_a_cubic_surface() {
    let f = Field::prime(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = random_form(&f, 4, 3, &mut rng);
    let mut tried = 0;
    let mut nodal = 0;
    first_point(&f, 4, &[g.clone()], |x| {
        let p = ProjPoint::new(&f, x.to_vec()).unwrap();
        if let Ok(s) = tangent_section(&g, &f, &p) {
            tried += 1;
            nodal += s.node_at_x_only as usize;
        }
        tried == 10
    });
    assert!(tried == 10 && nodal >= 6, "{nodal} of {tried}");
}
