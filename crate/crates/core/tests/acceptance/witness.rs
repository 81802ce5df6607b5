//! Every emitted witness is re-verified here, independently of its own certificate.

use std::sync::Arc;

use rand::Rng;

use semistab::error::Error;
use semistab::gf::Field;
use semistab::linalg;
use semistab::poly::{compose_line, field_form, FieldForm};
use semistab::scheme::{self, extension, SchemeHandle};
use semistab::witness::{descend_even_cubic, descend_odd, r_connect_ci22, r_connect_cubic, CurveWitness, PointWitness, ProjPoint};

use crate::gen;
use crate::Outcome;

#[derive(Default)]
struct Tally {
    emitted: usize,
    verified: usize,
    declined: usize,
    log: Vec<String>,
}

impl Tally {
    fn curve(&mut self, label: &str, w: semistab::Result<CurveWitness>, eqs: &[FieldForm], ends: &[(i64, i64, &ProjPoint)], f: &Field) {
        let w = match w {
            Ok(w) => w,
            Err(Error::GenericityExhausted(_) | Error::CaseNotMatched(_)) => {
                self.declined += 1;
                return;
            }
            Err(e) => {
                self.log.push(format!("{label}: {e}"));
                return;
            }
        };
        self.emitted += 1;
        let composed = eqs.iter().all(|e| compose_line(e, &w.curve, f).is_zero());
        let incident = ends.iter().all(|&(s, u, p)| gen::proportional(&w.curve.at(f.from_int(s), f.from_int(u), f), &p.coords, f));
        if composed && incident && w.certificate.all_hold() {
            self.verified += 1;
        } else {
            self.log.push(format!("{label}: composed {composed}, incident {incident}"));
        }
    }

    fn point(&mut self, label: &str, w: semistab::Result<PointWitness>, eqs: &[FieldForm], base: &Arc<Field>) {
        let w = match w {
            Ok(w) => w,
            Err(Error::GenericityExhausted(_)) => {
                self.declined += 1;
                return;
            }
            Err(e) => {
                self.log.push(format!("{label}: {e}"));
                return;
            }
        };
        self.emitted += 1;
        // Frobenius fixedness, then incidence over the base field itself
        let fixed = w.point.frobenius_fixed() && w.point.frobenius(1) == w.point;
        let rational = w.point.field.size() == base.size();
        let on = eqs.iter().all(|e| e.eval_point(&w.point.coords, base).is_zero());
        if fixed && rational && on && w.certificate.all_hold() {
            self.verified += 1;
        } else {
            self.log.push(format!("{label}: fixed {fixed}, rational {rational}, on the variety {on}"));
        }
    }
}

/// `X0 Q + C` in five variables: a cubic with a double point at `e0`.
fn cubic_with_double_point(f: &Field, rng: &mut rand_chacha::ChaCha8Rng) -> FieldForm {
    let n = 5;
    let vars: Vec<FieldForm> = (1..n).map(|i| FieldForm::var(n, i)).collect();
    let q = gen::field_form(f, n - 1, 2, rng).substitute(&vars, f);
    let c = gen::field_form(f, n - 1, 3, rng).substitute(&vars, f);
    FieldForm::var(n, 0).mul(&q, f).add(&c, f)
}

fn other_point(eqs: &[FieldForm], f: &Arc<Field>, avoid: &ProjPoint, rng: &mut rand_chacha::ChaCha8Rng) -> Option<ProjPoint> {
    let (_, pts) = scheme::points(&SchemeHandle::new(f, eqs[0].nvars(), eqs.to_vec()), 1, scheme::DEFAULT_COUNT_BUDGET).ok()?;
    let pts: Vec<_> = pts.into_iter().filter(|p| !gen::proportional(p, &avoid.coords, f)).collect();
    if pts.is_empty() {
        return None;
    }
    ProjPoint::new(f, pts[rng.gen_range(0..pts.len())].clone()).ok()
}

/// A point over the extension of degree `k` that is not rational.
fn conjugate_point(eqs: &[FieldForm], base: &Arc<Field>, k: u32, rng: &mut rand_chacha::ChaCha8Rng) -> Option<ProjPoint> {
    let (ext, emb) = extension(base, k).ok()?;
    let lifted: Vec<FieldForm> = eqs.iter().map(|e| e.embed(&emb)).collect();
    let skip = rng.gen_range(0..200);
    let mut seen = 0;
    let x = scheme::first_point(&ext, eqs[0].nvars(), &lifted, |x| {
        let p = ProjPoint::new(&ext, x.to_vec()).unwrap();
        if p.descend(base).is_some() {
            return false;
        }
        seen += 1;
        seen > skip
    })?;
    ProjPoint::new(&ext, x).ok()
}

pub fn witness_certificates() -> Outcome {
    let mut rng = gen::rng(8);
    let mut t = Tally::default();
    let f7 = Field::prime(7).unwrap();
    let e0 = |n| ProjPoint::new(&f7, linalg::unit(n, 0)).unwrap();
    for i in 0..40 {
        let g = cubic_with_double_point(&f7, &mut rng);
        let z = e0(5);
        let Some(u) = other_point(&[g.clone()], &f7, &z, &mut rng) else { continue };
        t.curve(&format!("cubic {i}"), r_connect_cubic(&g, &f7, &z, &u), &[g.clone()], &[(0, 1, &z), (1, 0, &u)], &f7);
    }
    for i in 0..40 {
        let n = 6;
        let vars: Vec<FieldForm> = (1..n).map(|i| FieldForm::var(n, i)).collect();
        let x0 = FieldForm::var(n, 0);
        let a = x0.mul(&FieldForm::var(n, 1), &f7).add(&gen::field_form(&f7, n - 1, 2, &mut rng).substitute(&vars, &f7), &f7);
        let b = x0.mul(&FieldForm::var(n, 2), &f7).add(&gen::field_form(&f7, n - 1, 2, &mut rng).substitute(&vars, &f7), &f7);
        let x = e0(n);
        let eqs = [a.clone(), b.clone()];
        let Some(y) = other_point(&eqs, &f7, &x, &mut rng) else { continue };
        t.curve(&format!("CI(2,2) {i}"), r_connect_ci22(&a, &b, &f7, &x, &y), &eqs, &[(0, 1, &x), (1, 0, &x), (1, 1, &y)], &f7);
    }
    let f3 = Field::prime(3).unwrap();
    for i in 0..30 {
        let q = gen::field_form(&f3, 5, 2, &mut rng);
        let Some(p) = conjugate_point(&[q.clone()], &f3, 3, &mut rng) else { continue };
        t.point(&format!("odd descent {i}"), descend_odd(&[q.clone()], &f3, &p), &[q], &f3);
    }
    let f5 = Field::prime(5).unwrap();
    for i in 0..30 {
        let g = gen::field_form(&f5, 4, 3, &mut rng);
        let Some(p) = conjugate_point(&[g.clone()], &f5, 2, &mut rng) else { continue };
        t.point(&format!("even descent {i}"), descend_even_cubic(&g, &f5, &p), &[g], &f5);
    }
    // the worked line example
    let g = field_form(5, 3, &[(&[1, 1, 1, 0, 0], 1), (&[1, 0, 0, 1, 1], 1), (&[0, 3, 0, 0, 0], 1), (&[0, 0, 3, 0, 0], 1)], &f7);
    let (z, u) = (e0(5), ProjPoint::from_ints(&f7, &[2, 0, 0, 1, 0]).unwrap());
    t.curve("line example", r_connect_cubic(&g, &f7, &z, &u), &[g.clone()], &[(0, 1, &z), (1, 0, &u)], &f7);
    let pass = t.emitted > 100 && t.verified == t.emitted && t.log.is_empty();
    t.log.truncate(5);
    Outcome { pass, detail: format!("{}/{} emitted witnesses verified ({} draws declined by genericity)", t.verified, t.emitted, t.declined), log: t.log }
}
