//! Weight systems, multiplicities and the reduction loop.

use std::sync::Arc;

use rand::Rng;

use semistab::census::plant;
use semistab::fiber::ClassifyOptions;
use semistab::gf::{Fe, Field};
use semistab::linalg;
use semistab::poly::{apply_linear, HomogForm, LinearChange, Monomial};
use semistab::reduce::{reduce_to_semistable, ModelState, ReduceOptions, Step};
use semistab::ring::{Series, Val};
use semistab::stab::{mult_w, mult_w_pencil, search_destabilizer, WeightSystem, DEFAULT_SEARCH_BUDGET};
use semistab::upoly::UPoly;

use crate::gen;
use crate::Outcome;

const FIELDS: [u32; 3] = [3, 5, 7];

fn coeff_poly(g: &HomogForm, m: &Monomial) -> UPoly {
    UPoly::new(g.coeff(m).coeffs().to_vec())
}

/// Hessian of a quadric, entries in `F_q[t]`.
fn hessian(g: &HomogForm, f: &Field) -> Vec<Vec<UPoly>> {
    let n = g.nvars();
    let two = f.from_int(2);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut e = vec![0u8; n];
                    e[i] += 1;
                    e[j] += 1;
                    let c = coeff_poly(g, &Monomial(e));
                    if i == j { c.scale(two, f) } else { c }
                })
                .collect()
        })
        .collect()
}

/// Leibniz expansion, independent of the library's elimination.
fn leibniz(m: &[Vec<UPoly>], f: &Field) -> UPoly {
    fn perms(n: usize) -> Vec<(Vec<usize>, bool)> {
        if n == 0 {
            return vec![(vec![], true)];
        }
        let mut out = Vec::new();
        for (p, even) in perms(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                // inserting at `pos` moves the new entry past n-1-pos others
                out.push((q, even == ((n - 1 - pos) % 2 == 0)));
            }
        }
        out
    }
    let mut total = UPoly::zero();
    for (p, even) in perms(m.len()) {
        let mut term = UPoly::constant(Fe::ONE);
        for (i, &j) in p.iter().enumerate() {
            term = term.mul(&m[i][j], f);
        }
        total = if even { total.add(&term, f) } else { total.sub(&term, f) };
    }
    total
}

pub fn transformation_law() -> Outcome {
    let mut rng = gen::rng(1);
    let (mut ok, mut total) = (0, 0);
    let mut first_bad = None;
    while total < 1000 {
        let p = FIELDS[rng.gen_range(0..3)];
        let f = Field::prime(p).unwrap();
        let n = rng.gen_range(2..=5);
        let q = gen::series_form(&f, n, 2, 2, &mut rng);
        let v0 = match gen::val(&leibniz(&hessian(&q, &f), &f)) {
            Some(v) => v as i64,
            None => continue,
        };
        let w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        let ws = WeightSystem::new(w.clone());
        let m = mult_w(&q, &ws).unwrap();
        let step = Step::WeightedScale { weights: ws.weights().to_vec(), shifts: vec![m] };
        let moved = step.apply(&[q], &f).unwrap();
        let v1 = gen::val(&leibniz(&hessian(&moved[0], &f), &f)).map(|v| v as i64);
        let sum: i64 = ws.weights().iter().sum();
        let expected = v0 + 2 * sum - n as i64 * m;
        total += 1;
        if v1 == Some(expected) {
            ok += 1;
        } else if first_bad.is_none() {
            first_bad = Some(format!("p={p} n={n} w={w:?}: got {v1:?}, expected {expected}"));
        }
    }
    let mut out = Outcome::new(ok == total, format!("{ok}/{total} exact"));
    out.log.extend(first_bad);
    out
}

/// Lowest `t`-order part of `g(t^w X)` and its order, from the terms directly.
fn lowest_part(g: &HomogForm, w: &[i64]) -> (i64, Vec<Fe>) {
    let monos = Monomial::all(g.nvars(), g.degree());
    let order = |m: &Monomial, c: &Series| c.valuation().finite().map(|v| v as i64 + m.weight(w));
    let low = monos.iter().filter_map(|m| order(m, &g.coeff(m))).min().unwrap();
    let part = monos
        .iter()
        .map(|m| {
            let c = g.coeff(m);
            let k = low - m.weight(w);
            if k < 0 { Fe::ZERO } else { c.coeff(k as usize) }
        })
        .collect();
    (low, part)
}

pub fn pencil_inequality() -> Outcome {
    let mut rng = gen::rng(2);
    let (mut agree, mut strict, mut total) = (0, 0, 0);
    let mut log = Vec::new();
    while total < 200 {
        let p = FIELDS[rng.gen_range(0..3)];
        let f = Field::prime(p).unwrap();
        let n = rng.gen_range(3..=5);
        let a = gen::series_form(&f, n, 2, 2, &mut rng);
        let mut b = gen::series_form(&f, n, 2, 2, &mut rng);
        if rng.gen_bool(0.5) {
            // push the pencil toward the equality case
            let c = Series::constant(gen::fe(&f, &mut rng));
            b = a.scale(&c, &f).add(&b.t_shift(rng.gen_range(1..=3)).unwrap(), &f);
        }
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        let ws = WeightSystem::new(w.clone());
        let Ok(m) = mult_w_pencil(&a, &b, &ws, &f) else { continue };
        let (ma, la) = lowest_part(&a, ws.weights());
        let (mb, lb) = lowest_part(&b, ws.weights());
        total += 1;
        let prop = linalg::rank(&[la, lb], &f) == 1;
        let is_strict = m > ma + mb;
        strict += is_strict as usize;
        if m >= ma + mb && is_strict == prop {
            agree += 1;
        } else if log.len() < 3 {
            log.push(format!("p={p} n={n} w={w:?}: wedge {m}, sum {}, proportional {prop}", ma + mb));
        }
    }
    let mut out = Outcome::new(agree == total && strict > 0 && strict < total, format!("{agree}/{total} agree ({strict} strict)"));
    out.log = log;
    out
}

fn truncate_all(g: &HomogForm, prec: usize) -> HomogForm {
    g.map(|c| c.truncate(prec))
}

/// A smooth-looking pencil made non-semistable by `X -> t^w X` and a coordinate change.
fn unstable_pencil(f: &Arc<Field>, rng: &mut rand_chacha::ChaCha8Rng) -> Option<ModelState> {
    let n = 4;
    let base = gen::field_form(f, n, 2, rng);
    let other = gen::field_form(f, n, 2, rng);
    let a = gen::constant(&base).add(&gen::series_form(f, n, 2, 1, rng).t_shift(1).ok()?, f);
    let b = gen::constant(&other).add(&gen::series_form(f, n, 2, 1, rng).t_shift(1).ok()?, f);
    let w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=1)).collect();
    if w.iter().all(|&x| x == 0) {
        return None;
    }
    let change = LinearChange::from_field(&gen::invertible(f, n, rng));
    let eqs: Vec<HomogForm> = [a, b]
        .iter()
        .map(|g| apply_linear(&g.weighted_scale(&w).unwrap(), &change, f).map(|h| truncate_all(&h, 16)))
        .collect::<semistab::Result<_>>()
        .ok()?;
    let s = ModelState::pencil(f, eqs[0].clone(), eqs[1].clone()).ok()?;
    matches!(s.invariant(), Some(Val::Finite(_))).then_some(s)
}

pub fn pencil_reduction() -> Outcome {
    let f = Field::prime(3).unwrap();
    let mut rng = gen::rng(3);
    let (mut ok, mut total, mut draws, mut steps) = (0, 0, 0, 0);
    let mut log = Vec::new();
    while total < 100 && draws < 5000 {
        draws += 1;
        let Some(s) = unstable_pencil(&f, &mut rng) else { continue };
        let verdict = search_destabilizer(&s.equations, &s.field, DEFAULT_SEARCH_BUDGET).unwrap();
        if verdict.witness.is_none() {
            continue;
        }
        total += 1;
        let Some(Val::Finite(v0)) = s.invariant() else { unreachable!() };
        match reduce_to_semistable(&s, &ReduceOptions::default()) {
            Ok((_, trace)) => {
                let drops = trace.iter().all(|t| match (t.valuation_before, t.valuation_after) {
                    (Some(Val::Finite(b)), Some(Val::Finite(a))) => a < b,
                    _ => false,
                });
                steps += trace.len();
                if drops && !trace.is_empty() && trace.len() <= v0 {
                    ok += 1;
                } else if log.len() < 3 {
                    log.push(format!("draw {draws}: {} steps from valuation {v0}, strictly decreasing {drops}", trace.len()));
                }
            }
            Err(e) => {
                if log.len() < 3 {
                    log.push(format!("draw {draws}: {e}"));
                }
            }
        }
    }
    let mut out = Outcome::new(ok == 100 && total == 100, format!("{ok}/{total} reduced, {steps} steps in all"));
    out.log = log;
    out
}

fn random_section(f: &Field, n: usize, deg: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<UPoly> {
    loop {
        let s: Vec<UPoly> = (0..n).map(|_| UPoly::new((0..=deg).map(|_| gen::fe(f, rng)).collect())).collect();
        if semistab::census::bezout(&s, f).is_some() {
            return s;
        }
    }
}

pub fn semistable_quadric_fibers() -> Outcome {
    let mut rng = gen::rng(4);
    let (mut ok, mut total, mut nontrivial) = (0, 0, 0);
    let mut log = Vec::new();
    while total < 100 {
        let p = FIELDS[rng.gen_range(0..3)];
        let f = Field::prime(p).unwrap();
        let n = rng.gen_range(3..=5);
        let s = random_section(&f, n, rng.gen_range(0..=2), &mut rng);
        let bundle = plant(&f, &s, 2, 1, 2, &mut rng).unwrap();
        let q: HomogForm = bundle.equations[0].map(|c| Series::exact(c.0.clone()));
        if gen::val(&leibniz(&hessian(&q, &f), &f)).is_none() {
            continue;
        }
        let section: Vec<Series> = s.iter().map(|c| Series::exact(c.0.clone())).collect();
        let state = ModelState::single(&f, q).unwrap().with_section(section).unwrap();
        total += 1;
        let verdict = reduce_to_semistable(&state, &ReduceOptions::default()).and_then(|(end, trace)| {
            nontrivial += !trace.is_empty() as usize;
            let r = end.classify(&ClassifyOptions::default())?;
            let on_fiber = end.section_point().is_some_and(|x| end.residues()[0].eval_point(&x, &f).is_zero());
            Ok((r, on_fiber))
        });
        match verdict {
            Ok((r, on_fiber)) if r.geometrically_integral && r.singular_dim <= n as i64 - 4 && on_fiber => ok += 1,
            Ok((r, _)) => log.push(format!("p={p} n={n}: {} singular dim {}", r.kind, r.singular_dim)),
            Err(e) => log.push(format!("p={p} n={n}: {e}")),
        }
    }
    log.truncate(3);
    let mut out = Outcome::new(ok == total, format!("{ok}/{total} integral with singular codimension >= 2 ({nontrivial} needed reduction)"));
    out.log = log;
    out
}
