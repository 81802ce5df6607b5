use super::{
    change_from_columns, change_from_rows, describe, good_pencil_fiber, gradient_at, weighted_move, ModelState, Step,
    MAX_IMPROVE_MOVES,
};
use crate::error::{Error, Result};
use crate::fiber::{ClassifyOptions, FiberReport};
use crate::gf::{Fe, Field};
use crate::linalg;
use crate::poly::{gram_matrix, LinearChange, Monomial};

/// Moves a semistable pencil of quadrics in `P^5` with a formal section until its
/// central fiber is geometrically integral and not a cone over a curve in `P^3`.
pub fn improve_quadric_pencil_fiber(state: &ModelState, opts: &ClassifyOptions) -> Result<ModelState> {
    if !state.is_pencil() {
        return Err(Error::Invalid("expected a pencil of quadrics".into()));
    }
    if state.field.p() == 2 {
        return Err(Error::UnsupportedCase("characteristic 2".into()));
    }
    let mut s = state.clone();
    for _ in 0..MAX_IMPROVE_MOVES {
        let r = s.classify(opts)?;
        if good_pencil_fiber(&r) {
            return Ok(s);
        }
        if s.nvars() != 6 {
            return Err(Error::CaseNotMatched(format!("{} in {} variables", describe(&r), s.nvars())));
        }
        if r.cone_over_curve {
            cone_over_curve_move(&mut s)?;
        } else if let Some((lam, mu, _)) = r.conjugate_hyperplane_member {
            conjugate_member_move(&mut s, lam, mu, &r)?;
        } else {
            return Err(Error::CaseNotMatched(describe(&r)));
        }
    }
    Err(Error::BudgetExceeded(format!("{MAX_IMPROVE_MOVES} fiber-improvement moves")))
}

fn section_point(s: &ModelState, why: &str) -> Result<Vec<Fe>> {
    s.section_point().ok_or_else(|| Error::NeedsFormalSection(why.into()))
}

/// Identity except column `col`, which becomes the section; afterwards the coordinate
/// point `e_col` lies on the generic fiber.
fn section_column(s: &mut ModelState, col: usize) -> Result<()> {
    let n = s.nvars();
    let sec = s.section.clone().expect("section carried");
    let mut a = LinearChange::identity(n);
    for (i, c) in sec.into_iter().enumerate() {
        a.matrix[i][col] = c;
    }
    s.push(Step::Linear(a))
}

/// Adds rows from `candidates` while they stay independent of `rows`.
fn extend_rows(rows: &mut Vec<Vec<Fe>>, candidates: impl IntoIterator<Item = Vec<Fe>>, upto: usize, f: &Field) {
    for c in candidates {
        if rows.len() >= upto {
            break;
        }
        let mut trial = rows.clone();
        trial.push(c);
        if linalg::rank(&trial, f) == trial.len() {
            *rows = trial;
        }
    }
}

/// Cone over a curve: the section point becomes `e_0` with tangent hyperplanes
/// `Y_1 = 0`, `Y_2 = 0` and vertex spanned by `e_4, e_5`; then `X_1, X_2, X_3 -> t Y_i`.
fn cone_over_curve_move(s: &mut ModelState) -> Result<()> {
    let field = s.field.clone();
    let f = &*field;
    let n = s.nvars();
    let p = section_point(s, "a cone over a curve needs a section through a smooth point")?;
    let res = s.residues();
    let (l1, l2) = (gradient_at(&res[0], &p, f), gradient_at(&res[1], &p, f));
    if linalg::rank(&[l1.clone(), l2.clone()], f) < 2 {
        return Err(Error::NeedsFormalSection("the section meets the fiber at a singular point".into()));
    }
    let gram: Vec<Vec<Fe>> = res.iter().flat_map(|q| gram_matrix(q, f)).collect();
    let vertex = linalg::kernel(&gram, n, f);
    if vertex.len() != 2 {
        return Err(Error::CaseNotMatched(format!("common vertex of dimension {}", vertex.len())));
    }
    let mut through: Vec<Vec<Fe>> = vec![p.clone()];
    through.extend(vertex.iter().cloned());
    // a form vanishing on the vertex with value 1 at the point
    let m = linalg::kernel(&vertex, n, f)
        .into_iter()
        .find(|m| !dot(m, &p, f).is_zero())
        .ok_or_else(|| Error::CaseNotMatched("the section meets the vertex".into()))?;
    let m: Vec<Fe> = m.iter().map(|&c| f.div(c, dot(&m, &p, f)).unwrap()).collect();
    let mut rows = vec![l1, l2];
    extend_rows(&mut rows, linalg::kernel(&through, n, f), 3, f);
    rows.insert(0, m);
    extend_rows(&mut rows, linalg::kernel(&[p.clone()], n, f), n, f);
    if rows.len() != n {
        return Err(Error::CaseNotMatched("could not build the adapted coordinates".into()));
    }
    s.push(Step::Linear(change_from_rows(&rows, f)?))?;
    section_column(s, 0)?;
    weighted_move(s, 1, &[0, 1, 1, 1, 0, 0], true)
}

fn dot(a: &[Fe], b: &[Fe], f: &Field) -> Fe {
    a.iter().zip(b).fold(Fe::ZERO, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))
}

/// Puts the member `lambda A + mu B` first.
fn member_first(s: &mut ModelState, lam: Fe, mu: Fe) -> Result<()> {
    let f = &*s.field.clone();
    if mu.is_zero() {
        return Ok(());
    }
    if !lam.is_zero() {
        let a = f.neg(f.div(mu, lam).unwrap());
        s.push(Step::PencilRecombine { a, v: 0, swapped: true })?;
    }
    s.push(Step::PencilRecombine { a: Fe::ZERO, v: 0, swapped: true })
}

/// Coefficients of `Y_2 Y_k` in a quadric, as a linear form.
fn y2_tangent(g: &crate::poly::FieldForm, n: usize) -> Vec<Fe> {
    (0..n)
        .map(|k| {
            let mut e = vec![0u8; n];
            e[2] += 1;
            e[k] += 1;
            if k == 2 {
                Fe::ZERO
            } else {
                g.coeff(&Monomial(e))
            }
        })
        .collect()
}

/// A member splitting into two conjugate hyperplanes: the member becomes `q_0(Y_0, Y_1)`,
/// the section `e_2`, and the weights `t^2` on the tangent coordinate `X_j` of the second
/// quadric, `1` on `X_2` and `t` elsewhere.
fn conjugate_member_move(s: &mut ModelState, lam: u32, mu: u32, r: &FiberReport) -> Result<()> {
    let field = s.field.clone();
    let f = &*field;
    let n = s.nvars();
    let x = section_point(s, "a conjugate hyperplane member needs a section")?;
    member_first(s, f.from_index(lam), f.from_index(mu))?;
    let q0 = &s.residues()[0];
    let ker = linalg::kernel(&gram_matrix(q0, f), n, f);
    if ker.len() != n - 2 {
        return Err(Error::CaseNotMatched(format!("member of rank {}: {}", n - ker.len(), describe(r))));
    }
    let x = s.section_point().unwrap_or(x);
    if linalg::rank(&[ker.clone(), vec![x.clone()]].concat(), f) != ker.len() {
        return Err(Error::CaseNotMatched("the section is off the double locus of the member".into()));
    }
    let mut kb = vec![x];
    extend_rows(&mut kb, ker, n - 2, f);
    let (full, _) = linalg::complete_rows(&kb, n, f);
    let mut cols = vec![full[n - 2].clone(), full[n - 1].clone()];
    cols.extend(kb);
    s.push(Step::Linear(change_from_columns(&cols)))?;
    section_column(s, 2)?;
    let lj = y2_tangent(&s.residues()[1], n);
    if lj.iter().all(|c| c.is_zero()) {
        return Err(Error::CaseNotMatched("both central quadrics are singular at the section".into()));
    }
    let prec = s.equations[0].terms().values().filter_map(|c| c.precision()).min().unwrap_or(crate::ring::DEFAULT_PRECISION);
    let li = (1..prec)
        .map(|k| y2_tangent(&s.equations[0].t_coefficient(k), n))
        .find(|l| l.iter().any(|c| !c.is_zero()))
        .ok_or_else(|| Error::PrecisionExhausted("no Y_2 term in the first equation to the known precision".into()))?;
    let in_span = |l: &[Fe]| l[3..].iter().all(|c| c.is_zero());
    let units = |idx: &[usize]| idx.iter().map(|&i| linalg::unit(n, i)).collect::<Vec<_>>();
    let (mut rows, j) = match (in_span(&li), in_span(&lj)) {
        (true, true) => {
            return Err(Error::CaseNotMatched("both tangent hyperplanes contain X_0 = X_1 = 0: not semistable".into()))
        }
        (false, true) => (vec![lj.clone()], 0),
        (true, false) => (vec![li.clone()], 3),
        (false, false) => {
            let pi = |l: &[Fe]| l[3..].to_vec();
            if linalg::rank(&[pi(&li), pi(&lj)], f) < 2 {
                return Err(Error::CaseNotMatched("tangent hyperplanes agree modulo X_0, X_1".into()));
            }
            (units(&[0, 1]), 4)
        }
    };
    extend_rows(&mut rows, units(&[0, 1]), 2, f);
    rows.push(linalg::unit(n, 2));
    match j {
        0 => rows.push(li),
        3 => rows.push(lj),
        _ => rows.extend([li, lj]),
    }
    extend_rows(&mut rows, units(&[3, 4, 5]), n, f);
    if rows.len() != n {
        return Err(Error::CaseNotMatched("could not build the adapted coordinates".into()));
    }
    s.push(Step::Linear(change_from_rows(&rows, f)?))?;
    let mut w = vec![1; n];
    w[2] = 0;
    w[j] = 2;
    weighted_move(s, 1, &w, true)
}
