use super::{
    block_columns, change_from_columns, change_from_rows, describe, good_cubic_fiber, gradient_at, tangent_frame,
    weighted_move, ModelKind, ModelState, Step, MAX_IMPROVE_MOVES,
};
use crate::error::{Error, Result};
use crate::fiber::{truncate_vars, vertex_last_columns, vertex_space, ClassifyOptions, FiberReport};
use crate::gf::{Fe, Field};
use crate::linalg;
use crate::poly::{FieldForm, Monomial};
use crate::witness::{smooth_point_on_cubic, CubicPoint, NormalFormTag};

/// Moves a semistable cubic family until its central fiber is normal and not a cone
/// over a plane cubic, following the case analysis for cones over plane cubics
/// irreducible over `F_q` and for non-normal fibers in `P^5`.
pub fn improve_cubic_fiber(state: &ModelState, opts: &ClassifyOptions) -> Result<ModelState> {
    if !matches!(state.kind, ModelKind::SingleForm { degree: 3, .. }) {
        return Err(Error::Invalid("expected a cubic family".into()));
    }
    if state.field.p() < 5 {
        return Err(Error::UnsupportedCase("characteristic 2 or 3".into()));
    }
    let mut s = state.clone();
    for _ in 0..MAX_IMPROVE_MOVES {
        let r = s.classify(opts)?;
        if good_cubic_fiber(&r) {
            return Ok(s);
        }
        if cone_case(&s, &r) {
            cone_move(&mut s)?;
        } else if r.geometrically_integral && r.normal == Some(false) {
            nonnormal_move(&mut s, &r, opts)?;
        } else {
            return Err(Error::CaseNotMatched(describe(&r)));
        }
    }
    Err(Error::BudgetExceeded(format!("{MAX_IMPROVE_MOVES} fiber-improvement moves")))
}

/// A cone over a plane cubic (or three points of a line) irreducible over `F_q`.
fn cone_case(s: &ModelState, r: &FiberReport) -> bool {
    let g = &s.residues()[0];
    let essential = g.nvars() - vertex_space(g, &s.field).len();
    r.irreducible_over_base && (essential == 2 || essential == 3) && s.nvars() >= essential + 3
}

/// Terms of `g` only in the variables from `r` on, as a form in those variables.
fn tail_part(g: &FieldForm, r: usize, f: &Field) -> FieldForm {
    let m = g.nvars() - r;
    let terms =
        g.terms().iter().filter(|(mo, _)| mo.0[..r].iter().all(|&e| e == 0)).map(|(mo, &c)| (Monomial(mo.0[r..].to_vec()), c));
    FieldForm::from_terms(m, g.degree(), terms, f).unwrap()
}

fn smooth_point(g: &FieldForm, s: &ModelState) -> Result<Option<Vec<Fe>>> {
    if g.is_zero() {
        return Ok(None);
    }
    Ok(match smooth_point_on_cubic(g, &s.field)? {
        CubicPoint::Point(w) if w.smooth => Some(w.point.coords),
        _ => None,
    })
}

fn cone_move(s: &mut ModelState) -> Result<()> {
    let field = s.field.clone();
    let f = &*field;
    let n = s.nvars();
    let vert = vertex_space(&s.residues()[0], f);
    s.push(Step::Linear(change_from_columns(&vertex_last_columns(&vert, n, f))))?;
    let r = n - vert.len();
    let base = truncate_vars(&s.residues()[0], r, f);
    let g = tail_part(&s.equations[0].t_coefficient(1), r, f);
    // G has a smooth rational point: t = s^2, all variables scaled but the point's
    if let Some(p) = smooth_point(&g, s)? {
        let frame = tangent_frame(&p, &gradient_at(&g, &p, f), f)?;
        s.push(Step::Linear(change_from_columns(&block_columns(n, r, &frame))))?;
        let mut w = vec![1; n];
        w[r] = 0;
        return weighted_move(s, 2, &w, false);
    }
    let tag = if g.is_zero() {
        None
    } else {
        match smooth_point_on_cubic(&g, &field)? {
            CubicPoint::Tag(t) => Some(t),
            CubicPoint::Point(_) => None,
        }
    };
    if r == 3 {
        if let Some(p) = smooth_point(&base, s)? {
            let frame = tangent_frame(&p, &gradient_at(&base, &p, f), f)?;
            s.push(Step::Linear(change_from_columns(&block_columns(n, 0, &frame))))?;
            return match tag {
                Some(NormalFormTag::ThreeConjugateHyperplanes) => {
                    // t = s^4, X_0 = s^2 Y_0, X_1 = s^3 Y_1, X_2 = s^3 Y_2, the rest s Y_i
                    let mut w = vec![1; n];
                    w[..3].copy_from_slice(&[2, 3, 3]);
                    weighted_move(s, 4, &w, false)
                }
                Some(NormalFormTag::TripleHyperplane) if n == 6 => triple_hyperplane_move(s, &g),
                _ => Err(Error::CaseNotMatched(format!("vertex part of the t-coefficient: {g:?}"))),
            };
        }
    }
    section_move(s, r)
}

/// `G = c L^3` on the vertex: `L` becomes `X_3`; then the `t = s^2` move if some
/// `X_i X_j^2` (`i <= 2`, `j >= 4`) occurs at order `t`, else the unramified one.
fn triple_hyperplane_move(s: &mut ModelState, g: &FieldForm) -> Result<()> {
    let f = &*s.field.clone();
    let n = s.nvars();
    let vert = vertex_space(g, f);
    let l = linalg::kernel(&vert, 3, f);
    if l.len() != 1 {
        return Err(Error::CaseNotMatched("vertex part is not a cube of a linear form".into()));
    }
    let frame = tangent_frame_free(&l[0], f);
    s.push(Step::Linear(change_from_columns(&block_columns(n, 3, &frame))))?;
    let m = s.equations[0].t_coefficient(1);
    let mixed = m.terms().keys().any(|mo| mo.0[..3].iter().sum::<u8>() == 1 && (mo.0[4] == 2 || mo.0[5] == 2));
    weighted_move(s, if mixed { 2 } else { 1 }, &[1, 1, 1, 1, 0, 0], false)
}

/// Columns `v, k_1, ...` with `l(v) = 1` and `k_i` a basis of `l = 0`.
fn tangent_frame_free(l: &[Fe], f: &Field) -> Vec<Vec<Fe>> {
    let m = l.len();
    let i = l.iter().position(|c| !c.is_zero()).unwrap();
    let mut v = vec![Fe::ZERO; m];
    v[i] = f.inv(l[i]).unwrap();
    let mut cols = vec![v];
    cols.extend(linalg::kernel(&[l.to_vec()], m, f));
    cols
}

/// Neither part has a smooth rational point: the section meets the vertex; it becomes
/// the last coordinate point exactly, the term `t L X_n^2` gives `L = X_0`.
fn section_move(s: &mut ModelState, r: usize) -> Result<()> {
    let field = s.field.clone();
    let f = &*field;
    let n = s.nvars();
    let x0 = s.section_point().ok_or_else(|| Error::NeedsFormalSection("neither F nor G has a smooth rational point".into()))?;
    if x0[..r].iter().any(|c| !c.is_zero()) {
        return Err(Error::CaseNotMatched("the section does not meet the vertex".into()));
    }
    let (cols, _) = linalg::complete_columns(&[x0[r..].to_vec()], n - r, f);
    let mut block = linalg::transpose(&cols);
    block.rotate_left(1);
    s.push(Step::Linear(change_from_columns(&block_columns(n, r, &block))))?;
    let sec = s.section.clone().expect("section carried");
    let mut a = crate::poly::LinearChange::identity(n);
    for (i, c) in sec.iter().enumerate() {
        a.matrix[i][n - 1] = c.clone();
    }
    s.push(Step::Linear(a))?;
    let t1 = s.equations[0].t_coefficient(1);
    let l: Vec<Fe> = (0..r)
        .map(|i| {
            let mut e = vec![0u8; n];
            e[i] = 1;
            e[n - 1] = 2;
            t1.coeff(&Monomial(e))
        })
        .collect();
    if l.iter().all(|c| c.is_zero()) {
        return Err(Error::CaseNotMatched("no term t L X_n^2 although a section meets the vertex".into()));
    }
    let (rows, _) = linalg::complete_rows(&[l], r, f);
    let inv = linalg::inverse(&rows, f).unwrap();
    let block = linalg::transpose(&inv);
    s.push(Step::Linear(change_from_columns(&block_columns(n, 0, &block))))?;
    if r == 3 {
        let mut w = vec![1; n];
        w[n - 1] = 0;
        weighted_move(s, 2, &w, false)
    } else {
        let mut w = vec![0; n];
        w[..2].copy_from_slice(&[1, 1]);
        weighted_move(s, 1, &w, false)
    }
}

/// `X_0 = t Y_0, X_1 = t Y_1` along the singular `P^3`; a second such move on the new
/// fiber, replaced by `t = s^2` when the fiber stays non-normal.
fn nonnormal_move(s: &mut ModelState, r: &FiberReport, opts: &ClassifyOptions) -> Result<()> {
    if s.nvars() != 6 {
        return Err(Error::CaseNotMatched(format!("non-normal fiber in {} variables", s.nvars())));
    }
    let s1 = along_component(s, r, 1)?;
    let r1 = s1.classify(opts)?;
    if good_cubic_fiber(&r1) || cone_case(&s1, &r1) {
        *s = s1;
        return Ok(());
    }
    if !(r1.geometrically_integral && r1.normal == Some(false)) {
        return Err(Error::CaseNotMatched(format!("after the first move: {}", describe(&r1))));
    }
    let s2 = along_component(&s1, &r1, 1)?;
    let r2 = s2.classify(opts)?;
    if good_cubic_fiber(&r2) || cone_case(&s2, &r2) {
        *s = s2;
        return Ok(());
    }
    *s = along_component(&s1, &r1, 2)?;
    Ok(())
}

fn along_component(s: &ModelState, r: &FiberReport, e: usize) -> Result<ModelState> {
    let f = &*s.field;
    let comp = r
        .nonnormal_linear_component
        .as_ref()
        .ok_or_else(|| Error::CaseNotMatched("non-normal fiber without a linear singular component".into()))?;
    let forms: Vec<Vec<Fe>> = comp.iter().map(|l| l.iter().map(|&i| f.from_index(i)).collect()).collect();
    if forms.len() != 2 {
        return Err(Error::CaseNotMatched(format!("singular component of codimension {}", forms.len())));
    }
    let (rows, _) = linalg::complete_rows(&forms, s.nvars(), f);
    let mut out = s.clone();
    out.push(Step::Linear(change_from_rows(&rows, f)?))?;
    weighted_move(&mut out, e, &[1, 1, 0, 0, 0, 0], false)?;
    Ok(out)
}
