use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{BundleModel, NamedPlace};
use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::linalg;
use crate::poly::HomogForm;
use crate::reduce::{reduce_to_semistable, ModelState, ReduceOptions, Step};
use crate::ring::{Series, Val};
use crate::scheme::{self, SchemeHandle};

pub const DEFAULT_LIFT_DEPTH: usize = 8;
pub const DEFAULT_NODE_BUDGET: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftMethod {
    /// Newton iteration from a smooth residue point.
    Newton,
    /// Exhaustive lifting through singular residue points until a Hensel node appears.
    BranchAndLift,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LocalSolubility {
    /// A primitive solution modulo `u^depth` that lifts to a formal one.
    Soluble { germ: Vec<Series>, method: LiftMethod },
    /// No primitive solution modulo `u^closed_at`: the lifting tree is empty there.
    Insoluble { closed_at: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalReport {
    pub place: NamedPlace,
    /// Residue field of the place; germ coefficients live here.
    pub residue_field: Arc<Field>,
    pub depth: usize,
    /// Nodes of the lifting tree visited (0 for a direct Newton lift).
    pub nodes: usize,
    pub outcome: LocalSolubility,
}

impl LocalReport {
    pub fn is_soluble(&self) -> bool {
        matches!(self.outcome, LocalSolubility::Soluble { .. })
    }
}

impl Serialize for LocalReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let f = &*self.residue_field;
        let mut st = s.serialize_struct("LocalReport", 7)?;
        st.serialize_field("place", &self.place)?;
        st.serialize_field("residue_field_size", &f.size())?;
        st.serialize_field("depth", &self.depth)?;
        st.serialize_field("nodes", &self.nodes)?;
        match &self.outcome {
            LocalSolubility::Soluble { germ, method } => {
                st.serialize_field("soluble", &true)?;
                st.serialize_field("method", method)?;
                let coeffs: Vec<Vec<u32>> = germ.iter().map(|c| c.coeffs().iter().map(|&x| f.index(x)).collect()).collect();
                st.serialize_field("germ", &coeffs)?;
            }
            LocalSolubility::Insoluble { closed_at } => {
                st.serialize_field("soluble", &false)?;
                st.serialize_field("closed_at", closed_at)?;
            }
        }
        st.end()
    }
}

/// Searches for a formal section at a place: Newton lifting from a smooth residue
/// point if there is one, otherwise the exhaustive tree of primitive solutions modulo
/// `u^k`, cut short as soon as a node satisfies the Hensel condition.
///
/// The search runs on a semistable model at the place when the reduction loop finds one.
/// That model has the same generic fiber over `K((u))`, hence the same formal points, and
/// its residue points tend to be smooth. Germs are pulled back and rechecked on the
/// original equations.
pub fn local_section(model: &BundleModel, place: &NamedPlace, depth: usize, node_budget: usize) -> Result<LocalReport> {
    local_section_in(model, place, depth, node_budget, true)
}

pub(crate) fn local_section_in(model: &BundleModel, place: &NamedPlace, depth: usize, node_budget: usize, reduce: bool) -> Result<LocalReport> {
    let depth = depth.max(1);
    let (k_field, eqs) = model.local_forms(&place.place)?;
    let f = &*k_field;
    let report = |nodes, outcome| LocalReport { place: place.clone(), residue_field: k_field.clone(), depth, nodes, outcome };
    let steps = if reduce { semistable_chart(&k_field, &eqs) } else { None };
    let Some(steps) = steps.filter(|s| !s.is_empty()) else {
        let (nodes, outcome) = lift(&k_field, &eqs, depth, node_budget)?;
        return Ok(report(nodes, outcome));
    };
    let mut chart = eqs.clone();
    for s in &steps {
        chart = s.apply(&chart, f)?;
    }
    // each weighted step can cost its largest weight in precision on the way back
    let extra: usize = steps
        .iter()
        .map(|s| match s {
            Step::WeightedScale { weights, .. } => weights.iter().copied().max().unwrap_or(0).max(0) as usize,
            _ => 0,
        })
        .sum();
    let (nodes, outcome) = lift(&k_field, &chart, depth + extra, node_budget)?;
    let outcome = match outcome {
        LocalSolubility::Soluble { germ, method } => {
            let germ = pull_back(&steps, germ, depth, f)?;
            if eqs.iter().any(|e| e.eval(&germ, f).valuation().lower_bound() < depth) {
                return Err(Error::CertificateFailed("pulled-back germ does not solve the equations".into()));
            }
            LocalSolubility::Soluble { germ, method }
        }
        // a formal point of the original model is a primitive point of every integral model
        insoluble => insoluble,
    };
    Ok(report(nodes, outcome))
}

/// Ledger of a semistable model at the place, when the reduction loop reaches one
/// without a base change.
fn semistable_chart(k_field: &Arc<Field>, eqs: &[HomogForm]) -> Option<Vec<Step>> {
    let state = match eqs {
        [g] if g.degree() == 2 => ModelState::single(k_field, g.clone()).ok()?,
        [a, b] => ModelState::pencil(k_field, a.clone(), b.clone()).ok()?,
        _ => return None,
    };
    let (end, _) = reduce_to_semistable(&state, &ReduceOptions::default()).ok()?;
    let steps = end.ledger.steps;
    steps.iter().all(|s| !matches!(s, Step::BaseChange(_))).then_some(steps)
}

/// Maps a germ on the reduced model to a primitive germ modulo `u^depth` on the original.
fn pull_back(steps: &[Step], mut y: Vec<Series>, depth: usize, f: &Field) -> Result<Vec<Series>> {
    for s in steps.iter().rev() {
        y = match s {
            Step::Linear(a) => a
                .matrix
                .iter()
                .map(|row| row.iter().zip(&y).fold(Series::zero(), |acc, (c, v)| acc.add(&c.mul(v, f), f)))
                .collect(),
            Step::WeightedScale { weights, .. } => y.iter().zip(weights).map(|(v, &w)| v.t_shift(w)).collect::<Result<_>>()?,
            Step::PencilRecombine { .. } => y,
            Step::BaseChange(_) => return Err(Error::UnsupportedCase("germ across a base change".into())),
        };
    }
    let v = y
        .iter()
        .filter_map(|c| c.valuation().finite())
        .min()
        .ok_or_else(|| Error::PrecisionExhausted("pulled-back germ vanished".into()))?;
    y.iter().map(|c| Ok(c.t_shift(-(v as i64))?.truncate(depth))).collect()
}

/// The search on one integral model: returns nodes visited and the outcome.
fn lift(k_field: &Arc<Field>, eqs: &[HomogForm], depth: usize, node_budget: usize) -> Result<(usize, LocalSolubility)> {
    let f = &**k_field;
    let n = eqs[0].nvars();
    let residues: Vec<_> = eqs.iter().map(|e| e.residue()).collect();
    let handle = SchemeHandle::new(k_field, n, residues);
    let (_, pts) = scheme::points(&handle, 1, scheme::DEFAULT_COUNT_BUDGET)?;
    let partials: Vec<Vec<HomogForm>> = eqs.iter().map(|e| (0..n).map(|i| e.derivative(i, f)).collect()).collect();
    for p in &pts {
        let x: Vec<Series> = p.iter().map(|&c| Series::constant(c)).collect();
        if let Some((cols, 0)) = hensel_columns(&partials, &x, 1, f) {
            let germ = newton(eqs, &partials, x, &cols, 0, depth, f)?;
            return Ok((0, LocalSolubility::Soluble { germ, method: LiftMethod::Newton }));
        }
    }
    // every residue point is singular
    let mut level: Vec<Node> = pts
        .iter()
        .map(|p| Node { coeffs: p.iter().map(|&c| vec![c]).collect(), chart: p.iter().position(|c| !c.is_zero()).unwrap() })
        .collect();
    let mut nodes = level.len();
    for k in 1.. {
        if level.is_empty() {
            return Ok((nodes, LocalSolubility::Insoluble { closed_at: k }));
        }
        for node in &level {
            let x = node.series();
            if let Some((cols, m)) = hensel_columns(&partials, &x, k, f) {
                let germ = newton(eqs, &partials, x, &cols, m, depth.max(k), f)?;
                return Ok((nodes, LocalSolubility::Soluble { germ, method: LiftMethod::BranchAndLift }));
            }
        }
        if k >= depth {
            return Err(Error::DepthExceeded(depth));
        }
        let mut next = Vec::new();
        for node in &level {
            for child in children(node, eqs, &partials, k, f) {
                next.push(child);
                nodes += 1;
                if nodes > node_budget {
                    return Err(Error::BudgetExceeded(format!("{node_budget} lifting-tree nodes")));
                }
            }
        }
        level = next;
    }
    unreachable!()
}

/// A primitive vector modulo `u^k` with `x_chart = 1` and earlier coordinates in `u K[[u]]`.
#[derive(Clone, Debug)]
struct Node {
    coeffs: Vec<Vec<Fe>>,
    chart: usize,
}

impl Node {
    fn level(&self) -> usize {
        self.coeffs[0].len()
    }

    /// The truncation as exact polynomials.
    fn series(&self) -> Vec<Series> {
        self.coeffs.iter().map(|c| Series::exact(c.clone())).collect()
    }
}

/// Residue gradient of each equation at the residue point.
fn residue_jacobian(partials: &[Vec<HomogForm>], x: &[Series], f: &Field) -> Vec<Vec<Fe>> {
    let x0: Vec<Series> = x.iter().map(|c| Series::constant(c.residue())).collect();
    partials.iter().map(|row| row.iter().map(|d| d.eval(&x0, f).residue()).collect()).collect()
}

/// The `u^k` coefficients `y` that keep `F(x + u^k y) = 0 mod u^(k+1)`: an affine space,
/// `J y = -[F(x)]_k` with `J` the residue Jacobian.
fn children(node: &Node, eqs: &[HomogForm], partials: &[Vec<HomogForm>], k: usize, f: &Field) -> Vec<Node> {
    let n = node.coeffs.len();
    let x = node.series();
    let mut rows = residue_jacobian(partials, &x, f);
    let mut rhs: Vec<Fe> = eqs.iter().map(|e| f.neg(e.eval(&x, f).coeff(k))).collect();
    rows.push(linalg::unit(n, node.chart));
    rhs.push(Fe::ZERO);
    let Some(x0) = linalg::solve(&rows, &rhs, n, f) else { return vec![] };
    let basis = linalg::kernel(&rows, n, f);
    let q = f.size() as u64;
    let total = q.pow(basis.len() as u32);
    (0..total)
        .map(|code| {
            let mut y = x0.clone();
            let mut c = code;
            for b in &basis {
                let a = f.from_index((c % q) as u32);
                c /= q;
                for (yi, &bi) in y.iter_mut().zip(b) {
                    *yi = f.add(*yi, f.mul(a, bi));
                }
            }
            let mut child = node.clone();
            for (col, yi) in child.coeffs.iter_mut().zip(y) {
                col.push(yi);
            }
            debug_assert_eq!(child.level(), k + 1);
            child
        })
        .collect()
}

/// Columns whose Jacobian minor at `x` has least valuation `m`, provided `F(x) = 0 mod u^k`
/// is enough for Newton's lemma: `k > 2m`.
fn hensel_columns(partials: &[Vec<HomogForm>], x: &[Series], k: usize, f: &Field) -> Option<(Vec<usize>, usize)> {
    let n = x.len();
    let xs: Vec<Series> = x.iter().map(|c| c.truncate(k)).collect();
    let jac: Vec<Vec<Series>> = partials.iter().map(|row| row.iter().map(|d| d.eval(&xs, f)).collect()).collect();
    let mut best: Option<(Vec<usize>, usize)> = None;
    for cols in subsets(n, partials.len()) {
        let minor: Vec<Vec<Series>> = jac.iter().map(|row| cols.iter().map(|&c| row[c].clone()).collect()).collect();
        if let Val::Finite(m) = linalg::det_series(&minor, f).valuation() {
            if best.as_ref().is_none_or(|(_, b)| m < *b) {
                best = Some((cols, m));
            }
        }
    }
    best.filter(|(_, m)| k > 2 * m)
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    match r {
        0 => vec![vec![]],
        _ => (0..n)
            .flat_map(|last| subsets(last, r - 1).into_iter().map(move |mut s| {
                s.push(last);
                s
            }))
            .collect(),
    }
}

/// Newton iteration in the columns `cols`, whose minor has valuation `m`, until the
/// equations vanish modulo `u^depth`.
fn newton(eqs: &[HomogForm], partials: &[Vec<HomogForm>], mut x: Vec<Series>, cols: &[usize], m: usize, depth: usize, f: &Field) -> Result<Vec<Series>> {
    let prec = depth + 2 * m + 2;
    x = x.iter().map(|c| c.truncate(prec)).collect();
    for _ in 0..64 {
        let fx: Vec<Series> = eqs.iter().map(|e| e.eval(&x, f)).collect();
        if fx.iter().all(|v| v.valuation().lower_bound() >= depth) {
            let germ: Vec<Series> = x.iter().map(|c| c.truncate(depth)).collect();
            if eqs.iter().any(|e| e.eval(&germ, f).valuation().lower_bound() < depth) || germ.iter().all(|c| c.residue().is_zero()) {
                return Err(Error::CertificateFailed("lifted germ does not solve the equations".into()));
            }
            return Ok(germ);
        }
        let jac: Vec<Vec<Series>> = partials.iter().map(|row| cols.iter().map(|&c| row[c].eval(&x, f)).collect()).collect();
        let det = linalg::det_series(&jac, f);
        let delta: Vec<Series> = match jac.len() {
            1 => vec![fx[0].clone()],
            2 => vec![
                jac[1][1].mul(&fx[0], f).sub(&jac[0][1].mul(&fx[1], f), f),
                jac[0][0].mul(&fx[1], f).sub(&jac[1][0].mul(&fx[0], f), f),
            ],
            r => return Err(Error::UnsupportedCase(format!("Newton lifting with {r} equations"))),
        };
        for (&c, d) in cols.iter().zip(delta) {
            let step = divide(&d, &det, prec, f)?;
            x[c] = x[c].sub(&step, f).truncate(prec);
        }
    }
    Err(Error::PrecisionExhausted("Newton iteration did not converge".into()))
}

/// `a / d` for `d = u^m w` with `w` a unit and `u^m | a`.
fn divide(a: &Series, d: &Series, prec: usize, f: &Field) -> Result<Series> {
    let m = d.valuation().finite().ok_or_else(|| Error::PrecisionExhausted("Jacobian minor vanished".into()))?;
    let w = d.t_shift(-(m as i64))?.inverse(prec, f)?;
    if a.valuation().lower_bound() < m {
        return Err(Error::PrecisionExhausted("Newton step not divisible by the Jacobian".into()));
    }
    Ok(a.t_shift(-(m as i64))?.mul(&w, f).truncate(prec))
}
