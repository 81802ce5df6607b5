//! The reduction engine: destabilizing steps for single forms and pencils, the loop
//! to a model that is semistable against the search, and the explicit fiber
//! improvements for cubics and pencils of quadrics. Every change is recorded in a
//! ledger that replays exactly on the original equations.

mod cubic;
mod pencil;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fiber::{classify_cubic, classify_pencil, classify_quadric, ClassifyOptions, FiberReport};
use crate::gf::{Fe, Field};
use crate::linalg;
use crate::poly::{apply_linear, FieldForm, HomogForm, LinearChange};
use crate::ring::{Series, Val, DEFAULT_PRECISION};
use crate::scheme::{self, jacobian_scheme};
use crate::stab::{
    check_weight, invariant_valuation, mult_w, mult_w_pencil, search_destabilizer, Frac, WeightSystem,
    DEFAULT_SEARCH_BUDGET,
};

pub use cubic::improve_cubic_fiber;
pub use pencil::improve_quadric_pencil_fiber;

/// Default number of destabilizing iterations.
pub const DEFAULT_REDUCE_BUDGET: usize = 64;
/// Fiber-improvement moves tried before giving up.
pub const MAX_IMPROVE_MOVES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    SingleForm { degree: u32, nvars: usize },
    Pencil { nvars: usize },
}

/// One invertible change of the family.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// `X = A Y`.
    Linear(LinearChange),
    /// `X_i = t^{w_i} Y_i`, then equation `k` is divided by `t^{shifts[k]}`.
    WeightedScale { weights: Vec<i64>, shifts: Vec<i64> },
    /// After an optional swap, `G <- t^{-v} (G - a F)`.
    PencilRecombine { a: Fe, v: i64, swapped: bool },
    /// `t = s^e`.
    BaseChange(usize),
}

impl Step {
    pub fn apply(&self, eqs: &[HomogForm], f: &Field) -> Result<Vec<HomogForm>> {
        match self {
            Step::Linear(a) => eqs.iter().map(|e| apply_linear(e, a, f)).collect(),
            Step::WeightedScale { weights, shifts } => {
                eqs.iter().zip(shifts).map(|(e, &m)| e.weighted_scale(weights)?.t_shift(-m)).collect()
            }
            Step::PencilRecombine { a, v, swapped } => {
                let [p, q] = eqs else {
                    return Err(Error::Invalid("recombination needs a pencil".into()));
                };
                let (p, q) = if *swapped { (q, p) } else { (p, q) };
                let g = q.sub(&p.scale(&Series::constant(*a), f), f).t_shift(-v)?;
                Ok(vec![p.clone(), g])
            }
            Step::BaseChange(e) => Ok(eqs.iter().map(|g| g.base_change(*e)).collect()),
        }
    }

    /// Image of a point of the generic fiber, kept primitive.
    pub fn apply_section(&self, x: &[Series], f: &Field) -> Result<Vec<Series>> {
        match self {
            Step::Linear(a) => {
                let inv = a.inverse(section_precision(x), f)?;
                let y = inv
                    .matrix
                    .iter()
                    .map(|row| row.iter().zip(x).fold(Series::zero(), |acc, (c, xi)| acc.add(&c.mul(xi, f), f)))
                    .collect();
                Ok(y)
            }
            Step::WeightedScale { weights, .. } => {
                let top = weights.iter().copied().max().unwrap_or(0);
                let y = x.iter().zip(weights).map(|(c, &w)| c.t_shift(top - w)).collect::<Result<Vec<_>>>()?;
                primitive(y)
            }
            Step::PencilRecombine { .. } => Ok(x.to_vec()),
            Step::BaseChange(e) => Ok(x.iter().map(|c| c.base_change(*e)).collect()),
        }
    }

    pub fn record(&self, f: &Field) -> StepRecord {
        let mut r = StepRecord::default();
        match self {
            Step::Linear(a) => {
                r.kind = "linear";
                r.matrix = Some(
                    a.matrix.iter().map(|row| row.iter().map(|c| c.coeffs().iter().map(|&x| f.index(x)).collect()).collect()).collect(),
                );
            }
            Step::WeightedScale { weights, shifts } => {
                r.kind = "weighted-scale";
                r.weights = Some(weights.clone());
                r.shifts = Some(shifts.clone());
            }
            Step::PencilRecombine { a, v, swapped } => {
                r.kind = "pencil-recombine";
                r.a = Some(f.index(*a));
                r.v = Some(*v);
                r.swapped = Some(*swapped);
            }
            Step::BaseChange(e) => {
                r.kind = "base-change";
                r.e = Some(*e);
            }
        }
        r
    }
}

/// Serializable form of a [`Step`]; field elements as indices.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StepRecord {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Vec<u32>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swapped: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChangeLedger {
    pub steps: Vec<Step>,
}

impl ChangeLedger {
    /// Runs every step on `eqs` in order.
    pub fn replay(&self, eqs: &[HomogForm], f: &Field) -> Result<Vec<HomogForm>> {
        let mut cur = eqs.to_vec();
        for s in &self.steps {
            cur = s.apply(&cur, f)?;
        }
        Ok(cur)
    }

    pub fn records(&self, f: &Field) -> Vec<StepRecord> {
        self.steps.iter().map(|s| s.record(f)).collect()
    }
}

fn section_precision(x: &[Series]) -> usize {
    x.iter().filter_map(|c| c.precision()).min().unwrap_or(DEFAULT_PRECISION)
}

/// Divides a vector by the largest power of `t` dividing every entry.
fn primitive(x: Vec<Series>) -> Result<Vec<Series>> {
    let finite = x.iter().filter_map(|c| c.valuation().finite()).min();
    let floor = x.iter().filter_map(|c| match c.valuation() {
        Val::AtLeast(v) => Some(v),
        _ => None,
    });
    let v = match finite {
        Some(v) => v,
        None => return Err(Error::PrecisionExhausted("section vanishes to the known precision".into())),
    };
    if floor.min().is_some_and(|fl| fl < v) {
        return Err(Error::PrecisionExhausted("content of the section is not determined".into()));
    }
    x.iter().map(|c| c.t_shift(-(v as i64))).collect()
}

/// A family over `S = F_q[[s]]` with `t = s^e`, and how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub kind: ModelKind,
    pub field: Arc<Field>,
    /// The equations the ledger starts from.
    pub original: Vec<HomogForm>,
    pub equations: Vec<HomogForm>,
    /// Cumulative ramification `e`.
    pub ramification: usize,
    pub ledger: ChangeLedger,
    /// A formal section, carried through every step.
    pub section: Option<Vec<Series>>,
}

impl ModelState {
    pub fn single(field: &Arc<Field>, form: HomogForm) -> Result<ModelState> {
        if form.is_zero() {
            return Err(Error::Invalid("the zero form".into()));
        }
        let kind = ModelKind::SingleForm { degree: form.degree(), nvars: form.nvars() };
        Ok(ModelState::from_parts(kind, field, vec![form]))
    }

    pub fn pencil(field: &Arc<Field>, a: HomogForm, b: HomogForm) -> Result<ModelState> {
        if a.degree() != 2 || b.degree() != 2 || a.nvars() != b.nvars() {
            return Err(Error::Invalid("a pencil needs two quadrics in the same variables".into()));
        }
        if a.residue().is_zero() && b.residue().is_zero() {
            return Err(Error::Invalid("both residue forms vanish".into()));
        }
        Ok(ModelState::from_parts(ModelKind::Pencil { nvars: a.nvars() }, field, vec![a, b]))
    }

    fn from_parts(kind: ModelKind, field: &Arc<Field>, eqs: Vec<HomogForm>) -> ModelState {
        ModelState {
            kind,
            field: field.clone(),
            original: eqs.clone(),
            equations: eqs,
            ramification: 1,
            ledger: ChangeLedger::default(),
            section: None,
        }
    }

    /// Attaches a formal section after checking it to its precision.
    pub fn with_section(mut self, x: Vec<Series>) -> Result<ModelState> {
        let f = &*self.field;
        if x.len() != self.nvars() || x.iter().all(|c| c.residue().is_zero()) {
            return Err(Error::Invalid("a section needs a nonzero residue point of the right length".into()));
        }
        if !self.equations.iter().all(|e| e.eval(&x, f).is_zero_to_precision()) {
            return Err(Error::Invalid("the equations do not vanish on the section".into()));
        }
        self.section = Some(x);
        Ok(self)
    }

    pub fn nvars(&self) -> usize {
        self.equations[0].nvars()
    }

    pub fn is_pencil(&self) -> bool {
        matches!(self.kind, ModelKind::Pencil { .. })
    }

    pub fn residues(&self) -> Vec<FieldForm> {
        self.equations.iter().map(|e| e.residue()).collect()
    }

    /// The section's residue point, when a section is attached.
    pub fn section_point(&self) -> Option<Vec<Fe>> {
        self.section.as_ref().map(|x| x.iter().map(|c| c.residue()).collect())
    }

    /// Applies a step to equations and section and records it.
    pub fn push(&mut self, step: Step) -> Result<()> {
        let f = &*self.field;
        let eqs = step.apply(&self.equations, f)?;
        let section = match &self.section {
            Some(x) => Some(step.apply_section(x, f)?),
            None => None,
        };
        if let Step::BaseChange(e) = step {
            self.ramification *= e;
        }
        self.equations = eqs;
        self.section = section;
        self.ledger.steps.push(step);
        Ok(())
    }

    /// Replaying the ledger on the original equations gives the current ones.
    pub fn replay_matches(&self) -> Result<bool> {
        Ok(self.ledger.replay(&self.original, &self.field)? == self.equations)
    }

    /// Valuation of the classical invariant, when there is one for this family.
    pub fn invariant(&self) -> Option<Val> {
        invariant_valuation(&self.equations, &self.field).ok()
    }

    /// The central fiber classified by [`crate::fiber`].
    pub fn classify(&self, opts: &ClassifyOptions) -> Result<FiberReport> {
        let r = self.residues();
        match r.as_slice() {
            [a, b] => classify_pencil(a, b, &self.field, opts),
            [g] if g.degree() == 2 => classify_quadric(g, &self.field),
            [g] if g.degree() == 3 => classify_cubic(g, &self.field, opts),
            _ => Err(Error::UnsupportedCase("no classifier for this family".into())),
        }
    }
}

/// How smoothness of the generic fiber was established.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenericFiberCheck {
    pub method: String,
}

/// Certifies the generic fiber: exactly through the invariant when there is one,
/// otherwise by specializing `t` to field values and finding no singular point over
/// `F_{q^k}`, `k <= 3`.
pub fn check_generic_fiber(state: &ModelState) -> Result<GenericFiberCheck> {
    if let Some(v) = state.invariant() {
        return match v {
            Val::Infinite => Err(Error::GitUnstable),
            v => Ok(GenericFiberCheck { method: format!("invariant valuation {v}") }),
        };
    }
    let field = &state.field;
    let mut tried = 0;
    for k in 1..=3u32 {
        let (ext, emb) = scheme::extension(field, k)?;
        for c in ext.elements().filter(|c| !c.is_zero()).take(3) {
            let spec: Vec<FieldForm> = state.equations.iter().map(|e| specialize(e, c, &ext, &emb)).collect();
            let sing = jacobian_scheme(&ext, &spec);
            if scheme::lines_needed(&sing, 1) > scheme::DEFAULT_COUNT_BUDGET {
                continue;
            }
            tried += 1;
            if scheme::count_points(&sing, 1, scheme::DEFAULT_COUNT_BUDGET)? == 0 {
                return Ok(GenericFiberCheck {
                    method: format!("t = element {} of F_{}: no singular point over that field", ext.index(c), ext.size()),
                });
            }
        }
    }
    if tried == 0 {
        return Err(Error::InconclusiveDimension("no specialization fits the counting budget".into()));
    }
    Err(Error::Invalid(format!("generic fiber looks singular: {tried} specializations all have singular points")))
}

/// The truncated equation at `t = c`.
fn specialize(e: &HomogForm, c: Fe, ext: &Field, emb: &crate::gf::Embedding) -> FieldForm {
    let terms = e.terms().iter().map(|(m, s)| {
        let v = s.coeffs().iter().rev().fold(Fe::ZERO, |acc, &a| ext.add(ext.mul(acc, c), emb.apply(a)));
        (m.clone(), v)
    });
    FieldForm::from_terms(e.nvars(), e.degree(), terms, ext).expect("same monomials")
}

/// `t^{-mult_W} F(A (W . X))` for each equation, followed for pencils by the
/// recombinations that make the residues independent.
pub fn destabilize_step(state: &ModelState, change: &LinearChange, w: &WeightSystem) -> Result<ModelState> {
    let f = &*state.field;
    let moved = state.equations.iter().map(|e| apply_linear(e, change, f)).collect::<Result<Vec<_>>>()?;
    let c = check_weight(&moved, w, f)?;
    if c.pass {
        return Err(Error::NotDestabilizing { mult: c.mult.to_string(), threshold: c.threshold.to_string() });
    }
    let mut s = state.clone();
    if !change.is_identity() {
        s.push(Step::Linear(change.clone()))?;
    }
    let shifts = s.equations.iter().map(|e| mult_w(e, w)).collect::<Result<Vec<_>>>()?;
    s.push(Step::WeightedScale { weights: w.weights().to_vec(), shifts })?;
    if s.is_pencil() {
        recombine(&mut s)?;
    }
    Ok(s)
}

/// `c` with `g = c r`, if any.
pub(crate) fn ratio(g: &FieldForm, r: &FieldForm, f: &Field) -> Option<Fe> {
    let (m, &rc) = r.terms().iter().next()?;
    let c = f.div(g.coeff(m), rc)?;
    (g.sub(&r.scale(&c, f), f)).is_zero().then_some(c)
}

/// While the residues are proportional, `G <- t^{-v}(G - a F)`, swapping first so the
/// recombined equation is the one with the smaller lift order.
fn recombine(s: &mut ModelState) -> Result<()> {
    let field = s.field.clone();
    let f = &*field;
    for _ in 0..4 * DEFAULT_PRECISION {
        let n = s.nvars();
        let (a, b) = (&s.equations[0], &s.equations[1]);
        if mult_w_pencil(a, b, &WeightSystem::zero(n), f)? == 0 {
            return Ok(());
        }
        let (ra, rb) = (a.residue(), b.residue());
        if ra.is_zero() || rb.is_zero() {
            return Err(Error::Invalid("a residue vanishes after normalization".into()));
        }
        let c = ratio(&rb, &ra, f).ok_or_else(|| Error::CertificateFailed("proportional residues without a ratio".into()))?;
        let (u, v) = (lift_order(a, &ra, f), lift_order(b, &ra, f));
        let swapped = u < v;
        let coef = if swapped { f.inv(c).unwrap() } else { c };
        let (p, q) = if swapped { (b, a) } else { (a, b) };
        let h = q.sub(&p.scale(&Series::constant(coef), f), f);
        let val = match h.content_valuation() {
            Val::Finite(v) => v as i64,
            Val::Infinite => return Err(Error::Invalid("the pencil is degenerate: equations proportional".into())),
            Val::AtLeast(_) => return Err(Error::PrecisionExhausted("recombined equation vanishes to precision".into())),
        };
        s.push(Step::PencilRecombine { a: coef, v: val, swapped })?;
    }
    Err(Error::BudgetExceeded("pencil recombination did not separate the residues".into()))
}

/// Least `k >= 1` whose `t^k` coefficient is not a multiple of `r`.
fn lift_order(e: &HomogForm, r: &FieldForm, f: &Field) -> usize {
    let prec = e.terms().values().filter_map(|c| c.precision()).min();
    let top = e.terms().values().filter_map(|c| c.degree()).max().unwrap_or(0);
    let end = prec.unwrap_or(top + 1);
    (1..end).find(|&k| ratio(&e.t_coefficient(k), r, f).is_none()).unwrap_or(usize::MAX)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReduceOptions {
    /// Destabilizing iterations allowed.
    pub budget: usize,
    /// Checks per destabilizer search.
    pub search_budget: u64,
    /// Classify the central fiber before and after each step (costly for cubics).
    pub classify: bool,
    pub classify_options: ClassifyOptions,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            budget: DEFAULT_REDUCE_BUDGET,
            search_budget: DEFAULT_SEARCH_BUDGET,
            classify: false,
            classify_options: ClassifyOptions::default(),
        }
    }
}

/// One destabilizing iteration of [`reduce_to_semistable`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub weights: Vec<i64>,
    /// Residue of the coordinate change, as indices.
    pub change: Vec<Vec<u32>>,
    pub mult: i64,
    pub threshold: Frac,
    pub valuation_before: Option<Val>,
    pub valuation_after: Option<Val>,
    pub steps: Vec<StepRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fiber_before: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fiber_after: Option<String>,
}

fn fiber_kind(s: &ModelState, opts: &ReduceOptions) -> Option<String> {
    if !opts.classify {
        return None;
    }
    Some(match s.classify(&opts.classify_options) {
        Ok(r) => describe(&r),
        Err(e) => format!("unclassified: {e}"),
    })
}

/// A one-line summary of a fiber report.
pub fn describe(r: &FiberReport) -> String {
    let mut parts = vec![r.kind.clone()];
    parts.push(if r.geometrically_integral { "geometrically integral".into() } else { "not geometrically integral".into() });
    parts.push(format!("singular dim {}", r.singular_dim));
    if r.cone_over_plane_curve {
        parts.push("cone over a plane curve".into());
    }
    if r.cone_over_curve {
        parts.push("cone over a curve".into());
    }
    if r.normal == Some(false) {
        parts.push("non-normal".into());
    }
    parts.join(", ")
}

/// Search and destabilize until the search finds nothing.
///
/// With an invariant, each step must lower its valuation, which also bounds the
/// number of steps; a step that fails to do so is reported as a certificate failure.
pub fn reduce_to_semistable(state: &ModelState, opts: &ReduceOptions) -> Result<(ModelState, Vec<TraceStep>)> {
    check_generic_fiber(state)?;
    let f = &*state.field;
    let mut cur = state.clone();
    let mut trace = Vec::new();
    loop {
        let before = cur.invariant();
        if before == Some(Val::Infinite) {
            return Err(Error::GitUnstable);
        }
        let verdict = search_destabilizer(&cur.equations, &cur.field, opts.search_budget)?;
        let Some(w) = verdict.witness else {
            return Ok((cur, trace));
        };
        if trace.len() >= opts.budget {
            return Err(Error::BudgetExceeded(format!("{} destabilizing steps", opts.budget)));
        }
        let fiber_before = fiber_kind(&cur, opts);
        let next = destabilize_step(&cur, &w.change, &w.weights)?;
        let after = next.invariant();
        if let (Some(Val::Finite(b)), Some(a)) = (before, after) {
            if a.lower_bound() >= b {
                return Err(Error::CertificateFailed(format!("invariant valuation went from {b} to {a}")));
            }
        }
        let records = next.ledger.steps[cur.ledger.steps.len()..].iter().map(|s| s.record(f)).collect();
        trace.push(TraceStep {
            weights: w.weights.weights().to_vec(),
            change: w.change.residue().iter().map(|r| r.iter().map(|&c| f.index(c)).collect()).collect(),
            mult: w.mult,
            threshold: w.threshold,
            valuation_before: before,
            valuation_after: after,
            steps: records,
            fiber_before,
            fiber_after: fiber_kind(&next, opts),
        });
        cur = next;
    }
}

/// `X = A Y` with `A` the inverse of `rows` (so `Y_i = rows[i] . X`).
pub(crate) fn change_from_rows(rows: &[Vec<Fe>], f: &Field) -> Result<LinearChange> {
    let inv = linalg::inverse(rows, f).ok_or_else(|| Error::Invalid("coordinate rows are dependent".into()))?;
    Ok(LinearChange::from_field(&inv))
}

/// Base change `t = s^e` (skipped for `e = 1`), then `X_i = s^{w_i} Y_i` with each
/// equation divided by its multiplicity. For pencils, with `boundary`, the sum of the
/// two multiplicities must equal the threshold exactly.
pub(crate) fn weighted_move(s: &mut ModelState, e: usize, w: &[i64], boundary: bool) -> Result<()> {
    if e > 1 {
        s.push(Step::BaseChange(e))?;
    }
    let ws = WeightSystem::new(w.to_vec());
    let shifts = s.equations.iter().map(|g| mult_w(g, &ws)).collect::<Result<Vec<_>>>()?;
    if boundary && s.is_pencil() {
        let d = s.equations[0].degree() as i64;
        let th = Frac::new(2 * d * ws.sum(), s.nvars() as i64);
        let total: i64 = shifts.iter().sum();
        if th.cmp_int(total) != std::cmp::Ordering::Equal {
            return Err(Error::CaseNotMatched(format!(
                "weights {w:?}: multiplicities {shifts:?} do not sum to the threshold {th}"
            )));
        }
    }
    s.push(Step::WeightedScale { weights: ws.weights().to_vec(), shifts })
}

/// The classifier's verdict that a fiber needs no further improvement.
pub(crate) fn good_cubic_fiber(r: &FiberReport) -> bool {
    r.geometrically_integral && r.normal == Some(true) && !r.cone_over_plane_curve
}

pub(crate) fn good_pencil_fiber(r: &FiberReport) -> bool {
    r.geometrically_integral && !r.cone_over_curve
}

/// `X = P Y` with `P` given by its columns.
pub(crate) fn change_from_columns(cols: &[Vec<Fe>]) -> LinearChange {
    LinearChange::from_field(&linalg::transpose(cols))
}

/// The identity with `block` (columns of size `block.len()`) placed at `offset`.
pub(crate) fn block_columns(n: usize, offset: usize, block: &[Vec<Fe>]) -> Vec<Vec<Fe>> {
    let mut cols: Vec<Vec<Fe>> = (0..n).map(|i| linalg::unit(n, i)).collect();
    for (j, c) in block.iter().enumerate() {
        let mut full = vec![Fe::ZERO; n];
        full[offset..offset + c.len()].copy_from_slice(c);
        cols[offset + j] = full;
    }
    cols
}

/// Columns `p, v, k_1, ...` with `l(p) = 0`, `l(v) = 1` and `k_i` completing `p` to a
/// basis of `l = 0`, so that `l` becomes the second coordinate.
pub(crate) fn tangent_frame(p: &[Fe], l: &[Fe], f: &Field) -> Result<Vec<Vec<Fe>>> {
    let m = p.len();
    let i = l.iter().position(|c| !c.is_zero()).ok_or_else(|| Error::Invalid("zero tangent form".into()))?;
    let mut v = vec![Fe::ZERO; m];
    v[i] = f.inv(l[i]).unwrap();
    let ker = linalg::kernel(&[l.to_vec()], m, f);
    let mut basis = vec![p.to_vec()];
    for k in ker {
        let mut trial = basis.clone();
        trial.push(k);
        if linalg::rank(&trial, f) == trial.len() {
            basis = trial;
        }
    }
    if basis.len() != m - 1 {
        return Err(Error::Invalid("the point is not on the tangent hyperplane".into()));
    }
    let mut cols = vec![basis[0].clone(), v];
    cols.extend(basis.into_iter().skip(1));
    Ok(cols)
}

/// The gradient of a form at a point, as a linear form.
pub(crate) fn gradient_at(g: &FieldForm, x: &[Fe], f: &Field) -> Vec<Fe> {
    (0..g.nvars()).map(|i| g.derivative(i, f).eval_point(x, f)).collect()
}
