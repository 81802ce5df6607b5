//! Weight systems, multiplicities, semistability checks and destabilizer search.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::linalg;
use crate::poly::{apply_linear, gram_matrix, pencil_wedge, HomogForm, LinearChange};
use crate::ring::Val;
use crate::scheme::{self, jacobian_scheme};

pub use crate::invariant::invariant_valuation;

/// `(w_0, ..., w_n)` with minimum entry 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct WeightSystem(Vec<i64>);

impl WeightSystem {
    /// Normalizes by subtracting the minimum entry.
    pub fn new(mut w: Vec<i64>) -> WeightSystem {
        let m = w.iter().copied().min().unwrap_or(0);
        for x in w.iter_mut() {
            *x -= m;
        }
        WeightSystem(w)
    }

    pub fn zero(n: usize) -> WeightSystem {
        WeightSystem(vec![0; n])
    }

    pub fn weights(&self) -> &[i64] {
        &self.0
    }

    pub fn sum(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A nonnegative rational number `num/den` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Frac {
    pub num: i64,
    pub den: i64,
}

impl Frac {
    pub fn new(num: i64, den: i64) -> Frac {
        assert!(den > 0);
        let g = gcd(num.unsigned_abs(), den as u64).max(1) as i64;
        Frac { num: num / g, den: den / g }
    }

    pub fn int(n: i64) -> Frac {
        Frac { num: n, den: 1 }
    }

    /// Compares `n` with `self` exactly.
    pub fn cmp_int(&self, n: i64) -> Ordering {
        (n as i128 * self.den as i128).cmp(&(self.num as i128))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for Frac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Frac {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Minimum of `val + shift` over entries, certified against precision limits.
fn certified_min(entries: impl Iterator<Item = (Val, i64)>) -> Result<i64> {
    let mut best: Option<i64> = None;
    let mut floor: Option<i64> = None;
    for (v, shift) in entries {
        match v {
            Val::Finite(x) => best = Some(best.map_or(x as i64 + shift, |b| b.min(x as i64 + shift))),
            Val::AtLeast(x) => floor = Some(floor.map_or(x as i64 + shift, |b| b.min(x as i64 + shift))),
            Val::Infinite => {}
        }
    }
    match (best, floor) {
        (Some(b), None) => Ok(b),
        (Some(b), Some(fl)) if b <= fl => Ok(b),
        (_, Some(fl)) => Err(Error::PrecisionExhausted(format!("minimum only known to be at least {fl}"))),
        (None, None) => Err(Error::Invalid("multiplicity of the zero form".into())),
    }
}

/// `mult_W F`: least exponent of `t` in `F(W . X)`.
pub fn mult_w(form: &HomogForm, w: &WeightSystem) -> Result<i64> {
    let w = w.weights();
    certified_min(form.terms().iter().map(|(m, c)| (c.valuation(), m.weight(w))))
}

/// `mult_W (F, G)` from the Plücker coefficients of the pencil.
pub fn mult_w_pencil(a: &HomogForm, b: &HomogForm, w: &WeightSystem, f: &Field) -> Result<i64> {
    let wv = w.weights();
    let wedge = pencil_wedge(a, b, f);
    certified_min(wedge.iter().map(|((i, j), c)| (c.valuation(), i.weight(wv) + j.weight(wv))))
}

/// Result of comparing a multiplicity with its threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightCheck {
    pub mult: i64,
    pub threshold: Frac,
    /// `mult <= threshold`.
    pub pass: bool,
}

/// Single form: threshold `d sum(w) / (n+1)`. Pencil: `2 d sum(w) / (n+1)`.
pub fn check_weight(eqs: &[HomogForm], w: &WeightSystem, f: &Field) -> Result<WeightCheck> {
    let n1 = eqs[0].nvars() as i64;
    let d = eqs[0].degree() as i64;
    let (mult, threshold) = match eqs {
        [a] => (mult_w(a, w)?, Frac::new(d * w.sum(), n1)),
        [a, b] => (mult_w_pencil(a, b, w, f)?, Frac::new(2 * d * w.sum(), n1)),
        _ => return Err(Error::Invalid("expected one form or a pencil".into())),
    };
    let pass = threshold.cmp_int(mult) != Ordering::Greater;
    Ok(WeightCheck { mult, threshold, pass })
}

/// A destabilizing coordinate change and weight system.
#[derive(Clone, Debug, PartialEq)]
pub struct Destabilizer {
    pub change: LinearChange,
    pub weights: WeightSystem,
    pub mult: i64,
    pub threshold: Frac,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    SemistableAgainstSearch,
    Destabilized,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityVerdict {
    pub status: Status,
    pub witness: Option<Destabilizer>,
    /// What was tried; semistability is only relative to this.
    pub searched: String,
}

impl StabilityVerdict {
    /// A destabilized verdict, re-checking the witness exactly.
    pub fn destabilized(eqs: &[HomogForm], d: Destabilizer, searched: String, f: &Field) -> Result<StabilityVerdict> {
        let moved = eqs.iter().map(|e| apply_linear(e, &d.change, f)).collect::<Result<Vec<_>>>()?;
        let c = check_weight(&moved, &d.weights, f)?;
        if c.pass || c.mult != d.mult || c.threshold != d.threshold {
            return Err(Error::CertificateFailed("destabilizing witness does not recheck".into()));
        }
        Ok(StabilityVerdict { status: Status::Destabilized, witness: Some(d), searched })
    }
}

/// Default number of (coordinate change, weight) pairs tried.
pub const DEFAULT_SEARCH_BUDGET: u64 = 200_000;

/// All weight vectors with entries in `0..=max` and some entry zero, in lexicographic order.
pub fn weight_vectors(n: usize, max: i64) -> Vec<WeightSystem> {
    let mut out = Vec::new();
    let total = (max + 1).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let mut w = vec![0i64; n];
        for x in w.iter_mut().rev() {
            *x = c % (max + 1);
            c /= max + 1;
        }
        if w.contains(&0) {
            out.push(WeightSystem(w));
        }
    }
    // lighter systems first; among equal sums, weight on the leading coordinates first
    out.sort_by(|a, b| (a.sum(), &b.0).cmp(&(b.sum(), &a.0)));
    out
}

/// Coordinate changes sending distinguished linear subspaces of the central fiber
/// to coordinate subspaces `Y_0 = ... = Y_{k-1} = 0`. The identity comes first.
pub fn candidate_changes(eqs: &[HomogForm], field: &Arc<Field>) -> Vec<LinearChange> {
    let f = &**field;
    let n = eqs[0].nvars();
    let residues: Vec<_> = eqs.iter().map(|e| e.residue()).collect();
    let mut subspaces: Vec<Vec<Vec<Fe>>> = Vec::new();
    let push_dual = |pts: &[Vec<Fe>], subspaces: &mut Vec<Vec<Vec<Fe>>>| {
        // equations of the span of the points
        let eqs = linalg::kernel(pts, n, f);
        if !eqs.is_empty() && eqs.len() < n {
            subspaces.push(eqs);
        }
    };
    if residues.iter().any(|r| !r.is_zero()) {
        let sing = jacobian_scheme(field, &residues.iter().filter(|r| !r.is_zero()).cloned().collect::<Vec<_>>());
        if let Ok((_, pts)) = scheme::points(&sing, 1, scheme::DEFAULT_COUNT_BUDGET) {
            if !pts.is_empty() && pts.len() <= 64 {
                push_dual(&pts, &mut subspaces);
                for p in &pts {
                    push_dual(std::slice::from_ref(p), &mut subspaces);
                }
            } else if !pts.is_empty() {
                push_dual(&pts, &mut subspaces);
            }
        }
    }
    // vertex spaces and linear factors of quadric members
    if eqs[0].degree() == 2 {
        let members: Vec<_> = match residues.as_slice() {
            [a] => vec![a.clone()],
            [a, b] => {
                let mut v = vec![b.clone()];
                for lam in f.elements() {
                    v.push(a.add(&b.scale(&lam, f), f));
                }
                v
            }
            _ => vec![],
        };
        for m in &members {
            if m.is_zero() {
                continue;
            }
            let g = gram_matrix(m, f);
            let ker = linalg::kernel(&g, n, f);
            if !ker.is_empty() {
                push_dual(&ker, &mut subspaces);
            }
            if n - ker.len() <= 2 {
                for l in crate::fiber::quadric_linear_factors(m, field) {
                    subspaces.push(vec![l]);
                }
            }
        }
    }
    let mut out = vec![LinearChange::identity(n)];
    for s in subspaces {
        let (rows, _) = linalg::complete_rows(&s, n, f);
        let inv = linalg::inverse(&rows, f).expect("completed basis is invertible");
        let c = LinearChange::from_field(&inv);
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

/// Bounded search for a destabilizing pair.
pub fn search_destabilizer(eqs: &[HomogForm], field: &Arc<Field>, budget: u64) -> Result<StabilityVerdict> {
    let f = &**field;
    let n = eqs[0].nvars();
    let d = eqs[0].degree() as i64;
    let changes = candidate_changes(eqs, field);
    let binary = weight_vectors(n, 1);
    let wide = weight_vectors(n, d);
    let mut used = 0u64;
    let moved_all = changes
        .iter()
        .map(|a| eqs.iter().map(|e| apply_linear(e, a, f)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    for (stage, weights) in [&binary, &wide].into_iter().enumerate() {
        for w in weights {
            if stage == 1 && w.weights().iter().all(|&x| x <= 1) {
                continue;
            }
            for (a, moved) in changes.iter().zip(&moved_all) {
                used += 1;
                if used > budget {
                    return Err(Error::BudgetExceeded(format!("destabilizer search used {budget} checks")));
                }
                let c = check_weight(moved, w, f)?;
                if !c.pass {
                    let searched = format!("{} stage(s), {used} checks", stage + 1);
                    let wit = Destabilizer { change: a.clone(), weights: w.clone(), mult: c.mult, threshold: c.threshold };
                    return StabilityVerdict::destabilized(eqs, wit, searched, f);
                }
            }
        }
    }
    let searched = format!(
        "{} coordinate changes x {} weight systems with entries in 0..={d}: {used} checks",
        changes.len(),
        wide.len()
    );
    Ok(StabilityVerdict { status: Status::SemistableAgainstSearch, witness: None, searched })
}
