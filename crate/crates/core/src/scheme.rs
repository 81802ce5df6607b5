//! Projective schemes over finite fields, handled by point counting.
//!
//! Points over `F_{q^k}` are enumerated after eliminating linear equations:
//! every remaining equation is restricted to the lines through canonical
//! prefixes, and common roots in the last coordinate are counted with a gcd.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Embedding, Fe, Field};
use crate::linalg;
use crate::poly::{FieldForm, Monomial};
use crate::upoly::UPoly;

/// Default cap on the number of restricted lines examined in one count.
pub const DEFAULT_COUNT_BUDGET: u64 = 50_000_000;

/// A subscheme of `P^{nvars-1}` over `field`, given by equations.
#[derive(Clone, Debug)]
pub struct SchemeHandle {
    pub field: Arc<Field>,
    pub nvars: usize,
    pub equations: Vec<FieldForm>,
}

impl SchemeHandle {
    pub fn new(field: &Arc<Field>, nvars: usize, equations: Vec<FieldForm>) -> SchemeHandle {
        let equations = equations.into_iter().filter(|e| !e.is_zero()).collect();
        SchemeHandle { field: field.clone(), nvars, equations }
    }

    pub fn contains(&self, x: &[Fe], ext: &Field, emb: &Embedding) -> bool {
        self.equations.iter().all(|e| e.embed(emb).eval(x, ext).is_zero())
    }

    pub fn with(&self, extra: Vec<FieldForm>) -> SchemeHandle {
        let mut eqs = self.equations.clone();
        eqs.extend(extra);
        SchemeHandle::new(&self.field, self.nvars, eqs)
    }
}

/// The singular scheme: a single form with its partials, or a pair of forms with
/// the 2x2 minors of their Jacobian matrix.
pub fn jacobian_scheme(field: &Arc<Field>, forms: &[FieldForm]) -> SchemeHandle {
    let n = forms[0].nvars();
    let mut eqs: Vec<FieldForm> = forms.to_vec();
    let partials: Vec<Vec<FieldForm>> =
        forms.iter().map(|g| (0..n).map(|i| g.derivative(i, field)).collect()).collect();
    match forms.len() {
        1 => eqs.extend(partials[0].iter().cloned()),
        2 => {
            for i in 0..n {
                for j in i + 1..n {
                    let a = partials[0][i].mul(&partials[1][j], field);
                    let b = partials[0][j].mul(&partials[1][i], field);
                    eqs.push(a.sub(&b, field));
                }
            }
        }
        _ => {
            for row in partials {
                eqs.extend(row);
            }
        }
    }
    SchemeHandle::new(field, n, eqs)
}

/// Make the first nonzero coordinate 1.
pub fn canonicalize(x: &mut [Fe], f: &Field) {
    if let Some(&lead) = x.iter().find(|c| !c.is_zero()) {
        let inv = f.inv(lead).unwrap();
        for c in x.iter_mut() {
            *c = f.mul(*c, inv);
        }
    }
}

/// Equations reduced to a linear subspace: `X = sum_j Y_j basis[j]`.
struct Reduced {
    basis: Vec<Vec<Fe>>,
    equations: Vec<FieldForm>,
    empty: bool,
}

fn eliminate_linear(s: &SchemeHandle) -> Reduced {
    let f = &*s.field;
    let n = s.nvars;
    let rows: Vec<Vec<Fe>> = s
        .equations
        .iter()
        .filter(|e| e.degree() == 1)
        .map(|e| (0..n).map(|i| e.coeff(&Monomial::var(n, i))).collect())
        .collect();
    if s.equations.iter().any(|e| e.degree() == 0) {
        return Reduced { basis: vec![], equations: vec![], empty: true };
    }
    let basis = linalg::kernel(&rows, n, f);
    let m = basis.len();
    if m == 0 {
        return Reduced { basis, equations: vec![], empty: true };
    }
    let subs: Vec<FieldForm> = (0..n)
        .map(|i| {
            let terms = (0..m).map(|j| (Monomial::var(m, j), basis[j][i]));
            FieldForm::from_terms(m, 1, terms, f).unwrap()
        })
        .collect();
    let mut equations: Vec<FieldForm> = s
        .equations
        .iter()
        .filter(|e| e.degree() > 1)
        .map(|e| e.substitute(&subs, f))
        .filter(|e| !e.is_zero())
        .collect();
    equations.sort_by_key(|e| (e.degree(), e.terms().len()));
    let empty = equations.iter().any(|e| e.degree() == 0);
    Reduced { basis, equations, empty }
}

/// An equation split by the power of the last variable.
struct Restricted {
    /// For each power `j` of the last variable: `(prefix exponents, coefficient)`.
    by_power: Vec<Vec<(Vec<u8>, Fe)>>,
}

fn restrict(e: &FieldForm, map: impl Fn(Fe) -> Fe) -> Restricted {
    let m = e.nvars();
    let mut by_power = vec![Vec::new(); e.degree() as usize + 1];
    for (mono, &c) in e.terms() {
        let j = mono.0[m - 1] as usize;
        by_power[j].push((mono.0[..m - 1].to_vec(), map(c)));
    }
    Restricted { by_power }
}

/// Walks all points of `P^{m-1}(F_Q)` lying on the reduced equations.
struct Enumerator<'a> {
    ext: &'a Field,
    m: usize,
    eqs: Vec<Restricted>,
    max_deg: usize,
}

impl<'a> Enumerator<'a> {
    fn line_poly(&self, r: &Restricted, pw: &[Vec<Fe>]) -> UPoly {
        let f = self.ext;
        let coeffs = r
            .by_power
            .iter()
            .map(|terms| {
                terms.iter().fold(Fe::ZERO, |acc, (ex, c)| {
                    let mut v = *c;
                    for (i, &e) in ex.iter().enumerate() {
                        if e > 0 {
                            v = f.mul(v, pw[i][e as usize]);
                        }
                    }
                    f.add(acc, v)
                })
            })
            .collect();
        UPoly::new(coeffs)
    }

    /// Common restriction to the line through `prefix`; `None` when identically zero.
    fn common(&self, prefix: &[Fe]) -> Option<UPoly> {
        let f = self.ext;
        let pw: Vec<Vec<Fe>> = prefix
            .iter()
            .map(|&x| {
                let mut v = vec![Fe::ONE; self.max_deg + 1];
                for e in 1..=self.max_deg {
                    v[e] = f.mul(v[e - 1], x);
                }
                v
            })
            .collect();
        let mut g: Option<UPoly> = None;
        for r in &self.eqs {
            let p = self.line_poly(r, &pw);
            if p.is_zero() {
                continue;
            }
            let next = match g {
                None => p.monic(f),
                Some(ref h) => h.gcd(&p, f),
            };
            if next.degree() == Some(0) {
                return Some(next);
            }
            g = Some(next);
        }
        g
    }

    fn last_point_on(&self) -> bool {
        self.eqs.iter().all(|r| r.by_power.last().is_none_or(|t| t.iter().all(|(_, c)| c.is_zero())))
    }

    /// Visit each canonical prefix in `P^{m-2}`.
    fn for_each_prefix(&self, mut visit: impl FnMut(&[Fe])) {
        self.try_each_prefix(|p| {
            visit(p);
            false
        });
    }

    /// Prefixes in canonical order until `visit` returns true.
    fn try_each_prefix(&self, mut visit: impl FnMut(&[Fe]) -> bool) -> bool {
        let q = self.ext.size();
        let len = self.m - 1;
        for lead in 0..len {
            let mut prefix = vec![Fe::ZERO; len];
            prefix[lead] = Fe::ONE;
            let free = len - lead - 1;
            let mut digits = vec![0u32; free];
            'outer: loop {
                for (i, &d) in digits.iter().enumerate() {
                    prefix[lead + 1 + i] = self.ext.from_index(d);
                }
                if visit(&prefix) {
                    return true;
                }
                for i in (0..free).rev() {
                    digits[i] += 1;
                    if digits[i] < q {
                        continue 'outer;
                    }
                    digits[i] = 0;
                }
                break;
            }
        }
        false
    }
}

/// Sort key of canonical points: position of the leading one, then coordinate indices.
pub fn point_key(x: &[Fe], f: &Field) -> (usize, Vec<u32>) {
    let lead = x.iter().position(|c| !c.is_zero()).unwrap_or(x.len());
    (lead, x.iter().map(|&c| f.index(c)).collect())
}

/// The first point of `X(ext)` in canonical order accepted by `accept`; `equations` are
/// over `ext` already. Lines are scanned lazily, so the cost depends on where the hit is.
pub fn first_point(ext: &Field, nvars: usize, equations: &[FieldForm], mut accept: impl FnMut(&[Fe]) -> bool) -> Option<Vec<Fe>> {
    let eqs: Vec<Restricted> = equations.iter().filter(|e| !e.is_zero()).map(|e| restrict(e, |c| c)).collect();
    let on_all = |x: &[Fe]| equations.iter().all(|e| e.eval_point(x, ext).is_zero());
    if nvars == 1 {
        let x = vec![Fe::ONE];
        return (on_all(&x) && accept(&x)).then_some(x);
    }
    let max_deg = equations.iter().map(|e| e.degree() as usize).max().unwrap_or(1);
    let en = Enumerator { ext, m: nvars, eqs, max_deg };
    let mut found = None;
    en.try_each_prefix(|prefix| {
        let roots = match en.common(prefix) {
            None => ext.elements().collect::<Vec<_>>(),
            Some(g) => g.roots(ext),
        };
        let mut roots = roots;
        roots.sort_by_key(|&r| ext.index(r));
        for r in roots {
            let mut x = prefix.to_vec();
            x.push(r);
            if accept(&x) {
                found = Some(x);
                return true;
            }
        }
        false
    });
    if found.is_none() {
        let x = linalg::unit(nvars, nvars - 1);
        if on_all(&x) && accept(&x) {
            found = Some(x);
        }
    }
    found
}

/// Number of lines examined when counting over a field of size `q_ext` in `P^{m-1}`.
fn prefix_count(q_ext: u64, m: usize) -> u64 {
    if m <= 1 {
        return 1;
    }
    (0..m - 1).map(|i| q_ext.saturating_pow(i as u32)).fold(0u64, |a, b| a.saturating_add(b))
}

/// `F_{q^k}` with the embedding of the base field.
pub fn extension(field: &Arc<Field>, k: u32) -> Result<(Arc<Field>, Arc<Embedding>)> {
    let ext = if k == 1 { field.clone() } else { field.extension(k)? };
    let emb = Embedding::cached(field, &ext)?;
    Ok((ext, emb))
}

/// What the enumeration found on one line, or at the point `(0 : ... : 0 : 1)`.
enum Hit<'a> {
    /// Common restriction to the line through the prefix; `None` when it vanishes identically.
    Line(&'a [Fe], Option<&'a UPoly>),
    Last,
}

fn run(s: &SchemeHandle, k: u32, budget: u64, mut visit: impl FnMut(&Field, Hit<'_>, &Reduced)) -> Result<()> {
    let (ext, emb) = extension(&s.field, k)?;
    let reduced = eliminate_linear(s);
    if reduced.empty {
        return Ok(());
    }
    let m = reduced.basis.len();
    let lines = prefix_count(ext.size() as u64, m);
    if lines > budget {
        return Err(Error::BudgetExceeded(format!("{lines} lines over F_{} in P^{}", ext.size(), m - 1)));
    }
    if m == 1 {
        // a nonzero form c Y^d in one variable has no zeros
        if reduced.equations.is_empty() {
            visit(&ext, Hit::Last, &reduced);
        }
        return Ok(());
    }
    let eqs: Vec<Restricted> = reduced.equations.iter().map(|e| restrict(e, |c| emb.apply(c))).collect();
    let max_deg = reduced.equations.iter().map(|e| e.degree() as usize).max().unwrap_or(1);
    let en = Enumerator { ext: &ext, m, eqs, max_deg };
    en.for_each_prefix(|prefix| {
        let g = en.common(prefix);
        visit(&ext, Hit::Line(prefix, g.as_ref()), &reduced);
    });
    if en.last_point_on() {
        visit(&ext, Hit::Last, &reduced);
    }
    Ok(())
}

/// Drop variables that no equation involves; returns the compressed equations
/// (in the used variables) and the number of dropped variables.
fn compress_in(red: &Reduced, f: &Field) -> (Vec<FieldForm>, usize) {
    let m = red.basis.len();
    let used: Vec<usize> =
        (0..m).filter(|&i| red.equations.iter().any(|e| e.terms().keys().any(|t| t.0[i] > 0))).collect();
    let eqs = red
        .equations
        .iter()
        .map(|e| {
            let terms = e.terms().iter().map(|(mono, &c)| (Monomial(used.iter().map(|&i| mono.0[i]).collect()), c));
            FieldForm::from_terms(used.len(), e.degree(), terms, f).unwrap()
        })
        .collect();
    (eqs, m - used.len())
}

fn proj_size(q: u64, m: usize) -> u64 {
    (0..m).map(|i| q.pow(i as u32)).sum()
}

/// `#X(F_{q^k})`. Variables absent from every equation (after linear elimination)
/// are counted in closed form, so cones cost no more than their bases.
pub fn count_points(s: &SchemeHandle, k: u32, budget: u64) -> Result<u64> {
    let red = eliminate_linear(s);
    if red.empty {
        return Ok(0);
    }
    let q_ext = (s.field.size() as u64).pow(k);
    let m = red.basis.len();
    if red.equations.is_empty() {
        return Ok(proj_size(q_ext, m));
    }
    let (eqs, free) = compress_in(&red, &s.field);
    if free > 0 {
        let base = SchemeHandle::new(&s.field, m - free, eqs);
        let n_base = count_points(&base, k, budget)?;
        let affine = 1 + (q_ext - 1) * n_base;
        return Ok((affine * q_ext.pow(free as u32) - 1) / (q_ext - 1));
    }
    let mut total = 0u64;
    run(s, k, budget, |ext, hit, _| {
        total += match hit {
            Hit::Line(_, None) => ext.size() as u64,
            Hit::Line(_, Some(g)) => g.count_distinct_roots(ext) as u64,
            Hit::Last => 1,
        }
    })?;
    Ok(total)
}

/// Lines the enumeration of `X(F_{q^k})` would examine.
pub fn lines_needed(s: &SchemeHandle, k: u32) -> u64 {
    let red = eliminate_linear(s);
    if red.empty || red.equations.is_empty() {
        return 0;
    }
    let (eqs, free) = compress_in(&red, &s.field);
    let q_ext = (s.field.size() as u64).saturating_pow(k);
    if free > 0 {
        return lines_needed(&SchemeHandle::new(&s.field, red.basis.len() - free, eqs), k);
    }
    prefix_count(q_ext, red.basis.len())
}

/// All points of `X(F_{q^k})` in canonical form, sorted by `point_key`,
/// together with the extension field they live in.
pub fn points(s: &SchemeHandle, k: u32, budget: u64) -> Result<(Arc<Field>, Vec<Vec<Fe>>)> {
    let (ext, _) = extension(&s.field, k)?;
    let mut ys: Vec<Vec<Fe>> = Vec::new();
    let mut basis: Vec<Vec<Fe>> = Vec::new();
    run(s, k, budget, |ext, hit, red| {
        if basis.is_empty() {
            basis = red.basis.clone();
        }
        match hit {
            Hit::Line(prefix, g) => {
                let roots = match g {
                    None => ext.elements().collect(),
                    Some(g) => g.roots(ext),
                };
                for r in roots {
                    let mut y = prefix.to_vec();
                    y.push(r);
                    ys.push(y);
                }
            }
            Hit::Last => {
                let m = red.basis.len();
                ys.push(linalg::unit(m, m - 1));
            }
        }
    })?;
    let (_, emb) = extension(&s.field, k)?;
    let n = s.nvars;
    let basis_ext: Vec<Vec<Fe>> = basis.iter().map(|b| b.iter().map(|&c| emb.apply(c)).collect()).collect();
    let mut out: Vec<Vec<Fe>> = ys
        .into_iter()
        .map(|y| {
            let mut x = vec![Fe::ZERO; n];
            for (j, &yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                for i in 0..n {
                    x[i] = ext.add(x[i], ext.mul(yj, basis_ext[j][i]));
                }
            }
            canonicalize(&mut x, &ext);
            x
        })
        .collect();
    out.sort_by_key(|x| point_key(x, &ext));
    out.dedup();
    Ok((ext, out))
}

/// Outcome of the dimension heuristic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimReport {
    /// `None` when the counts fit no band.
    pub dim: Option<i64>,
    /// `N_k` for `k = 1..=K`.
    pub counts: Vec<u64>,
    pub q: u64,
}

/// Upper bound on the counts of a zero-dimensional scheme accepted by the heuristic.
pub const ZERO_DIM_MAX_POINTS: u64 = 12;

/// Dimension from counts `N_1..N_K` over `F_{q^k}`.
///
/// Dimension `d >= 1` requires `N_K` in `[q^{Kd}/3, 3(d+1) q^{Kd}]` and
/// `N_K / N_{K-1}` in `[q^d/3, 3 q^d]`. Dimension 0 requires some nonzero count and all
/// counts at most [`ZERO_DIM_MAX_POINTS`]; a finite set need not have points over the
/// last field. All-zero counts mean empty.
pub fn estimate_dim(counts: &[u64], q: u64, max_dim: i64) -> Option<i64> {
    let kk = counts.len() as u32;
    let nk = *counts.last()? as u128;
    if counts.iter().all(|&c| c == 0) {
        return Some(-1);
    }
    if counts.iter().all(|&c| c <= ZERO_DIM_MAX_POINTS) {
        return Some(0);
    }
    let q = q as u128;
    for d in 1..=max_dim {
        let base = q.pow(kk * d as u32);
        let in_band = 3 * nk >= base && nk <= 3 * (d as u128 + 1) * base;
        let trend = if kk >= 2 {
            let prev = counts[kk as usize - 2] as u128;
            let qd = q.pow(d as u32);
            // N_K / N_{K-1} in [q^d / 3, 3 q^d]
            prev > 0 && 3 * nk >= qd * prev && nk <= 3 * qd * prev
        } else {
            true
        };
        if in_band && trend {
            return Some(d);
        }
    }
    None
}

/// Corrects an estimate of "empty" by the projective dimension theorem: `r` equations in
/// `P^N` with `r <= N` cut out a nonempty scheme of dimension at least `N - r`. With no
/// points seen that is only conclusive when `N - r = 0`.
pub fn with_dimension_floor(s: &SchemeHandle, dim: Option<i64>) -> Option<i64> {
    let floor = s.nvars as i64 - 1 - s.equations.len() as i64;
    match dim {
        Some(-1) if floor == 0 => Some(0),
        Some(-1) if floor > 0 => None,
        d => d,
    }
}

/// Counts over `F_{q^k}` for `k = 1..=K` and the resulting dimension estimate.
pub fn dim_by_counting(s: &SchemeHandle, kmax: u32, budget: u64) -> Result<DimReport> {
    let counts = (1..=kmax).map(|k| count_points(s, k, budget)).collect::<Result<Vec<_>>>()?;
    let q = s.field.size() as u64;
    let dim = with_dimension_floor(s, estimate_dim(&counts, q, s.nvars as i64 - 1));
    Ok(DimReport { dim, counts, q })
}

/// [`dim_by_counting`] with `K = 3`, retried once with `K = 4` when inconclusive.
pub fn dim_with_retry(s: &SchemeHandle, budget: u64) -> Result<DimReport> {
    let r = dim_by_counting(s, 3, budget)?;
    if r.dim.is_some() {
        return Ok(r);
    }
    let c4 = count_points(s, 4, budget)?;
    let mut counts = r.counts;
    counts.push(c4);
    let dim = with_dimension_floor(s, estimate_dim(&counts, r.q, s.nvars as i64 - 1));
    Ok(DimReport { dim, counts, q: r.q })
}
