//! Conic, quadric and pencil bundles over `P^1_{F_q}`: local solubility at places of
//! small degree, exhaustive enumeration of low-degree sections, and the combined probe.
//!
//! A bundle is given by forms whose coefficients are polynomials in the affine
//! parameter `t`, together with a homogenization degree per equation that fixes the
//! chart at `t = infinity`.

mod local;
mod sections;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::poly::{Form, HomogForm, Monomial};
use crate::reduce::ModelKind;
use crate::ring::Series;
use crate::scheme;
use crate::upoly::UPoly;

pub use local::{local_section, LiftMethod, LocalReport, LocalSolubility, DEFAULT_LIFT_DEPTH, DEFAULT_NODE_BUDGET};
pub use sections::{enumerate_sections, hasse_probe, HasseVerdict, PlaceOutcome, SectionCandidate, SectionList, DEFAULT_SECTION_BUDGET};

/// A form over `F_q[t]`.
pub type BundleForm = Form<UPoly>;

/// A model over `P^1` in two charts.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleModel {
    pub field: Arc<Field>,
    pub kind: ModelKind,
    pub equations: Vec<BundleForm>,
    /// Equation `k` in the chart at infinity is `s^{deg_k} F_k(1/s)`.
    pub infinity_degrees: Vec<usize>,
}

fn max_coeff_degree(g: &BundleForm) -> usize {
    g.terms().values().filter_map(|c| c.degree()).max().unwrap_or(0)
}

impl BundleModel {
    pub fn new(field: &Arc<Field>, equations: Vec<BundleForm>, infinity_degrees: Vec<usize>) -> Result<BundleModel> {
        let Some(first) = equations.first() else {
            return Err(Error::Invalid("a bundle needs at least one equation".into()));
        };
        let nvars = first.nvars();
        let kind = match (equations.len(), first.degree()) {
            (1, d) => ModelKind::SingleForm { degree: d, nvars },
            (2, 2) => ModelKind::Pencil { nvars },
            (k, d) => return Err(Error::Invalid(format!("{k} equations of degree {d}"))),
        };
        if equations.iter().any(|g| g.nvars() != nvars || g.degree() != first.degree() || g.is_zero()) {
            return Err(Error::Invalid("equations must be nonzero forms of one degree in one set of variables".into()));
        }
        if infinity_degrees.len() != equations.len() {
            return Err(Error::Invalid("one homogenization degree per equation".into()));
        }
        for (g, &d) in equations.iter().zip(&infinity_degrees) {
            if max_coeff_degree(g) > d {
                return Err(Error::Invalid(format!("a coefficient has degree {} > declared degree {d}", max_coeff_degree(g))));
            }
        }
        Ok(BundleModel { field: field.clone(), kind, equations, infinity_degrees })
    }

    /// Homogenization degrees taken as small as possible.
    pub fn minimal(field: &Arc<Field>, equations: Vec<BundleForm>) -> Result<BundleModel> {
        let degs = equations.iter().map(max_coeff_degree).collect();
        BundleModel::new(field, equations, degs)
    }

    pub fn nvars(&self) -> usize {
        self.equations[0].nvars()
    }

    pub fn degree(&self) -> u32 {
        self.equations[0].degree()
    }

    /// Equations in the chart at infinity, in the parameter `s = 1/t`.
    pub fn infinity_chart(&self) -> Vec<BundleForm> {
        self.equations.iter().zip(&self.infinity_degrees).map(|(g, &d)| g.map(|c| reverse(c, d))).collect()
    }

    /// The chart at infinity, transformed back, reproduces the affine equations.
    pub fn charts_glue(&self) -> bool {
        self.infinity_chart().iter().zip(&self.infinity_degrees).zip(&self.equations).all(|((h, &d), g)| &h.map(|c| reverse(c, d)) == g)
    }

    /// The chart and local parameter of a place: the equations over the residue field
    /// `K` in `u`, where `t = alpha + u` (`alpha` a root of the place) or `s = u` at infinity.
    pub fn local_forms(&self, place: &Place) -> Result<(Arc<Field>, Vec<HomogForm>)> {
        let f = &self.field;
        match place {
            Place::Infinity => Ok((f.clone(), self.infinity_chart().iter().map(|g| g.map(Series::from_upoly)).collect())),
            Place::Finite(pi) => {
                let deg = pi.degree().filter(|&d| d >= 1).ok_or_else(|| Error::Invalid("a place needs positive degree".into()))?;
                let (ext, emb) = scheme::extension(f, deg as u32)?;
                let pi_ext = UPoly::new(pi.0.iter().map(|&c| emb.apply(c)).collect());
                let alpha = *pi_ext.roots(&ext).first().ok_or_else(|| Error::Invalid(format!("{place} is not irreducible")))?;
                let forms = self
                    .equations
                    .iter()
                    .map(|g| {
                        g.map(|c| {
                            let c = UPoly::new(c.0.iter().map(|&x| emb.apply(x)).collect());
                            Series::from_upoly(&taylor_shift(&c, alpha, &ext))
                        })
                    })
                    .collect();
                Ok((ext, forms))
            }
        }
    }

    /// The equations at `t = a` for `a` in the base field.
    pub fn fiber_at(&self, a: Fe) -> Vec<crate::poly::FieldForm> {
        self.equations.iter().map(|g| g.map(|c| c.eval(a, &self.field))).collect()
    }
}

/// `s^d c(1/s)`.
fn reverse(c: &UPoly, d: usize) -> UPoly {
    let mut v = vec![Fe::ZERO; d + 1];
    for (i, &x) in c.0.iter().enumerate() {
        v[d - i] = x;
    }
    UPoly::new(v)
}

/// `c(u + a)` as a polynomial in `u`.
pub fn taylor_shift(c: &UPoly, a: Fe, f: &Field) -> UPoly {
    let lin = UPoly::new(vec![a, Fe::ONE]);
    c.0.iter().rev().fold(UPoly::zero(), |acc, &x| acc.mul(&lin, f).add(&UPoly::constant(x), f))
}

/// A closed point of `P^1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Place {
    /// A monic irreducible polynomial in `t`.
    Finite(UPoly),
    Infinity,
}

impl Place {
    pub fn degree(&self) -> usize {
        match self {
            Place::Finite(p) => p.degree().unwrap_or(0),
            Place::Infinity => 1,
        }
    }

    /// The place `t = a`.
    pub fn rational(a: Fe, f: &Field) -> Place {
        Place::Finite(UPoly::new(vec![f.neg(a), Fe::ONE]))
    }

    fn label(&self, f: &Field) -> String {
        match self {
            Place::Infinity => "inf".into(),
            Place::Finite(p) => {
                let mut parts = Vec::new();
                for (i, &c) in p.0.iter().enumerate().rev() {
                    if c.is_zero() {
                        continue;
                    }
                    let coef = f.index(c);
                    let mono = match i {
                        0 => String::new(),
                        1 => "t".into(),
                        _ => format!("t^{i}"),
                    };
                    parts.push(match (coef, i) {
                        (1, 0) => "1".into(),
                        (1, _) => mono,
                        (_, 0) => coef.to_string(),
                        _ => format!("{coef}*{mono}"),
                    });
                }
                parts.join("+")
            }
        }
    }
}

impl fmt::Display for Place {
    /// Coefficients are printed as field indices.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Finite(p) => write!(f, "{:?}", p.0),
        }
    }
}

/// A place together with its printable name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedPlace {
    pub place: Place,
    pub name: String,
}

impl Serialize for NamedPlace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name)
    }
}

impl NamedPlace {
    pub fn new(place: Place, f: &Field) -> NamedPlace {
        let name = place.label(f);
        NamedPlace { place, name }
    }
}

/// All places of degree at most `max_degree` (and infinity), finite ones ordered by
/// degree and then by coefficients.
pub fn places_up_to(field: &Field, max_degree: usize) -> Vec<NamedPlace> {
    let q = field.size() as u64;
    let mut out = Vec::new();
    for d in 1..=max_degree {
        for code in 0..q.pow(d as u32) {
            let mut c = code;
            let mut coeffs: Vec<Fe> = (0..d)
                .map(|_| {
                    let x = field.from_index((c % q) as u32);
                    c /= q;
                    x
                })
                .collect();
            coeffs.push(Fe::ONE);
            let p = UPoly::new(coeffs);
            if is_irreducible_small(&p, field) {
                out.push(NamedPlace::new(Place::Finite(p), field));
            }
        }
    }
    out.push(NamedPlace::new(Place::Infinity, field));
    out
}

/// Irreducibility for degree at most 3: no roots.
fn is_irreducible_small(p: &UPoly, f: &Field) -> bool {
    match p.degree() {
        Some(1) => true,
        Some(2) | Some(3) => p.count_distinct_roots(f) == 0,
        _ => false,
    }
}

/// A random bundle vanishing on the section `s(t)` (primitive): random forms `G` with
/// coefficients of degree at most `coeff_degree`, corrected by `G(s) (sum u_i X_i)^d`
/// where `sum u_i s_i = 1`.
pub fn plant<R: Rng>(field: &Arc<Field>, section: &[UPoly], degree: u32, neq: usize, coeff_degree: usize, rng: &mut R) -> Result<BundleModel> {
    let f = &**field;
    let n = section.len();
    let u = bezout(section, f).ok_or_else(|| Error::Invalid("the planted section must be primitive".into()))?;
    let lin = BundleForm::from_terms(n, 1, u.iter().enumerate().map(|(i, c)| (Monomial::var(n, i), c.clone())), f)?;
    let lin_d = lin.pow(degree, f);
    let mut eqs = Vec::new();
    for _ in 0..neq {
        let random = |rng: &mut R| UPoly::new((0..=coeff_degree).map(|_| f.from_index(rng.gen_range(0..f.size()))).collect());
        let terms: Vec<(Monomial, UPoly)> = Monomial::all(n, degree).into_iter().map(|m| (m, random(rng))).collect();
        let g = BundleForm::from_terms(n, degree, terms, f)?;
        let r = g.eval(section, f);
        eqs.push(g.sub(&lin_d.scale(&r, f), f));
    }
    BundleModel::minimal(field, eqs)
}

/// `u` with `sum u_i s_i = 1`, if the tuple is primitive.
pub fn bezout(s: &[UPoly], f: &Field) -> Option<Vec<UPoly>> {
    let n = s.len();
    let mut g = UPoly::zero();
    let mut coef = vec![UPoly::zero(); n];
    for i in 0..n {
        if s[i].is_zero() {
            continue;
        }
        if g.is_zero() {
            g = s[i].clone();
            coef[i] = UPoly::constant(Fe::ONE);
            continue;
        }
        // a g + b s_i = gcd
        let (d, a, b) = ext_gcd(&g, &s[i], f);
        for c in coef.iter_mut() {
            *c = c.mul(&a, f);
        }
        coef[i] = b;
        g = d;
    }
    if g.degree() != Some(0) {
        return None;
    }
    let inv = f.inv(g.lead()).unwrap();
    Some(coef.into_iter().map(|c| c.scale(inv, f)).collect())
}

/// `(d, a, b)` with `a x + b y = d = gcd(x, y)`.
fn ext_gcd(x: &UPoly, y: &UPoly, f: &Field) -> (UPoly, UPoly, UPoly) {
    let (mut r0, mut r1) = (x.clone(), y.clone());
    let (mut a0, mut a1) = (UPoly::constant(Fe::ONE), UPoly::zero());
    let (mut b0, mut b1) = (UPoly::zero(), UPoly::constant(Fe::ONE));
    while !r1.is_zero() {
        let (q, r) = r0.divrem(&r1, f);
        let a2 = a0.sub(&q.mul(&a1, f), f);
        let b2 = b0.sub(&q.mul(&b1, f), f);
        (r0, r1) = (r1, r);
        (a0, a1) = (a1, a2);
        (b0, b1) = (b1, b2);
    }
    (r0, a0, b0)
}
