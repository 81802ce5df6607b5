use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::local::{local_section, LocalReport, DEFAULT_NODE_BUDGET};
use super::{bezout, places_up_to, taylor_shift, BundleModel, NamedPlace};
use crate::error::{Error, Result};
use crate::gf::{Fe, Field};
use crate::linalg;
use crate::poly::HomogForm;
use crate::ring::Series;
use crate::scheme::{self, SchemeHandle};
use crate::upoly::UPoly;

/// Default cap on `q^((D+1)(n+1))`, the size of the unpruned search space.
pub const DEFAULT_SECTION_BUDGET: u64 = 1_000_000_000;

/// A section `t -> (s_0(t) : ... : s_n(t))` by a primitive tuple, scaled so that the
/// first nonzero component is monic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionCandidate {
    pub coords: Vec<UPoly>,
}

impl SectionCandidate {
    pub fn degree(&self) -> usize {
        self.coords.iter().filter_map(|c| c.degree()).max().unwrap_or(0)
    }

    /// The identity in both charts, checked exactly.
    pub fn verify(&self, model: &BundleModel) -> bool {
        let f = &*model.field;
        let affine = model.equations.iter().all(|g| g.eval(&self.coords, f).is_zero());
        let d = self.degree();
        let at_inf: Vec<UPoly> = self.coords.iter().map(|c| super::reverse(c, d)).collect();
        let infinity = model.infinity_chart().iter().all(|g| g.eval(&at_inf, f).is_zero());
        affine && infinity && bezout(&self.coords, f).is_some()
    }

    fn key(&self, f: &Field) -> Vec<Vec<u32>> {
        self.coords.iter().map(|c| c.0.iter().map(|&x| f.index(x)).collect()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectionList {
    pub degree_bound: usize,
    /// Prefix pruning runs on the `(t - center)`-adic expansion.
    pub center: Fe,
    pub sections: Vec<SectionCandidate>,
    pub nodes: u64,
    keys: Vec<Vec<Vec<u32>>>,
}

impl SectionList {
    pub fn count(&self) -> usize {
        self.sections.len()
    }
}

impl Serialize for SectionList {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("SectionList", 4)?;
        st.serialize_field("degree_bound", &self.degree_bound)?;
        st.serialize_field("count", &self.sections.len())?;
        st.serialize_field("nodes", &self.nodes)?;
        st.serialize_field("sections", &self.keys)?;
        st.end()
    }
}

/// Every section of degree at most `d`, up to scaling. Coefficients are assigned one
/// `(t - a)`-adic order at a time; at order `k` the admissible new coefficients form
/// the affine space cut out by the order-`k` coefficient of the identity, which is linear
/// in them with the residue Jacobian as matrix. Survivors at order `d` are checked exactly.
pub fn enumerate_sections(model: &BundleModel, d: usize, budget: u64) -> Result<SectionList> {
    let field = model.field.clone();
    let f = &*field;
    let n = model.nvars();
    let q = f.size() as u64;
    let space = (0..(d + 1) * n).try_fold(1u64, |acc, _| acc.checked_mul(q).filter(|&v| v <= budget));
    if space.is_none() {
        return Err(Error::BudgetExceeded(format!("q^((D+1)(n+1)) > {budget} candidate tuples")));
    }
    let center = choose_center(model)?;
    let eqs: Vec<HomogForm> = model.equations.iter().map(|g| g.map(|c| Series::from_upoly(&taylor_shift(c, center, f)))).collect();
    let partials: Vec<Vec<HomogForm>> = eqs.iter().map(|e| (0..n).map(|i| e.derivative(i, f)).collect()).collect();
    let handle = SchemeHandle::new(&field, n, model.fiber_at(center));
    let (_, roots) = scheme::points(&handle, 1, scheme::DEFAULT_COUNT_BUDGET)?;
    let mut found: Vec<(Vec<Vec<u32>>, SectionCandidate)> = Vec::new();
    let mut nodes = 0u64;
    let mut stack: Vec<Vec<Vec<Fe>>> = roots.iter().map(|p| p.iter().map(|&c| vec![c]).collect()).collect();
    while let Some(node) = stack.pop() {
        nodes += 1;
        let k = node[0].len();
        let x: Vec<Series> = node.iter().map(|c| Series::exact(c.clone())).collect();
        if k == d + 1 {
            if eqs.iter().all(|e| e.eval(&x, f).is_zero()) {
                let coords: Vec<UPoly> = node.iter().map(|c| taylor_shift(&UPoly::new(c.clone()), f.neg(center), f)).collect();
                if bezout(&coords, f).is_some() {
                    let cand = normalize(coords, f);
                    if !cand.verify(model) {
                        return Err(Error::CertificateFailed("enumerated section fails the bundle identity".into()));
                    }
                    found.push((cand.key(f), cand));
                }
            }
            continue;
        }
        let jac: Vec<Vec<Fe>> = {
            let x0: Vec<Series> = x.iter().map(|c| Series::constant(c.residue())).collect();
            partials.iter().map(|row| row.iter().map(|p| p.eval(&x0, f).residue()).collect()).collect()
        };
        let rhs: Vec<Fe> = eqs.iter().map(|e| f.neg(e.eval(&x, f).coeff(k))).collect();
        let Some(y0) = linalg::solve(&jac, &rhs, n, f) else { continue };
        let basis = linalg::kernel(&jac, n, f);
        for code in 0..q.pow(basis.len() as u32) {
            let mut y = y0.clone();
            let mut c = code;
            for b in &basis {
                let a = f.from_index((c % q) as u32);
                c /= q;
                for (yi, &bi) in y.iter_mut().zip(b) {
                    *yi = f.add(*yi, f.mul(a, bi));
                }
            }
            let mut child = node.clone();
            for (col, yi) in child.iter_mut().zip(y) {
                col.push(yi);
            }
            stack.push(child);
        }
    }
    found.sort_by(|a, b| a.0.cmp(&b.0));
    found.dedup_by(|a, b| a.0 == b.0);
    let (keys, sections) = found.into_iter().unzip();
    Ok(SectionList { degree_bound: d, center, sections, nodes, keys })
}

/// A base point `a` whose fiber has only smooth rational points, so that pruning is
/// effective from the first order on; `0` if there is none.
fn choose_center(model: &BundleModel) -> Result<Fe> {
    let field = &model.field;
    let f = &**field;
    let n = model.nvars();
    for a in f.elements() {
        let fiber = model.fiber_at(a);
        if fiber.iter().all(|g| g.is_zero()) {
            continue;
        }
        let handle = SchemeHandle::new(field, n, fiber.clone());
        let (_, pts) = scheme::points(&handle, 1, scheme::DEFAULT_COUNT_BUDGET)?;
        let smooth = pts.iter().all(|p| {
            let jac: Vec<Vec<Fe>> = fiber.iter().map(|g| (0..n).map(|i| g.derivative(i, f).eval_point(p, f)).collect()).collect();
            linalg::rank(&jac, f) == fiber.len()
        });
        if smooth {
            return Ok(a);
        }
    }
    Ok(Fe::ZERO)
}

fn normalize(mut coords: Vec<UPoly>, f: &Field) -> SectionCandidate {
    if let Some(lead) = coords.iter().find(|c| !c.is_zero()).map(|c| c.lead()) {
        let inv = f.inv(lead).unwrap();
        for c in coords.iter_mut() {
            *c = c.scale(inv, f);
        }
    }
    SectionCandidate { coords }
}

/// Outcome at one place.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum PlaceOutcome {
    Soluble { report: LocalReport },
    Insoluble { report: LocalReport },
    Inconclusive { place: NamedPlace, reason: String },
}

/// Result of the desk-scale local-global probe, with every bound that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HasseVerdict {
    pub degree_bound: usize,
    pub place_bound: usize,
    pub depth: usize,
    pub section_budget: u64,
    pub node_budget: usize,
    pub places: Vec<PlaceOutcome>,
    pub locally_soluble: bool,
    pub enumeration_run: bool,
    pub section_found: bool,
    pub sections: Option<SectionList>,
    /// Locally soluble at every tested place, yet no section within the bound. Finite
    /// bounds make this a flag, not a counterexample.
    pub anomaly: bool,
    pub note: String,
}

impl HasseVerdict {
    pub fn section(&self) -> Option<&SectionCandidate> {
        self.sections.as_ref().and_then(|s| s.sections.first())
    }
}

/// Local solubility at every place of degree at most `place_bound` and at infinity;
/// when none is certified insoluble, sections up to degree `d` are enumerated.
pub fn hasse_probe(model: &BundleModel, d: usize, place_bound: usize, depth: usize, budget: u64) -> Result<HasseVerdict> {
    let mut places = Vec::new();
    for place in places_up_to(&model.field, place_bound) {
        places.push(match local_section(model, &place, depth, DEFAULT_NODE_BUDGET) {
            Ok(r) if r.is_soluble() => PlaceOutcome::Soluble { report: r },
            Ok(r) => PlaceOutcome::Insoluble { report: r },
            Err(e @ (Error::DepthExceeded(_) | Error::BudgetExceeded(_))) => PlaceOutcome::Inconclusive { place, reason: e.to_string() },
            Err(e) => return Err(e),
        });
    }
    let insoluble = places.iter().any(|p| matches!(p, PlaceOutcome::Insoluble { .. }));
    let locally_soluble = places.iter().all(|p| matches!(p, PlaceOutcome::Soluble { .. }));
    let sections = if insoluble { None } else { Some(enumerate_sections(model, d, budget)?) };
    let section_found = sections.as_ref().is_some_and(|s| s.count() > 0);
    let anomaly = locally_soluble && !section_found;
    let note = if insoluble {
        "certified locally insoluble at a tested place: no global section exists".to_string()
    } else if anomaly {
        format!("no section of degree <= {d} although soluble at every place of degree <= {place_bound}; bounds are finite, not a refutation")
    } else if section_found {
        "global section found".to_string()
    } else {
        "some places inconclusive and no section found within the bounds".to_string()
    };
    Ok(HasseVerdict {
        degree_bound: d,
        place_bound,
        depth,
        section_budget: budget,
        node_budget: DEFAULT_NODE_BUDGET,
        places,
        locally_soluble,
        enumeration_run: !insoluble,
        section_found,
        sections,
        anomaly,
        note,
    })
}
