//! Plant-and-recover conic bundles over P^1 over F_3.

use rand::Rng;

use semistab::census::{bezout, hasse_probe, plant, BundleModel, LocalSolubility, PlaceOutcome, DEFAULT_SECTION_BUDGET};
use semistab::gf::{Fe, Field};
use semistab::poly::{HomogForm, Monomial};
use semistab::ring::Series;
use semistab::upoly::UPoly;

use crate::gen;
use crate::Outcome;

const DEGREE_BOUND: usize = 4;
const PLACE_BOUND: usize = 2;
const DEPTH: usize = 8;

/// The conic degenerates only at finitely many places: its Gram determinant is nonzero.
fn smooth_generic_fiber(m: &BundleModel, f: &Field) -> bool {
    let g: HomogForm = m.equations[0].map(|c| Series::exact(c.0.clone()));
    let c = |e: [u8; 3]| UPoly::new(g.coeff(&Monomial(e.to_vec())).coeffs().to_vec());
    let two = f.from_int(2);
    let h = [
        [c([2, 0, 0]).scale(two, f), c([1, 1, 0]), c([1, 0, 1])],
        [c([1, 1, 0]), c([0, 2, 0]).scale(two, f), c([0, 1, 1])],
        [c([1, 0, 1]), c([0, 1, 1]), c([0, 0, 2]).scale(two, f)],
    ];
    let minor = |a: usize, b: usize, x: usize, y: usize| h[a][x].mul(&h[b][y], f).sub(&h[a][y].mul(&h[b][x], f), f);
    let det = h[0][0].mul(&minor(1, 2, 1, 2), f).sub(&h[0][1].mul(&minor(1, 2, 0, 2), f), f).add(&h[0][2].mul(&minor(1, 2, 0, 1), f), f);
    !det.is_zero()
}

fn normalized(s: &[UPoly], f: &Field) -> Vec<UPoly> {
    let lead = s.iter().find(|c| !c.is_zero()).unwrap().lead();
    s.iter().map(|c| c.scale(f.inv(lead).unwrap(), f)).collect()
}

pub fn hasse_probe_runs() -> Outcome {
    let f = Field::prime(3).unwrap();
    let mut rng = gen::rng(10);
    let mut log = Vec::new();
    let (mut ok, mut runs, mut planted_found) = (0, 0, 0);
    while runs < 20 {
        let deg = rng.gen_range(0..=3);
        let s: Vec<UPoly> = (0..3).map(|_| UPoly::new((0..=deg).map(|_| gen::fe(&f, &mut rng)).collect())).collect();
        if bezout(&s, &f).is_none() {
            continue;
        }
        let m = plant(&f, &s, 2, 1, 1, &mut rng).unwrap();
        if !smooth_generic_fiber(&m, &f) {
            continue;
        }
        runs += 1;
        match hasse_probe(&m, DEGREE_BOUND, PLACE_BOUND, DEPTH, DEFAULT_SECTION_BUDGET) {
            Ok(v) => {
                let all_local = v.locally_soluble && v.places.iter().all(|p| matches!(p, PlaceOutcome::Soluble { .. }));
                let sections = v.sections.as_ref().map(|l| l.sections.as_slice()).unwrap_or(&[]);
                let exact = sections.iter().all(|c| c.verify(&m));
                let target = normalized(&s, &f);
                let planted = s.iter().filter_map(|c| c.degree()).max().unwrap_or(0) <= DEGREE_BOUND && sections.iter().any(|c| c.coords == target);
                planted_found += planted as usize;
                if all_local && v.section_found && exact && !v.anomaly {
                    ok += 1;
                } else {
                    let odd: Vec<String> = v
                        .places
                        .iter()
                        .filter_map(|p| match p {
                            PlaceOutcome::Soluble { .. } => None,
                            PlaceOutcome::Insoluble { report } => Some(format!("{} insoluble", report.place.name)),
                            PlaceOutcome::Inconclusive { place, reason } => Some(format!("{}: {reason}", place.name)),
                        })
                        .collect();
                    log.push(format!("run {runs}: found {}, exact {exact}, places {odd:?}", v.section_found));
                }
            }
            Err(e) => log.push(format!("run {runs}: {e}")),
        }
    }
    // X0^2 + X1^2 - t X2^2
    let terms = [
        (Monomial(vec![2, 0, 0]), UPoly::constant(Fe::ONE)),
        (Monomial(vec![0, 2, 0]), UPoly::constant(Fe::ONE)),
        (Monomial(vec![0, 0, 2]), UPoly::new(vec![Fe::ZERO, f.from_int(-1)])),
    ];
    let conic = semistab::census::BundleForm::from_terms(3, 2, terms, &f).unwrap();
    let m = BundleModel::minimal(&f, vec![conic]).unwrap();
    let obstructed = match hasse_probe(&m, DEGREE_BOUND, PLACE_BOUND, DEPTH, DEFAULT_SECTION_BUDGET) {
        Ok(v) => match &v.places[0] {
            PlaceOutcome::Insoluble { report } => {
                report.place.name == "t" && matches!(report.outcome, LocalSolubility::Insoluble { .. }) && !v.enumeration_run
            }
            _ => false,
        },
        Err(e) => {
            log.push(format!("insoluble conic: {e}"));
            false
        }
    };
    log.truncate(5);
    let pass = ok == 20 && obstructed;
    let detail = format!("{ok}/20 locally soluble with a section at D = {DEGREE_BOUND} ({planted_found} the planted one), X0^2+X1^2-tX2^2 insoluble at t = 0: {obstructed}");
    Outcome { pass, detail, log }
}
