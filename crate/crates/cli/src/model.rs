//! The text model format.
//!
//! ```text
//! semistab-model 1
//! field p=3 k=2
//! geometry nvars=3 degree=2 kind=form
//! seed 7
//! bundle infinity=1
//! section 1 ; 0 ; 0,1
//! equation
//! term 2,0,0 : 1
//! term 0,0,2 : 0,1 +O(8)
//! ```
//!
//! A coefficient is a comma-separated list of field elements, the coefficient of `t^i`
//! at position `i`, optionally followed by `+O(N)` for a truncated series. An element is
//! a decimal integer (reduced mod `p`) or `(c0 c1 ...)` in the basis of the modulus.

use std::fmt::Write as _;
use std::sync::Arc;

use semistab::census::{BundleForm, BundleModel};
use semistab::gf::{Fe, Field, FieldSpec};
use semistab::poly::{HomogForm, Monomial};
use semistab::reduce::ModelState;
use semistab::ring::Series;
use semistab::upoly::UPoly;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Form,
    Pencil,
}

#[derive(Clone, Debug)]
pub struct ModelFile {
    pub field: Arc<Field>,
    pub nvars: usize,
    pub degree: u32,
    pub kind: Kind,
    pub equations: Vec<HomogForm>,
    pub section: Option<Vec<Series>>,
    /// Homogenization degrees at infinity; present for bundle models.
    pub bundle: Option<Vec<usize>>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

type PResult<T> = std::result::Result<T, ParseError>;

struct Cursor<'a> {
    line: usize,
    text: &'a str,
}

impl Cursor<'_> {
    fn err<T>(&self, at: &str, message: impl Into<String>) -> PResult<T> {
        // byte offset of `at` inside the line, 1-based
        let column = (at.as_ptr() as usize).saturating_sub(self.text.as_ptr() as usize) + 1;
        Err(ParseError { line: self.line, column, message: message.into() })
    }
}

fn key_values<'a>(c: &Cursor<'a>, rest: &'a str) -> PResult<Vec<(&'a str, &'a str)>> {
    rest.split_whitespace()
        .map(|kv| match kv.split_once('=') {
            Some(p) => Ok(p),
            None => c.err(kv, format!("expected key=value, found `{kv}`")),
        })
        .collect()
}

fn parse_num<T: std::str::FromStr>(c: &Cursor<'_>, s: &str, what: &str) -> PResult<T> {
    s.trim().parse().or_else(|_| c.err(s, format!("invalid {what} `{}`", s.trim())))
}

fn parse_element(c: &Cursor<'_>, s: &str, f: &Field) -> PResult<Fe> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
        let p = f.p() as i64;
        let coeffs: Vec<u32> = inner
            .split_whitespace()
            .map(|x| parse_num::<i64>(c, x, "element coefficient").map(|v| v.rem_euclid(p) as u32))
            .collect::<PResult<_>>()?;
        return f.from_coeffs(&coeffs).or_else(|e| c.err(s, e.to_string()));
    }
    Ok(f.from_int(parse_num::<i64>(c, t, "field element")?))
}

fn parse_series(c: &Cursor<'_>, s: &str, f: &Field) -> PResult<Series> {
    let (body, prec) = match s.split_once("+O(") {
        Some((b, p)) => match p.trim().strip_suffix(')') {
            Some(n) => (b, Some(parse_num::<usize>(c, n, "precision")?)),
            None => return c.err(p, "unclosed +O("),
        },
        None => (s, None),
    };
    let coeffs: Vec<Fe> = if body.trim().is_empty() {
        vec![]
    } else {
        body.split(',').map(|x| parse_element(c, x, f)).collect::<PResult<_>>()?
    };
    Ok(match prec {
        None => Series::exact(coeffs),
        Some(n) => Series::truncated(coeffs, n),
    })
}

pub fn parse(text: &str) -> PResult<ModelFile> {
    let mut version = None;
    let mut field: Option<Arc<Field>> = None;
    let mut geometry: Option<(usize, u32, Kind)> = None;
    let mut seed = None;
    let mut bundle = None;
    let mut section_line: Option<(usize, String)> = None;
    let mut equations: Vec<Vec<(Monomial, Series)>> = Vec::new();
    let mut term_records = 0usize;
    for (i, raw) in text.lines().enumerate() {
        let c = Cursor { line: i + 1, text: raw };
        let line = raw.split('#').next().unwrap();
        if line.trim().is_empty() {
            continue;
        }
        let (head, rest) = line.trim_start().split_once(char::is_whitespace).unwrap_or((line.trim(), ""));
        match head {
            "semistab-model" => {
                let v: u32 = parse_num(&c, rest, "format version")?;
                if v != FORMAT_VERSION {
                    return c.err(rest, format!("unsupported format version {v}"));
                }
                version = Some(v);
            }
            "field" => {
                let kvs = key_values(&c, rest)?;
                let mut p = None;
                let mut k = None;
                let mut modulus = None;
                for (key, val) in kvs {
                    match key {
                        "p" => p = Some(parse_num::<u32>(&c, val, "prime")?),
                        "k" => k = Some(parse_num::<u32>(&c, val, "extension degree")?),
                        "modulus" => {
                            modulus = Some(val.split(',').map(|x| parse_num::<u32>(&c, x, "modulus coefficient")).collect::<PResult<Vec<_>>>()?)
                        }
                        _ => return c.err(key, format!("unknown field key `{key}`")),
                    }
                }
                let Some(p) = p else { return c.err(rest, "field needs p=") };
                let built = match (k, modulus) {
                    (_, Some(m)) => FieldSpec::new(p, m).and_then(|s| Field::new(&s)),
                    (Some(k), None) if k > 1 => Field::gf(p, k),
                    _ => Field::prime(p),
                };
                field = Some(built.or_else(|e| c.err(rest, e.to_string()))?);
            }
            "geometry" => {
                let (mut n, mut d, mut kind) = (None, None, Kind::Form);
                for (key, val) in key_values(&c, rest)? {
                    match key {
                        "nvars" => n = Some(parse_num::<usize>(&c, val, "nvars")?),
                        "degree" => d = Some(parse_num::<u32>(&c, val, "degree")?),
                        "kind" => {
                            kind = match val {
                                "form" => Kind::Form,
                                "pencil" => Kind::Pencil,
                                _ => return c.err(val, format!("unknown kind `{val}`")),
                            }
                        }
                        _ => return c.err(key, format!("unknown geometry key `{key}`")),
                    }
                }
                match (n, d) {
                    (Some(n), Some(d)) if n >= 1 => geometry = Some((n, d, kind)),
                    _ => return c.err(rest, "geometry needs nvars= and degree="),
                }
            }
            "seed" => seed = Some(parse_num::<u64>(&c, rest, "seed")?),
            "bundle" => {
                let mut degs = None;
                for (key, val) in key_values(&c, rest)? {
                    match key {
                        "infinity" => degs = Some(val.split(',').map(|x| parse_num::<usize>(&c, x, "degree")).collect::<PResult<Vec<_>>>()?),
                        _ => return c.err(key, format!("unknown bundle key `{key}`")),
                    }
                }
                bundle = Some(degs.unwrap_or_default());
            }
            "section" => section_line = Some((i + 1, raw.to_string())),
            "equation" => equations.push(Vec::new()),
            "term" => {
                term_records += 1;
                let (Some(f), Some((n, d, _))) = (&field, geometry) else {
                    return c.err(head, "term before the field and geometry lines");
                };
                let Some(eq) = equations.last_mut() else { return c.err(head, "term before any `equation` line") };
                let Some((exps, coef)) = rest.split_once(':') else {
                    return c.err(rest, format!("term record {term_records}: expected `exponents : coefficients`"));
                };
                let e: Vec<u8> = exps
                    .split(',')
                    .map(|x| parse_num::<u8>(&c, x, &format!("exponent in term record {term_records}")))
                    .collect::<PResult<_>>()?;
                if e.len() != n {
                    return c.err(exps, format!("term record {term_records}: exponent vector has {} entries, expected {n}", e.len()));
                }
                let total: u32 = e.iter().map(|&x| x as u32).sum();
                if total != d {
                    return c.err(exps, format!("term record {term_records}: monomial of degree {total} in a form of degree {d}"));
                }
                eq.push((Monomial(e), parse_series(&c, coef, f)?));
            }
            _ => return c.err(head, format!("unknown record `{head}`")),
        }
    }
    let at_end = |message: &str| ParseError { line: text.lines().count().max(1), column: 1, message: message.into() };
    if version.is_none() {
        return Err(at_end("missing `semistab-model` header"));
    }
    let field = field.ok_or_else(|| at_end("missing field line"))?;
    let (nvars, degree, kind) = geometry.ok_or_else(|| at_end("missing geometry line"))?;
    let want = match kind {
        Kind::Form => 1,
        Kind::Pencil => 2,
    };
    if equations.len() != want || (kind == Kind::Pencil && degree != 2) {
        return Err(at_end(&format!("{kind:?} of degree {degree} needs {want} equation(s), found {}", equations.len())));
    }
    let equations: Vec<HomogForm> = equations
        .into_iter()
        .map(|terms| HomogForm::from_terms(nvars, degree, terms, &field).map_err(|e| at_end(&e.to_string())))
        .collect::<PResult<_>>()?;
    let section = match section_line {
        None => None,
        Some((ln, raw)) => {
            let c = Cursor { line: ln, text: &raw };
            let body = raw.split('#').next().unwrap().trim_start().strip_prefix("section").unwrap();
            let coords: Vec<Series> = body.split(';').map(|x| parse_series(&c, x, &field)).collect::<PResult<_>>()?;
            if coords.len() != nvars {
                return c.err(body, format!("section has {} coordinates, expected {nvars}", coords.len()));
            }
            Some(coords)
        }
    };
    if let Some(b) = &bundle {
        if !b.is_empty() && b.len() != equations.len() {
            return Err(at_end("bundle infinity= needs one degree per equation"));
        }
    }
    Ok(ModelFile { field, nvars, degree, kind, equations, section, bundle, seed })
}

fn write_element(a: Fe, f: &Field) -> String {
    let c = f.coeffs(a);
    if c[1..].iter().all(|&x| x == 0) {
        c[0].to_string()
    } else {
        let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        format!("({})", parts.join(" "))
    }
}

fn write_series(s: &Series, f: &Field) -> String {
    let body: Vec<String> = s.coeffs().iter().map(|&a| write_element(a, f)).collect();
    let mut out = if body.is_empty() { "0".to_string() } else { body.join(",") };
    if let Some(n) = s.precision() {
        if body.is_empty() {
            out.clear();
        }
        write!(out, " +O({n})").unwrap();
    }
    out
}

/// Canonical text: fixed record order, terms in monomial order, no comments.
pub fn write(m: &ModelFile) -> String {
    let f = &*m.field;
    let spec = f.spec();
    let mut out = format!("semistab-model {FORMAT_VERSION}\n");
    if spec.degree == 1 {
        writeln!(out, "field p={}", spec.p).unwrap();
    } else {
        let modulus: Vec<String> = spec.modulus.iter().map(|c| c.to_string()).collect();
        writeln!(out, "field p={} modulus={}", spec.p, modulus.join(",")).unwrap();
    }
    let kind = match m.kind {
        Kind::Form => "form",
        Kind::Pencil => "pencil",
    };
    writeln!(out, "geometry nvars={} degree={} kind={kind}", m.nvars, m.degree).unwrap();
    if let Some(s) = m.seed {
        writeln!(out, "seed {s}").unwrap();
    }
    if let Some(b) = &m.bundle {
        let degs: Vec<String> = b.iter().map(|d| d.to_string()).collect();
        writeln!(out, "bundle infinity={}", degs.join(",")).unwrap();
    }
    if let Some(sec) = &m.section {
        let coords: Vec<String> = sec.iter().map(|c| write_series(c, f)).collect();
        writeln!(out, "section {}", coords.join(" ; ")).unwrap();
    }
    for eq in &m.equations {
        out.push_str("equation\n");
        for (mono, c) in eq.terms() {
            let e: Vec<String> = mono.0.iter().map(|x| x.to_string()).collect();
            writeln!(out, "term {} : {}", e.join(","), write_series(c, f)).unwrap();
        }
    }
    out
}

impl ModelFile {
    pub fn from_state(template: &ModelFile, state: &ModelState) -> ModelFile {
        ModelFile {
            field: state.field.clone(),
            equations: state.equations.clone(),
            section: state.section.clone(),
            bundle: None,
            ..template.clone()
        }
    }

    pub fn state(&self) -> semistab::Result<ModelState> {
        let s = match self.kind {
            Kind::Form => ModelState::single(&self.field, self.equations[0].clone())?,
            Kind::Pencil => ModelState::pencil(&self.field, self.equations[0].clone(), self.equations[1].clone())?,
        };
        match &self.section {
            Some(x) => s.with_section(x.clone()),
            None => Ok(s),
        }
    }

    /// The equations read as polynomials in `t`, for census runs.
    pub fn bundle_model(&self) -> semistab::Result<BundleModel> {
        let mut eqs = Vec::new();
        for g in &self.equations {
            if !g.is_exact() {
                return Err(semistab::Error::Invalid("bundle coefficients must be exact polynomials in t".into()));
            }
            let terms = g.terms().iter().map(|(m, c)| (m.clone(), UPoly::new(c.coeffs().to_vec())));
            eqs.push(BundleForm::from_terms(self.nvars, self.degree, terms, &self.field)?);
        }
        match &self.bundle {
            Some(d) if !d.is_empty() => BundleModel::new(&self.field, eqs, d.clone()),
            _ => BundleModel::minimal(&self.field, eqs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = "\
semistab-model 1
field p=3 k=2
geometry nvars=3 degree=2 kind=form
seed 7
bundle infinity=1
section 1 ; 0 ; 0,1
equation
term 2,0,0 : 1
term 0,1,1 : (0 1),2
term 0,0,2 : 0,1 +O(8)
";

    #[test]
    fn write_then_parse_is_identity() {
        let m = parse(SAMPLE).unwrap();
        let text = write(&m);
        let back = parse(&text).unwrap();
        assert_eq!(back.equations, m.equations);
        assert_eq!(back.section, m.section);
        assert_eq!((back.seed, back.bundle.clone()), (Some(7), Some(vec![1])));
        assert_eq!(write(&back), text);
    }

    #[test]
    fn coefficients_reduce_mod_p() {
        let a = parse("semistab-model 1\nfield p=5\ngeometry nvars=2 degree=1 kind=form\nequation\nterm 1,0 : 7\nterm 0,1 : 10,6\n").unwrap();
        let b = parse("semistab-model 1\nfield p=5\ngeometry nvars=2 degree=1 kind=form\nequation\nterm 1,0 : 2\nterm 0,1 : 0,1\n").unwrap();
        assert_eq!(a.equations, b.equations);
    }

    #[test]
    fn errors_carry_position_and_record() {
        let e = parse("semistab-model 1\nfield p=5\ngeometry nvars=3 degree=2 kind=form\nequation\nterm 2,0,0 : 1\nterm 1,0,0 : 1\n").unwrap_err();
        assert_eq!(e.line, 6);
        assert!(e.message.contains("term record 2"), "{e}");
        let e = parse("semistab-model 1\nfield p=4\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse("semistab-model 9\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 16));
    }

    #[test]
    fn missing_equations_is_an_error() {
        assert!(parse("semistab-model 1\nfield p=5\ngeometry nvars=3 degree=2 kind=form\n").is_err());
        assert!(parse("semistab-model 1\nfield p=5\ngeometry nvars=3 degree=2 kind=pencil\nequation\nterm 2,0,0 : 1\n").is_err());
    }

    fn random_model() -> impl Strategy<Value = String> {
        let term = (0u8..=2, 0u8..=2, prop::collection::vec(0u32..9, 1..4), prop::option::of(4usize..9));
        (prop::sample::select(vec![3u32, 5, 7]), prop::collection::vec(term, 1..6)).prop_map(|(p, terms)| {
            let mut s = format!("semistab-model 1\nfield p={p}\ngeometry nvars=3 degree=2 kind=form\nequation\n");
            for (a, b, c, prec) in terms {
                let (a, b) = if a + b > 2 { (2, 0) } else { (a, b) };
                let coeff: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                let tail = prec.map(|n| format!(" +O({n})")).unwrap_or_default();
                s.push_str(&format!("term {a},{b},{} : {}{tail}\n", 2 - a - b, coeff.join(",")));
            }
            s
        })
    }

    proptest! {
        #[test]
        fn canonical_form_is_a_fixed_point(text in random_model()) {
            let m = parse(&text).unwrap();
            let once = write(&m);
            let back = parse(&once).unwrap();
            prop_assert_eq!(&back.equations, &m.equations);
            prop_assert_eq!(write(&back), once);
        }
    }
}
