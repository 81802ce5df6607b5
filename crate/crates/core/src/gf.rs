//! Finite fields `F_{p^k}` for odd `p`.
//!
//! Every field is a quotient `F_p[x]/(m)` with `m` monic irreducible. Elements
//! are stored as discrete logarithms with respect to a primitive element, so
//! multiplication is an addition of exponents and addition goes through a
//! Zech-logarithm table. The canonical encoding of an element is its
//! coefficient vector read as a base-`p` integer (little-endian), see
//! [`Field::index`].
//!
//! Fields are cached: building `F_{7^3}` twice returns the same `Arc`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest field cardinality we build tables for.
pub const MAX_FIELD_SIZE: u64 = 1 << 23;

/// Description of a finite field: characteristic, degree over `F_p` and the
/// defining modulus (little-endian coefficients, monic, length `degree + 1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub degree: u32,
    pub modulus: Vec<u32>,
    /// Degree over `F_p` of the ground field Frobenius is taken relative to.
    pub ground_degree: u32,
}

impl FieldSpec {
    /// The prime field `F_p`.
    pub fn prime(p: u32) -> Result<FieldSpec> {
        FieldSpec::new(p, vec![0, 1])
    }

    /// A field from an explicit modulus; Frobenius is relative to `F_p`.
    pub fn new(p: u32, modulus: Vec<u32>) -> Result<FieldSpec> {
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(Error::InvalidField(format!("{p} is not an odd prime")));
        }
        if modulus.len() < 2 {
            return Err(Error::InvalidField("modulus has degree 0".into()));
        }
        if *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidField("modulus is not monic".into()));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField("modulus coefficients not reduced mod p".into()));
        }
        if !fp::is_irreducible(&modulus, p) {
            return Err(Error::InvalidField(format!("modulus {modulus:?} is reducible over F_{p}")));
        }
        let degree = (modulus.len() - 1) as u32;
        Ok(FieldSpec { p, degree, modulus, ground_degree: 1 })
    }

    pub fn size(&self) -> u64 {
        (self.p as u64).pow(self.degree)
    }

    /// Cardinality of the ground field for Frobenius.
    pub fn ground_size(&self) -> u64 {
        (self.p as u64).pow(self.ground_degree)
    }
}

/// Lexicographically least monic irreducible polynomial of the given degree
/// over `F_p`. Polynomials are ordered by the base-`p` integer
/// `c_0 + c_1 p + ... + c_{k-1} p^{k-1}` of their non-leading coefficients.
pub fn least_irreducible(p: u32, degree: u32) -> Vec<u32> {
    let count = (p as u64).pow(degree);
    for code in 0..count {
        let mut m = Vec::with_capacity(degree as usize + 1);
        let mut c = code;
        for _ in 0..degree {
            m.push((c % p as u64) as u32);
            c /= p as u64;
        }
        m.push(1);
        if fp::is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// `F_{q^degree}` where `F_q` is `base`, with the least irreducible modulus
/// over `F_p`. Frobenius on the result is relative to `F_q`.
pub fn make_extension(base: &FieldSpec, degree: u32) -> Result<FieldSpec> {
    if degree == 0 {
        return Err(Error::InvalidField("extension degree must be >= 1".into()));
    }
    let total = base.degree * degree;
    let modulus = least_irreducible(base.p, total);
    Ok(FieldSpec { p: base.p, degree: total, modulus, ground_degree: base.degree })
}

/// A field element: `0` is zero, otherwise `1 + log_g(x)`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Fe(u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            write!(f, "0")
        } else {
            write!(f, "g^{}", self.0 - 1)
        }
    }
}

/// Arithmetic tables for one finite field.
pub struct Field {
    spec: FieldSpec,
    q: u32,
    order: u32,
    /// log -> canonical index
    exp_idx: Vec<u32>,
    /// canonical index -> element
    from_idx: Vec<Fe>,
    /// n -> 1 + g^n
    zech: Vec<Fe>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{} mod {:?}", self.spec.p, self.spec.degree, self.spec.modulus)
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn cache() -> &'static Mutex<HashMap<FieldSpec, Arc<Field>>> {
    static CACHE: OnceLock<Mutex<HashMap<FieldSpec, Arc<Field>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl Field {
    /// Build (or fetch from the cache) the field described by `spec`.
    pub fn new(spec: &FieldSpec) -> Result<Arc<Field>> {
        if let Some(f) = cache().lock().unwrap().get(spec) {
            return Ok(f.clone());
        }
        let size = spec.size();
        if size > MAX_FIELD_SIZE {
            return Err(Error::InvalidField(format!("field of size {size} is too large")));
        }
        let field = Arc::new(Field::build(spec.clone()));
        cache().lock().unwrap().insert(spec.clone(), field.clone());
        Ok(field)
    }

    /// `F_p`.
    pub fn prime(p: u32) -> Result<Arc<Field>> {
        Field::new(&FieldSpec::prime(p)?)
    }

    /// `F_{p^k}` with the least irreducible modulus, ground field `F_p`.
    pub fn gf(p: u32, k: u32) -> Result<Arc<Field>> {
        let base = FieldSpec::prime(p)?;
        let mut spec = make_extension(&base, k)?;
        spec.ground_degree = 1;
        Field::new(&spec)
    }

    /// `F_{q^degree}` over this field.
    pub fn extension(&self, degree: u32) -> Result<Arc<Field>> {
        Field::new(&make_extension(&self.spec, degree)?)
    }

    fn build(spec: FieldSpec) -> Field {
        let p = spec.p;
        let k = spec.degree as usize;
        let q = (p as u64).pow(spec.degree) as u32;
        let order = q - 1;
        let m = &spec.modulus;
        let encode = |v: &[u32]| -> u32 {
            let mut acc = 0u64;
            for &c in v.iter().rev() {
                acc = acc * p as u64 + c as u64;
            }
            acc as u32
        };
        let decode = |mut i: u32| -> Vec<u32> {
            let mut v = vec![0u32; k];
            for c in v.iter_mut() {
                *c = i % p;
                i /= p;
            }
            v
        };
        let prime_factors = factor(order as u64);
        let mut generator = None;
        for cand in 1..q {
            let g = decode(cand);
            if prime_factors
                .iter()
                .all(|&r| fp::powmod(&g, order as u64 / r, m, p) != fp::one(k))
            {
                generator = Some(g);
                break;
            }
        }
        let g = generator.expect("multiplicative group is cyclic");
        let mut exp_idx = Vec::with_capacity(order as usize);
        let mut from_idx = vec![Fe::ZERO; q as usize];
        let mut cur = fp::one(k);
        for l in 0..order {
            let idx = encode(&cur);
            exp_idx.push(idx);
            from_idx[idx as usize] = Fe(l + 1);
            cur = fp::mulmod(&cur, &g, m, p);
        }
        let mut zech = Vec::with_capacity(order as usize);
        for n in 0..order {
            let mut v = decode(exp_idx[n as usize]);
            v[0] = (v[0] + 1) % p;
            zech.push(from_idx[encode(&v) as usize]);
        }
        Field { spec, q, order, exp_idx, from_idx, zech }
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }
    pub fn p(&self) -> u32 {
        self.spec.p
    }
    pub fn size(&self) -> u32 {
        self.q
    }
    pub fn degree(&self) -> u32 {
        self.spec.degree
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        let (la, lb) = (a.0 - 1, b.0 - 1);
        let n = if lb >= la { lb - la } else { lb + self.order - la };
        let z = self.zech[n as usize];
        if z.0 == 0 {
            Fe::ZERO
        } else {
            self.mul(a, z)
        }
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let s = (a.0 - 1) as u64 + (b.0 - 1) as u64;
        Fe((s % self.order as u64) as u32 + 1)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.0 == 0 {
            return a;
        }
        // -1 = g^((q-1)/2)
        let l = (a.0 - 1 + self.order / 2) % self.order;
        Fe(l + 1)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            None
        } else {
            Some(Fe((self.order - (a.0 - 1)) % self.order + 1))
        }
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Fe, e: u64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        if a.0 == 0 {
            return Fe::ZERO;
        }
        let l = ((a.0 - 1) as u128 * e as u128) % self.order as u128;
        Fe(l as u32 + 1)
    }

    /// The image of an integer.
    pub fn from_int(&self, n: i64) -> Fe {
        let r = n.rem_euclid(self.spec.p as i64) as u32;
        self.from_index(r)
    }

    /// Element with the given canonical index (base-`p` coefficient code).
    pub fn from_index(&self, i: u32) -> Fe {
        self.from_idx[i as usize]
    }

    /// Canonical index of an element.
    pub fn index(&self, a: Fe) -> u32 {
        if a.0 == 0 {
            0
        } else {
            self.exp_idx[(a.0 - 1) as usize]
        }
    }

    /// Coefficient vector (little-endian in the modulus basis).
    pub fn coeffs(&self, a: Fe) -> Vec<u32> {
        let mut i = self.index(a);
        let p = self.spec.p;
        (0..self.spec.degree)
            .map(|_| {
                let c = i % p;
                i /= p;
                c
            })
            .collect()
    }

    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fe> {
        if coeffs.len() > self.spec.degree as usize {
            return Err(Error::Invalid(format!(
                "element has {} coefficients, field degree is {}",
                coeffs.len(),
                self.spec.degree
            )));
        }
        let p = self.spec.p as u64;
        let mut acc = 0u64;
        for &c in coeffs.iter().rev() {
            acc = acc * p + (c as u64 % p);
        }
        Ok(self.from_index(acc as u32))
    }

    /// The root `x` of the modulus.
    pub fn generator(&self) -> Fe {
        if self.spec.degree == 1 {
            // modulus x - c; our moduli here are `x`, root 0
            let c = (self.spec.p - self.spec.modulus[0]) % self.spec.p;
            self.from_index(c)
        } else {
            self.from_index(self.spec.p)
        }
    }

    /// All elements in canonical-index order.
    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.q).map(|i| self.from_idx[i as usize])
    }

    /// `x^(q0^power)` with `q0` the ground field size.
    pub fn frobenius(&self, a: Fe, power: i64) -> Fe {
        let k = (self.spec.degree / self.spec.ground_degree) as i64;
        let e = power.rem_euclid(k.max(1)) as u32;
        let q0 = self.spec.ground_size();
        let mut x = a;
        for _ in 0..e {
            x = self.pow(x, q0);
        }
        x
    }

    /// True when `a` lies in the subfield of size `p^d` (`d` must divide the degree).
    pub fn in_subfield(&self, a: Fe, d: u32) -> bool {
        self.pow(a, (self.spec.p as u64).pow(d)) == a
    }

    /// A square root with the smaller canonical index, or `None`.
    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        if a.0 == 0 {
            return Some(a);
        }
        let l = a.0 - 1;
        if l % 2 == 1 {
            return None;
        }
        let r = Fe(l / 2 + 1);
        let s = self.neg(r);
        Some(if self.index(r) <= self.index(s) { r } else { s })
    }

    pub fn is_square(&self, a: Fe) -> bool {
        a.0 == 0 || (a.0 - 1) % 2 == 0
    }
}

/// `sqrt_or_none` as a free function.
pub fn sqrt_or_none(field: &Field, a: Fe) -> Option<Fe> {
    field.sqrt(a)
}

/// `frobenius` as a free function.
pub fn frobenius(field: &Field, a: Fe, power: i64) -> Fe {
    field.frobenius(a, power)
}

/// Field homomorphism from a subfield into an extension, stored as a table
/// over the canonical indices of the source.
#[derive(Clone)]
pub struct Embedding {
    pub source: Arc<Field>,
    pub target: Arc<Field>,
    table: Vec<Fe>,
}

impl fmt::Debug for Embedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Embedding({:?} -> {:?})", self.source, self.target)
    }
}

impl Embedding {
    /// Embeds `source` into `target`, sending the root of the source modulus to
    /// the root of least canonical index in `target`.
    pub fn new(source: &Arc<Field>, target: &Arc<Field>) -> Result<Embedding> {
        let (s, t) = (source.spec(), target.spec());
        if s.p != t.p || t.degree % s.degree != 0 {
            return Err(Error::InvalidField(format!("{source:?} does not embed in {target:?}")));
        }
        let eval_mod = |y: Fe| {
            let mut acc = Fe::ZERO;
            for &c in s.modulus.iter().rev() {
                acc = target.add(target.mul(acc, y), target.from_int(c as i64));
            }
            acc
        };
        let root = target
            .elements()
            .find(|&y| eval_mod(y).is_zero())
            .ok_or_else(|| Error::InvalidField("no root of source modulus".into()))?;
        let mut powers = vec![Fe::ONE];
        for _ in 1..s.degree {
            let last = *powers.last().unwrap();
            powers.push(target.mul(last, root));
        }
        let table = (0..source.size())
            .map(|i| {
                let c = source.coeffs(source.from_index(i));
                c.iter().zip(&powers).fold(Fe::ZERO, |acc, (&ci, &pw)| {
                    target.add(acc, target.mul(target.from_int(ci as i64), pw))
                })
            })
            .collect();
        Ok(Embedding { source: source.clone(), target: target.clone(), table })
    }

    /// Like [`Embedding::new`], memoized per pair of fields.
    pub fn cached(source: &Arc<Field>, target: &Arc<Field>) -> Result<Arc<Embedding>> {
        type Key = (FieldSpec, FieldSpec);
        static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Embedding>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (source.spec().clone(), target.spec().clone());
        if let Some(e) = cache.lock().unwrap().get(&key) {
            return Ok(e.clone());
        }
        let e = Arc::new(Embedding::new(source, target)?);
        cache.lock().unwrap().insert(key, e.clone());
        Ok(e)
    }

    pub fn identity(field: &Arc<Field>) -> Embedding {
        Embedding {
            source: field.clone(),
            target: field.clone(),
            table: field.elements().collect(),
        }
    }

    #[inline]
    pub fn apply(&self, a: Fe) -> Fe {
        self.table[self.source.index(a) as usize]
    }

    /// Preimage of `b`, when `b` lies in the image.
    pub fn preimage(&self, b: Fe) -> Option<Fe> {
        (0..self.source.size())
            .map(|i| self.source.from_index(i))
            .find(|&a| self.apply(a) == b)
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn factor(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense polynomial arithmetic over `F_p`, used only to set up fields.
pub(crate) mod fp {
    pub fn trim(v: &mut Vec<u32>) {
        while v.last() == Some(&0) {
            v.pop();
        }
    }

    pub fn one(k: usize) -> Vec<u32> {
        let mut v = vec![0; k];
        v[0] = 1;
        v
    }

    fn inv(a: u32, p: u32) -> u32 {
        let mut r = 1u64;
        let mut b = a as u64;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p as u64;
            }
            b = b * b % p as u64;
            e >>= 1;
        }
        r as u32
    }

    pub fn rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let dm = m.len() - 1;
        let lead_inv = inv(m[dm], p);
        while r.len() > dm {
            let top = r.len() - 1;
            let c = r[top] as u64 * lead_inv as u64 % p as u64;
            for i in 0..=dm {
                let idx = top - dm + i;
                r[idx] = ((r[idx] as u64 + (p as u64 - c) * m[i] as u64) % p as u64) as u32;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let mut v: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
        trim(&mut v);
        v
    }

    /// Product reduced mod `m`, padded to `deg m` coefficients.
    pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
        let mut r = rem(&mul(a, b, p), m, p);
        r.resize(m.len() - 1, 0);
        r
    }

    pub fn powmod(a: &[u32], mut e: u64, m: &[u32], p: u32) -> Vec<u32> {
        let k = m.len() - 1;
        let mut result = one(k);
        let mut base = rem(a, m, p);
        base.resize(k, 0);
        while e > 0 {
            if e & 1 == 1 {
                result = mulmod(&result, &base, m, p);
            }
            base = mulmod(&base, &base, m, p);
            e >>= 1;
        }
        result
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let n = a.len().max(b.len());
        let mut v: Vec<u32> = (0..n)
            .map(|i| {
                let x = *a.get(i).unwrap_or(&0);
                let y = *b.get(i).unwrap_or(&0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut v);
        v
    }

    /// Rabin's irreducibility test.
    pub fn is_irreducible(m: &[u32], p: u32) -> bool {
        let k = m.len() - 1;
        if k == 1 {
            return true;
        }
        let x = vec![0, 1];
        let xpow = |i: u32| powmod(&x, (p as u64).pow(i), m, p);
        if sub(&xpow(k as u32), &x, p).iter().any(|&c| c != 0) {
            return false;
        }
        for r in super::factor(k as u64) {
            let d = (k as u64 / r) as u32;
            let g = gcd(m, &sub(&xpow(d), &x, p), p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn fields() -> impl Strategy<Value = Arc<Field>> {
        (prop::sample::select(vec![3u32, 5, 7]), 1u32..=4).prop_map(|(p, k)| Field::gf(p, k).unwrap())
    }

    proptest! {
        #[test]
        fn field_axioms(f in fields(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
            let q = f.size();
            let (x, y, z) = (f.from_index(a % q), f.from_index(b % q), f.from_index(c % q));
            prop_assert_eq!(f.add(f.add(x, y), z), f.add(x, f.add(y, z)));
            prop_assert_eq!(f.mul(f.mul(x, y), z), f.mul(x, f.mul(y, z)));
            prop_assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
            prop_assert_eq!(f.add(x, f.neg(x)), Fe::ZERO);
            if !x.is_zero() {
                prop_assert_eq!(f.mul(x, f.inv(x).unwrap()), Fe::ONE);
            }
            // addition agrees with coefficient-wise addition
            let (cx, cy) = (f.coeffs(x), f.coeffs(y));
            let sum: Vec<u32> = cx.iter().zip(&cy).map(|(a, b)| (a + b) % f.p()).collect();
            prop_assert_eq!(f.coeffs(f.add(x, y)), sum);
        }
    }
}
