//! Dense univariate polynomials over a finite field.

use crate::gf::{Fe, Field};

/// Little-endian coefficients, no trailing zeros. The zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UPoly(pub Vec<Fe>);

impl UPoly {
    pub fn zero() -> UPoly {
        UPoly(Vec::new())
    }

    pub fn constant(c: Fe) -> UPoly {
        UPoly::new(vec![c])
    }

    pub fn x() -> UPoly {
        UPoly(vec![Fe::ZERO, Fe::ONE])
    }

    pub fn new(mut c: Vec<Fe>) -> UPoly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        UPoly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Fe {
        self.0.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn lead(&self) -> Fe {
        self.0.last().copied().unwrap_or(Fe::ZERO)
    }

    pub fn add(&self, o: &UPoly, f: &Field) -> UPoly {
        let n = self.0.len().max(o.0.len());
        UPoly::new((0..n).map(|i| f.add(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &UPoly, f: &Field) -> UPoly {
        let n = self.0.len().max(o.0.len());
        UPoly::new((0..n).map(|i| f.sub(self.coeff(i), o.coeff(i))).collect())
    }

    pub fn scale(&self, c: Fe, f: &Field) -> UPoly {
        UPoly::new(self.0.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, o: &UPoly, f: &Field) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![Fe::ZERO; self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in o.0.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        UPoly::new(out)
    }

    pub fn eval(&self, x: Fe, f: &Field) -> Fe {
        self.0.iter().rev().fold(Fe::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn derivative(&self, f: &Field) -> UPoly {
        UPoly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| f.mul(c, f.from_int(i as i64)))
                .collect(),
        )
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, d: &UPoly, f: &Field) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead_inv = f.inv(d.lead()).unwrap();
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (UPoly::zero(), self.clone());
        }
        let mut q = vec![Fe::ZERO; r.len() - dd];
        for top in (dd..r.len()).rev() {
            let c = f.mul(r[top], lead_inv);
            if c.is_zero() {
                continue;
            }
            q[top - dd] = c;
            for (i, &di) in d.0.iter().enumerate() {
                let idx = top - dd + i;
                r[idx] = f.sub(r[idx], f.mul(c, di));
            }
        }
        (UPoly::new(q), UPoly::new(r))
    }

    pub fn rem(&self, d: &UPoly, f: &Field) -> UPoly {
        self.divrem(d, f).1
    }

    pub fn monic(&self, f: &Field) -> UPoly {
        match f.inv(self.lead()) {
            Some(i) => self.scale(i, f),
            None => UPoly::zero(),
        }
    }

    pub fn gcd(&self, o: &UPoly, f: &Field) -> UPoly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b, f);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// `self^e mod m`.
    pub fn powmod(&self, mut e: u64, m: &UPoly, f: &Field) -> UPoly {
        let mut result = UPoly::constant(Fe::ONE).rem(m, f);
        let mut base = self.rem(m, f);
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, f).rem(m, f);
            }
            base = base.mul(&base, f).rem(m, f);
            e >>= 1;
        }
        result
    }

    /// Number of distinct roots in `f`, via `gcd(g, x^q - x)`.
    pub fn count_distinct_roots(&self, f: &Field) -> usize {
        match self.degree() {
            None => f.size() as usize,
            Some(0) => 0,
            Some(1) => 1,
            Some(_) => {
                let g = self.monic(f);
                let xq = UPoly::x().powmod(f.size() as u64, &g, f);
                let h = xq.sub(&UPoly::x(), f);
                g.gcd(&h, f).degree().unwrap_or(0)
            }
        }
    }

    /// Distinct roots in `f`, in canonical-index order.
    pub fn roots(&self, f: &Field) -> Vec<Fe> {
        match self.degree() {
            None => f.elements().collect(),
            Some(0) => vec![],
            Some(1) => vec![f.neg(f.div(self.0[0], self.0[1]).unwrap())],
            Some(_) => {
                let g = self.monic(f);
                let n = g.count_distinct_roots(f);
                if n == 0 {
                    return vec![];
                }
                let mut out: Vec<Fe> = f.elements().filter(|&x| g.eval(x, f).is_zero()).take(n).collect();
                out.sort_by_key(|&x| f.index(x));
                out
            }
        }
    }

    /// Multiplicity of `r` as a root.
    pub fn root_multiplicity(&self, r: Fe, f: &Field) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let lin = UPoly::new(vec![f.neg(r), Fe::ONE]);
        let mut p = self.clone();
        let mut m = 0;
        loop {
            let (q, rem) = p.divrem(&lin, f);
            if !rem.is_zero() {
                return m;
            }
            m += 1;
            p = q;
        }
    }
}
