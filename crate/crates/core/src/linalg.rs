//! Exact linear algebra over `F_q` and determinants over `F_q[t]`.

use crate::gf::{Fe, Field};
use crate::ring::Series;
use crate::upoly::UPoly;

/// Reduced row echelon form; returns the matrix and pivot columns.
pub fn rref(m: &[Vec<Fe>], f: &Field) -> (Vec<Vec<Fe>>, Vec<usize>) {
    let mut a: Vec<Vec<Fe>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = f.inv(a[r][c]).unwrap();
        for x in a[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c];
                for j in 0..cols {
                    let v = f.mul(factor, a[r][j]);
                    a[i][j] = f.sub(a[i][j], v);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &[Vec<Fe>], f: &Field) -> usize {
    rref(m, f).1.len()
}

/// Basis of `{x : M x = 0}`.
pub fn kernel(m: &[Vec<Fe>], ncols: usize, f: &Field) -> Vec<Vec<Fe>> {
    if m.is_empty() {
        return (0..ncols).map(|i| unit(ncols, i)).collect();
    }
    let (a, pivots) = rref(m, f);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Fe::ZERO; ncols];
            v[fc] = Fe::ONE;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(a[r][fc]);
            }
            v
        })
        .collect()
}

/// One solution of `M x = b`, or `None` when the system is inconsistent.
pub fn solve(m: &[Vec<Fe>], b: &[Fe], ncols: usize, f: &Field) -> Option<Vec<Fe>> {
    let aug: Vec<Vec<Fe>> = m.iter().zip(b).map(|(r, &c)| r.iter().copied().chain([c]).collect()).collect();
    let (a, pivots) = rref(&aug, f);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![Fe::ZERO; ncols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = a[r][ncols];
    }
    Some(x)
}

pub fn unit(n: usize, i: usize) -> Vec<Fe> {
    let mut v = vec![Fe::ZERO; n];
    v[i] = Fe::ONE;
    v
}

pub fn identity(n: usize) -> Vec<Vec<Fe>> {
    (0..n).map(|i| unit(n, i)).collect()
}

pub fn det(m: &[Vec<Fe>], f: &Field) -> Fe {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Fe::ONE;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else { return Fe::ZERO };
        if p != c {
            a.swap(p, c);
            d = f.neg(d);
        }
        d = f.mul(d, a[c][c]);
        let inv = f.inv(a[c][c]).unwrap();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let factor = f.mul(a[i][c], inv);
            for j in c..n {
                let v = f.mul(factor, a[c][j]);
                a[i][j] = f.sub(a[i][j], v);
            }
        }
    }
    d
}

pub fn inverse(m: &[Vec<Fe>], f: &Field) -> Option<Vec<Vec<Fe>>> {
    let n = m.len();
    let aug: Vec<Vec<Fe>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().copied().chain(unit(n, i)).collect())
        .collect();
    let (a, pivots) = rref(&aug, f);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul(a: &[Vec<Fe>], b: &[Vec<Fe>], f: &Field) -> Vec<Vec<Fe>> {
    let k = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols).map(|j| (0..k).fold(Fe::ZERO, |acc, x| f.add(acc, f.mul(row[x], b[x][j])))).collect()
        })
        .collect()
}

pub fn mat_vec(a: &[Vec<Fe>], v: &[Fe], f: &Field) -> Vec<Fe> {
    a.iter().map(|row| row.iter().zip(v).fold(Fe::ZERO, |acc, (&x, &y)| f.add(acc, f.mul(x, y)))).collect()
}

pub fn transpose(a: &[Vec<Fe>]) -> Vec<Vec<Fe>> {
    let cols = a.first().map_or(0, |r| r.len());
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// An invertible matrix whose first rows span the given rows (which must be independent
/// after dropping dependent ones). Returns the matrix and how many input rows were kept.
pub fn complete_rows(rows: &[Vec<Fe>], n: usize, f: &Field) -> (Vec<Vec<Fe>>, usize) {
    let mut out: Vec<Vec<Fe>> = Vec::new();
    for r in rows {
        let mut trial = out.clone();
        trial.push(r.clone());
        if rank(&trial, f) == trial.len() {
            out = trial;
        }
    }
    let kept = out.len();
    for i in 0..n {
        let mut trial = out.clone();
        trial.push(unit(n, i));
        if rank(&trial, f) == trial.len() {
            out = trial;
        }
    }
    (out, kept)
}

/// An invertible matrix whose first columns are the given vectors (kept when independent).
pub fn complete_columns(cols: &[Vec<Fe>], n: usize, f: &Field) -> (Vec<Vec<Fe>>, usize) {
    let (rows, kept) = complete_rows(cols, n, f);
    (transpose(&rows), kept)
}

/// Determinant over `F_q[t]` by fraction-free elimination.
pub fn det_upoly(m: &[Vec<UPoly>], f: &Field) -> UPoly {
    let n = m.len();
    if n == 0 {
        return UPoly::constant(Fe::ONE);
    }
    let mut a = m.to_vec();
    let mut prev = UPoly::constant(Fe::ONE);
    let mut sign = false;
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else { return UPoly::zero() };
            a.swap(k, p);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[k][k].mul(&a[i][j], f).sub(&a[i][k].mul(&a[k][j], f), f);
                let (q, r) = num.divrem(&prev, f);
                debug_assert!(r.is_zero(), "fraction-free elimination must divide exactly");
                a[i][j] = q;
            }
            a[i][k] = UPoly::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        d.scale(f.neg(Fe::ONE), f)
    } else {
        d
    }
}

/// Determinant of a matrix of series: exact when all entries are exact,
/// otherwise known modulo the smallest entry precision.
pub fn det_series(m: &[Vec<Series>], f: &Field) -> Series {
    let prec = min_precision(m.iter().flatten());
    let polys: Vec<Vec<UPoly>> = m.iter().map(|r| r.iter().map(|c| c.to_upoly()).collect()).collect();
    let d = det_upoly(&polys, f);
    match prec {
        None => Series::from_upoly(&d),
        Some(n) => Series::truncated(d.0, n),
    }
}

pub fn min_precision<'a>(it: impl IntoIterator<Item = &'a Series>) -> Option<usize> {
    it.into_iter().filter_map(|c| c.precision()).min()
}
