//! Linear algebra and polynomials over the prime field `F_p`.

use std::fmt;
use std::ops::{Index, IndexMut};

use num::BigUint;
use rand::Rng;

use crate::dvr::{inv_mod, residue_p};
use crate::error::Result;
use crate::qmat::QMat;

/// Dense matrix over `F_p`; entries are kept in `[0, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpMat {
    p: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl FpMat {
    pub fn zeros(p: u64, rows: usize, cols: usize) -> Self {
        FpMat { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut m = FpMat::zeros(p, n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(p: u64, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = FpMat::zeros(p, r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = x.rem_euclid(p as i64) as u64;
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(p: u64, n: usize, cols: &[Vec<u64>]) -> Self {
        let mut m = FpMat::zeros(p, n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    /// Entrywise residue of a matrix over `Z_(p)`.
    pub fn from_qmat(q: &QMat, p: u64) -> Result<Self> {
        let mut m = FpMat::zeros(p, q.rows(), q.cols());
        for i in 0..q.rows() {
            for j in 0..q.cols() {
                m[(i, j)] = residue_p(&q[(i, j)], p)?;
            }
        }
        Ok(m)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn transpose(&self) -> FpMat {
        let mut t = FpMat::zeros(self.p, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, rhs: &FpMat) -> FpMat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let p = self.p;
        let mut out = FpMat::zeros(p, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                let orow = i * rhs.cols;
                let rrow = k * rhs.cols;
                for j in 0..rhs.cols {
                    out.data[orow + j] = (out.data[orow + j] + a * rhs.data[rrow + j]) % p;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len());
        let p = self.p;
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(0, |acc, (a, b)| (acc + a * b) % p))
            .collect()
    }

    pub fn add(&self, other: &FpMat) -> FpMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let p = self.p;
        FpMat {
            p,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| (a + b) % p).collect(),
        }
    }

    pub fn scale(&self, s: u64) -> FpMat {
        let p = self.p;
        FpMat { p, rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * (s % p) % p).collect() }
    }

    pub fn neg(&self) -> FpMat {
        self.scale(self.p - 1)
    }

    pub fn hcat(&self, other: &FpMat) -> FpMat {
        assert_eq!(self.rows, other.rows);
        let mut m = FpMat::zeros(self.p, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)];
            }
        }
        m
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> FpMat {
        let mut m = FpMat::zeros(self.p, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)];
            }
        }
        m
    }

    pub fn block_diag(p: u64, blocks: &[&FpMat]) -> FpMat {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut m = FpMat::zeros(p, n, n);
        let mut off = 0;
        for b in blocks {
            assert_eq!(b.rows, b.cols);
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(off + i, off + j)] = b[(i, j)];
                }
            }
            off += b.rows;
        }
        m
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (FpMat, Vec<usize>) {
        let p = self.p;
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let Some(piv) = (r..a.rows).find(|&i| a[(i, c)] != 0) else {
                continue;
            };
            a.swap_rows(r, piv);
            let inv = inv_mod(a[(r, c)], p);
            for j in 0..a.cols {
                a[(r, j)] = a[(r, j)] * inv % p;
            }
            for i in 0..a.rows {
                let f = a[(i, c)];
                if i != r && f != 0 {
                    for j in 0..a.cols {
                        a[(i, j)] = (a[(i, j)] + (p - f) * a[(r, j)]) % p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of `{v : A v = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0; self.cols];
                v[f] = 1;
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = (p - r[(i, f)]) % p;
                }
                v
            })
            .collect()
    }

    pub fn inverse(&self) -> Option<FpMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = FpMat::zeros(self.p, n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)];
            }
            aug[(i, n + i)] = 1;
        }
        if n == 0 {
            return Some(FpMat::zeros(self.p, 0, 0));
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return None;
        }
        let idx: Vec<usize> = (0..n).collect();
        let right: Vec<usize> = (n..2 * n).collect();
        Some(r.submatrix(&idx, &right))
    }

    pub fn det(&self) -> u64 {
        assert_eq!(self.rows, self.cols);
        let p = self.p;
        let n = self.rows;
        let mut a = self.clone();
        let mut det = 1;
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| a[(r, c)] != 0) else {
                return 0;
            };
            if piv != c {
                a.swap_rows(c, piv);
                det = (p - det) % p;
            }
            det = det * a[(c, c)] % p;
            let inv = inv_mod(a[(c, c)], p);
            for r in c + 1..n {
                let f = a[(r, c)] * inv % p;
                if f != 0 {
                    for j in c..n {
                        a[(r, j)] = (a[(r, j)] + (p - f) * a[(c, j)]) % p;
                    }
                }
            }
        }
        det
    }

    pub fn is_invertible(&self) -> bool {
        self.rows == self.cols && self.det() != 0
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// Characteristic polynomial `det(x I - A)`, via Hessenberg reduction.
    pub fn charpoly(&self) -> FpPoly {
        assert_eq!(self.rows, self.cols);
        let p = self.p;
        let n = self.rows;
        let mut h = self.clone();
        for m in 1..n.saturating_sub(1) {
            let Some(i) = (m..n).find(|&i| h[(i, m - 1)] != 0) else {
                continue;
            };
            if i != m {
                h.swap_rows(i, m);
                h.swap_cols(i, m);
            }
            let tinv = inv_mod(h[(m, m - 1)], p);
            for i in m + 1..n {
                let u = h[(i, m - 1)] * tinv % p;
                if u == 0 {
                    continue;
                }
                for j in 0..n {
                    h[(i, j)] = (h[(i, j)] + (p - u) * h[(m, j)]) % p;
                }
                for r in 0..n {
                    h[(r, m)] = (h[(r, m)] + u * h[(r, i)]) % p;
                }
            }
        }
        let mut polys = vec![FpPoly::one(p)];
        for m in 0..n {
            let lin = FpPoly::new(p, vec![(p - h[(m, m)]) % p, 1]);
            let mut next = lin.mul(&polys[m]);
            let mut t = 1u64;
            for i in (0..m).rev() {
                t = t * h[(i + 1, i)] % p;
                let c = h[(i, m)] * t % p;
                if c != 0 {
                    next = next.sub(&polys[i].scale(c));
                }
            }
            polys.push(next);
        }
        polys.pop().unwrap()
    }

    /// `f(A)` by Horner's rule.
    pub fn eval_poly(&self, f: &FpPoly) -> FpMat {
        let n = self.rows;
        let mut acc = FpMat::zeros(self.p, n, n);
        for &c in f.coeffs.iter().rev() {
            acc = acc.mul(self);
            for i in 0..n {
                acc[(i, i)] = (acc[(i, i)] + c) % self.p;
            }
        }
        acc
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && *self == self.transpose()
    }

    /// Skew-symmetric with zero diagonal.
    pub fn is_alternating(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| self[(i, i)] == 0)
            && self.add(&self.transpose()).is_zero()
    }
}

impl Index<(usize, usize)> for FpMat {
    type Output = u64;
    fn index(&self, (i, j): (usize, usize)) -> &u64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for FpMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut u64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for FpMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let r: Vec<String> = self.row(i).iter().map(u64::to_string).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Polynomial over `F_p`, coefficients from the constant term up, with no
/// trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, mut coeffs: Vec<u64>) -> Self {
        for c in coeffs.iter_mut() {
            *c %= p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        FpPoly { p, coeffs }
    }

    pub fn zero(p: u64) -> Self {
        FpPoly { p, coeffs: vec![] }
    }

    pub fn one(p: u64) -> Self {
        FpPoly { p, coeffs: vec![1] }
    }

    pub fn x(p: u64) -> Self {
        FpPoly::new(p, vec![0, 1])
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn lead(&self) -> u64 {
        *self.coeffs.last().unwrap_or(&0)
    }

    pub fn monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(inv_mod(self.lead(), self.p))
    }

    pub fn scale(&self, s: u64) -> FpPoly {
        FpPoly::new(self.p, self.coeffs.iter().map(|c| c * (s % self.p) % self.p).collect())
    }

    pub fn add(&self, o: &FpPoly) -> FpPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let c = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0) + o.coeffs.get(i).unwrap_or(&0))
            .collect();
        FpPoly::new(self.p, c)
    }

    pub fn sub(&self, o: &FpPoly) -> FpPoly {
        self.add(&o.scale(self.p - 1))
    }

    pub fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly::zero(self.p);
        }
        let p = self.p;
        let mut c = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] = (c[i + j] + a * b) % p;
            }
        }
        FpPoly::new(p, c)
    }

    pub fn divrem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let p = self.p;
        let mut r = self.coeffs.clone();
        let dl = d.coeffs.len();
        if r.len() < dl {
            return (FpPoly::zero(p), self.clone());
        }
        let inv = inv_mod(d.lead(), p);
        let mut q = vec![0u64; r.len() - dl + 1];
        for k in (0..q.len()).rev() {
            let c = r[k + dl - 1] * inv % p;
            q[k] = c;
            if c != 0 {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[k + j] = (r[k + j] + (p - c) * dc) % p;
                }
            }
        }
        (FpPoly::new(p, q), FpPoly::new(p, r))
    }

    pub fn rem(&self, d: &FpPoly) -> FpPoly {
        self.divrem(d).1
    }

    pub fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> FpPoly {
        let p = self.p;
        let c = self.coeffs.iter().enumerate().skip(1).map(|(i, c)| (i as u64 % p) * c % p).collect();
        FpPoly::new(p, c)
    }

    fn powmod(&self, e: &BigUint, m: &FpPoly) -> FpPoly {
        let mut result = FpPoly::one(self.p).rem(m);
        let base = self.rem(m);
        for i in (0..e.bits()).rev() {
            result = result.mul(&result).rem(m);
            if e.bit(i) {
                result = result.mul(&base).rem(m);
            }
        }
        result
    }

    /// The distinct monic irreducible factors, sorted by degree then
    /// coefficients. Randomness only affects running time.
    pub fn irreducible_factors<G: Rng>(&self, rng: &mut G) -> Vec<FpPoly> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        for piece in squarefree_pieces(&self.monic()) {
            for (g, d) in distinct_degree(&piece) {
                equal_degree(&g, d, rng, &mut out);
            }
        }
        out.sort_by(|a, b| (a.degree(), &a.coeffs).cmp(&(b.degree(), &b.coeffs)));
        out.dedup();
        out
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "x".into(),
                (1, c) => format!("{c}x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}x^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Squarefree monic polynomials whose irreducible factors are exactly those
/// of `f`.
fn squarefree_pieces(f: &FpPoly) -> Vec<FpPoly> {
    if f.degree() == 0 {
        return vec![];
    }
    let p = f.p;
    let d = f.derivative();
    if d.is_zero() {
        // f(x) = g(x^p) = g(x)^p over F_p
        let g = FpPoly::new(p, f.coeffs.iter().step_by(p as usize).copied().collect());
        return squarefree_pieces(&g);
    }
    let g = f.gcd(&d);
    let mut out = vec![f.divrem(&g).0.monic()];
    out.retain(|q| q.degree() > 0);
    out.extend(squarefree_pieces(&g));
    out
}

fn distinct_degree(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.p;
    let mut out = Vec::new();
    let mut f = f.clone();
    let x = FpPoly::x(p);
    let mut h = x.rem(&f);
    let mut d = 0;
    let pe = BigUint::from(p);
    while f.degree() >= 2 * (d + 1) {
        d += 1;
        h = h.powmod(&pe, &f);
        let g = h.sub(&x).gcd(&f);
        if g.degree() > 0 {
            f = f.divrem(&g).0.monic();
            h = h.rem(&f);
            out.push((g, d));
        }
    }
    if f.degree() > 0 {
        let d = f.degree();
        out.push((f, d));
    }
    out
}

fn equal_degree<G: Rng>(g: &FpPoly, d: usize, rng: &mut G, out: &mut Vec<FpPoly>) {
    if g.degree() == d {
        out.push(g.monic());
        return;
    }
    let p = g.p;
    loop {
        let a = FpPoly::new(p, (0..g.degree()).map(|_| rng.gen_range(0..p)).collect());
        if a.degree() == 0 {
            continue;
        }
        let b = if p == 2 {
            let mut t = a.rem(g);
            let mut acc = t.clone();
            for _ in 1..d {
                t = t.mul(&t).rem(g);
                acc = acc.add(&t);
            }
            acc
        } else {
            let e = (BigUint::from(p).pow(d as u32) - 1u32) / 2u32;
            a.powmod(&e, g).sub(&FpPoly::one(p))
        };
        let h = b.gcd(g);
        if h.degree() > 0 && h.degree() < g.degree() {
            let rest = g.divrem(&h).0.monic();
            equal_degree(&h, d, rng, out);
            equal_degree(&rest, d, rng, out);
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_is_irreducible(f: &FpPoly) -> bool {
        // trial division by every monic polynomial of degree 1..=deg/2
        let p = f.p;
        let n = f.degree();
        for d in 1..=n / 2 {
            let count = p.pow(d as u32);
            for k in 0..count {
                let mut c = Vec::with_capacity(d + 1);
                let mut t = k;
                for _ in 0..d {
                    c.push(t % p);
                    t /= p;
                }
                c.push(1);
                if f.rem(&FpPoly::new(p, c)).is_zero() {
                    return false;
                }
            }
        }
        n > 0
    }

    #[test]
    fn charpoly_matches_two_by_two_formula() {
        let m = FpMat::from_rows(7, &[vec![1, 2], vec![3, 4]]);
        // x^2 - 5x - 2
        assert_eq!(m.charpoly(), FpPoly::new(7, vec![5, 2, 1]));
    }

    #[test]
    fn charpoly_annihilates_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 0..7 {
            let rows: Vec<Vec<i64>> =
                (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..5)).collect()).collect();
            let m = FpMat::from_rows(5, &rows);
            let cp = m.charpoly();
            assert_eq!(cp.degree(), n);
            assert!(m.eval_poly(&cp).is_zero());
            assert_eq!(cp.coeffs().first().copied().unwrap_or(1), {
                let d = m.det();
                if n % 2 == 0 { d } else { (5 - d) % 5 }
            });
        }
    }

    #[test]
    fn factors_are_irreducible_and_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [2u64, 3, 5, 7] {
            for _ in 0..40 {
                let deg = rng.gen_range(1..9);
                let mut c: Vec<u64> = (0..deg).map(|_| rng.gen_range(0..p)).collect();
                c.push(1);
                let f = FpPoly::new(p, c);
                let factors = f.irreducible_factors(&mut rng);
                let mut rest = f.clone();
                for g in &factors {
                    assert!(brute_is_irreducible(g), "{g} not irreducible");
                    assert!(f.rem(g).is_zero());
                    while rest.rem(g).is_zero() {
                        rest = rest.divrem(g).0;
                    }
                }
                assert_eq!(rest.degree(), 0, "{f} not fully factored: {factors:?}");
            }
        }
    }

    #[test]
    fn repeated_and_inseparable_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // (x - 1)^3 over F_3 = x^3 - 1
        let f = FpPoly::new(3, vec![2, 0, 0, 1]);
        assert_eq!(f.irreducible_factors(&mut rng), vec![FpPoly::new(3, vec![2, 1])]);
        // (x^2 + 1)^2 over F_3
        let g = FpPoly::new(3, vec![1, 0, 1]);
        assert_eq!(g.mul(&g).irreducible_factors(&mut rng), vec![g]);
    }

    #[test]
    fn nullspace_and_inverse() {
        let m = FpMat::from_rows(5, &[vec![1, 2, 3], vec![2, 4, 0]]);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(m.mul_vec(&ns[0]).iter().all(|&x| x == 0));
        let a = FpMat::from_rows(5, &[vec![1, 2], vec![3, 4]]);
        assert_eq!(a.mul(&a.inverse().unwrap()), FpMat::identity(5, 2));
        assert!(FpMat::from_rows(5, &[vec![1, 2], vec![2, 4]]).inverse().is_none());
    }
}
