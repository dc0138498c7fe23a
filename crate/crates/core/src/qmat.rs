//! Dense matrices over `Q`.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num::{One, Zero};

use crate::dvr::{fmt_rat, val_p, Rat, Valuation};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn diag(entries: &[Rat]) -> Self {
        let mut m = QMat::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        QMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        QMat::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rat::from_integer(x.into())).collect())
                .collect(),
        )
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_cols(n: usize, cols: &[Vec<Rat>]) -> Self {
        let mut m = QMat::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &Rat> {
        self.data.iter()
    }

    pub fn transpose(&self) -> QMat {
        let mut t = QMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn scale(&self, s: &Rat) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn neg(&self) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| -x).collect() }
    }

    pub fn add(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// `[self | other]`
    pub fn hcat(&self, other: &QMat) -> QMat {
        assert_eq!(self.rows, other.rows);
        let mut m = QMat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        m
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> QMat {
        let mut m = QMat::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// `col[dst] += f * col[src]`
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, f: &Rat) {
        if f.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = &self[(i, src)];
            if !s.is_zero() {
                let t = s * f;
                self[(i, dst)] += t;
            }
        }
    }

    /// `row[dst] += f * row[src]`
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, f: &Rat) {
        if f.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = &self[(src, j)];
            if !s.is_zero() {
                let t = s * f;
                self[(dst, j)] += t;
            }
        }
    }

    pub fn scale_col(&mut self, j: usize, f: &Rat) {
        for i in 0..self.rows {
            self[(i, j)] *= f;
        }
    }

    pub fn scale_row(&mut self, i: usize, f: &Rat) {
        for j in 0..self.cols {
            self[(i, j)] *= f;
        }
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<QMat> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = QMat::identity(n);
        for c in 0..n {
            let piv = (c..n).find(|&r| !a[(r, c)].is_zero())?;
            a.swap_rows(c, piv);
            inv.swap_rows(c, piv);
            let f = a[(c, c)].recip();
            a.scale_row(c, &f);
            inv.scale_row(c, &f);
            for r in 0..n {
                if r != c && !a[(r, c)].is_zero() {
                    let f = -a[(r, c)].clone();
                    a.add_row_multiple(r, c, &f);
                    inv.add_row_multiple(r, c, &f);
                }
            }
        }
        Some(inv)
    }

    pub fn det(&self) -> Rat {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rat::one();
        for c in 0..n {
            let Some(piv) = (c..n).find(|&r| !a[(r, c)].is_zero()) else {
                return Rat::zero();
            };
            if piv != c {
                a.swap_rows(c, piv);
                det = -det;
            }
            let d = a[(c, c)].clone();
            det *= &d;
            for r in c + 1..n {
                if !a[(r, c)].is_zero() {
                    let f = -(&a[(r, c)] / &d);
                    a.add_row_multiple(r, c, &f);
                }
            }
        }
        det
    }

    pub fn min_valuation(&self, p: u64) -> Valuation {
        self.data.iter().map(|x| val_p(x, p)).min().unwrap_or(Valuation::Infinite)
    }

    /// All entries lie in the valuation ring `Z_(p)`.
    pub fn is_integral(&self, p: u64) -> bool {
        self.min_valuation(p) >= Valuation::Finite(0)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }
}

impl Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &QMat {
    type Output = QMat;
    fn mul(self, rhs: &QMat) -> QMat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in product");
        let mut out = QMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", fmt_rat(&self[(i, j)]))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let m = QMat::from_i64(&[&[2, 1], &[1, 2]]);
        assert_eq!(m.det(), Rat::from_integer(3.into()));
        let inv = m.inverse().unwrap();
        assert_eq!(&m * &inv, QMat::identity(2));
        assert!(QMat::from_i64(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn display_uses_fractions() {
        let m = QMat::diag(&[Rat::new(1.into(), 5.into()), Rat::from_integer((-3).into())]);
        assert_eq!(m.to_string(), "[[1/5, 0], [0, -3]]");
    }

    #[test]
    fn empty_matrices() {
        let m = QMat::identity(0);
        assert_eq!(m.det(), Rat::one());
        assert_eq!(m.inverse(), Some(QMat::zeros(0, 0)));
    }
}
