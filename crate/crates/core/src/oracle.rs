//! Slow, independent reference computations used to cross-check the main
//! algorithms.

use std::collections::{BTreeSet, HashSet};

use num::Zero;

use crate::dvr::{val_p, Rat, Valuation};
use crate::error::Result;
use crate::lattices::{compatible_splitting, Lattice, TorsionModule};
use crate::qmat::QMat;
use crate::witt::{is_square_mod, FpDiagForm};

/// Basis of `{x ∈ R^k : A x = 0}` (columns), by column echelon reduction of
/// `A` with unimodular transforms over `Z_(p)`.
pub fn r_kernel(a: &QMat, p: u64) -> QMat {
    let rows = a.rows();
    let k = a.cols();
    let mut a = a.clone();
    let mut u = QMat::identity(k);
    let mut col = 0;
    for r in 0..rows {
        if col == k {
            break;
        }
        let mut best: Option<(usize, i64)> = None;
        for c in col..k {
            if let Valuation::Finite(v) = val_p(&a[(r, c)], p) {
                if best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((c, v));
                }
            }
        }
        let Some((c, _)) = best else { continue };
        a.swap_cols(col, c);
        u.swap_cols(col, c);
        let piv = a[(r, col)].clone();
        for c in col + 1..k {
            if !a[(r, c)].is_zero() {
                let f = -(&a[(r, c)] / &piv);
                a.add_col_multiple(c, col, &f);
                u.add_col_multiple(c, col, &f);
            }
        }
        col += 1;
    }
    let all: Vec<usize> = (0..k).collect();
    let rest: Vec<usize> = (col..k).collect();
    u.submatrix(&all, &rest)
}

/// `L ∩ M` as `{P a : P a = Q b}` from the kernel of `[P | -Q]`.
pub fn intersection_by_kernel(l: &Lattice, m: &Lattice) -> Result<Lattice> {
    let pb = l.basis();
    let qb = m.basis();
    let n = l.dim();
    if n == 0 {
        return Ok(l.clone());
    }
    let ker = r_kernel(&pb.hcat(&qb.neg()), l.p());
    let top: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (0..ker.cols()).collect();
    let a = ker.submatrix(&top, &cols);
    Lattice::from_generators(&(&pb * &a), l.p())
}

/// `(m₋, m₊)` read off coordinatewise from a compatible splitting: with
/// `L = (+) R x_i` and `M = (+) p^d_i R x_i`, the middles have exponents
/// `ceil(d_i / 2)` and `floor(d_i / 2)`.
pub fn middles_by_splitting(l: &Lattice, m: &Lattice) -> Result<(Lattice, Lattice)> {
    let c = compatible_splitting(l, m)?;
    let lo: Vec<i64> = c.exponents_m.iter().map(|&d| d.div_euclid(2) + d.rem_euclid(2)).collect();
    let hi: Vec<i64> = c.exponents_m.iter().map(|&d| d.div_euclid(2)).collect();
    Ok((c.lattice_with(&lo), c.lattice_with(&hi)))
}

/// The explicit group `(+) Z/p^e_i` with elements as coordinate vectors.
pub struct ExplicitTorsion {
    p: u64,
    moduli: Vec<u64>,
}

type Subgroup = BTreeSet<Vec<u64>>;

impl ExplicitTorsion {
    pub fn new(p: u64, t: &TorsionModule) -> ExplicitTorsion {
        ExplicitTorsion { p, moduli: t.exponents().iter().map(|&e| p.pow(e)).collect() }
    }

    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &m in &self.moduli {
            out = out.into_iter().flat_map(|v: Vec<u64>| (0..m).map(move |x| [v.clone(), vec![x]].concat())).collect();
        }
        out
    }

    fn mul(&self, v: &[u64], k: u64) -> Vec<u64> {
        v.iter().zip(&self.moduli).map(|(x, m)| x * (k % m) % m).collect()
    }

    fn add(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        a.iter().zip(b).zip(&self.moduli).map(|((x, y), m)| (x + y) % m).collect()
    }

    pub fn image_pi(&self, n: u32) -> Subgroup {
        let k = self.p.pow(n);
        self.elements().iter().map(|v| self.mul(v, k)).collect()
    }

    pub fn kernel_pi(&self, n: u32) -> Subgroup {
        let k = self.p.pow(n);
        self.elements().into_iter().filter(|v| self.mul(v, k).iter().all(|&x| x == 0)).collect()
    }

    pub fn sum(&self, a: &Subgroup, b: &Subgroup) -> Subgroup {
        a.iter().flat_map(|x| b.iter().map(move |y| self.add(x, y))).collect()
    }

    pub fn scale(&self, a: &Subgroup, k: u64) -> Subgroup {
        a.iter().map(|x| self.mul(x, k)).collect()
    }

    /// `Σ_n (Im π^n ∩ Ker π^n)` and `∩_n (Im π^n + Ker π^n)` over all `n`.
    pub fn middles(&self) -> (Subgroup, Subgroup) {
        let top = self.moduli.iter().map(|m| m.ilog(self.p.max(2))).max().unwrap_or(0) + 1;
        let zero: Subgroup = [vec![0; self.moduli.len()]].into();
        let mut lower = zero;
        let mut upper: Subgroup = self.elements().into_iter().collect();
        for n in 0..=top {
            let im = self.image_pi(n);
            let ker = self.kernel_pi(n);
            let cap: Subgroup = im.intersection(&ker).cloned().collect();
            lower = self.sum(&lower, &cap);
            let plus = self.sum(&im, &ker);
            upper = upper.intersection(&plus).cloned().collect();
        }
        (lower, upper)
    }

    /// Isomorphism type of the subgroup `s`, from its `p^k`-torsion counts.
    pub fn type_of(&self, s: &Subgroup) -> TorsionModule {
        self.type_from_counts(|k| s.iter().filter(|v| self.mul(v, self.p.pow(k)).iter().all(|&x| x == 0)).count())
    }

    /// Isomorphism type of `T / s`.
    pub fn quotient_type(&self, s: &Subgroup) -> TorsionModule {
        let all = self.elements();
        self.type_from_counts(|k| {
            let hits = all.iter().filter(|v| s.contains(&self.mul(v, self.p.pow(k)))).count();
            hits / s.len()
        })
    }

    fn type_from_counts(&self, count: impl Fn(u32) -> usize) -> TorsionModule {
        // log_p |G[p^k]| = Σ_j min(f_j, k); its increments count the f_j >= k
        let logs: Vec<u32> = (0..=8).map(|k| (count(k) as u64).ilog(self.p)).collect();
        let at_least: Vec<u32> = (1..logs.len()).map(|k| logs[k] - logs[k - 1]).collect();
        let mut exps = Vec::new();
        for k in 1..=at_least.len() {
            let next = at_least.get(k).copied().unwrap_or(0);
            for _ in 0..(at_least[k - 1] - next) {
                exps.push(k as u32);
            }
        }
        TorsionModule::new(exps)
    }

    pub fn is_subset(a: &Subgroup, b: &Subgroup) -> bool {
        a.is_subset(b)
    }
}

/// Anisotropic kernel of a diagonal form over `F_p`, found by splitting off
/// hyperbolic planes around exhaustively found isotropic vectors. Returns
/// the kernel's rank and, for rank 1, whether its entry is a square.
pub fn anisotropic_kernel(d: &FpDiagForm) -> (usize, Option<bool>) {
    let p = d.p();
    let r = d.entries().len();
    let mut g: Vec<Vec<u64>> = (0..r).map(|i| (0..r).map(|j| if i == j { d.entries()[i] } else { 0 }).collect()).collect();
    loop {
        let n = g.len();
        let b = |x: &[u64], y: &[u64], g: &Vec<Vec<u64>>| -> u64 {
            let mut s = 0;
            for i in 0..n {
                for j in 0..n {
                    s = (s + x[i] * g[i][j] % p * y[j]) % p;
                }
            }
            s
        };
        let vecs = all_vectors(p, n);
        let Some(v) = vecs.iter().find(|v| v.iter().any(|&x| x != 0) && b(v, v, &g) == 0).cloned() else {
            return match n {
                1 => (1, Some(is_square_mod(g[0][0], p))),
                n => (n, None),
            };
        };
        let w = vecs.iter().find(|w| b(&v, w, &g) != 0).cloned().expect("nondegenerate");
        // orthogonal complement of span(v, w)
        let comp: Vec<Vec<u64>> = vecs.iter().filter(|x| b(&v, x, &g) == 0 && b(&w, x, &g) == 0).cloned().collect();
        let basis = span_basis(p, &comp);
        g = (0..basis.len()).map(|i| (0..basis.len()).map(|j| b(&basis[i], &basis[j], &g)).collect()).collect();
    }
}

fn all_vectors(p: u64, n: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v: Vec<u64>| (0..p).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

fn span_basis(p: u64, vs: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let mut s = crate::modrep::Subspace::new(p, vs.first().map_or(0, Vec::len));
    let mut out = Vec::new();
    for v in vs {
        if s.insert(v.clone()) {
            out.push(v.clone());
        }
    }
    out
}

/// Every diagonal form of rank `<= max_rank` over `F_p` up to reordering,
/// with entries drawn from `{1, s}` where `s` is the smallest non-square.
pub fn square_class_patterns(p: u64, max_rank: usize) -> Vec<FpDiagForm> {
    let s = crate::witt::smallest_nonsquare(p);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for r in 0..=max_rank {
        for mask in 0..(1u32 << r) {
            let e: Vec<u64> = (0..r).map(|i| if mask >> i & 1 == 1 { s } else { 1 }).collect();
            let mut key = e.clone();
            key.sort();
            if seen.insert(key) {
                out.push(FpDiagForm::new(p, e).expect("nonzero entries"));
            }
        }
    }
    out
}

/// Oracle value for the Witt class of a diagonal form: anisotropic kernel of
/// the form compared by rank and square class.
pub fn witt_matches_kernel(d: &FpDiagForm) -> Result<bool> {
    let w = crate::witt::witt_class_k(d)?;
    let (rank, sq) = anisotropic_kernel(d);
    Ok(match rank {
        0 => w.is_zero(),
        1 => w.rank_parity() == 1 && (w.disc_class() == 1) == sq.expect("rank one kernel"),
        2 => w.rank_parity() == 0 && !w.is_zero(),
        _ => false,
    })
}

/// Scalar multiple of an integer-entry rational matrix, used by tests.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}
