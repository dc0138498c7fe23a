//! Lattices in `Q^n` over `Z_(p)`: canonical forms, sums and intersections,
//! twists, compatible splittings and the lower/upper middles.

use std::fmt;

use num::Zero;

use crate::dvr::{pi_pow, residue_mod_pow, val_p, Rat, ValConfig, Valuation};
use crate::error::{Error, Result};
use crate::qmat::QMat;

/// A full-rank `Z_(p)`-submodule of `Q^n`.
///
/// Stored as a column Hermite normal form over `Z_(p)`: `hnf` is lower
/// triangular with integer entries, diagonal entries are powers of `p`, and
/// each entry left of a diagonal entry `p^e` lies in `[0, p^e)`. The lattice is
/// `p^(-shift)` times the column span of `hnf`. Because the form is canonical,
/// structural equality is lattice equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    p: u64,
    shift: i64,
    hnf: QMat,
}

/// A common diagonalizing basis for two lattices:
/// `L = (+) p^exponents_l[i] R x_i` and `M = (+) p^exponents_m[i] R x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplittingCert {
    pub basis: QMat,
    pub exponents_l: Vec<i64>,
    pub exponents_m: Vec<i64>,
    p: u64,
}

/// A torsion module `(+) R / p^e_i R`, kept as its sorted exponent multiset.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TorsionModule {
    exponents: Vec<u32>,
}

fn canonical_form(gens: &QMat, p: u64) -> Option<(i64, QMat)> {
    let n = gens.rows();
    let m = gens.cols();
    if n == 0 {
        return Some((0, QMat::zeros(0, 0)));
    }
    let shift = -gens.min_valuation(p).finite()?;
    let mut a = gens.scale(&pi_pow(p, shift));
    let mut exps = vec![0u32; n];
    for r in 0..n {
        let mut best: Option<(usize, i64)> = None;
        for c in r..m {
            if let Valuation::Finite(v) = val_p(&a[(r, c)], p) {
                if best.is_none_or(|(_, bv)| v < bv) {
                    best = Some((c, v));
                }
            }
        }
        let (c, v) = best?;
        a.swap_cols(r, c);
        let piv = a[(r, r)].clone();
        for c in r + 1..m {
            if !a[(r, c)].is_zero() {
                let f = -(&a[(r, c)] / &piv);
                a.add_col_multiple(c, r, &f);
            }
        }
        a.scale_col(r, &(pi_pow(p, v) / piv));
        exps[r] = v as u32;
    }
    let idx: Vec<usize> = (0..n).collect();
    let mut h = a.submatrix(&idx, &idx);
    for r in 0..n {
        let modulus = pi_pow(p, exps[r] as i64);
        for c in 0..r {
            let x = h[(r, c)].clone();
            let rem = Rat::from_integer(residue_mod_pow(&x, p, exps[r]));
            if x != rem {
                let q = -((x - rem) / &modulus);
                h.add_col_multiple(c, r, &q);
            }
        }
    }
    debug_assert!(h.entries().all(|x| x.is_integer()));
    Some((shift, h))
}

impl Lattice {
    /// The lattice spanned by the columns of an invertible square matrix.
    pub fn from_basis(basis: &QMat, cfg: ValConfig) -> Result<Lattice> {
        if !basis.is_square() {
            return Err(Error::DimensionMismatch(basis.rows(), basis.cols()));
        }
        Lattice::from_generators(basis, cfg.p())
    }

    /// The lattice spanned by the columns of `gens`, which must have full row rank.
    pub fn from_generators(gens: &QMat, p: u64) -> Result<Lattice> {
        let (shift, hnf) = canonical_form(gens, p).ok_or(Error::SingularBasis)?;
        Ok(Lattice { p, shift, hnf })
    }

    pub fn standard(n: usize, cfg: ValConfig) -> Lattice {
        Lattice { p: cfg.p(), shift: 0, hnf: QMat::identity(n) }
    }

    /// The lattice with basis `diag(entries)`.
    pub fn diag(entries: &[Rat], cfg: ValConfig) -> Result<Lattice> {
        Lattice::from_basis(&QMat::diag(entries), cfg)
    }

    pub fn dim(&self) -> usize {
        self.hnf.rows()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn config(&self) -> ValConfig {
        ValConfig::new(self.p).expect("lattice prime was validated")
    }

    /// Canonical basis (columns).
    pub fn basis(&self) -> QMat {
        self.hnf.scale(&pi_pow(self.p, -self.shift))
    }

    fn check_compatible(&self, other: &Lattice) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch(self.p, other.p));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    /// `other ⊆ self`, i.e. `self.basis^-1 * other.basis` has entries in `R`.
    pub fn contains(&self, other: &Lattice) -> Result<bool> {
        self.check_compatible(other)?;
        let inv = self.basis().inverse().expect("lattice basis is invertible");
        Ok((&inv * &other.basis()).is_integral(self.p))
    }

    /// `self ⊆ other`
    pub fn is_sublattice_of(&self, other: &Lattice) -> Result<bool> {
        other.contains(self)
    }

    /// `π^k L`
    pub fn scale_pi(&self, k: i64) -> Lattice {
        Lattice { p: self.p, shift: self.shift - k, hnf: self.hnf.clone() }
    }

    /// The image `g · L` under an invertible matrix.
    pub fn transform(&self, g: &QMat) -> Result<Lattice> {
        if g.rows() != self.dim() || g.cols() != self.dim() {
            return Err(Error::DimensionMismatch(g.rows(), self.dim()));
        }
        Lattice::from_generators(&(g * &self.basis()), self.p)
    }

    /// Dual lattice for the standard inner product: basis `P^-T`.
    pub fn dual_standard(&self) -> Lattice {
        let b = self.basis().inverse().expect("lattice basis is invertible").transpose();
        Lattice::from_generators(&b, self.p).expect("inverse basis is invertible")
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        lattice_sum(self, other)
    }

    pub fn intersection(&self, other: &Lattice) -> Result<Lattice> {
        lattice_intersection(self, other)
    }

    /// Isomorphism type of `self / inner` (elementary divisors of the
    /// inclusion). Requires `inner ⊆ self`.
    pub fn quotient_type(&self, inner: &Lattice) -> Result<TorsionModule> {
        let cert = compatible_splitting(self, inner)?;
        let mut exps = Vec::with_capacity(self.dim());
        for (l, m) in cert.exponents_l.iter().zip(&cert.exponents_m) {
            let d = m - l;
            if d < 0 {
                return Err(Error::NotContained);
            }
            exps.push(d as u32);
        }
        Ok(TorsionModule::new(exps))
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.basis())
    }
}

fn same_shape(ls: &[&Lattice]) -> Result<(u64, usize)> {
    let first = ls.first().expect("at least one lattice");
    for l in &ls[1..] {
        first.check_compatible(l)?;
    }
    Ok((first.p, first.dim()))
}

/// `Σ L_i`
pub fn lattice_sum_all(ls: &[&Lattice]) -> Result<Lattice> {
    let (p, n) = same_shape(ls)?;
    let mut gens = QMat::zeros(n, 0);
    for l in ls {
        gens = gens.hcat(&l.basis());
    }
    Lattice::from_generators(&gens, p)
}

/// `∩ L_i`, computed as the dual of the sum of the duals.
pub fn lattice_intersection_all(ls: &[&Lattice]) -> Result<Lattice> {
    same_shape(ls)?;
    let duals: Vec<Lattice> = ls.iter().map(|l| l.dual_standard()).collect();
    let refs: Vec<&Lattice> = duals.iter().collect();
    Ok(lattice_sum_all(&refs)?.dual_standard())
}

pub fn lattice_sum(l: &Lattice, m: &Lattice) -> Result<Lattice> {
    lattice_sum_all(&[l, m])
}

pub fn lattice_intersection(l: &Lattice, m: &Lattice) -> Result<Lattice> {
    lattice_intersection_all(&[l, m])
}

/// The `a`-twist `L(a) = π^-a L`.
pub fn twist(l: &Lattice, a: i64) -> Lattice {
    l.scale_pi(-a)
}

/// Smith normal form of the change of basis from `L` to `M` over `R`.
///
/// Returns a basis `(x_i)` of `L` with `exponents_l = 0` such that
/// `p^exponents_m[i] x_i` is a basis of `M`. Pivots are chosen by minimal
/// valuation, ties broken by lowest column and then lowest row.
pub fn compatible_splitting(l: &Lattice, m: &Lattice) -> Result<SplittingCert> {
    l.check_compatible(m)?;
    let n = l.dim();
    let p = l.p;
    let mut lb = l.basis();
    let mut mb = m.basis();
    let mut c = &lb.inverse().expect("lattice basis is invertible") * &mb;
    let mut exps = Vec::with_capacity(n);
    for k in 0..n {
        let mut best: Option<(usize, usize, i64)> = None;
        for j in k..n {
            for i in k..n {
                if let Valuation::Finite(v) = val_p(&c[(i, j)], p) {
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let (pi, pj, v) = best.expect("change of basis is invertible");
        c.swap_rows(k, pi);
        lb.swap_cols(k, pi);
        c.swap_cols(k, pj);
        mb.swap_cols(k, pj);
        let piv = c[(k, k)].clone();
        // Row ops on C act on L's basis by the inverse column op.
        for i in k + 1..n {
            if !c[(i, k)].is_zero() {
                let f = &c[(i, k)] / &piv;
                c.add_row_multiple(i, k, &-f.clone());
                lb.add_col_multiple(k, i, &f);
            }
        }
        for j in k + 1..n {
            if !c[(k, j)].is_zero() {
                let f = -(&c[(k, j)] / &piv);
                c.add_col_multiple(j, k, &f);
                mb.add_col_multiple(j, k, &f);
            }
        }
        let unit = &piv / pi_pow(p, v);
        c.scale_row(k, &unit.recip());
        lb.scale_col(k, &unit);
        exps.push(v);
    }
    debug_assert!(c.is_diagonal());
    Ok(SplittingCert { basis: lb, exponents_l: vec![0; n], exponents_m: exps, p })
}

impl SplittingCert {
    fn scaled(&self, exps: &[i64]) -> QMat {
        let mut b = self.basis.clone();
        for (j, &e) in exps.iter().enumerate() {
            b.scale_col(j, &pi_pow(self.p, e));
        }
        b
    }

    /// Rebuilds `(L, M)` from the certificate.
    pub fn lattices(&self) -> (Lattice, Lattice) {
        let l = Lattice::from_generators(&self.scaled(&self.exponents_l), self.p);
        let m = Lattice::from_generators(&self.scaled(&self.exponents_m), self.p);
        (l.expect("certificate basis is invertible"), m.expect("certificate basis is invertible"))
    }

    /// The lattice `(+) p^exps[i] R x_i`.
    pub fn lattice_with(&self, exps: &[i64]) -> Lattice {
        Lattice::from_generators(&self.scaled(exps), self.p).expect("certificate basis is invertible")
    }

    /// Smallest `a >= 0` with `π^a L ⊆ M` and `π^a M ⊆ L`.
    pub fn distance(&self) -> i64 {
        self.exponents_l
            .iter()
            .zip(&self.exponents_m)
            .map(|(l, m)| (m - l).abs())
            .max()
            .unwrap_or(0)
    }
}

/// The truncation bound `ceil(a/2)` for the middle formulas.
pub fn middle_range(l: &Lattice, m: &Lattice) -> Result<i64> {
    let a = compatible_splitting(l, m)?.distance();
    Ok((a + 1) / 2)
}

/// `Σ_{|n| <= range} (π^n L ∩ π^-n M)`
pub fn middle_lower_with_range(l: &Lattice, m: &Lattice, range: i64) -> Result<Lattice> {
    l.check_compatible(m)?;
    let terms = (-range..=range)
        .map(|n| lattice_intersection(&l.scale_pi(n), &m.scale_pi(-n)))
        .collect::<Result<Vec<_>>>()?;
    lattice_sum_all(&terms.iter().collect::<Vec<_>>())
}

/// `∩_{|n| <= range} (π^n L + π^-n M)`
pub fn middle_upper_with_range(l: &Lattice, m: &Lattice, range: i64) -> Result<Lattice> {
    l.check_compatible(m)?;
    let terms = (-range..=range)
        .map(|n| lattice_sum(&l.scale_pi(n), &m.scale_pi(-n)))
        .collect::<Result<Vec<_>>>()?;
    lattice_intersection_all(&terms.iter().collect::<Vec<_>>())
}

/// Lower middle `m_-(L, M)`.
pub fn middle_lower(l: &Lattice, m: &Lattice) -> Result<Lattice> {
    middle_lower_with_range(l, m, middle_range(l, m)?)
}

/// Upper middle `m_+(L, M)`.
pub fn middle_upper(l: &Lattice, m: &Lattice) -> Result<Lattice> {
    middle_upper_with_range(l, m, middle_range(l, m)?)
}

/// Both middles, sharing one splitting for the range.
pub fn middles(l: &Lattice, m: &Lattice) -> Result<(Lattice, Lattice)> {
    let range = middle_range(l, m)?;
    Ok((middle_lower_with_range(l, m, range)?, middle_upper_with_range(l, m, range)?))
}

impl TorsionModule {
    /// Zero exponents describe zero summands and are dropped.
    pub fn new(mut exponents: Vec<u32>) -> Self {
        exponents.retain(|&e| e > 0);
        exponents.sort_unstable();
        TorsionModule { exponents }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Smallest `N` with `π^N T = 0`.
    pub fn exponent(&self) -> u32 {
        self.exponents.last().copied().unwrap_or(0)
    }

    /// Length of `T` as an `R`-module.
    pub fn length(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.exponents.is_empty()
    }
}

impl fmt::Display for TorsionModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.exponents.iter().map(|e| format!("R/p^{e}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `(m_-(T), m_+(T))` up to isomorphism. On a cyclic summand `R/π^m` these
/// are `π^ceil(m/2) T ≅ R/π^floor(m/2)` and `π^floor(m/2) T ≅ R/π^ceil(m/2)`.
pub fn torsion_middles(t: &TorsionModule) -> (TorsionModule, TorsionModule) {
    let lower = t.exponents.iter().map(|m| m / 2).collect();
    let upper = t.exponents.iter().map(|m| m.div_ceil(2)).collect();
    (TorsionModule::new(lower), TorsionModule::new(upper))
}

impl fmt::Display for SplittingCert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "basis {} exps L {:?} exps M {:?}", self.basis, self.exponents_l, self.exponents_m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{intersection_by_kernel, middles_by_splitting, rat};
    use crate::random::random_lattice;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(p: u64) -> ValConfig {
        ValConfig::new(p).unwrap()
    }

    fn d(p: u64, a: (i64, i64), b: (i64, i64)) -> Lattice {
        Lattice::diag(&[rat(a.0, a.1), rat(b.0, b.1)], cfg(p)).unwrap()
    }

    #[test]
    fn sum_and_intersection_examples() {
        let one = d(5, (1, 1), (1, 1));
        let m = d(5, (5, 1), (1, 5));
        assert_eq!(lattice_sum(&one, &one).unwrap(), one);
        assert_eq!(lattice_sum(&one, &m).unwrap(), d(5, (1, 1), (1, 5)));
        assert_eq!(lattice_sum(&d(5, (5, 1), (5, 1)), &one).unwrap(), one);
        assert_eq!(lattice_intersection(&one, &one).unwrap(), one);
        assert_eq!(lattice_intersection(&one, &m).unwrap(), d(5, (5, 1), (1, 1)));
    }

    #[test]
    fn twist_examples() {
        let one = d(5, (1, 1), (1, 1));
        assert_eq!(twist(&one, 0), one);
        assert_eq!(twist(&one, 1), d(5, (1, 5), (1, 5)));
        for a in -2..=2 {
            for b in a..=2 {
                assert!(twist(&one, b).contains(&twist(&one, a)).unwrap());
            }
        }
    }

    #[test]
    fn equality_ignores_basis_choice() {
        let a = Lattice::from_basis(&QMat::from_i64(&[&[1, 1], &[0, 1]]), cfg(5)).unwrap();
        assert_eq!(a, Lattice::standard(2, cfg(5)));
        let b = Lattice::from_basis(&QMat::from_i64(&[&[2, 0], &[0, 3]]), cfg(5)).unwrap();
        assert_eq!(b, Lattice::standard(2, cfg(5)));
        let c = Lattice::from_basis(&QMat::from_i64(&[&[5, 0], &[0, 1]]), cfg(5)).unwrap();
        assert_ne!(c, Lattice::standard(2, cfg(5)));
    }

    #[test]
    fn splitting_examples() {
        let one = d(5, (1, 1), (1, 1));
        let c = compatible_splitting(&one, &one).unwrap();
        assert_eq!(c.exponents_l, c.exponents_m);
        let c = compatible_splitting(&one, &d(5, (5, 1), (1, 5))).unwrap();
        let diffs: Vec<i64> = c.exponents_m.iter().zip(&c.exponents_l).map(|(m, l)| m - l).collect();
        let mut sorted = diffs.clone();
        sorted.sort();
        assert_eq!(sorted, vec![-1, 1]);
    }

    #[test]
    fn middle_examples() {
        let one = d(5, (1, 1), (1, 1));
        let m = d(5, (5, 1), (1, 5));
        assert_eq!(middle_lower(&one, &m).unwrap(), d(5, (5, 1), (1, 1)));
        assert_eq!(middle_upper(&one, &m).unwrap(), d(5, (1, 1), (1, 5)));
        assert_eq!(middles(&one, &one).unwrap(), (one.clone(), one.clone()));
    }

    #[test]
    fn middles_of_twists_follow_integer_middles() {
        let one = Lattice::standard(2, cfg(3));
        for x in -2..=2 {
            for y in -2..=2 {
                let (lo, hi) = crate::dvr::int_middles(x, y);
                let (ml, mu) = middles(&twist(&one, x), &twist(&one, y)).unwrap();
                assert_eq!(ml, twist(&one, lo));
                assert_eq!(mu, twist(&one, hi));
            }
        }
    }

    #[test]
    fn torsion_examples() {
        assert_eq!(torsion_middles(&TorsionModule::new(vec![1])), (TorsionModule::new(vec![]), TorsionModule::new(vec![1])));
        let pi = TorsionModule::new(vec![1]);
        assert_eq!(torsion_middles(&TorsionModule::new(vec![2])), (pi.clone(), pi));
    }

    #[test]
    fn zero_dimensional() {
        let z = Lattice::standard(0, cfg(3));
        assert_eq!(middles(&z, &z).unwrap(), (z.clone(), z.clone()));
        assert_eq!(z.sum(&z).unwrap(), z);
    }

    #[test]
    fn dimension_mismatch() {
        let a = Lattice::standard(2, cfg(3));
        let b = Lattice::standard(3, cfg(3));
        assert!(matches!(lattice_sum(&a, &b), Err(Error::DimensionMismatch(2, 3))));
    }

    fn pair(seed: u64, n: usize, p: u64) -> (Lattice, Lattice) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (random_lattice(&mut rng, n, cfg(p), 3), random_lattice(&mut rng, n, cfg(p), 3))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sandwich_and_pi_upper_in_lower(seed in any::<u64>(), n in 1usize..4, p in prop::sample::select(vec![3u64, 5, 7])) {
            let (l, m) = pair(seed, n, p);
            let (lo, hi) = middles(&l, &m).unwrap();
            let cap = l.intersection(&m).unwrap();
            let cup = l.sum(&m).unwrap();
            prop_assert!(lo.contains(&cap).unwrap());
            prop_assert!(hi.contains(&lo).unwrap());
            prop_assert!(cup.contains(&hi).unwrap());
            prop_assert!(lo.contains(&hi.scale_pi(1)).unwrap());
            prop_assert_eq!(middles(&m, &l).unwrap(), (lo, hi));
        }

        #[test]
        fn intersection_matches_kernel_route(seed in any::<u64>(), n in 1usize..5, p in prop::sample::select(vec![2u64, 3, 5])) {
            let (l, m) = pair(seed, n, p);
            prop_assert_eq!(l.intersection(&m).unwrap(), intersection_by_kernel(&l, &m).unwrap());
        }

        #[test]
        fn splitting_round_trips(seed in any::<u64>(), n in 1usize..5) {
            let (l, m) = pair(seed, n, 5);
            let c = compatible_splitting(&l, &m).unwrap();
            prop_assert_eq!(c.lattices(), (l.clone(), m.clone()));
            prop_assert_eq!(middles(&l, &m).unwrap(), middles_by_splitting(&l, &m).unwrap());
        }

        #[test]
        fn sum_is_minimal_upper_bound(seed in any::<u64>(), n in 1usize..4) {
            let (l, m) = pair(seed, n, 3);
            let s = l.sum(&m).unwrap();
            let i = l.intersection(&m).unwrap();
            prop_assert!(s.contains(&l).unwrap() && s.contains(&m).unwrap());
            prop_assert!(l.contains(&i).unwrap() && m.contains(&i).unwrap());
            prop_assert_eq!(twist(&twist(&l, 2), -2), l);
        }
    }
}
