//! Quadratic forms: canonical Witt classes over `F_p`, diagonalization
//! compatible with a lattice, and the Springer residues `∂₁`, `∂₂`.

use std::fmt;
use std::ops::Add;

use num::{One, Zero};

use crate::dvr::{pow_mod, residue_p, unit_part, Rat, ValConfig};
use crate::error::{Error, Result};
use crate::forms::{residual_forms, Epsilon, FpForm, GramForm};
use crate::lattices::Lattice;
use crate::qmat::QMat;

/// Diagonal quadratic form `<a_1, ..., a_r>` over `Q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiagForm {
    entries: Vec<Rat>,
}

impl DiagForm {
    pub fn new(entries: Vec<Rat>) -> Result<DiagForm> {
        if entries.iter().any(Zero::is_zero) {
            return Err(Error::DegenerateForm);
        }
        Ok(DiagForm { entries })
    }

    pub fn entries(&self) -> &[Rat] {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn orthogonal_sum(&self, other: &DiagForm) -> DiagForm {
        DiagForm { entries: self.entries.iter().chain(&other.entries).cloned().collect() }
    }
}

/// Diagonal quadratic form over `F_p`, entries in `[1, p)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpDiagForm {
    p: u64,
    entries: Vec<u64>,
}

impl FpDiagForm {
    pub fn new(p: u64, entries: Vec<u64>) -> Result<FpDiagForm> {
        let entries: Vec<u64> = entries.into_iter().map(|e| e % p).collect();
        if entries.contains(&0) {
            return Err(Error::DegenerateForm);
        }
        Ok(FpDiagForm { p, entries })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }
}

/// Whether `a` is a nonzero square mod the odd prime `p`.
pub fn is_square_mod(a: u64, p: u64) -> bool {
    let a = a % p;
    a != 0 && pow_mod(a, (p - 1) / 2, p) == 1
}

/// The smallest positive non-square mod the odd prime `p`.
pub fn smallest_nonsquare(p: u64) -> u64 {
    (2..p).find(|&a| !is_square_mod(a, p)).expect("odd primes have non-squares")
}

fn square_class(a: u64, p: u64) -> u64 {
    if is_square_mod(a, p) {
        1
    } else {
        smallest_nonsquare(p)
    }
}

/// A class in the Witt group of `F_p`, `p` odd: rank parity together with the
/// square class of the signed discriminant `(-1)^(r(r-1)/2) det`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WittClass {
    p: u64,
    parity: u8,
    disc: u64,
}

impl WittClass {
    pub fn zero(p: u64) -> WittClass {
        WittClass { p, parity: 0, disc: 1 }
    }

    fn from_rank_det(p: u64, rank: usize, det: u64) -> WittClass {
        let sign_odd = (rank * rank.saturating_sub(1) / 2) % 2 == 1;
        let d = if sign_odd { (p - det % p) % p } else { det % p };
        WittClass { p, parity: (rank % 2) as u8, disc: square_class(d, p) }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn rank_parity(&self) -> u8 {
        self.parity
    }

    /// Representative of the signed discriminant: `1` or the smallest non-square.
    pub fn disc_class(&self) -> u64 {
        self.disc
    }

    pub fn is_zero(&self) -> bool {
        self.parity == 0 && self.disc == 1
    }
}

impl Add for WittClass {
    type Output = WittClass;
    fn add(self, o: WittClass) -> WittClass {
        assert_eq!(self.p, o.p, "Witt classes over different fields");
        let p = self.p;
        let mut d = self.disc * o.disc % p;
        if self.parity == 1 && o.parity == 1 {
            d = (p - d) % p;
        }
        WittClass { p, parity: self.parity ^ o.parity, disc: square_class(d, p) }
    }
}

impl fmt::Display for WittClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "(rank {} mod 2, disc <{}>)", self.parity, self.disc)
        }
    }
}

fn require_odd(p: u64) -> Result<()> {
    if p == 2 {
        Err(Error::EvenResidueChar)
    } else {
        Ok(())
    }
}

pub fn witt_class_k(d: &FpDiagForm) -> Result<WittClass> {
    require_odd(d.p)?;
    let det = d.entries.iter().fold(1, |acc, e| acc * e % d.p);
    Ok(WittClass::from_rank_det(d.p, d.entries.len(), det))
}

/// Witt class of a nondegenerate symmetric form over `F_p`.
pub fn witt_class_of_form(b: &FpForm) -> Result<WittClass> {
    require_odd(b.p())?;
    if b.epsilon() != Epsilon::Symmetric {
        return Err(Error::WrongEpsilon);
    }
    Ok(WittClass::from_rank_det(b.p(), b.dim(), b.matrix().det()))
}

/// `(∂₁, ∂₂)` of a diagonal form, with uniformizer `p`.
pub fn springer_residues(d: &DiagForm, cfg: ValConfig) -> Result<(WittClass, WittClass)> {
    springer_residues_with_unit(d, cfg, &Rat::one())
}

/// `(∂₁, ∂₂)` with respect to the uniformizer `u p`, `u` a unit.
pub fn springer_residues_with_unit(d: &DiagForm, cfg: ValConfig, u: &Rat) -> Result<(WittClass, WittClass)> {
    let p = cfg.p();
    require_odd(p)?;
    let (uu, uv) = unit_part(u, p);
    assert!(uv == 0 && !u.is_zero(), "uniformizer twist must be a unit");
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for a in &d.entries {
        let (w, e) = unit_part(a, p);
        // a = w p^e = (w / u^e) (u p)^e
        let w = w / uu.pow(e as i32);
        let r = residue_p(&w, p)?;
        if e.rem_euclid(2) == 0 {
            even.push(r);
        } else {
            odd.push(r);
        }
    }
    Ok((witt_class_k(&FpDiagForm::new(p, even)?)?, witt_class_k(&FpDiagForm::new(p, odd)?)?))
}

/// An orthogonal basis `(x_i)` with `M = (+) R x_i`, and the values `q(x_i)`.
pub fn diagonalize_compatible(b: &GramForm, m: &Lattice) -> Result<(DiagForm, QMat)> {
    if b.epsilon() != Epsilon::Symmetric {
        return Err(Error::WrongEpsilon);
    }
    let p = m.p();
    require_odd(p)?;
    if m.dim() != b.dim() {
        return Err(Error::DimensionMismatch(m.dim(), b.dim()));
    }
    let n = m.dim();
    let basis = m.basis();
    let mut vs: Vec<Vec<Rat>> = (0..n).map(|j| basis.col(j)).collect();
    let mut xs = Vec::with_capacity(n);
    let mut qs = Vec::with_capacity(n);
    while !vs.is_empty() {
        let k = vs.len();
        let g: Vec<Vec<Rat>> = (0..k).map(|i| (0..k).map(|j| b.eval(&vs[i], &vs[j])).collect()).collect();
        let val = |x: &Rat| (!x.is_zero()).then(|| unit_part(x, p).1);
        let m0 = g.iter().flatten().filter_map(val).min().ok_or(Error::DegenerateForm)?;
        let pick = match (0..k).find(|&i| val(&g[i][i]) == Some(m0)) {
            Some(i) => i,
            None => {
                let (i, j) = (0..k)
                    .flat_map(|i| (0..k).map(move |j| (i, j)))
                    .find(|&(i, j)| val(&g[i][j]) == Some(m0))
                    .expect("minimum is attained");
                let s: Vec<Rat> = vs[i].iter().zip(&vs[j]).map(|(a, b)| a + b).collect();
                vs[i] = s;
                i
            }
        };
        let x = vs.remove(pick);
        let q = b.eval(&x, &x);
        debug_assert_eq!(val(&q), Some(m0));
        for v in vs.iter_mut() {
            let c = b.eval(&x, v) / &q;
            for (vi, xi) in v.iter_mut().zip(&x) {
                *vi -= &c * xi;
            }
        }
        xs.push(x);
        qs.push(q);
    }
    Ok((DiagForm { entries: qs }, QMat::from_cols(n, &xs)))
}

/// Both sides of the comparison between Springer residues and residual forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpringerComparison {
    pub springer: (WittClass, WittClass),
    pub residual: (WittClass, WittClass),
}

impl SpringerComparison {
    pub fn agrees(&self) -> bool {
        self.springer == self.residual
    }
}

pub fn compare_springer_residuals(l: &Lattice, b: &GramForm) -> Result<SpringerComparison> {
    if b.epsilon() != Epsilon::Symmetric {
        return Err(Error::WrongEpsilon);
    }
    require_odd(l.p())?;
    let rf = residual_forms(l, b)?;
    let (d, _) = diagonalize_compatible(b, l)?;
    let springer = springer_residues(&d, l.config())?;
    let residual = (witt_class_of_form(&rf.b1)?, witt_class_of_form(&rf.b2)?);
    Ok(SpringerComparison { springer, residual })
}

pub fn verify_springer_vs_residuals(l: &Lattice, b: &GramForm) -> Result<bool> {
    compare_springer_residuals(l, b).map(|c| c.agrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{asd_via_middle, Epsilon};
    use crate::oracle::{rat, square_class_patterns, witt_matches_kernel};
    use crate::random::{random_gram, random_lattice};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k(p: u64, e: &[u64]) -> WittClass {
        witt_class_k(&FpDiagForm::new(p, e.to_vec()).unwrap()).unwrap()
    }

    fn cfg(p: u64) -> ValConfig {
        ValConfig::new(p).unwrap()
    }

    #[test]
    fn witt_examples() {
        assert!(k(5, &[1, 4]).is_zero());
        let one = k(5, &[1]);
        assert_eq!((one.rank_parity(), one.disc_class()), (1, 1));
        assert!(k(5, &[1, 1]).is_zero());
        assert!(!k(3, &[1, 1]).is_zero());
        assert_eq!(witt_class_k(&FpDiagForm::new(2, vec![1]).unwrap()), Err(Error::EvenResidueChar));
    }

    #[test]
    fn addition_matches_orthogonal_sum() {
        for p in [3u64, 5, 7, 11] {
            for a in 1..p {
                for b in 1..p {
                    for c in 1..p {
                        assert_eq!(k(p, &[a]) + k(p, &[b, c]), k(p, &[a, b, c]));
                        assert_eq!(k(p, &[a, b]) + k(p, &[c]), k(p, &[a, b, c]));
                    }
                }
            }
        }
    }

    #[test]
    fn agrees_with_anisotropic_kernel_oracle() {
        for p in [3u64, 5, 7] {
            for d in square_class_patterns(p, 4) {
                assert!(witt_matches_kernel(&d).unwrap(), "{d:?}");
            }
        }
    }

    #[test]
    fn springer_examples() {
        let c = cfg(5);
        let (a, b) = springer_residues(&DiagForm::new(vec![rat(2, 1)]).unwrap(), c).unwrap();
        assert_eq!((a, b.is_zero()), (k(5, &[2]), true));
        let (a, b) = springer_residues(&DiagForm::new(vec![rat(10, 1)]).unwrap(), c).unwrap();
        assert_eq!((a.is_zero(), b), (true, k(5, &[2])));
        let (a, b) = springer_residues(&DiagForm::new(vec![rat(1, 1), rat(-1, 1)]).unwrap(), c).unwrap();
        assert!(a.is_zero() && b.is_zero());
        // even powers of the uniformizer are squares
        let (a, b) = springer_residues(&DiagForm::new(vec![rat(3, 25)]).unwrap(), c).unwrap();
        assert_eq!((a, b.is_zero()), (k(5, &[3]), true));
    }

    #[test]
    fn uniformizer_twist_changes_second_residue() {
        let c = cfg(5);
        let d = DiagForm::new(vec![rat(5, 1)]).unwrap();
        let (_, plain) = springer_residues(&d, c).unwrap();
        let (_, twisted) = springer_residues_with_unit(&d, c, &rat(2, 1)).unwrap();
        // 5 = 3 * (2 * 5) with 3 = 1/2 mod 5
        assert_eq!(plain, k(5, &[1]));
        assert_eq!(twisted, k(5, &[3]));
        assert_ne!(plain, twisted);
    }

    #[test]
    fn diagonalize_examples() {
        let m = Lattice::standard(2, cfg(5));
        let b = GramForm::new(QMat::from_i64(&[&[3, 0], &[0, 7]]), Epsilon::Symmetric).unwrap();
        let (d, x) = diagonalize_compatible(&b, &m).unwrap();
        assert_eq!(d.entries(), &[rat(3, 1), rat(7, 1)]);
        assert_eq!(Lattice::from_basis(&x, cfg(5)).unwrap(), m);
        let h = GramForm::new(QMat::from_i64(&[&[0, 1], &[1, 0]]), Epsilon::Symmetric).unwrap();
        let (d, x) = diagonalize_compatible(&h, &m).unwrap();
        assert!(h.gram(&x).is_diagonal());
        assert_eq!(Lattice::from_basis(&x, cfg(5)).unwrap(), m);
        let r: Vec<u64> = d.entries().iter().map(|e| residue_p(e, 5).unwrap()).collect();
        assert!(r.iter().all(|&u| u != 0));
        assert_eq!(square_class(r[0] * r[1], 5), square_class(4, 5));
    }

    #[test]
    fn springer_matches_residuals_examples() {
        let l = Lattice::standard(2, cfg(5));
        let id = GramForm::new(QMat::identity(2), Epsilon::Symmetric).unwrap();
        let c = compare_springer_residuals(&l, &id).unwrap();
        assert!(c.agrees() && c.springer.0.is_zero() && c.springer.1.is_zero());
        let b = GramForm::new(QMat::from_i64(&[&[5, 0], &[0, 1]]), Epsilon::Symmetric).unwrap();
        let c = compare_springer_residuals(&l, &b).unwrap();
        assert!(c.agrees());
        assert_eq!(c.springer, (k(5, &[1]), k(5, &[1])));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn springer_vs_residuals(seed in any::<u64>(), n in 1usize..5, p in prop::sample::select(vec![3u64, 5, 7])) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_gram(&mut rng, n, Epsilon::Symmetric, p, 2);
            let l = asd_via_middle(&random_lattice(&mut rng, n, cfg(p), 2), &b).unwrap();
            prop_assert!(verify_springer_vs_residuals(&l, &b).unwrap());
        }

        #[test]
        fn residues_are_additive_and_square_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = cfg(7);
            let mut entry = || loop {
                let x = crate::random::random_entry(&mut rng, 7, 3);
                if !x.is_zero() { return x; }
            };
            let a = DiagForm::new(vec![entry(), entry()]).unwrap();
            let b = DiagForm::new(vec![entry()]).unwrap();
            let (a1, a2) = springer_residues(&a, c).unwrap();
            let (b1, b2) = springer_residues(&b, c).unwrap();
            let (s1, s2) = springer_residues(&a.orthogonal_sum(&b), c).unwrap();
            prop_assert_eq!((s1, s2), (a1 + b1, a2 + b2));
            let sq = entry();
            let scaled = DiagForm::new(vec![&a.entries()[0] * &sq * &sq, a.entries()[1].clone()]).unwrap();
            prop_assert_eq!(springer_residues(&scaled, c).unwrap(), (a1, a2));
        }

        #[test]
        fn independent_of_almost_self_dual_lattice(seed in any::<u64>(), n in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_gram(&mut rng, n, Epsilon::Symmetric, 3, 2);
            let l1 = asd_via_middle(&random_lattice(&mut rng, n, cfg(3), 2), &b).unwrap();
            let l2 = asd_via_middle(&random_lattice(&mut rng, n, cfg(3), 2), &b).unwrap();
            let c1 = compare_springer_residuals(&l1, &b).unwrap();
            let c2 = compare_springer_residuals(&l2, &b).unwrap();
            prop_assert_eq!(c1.residual, c2.residual);
        }
    }
}
