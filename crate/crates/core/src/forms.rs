//! `ε`-symmetric bilinear forms, dual lattices, almost self-dual lattices and
//! the residual forms on `L/πL'` and `L'/L`.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use num::{One, Zero};

use crate::dvr::{Rat, Valuation};
use crate::error::{Error, Result};
use crate::fp::FpMat;
use crate::lattices::{compatible_splitting, middle_lower, middle_upper, Lattice, SplittingCert};
use crate::qmat::QMat;

static DUAL_FAULT: AtomicBool = AtomicBool::new(false);

/// Deliberately corrupts `dual_lattice` so that self-checks can be seen to
/// fail. Process-wide; intended for the CLI's fault-injection switch only.
#[doc(hidden)]
pub fn set_dual_fault(on: bool) {
    DUAL_FAULT.store(on, Ordering::SeqCst);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Epsilon {
    /// `B(x, y) = B(y, x)`
    Symmetric,
    /// `B(x, y) = -B(y, x)` and `B(x, x) = 0`
    Alternating,
}

impl Epsilon {
    pub fn sign(self) -> i64 {
        match self {
            Epsilon::Symmetric => 1,
            Epsilon::Alternating => -1,
        }
    }

    pub fn from_sign(s: i64) -> Option<Epsilon> {
        match s {
            1 => Some(Epsilon::Symmetric),
            -1 => Some(Epsilon::Alternating),
            _ => None,
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.sign())
    }
}

fn is_eps_symmetric(m: &QMat, eps: Epsilon) -> bool {
    if !m.is_square() {
        return false;
    }
    let t = m.transpose();
    match eps {
        Epsilon::Symmetric => t == *m,
        Epsilon::Alternating => t == m.neg() && (0..m.rows()).all(|i| m[(i, i)].is_zero()),
    }
}

/// A nondegenerate `ε`-symmetric bilinear form on `Q^n`, `B(x, y) = xᵀ M y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GramForm {
    matrix: QMat,
    epsilon: Epsilon,
}

impl GramForm {
    pub fn new(matrix: QMat, epsilon: Epsilon) -> Result<GramForm> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(matrix.rows(), matrix.cols()));
        }
        if !is_eps_symmetric(&matrix, epsilon) {
            return Err(Error::NotEpsilonSymmetric("form"));
        }
        if matrix.rows() > 0 && matrix.det().is_zero() {
            return Err(Error::DegenerateForm);
        }
        Ok(GramForm { matrix, epsilon })
    }

    pub fn matrix(&self) -> &QMat {
        &self.matrix
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `Pᵀ M P`.
    pub fn gram(&self, basis: &QMat) -> QMat {
        &(&basis.transpose() * &self.matrix) * basis
    }

    pub fn eval(&self, x: &[Rat], y: &[Rat]) -> Rat {
        let my = self.matrix.mul_vec(y);
        x.iter().zip(&my).fold(Rat::zero(), |acc, (a, b)| acc + a * b)
    }

    /// Whether `gᵀ M g = M`.
    pub fn is_invariant_under(&self, g: &QMat) -> bool {
        g.is_square() && g.rows() == self.dim() && self.gram(g) == self.matrix
    }

    fn check_dim(&self, l: &Lattice) -> Result<()> {
        if l.dim() != self.dim() {
            return Err(Error::DimensionMismatch(l.dim(), self.dim()));
        }
        Ok(())
    }
}

impl fmt::Display for GramForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (eps {})", self.matrix, self.epsilon)
    }
}

/// A nondegenerate `ε`-symmetric form over `F_p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpForm {
    matrix: FpMat,
    epsilon: Epsilon,
}

impl FpForm {
    pub fn new(matrix: FpMat, epsilon: Epsilon) -> Result<FpForm> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch(matrix.rows(), matrix.cols()));
        }
        let ok = match epsilon {
            Epsilon::Symmetric => matrix.is_symmetric(),
            Epsilon::Alternating => matrix.is_alternating(),
        };
        if !ok {
            return Err(Error::NotEpsilonSymmetric("residual form"));
        }
        if !matrix.is_invertible() && matrix.rows() > 0 {
            return Err(Error::DegenerateForm);
        }
        Ok(FpForm { matrix, epsilon })
    }

    pub fn zero_dim(p: u64, epsilon: Epsilon) -> FpForm {
        FpForm { matrix: FpMat::zeros(p, 0, 0), epsilon }
    }

    pub fn matrix(&self) -> &FpMat {
        &self.matrix
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn p(&self) -> u64 {
        self.matrix.p()
    }

    /// Whether `gᵀ b g = b`.
    pub fn is_invariant_under(&self, g: &FpMat) -> bool {
        g.rows() == self.dim() && g.cols() == self.dim() && g.transpose().mul(&self.matrix).mul(g) == self.matrix
    }

    pub fn orthogonal_sum(&self, other: &FpForm) -> FpForm {
        assert_eq!(self.epsilon, other.epsilon, "orthogonal sum of forms with different signs");
        FpForm { matrix: FpMat::block_diag(self.p(), &[&self.matrix, &other.matrix]), epsilon: self.epsilon }
    }
}

impl fmt::Display for FpForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix)
    }
}

/// `L' = {x : B(x, L) ⊆ R}`, with basis `P G^(-T)` for `G` the Gram matrix of `L`.
pub fn dual_lattice(l: &Lattice, b: &GramForm) -> Result<Lattice> {
    b.check_dim(l)?;
    let p_mat = l.basis();
    let g = b.gram(&p_mat);
    let ginv_t = g.inverse().ok_or(Error::DegenerateForm)?.transpose();
    let mut basis = &p_mat * &ginv_t;
    if DUAL_FAULT.load(Ordering::Relaxed) && basis.cols() > 0 {
        basis.scale_col(0, &Rat::from_integer(l.p().into()));
    }
    Lattice::from_basis(&basis, l.config())
}

/// Whether `πL' ⊆ L ⊆ L'`.
pub fn is_almost_self_dual(l: &Lattice, b: &GramForm) -> Result<bool> {
    let d = dual_lattice(l, b)?;
    Ok(d.contains(l)? && l.contains(&d.scale_pi(1))?)
}

/// The almost self-dual lattice `m₋(L, L')`.
pub fn asd_via_middle(l: &Lattice, b: &GramForm) -> Result<Lattice> {
    let d = dual_lattice(l, b)?;
    middle_lower(l, &d)
}

/// `m₊(L, L')`, which is the dual of `asd_via_middle(L, B)`.
pub fn asd_via_middle_dual(l: &Lattice, b: &GramForm) -> Result<Lattice> {
    let d = dual_lattice(l, b)?;
    middle_upper(l, &d)
}

fn min_val(m: &QMat, p: u64) -> Option<i64> {
    match m.min_valuation(p) {
        Valuation::Finite(v) => Some(v),
        Valuation::Infinite => None,
    }
}

/// Rescales `L` to the largest `π^t L` contained in its own dual.
pub fn thompson_rescale(l: &Lattice, b: &GramForm) -> Result<Lattice> {
    b.check_dim(l)?;
    let g = b.gram(&l.basis());
    let Some(v) = min_val(&g, l.p()) else {
        return Ok(l.clone());
    };
    // Gram of π^t L is p^(2t) G
    let t = (-v).div_euclid(2) + i64::from((-v).rem_euclid(2) != 0);
    Ok(l.scale_pi(t))
}

/// The smallest `m >= 0` with `π^m L' ⊆ L`, for `L ⊆ L'`.
fn dual_defect(l: &Lattice, b: &GramForm) -> Result<i64> {
    let g = b.gram(&l.basis());
    let ginv = g.inverse().ok_or(Error::DegenerateForm)?;
    Ok(min_val(&ginv, l.p()).map_or(0, |v| (-v).max(0)))
}

/// Iterates `L <- π^(m-1) L' + L` from the rescaled input until `m <= 1`.
/// Returns the final lattice and the sequence of defects `m` observed.
pub fn asd_thompson_traced(l0: &Lattice, b: &GramForm) -> Result<(Lattice, Vec<i64>)> {
    let mut l = thompson_rescale(l0, b)?;
    let mut trace = Vec::new();
    loop {
        let m = dual_defect(&l, b)?;
        trace.push(m);
        if m <= 1 || trace.len() > 4096 {
            return Ok((l, trace));
        }
        let d = dual_lattice(&l, b)?;
        l = d.scale_pi(m - 1).sum(&l)?;
    }
}

pub fn asd_thompson(l0: &Lattice, b: &GramForm) -> Result<Lattice> {
    asd_thompson_traced(l0, b).map(|(l, _)| l)
}

/// The forms induced by `B` on `L/πL'` and by `πB` on `L'/L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualForms {
    pub b1: FpForm,
    pub b2: FpForm,
    /// Splitting of `(L, L')`; `exponents_m` lies in `{0, -1}`.
    pub basis_witness: SplittingCert,
}

impl ResidualForms {
    /// Indices of the witness basis spanning `L/πL'` and `L'/L`.
    pub fn index_split(&self) -> (Vec<usize>, Vec<usize>) {
        let e = &self.basis_witness.exponents_m;
        ((0..e.len()).filter(|&i| e[i] == 0).collect(), (0..e.len()).filter(|&i| e[i] != 0).collect())
    }
}

pub fn residual_forms(l: &Lattice, b: &GramForm) -> Result<ResidualForms> {
    let d = dual_lattice(l, b)?;
    if !(d.contains(l)? && l.contains(&d.scale_pi(1))?) {
        return Err(Error::NotAlmostSelfDual);
    }
    let p = l.p();
    let cert = compatible_splitting(l, &d)?;
    if cert.exponents_m.iter().any(|&e| e != 0 && e != -1) {
        return Err(Error::NotAlmostSelfDual);
    }
    let g = b.gram(&cert.basis);
    assert!(g.is_integral(p), "Gram matrix of L must be integral when L ⊆ L'");
    let n = l.dim();
    let zero: Vec<usize> = (0..n).filter(|&i| cert.exponents_m[i] == 0).collect();
    let one: Vec<usize> = (0..n).filter(|&i| cert.exponents_m[i] == -1).collect();
    // the witness basis spans L; L' is spanned by x_i / p on the `one` indices
    let g1 = g.submatrix(&zero, &zero);
    let g2 = g.submatrix(&one, &one).scale(&Rat::new(One::one(), p.into()));
    let b1 = FpForm::new(FpMat::from_qmat(&g1, p)?, b.epsilon()).map_err(|e| degenerate(e, "b1"))?;
    let b2 = FpForm::new(FpMat::from_qmat(&g2, p)?, b.epsilon()).map_err(|e| degenerate(e, "b2"))?;
    Ok(ResidualForms { b1, b2, basis_witness: cert })
}

fn degenerate(e: Error, which: &'static str) -> Error {
    match e {
        Error::DegenerateForm => Error::DegenerateResidual(which),
        e => e,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvr::ValConfig;
    use crate::lattices::middle_upper;
    use crate::oracle::rat;
    use crate::random::{random_gram, random_lattice};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> ValConfig {
        ValConfig::new(5).unwrap()
    }

    fn dl(a: i64, b: i64) -> Lattice {
        Lattice::diag(&[rat(a, 1), rat(b, 1)], cfg()).unwrap()
    }

    fn form(a: i64, b: i64) -> GramForm {
        GramForm::new(QMat::from_i64(&[&[a, 0], &[0, b]]), Epsilon::Symmetric).unwrap()
    }

    #[test]
    fn rejects_bad_forms() {
        let ns = QMat::from_i64(&[&[1, 2], &[3, 1]]);
        assert_eq!(GramForm::new(ns, Epsilon::Symmetric), Err(Error::NotEpsilonSymmetric("form")));
        let diag_alt = QMat::from_i64(&[&[1, 1], &[-1, 0]]);
        assert!(GramForm::new(diag_alt, Epsilon::Alternating).is_err());
        assert_eq!(GramForm::new(QMat::from_i64(&[&[1, 1], &[1, 1]]), Epsilon::Symmetric), Err(Error::DegenerateForm));
    }

    #[test]
    fn dual_examples() {
        let id = form(1, 1);
        assert_eq!(dual_lattice(&dl(1, 1), &id).unwrap(), dl(1, 1));
        let expect = Lattice::diag(&[rat(1, 5), rat(1, 1)], cfg()).unwrap();
        assert_eq!(dual_lattice(&dl(5, 1), &id).unwrap(), expect);
    }

    #[test]
    fn almost_self_dual_examples() {
        assert!(is_almost_self_dual(&dl(1, 1), &form(1, 1)).unwrap());
        assert!(is_almost_self_dual(&dl(1, 1), &form(5, 1)).unwrap());
        assert!(!is_almost_self_dual(&dl(1, 1), &form(25, 1)).unwrap());
    }

    #[test]
    fn asd_examples() {
        let b = form(5, 1);
        assert_eq!(asd_via_middle(&dl(1, 1), &b).unwrap(), dl(1, 1));
        assert_eq!(asd_via_middle(&dl(5, 1), &form(1, 1)).unwrap(), dl(1, 1));
        let id = form(1, 1);
        assert_eq!(asd_thompson(&dl(1, 1), &id).unwrap(), dl(1, 1));
        let (out, trace) = asd_thompson_traced(&dl(25, 1), &id).unwrap();
        assert!(is_almost_self_dual(&out, &id).unwrap());
        assert_eq!(out, dl(1, 1));
        assert_eq!(trace, vec![4, 2, 0]);
    }

    #[test]
    fn residual_examples() {
        let r = residual_forms(&dl(1, 1), &form(1, 1)).unwrap();
        assert_eq!(r.b1.matrix(), &FpMat::identity(5, 2));
        assert_eq!(r.b2.dim(), 0);
        let r = residual_forms(&dl(1, 1), &form(5, 1)).unwrap();
        assert_eq!(r.b1.matrix(), &FpMat::identity(5, 1));
        assert_eq!(r.b2.matrix(), &FpMat::identity(5, 1));
        assert_eq!(residual_forms(&dl(1, 1), &form(25, 1)).unwrap_err(), Error::NotAlmostSelfDual);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn duality_laws(seed in any::<u64>(), half in 1usize..3, alt in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 2 * half;
            let eps = if alt { Epsilon::Alternating } else { Epsilon::Symmetric };
            let b = random_gram(&mut rng, n, eps, 3, 2);
            let l = random_lattice(&mut rng, n, ValConfig::new(3).unwrap(), 2);
            let m = random_lattice(&mut rng, n, ValConfig::new(3).unwrap(), 2);
            let ld = dual_lattice(&l, &b).unwrap();
            prop_assert_eq!(dual_lattice(&ld, &b).unwrap(), l.clone());
            let md = dual_lattice(&m, &b).unwrap();
            prop_assert_eq!(dual_lattice(&l.intersection(&m).unwrap(), &b).unwrap(), ld.sum(&md).unwrap());
            let a = asd_via_middle(&l, &b).unwrap();
            prop_assert!(is_almost_self_dual(&a, &b).unwrap());
            prop_assert_eq!(dual_lattice(&a, &b).unwrap(), middle_upper(&l, &ld).unwrap());
            let (t, trace) = asd_thompson_traced(&l, &b).unwrap();
            prop_assert_eq!(t, a.clone());
            prop_assert!(trace.windows(2).all(|w| w[1] < w[0]));
            let r = residual_forms(&a, &b).unwrap();
            prop_assert_eq!(r.b1.dim() + r.b2.dim(), n);
            if alt {
                prop_assert!(r.b1.dim().is_multiple_of(2) && r.b2.dim().is_multiple_of(2));
            }
        }
    }
}
