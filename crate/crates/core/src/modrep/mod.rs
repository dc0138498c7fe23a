//! Group representations over `Q`, stable lattices, reduction mod `p`, and
//! semisimplification of the reductions.

mod meataxe;

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fp::{FpMat, FpPoly};
use crate::lattices::{lattice_sum_all, Lattice};
use crate::qmat::QMat;

pub use meataxe::{composition_factors, Subspace};

/// A representation of a finite group on `Q^n`, given by generator images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRepK {
    generators: Vec<QMat>,
    dim: usize,
    word_bound: usize,
}

impl GroupRepK {
    /// `word_bound` bounds the word length used when spinning lattices; the
    /// group order always suffices.
    pub fn new(dim: usize, generators: Vec<QMat>, word_bound: usize) -> Result<GroupRepK> {
        for (i, g) in generators.iter().enumerate() {
            if g.rows() != dim || g.cols() != dim {
                return Err(Error::DimensionMismatch(g.rows(), dim));
            }
            if dim > 0 && g.inverse().is_none() {
                return Err(Error::SingularGenerator(i));
            }
        }
        Ok(GroupRepK { generators, dim, word_bound: word_bound.max(1) })
    }

    pub fn generators(&self) -> &[QMat] {
        &self.generators
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn word_bound(&self) -> usize {
        self.word_bound
    }
}

/// A module over `F_p[G]`: generator matrices acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KGModule {
    p: u64,
    dim: usize,
    generators: Vec<FpMat>,
}

impl KGModule {
    pub fn new(p: u64, dim: usize, generators: Vec<FpMat>) -> Result<KGModule> {
        for (i, g) in generators.iter().enumerate() {
            if g.rows() != dim || g.cols() != dim {
                return Err(Error::DimensionMismatch(g.rows(), dim));
            }
            if dim > 0 && !g.is_invertible() {
                return Err(Error::SingularGenerator(i));
            }
        }
        Ok(KGModule { p, dim, generators })
    }

    pub(crate) fn new_unchecked(p: u64, dim: usize, generators: Vec<FpMat>) -> KGModule {
        KGModule { p, dim, generators }
    }

    pub fn trivial(p: u64, dim: usize, ngens: usize) -> KGModule {
        KGModule { p, dim, generators: vec![FpMat::identity(p, dim); ngens] }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[FpMat] {
        &self.generators
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    /// The contragredient module, `g ↦ g^(-T)`.
    pub fn dual(&self) -> KGModule {
        let gens = self
            .generators
            .iter()
            .map(|g| g.inverse().expect("module generators are invertible").transpose())
            .collect();
        KGModule { p: self.p, dim: self.dim, generators: gens }
    }

    pub fn direct_sum(&self, other: &KGModule) -> KGModule {
        assert_eq!(self.generators.len(), other.generators.len(), "generator count mismatch");
        let gens = self
            .generators
            .iter()
            .zip(&other.generators)
            .map(|(a, b)| FpMat::block_diag(self.p, &[a, b]))
            .collect();
        KGModule { p: self.p, dim: self.dim + other.dim, generators: gens }
    }

    pub fn direct_sum_all(p: u64, ngens: usize, parts: &[&KGModule]) -> KGModule {
        parts.iter().fold(KGModule::trivial(p, 0, ngens), |acc, m| acc.direct_sum(m))
    }

    /// Whether the column span of `basis` is invariant.
    pub fn is_submodule(&self, basis: &FpMat) -> bool {
        let r = basis.rank();
        self.generators.iter().all(|g| basis.hcat(&g.mul(basis)).rank() == r)
    }

    /// The submodule spanned by the given vectors.
    pub fn spin(&self, vectors: &[Vec<u64>]) -> Subspace {
        let mut s = Subspace::new(self.p, self.dim);
        s.spin_in(vectors, &self.generators);
        s
    }

    /// The action on `outer / inner`, where both are submodules with
    /// `inner ⊆ outer`. Returns the module and the basis of `outer` used:
    /// the columns of `inner` followed by complement columns.
    pub fn subquotient(&self, inner: &Subspace, outer: &Subspace) -> (KGModule, FpMat) {
        let p = self.p;
        let n = self.dim;
        let mut full = inner.clone();
        let mut cols: Vec<Vec<u64>> = inner.vectors().to_vec();
        for v in outer.vectors() {
            if full.insert(v.clone()) {
                cols.push(v.clone());
            }
        }
        let k_in = inner.dim();
        let k_out = cols.len();
        for j in 0..n {
            let mut e = vec![0; n];
            e[j] = 1;
            if full.insert(e.clone()) {
                cols.push(e);
            }
        }
        let t = FpMat::from_cols(p, n, &cols);
        let tinv = t.inverse().expect("extended basis is invertible");
        let idx: Vec<usize> = (k_in..k_out).collect();
        let gens = self.generators.iter().map(|g| tinv.mul(&g.mul(&t)).submatrix(&idx, &idx)).collect();
        let outer_cols: Vec<usize> = (0..k_out).collect();
        let all: Vec<usize> = (0..n).collect();
        (KGModule { p, dim: k_out - k_in, generators: gens }, t.submatrix(&all, &outer_cols))
    }

    pub fn submodule(&self, s: &Subspace) -> KGModule {
        self.subquotient(&Subspace::new(self.p, self.dim), s).0
    }

    pub fn quotient(&self, s: &Subspace) -> KGModule {
        self.subquotient(s, &Subspace::full(self.p, self.dim)).0
    }

    /// Algebra elements used for fingerprints: generators, their pairwise
    /// products and sums.
    fn fingerprint_words(&self) -> Vec<FpMat> {
        let g = &self.generators;
        let mut words: Vec<FpMat> = g.clone();
        for i in 0..g.len() {
            for j in 0..g.len() {
                words.push(g[i].mul(&g[j]));
            }
            for j in i + 1..g.len() {
                words.push(g[i].add(&g[j]));
            }
        }
        if let Some(first) = g.first() {
            let mut prod = first.clone();
            for h in &g[1..] {
                prod = prod.mul(h);
            }
            words.push(prod.add(&FpMat::identity(self.p, self.dim)));
        }
        words
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint(self.fingerprint_words().iter().map(FpMat::charpoly).collect())
    }

    /// Basis of `Hom(self, other)`: matrices `φ` with `φ g = g' φ`.
    pub fn hom_space(&self, other: &KGModule) -> Vec<FpMat> {
        assert_eq!(self.generators.len(), other.generators.len());
        let p = self.p;
        let (d, n) = (self.dim, other.dim);
        let unknowns = n * d;
        if unknowns == 0 {
            return vec![];
        }
        let mut rows = Vec::new();
        for (u, v) in self.generators.iter().zip(&other.generators) {
            // (φ u - v φ)_{ab} = Σ_c φ_ac u_cb - Σ_c v_ac φ_cb
            for a in 0..n {
                for b in 0..d {
                    let mut row = vec![0u64; unknowns];
                    for c in 0..d {
                        row[a * d + c] = (row[a * d + c] + u[(c, b)]) % p;
                    }
                    for c in 0..n {
                        row[c * d + b] = (row[c * d + b] + p - v[(a, c)]) % p;
                    }
                    rows.push(row);
                }
            }
        }
        let sols = if rows.is_empty() {
            (0..unknowns)
                .map(|k| {
                    let mut v = vec![0; unknowns];
                    v[k] = 1;
                    v
                })
                .collect()
        } else {
            let m = FpMat::from_cols(p, unknowns, &rows).transpose();
            m.nullspace()
        };
        sols.into_iter()
            .map(|s| {
                let mut phi = FpMat::zeros(p, n, d);
                for a in 0..n {
                    for b in 0..d {
                        phi[(a, b)] = s[a * d + b];
                    }
                }
                phi
            })
            .collect()
    }

    /// Whether two irreducible modules are isomorphic.
    pub fn irreducibles_isomorphic(&self, other: &KGModule) -> bool {
        if self.dim != other.dim || self.generators.len() != other.generators.len() {
            return false;
        }
        if self.dim == 0 {
            return true;
        }
        if self.fingerprint() != other.fingerprint() {
            return false;
        }
        // by Schur, a nonzero homomorphism between irreducibles is invertible
        self.hom_space(other).iter().any(FpMat::is_invertible)
    }
}

impl fmt::Display for KGModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}-module of dim {}", self.p, self.dim)
    }
}

/// Characteristic polynomials of a fixed list of algebra elements.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub Vec<FpPoly>);

/// Composition factors up to isomorphism, with multiplicities.
#[derive(Clone, Debug)]
pub struct SSDecomp {
    p: u64,
    ngens: usize,
    factors: Vec<(KGModule, usize)>,
    fingerprint: Vec<(Fingerprint, usize)>,
}

impl SSDecomp {
    fn from_factors(p: u64, ngens: usize, list: Vec<KGModule>) -> SSDecomp {
        let mut classes: Vec<(KGModule, usize, Fingerprint)> = Vec::new();
        for m in list {
            let fp = m.fingerprint();
            match classes.iter_mut().find(|(c, _, cfp)| *cfp == fp && c.irreducibles_isomorphic(&m)) {
                Some(entry) => entry.1 += 1,
                None => classes.push((m, 1, fp)),
            }
        }
        classes.sort_by(|a, b| (a.0.dim, &a.2).cmp(&(b.0.dim, &b.2)));
        let fingerprint = classes.iter().map(|(_, k, f)| (f.clone(), *k)).collect();
        let factors = classes.into_iter().map(|(m, k, _)| (m, k)).collect();
        SSDecomp { p, ngens, factors, fingerprint }
    }

    pub fn factors(&self) -> &[(KGModule, usize)] {
        &self.factors
    }

    pub fn fingerprint(&self) -> &[(Fingerprint, usize)] {
        &self.fingerprint
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|(m, k)| m.dim * k).sum()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The semisimple module `(+) factor^mult`.
    pub fn module(&self) -> KGModule {
        let parts: Vec<&KGModule> = self.factors.iter().flat_map(|(m, k)| std::iter::repeat_n(m, *k)).collect();
        KGModule::direct_sum_all(self.p, self.ngens, &parts)
    }

    pub fn factor_dims(&self) -> Vec<(usize, usize)> {
        self.factors.iter().map(|(m, k)| (m.dim, *k)).collect()
    }
}

impl fmt::Display for SSDecomp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|(m, k)| format!("{}x{}", m.dim, k)).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// `L = Σ_w w M0` over words of length at most the word bound, checked stable.
pub fn stable_lattice(rep: &GroupRepK, m0: &Lattice) -> Result<Lattice> {
    if m0.dim() != rep.dim {
        return Err(Error::DimensionMismatch(m0.dim(), rep.dim));
    }
    let mut l = m0.clone();
    for _ in 0..=rep.word_bound {
        let images = rep.generators.iter().map(|g| l.transform(g)).collect::<Result<Vec<_>>>()?;
        let mut all: Vec<&Lattice> = images.iter().collect();
        all.push(&l);
        let next = lattice_sum_all(&all)?;
        if next == l {
            return Ok(l);
        }
        l = next;
    }
    Err(Error::UnboundedAction(rep.word_bound))
}

pub fn is_stable(rep: &GroupRepK, l: &Lattice) -> Result<bool> {
    for g in &rep.generators {
        if l.transform(g)? != *l {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Generator matrices in the basis of `L`, over `Z_(p)`.
pub fn integral_action(rep: &GroupRepK, basis: &QMat, p: u64) -> Result<Vec<QMat>> {
    let inv = basis.inverse().ok_or(Error::SingularBasis)?;
    rep.generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let c = &(&inv * g) * basis;
            let ok = c.is_integral(p) && c.inverse().is_some_and(|ci| ci.is_integral(p));
            if ok {
                Ok(c)
            } else {
                Err(Error::NotStable(i))
            }
        })
        .collect()
}

/// `E_L = L / πL` as an `F_p[G]`-module, in the canonical basis of `L`.
pub fn reduce_mod_pi(rep: &GroupRepK, l: &Lattice) -> Result<KGModule> {
    let p = l.p();
    let gens = integral_action(rep, &l.basis(), p)?
        .iter()
        .map(|c| FpMat::from_qmat(c, p))
        .collect::<Result<Vec<_>>>()?;
    Ok(KGModule::new_unchecked(p, rep.dim, gens))
}

pub fn semisimplify(e: &KGModule, seed: u64) -> SSDecomp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let list = composition_factors(e, &mut rng);
    SSDecomp::from_factors(e.p, e.generators.len(), list)
}

pub fn ss_isomorphic(a: &SSDecomp, b: &SSDecomp) -> Result<bool> {
    if a.ngens != b.ngens {
        return Err(Error::GeneratorCountMismatch(a.ngens, b.ngens));
    }
    if a.p != b.p || a.fingerprint != b.fingerprint {
        return Ok(false);
    }
    let mut used = vec![false; b.factors.len()];
    for (m, k) in &a.factors {
        let hit = b
            .factors
            .iter()
            .enumerate()
            .find(|(j, (n, kb))| !used[*j] && kb == k && m.irreducibles_isomorphic(n));
        match hit {
            Some((j, _)) => used[j] = true,
            None => return Ok(false),
        }
    }
    Ok(true)
}

pub fn brauer_nesbitt_check(rep: &GroupRepK, l: &Lattice, m: &Lattice, seed: u64) -> Result<bool> {
    let el = reduce_mod_pi(rep, l)?;
    let em = reduce_mod_pi(rep, m)?;
    ss_isomorphic(&semisimplify(&el, seed), &semisimplify(&em, seed.wrapping_add(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvr::ValConfig;
    use crate::fixtures;
    use crate::oracle::rat;
    use crate::random::random_lattice;
    use proptest::prelude::*;

    fn cfg(p: u64) -> ValConfig {
        ValConfig::new(p).unwrap()
    }

    fn module(p: u64, gens: &[&[Vec<i64>]]) -> KGModule {
        let n = gens[0].len();
        KGModule::new(p, n, gens.iter().map(|g| FpMat::from_rows(p, g)).collect()).unwrap()
    }

    #[test]
    fn stable_lattice_examples() {
        let t = fixtures::trivial(2);
        let m0 = Lattice::diag(&[rat(3, 1), rat(1, 5)], cfg(5)).unwrap();
        assert_eq!(stable_lattice(&t.rep, &m0).unwrap(), m0);
        let c2 = fixtures::c2_swap();
        let m0 = Lattice::diag(&[rat(1, 1), rat(1, 5)], cfg(5)).unwrap();
        let l = stable_lattice(&c2.rep, &m0).unwrap();
        assert_eq!(l, Lattice::diag(&[rat(1, 5), rat(1, 5)], cfg(5)).unwrap());
        assert!(is_stable(&c2.rep, &l).unwrap());
        assert_eq!(stable_lattice(&c2.rep, &l).unwrap(), l);
    }

    #[test]
    fn unbounded_action_is_reported() {
        let g = QMat::from_i64(&[&[1, 1], &[0, 1]]);
        let rep = GroupRepK::new(2, vec![g], 4).unwrap();
        let m0 = Lattice::diag(&[rat(1, 1), rat(1, 1)], cfg(3)).unwrap();
        // the unipotent matrix is integral, so this one stabilizes at once
        assert!(stable_lattice(&rep, &m0).is_ok());
        let h = QMat::diag(&[rat(1, 3), rat(1, 1)]);
        let rep = GroupRepK::new(2, vec![h], 4).unwrap();
        assert_eq!(stable_lattice(&rep, &m0), Err(Error::UnboundedAction(4)));
    }

    #[test]
    fn reduction_examples() {
        let t = fixtures::trivial(2);
        let e = reduce_mod_pi(&t.rep, &Lattice::standard(2, cfg(5))).unwrap();
        assert!(e.generators().iter().all(|g| *g == FpMat::identity(5, 2)));
        let c3 = fixtures::c3_plane();
        let e = reduce_mod_pi(&c3.rep, &Lattice::standard(2, cfg(3))).unwrap();
        assert_eq!(e.generators()[0], FpMat::from_rows(3, &[vec![0, -1], vec![1, -1]]));
        let not_stable = Lattice::diag(&[rat(3, 1), rat(1, 1)], cfg(3)).unwrap();
        assert_eq!(reduce_mod_pi(&c3.rep, &not_stable), Err(Error::NotStable(0)));
        let scaled = reduce_mod_pi(&c3.rep, &Lattice::standard(2, cfg(3)).scale_pi(1)).unwrap();
        assert_eq!(scaled.generators()[0].charpoly(), e.generators()[0].charpoly());
    }

    #[test]
    fn semisimplify_examples() {
        let one = module(5, &[&[vec![3]]]);
        assert_eq!(semisimplify(&one, 0).factor_dims(), vec![(1, 1)]);
        let c2 = module(3, &[&[vec![0, 1], vec![1, 0]]]);
        assert_eq!(semisimplify(&c2, 0).factor_dims(), vec![(1, 1), (1, 1)]);
        let c3 = module(3, &[&[vec![0, -1], vec![1, -1]]]);
        let ss = semisimplify(&c3, 0);
        assert_eq!(ss.factor_dims(), vec![(1, 2)]);
        assert_eq!(ss.factors()[0].0.generators()[0], FpMat::identity(3, 1));
        // x^2 + x + 1 is irreducible mod 5
        let c3_5 = module(5, &[&[vec![0, -1], vec![1, -1]]]);
        assert_eq!(semisimplify(&c3_5, 0).factor_dims(), vec![(2, 1)]);
    }

    #[test]
    fn quaternions_mod_three_split_as_two_planes() {
        let q = fixtures::q8();
        let e = reduce_mod_pi(&q.rep, &Lattice::standard(4, cfg(3))).unwrap();
        assert_eq!(semisimplify(&e, 3).factor_dims(), vec![(2, 2)]);
    }

    #[test]
    fn ss_isomorphic_examples() {
        let triv = module(5, &[&[vec![1]]]);
        let sign = module(5, &[&[vec![-1]]]);
        let a = semisimplify(&triv.direct_sum(&sign), 0);
        let b = semisimplify(&sign.direct_sum(&triv), 1);
        assert!(ss_isomorphic(&a, &a).unwrap());
        assert!(ss_isomorphic(&a, &b).unwrap());
        assert!(!ss_isomorphic(&semisimplify(&triv, 0), &semisimplify(&sign, 0)).unwrap());
        let two = module(5, &[&[vec![1]], &[vec![1]]]);
        assert_eq!(
            ss_isomorphic(&semisimplify(&triv, 0), &semisimplify(&two, 0)),
            Err(Error::GeneratorCountMismatch(1, 2))
        );
    }

    #[test]
    fn brauer_nesbitt_examples() {
        let c3 = fixtures::c3_plane();
        let l = Lattice::standard(2, cfg(3));
        assert!(brauer_nesbitt_check(&c3.rep, &l, &l.scale_pi(1), 0).unwrap());
    }

    #[test]
    fn irreducible_isomorphism_needs_more_than_generator_charpolys() {
        // two non-isomorphic 2-dim modules of the same generator char polys
        let a = module(5, &[&[vec![1, 1], vec![0, 1]]]);
        let b = module(5, &[&[vec![1, 0], vec![0, 1]]]);
        assert!(!a.irreducibles_isomorphic(&b));
        let sa = semisimplify(&a, 0);
        let sb = semisimplify(&b, 0);
        assert!(ss_isomorphic(&sa, &sb).unwrap());
    }

    #[test]
    fn dual_of_dual() {
        let m = module(7, &[&[vec![0, -1], vec![1, -1]], &[vec![0, 1], vec![1, 0]]]);
        assert_eq!(m.dual().dual(), m);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn brauer_nesbitt_on_random_stable_lattices(seed in any::<u64>(), g in 0usize..5, p in prop::sample::select(vec![3u64, 5, 7])) {
            use rand::SeedableRng;
            let fx = &fixtures::groups()[g];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = fx.rep.dim();
            let l = stable_lattice(&fx.rep, &random_lattice(&mut rng, n, cfg(p), 2)).unwrap();
            let m = stable_lattice(&fx.rep, &random_lattice(&mut rng, n, cfg(p), 2)).unwrap();
            prop_assert!(brauer_nesbitt_check(&fx.rep, &l, &m, seed).unwrap());
            let e = reduce_mod_pi(&fx.rep, &l).unwrap();
            let ss = semisimplify(&e, seed);
            prop_assert_eq!(ss.dim(), n);
            prop_assert!(ss_isomorphic(&ss, &semisimplify(&e, seed ^ 1)).unwrap());
        }

        #[test]
        fn factors_of_sub_and_quotient(seed in any::<u64>(), p in prop::sample::select(vec![2u64, 3, 5])) {
            use rand::{Rng, SeedableRng};
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let fx = fixtures::s3_perm();
            let e = reduce_mod_pi(&fx.rep, &Lattice::standard(3, cfg(p))).unwrap();
            let e = e.direct_sum(&e);
            let v: Vec<u64> = (0..e.dim()).map(|_| rng.gen_range(0..p)).collect();
            let s = e.spin(&[v]);
            let whole = semisimplify(&e, seed);
            let sub = semisimplify(&e.submodule(&s), seed);
            let quo = semisimplify(&e.quotient(&s), seed);
            let glued = semisimplify(&sub.module().direct_sum(&quo.module()), seed);
            prop_assert!(ss_isomorphic(&whole, &glued).unwrap());
        }
    }
}
