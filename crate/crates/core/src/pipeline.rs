//! From an invariant form on `Q^n` to a compatible form on the reduction
//! `V_k`, split as `E₁ ⊕ E₂` with the Springer residues as Witt classes.

use std::collections::HashSet;
use std::fmt;

use crate::dvr::ValConfig;
use crate::error::{Error, Result};
use crate::forms::{asd_thompson, asd_via_middle, dual_lattice, is_almost_self_dual, residual_forms, Epsilon, FpForm, GramForm};
use crate::fp::FpMat;
use crate::isoforms::{ss_with_form, FormedKGModule};
use crate::lattices::{middle_upper, Lattice};
use crate::modrep::{integral_action, is_stable, semisimplify, ss_isomorphic, stable_lattice, GroupRepK, KGModule};
use crate::qmat::QMat;
use crate::witt::{diagonalize_compatible, springer_residues, witt_class_of_form, WittClass};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputSummary {
    pub dim: usize,
    pub epsilon: Epsilon,
    pub p: u64,
    pub generators: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub ok: bool,
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub input: InputSummary,
    pub stable_lattice: Lattice,
    pub asd_lattice: Lattice,
    /// `L/πL` in the splitting basis of `(L, L')`.
    pub vk: KGModule,
    pub f1: Option<FormedKGModule>,
    pub f2: Option<FormedKGModule>,
    pub e1: Option<FormedKGModule>,
    pub e2: Option<FormedKGModule>,
    /// Springer residues `(∂₁ q, ∂₂ q)`; orthogonal case only.
    pub springer: Option<(WittClass, WittClass)>,
    /// Witt classes of the forms on `E₁`, `E₂`; orthogonal case only.
    pub witt_e: Option<(WittClass, WittClass)>,
    pub checks: Vec<Check>,
}

impl ReductionReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.ok).map(|c| c.name).collect()
    }

    /// `E₁ ⊕ E₂` with the orthogonal-sum form.
    pub fn total(&self) -> Option<FormedKGModule> {
        Some(self.e1.as_ref()?.orthogonal_sum(self.e2.as_ref()?))
    }
}

impl fmt::Display for ReductionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {} over Q, eps {}, p = {}, {} generators", self.input.dim, self.input.epsilon, self.input.p, self.input.generators)?;
        writeln!(f, "almost self-dual lattice: {}", self.asd_lattice)?;
        for (name, e) in [("E1", &self.e1), ("E2", &self.e2)] {
            match e {
                Some(e) => writeln!(f, "{name}: dim {}, form {}", e.dim(), e.form())?,
                None => writeln!(f, "{name}: not computed")?,
            }
        }
        if let (Some((d1, d2)), Some((w1, w2))) = (&self.springer, &self.witt_e) {
            writeln!(f, "springer residues: d1 = {d1}, d2 = {d2}")?;
            writeln!(f, "witt classes:      E1 = {w1}, E2 = {w2}")?;
        }
        for c in &self.checks {
            writeln!(f, "  [{}] {}", if c.ok { "ok" } else { "FAILED" }, c.name)?;
        }
        Ok(())
    }
}

fn check_preconditions(rep: &GroupRepK, b: &GramForm, cfg: ValConfig) -> Result<()> {
    if rep.dim() != b.dim() {
        return Err(Error::DimensionMismatch(rep.dim(), b.dim()));
    }
    if b.epsilon() == Epsilon::Symmetric && cfg.p() == 2 {
        return Err(Error::WrongCharacteristic);
    }
    if let Some(i) = rep.generators().iter().position(|g| !b.is_invariant_under(g)) {
        return Err(Error::NotInvariant(i));
    }
    Ok(())
}

pub fn reduce_with_form(rep: &GroupRepK, b: &GramForm, cfg: ValConfig, seed: u64) -> Result<ReductionReport> {
    reduce_with_form_from(rep, b, &Lattice::standard(rep.dim(), cfg), seed)
}

/// As `reduce_with_form`, spinning the stable lattice from `m0`.
pub fn reduce_with_form_from(rep: &GroupRepK, b: &GramForm, m0: &Lattice, seed: u64) -> Result<ReductionReport> {
    let cfg = m0.config();
    check_preconditions(rep, b, cfg)?;
    let p = cfg.p();
    let n = rep.dim();
    let eps = b.epsilon();
    let mut checks = Vec::new();
    let mut check = |name: &'static str, ok: bool| checks.push(Check { name, ok });

    let l0 = stable_lattice(rep, m0)?;
    check("stable_lattice", is_stable(rep, &l0)?);
    let l0_dual = dual_lattice(&l0, b)?;
    let asd = asd_via_middle(&l0, b)?;
    check("asd_almost_self_dual", is_almost_self_dual(&asd, b)?);
    check("asd_dual_is_upper_middle", dual_lattice(&asd, b)? == middle_upper(&l0, &l0_dual)?);
    check("asd_thompson_agrees", asd_thompson(&l0, b)? == asd);
    check("asd_stable", is_stable(rep, &asd)?);

    let rf = residual_forms(&asd, b)?;
    let (zero, one) = rf.index_split();
    let action = integral_action(rep, &rf.basis_witness.basis, p)?;
    let gens: Vec<FpMat> = action.iter().map(|c| FpMat::from_qmat(c, p)).collect::<Result<_>>()?;
    let vk = KGModule::new(p, n, gens.clone())?;
    let restrict = |idx: &[usize]| {
        KGModule::new(p, idx.len(), gens.iter().map(|g| g.submatrix(idx, idx)).collect())
    };
    // πL'/πL (indices with e = 1) is a submodule of L/πL
    let lower_left_zero = gens.iter().all(|g| one.iter().all(|&i| zero.iter().all(|&j| g[(j, i)] == 0)));
    check("f2_is_submodule", lower_left_zero);
    let m1 = restrict(&zero)?;
    let m2 = restrict(&one)?;
    let f1 = FormedKGModule::new(m1, rf.b1.clone());
    let f2 = FormedKGModule::new(m2, rf.b2.clone());
    check("f1_form_compatible", f1.is_ok());
    check("f2_form_compatible", f2.is_ok());
    let (f1, f2) = (f1.ok(), f2.ok());

    let e1 = f1.as_ref().map(|f| ss_with_form(f, seed)).transpose().ok().flatten();
    let e2 = f2.as_ref().map(|f| ss_with_form(f, seed.wrapping_add(7))).transpose().ok().flatten();
    check("e1_form_compatible", e1.is_some());
    check("e2_form_compatible", e2.is_some());

    let mut springer = None;
    let mut witt_e = None;
    if let (Some(e1), Some(e2)) = (&e1, &e2) {
        let total = e1.orthogonal_sum(e2);
        let ss_total = semisimplify(total.module(), seed.wrapping_add(11));
        let ss_vk = semisimplify(&vk, seed.wrapping_add(13));
        check("vk_semisimplification", ss_isomorphic(&ss_total, &ss_vk)?);
        check("e1_is_f1_semisimplified", ss_matches(e1, f1.as_ref(), seed)?);
        check("e2_is_f2_semisimplified", ss_matches(e2, f2.as_ref(), seed)?);
        match eps {
            Epsilon::Symmetric => {
                let (diag, _) = diagonalize_compatible(b, &asd)?;
                let (d1, d2) = springer_residues(&diag, cfg)?;
                let w1 = witt_class_of_form(e1.form())?;
                let w2 = witt_class_of_form(e2.form())?;
                let wt = witt_class_of_form(total.form())?;
                check("witt_e1_is_d1", w1 == d1);
                check("witt_e2_is_d2", w2 == d2);
                check("witt_vk_is_d1_plus_d2", wt == d1 + d2);
                springer = Some((d1, d2));
                witt_e = Some((w1, w2));
            }
            Epsilon::Alternating => {
                let ok = total.dim() == n && e1.dim() % 2 == 0 && e2.dim() % 2 == 0;
                check("alternating_rank", ok && total.form().matrix().is_invertible() || n == 0);
            }
        }
    }

    Ok(ReductionReport {
        input: InputSummary { dim: n, epsilon: eps, p, generators: rep.generators().len() },
        stable_lattice: l0,
        asd_lattice: asd,
        vk,
        f1,
        f2,
        e1,
        e2,
        springer,
        witt_e,
        checks,
    })
}

fn ss_matches(e: &FormedKGModule, f: Option<&FormedKGModule>, seed: u64) -> Result<bool> {
    let Some(f) = f else { return Ok(false) };
    ss_isomorphic(&semisimplify(e.module(), seed.wrapping_add(17)), &semisimplify(f.module(), seed.wrapping_add(19)))
}

/// All group elements generated by the representation, identity first, in
/// breadth-first order. Fails if more than `limit` elements appear.
pub fn group_elements(rep: &GroupRepK, limit: usize) -> Result<Vec<QMat>> {
    let id = QMat::identity(rep.dim());
    let mut seen: HashSet<QMat> = HashSet::from([id.clone()]);
    let mut out = vec![id];
    let mut next = 0;
    while next < out.len() {
        let h = out[next].clone();
        for g in rep.generators() {
            let gh = g * &h;
            if seen.insert(gh.clone()) {
                if out.len() >= limit {
                    return Err(Error::UnboundedAction(limit));
                }
                out.push(gh);
            }
        }
        next += 1;
    }
    Ok(out)
}

/// `Σ_h hᵀ B₀ h` over the group; an invariant form if nondegenerate.
pub fn symmetrize(rep: &GroupRepK, b0: &QMat, eps: Epsilon, limit: usize) -> Result<GramForm> {
    let mut acc = QMat::zeros(rep.dim(), rep.dim());
    for h in group_elements(rep, limit)? {
        acc = acc.add(&(&(&h.transpose() * b0) * &h));
    }
    GramForm::new(acc, eps)
}

/// Checks a residual form against a module: `gᵀ b g = b` for every generator.
pub fn form_is_compatible(m: &KGModule, b: &FpForm) -> bool {
    m.generators().iter().all(|g| b.is_invariant_under(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::form_fixtures;

    #[test]
    fn fixture_corpus_passes_all_checks() {
        for f in form_fixtures() {
            for &p in &f.primes {
                let cfg = ValConfig::new(p).unwrap();
                let r = reduce_with_form(&f.rep.rep, &f.form, cfg, 1).unwrap();
                assert!(r.all_ok(), "{} at p = {p}: failed {:?}\n{r}", f.name, r.failed());
            }
        }
    }

    #[test]
    fn s3_ramified_form_at_three() {
        let f = form_fixtures().into_iter().find(|f| f.name == "S3-ramified").unwrap();
        let r = reduce_with_form(&f.rep.rep, &f.form, ValConfig::new(3).unwrap(), 0).unwrap();
        assert!(r.all_ok());
        assert_eq!(r.e1.as_ref().unwrap().dim(), 1);
        assert_eq!(r.e2.as_ref().unwrap().dim(), 1);
        let (d1, d2) = r.springer.unwrap();
        // <2> over F_3: odd rank, non-square discriminant
        for d in [d1, d2] {
            assert_eq!((d.rank_parity(), d.disc_class()), (1, 2));
        }
    }

    #[test]
    fn trivial_group_identity_form() {
        let f = form_fixtures().into_iter().find(|f| f.name == "trivial-identity").unwrap();
        let r = reduce_with_form(&f.rep.rep, &f.form, ValConfig::new(5).unwrap(), 0).unwrap();
        assert_eq!(r.e1.as_ref().unwrap().dim(), 2);
        assert_eq!(r.e2.as_ref().unwrap().dim(), 0);
        let (d1, d2) = r.springer.unwrap();
        assert!(d1.is_zero() && d2.is_zero());
    }

    #[test]
    fn rejects_non_invariant_form_and_even_orthogonal() {
        let f = crate::fixtures::s3_standard();
        let b = GramForm::new(QMat::from_i64(&[&[2, 1], &[1, 2]]), Epsilon::Symmetric).unwrap();
        let cfg = ValConfig::new(3).unwrap();
        assert!(matches!(reduce_with_form(&f.rep, &b, cfg, 0), Err(Error::NotInvariant(_))));
        let t = crate::fixtures::trivial(2);
        let id = GramForm::new(QMat::identity(2), Epsilon::Symmetric).unwrap();
        let cfg2 = ValConfig::new(2).unwrap();
        assert_eq!(reduce_with_form(&t.rep, &id, cfg2, 0).unwrap_err(), Error::WrongCharacteristic);
    }

    #[test]
    fn q8_symplectic_rank() {
        let f = form_fixtures().into_iter().find(|f| f.name == "Q8-symplectic").unwrap();
        let r = reduce_with_form(&f.rep.rep, &f.form, ValConfig::new(3).unwrap(), 0).unwrap();
        assert!(r.all_ok());
        let t = r.total().unwrap();
        assert_eq!(t.dim(), 4);
        assert_eq!(t.epsilon(), Epsilon::Alternating);
    }
}
