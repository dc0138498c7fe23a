//! Compatible forms on the semisimplification of a module with an invariant
//! `ε`-symmetric form, via a maximal totally isotropic submodule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::forms::{Epsilon, FpForm};
use crate::fp::FpMat;
use crate::modrep::{composition_factors, semisimplify, KGModule, Subspace};

/// An `F_p[G]`-module with a nondegenerate invariant form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormedKGModule {
    module: KGModule,
    form: FpForm,
}

impl FormedKGModule {
    pub fn new(module: KGModule, form: FpForm) -> Result<FormedKGModule> {
        if module.dim() != form.dim() {
            return Err(Error::DimensionMismatch(module.dim(), form.dim()));
        }
        if module.p() != form.p() {
            return Err(Error::PrimeMismatch(module.p(), form.p()));
        }
        if form.epsilon() == Epsilon::Symmetric && module.p() == 2 {
            return Err(Error::WrongCharacteristic);
        }
        if let Some(i) = module.generators().iter().position(|g| !form.is_invariant_under(g)) {
            return Err(Error::IncompatibleForm(i));
        }
        Ok(FormedKGModule { module, form })
    }

    pub fn module(&self) -> &KGModule {
        &self.module
    }

    pub fn form(&self) -> &FpForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn epsilon(&self) -> Epsilon {
        self.form.epsilon()
    }

    pub fn orthogonal_sum(&self, other: &FormedKGModule) -> FormedKGModule {
        FormedKGModule { module: self.module.direct_sum(&other.module), form: self.form.orthogonal_sum(&other.form) }
    }
}

/// A totally isotropic submodule `S`, its orthogonal `S⊥`, and the induced
/// form on `X = S⊥/S`.
#[derive(Clone, Debug)]
pub struct IsotropicTower {
    pub s: Subspace,
    pub s_perp: Subspace,
    /// Columns: a basis of a complement of `S` in `S⊥`.
    pub complement: FpMat,
    pub x_module: KGModule,
    pub x_form: FpForm,
}

/// `{v : B(s, v) = 0 for all s ∈ S}`.
fn orthogonal(s: &Subspace, b: &FpMat) -> Subspace {
    let p = b.p();
    let n = b.rows();
    if s.dim() == 0 {
        return Subspace::full(p, n);
    }
    let rows = s.basis_matrix().transpose().mul(b);
    Subspace::from_vectors(p, n, &rows.nullspace())
}

fn induced(module: &KGModule, b: &FpForm, s: &Subspace) -> Result<(Subspace, FpMat, KGModule, FpForm)> {
    let perp = orthogonal(s, b.matrix());
    let (x, basis) = module.subquotient(s, &perp);
    let k = s.dim();
    let rows: Vec<usize> = (0..module.dim()).collect();
    let cols: Vec<usize> = (k..basis.cols()).collect();
    let m = basis.submatrix(&rows, &cols);
    let form = FpForm::new(m.transpose().mul(b.matrix()).mul(&m), b.epsilon())?;
    Ok((perp, m, x, form))
}

/// Number of independent equations in `φᵀ b φ = 0` for `φ` of rank `d`.
fn isotropy_equations(d: usize, eps: Epsilon) -> usize {
    match eps {
        Epsilon::Symmetric => d * (d + 1) / 2,
        Epsilon::Alternating => d * d.saturating_sub(1) / 2,
    }
}

/// Searches `Hom(U, X)` for an embedding with totally isotropic image.
/// Restricting to `2E + 1` coordinates is enough when a solution must exist
/// by the Chevalley-Warning theorem, so the search is complete.
fn isotropic_embedding(u: &KGModule, x: &KGModule, b: &FpMat, eps: Epsilon) -> Option<FpMat> {
    let homs = u.hom_space(x);
    if homs.is_empty() {
        return None;
    }
    let p = b.p();
    let k = homs.len().min(2 * isotropy_equations(u.dim(), eps) + 1);
    let zero = FpMat::zeros(p, u.dim(), u.dim());
    // projective points: leading nonzero coordinate equal to 1
    for lead in 0..k {
        let free = k - lead - 1;
        let count = p.checked_pow(free as u32).expect("hom space search too large");
        for idx in 0..count {
            let mut c = vec![0u64; k];
            c[lead] = 1;
            let mut t = idx;
            for slot in c.iter_mut().skip(lead + 1) {
                *slot = t % p;
                t /= p;
            }
            let mut phi = FpMat::zeros(p, x.dim(), u.dim());
            for (ci, h) in c.iter().zip(&homs) {
                if *ci != 0 {
                    phi = phi.add(&h.scale(*ci));
                }
            }
            if phi.transpose().mul(b).mul(&phi) == zero {
                return Some(phi);
            }
        }
    }
    None
}

/// Distinct isomorphism types of composition factors.
fn factor_types(m: &KGModule, seed: u64) -> Vec<KGModule> {
    semisimplify(m, seed).factors().iter().map(|(f, _)| f.clone()).collect()
}

pub fn max_isotropic_tower(f: &FormedKGModule, seed: u64) -> Result<IsotropicTower> {
    FormedKGModule::new(f.module.clone(), f.form.clone())?;
    let p = f.module.p();
    let n = f.dim();
    let eps = f.epsilon();
    let mut s = Subspace::new(p, n);
    let mut round = 0u64;
    loop {
        let (perp, comp, x, xf) = induced(&f.module, &f.form, &s)?;
        let mut grown = false;
        for u in factor_types(&x, seed.wrapping_add(round)) {
            if let Some(phi) = isotropic_embedding(&u, &x, xf.matrix(), eps) {
                let lifted = comp.mul(&phi);
                let cols: Vec<Vec<u64>> = (0..lifted.cols()).map(|j| lifted.col(j)).collect();
                for v in cols {
                    s.insert(v);
                }
                grown = true;
                break;
            }
        }
        round += 1;
        if !grown {
            return Ok(IsotropicTower { s, s_perp: perp, complement: comp, x_module: x, x_form: xf });
        }
    }
}

/// Whether some simple submodule of `X` is totally isotropic.
pub fn has_isotropic_simple(x: &KGModule, b: &FpForm, seed: u64) -> bool {
    factor_types(x, seed).iter().any(|u| isotropic_embedding(u, x, b.matrix(), b.epsilon()).is_some())
}

/// `X ⊕ S^ss ⊕ (S^ss)'` with `b_X` on `X` and the standard hyperbolic pairing
/// between `S^ss` and its dual.
pub fn ss_with_form(f: &FormedKGModule, seed: u64) -> Result<FormedKGModule> {
    let tower = max_isotropic_tower(f, seed)?;
    let p = f.module.p();
    let ngens = f.module.num_generators();
    let s_mod = f.module.submodule(&tower.s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let factors = composition_factors(&s_mod, &mut rng);
    let parts: Vec<&KGModule> = factors.iter().collect();
    let y = KGModule::direct_sum_all(p, ngens, &parts);
    let y_dual = y.dual();
    let d = y.dim();
    let mut h = FpMat::zeros(p, 2 * d, 2 * d);
    let eps_entry = match f.epsilon() {
        Epsilon::Symmetric => 1,
        Epsilon::Alternating => p - 1,
    };
    for i in 0..d {
        h[(i, d + i)] = 1;
        h[(d + i, i)] = eps_entry % p;
    }
    let hyper = if d == 0 { FpForm::zero_dim(p, f.epsilon()) } else { FpForm::new(h, f.epsilon())? };
    let module = tower.x_module.direct_sum(&y).direct_sum(&y_dual);
    let form = tower.x_form.orthogonal_sum(&hyper);
    FormedKGModule::new(module, form)
}
