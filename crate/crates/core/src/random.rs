//! Seeded random inputs: lattices, forms, and modules with forms.

use num::{BigInt, Zero};
use rand::Rng;

use crate::dvr::{pi_pow, Rat, ValConfig};
use crate::forms::{Epsilon, FpForm, GramForm};
use crate::fp::FpMat;
use crate::isoforms::FormedKGModule;
use crate::lattices::Lattice;
use crate::modrep::{GroupRepK, KGModule};
use crate::pipeline::symmetrize;
use crate::qmat::QMat;

/// `u p^e` with `u` a small integer (possibly divisible by `p`, possibly zero)
/// and `e` in `[-vmax, vmax]`.
/// Zero, or a unit times `p^e` with `|e| <= vmax`.
pub fn random_entry<G: Rng>(rng: &mut G, p: u64, vmax: i64) -> Rat {
    let bound = (p * p) as i64;
    let u = loop {
        let u = rng.gen_range(-bound..=bound);
        if u == 0 || u % p as i64 != 0 {
            break u;
        }
    };
    let e = rng.gen_range(-vmax..=vmax);
    Rat::from_integer(BigInt::from(u)) * pi_pow(p, e)
}

pub fn random_matrix<G: Rng>(rng: &mut G, n: usize, p: u64, vmax: i64) -> QMat {
    let mut m = QMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = random_entry(rng, p, vmax);
        }
    }
    m
}

pub fn random_invertible<G: Rng>(rng: &mut G, n: usize, p: u64, vmax: i64) -> QMat {
    loop {
        let m = random_matrix(rng, n, p, vmax);
        if n == 0 || !m.det().is_zero() {
            return m;
        }
    }
}

/// A lattice whose basis entries have valuations in `[-vmax, vmax]`.
pub fn random_lattice<G: Rng>(rng: &mut G, n: usize, cfg: ValConfig, vmax: i64) -> Lattice {
    Lattice::from_basis(&random_invertible(rng, n, cfg.p(), vmax), cfg).expect("invertible basis")
}

/// A nondegenerate `ε`-symmetric form with entries of valuation in `[-vmax, vmax]`.
pub fn random_gram<G: Rng>(rng: &mut G, n: usize, eps: Epsilon, p: u64, vmax: i64) -> GramForm {
    assert!(eps == Epsilon::Symmetric || n.is_multiple_of(2), "alternating forms need even dimension");
    loop {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = random_entry(rng, p, vmax);
                match eps {
                    Epsilon::Symmetric => {
                        m[(i, j)] = x.clone();
                        m[(j, i)] = x;
                    }
                    Epsilon::Alternating if i != j => {
                        m[(i, j)] = x.clone();
                        m[(j, i)] = -x;
                    }
                    Epsilon::Alternating => {}
                }
            }
        }
        if let Ok(b) = GramForm::new(m, eps) {
            return b;
        }
    }
}

/// An invariant form for `rep`, by averaging a random one over the group.
pub fn random_invariant_form<G: Rng>(rng: &mut G, rep: &GroupRepK, eps: Epsilon, p: u64, vmax: i64, order: usize) -> Option<GramForm> {
    for _ in 0..20 {
        let b0 = random_gram(rng, rep.dim(), eps, p, vmax);
        if let Ok(b) = symmetrize(rep, b0.matrix(), eps, order.max(1)) {
            return Some(b);
        }
    }
    None
}

pub fn random_fp_invertible<G: Rng>(rng: &mut G, p: u64, n: usize) -> FpMat {
    loop {
        let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..p as i64)).collect()).collect();
        let m = FpMat::from_rows(p, &rows);
        if m.is_invertible() || n == 0 {
            return m;
        }
    }
}

/// Change of basis by `t`: generators `t⁻¹ g t` and form `tᵀ b t`.
pub fn conjugate(f: &FormedKGModule, t: &FpMat) -> FormedKGModule {
    let tinv = t.inverse().expect("invertible change of basis");
    let m = f.module();
    let gens = m.generators().iter().map(|g| tinv.mul(&g.mul(t))).collect();
    let module = KGModule::new(m.p(), m.dim(), gens).expect("conjugate of invertible");
    let form = FpForm::new(t.transpose().mul(f.form().matrix()).mul(t), f.epsilon()).expect("isometric form");
    FormedKGModule::new(module, form).expect("conjugation preserves compatibility")
}

/// `Y ⊕ Y'` with the hyperbolic `ε`-pairing.
pub fn hyperbolic(y: &KGModule, eps: Epsilon) -> FormedKGModule {
    let p = y.p();
    let d = y.dim();
    let mut h = FpMat::zeros(p, 2 * d, 2 * d);
    for i in 0..d {
        h[(i, d + i)] = 1;
        h[(d + i, i)] = if eps == Epsilon::Symmetric { 1 } else { p - 1 };
    }
    let form = if d == 0 { FpForm::zero_dim(p, eps) } else { FpForm::new(h, eps).expect("hyperbolic form") };
    FormedKGModule::new(y.direct_sum(&y.dual()), form).expect("hyperbolic pairing is compatible")
}
