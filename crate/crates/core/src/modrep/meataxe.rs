use rand::Rng;

use super::KGModule;
use crate::dvr::inv_mod;
use crate::fp::FpMat;

/// Subspace of `F_p^n` kept in semi-echelon form: every stored vector has a
/// pivot entry equal to 1 and zeros at the pivots of earlier vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    p: u64,
    n: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn new(p: u64, n: usize) -> Subspace {
        Subspace { p, n, rows: vec![], pivots: vec![] }
    }

    pub fn full(p: u64, n: usize) -> Subspace {
        let mut s = Subspace::new(p, n);
        for j in 0..n {
            let mut e = vec![0; n];
            e[j] = 1;
            s.insert(e);
        }
        s
    }

    pub fn from_vectors(p: u64, n: usize, vs: &[Vec<u64>]) -> Subspace {
        let mut s = Subspace::new(p, n);
        for v in vs {
            s.insert(v.clone());
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &[Vec<u64>] {
        &self.rows
    }

    /// Basis vectors as the columns of an `n × dim` matrix.
    pub fn basis_matrix(&self) -> FpMat {
        FpMat::from_cols(self.p, self.n, &self.rows)
    }

    fn reduce(&self, v: &mut [u64]) {
        let p = self.p;
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let f = v[pc];
            if f != 0 {
                for (x, r) in v.iter_mut().zip(row) {
                    *x = (*x + (p - f) * r) % p;
                }
            }
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|&x| x == 0)
    }

    /// Adds `v`; returns whether the dimension grew.
    pub fn insert(&mut self, mut v: Vec<u64>) -> bool {
        self.reduce(&mut v);
        let Some(pc) = v.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(v[pc], self.p);
        for x in v.iter_mut() {
            *x = *x * inv % self.p;
        }
        self.rows.push(v);
        self.pivots.push(pc);
        true
    }

    /// Closes the span of `self ∪ vectors` under the given matrices.
    pub fn spin_in(&mut self, vectors: &[Vec<u64>], gens: &[FpMat]) {
        let start = self.rows.len();
        for v in vectors {
            self.insert(v.clone());
        }
        let mut next = start.min(self.rows.len());
        // earlier rows are assumed already closed
        while next < self.rows.len() {
            let v = self.rows[next].clone();
            for g in gens {
                self.insert(g.mul_vec(&v));
            }
            next += 1;
        }
    }

    pub fn contains_space(&self, other: &Subspace) -> bool {
        other.rows.iter().all(|v| self.contains(v))
    }
}

const MAX_ATTEMPTS: usize = 4000;

/// Random algebra elements: a growing pool of products and sums of the
/// generators, combined with random coefficients.
struct ElementSource {
    pool: Vec<FpMat>,
}

impl ElementSource {
    fn new(m: &KGModule) -> ElementSource {
        ElementSource { pool: m.generators().to_vec() }
    }

    fn next<G: Rng>(&mut self, p: u64, n: usize, rng: &mut G) -> FpMat {
        if self.pool.is_empty() {
            return FpMat::zeros(p, n, n);
        }
        let k = self.pool.len();
        let x = &self.pool[rng.gen_range(0..k)];
        let y = &self.pool[rng.gen_range(0..k)];
        let z = x.mul(y);
        if self.pool.len() < 12 {
            self.pool.push(z.clone());
        } else {
            let slot = rng.gen_range(0..self.pool.len());
            self.pool[slot] = z;
        }
        let mut a = FpMat::zeros(p, n, n);
        for m in &self.pool {
            a = a.add(&m.scale(rng.gen_range(0..p)));
        }
        a
    }
}

enum Split {
    Irreducible,
    Proper(Subspace),
}

fn find_split<G: Rng>(m: &KGModule, rng: &mut G) -> Split {
    let p = m.p();
    let n = m.dim();
    if n <= 1 {
        return Split::Irreducible;
    }
    let gens = m.generators();
    let gens_t: Vec<FpMat> = gens.iter().map(FpMat::transpose).collect();
    // the zero algebra: any line is a submodule
    if gens.iter().all(FpMat::is_zero) {
        let mut e = vec![0; n];
        e[0] = 1;
        return Split::Proper(Subspace::from_vectors(p, n, &[e]));
    }
    let mut src = ElementSource::new(m);
    for _ in 0..MAX_ATTEMPTS {
        let a = src.next(p, n, rng);
        for f in a.charpoly().irreducible_factors(rng) {
            let fa = a.eval_poly(&f);
            let kernel = fa.nullspace();
            let Some(v) = kernel.first() else { continue };
            let s = m.spin(std::slice::from_ref(v));
            if s.dim() < n {
                return Split::Proper(s);
            }
            let kt = fa.transpose().nullspace();
            let w = &kt[0];
            let mut st = Subspace::new(p, n);
            st.spin_in(std::slice::from_ref(w), &gens_t);
            if st.dim() < n {
                // the annihilator of a submodule of the dual is a submodule
                let ann = FpMat::from_cols(p, n, st.vectors()).transpose().nullspace();
                return Split::Proper(Subspace::from_vectors(p, n, &ann));
            }
            if kernel.len() == f.degree() {
                return Split::Irreducible;
            }
        }
    }
    panic!("meataxe did not settle a {n}-dimensional module over F_{p} in {MAX_ATTEMPTS} attempts");
}

/// Irreducible composition factors, in no particular order.
pub fn composition_factors<G: Rng>(m: &KGModule, rng: &mut G) -> Vec<KGModule> {
    if m.dim() == 0 {
        return vec![];
    }
    match find_split(m, rng) {
        Split::Irreducible => vec![m.clone()],
        Split::Proper(s) => {
            let mut out = composition_factors(&m.submodule(&s), rng);
            out.extend(composition_factors(&m.quotient(&s), rng));
            out
        }
    }
}
