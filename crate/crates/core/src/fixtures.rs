//! Small finite groups given by integral generator matrices, and invariant
//! forms on them.

use crate::dvr::Rat;
use crate::error::Result;
use crate::forms::{Epsilon, GramForm};
use crate::modrep::GroupRepK;
use crate::qmat::QMat;

/// A named representation together with its group order.
#[derive(Clone, Debug)]
pub struct RepFixture {
    pub name: &'static str,
    pub order: usize,
    pub rep: GroupRepK,
}

fn fixture(name: &'static str, order: usize, dim: usize, gens: &[&[&[i64]]]) -> RepFixture {
    let gens = gens.iter().map(|g| QMat::from_i64(g)).collect();
    RepFixture { name, order, rep: GroupRepK::new(dim, gens, order).expect("fixture generators are invertible") }
}

pub fn trivial(dim: usize) -> RepFixture {
    let id = QMat::identity(dim);
    RepFixture { name: "trivial", order: 1, rep: GroupRepK::new(dim, vec![id], 1).expect("identity") }
}

/// `C2` swapping two coordinates.
pub fn c2_swap() -> RepFixture {
    fixture("C2", 2, 2, &[&[&[0, 1], &[1, 0]]])
}

/// `C3` acting on the plane `x + y + z = 0`.
pub fn c3_plane() -> RepFixture {
    fixture("C3", 3, 2, &[&[&[0, -1], &[1, -1]]])
}

/// `C3` permuting three coordinates.
pub fn c3_perm() -> RepFixture {
    fixture("C3-perm", 3, 3, &[&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]])
}

/// The standard two-dimensional representation of `S3`.
pub fn s3_standard() -> RepFixture {
    fixture("S3", 6, 2, &[&[&[0, -1], &[1, -1]], &[&[0, 1], &[1, 0]]])
}

/// `S3` permuting three coordinates.
pub fn s3_perm() -> RepFixture {
    fixture(
        "S3-perm",
        6,
        3,
        &[&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]], &[&[0, 1, 0], &[1, 0, 0], &[0, 0, 1]]],
    )
}

/// Symmetries of the square.
pub fn d4() -> RepFixture {
    fixture("D4", 8, 2, &[&[&[0, -1], &[1, 0]], &[&[1, 0], &[0, -1]]])
}

/// Quaternions acting on themselves by left multiplication, basis `1, i, j, k`.
pub fn q8() -> RepFixture {
    fixture(
        "Q8",
        8,
        4,
        &[
            &[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]],
            &[&[0, 0, -1, 0], &[0, 0, 0, 1], &[1, 0, 0, 0], &[0, -1, 0, 0]],
        ],
    )
}

/// The fixtures used for reduction checks.
pub fn groups() -> Vec<RepFixture> {
    vec![c2_swap(), c3_plane(), s3_standard(), d4(), q8()]
}

/// An invariant form on a fixture, with the primes it is meant for.
#[derive(Clone, Debug)]
pub struct FormFixture {
    pub name: &'static str,
    pub rep: RepFixture,
    pub form: GramForm,
    pub primes: Vec<u64>,
}

fn form(name: &'static str, rep: RepFixture, m: &[&[i64]], eps: Epsilon, primes: &[u64]) -> FormFixture {
    let form = GramForm::new(QMat::from_i64(m), eps).expect("fixture form is valid");
    FormFixture { name, rep, form, primes: primes.to_vec() }
}

/// The alternating form `B(x, y) = <x, y i>` style pairing invariant under
/// left multiplication by `Q8`.
pub fn q8_alternating() -> QMat {
    QMat::from_i64(&[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, -1, 0]])
}

pub fn form_fixtures() -> Vec<FormFixture> {
    use Epsilon::{Alternating, Symmetric};
    let mut out = vec![
        form("trivial-identity", trivial(2), &[&[1, 0], &[0, 1]], Symmetric, &[5]),
        form("S3-ramified", s3_standard(), &[&[2, -1], &[-1, 2]], Symmetric, &[3, 5, 7]),
        form("C2-identity", c2_swap(), &[&[1, 0], &[0, 1]], Symmetric, &[3, 5]),
        form("C2-ramified", c2_swap(), &[&[1, 5], &[5, 1]], Symmetric, &[3, 5]),
        form("C3-perm-identity", c3_perm(), &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]], Symmetric, &[3, 5]),
        form("S3-perm-identity", s3_perm(), &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]], Symmetric, &[3, 7]),
        form("D4-scaled", d4(), &[&[3, 0], &[0, 3]], Symmetric, &[3, 5]),
        form("D4-ramified-squared", d4(), &[&[75, 0], &[0, 75]], Symmetric, &[5]),
        form("C3-symplectic", c3_plane(), &[&[0, 1], &[-1, 0]], Alternating, &[2, 3, 5]),
        form("C3-symplectic-scaled", c3_plane(), &[&[0, 9], &[-9, 0]], Alternating, &[3]),
    ];
    out.push(FormFixture {
        name: "Q8-symplectic",
        rep: q8(),
        form: GramForm::new(q8_alternating(), Alternating).expect("valid"),
        primes: vec![3, 5],
    });
    out
}

/// Diagonal scaling `diag(p^e_1, ..., p^e_n)`, for building starting lattices.
pub fn diag_pi(p: u64, exps: &[i64]) -> QMat {
    let entries: Vec<Rat> = exps.iter().map(|&e| crate::dvr::pi_pow(p, e)).collect();
    QMat::diag(&entries)
}

pub fn check_fixture(f: &FormFixture) -> Result<()> {
    for (i, g) in f.rep.rep.generators().iter().enumerate() {
        if !f.form.is_invariant_under(g) {
            return Err(crate::Error::NotInvariant(i));
        }
    }
    Ok(())
}
