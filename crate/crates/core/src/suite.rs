//! The property suite behind `selftest` and the acceptance tests: nine
//! criteria, each run over seeded random or exhaustive cases.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dvr::{int_middles, pi_pow, unit_part, Rat, ValConfig};
use crate::error::Result;
use crate::fixtures::{form_fixtures, groups, FormFixture};
use crate::forms::{
    asd_thompson_traced, asd_via_middle, dual_lattice, is_almost_self_dual, thompson_rescale, Epsilon, FpForm,
    GramForm,
};
use crate::isoforms::{has_isotropic_simple, max_isotropic_tower, ss_with_form, FormedKGModule};
use crate::lattices::{
    compatible_splitting, middle_lower_with_range, middle_range, middle_upper, middle_upper_with_range, middles,
    torsion_middles, twist, Lattice, TorsionModule,
};
use crate::modrep::{brauer_nesbitt_check, reduce_mod_pi, semisimplify, ss_isomorphic, stable_lattice, KGModule};
use crate::oracle::{square_class_patterns, witt_matches_kernel, ExplicitTorsion};
use crate::pipeline::{reduce_with_form_from, ReductionReport};
use crate::problem::{MiddlesFile, ProblemFile};
use crate::qmat::QMat;
use crate::random::{conjugate, hyperbolic, random_fp_invertible, random_gram, random_invariant_form, random_lattice};
use crate::witt::{verify_springer_vs_residuals, witt_class_of_form};

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides the number of cases of every criterion.
    pub cases: Option<usize>,
    pub max_dim: usize,
    pub primes: Vec<u64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, cases: None, max_dim: 6, primes: vec![3, 5, 7] }
    }
}

impl SuiteConfig {
    fn count(&self, default: usize) -> usize {
        self.cases.unwrap_or(default)
    }

    fn odd_primes(&self) -> Vec<u64> {
        let v: Vec<u64> = self.primes.iter().copied().filter(|&p| p != 2).collect();
        if v.is_empty() {
            vec![3]
        } else {
            v
        }
    }

    fn rng(&self, criterion: u64, case: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(criterion << 32 | case);
        r
    }
}

pub const CRITERIA: [&str; 9] = [
    "middle-lattice laws",
    "truncation oracle",
    "torsion middles",
    "duality",
    "thompson agreement",
    "springer/witt",
    "brauer-nesbitt",
    "reduction end-to-end",
    "form on semisimplification",
];

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub cases: usize,
    pub failures: usize,
    pub elapsed: Duration,
    pub counterexample: Option<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}. {}: {} cases, {} failures ({:.2}s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.cases,
            self.failures,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Tally of one criterion.
struct Tally {
    cases: usize,
    failures: usize,
    example: Option<String>,
}

impl Tally {
    fn new() -> Tally {
        Tally { cases: 0, failures: 0, example: None }
    }

    /// Records one case; `check` returns the failing property's name, if any.
    fn case(&mut self, check: Result<Option<String>>, dump: impl FnOnce() -> String) {
        self.cases += 1;
        let failure = match check {
            Ok(None) => return,
            Ok(Some(what)) => what,
            Err(e) => format!("error: {e}"),
        };
        self.failures += 1;
        if self.example.is_none() {
            self.example = Some(format!("{failure}\n{}", dump()));
        }
    }
}

fn first_failure(checks: &[(&str, bool)]) -> Option<String> {
    checks.iter().find(|(_, ok)| !ok).map(|(n, _)| n.to_string())
}

pub fn run(id: usize, cfg: &SuiteConfig) -> Outcome {
    let start = Instant::now();
    let t = match id {
        1 => middle_laws(cfg),
        2 => truncation(cfg),
        3 => torsion(cfg),
        4 => duality(cfg),
        5 => thompson(cfg),
        6 => springer(cfg),
        7 => brauer_nesbitt(cfg),
        8 => end_to_end(cfg),
        9 => forms_on_ss(cfg),
        _ => panic!("no criterion {id}"),
    };
    Outcome {
        id,
        title: CRITERIA[id - 1],
        cases: t.cases,
        failures: t.failures,
        elapsed: start.elapsed(),
        counterexample: t.example,
    }
}

pub fn run_all(cfg: &SuiteConfig) -> Vec<Outcome> {
    (1..=CRITERIA.len()).map(|id| run(id, cfg)).collect()
}

fn pick<T: Copy, G: Rng>(rng: &mut G, xs: &[T]) -> T {
    xs[rng.gen_range(0..xs.len())]
}

fn cfg_p(p: u64) -> ValConfig {
    ValConfig::new(p).expect("suite primes are prime")
}

/// The `i`-th random pair of the middle-lattice criterion.
pub fn random_pair(cfg: &SuiteConfig, i: u64) -> (Lattice, Lattice) {
    lattice_pair(&mut cfg.rng(1, i), cfg)
}

fn lattice_pair<G: Rng>(rng: &mut G, cfg: &SuiteConfig) -> (Lattice, Lattice) {
    let n = rng.gen_range(1..=cfg.max_dim.max(1));
    let p = pick(rng, &cfg.primes);
    (random_lattice(rng, n, cfg_p(p), 3), random_lattice(rng, n, cfg_p(p), 3))
}

/// Greedily simplifies a failing list of matrices: drop a coordinate from
/// all of them, or replace an entry by 0 or by its power of `p`.
fn shrink(p: u64, mut input: Vec<QMat>, fails: impl Fn(&[QMat]) -> bool) -> Vec<QMat> {
    let mut budget = 400;
    let mut progress = true;
    while progress && budget > 0 {
        progress = false;
        let n = input[0].rows();
        for drop in 0..n {
            if n <= 1 {
                break;
            }
            let keep: Vec<usize> = (0..n).filter(|&i| i != drop).collect();
            let cand: Vec<QMat> = input.iter().map(|m| m.submatrix(&keep, &keep)).collect();
            budget -= 1;
            if fails(&cand) {
                input = cand;
                progress = true;
                break;
            }
        }
        if progress {
            continue;
        }
        'entries: for k in 0..input.len() {
            for i in 0..input[k].rows() {
                for j in 0..input[k].cols() {
                    let x = input[k][(i, j)].clone();
                    let simple = if num::Zero::is_zero(&x) { None } else { Some(pi_pow(p, unit_part(&x, p).1)) };
                    for y in [Some(Rat::from_integer(0.into())), simple].into_iter().flatten() {
                        if y == x || budget == 0 {
                            continue;
                        }
                        budget -= 1;
                        let mut cand = input.clone();
                        cand[k][(i, j)] = y;
                        if fails(&cand) {
                            input = cand;
                            progress = true;
                            break 'entries;
                        }
                    }
                }
            }
        }
    }
    input
}

fn lattices_of(p: u64, ms: &[QMat]) -> Option<Vec<Lattice>> {
    ms.iter().map(|m| if m.det().is_zero_rat() { None } else { Lattice::from_basis(m, cfg_p(p)).ok() }).collect()
}

trait ZeroRat {
    fn is_zero_rat(&self) -> bool;
}

impl ZeroRat for Rat {
    fn is_zero_rat(&self) -> bool {
        num::Zero::is_zero(self)
    }
}

fn middles_dump(p: u64, l: &Lattice, m: &Lattice, check: impl Fn(&Lattice, &Lattice) -> Result<Option<String>>) -> String {
    let small = shrink(p, vec![l.basis(), m.basis()], |ms| match lattices_of(p, ms) {
        Some(ls) => matches!(check(&ls[0], &ls[1]), Ok(Some(_)) | Err(_)),
        None => false,
    });
    MiddlesFile { p, l: small[0].clone(), m: small[1].clone() }.to_string()
}

fn elementary_divisors(outer: &Lattice, inner: &Lattice) -> Result<TorsionModule> {
    outer.quotient_type(inner)
}

/// Every middle-lattice law for one pair, by name. `xy` picks the twist pair
/// `(L(x), L(y))`.
pub fn middle_checks(l: &Lattice, m: &Lattice, xy: (i64, i64)) -> Result<Vec<(&'static str, bool)>> {
    let (lo, hi) = middles(l, m)?;
    let cap = l.intersection(m)?;
    let cup = l.sum(m)?;
    let pl = l.scale_pi(1);
    let (plo, phi) = middles(&pl, m)?;
    let (x, y) = xy;
    let (ilo, ihi) = int_middles(x, y);
    let (tlo, thi) = middles(&twist(l, x), &twist(l, y))?;
    Ok(vec![
        ("sandwich: L∩M ⊆ m₋", lo.contains(&cap)?),
        ("sandwich: m₋ ⊆ m₊", hi.contains(&lo)?),
        ("sandwich: m₊ ⊆ L+M", cup.contains(&hi)?),
        ("π·m₊ ⊆ m₋", lo.contains(&hi.scale_pi(1))?),
        ("symmetry", middles(m, l)? == (lo.clone(), hi.clone())),
        ("m₋(πL, M) = π·m₊(L, M)", plo == hi.scale_pi(1)),
        ("m₊(πL, M) = m₋(L, M)", phi == lo),
        ("m±(L, M) = m±(L+M, L∩M)", middles(&cup, &cap)? == (lo.clone(), hi.clone())),
        ("middles of twists", tlo == twist(l, ilo) && thi == twist(l, ihi)),
        (
            "(L+M)/m₊ and m₋/(L∩M) share elementary divisors",
            elementary_divisors(&cup, &hi)? == elementary_divisors(&lo, &cap)?,
        ),
        (
            "(L+M)/m₋ and m₊/(L∩M) share elementary divisors",
            elementary_divisors(&cup, &lo)? == elementary_divisors(&hi, &cap)?,
        ),
        ("truncated range agrees with range 2a+2", truncation_check(l, m)?.is_none()),
    ])
}

fn middle_law_checks(l: &Lattice, m: &Lattice, xy: (i64, i64)) -> Result<Option<String>> {
    Ok(first_failure(&middle_checks(l, m, xy)?))
}

fn middle_laws(cfg: &SuiteConfig) -> Tally {
    let mut t = Tally::new();
    for i in 0..cfg.count(1000) {
        let mut rng = cfg.rng(1, i as u64);
        let (l, m) = lattice_pair(&mut rng, cfg);
        let xy = (rng.gen_range(-2..=2), rng.gen_range(-2..=2));
        t.case(middle_law_checks(&l, &m, xy), || middles_dump(l.p(), &l, &m, |a, b| middle_law_checks(a, b, xy)));
    }
    t
}

fn truncation_check(l: &Lattice, m: &Lattice) -> Result<Option<String>> {
    let r = middle_range(l, m)?;
    let a = compatible_splitting(l, m)?.distance();
    let wide = 2 * a + 2;
    Ok(first_failure(&[
        ("m₋ truncation", middle_lower_with_range(l, m, r)? == middle_lower_with_range(l, m, wide)?),
        ("m₊ truncation", middle_upper_with_range(l, m, r)? == middle_upper_with_range(l, m, wide)?),
    ]))
}

fn truncation(cfg: &SuiteConfig) -> Tally {
    let mut t = Tally::new();
    for i in 0..cfg.count(200) {
        let mut rng = cfg.rng(2, i as u64);
        let (l, m) = lattice_pair(&mut rng, cfg);
        t.case(truncation_check(&l, &m), || middles_dump(l.p(), &l, &m, truncation_check));
    }
    t
}

/// All exponent multisets with sum at most `total`.
pub fn partitions_up_to(total: u32) -> Vec<Vec<u32>> {
    fn go(left: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(cur.clone());
        for part in (1..=left.min(max)).rev() {
            cur.push(part);
            go(left - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(total, total, &mut vec![], &mut out);
    out
}

fn torsion_check(p: u64, t: &TorsionModule) -> Option<String> {
    let g = ExplicitTorsion::new(p, t);
    let (lo, hi) = g.middles();
    let (tlo, thi) = torsion_middles(t);
    first_failure(&[
        ("m₋ type", g.type_of(&lo) == tlo),
        ("m₊ type", g.type_of(&hi) == thi),
        ("π·m₊ ⊆ m₋", ExplicitTorsion::is_subset(&g.scale(&hi, p), &lo)),
        ("m₋ ⊆ m₊", ExplicitTorsion::is_subset(&lo, &hi)),
        ("m₊ ≅ T/m₋", g.type_of(&hi) == g.quotient_type(&lo)),
        ("m₋ ≅ T/m₊", g.type_of(&lo) == g.quotient_type(&hi)),
    ])
}

fn torsion(cfg: &SuiteConfig) -> Tally {
    let mut t = Tally::new();
    let all = partitions_up_to(6);
    let take = cfg.cases.unwrap_or(all.len()).min(all.len());
    for exps in all.into_iter().take(take) {
        let tm = TorsionModule::new(exps.clone());
        t.case(Ok(torsion_check(3, &tm)), || format!("p = 3, T = {tm}"));
    }
    t
}

fn form_problem(l: &Lattice, b: &GramForm) -> String {
    ProblemFile {
        name: None,
        p: l.p(),
        epsilon: b.epsilon(),
        dim: l.dim(),
        generators: vec![],
        gram: b.matrix().clone(),
        word_bound: 1,
        seed: 0,
        lattice: Some(l.basis()),
    }
    .to_string()
}

fn form_dump(l: &Lattice, b: &GramForm, check: impl Fn(&Lattice, &GramForm) -> Result<Option<String>>) -> String {
    let p = l.p();
    let eps = b.epsilon();
    let small = shrink(p, vec![l.basis(), b.matrix().clone()], |ms| {
        let (Some(ls), Ok(form)) = (lattices_of(p, &ms[..1]), GramForm::new(ms[1].clone(), eps)) else {
            return false;
        };
        matches!(check(&ls[0], &form), Ok(Some(_)) | Err(_))
    });
    let l = Lattice::from_basis(&small[0], cfg_p(p)).expect("shrunk basis is invertible");
    form_problem(&l, &GramForm::new(small[1].clone(), eps).expect("shrunk form is valid"))
}

fn random_form_input<G: Rng>(rng: &mut G, cfg: &SuiteConfig) -> (Lattice, Lattice, GramForm) {
    let p = pick(rng, &cfg.primes);
    let alt = rng.gen_bool(0.5) && cfg.max_dim >= 2;
    let (eps, n) = if alt {
        (Epsilon::Alternating, 2 * rng.gen_range(1..=cfg.max_dim / 2))
    } else {
        (Epsilon::Symmetric, rng.gen_range(1..=cfg.max_dim.max(1)))
    };
    let b = random_gram(rng, n, eps, p, 2);
    (random_lattice(rng, n, cfg_p(p), 2), random_lattice(rng, n, cfg_p(p), 2), b)
}

fn duality_check(l: &Lattice, m: Option<&Lattice>, b: &GramForm) -> Result<Option<String>> {
    let ld = dual_lattice(l, b)?;
    let asd = asd_via_middle(l, b)?;
    let mut checks = vec![
        ("(L')' = L", dual_lattice(&ld, b)? == *l),
        ("asd is almost self-dual", is_almost_self_dual(&asd, b)?),
        ("dual of m₋(L, L') is m₊(L, L')", dual_lattice(&asd, b)? == middle_upper(l, &ld)?),
    ];
    if let Some(m) = m {
        let md = dual_lattice(m, b)?;
        checks.push(("(L∩M)' = L'+M'", dual_lattice(&l.intersection(m)?, b)? == ld.sum(&md)?));
    }
    Ok(first_failure(&checks))
}

fn duality(cfg: &SuiteConfig) -> Tally {
    let mut t = Tally::new();
    for i in 0..cfg.count(500) {
        let mut rng = cfg.rng(4, i as u64);
        let (l, m, b) = random_form_input(&mut rng, cfg);
        t.case(duality_check(&l, Some(&m), &b), || form_dump(&l, &b, |l, b| duality_check(l, None, b)));
    }
    t
}

fn thompson_check(l: &Lattice, b: &GramForm) -> Result<Option<String>> {
    let (out, trace) = asd_thompson_traced(l, b)?;
    let rescaled = thompson_rescale(l, b)?;
    Ok(first_failure(&[
        ("thompson = m₋ of rescaled lattice", out == asd_via_middle(&rescaled, b)?),
        ("rescaled lattice lies in its dual", dual_lattice(&rescaled, b)?.contains(&rescaled)?),
        ("defect strictly decreases", trace.windows(2).all(|w| w[1] < w[0])),
        ("thompson output is almost self-dual", is_almost_self_dual(&out, b)?),
    ]))
}

fn thompson(cfg: &SuiteConfig) -> Tally {
    let mut t = Tally::new();
    for i in 0..cfg.count(200) {
        let mut rng = cfg.rng(5, i as u64);
        let (l, _, b) = random_form_input(&mut rng, cfg);
        t.case(thompson_check(&l, &b), || form_dump(&l, &b, thompson_check));
    }
    t
}

fn springer_check(l: &Lattice, b: &GramForm) -> Result<Option<String>> {
    let asd = asd_via_middle(l, b)?;
    Ok(first_failure(&[("springer residues match residual forms", verify_springer_vs_residuals(&asd, b)?)]))
}

fn springer(cfg: &SuiteConfig) -> Tally {
    let mut t = Tally::new();
    let patterns: Vec<_> = [3u64, 5, 7].iter().flat_map(|&p| square_class_patterns(p, 4)).collect();
    let take = cfg.cases.map_or(patterns.len(), |c| c.min(patterns.len()));
    for d in patterns.into_iter().take(take) {
        let check = witt_matches_kernel(&d).map(|ok| (!ok).then(|| "witt class vs anisotropic kernel".to_string()));
        t.case(check, || format!("p = {}, diagonal form <{:?}>", d.p(), d.entries()));
    }
    let primes = cfg.odd_primes();
    for i in 0..cfg.count(100) {
        let mut rng = cfg.rng(6, i as u64);
        let p = pick(&mut rng, &primes);
        let n = rng.gen_range(1..=cfg.max_dim.max(1));
        let b = random_gram(&mut rng, n, Epsilon::Symmetric, p, 2);
        let l = random_lattice(&mut rng, n, cfg_p(p), 2);
        t.case(springer_check(&l, &b), || form_dump(&l, &b, springer_check));
    }
    t
}

fn rep_problem(fx: &crate::fixtures::RepFixture, p: u64, l: &Lattice, m: &Lattice) -> String {
    let gram = QMat::identity(fx.rep.dim());
    let mut out = format!("# group {}; second lattice M = {}\n", fx.name, m.basis());
    out += &ProblemFile {
        name: Some(fx.name.to_string()),
        p,
        epsilon: Epsilon::Symmetric,
        dim: fx.rep.dim(),
        generators: fx.rep.generators().to_vec(),
        gram,
        word_bound: fx.rep.word_bound(),
        seed: 0,
        lattice: Some(l.basis()),
    }
    .to_string();
    out
}

fn brauer_nesbitt(cfg: &SuiteConfig) -> Tally {
    let mut t = Tally::new();
    let per = cfg.count(20);
    let mut case = 0u64;
    for fx in groups() {
        for &p in &cfg.primes {
            for _ in 0..per {
                let mut rng = cfg.rng(7, case);
                let seed = case;
                case += 1;
                let n = fx.rep.dim();
                let mut run = || -> Result<(Option<String>, Lattice, Lattice)> {
                    let l = stable_lattice(&fx.rep, &random_lattice(&mut rng, n, cfg_p(p), 2))?;
                    let m = stable_lattice(&fx.rep, &random_lattice(&mut rng, n, cfg_p(p), 2))?;
                    let e = reduce_mod_pi(&fx.rep, &l)?;
                    let ss: Vec<_> = (0..3).map(|k| semisimplify(&e, seed * 3 + k)).collect();
                    let fail = first_failure(&[
                        ("E_L^ss ≅ E_M^ss", brauer_nesbitt_check(&fx.rep, &l, &m, seed)?),
                        ("seed independence", ss_isomorphic(&ss[0], &ss[1])? && ss_isomorphic(&ss[0], &ss[2])?),
                        ("dimension conservation", ss.iter().all(|s| s.dim() == n)),
                    ]);
                    Ok((fail, l, m))
                };
                match run() {
                    Ok((fail, l, m)) => t.case(Ok(fail), || rep_problem(&fx, p, &l, &m)),
                    Err(e) => t.case(Err(e), || format!("group {} at p = {p}", fx.name)),
                }
            }
        }
    }
    t
}

/// The forms checked end to end: the fixed fixtures plus one random invariant
/// form per group and prime.
fn corpus(cfg: &SuiteConfig) -> Vec<(String, FormFixture, u64)> {
    let mut out = Vec::new();
    for f in form_fixtures() {
        for &p in &f.primes {
            if p == 2 || cfg.primes.contains(&p) {
                out.push((format!("{} (p = {p})", f.name), f.clone(), p));
            }
        }
    }
    for (k, fx) in groups().into_iter().enumerate() {
        for &p in &cfg.odd_primes() {
            let mut rng = cfg.rng(80, (k as u64) << 8 | p);
            let eps = if fx.name == "Q8" { Epsilon::Alternating } else { Epsilon::Symmetric };
            if let Some(form) = random_invariant_form(&mut rng, &fx.rep, eps, p, 1, fx.order) {
                let name = format!("{} random invariant (p = {p})", fx.name);
                out.push((name, FormFixture { name: fx.name, rep: fx.clone(), form, primes: vec![p] }, p));
            }
        }
    }
    out
}

fn report_signature(r: &ReductionReport, seed: u64) -> Option<(crate::modrep::SSDecomp, Option<(crate::witt::WittClass, crate::witt::WittClass)>)> {
    let total = r.total()?;
    Some((semisimplify(total.module(), seed), r.springer))
}

fn end_to_end(cfg: &SuiteConfig) -> Tally {
    let mut t = Tally::new();
    let all = corpus(cfg);
    let take = cfg.cases.unwrap_or(all.len()).min(all.len());
    for (idx, (name, f, p)) in all.into_iter().take(take).enumerate() {
        let mut rng = cfg.rng(8, idx as u64);
        let n = f.rep.rep.dim();
        let mut starts = vec![Lattice::standard(n, cfg_p(p))];
        for _ in 0..4 {
            starts.push(random_lattice(&mut rng, n, cfg_p(p), 2));
        }
        let dump = |m0: &Lattice| {
            let pf = ProblemFile {
                name: Some(name.clone()),
                p,
                epsilon: f.form.epsilon(),
                dim: n,
                generators: f.rep.rep.generators().to_vec(),
                gram: f.form.matrix().clone(),
                word_bound: f.rep.rep.word_bound(),
                seed: idx as u64,
                lattice: Some(m0.basis()),
            };
            pf.to_string()
        };
        let mut first: Option<(crate::modrep::SSDecomp, _)> = None;
        for m0 in &starts {
            let check = (|| -> Result<Option<String>> {
                let r = reduce_with_form_from(&f.rep.rep, &f.form, m0, idx as u64)?;
                if let Some(bad) = r.failed().first() {
                    return Ok(Some(bad.to_string()));
                }
                let sig = report_signature(&r, idx as u64).expect("all checks passed");
                match &first {
                    None => first = Some(sig),
                    Some((ss, springer)) => {
                        if !ss_isomorphic(ss, &sig.0)? {
                            return Ok(Some("V_k changes with the starting lattice".into()));
                        }
                        if *springer != sig.1 {
                            return Ok(Some("Witt classes change with the starting lattice".into()));
                        }
                    }
                }
                Ok(None)
            })();
            t.case(check, || dump(m0));
        }
    }
    t
}

/// A random module with invariant form: orthogonal sums of reductions of
/// fixture representations, trivial lines and hyperbolic pairs `Y ⊕ Y'`,
/// in a random basis.
pub fn random_formed_module<G: Rng>(rng: &mut G, p: u64, eps: Epsilon, max_dim: usize) -> Option<FormedKGModule> {
    let fxs = groups();
    let fx = &fxs[rng.gen_range(0..fxs.len())];
    let ngens = fx.rep.generators().len();
    let cfg = cfg_p(p);
    let mut acc: Option<FormedKGModule> = None;
    for _ in 0..8 {
        let room = max_dim - acc.as_ref().map_or(0, FormedKGModule::dim);
        let piece = match rng.gen_range(0..3) {
            0 if eps == Epsilon::Symmetric => {
                let a = rng.gen_range(1..p);
                let m = KGModule::trivial(p, 1, ngens);
                FormedKGModule::new(m, FpForm::new(crate::fp::FpMat::from_rows(p, &[vec![a as i64]]), eps).ok()?).ok()
            }
            1 => {
                let l = stable_lattice(&fx.rep, &random_lattice(rng, fx.rep.dim(), cfg, 1)).ok()?;
                let y = reduce_mod_pi(&fx.rep, &l).ok()?;
                Some(hyperbolic(&y, eps))
            }
            _ => {
                let b = random_invariant_form(rng, &fx.rep, eps, p, 1, fx.order)?;
                let m0 = random_lattice(rng, fx.rep.dim(), cfg, 1);
                let r = reduce_with_form_from(&fx.rep, &b, &m0, 0).ok()?;
                if rng.gen_bool(0.5) { r.f1 } else { r.f2 }
            }
        };
        let Some(piece) = piece else { continue };
        if piece.dim() == 0 || piece.dim() > room {
            continue;
        }
        acc = Some(match acc {
            None => piece,
            Some(a) => a.orthogonal_sum(&piece),
        });
        if rng.gen_bool(0.4) {
            break;
        }
    }
    let f = acc?;
    let tmat = random_fp_invertible(rng, p, f.dim());
    Some(conjugate(&f, &tmat))
}

fn formed_dump(f: &FormedKGModule) -> String {
    let gens: Vec<String> = f.module().generators().iter().map(ToString::to_string).collect();
    format!("p = {}, eps = {}\ngenerators = {}\nform = {}", f.module().p(), f.epsilon(), gens.join(", "), f.form())
}

fn ss_form_check(f: &FormedKGModule, seed: u64) -> Result<Option<String>> {
    let out = ss_with_form(f, seed)?;
    let tower = max_isotropic_tower(f, seed)?;
    let s = f.module().submodule(&tower.s);
    let s_prime = f.module().quotient(&tower.s_perp);
    let preserved = match f.epsilon() {
        Epsilon::Symmetric => witt_class_of_form(out.form())? == witt_class_of_form(f.form())?,
        Epsilon::Alternating => out.dim() == f.dim(),
    };
    let compatible = out.module().generators().iter().all(|g| out.form().is_invariant_under(g));
    let symmetric = FpForm::new(out.form().matrix().clone(), f.epsilon()).is_ok();
    Ok(first_failure(&[
        ("output form nondegenerate and ε-symmetric", symmetric),
        ("output form compatible", compatible),
        ("witt class / rank preserved", preserved),
        (
            "output module ≅ semisimplification",
            ss_isomorphic(&semisimplify(out.module(), seed), &semisimplify(f.module(), seed + 1))?,
        ),
        ("S⊥/S has no isotropic simple submodule", !has_isotropic_simple(&tower.x_module, &tower.x_form, seed + 2)),
        (
            "(E/S⊥)^ss ≅ dual of S^ss",
            ss_isomorphic(&semisimplify(&s_prime, seed + 3), &semisimplify(&s.dual(), seed + 4))?,
        ),
    ]))
}

fn forms_on_ss(cfg: &SuiteConfig) -> Tally {
    let mut t = Tally::new();
    let max_dim = cfg.max_dim.clamp(2, 8).max(8.min(cfg.max_dim + 2));
    for i in 0..cfg.count(100) {
        let mut rng = cfg.rng(9, i as u64);
        let (f, p) = loop {
            let p = pick(&mut rng, &cfg.primes);
            let eps = if p == 2 || rng.gen_bool(0.5) { Epsilon::Alternating } else { Epsilon::Symmetric };
            if let Some(f) = random_formed_module(&mut rng, p, eps, max_dim) {
                break (f, p);
            }
        };
        let _ = p;
        t.case(ss_form_check(&f, i as u64), || formed_dump(&f));
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_are_complete() {
        let counts: Vec<usize> = (0..=6).map(|k| partitions_up_to(k).len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 7, 12, 19, 30]);
    }

    #[test]
    fn zero_cases() {
        let cfg = SuiteConfig { cases: Some(0), ..SuiteConfig::default() };
        for o in run_all(&cfg) {
            assert_eq!(o.cases, 0);
            assert!(o.passed());
        }
    }

    #[test]
    fn small_run_passes() {
        let cfg = SuiteConfig { cases: Some(2), max_dim: 3, ..SuiteConfig::default() };
        for o in run_all(&cfg) {
            assert!(o.passed(), "{o}\n{}", o.counterexample.clone().unwrap_or_default());
        }
    }
}
