//! Line-oriented text format for reduction problems and lattice pairs.
//!
//! ```text
//! # S3 acting on the plane x + y + z = 0
//! p = 3
//! epsilon = +1
//! dim = 2
//! word_bound = 6
//! seed = 0
//! generator = [[0, -1], [1, -1]]
//! generator = [[0, 1], [1, 0]]
//! gram = [[2, -1], [-1, 2]]
//! ```
//!
//! A matrix is a bracketed list of rows and may continue over several lines
//! until its brackets balance. Entries are integers or `num/den`. An optional
//! `lattice = ...` gives the starting lattice for spinning; `name = ...` is a
//! free-form label.

use std::fmt;

use crate::dvr::{parse_rat, Rat, ValConfig};
use crate::forms::{Epsilon, GramForm};
use crate::lattices::Lattice;
use crate::modrep::GroupRepK;
use crate::qmat::QMat;

/// A parse or validation failure, anchored at a line and field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "field `{}`: {}", self.field, self.message)
        } else {
            write!(f, "line {}: field `{}`: {}", self.line, self.field, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn err(line: usize, field: &str, message: impl Into<String>) -> ParseError {
    ParseError { line, field: field.to_string(), message: message.into() }
}

/// `(line, key, value)` triples, with multi-line matrices joined.
fn entries(text: &str) -> Result<Vec<(usize, String, String)>, ParseError> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    let mut open: Option<(usize, String, String)> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some((start, key, mut value)) = open.take() {
            value.push(' ');
            value.push_str(line);
            if depth(&value) == 0 {
                out.push((start, key, value));
            } else {
                open = Some((start, key, value));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(err(i + 1, line, "expected `key = value`"));
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if depth(&v) > 0 {
            open = Some((i + 1, k, v));
        } else {
            out.push((i + 1, k, v));
        }
    }
    if let Some((start, key, _)) = open {
        return Err(err(start, &key, "unbalanced brackets"));
    }
    Ok(out)
}

fn depth(s: &str) -> i64 {
    s.chars().map(|c| i64::from(c == '[') - i64::from(c == ']')).sum()
}

/// Parses `[[a, b], [c, d]]`.
pub fn parse_matrix(s: &str) -> Result<QMat, String> {
    let s = s.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| "matrix must be written as [[...], ...]".to_string())?
        .trim();
    if inner.is_empty() {
        return Ok(QMat::zeros(0, 0));
    }
    let mut rows = Vec::new();
    let mut rest = inner;
    loop {
        let body = rest.strip_prefix('[').ok_or("each row must be bracketed")?;
        let end = body.find(']').ok_or("unterminated row")?;
        let row = body[..end]
            .split(',')
            .map(|e| parse_rat(e).ok_or_else(|| format!("bad entry `{}`", e.trim())))
            .collect::<Result<Vec<Rat>, String>>()?;
        rows.push(row);
        rest = body[end + 1..].trim_start();
        if rest.is_empty() {
            break;
        }
        rest = rest.strip_prefix(',').ok_or("rows must be separated by commas")?.trim_start();
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err("rows have different lengths".into());
    }
    Ok(QMat::from_rows(rows))
}

/// A reduction problem: a group given by generators and an invariant form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub p: u64,
    pub epsilon: Epsilon,
    pub dim: usize,
    pub generators: Vec<QMat>,
    pub gram: QMat,
    pub word_bound: usize,
    pub seed: u64,
    pub lattice: Option<QMat>,
}

fn parse_int<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ParseError> {
    v.parse().map_err(|_| err(line, key, format!("expected an integer, got `{v}`")))
}

fn square(line: usize, key: &str, m: &QMat, dim: usize) -> Result<(), ParseError> {
    if m.rows() != dim || m.cols() != dim {
        return Err(err(line, key, format!("expected a {dim}x{dim} matrix, got {}x{}", m.rows(), m.cols())));
    }
    Ok(())
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<ProblemFile, ParseError> {
        let mut name = None;
        let mut p = None;
        let mut epsilon = None;
        let mut dim = None;
        let mut word_bound = None;
        let mut seed = None;
        let mut gens = Vec::new();
        let mut gram = None;
        let mut lattice = None;
        for (line, key, v) in entries(text)? {
            let matrix = |v: &str| parse_matrix(v).map_err(|m| err(line, &key, m));
            match key.as_str() {
                "name" => name = Some(v),
                "p" => p = Some((line, parse_int::<u64>(line, &key, &v)?)),
                "epsilon" => {
                    let e = match v.as_str() {
                        "+1" | "1" => Epsilon::Symmetric,
                        "-1" => Epsilon::Alternating,
                        _ => return Err(err(line, &key, format!("expected +1 or -1, got `{v}`"))),
                    };
                    epsilon = Some((line, e));
                }
                "dim" => dim = Some(parse_int::<usize>(line, &key, &v)?),
                "word_bound" => word_bound = Some(parse_int::<usize>(line, &key, &v)?),
                "seed" => seed = Some(parse_int::<u64>(line, &key, &v)?),
                "generator" => gens.push((line, matrix(&v)?)),
                "gram" => gram = Some((line, matrix(&v)?)),
                "lattice" => lattice = Some((line, matrix(&v)?)),
                _ => return Err(err(line, &key, "unknown field")),
            }
        }
        let (pl, p) = p.ok_or_else(|| err(0, "p", "missing"))?;
        ValConfig::new(p).map_err(|e| err(pl, "p", e.to_string()))?;
        let (el, epsilon) = epsilon.ok_or_else(|| err(0, "epsilon", "missing"))?;
        let (gl, gram) = gram.ok_or_else(|| err(0, "gram", "missing"))?;
        let dim = dim.unwrap_or(gram.rows());
        square(gl, "gram", &gram, dim)?;
        GramForm::new(gram.clone(), epsilon).map_err(|e| err(gl.max(el), "gram", e.to_string()))?;
        for (i, (line, g)) in gens.iter().enumerate() {
            square(*line, "generator", g, dim)?;
            if dim > 0 && g.inverse().is_none() {
                return Err(err(*line, "generator", format!("generator {i} is not invertible")));
            }
        }
        if let Some((line, l)) = &lattice {
            square(*line, "lattice", l, dim)?;
            if dim > 0 && l.inverse().is_none() {
                return Err(err(*line, "lattice", "basis is singular"));
            }
        }
        Ok(ProblemFile {
            name,
            p,
            epsilon,
            dim,
            generators: gens.into_iter().map(|(_, g)| g).collect(),
            gram,
            word_bound: word_bound.unwrap_or(64),
            seed: seed.unwrap_or(0),
            lattice: lattice.map(|(_, l)| l),
        })
    }

    pub fn config(&self) -> ValConfig {
        ValConfig::new(self.p).expect("validated on parse")
    }

    pub fn rep(&self) -> GroupRepK {
        GroupRepK::new(self.dim, self.generators.clone(), self.word_bound).expect("validated on parse")
    }

    pub fn form(&self) -> GramForm {
        GramForm::new(self.gram.clone(), self.epsilon).expect("validated on parse")
    }

    pub fn start_lattice(&self) -> Lattice {
        match &self.lattice {
            Some(b) => Lattice::from_basis(b, self.config()).expect("validated on parse"),
            None => Lattice::standard(self.dim, self.config()),
        }
    }
}

impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.name {
            writeln!(f, "name = {n}")?;
        }
        writeln!(f, "p = {}", self.p)?;
        writeln!(f, "epsilon = {}", self.epsilon)?;
        writeln!(f, "dim = {}", self.dim)?;
        writeln!(f, "word_bound = {}", self.word_bound)?;
        writeln!(f, "seed = {}", self.seed)?;
        for g in &self.generators {
            writeln!(f, "generator = {g}")?;
        }
        writeln!(f, "gram = {}", self.gram)?;
        if let Some(l) = &self.lattice {
            writeln!(f, "lattice = {l}")?;
        }
        Ok(())
    }
}

/// Two lattices given by bases, for the middle computations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiddlesFile {
    pub p: u64,
    pub l: QMat,
    pub m: QMat,
}

impl MiddlesFile {
    pub fn parse(text: &str) -> Result<MiddlesFile, ParseError> {
        let mut p = None;
        let mut l = None;
        let mut m = None;
        for (line, key, v) in entries(text)? {
            match key.as_str() {
                "p" => p = Some((line, parse_int::<u64>(line, &key, &v)?)),
                "L" | "l" => l = Some((line, parse_matrix(&v).map_err(|e| err(line, &key, e))?)),
                "M" | "m" => m = Some((line, parse_matrix(&v).map_err(|e| err(line, &key, e))?)),
                _ => return Err(err(line, &key, "unknown field")),
            }
        }
        let (pl, p) = p.ok_or_else(|| err(0, "p", "missing"))?;
        ValConfig::new(p).map_err(|e| err(pl, "p", e.to_string()))?;
        let (ll, l) = l.ok_or_else(|| err(0, "L", "missing"))?;
        let (ml, m) = m.ok_or_else(|| err(0, "M", "missing"))?;
        square(ll, "L", &l, l.rows())?;
        square(ml, "M", &m, l.rows())?;
        for (line, key, b) in [(ll, "L", &l), (ml, "M", &m)] {
            if b.rows() > 0 && b.inverse().is_none() {
                return Err(err(line, key, "basis is singular"));
            }
        }
        Ok(MiddlesFile { p, l, m })
    }

    pub fn lattices(&self) -> (Lattice, Lattice) {
        let cfg = ValConfig::new(self.p).expect("validated on parse");
        (
            Lattice::from_basis(&self.l, cfg).expect("validated on parse"),
            Lattice::from_basis(&self.m, cfg).expect("validated on parse"),
        )
    }
}

impl fmt::Display for MiddlesFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p = {}", self.p)?;
        writeln!(f, "L = {}", self.l)?;
        writeln!(f, "M = {}", self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S3: &str = "# S3\np = 3\nepsilon = +1\ndim = 2\nword_bound = 6\ngenerator = [[0, -1],\n  [1, -1]]\ngenerator = [[0, 1], [1, 0]]\ngram = [[2, -1], [-1, 2]]\n";

    #[test]
    fn parses_and_round_trips() {
        let f = ProblemFile::parse(S3).unwrap();
        assert_eq!(f.generators.len(), 2);
        assert_eq!(f.gram, QMat::from_i64(&[&[2, -1], &[-1, 2]]));
        assert_eq!(ProblemFile::parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn errors_name_line_and_field() {
        let e = ProblemFile::parse("p = 4\nepsilon = +1\ngram = [[1]]\n").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (1, "p"));
        let e = ProblemFile::parse("p = 3\nepsilon = +1\ngram = [[1, 2], [3, 1]]\n").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (3, "gram"));
        let e = ProblemFile::parse("p = 3\nepsilon = +1\ngram = [[1, 0], [0, 1]]\ngenerator = [[1, 1], [1, 1]]\n").unwrap_err();
        assert_eq!((e.line, e.field.as_str()), (4, "generator"));
        let e = ProblemFile::parse("p = 3\nepsilon = +1\ngram = [[1, 0], [0, 1/0]]\n").unwrap_err();
        assert!(e.message.contains("1/0"));
        let e = ProblemFile::parse("p = 3\nbogus\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn middles_file() {
        let f = MiddlesFile::parse("p = 5\nL = [[1, 0], [0, 1]]\nM = [[5, 0], [0, 1/5]]\n").unwrap();
        let (l, m) = f.lattices();
        assert_eq!(l.dim(), m.dim());
        assert_eq!(MiddlesFile::parse(&f.to_string()).unwrap(), f);
    }
}
