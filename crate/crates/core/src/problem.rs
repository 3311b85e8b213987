//! Problem files: a sectioned `key = value` text format.
//!
//! ```text
//! # comment
//! [problem]
//! m = 2
//!
//! [density]
//! family = cap_bump          # cap_bump | uniform | odd_polynomial
//! threshold = 0.7            # cap_bump, optional (default sqrt((m-1)/m))
//! center.1 = 0,1,0           # cap_bump, optional, all or none
//! linear.1 = 0,1.5           # odd_polynomial: f_i = sum_j a_ij v_j + b_ij v_j^3
//! cubic.1 = 0.25,0           # odd_polynomial, optional (default zeros)
//!
//! [quadrature]               # optional
//! n_pairs = 20000
//! seed = 0
//!
//! [witness]                  # optional
//! kind = a                   # a | b | none
//! w = 1,0,0                  # kind a
//! v{} = 0,-0.7,-0.7          # kind b: one entry per subset of {1..m}
//! v{1,2} = 0,0.7,0.7
//!
//! [solver]                   # optional, defaults shown by `render`
//! method = direct
//! n_starts = 16
//! max_iters = 2000
//! tol = 0.02
//! seed = 0
//! margin = 0.05
//! chi_sample_pairs = 5000
//! ```
//!
//! Vectors are comma-separated reals of length `m + 1`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use crate::density::{cap_bump, cap_bump_about, cap_threshold, Density};
use crate::error::{Error, Result};
use crate::fieldmap::{FieldMap, OddMap, OddPolynomialMap};
use crate::geometry::{AmbientSpace, SpherePoint};
use crate::quadrature::{build_symmetric_rule, DEFAULT_N_PAIRS};
use crate::separation::{Labeler, LabelerA, LabelerB, WitnessA, WitnessB, DEFAULT_N_EQ};
use crate::solver::{Method, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// 1-based line, or 0 when the problem is a missing field.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn perr(line: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DensitySpec {
    CapBump {
        threshold: Option<f64>,
        centers: Option<Vec<Vec<f64>>>,
    },
    Uniform,
    OddPolynomial {
        linear: Vec<Vec<f64>>,
        cubic: Vec<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub n_pairs: usize,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            n_pairs: DEFAULT_N_PAIRS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessSpec {
    None,
    A { w: Vec<f64> },
    /// Keyed by subset bitmask.
    B { vectors: BTreeMap<usize, Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub m: usize,
    pub density: DensitySpec,
    pub quadrature: QuadratureSpec,
    pub witness: WitnessSpec,
    pub solver: SolveOptions,
}

struct Entry {
    line: usize,
    value: String,
}

type Sections = BTreeMap<String, BTreeMap<String, Entry>>;

fn split_sections(text: &str) -> std::result::Result<Sections, ParseError> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| perr(line, "unterminated section header"))?
                .trim()
                .to_string();
            if !matches!(name.as_str(), "problem" | "density" | "quadrature" | "witness" | "solver") {
                return Err(perr(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(&name) {
                return Err(perr(line, format!("duplicate section [{name}]")));
            }
            sections.insert(name.clone(), BTreeMap::new());
            current = Some(name);
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| perr(line, "expected `key = value`"))?;
        let section = current
            .as_ref()
            .ok_or_else(|| perr(line, "key outside of any section"))?;
        let key = key.trim().to_string();
        let map = sections.get_mut(section).expect("section exists");
        if map.contains_key(&key) {
            return Err(perr(line, format!("duplicate key `{key}`")));
        }
        map.insert(
            key,
            Entry {
                line,
                value: value.trim().to_string(),
            },
        );
    }
    Ok(sections)
}

struct Section<'a> {
    name: &'a str,
    entries: BTreeMap<String, Entry>,
}

impl Section<'_> {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> std::result::Result<Entry, ParseError> {
        self.take(key)
            .ok_or_else(|| perr(0, format!("missing field `{}.{key}`", self.name)))
    }

    fn finish(self) -> std::result::Result<(), ParseError> {
        match self.entries.into_iter().next() {
            Some((k, e)) => Err(perr(e.line, format!("unknown field `{}.{k}`", self.name))),
            None => Ok(()),
        }
    }
}

fn parse_num<T: std::str::FromStr>(e: &Entry, what: &str) -> std::result::Result<T, ParseError> {
    e.value
        .parse()
        .map_err(|_| perr(e.line, format!("`{what}`: cannot parse `{}`", e.value)))
}

fn parse_vec(e: &Entry, what: &str, len: usize) -> std::result::Result<Vec<f64>, ParseError> {
    let v = parse_reals(&e.value).map_err(|m| perr(e.line, format!("`{what}`: {m}")))?;
    if v.len() != len {
        return Err(perr(
            e.line,
            format!("`{what}`: expected {len} components, got {}", v.len()),
        ));
    }
    Ok(v)
}

/// Comma-separated finite reals.
pub fn parse_reals(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            let p = p.trim();
            match p.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(format!("`{p}` is not a finite real")),
            }
        })
        .collect()
}

/// Parses `{}` / `{1,3}` into a bitmask over `{1..m}`.
fn parse_subset(s: &str, m: usize) -> Option<usize> {
    let inner = s.strip_prefix('{')?.strip_suffix('}')?.trim();
    if inner.is_empty() {
        return Some(0);
    }
    let mut mask = 0usize;
    for part in inner.split(',') {
        let i: usize = part.trim().parse().ok()?;
        if i == 0 || i > m || mask & (1 << (i - 1)) != 0 {
            return None;
        }
        mask |= 1 << (i - 1);
    }
    Some(mask)
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ProblemSpec {
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let mut sections = split_sections(text)?;
        let mut section = |name: &'static str| Section {
            name,
            entries: sections.remove(name).unwrap_or_default(),
        };

        let mut problem = section("problem");
        let m_entry = problem.require("m")?;
        let m: usize = parse_num(&m_entry, "problem.m")?;
        if m == 0 {
            return Err(perr(m_entry.line, "`problem.m` must be at least 1"));
        }
        if m > 16 {
            return Err(perr(m_entry.line, "`problem.m` above 16 is not supported"));
        }
        problem.finish()?;
        let dim = m + 1;

        let mut dsec = section("density");
        let fam = dsec.require("family")?;
        let density = match fam.value.as_str() {
            "cap_bump" => {
                let threshold = dsec
                    .take("threshold")
                    .map(|e| parse_num::<f64>(&e, "density.threshold"))
                    .transpose()?;
                let centers: Vec<Option<Entry>> = (1..=m).map(|i| dsec.take(&format!("center.{i}"))).collect();
                let centers = if centers.iter().all(Option::is_none) {
                    None
                } else {
                    let mut out = Vec::with_capacity(m);
                    for (i, c) in centers.into_iter().enumerate() {
                        let e = c.ok_or_else(|| perr(0, format!("missing field `density.center.{}`", i + 1)))?;
                        out.push(parse_vec(&e, &format!("density.center.{}", i + 1), dim)?);
                    }
                    Some(out)
                };
                DensitySpec::CapBump { threshold, centers }
            }
            "uniform" => DensitySpec::Uniform,
            "odd_polynomial" => {
                let mut linear = Vec::with_capacity(m);
                let mut cubic = Vec::with_capacity(m);
                for i in 1..=m {
                    let e = dsec.require(&format!("linear.{i}"))?;
                    linear.push(parse_vec(&e, &format!("density.linear.{i}"), dim)?);
                    cubic.push(match dsec.take(&format!("cubic.{i}")) {
                        Some(e) => parse_vec(&e, &format!("density.cubic.{i}"), dim)?,
                        None => vec![0.0; dim],
                    });
                }
                DensitySpec::OddPolynomial { linear, cubic }
            }
            other => return Err(perr(fam.line, format!("unknown density family `{other}`"))),
        };
        dsec.finish()?;

        let mut qsec = section("quadrature");
        let mut quadrature = QuadratureSpec::default();
        if let Some(e) = qsec.take("n_pairs") {
            quadrature.n_pairs = parse_num(&e, "quadrature.n_pairs")?;
            if quadrature.n_pairs == 0 {
                return Err(perr(e.line, "`quadrature.n_pairs` must be at least 1"));
            }
        }
        if let Some(e) = qsec.take("seed") {
            quadrature.seed = parse_num(&e, "quadrature.seed")?;
        }
        qsec.finish()?;

        let mut wsec = section("witness");
        let kind = wsec.take("kind");
        let witness = match kind.as_ref().map(|e| e.value.as_str()) {
            None | Some("none") => WitnessSpec::None,
            Some("a") => {
                let e = wsec.require("w")?;
                WitnessSpec::A {
                    w: parse_vec(&e, "witness.w", dim)?,
                }
            }
            Some("b") => {
                let mut vectors = BTreeMap::new();
                for (key, e) in std::mem::take(&mut wsec.entries) {
                    let mask = key
                        .strip_prefix('v')
                        .and_then(|s| parse_subset(s, m))
                        .ok_or_else(|| perr(e.line, format!("unknown field `witness.{key}`")))?;
                    if vectors.contains_key(&mask) {
                        return Err(perr(e.line, format!("subset `{key}` given twice")));
                    }
                    vectors.insert(mask, parse_vec(&e, &format!("witness.{key}"), dim)?);
                }
                WitnessSpec::B { vectors }
            }
            Some(other) => {
                let line = kind.as_ref().map_or(0, |e| e.line);
                return Err(perr(line, format!("unknown witness kind `{other}`")));
            }
        };
        wsec.finish()?;

        let mut ssec = section("solver");
        let mut solver = SolveOptions::default();
        if let Some(e) = ssec.take("method") {
            solver.method = e
                .value
                .parse::<Method>()
                .map_err(|err| perr(e.line, err.to_string()))?;
        }
        if let Some(e) = ssec.take("n_starts") {
            solver.n_starts = parse_num(&e, "solver.n_starts")?;
        }
        if let Some(e) = ssec.take("max_iters") {
            solver.max_iters = parse_num(&e, "solver.max_iters")?;
        }
        if let Some(e) = ssec.take("tol") {
            solver.tol = parse_num(&e, "solver.tol")?;
        }
        if let Some(e) = ssec.take("seed") {
            solver.seed = parse_num(&e, "solver.seed")?;
        }
        if let Some(e) = ssec.take("margin") {
            solver.margin = parse_num(&e, "solver.margin")?;
        }
        if let Some(e) = ssec.take("chi_sample_pairs") {
            solver.chi_sample_pairs = parse_num(&e, "solver.chi_sample_pairs")?;
        }
        ssec.finish()?;
        solver
            .validate()
            .map_err(|e| perr(0, format!("[solver]: {e}")))?;

        if let Some((name, entries)) = sections.into_iter().next() {
            let line = entries.values().map(|e| e.line).min().unwrap_or(0);
            return Err(perr(line, format!("unexpected section [{name}]")));
        }

        Ok(Self {
            m,
            density,
            quadrature,
            witness,
            solver,
        })
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[problem]\nm = {}\n", self.m);
        s.push_str("[density]\n");
        match &self.density {
            DensitySpec::CapBump { threshold, centers } => {
                s.push_str("family = cap_bump\n");
                if let Some(t) = threshold {
                    let _ = writeln!(s, "threshold = {t}");
                }
                for (i, c) in centers.iter().flatten().enumerate() {
                    let _ = writeln!(s, "center.{} = {}", i + 1, fmt_vec(c));
                }
            }
            DensitySpec::Uniform => s.push_str("family = uniform\n"),
            DensitySpec::OddPolynomial { linear, cubic } => {
                s.push_str("family = odd_polynomial\n");
                for (i, (l, c)) in linear.iter().zip(cubic).enumerate() {
                    let _ = writeln!(s, "linear.{} = {}", i + 1, fmt_vec(l));
                    let _ = writeln!(s, "cubic.{} = {}", i + 1, fmt_vec(c));
                }
            }
        }
        let _ = writeln!(
            s,
            "\n[quadrature]\nn_pairs = {}\nseed = {}\n",
            self.quadrature.n_pairs, self.quadrature.seed
        );
        s.push_str("[witness]\n");
        match &self.witness {
            WitnessSpec::None => s.push_str("kind = none\n"),
            WitnessSpec::A { w } => {
                let _ = writeln!(s, "kind = a\nw = {}", fmt_vec(w));
            }
            WitnessSpec::B { vectors } => {
                s.push_str("kind = b\n");
                for (mask, v) in vectors {
                    let name = crate::separation::subset_name(*mask);
                    let _ = writeln!(s, "v{name} = {}", fmt_vec(v));
                }
            }
        }
        let o = &self.solver;
        let _ = writeln!(
            s,
            "\n[solver]\nmethod = {}\nn_starts = {}\nmax_iters = {}\ntol = {}\nseed = {}\nmargin = {}\nchi_sample_pairs = {}",
            o.method, o.n_starts, o.max_iters, o.tol, o.seed, o.margin, o.chi_sample_pairs
        );
        s
    }

    pub fn load(path: &Path) -> std::result::Result<Self, ParseError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| perr(0, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// The map a problem defines.
#[derive(Debug, Clone)]
pub enum ProblemMap {
    Field(FieldMap),
    Polynomial(OddPolynomialMap),
}

impl OddMap for ProblemMap {
    fn space(&self) -> AmbientSpace {
        match self {
            ProblemMap::Field(f) => f.space(),
            ProblemMap::Polynomial(p) => p.space(),
        }
    }

    fn eval(&self, v: &SpherePoint) -> Vec<f64> {
        match self {
            ProblemMap::Field(f) => f.eval(v),
            ProblemMap::Polynomial(p) => p.eval(v),
        }
    }

    fn support_in_open_hemisphere(&self, i: usize, u: &SpherePoint) -> Option<bool> {
        match self {
            ProblemMap::Field(f) => f.support_in_open_hemisphere(i, u),
            ProblemMap::Polynomial(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Witness {
    A(WitnessA),
    B(WitnessB),
}

/// A problem file turned into live objects.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: ProblemSpec,
    pub space: AmbientSpace,
    pub map: ProblemMap,
    pub witness: Option<Witness>,
}

impl Problem {
    pub fn build(spec: &ProblemSpec) -> Result<Self> {
        let space = AmbientSpace::new(spec.m)?;
        let map = match &spec.density {
            DensitySpec::OddPolynomial { linear, cubic } => {
                ProblemMap::Polynomial(OddPolynomialMap::new(space, linear.clone(), cubic.clone())?)
            }
            family => {
                let densities: Vec<Density> = match family {
                    DensitySpec::Uniform => vec![Density::uniform(); spec.m],
                    DensitySpec::CapBump { threshold, centers } => {
                        let c = threshold.unwrap_or_else(|| cap_threshold(spec.m));
                        match centers {
                            None if threshold.is_none() => (1..=spec.m)
                                .map(|i| cap_bump(space, i))
                                .collect::<Result<_>>()?,
                            None => (1..=spec.m)
                                .map(|i| cap_bump_about(space.basis(i), c, format!("cap_bump_{i}")))
                                .collect(),
                            Some(cs) => cs
                                .iter()
                                .enumerate()
                                .map(|(i, ctr)| {
                                    Ok(cap_bump_about(
                                        SpherePoint::new(ctr.clone())?,
                                        c,
                                        format!("cap_bump_{}", i + 1),
                                    ))
                                })
                                .collect::<Result<_>>()?,
                        }
                    }
                    DensitySpec::OddPolynomial { .. } => unreachable!(),
                };
                let rule = build_symmetric_rule(space, spec.quadrature.n_pairs, spec.quadrature.seed)?;
                ProblemMap::Field(FieldMap::new(densities, rule)?)
            }
        };
        let witness = match &spec.witness {
            WitnessSpec::None => None,
            WitnessSpec::A { w } => Some(Witness::A(WitnessA::new(SpherePoint::new(w.clone())?))),
            WitnessSpec::B { vectors } => {
                let count = 1usize << spec.m;
                if let Some(missing) = (0..count).find(|k| !vectors.contains_key(k)) {
                    return Err(Error::InvalidArgument(format!(
                        "witness (b) is missing v{}",
                        crate::separation::subset_name(missing)
                    )));
                }
                let vs = vectors
                    .values()
                    .map(|v| SpherePoint::new(v.clone()))
                    .collect::<Result<Vec<_>>>()?;
                Some(Witness::B(WitnessB::new(space, vs)?))
            }
        };
        Ok(Self {
            spec: spec.clone(),
            space,
            map,
            witness,
        })
    }

    pub fn labeler(&self) -> Option<Box<dyn Labeler + '_>> {
        match &self.witness {
            None => None,
            Some(Witness::A(w)) => Some(Box::new(LabelerA { witness: w.clone() })),
            Some(Witness::B(w)) => Some(Box::new(LabelerB {
                map: &self.map,
                witness: w.clone(),
                n_eq: DEFAULT_N_EQ,
            })),
        }
    }
}
