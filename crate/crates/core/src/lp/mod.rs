//! Exact-rational equality systems `Ux = b, x >= 0` and their feasibility.

mod build;
mod certified;
mod presolve;
mod simplex;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

pub use build::{build_tcpelp, Tcpelp, TcpelpVars};
pub use simplex::phase_one;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

// Integer and zero shortcuts: almost every coefficient and value in a flow
// system is 0 or 1, and the generic operations reduce by gcd every time.

pub(crate) fn mul(a: &Rational, b: &Rational) -> Rational {
    if a.is_zero() || b.is_zero() {
        Rational::zero()
    } else if a.is_integer() && b.is_integer() {
        Rational::from_integer(a.numer() * b.numer())
    } else {
        a * b
    }
}

pub(crate) fn add_assign(acc: &mut Rational, b: &Rational) {
    if b.is_zero() {
    } else if acc.is_integer() && b.is_integer() {
        *acc = Rational::from_integer(acc.numer() + b.numer());
    } else {
        *acc += b;
    }
}

pub(crate) fn sub_assign(acc: &mut Rational, b: &Rational) {
    if b.is_zero() {
    } else if acc.is_integer() && b.is_integer() {
        *acc = Rational::from_integer(acc.numer() - b.numer());
    } else {
        *acc -= b;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    /// Sorted by variable, no zero coefficients, no repeats.
    pub terms: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

impl Equation {
    /// Normalizes `terms`: merges repeated variables and drops zeros.
    pub fn new(terms: impl IntoIterator<Item = (usize, Rational)>, rhs: Rational) -> Self {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (v, a) in terms {
            add_assign(acc.entry(v).or_insert_with(Rational::zero), &a);
        }
        Equation {
            terms: acc.into_iter().filter(|(_, a)| !a.is_zero()).collect(),
            rhs,
        }
    }

    pub fn lhs(&self, values: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (v, a) in &self.terms {
            add_assign(&mut acc, &mul(a, &values[*v]));
        }
        acc
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearSystem {
    names: Vec<String>,
    rows: Vec<Equation>,
}

impl LinearSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn add_equation(&mut self, eq: Equation) {
        assert!(
            eq.terms.iter().all(|(v, _)| *v < self.names.len()),
            "equation references an undeclared variable"
        );
        self.rows.push(eq);
    }

    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    pub fn equation_count(&self) -> usize {
        self.rows.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn equations(&self) -> &[Equation] {
        &self.rows
    }

    pub fn variable(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Orders values by variable from a name-keyed map. Every variable must
    /// be present and no unknown names are accepted.
    pub fn assignment_from_map(&self, map: &BTreeMap<String, Rational>) -> Result<Vec<Rational>> {
        let known: HashSet<&str> = self.names.iter().map(String::as_str).collect();
        if let Some(extra) = map.keys().find(|k| !known.contains(k.as_str())) {
            return Err(Error::MalformedCertificate(format!("unknown variable `{extra}`")));
        }
        self.names
            .iter()
            .map(|n| {
                map.get(n)
                    .cloned()
                    .ok_or_else(|| Error::MalformedCertificate(format!("missing variable `{n}`")))
            })
            .collect()
    }

    /// CPLEX-style LP text: a constant objective, one `=` row per equation,
    /// rationals as `p/q`.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::from("\\ feasibility system\nMinimize\n obj: 0 ");
        out.push_str(self.names.first().map(String::as_str).unwrap_or("x"));
        out.push_str("\nSubject To\n");
        for (i, eq) in self.rows.iter().enumerate() {
            let _ = write!(out, " r{i}:");
            if eq.terms.is_empty() {
                out.push_str(" 0 ");
                out.push_str(self.names.first().map(String::as_str).unwrap_or("x"));
            }
            for (k, (v, a)) in eq.terms.iter().enumerate() {
                match (a.is_negative(), k) {
                    (true, _) => out.push_str(" -"),
                    (false, 0) => {}
                    (false, _) => out.push_str(" +"),
                }
                let mag = a.abs();
                if mag != rat(1) {
                    let _ = write!(out, " {mag}");
                }
                let _ = write!(out, " {}", self.names[*v]);
            }
            let _ = writeln!(out, " = {}", eq.rhs);
        }
        out.push_str("Bounds\n");
        for n in &self.names {
            let _ = writeln!(out, " {n} >= 0");
        }
        out.push_str("End\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityResult {
    Feasible(Vec<Rational>),
    Infeasible,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible(_))
    }

    pub fn assignment(&self) -> Option<&[Rational]> {
        match self {
            FeasibilityResult::Feasible(v) => Some(v),
            FeasibilityResult::Infeasible => None,
        }
    }
}

/// True iff every equation holds exactly and every value is nonnegative.
pub fn verify_assignment(sys: &LinearSystem, values: &[Rational]) -> Result<bool> {
    if values.len() != sys.variable_count() {
        return Err(Error::MalformedCertificate(format!(
            "{} values for {} variables",
            values.len(),
            sys.variable_count()
        )));
    }
    Ok(values.iter().all(|v| !v.is_negative())
        && sys.rows.iter().all(|eq| eq.lhs(values) == eq.rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveLimits {
    pub max_variables: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_variables: 200_000,
        }
    }
}

/// Presolve, then phase-one simplex with Bland's rule on each remaining
/// independent block. Feasible results are verified before returning.
pub fn solve_feasibility(sys: &LinearSystem, limits: SolveLimits) -> Result<FeasibilityResult> {
    if sys.variable_count() > limits.max_variables {
        return Err(Error::Capacity {
            what: "linear system variables",
            needed: sys.variable_count(),
            limit: limits.max_variables,
        });
    }
    let result = presolve::solve(sys);
    if let FeasibilityResult::Feasible(values) = &result {
        if !verify_assignment(sys, values)? {
            return Err(Error::MalformedCertificate(
                "solver produced an assignment that fails verification".into(),
            ));
        }
    }
    Ok(result)
}

/// `name = value` lines in variable order.
pub fn format_assignment(sys: &LinearSystem, values: &[Rational]) -> String {
    let mut out = String::new();
    for (n, v) in sys.names.iter().zip(values) {
        let _ = writeln!(out, "{n} = {v}");
    }
    out
}

pub fn parse_assignment(text: &str) -> Result<BTreeMap<String, Rational>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line
            .split_once('=')
            .ok_or_else(|| Error::MalformedCertificate(format!("line {}: expected `name = value`", i + 1)))?;
        let value: Rational = value
            .trim()
            .parse()
            .map_err(|_| Error::MalformedCertificate(format!("line {}: bad rational `{}`", i + 1, value.trim())))?;
        if map.insert(name.trim().to_string(), value).is_some() {
            return Err(Error::MalformedCertificate(format!("line {}: duplicate `{}`", i + 1, name.trim())));
        }
    }
    Ok(map)
}
