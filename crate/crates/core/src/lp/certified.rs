//! Floating-point simplex as a guide, exact arithmetic as the judge.
//!
//! A float answer is only ever used to propose a certificate: a primal
//! point for feasibility, a Farkas vector `y` with `A^T y >= 0` and
//! `b^T y < 0` for infeasibility. Each proposal is checked exactly, first as
//! rounded and then by an exact solve restricted to the proposal's support.
//! Anything that fails to certify falls through to the exact simplex on the
//! whole block, so the float solver can cost time but never correctness.

use std::collections::{BTreeMap, BTreeSet};

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::simplex::phase_one;
use super::{rat, Rational};

type Rows = [(Vec<(usize, Rational)>, Rational)];

const SUPPORT_TOL: f64 = 1e-7;
const MAX_DENOMINATOR: i64 = 1 << 20;

/// Exact drop-in for [`phase_one`].
pub(super) fn solve_block(n: usize, rows: &Rows) -> Option<Vec<Rational>> {
    // tiny blocks are cheaper to solve exactly than to set up twice
    if n <= 16 {
        return phase_one(n, rows);
    }
    match float_primal(n, rows) {
        Some(Some(x)) => {
            if let Some(v) = certify_primal(n, rows, &x) {
                return Some(v);
            }
        }
        Some(None) if certify_infeasible(n, rows) => return None,
        _ => {}
    }
    phase_one(n, rows)
}

fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `Some(Some(x))` feasible, `Some(None)` infeasible, `None` when the float
/// solver gave up.
fn float_primal(n: usize, rows: &Rows) -> Option<Option<Vec<f64>>> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = (0..n).map(|_| p.add_var(0.0, (0.0, f64::INFINITY))).collect();
    for (terms, b) in rows {
        p.add_constraint(
            terms.iter().map(|(j, a)| (vars[*j], to_f64(a))).collect::<Vec<_>>(),
            ComparisonOp::Eq,
            to_f64(b),
        );
    }
    match p.solve() {
        Ok(out) => {
            let s = out.solution()?;
            Some(Some(vars.iter().map(|&v| s.var_value(v)).collect()))
        }
        Err(microlp::Error::Infeasible) => Some(None),
        Err(_) => None,
    }
}

/// Simplest fraction within `tol` of `v` (denominator capped), by
/// continued fractions.
fn rationalize(v: f64, tol: f64) -> Rational {
    if !v.is_finite() || v.abs() < tol {
        return Rational::zero();
    }
    let (mut h0, mut h1, mut k0, mut k1) = (0i128, 1i128, 1i128, 0i128);
    let mut x = v;
    for _ in 0..40 {
        let a = x.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > MAX_DENOMINATOR as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a;
        if frac.abs() < 1e-15 || ((h1 as f64) / (k1 as f64) - v).abs() <= tol {
            break;
        }
        x = 1.0 / frac;
    }
    Rational::new(BigInt::from(h1), BigInt::from(k1))
}

const ROUNDING_TOLS: [f64; 3] = [1e-6, 1e-9, 1e-12];

fn satisfies(rows: &Rows, x: &[Rational]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && rows.iter().all(|(terms, b)| {
            let lhs: Rational = terms.iter().map(|(j, a)| a * &x[*j]).sum();
            lhs == *b
        })
}

fn certify_primal(n: usize, rows: &Rows, x: &[f64]) -> Option<Vec<Rational>> {
    for tol in ROUNDING_TOLS {
        let rounded: Vec<Rational> = x.iter().map(|&v| rationalize(v.max(0.0), tol)).collect();
        if satisfies(rows, &rounded) {
            return Some(rounded);
        }
    }
    let support: Vec<usize> = (0..n).filter(|&j| x[j] > SUPPORT_TOL).collect();
    if let Some(v) = eliminate_on_support(n, rows, x, &support) {
        return Some(v);
    }
    // exact simplex on the columns the float point uses
    let local: BTreeMap<usize, usize> = support.iter().enumerate().map(|(i, &j)| (j, i)).collect();
    let mut sub = Vec::with_capacity(rows.len());
    for (terms, b) in rows {
        let t: Vec<(usize, Rational)> = terms
            .iter()
            .filter_map(|(j, a)| local.get(j).map(|&l| (l, a.clone())))
            .collect();
        if t.is_empty() {
            if !b.is_zero() {
                return None;
            }
            continue;
        }
        sub.push((t, b.clone()));
    }
    let y = phase_one(support.len(), &sub)?;
    let mut out = vec![Rational::zero(); n];
    for (l, &j) in support.iter().enumerate() {
        out[j] = y[l].clone();
    }
    Some(out)
}

/// Exact point of `rows` on `support`: sparse Gaussian elimination with
/// Markowitz-style pivot choice, free columns fixed at the rounded float
/// values, pivot columns by back substitution. Succeeds only if the result
/// is nonnegative and satisfies every row.
fn eliminate_on_support(n: usize, rows: &Rows, x: &[f64], support: &[usize]) -> Option<Vec<Rational>> {
    let in_support: Vec<bool> = {
        let mut v = vec![false; n];
        for &j in support {
            v[j] = true;
        }
        v
    };
    let mut active: Vec<Option<(BTreeMap<usize, Rational>, Rational)>> = Vec::with_capacity(rows.len());
    let mut col_rows: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (terms, b) in rows {
        let r: BTreeMap<usize, Rational> = terms
            .iter()
            .filter(|(j, _)| in_support[*j])
            .map(|(j, a)| (*j, a.clone()))
            .collect();
        if r.is_empty() {
            if !b.is_zero() {
                return None;
            }
            continue;
        }
        let i = active.len();
        for &j in r.keys() {
            col_rows.entry(j).or_default().insert(i);
        }
        active.push(Some((r, b.clone())));
    }

    let mut pivots: Vec<(usize, BTreeMap<usize, Rational>, Rational)> = Vec::new();
    while let Some(r) = (0..active.len())
        .filter(|&i| active[i].is_some())
        .min_by_key(|&i| active[i].as_ref().map_or(0, |(row, _)| row.len()))
    {
        let (row, rhs) = active[r].take().expect("active row");
        for j in row.keys() {
            if let Some(s) = col_rows.get_mut(j) {
                s.remove(&r);
            }
        }
        if row.is_empty() {
            if !rhs.is_zero() {
                return None;
            }
            continue;
        }
        let c = *row
            .keys()
            .min_by_key(|j| col_rows.get(j).map_or(0, BTreeSet::len))
            .expect("nonempty row");
        let others: Vec<usize> = col_rows.get(&c).map(|s| s.iter().copied().collect()).unwrap_or_default();
        for i in others {
            let (target, trhs) = active[i].as_mut().expect("listed rows are active");
            let f = &target[&c] / &row[&c];
            for (j, a) in &row {
                let v = target.get(j).cloned().unwrap_or_else(Rational::zero) - &f * a;
                if v.is_zero() {
                    target.remove(j);
                    if let Some(s) = col_rows.get_mut(j) {
                        s.remove(&i);
                    }
                } else {
                    target.insert(*j, v);
                    col_rows.entry(*j).or_default().insert(i);
                }
            }
            *trhs -= &f * &rhs;
        }
        pivots.push((c, row, rhs));
    }

    let mut out = vec![Rational::zero(); n];
    let pivot_cols: BTreeSet<usize> = pivots.iter().map(|(c, _, _)| *c).collect();
    for &j in support {
        if !pivot_cols.contains(&j) {
            out[j] = rationalize(x[j].max(0.0), 1e-9);
        }
    }
    for (c, row, rhs) in pivots.iter().rev() {
        let rest: Rational = row.iter().filter(|(j, _)| *j != c).map(|(j, a)| a * &out[*j]).sum();
        out[*c] = (rhs - rest) / &row[c];
    }
    satisfies(rows, &out).then_some(out)
}

/// Columns as sparse lists of `(row, coefficient)`.
fn columns(n: usize, rows: &Rows) -> Vec<Vec<(usize, Rational)>> {
    let mut cols = vec![Vec::new(); n];
    for (i, (terms, _)) in rows.iter().enumerate() {
        for (j, a) in terms {
            cols[*j].push((i, a.clone()));
        }
    }
    cols
}

fn is_farkas(rows: &Rows, cols: &[Vec<(usize, Rational)>], y: &[Rational]) -> bool {
    let by: Rational = rows.iter().zip(y).map(|((_, b), yi)| b * yi).sum();
    by.is_negative()
        && cols
            .iter()
            .all(|c| !c.iter().map(|(i, a)| a * &y[*i]).sum::<Rational>().is_negative())
}

fn certify_infeasible(n: usize, rows: &Rows) -> bool {
    let m = rows.len();
    let cols = columns(n, rows);
    // A^T y >= 0, b^T y = -1, y free
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let ys: Vec<_> = (0..m)
        .map(|_| p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for c in &cols {
        if !c.is_empty() {
            p.add_constraint(
                c.iter().map(|(i, a)| (ys[*i], to_f64(a))).collect::<Vec<_>>(),
                ComparisonOp::Ge,
                0.0,
            );
        }
    }
    p.add_constraint(
        rows.iter()
            .enumerate()
            .filter(|(_, (_, b))| !b.is_zero())
            .map(|(i, (_, b))| (ys[i], to_f64(b)))
            .collect::<Vec<_>>(),
        ComparisonOp::Eq,
        -1.0,
    );
    let Ok(out) = p.solve() else { return false };
    let Some(s) = out.solution() else { return false };
    let y: Vec<f64> = ys.iter().map(|&v| s.var_value(v)).collect();
    for tol in ROUNDING_TOLS {
        let rounded: Vec<Rational> = y.iter().map(|&v| rationalize(v, tol)).collect();
        if is_farkas(rows, &cols, &rounded) {
            return true;
        }
    }

    // exact Farkas search over the rows the float vector uses, with
    // y = y+ - y- and a surplus per touched column
    let support: Vec<usize> = (0..m).filter(|&i| y[i].abs() > SUPPORT_TOL).collect();
    let k = support.len();
    let mut sub: Vec<(Vec<(usize, Rational)>, Rational)> = Vec::new();
    let mut surplus = 2 * k;
    for c in &cols {
        let mut t: Vec<(usize, Rational)> = Vec::new();
        for (l, &i) in support.iter().enumerate() {
            if let Some((_, a)) = c.iter().find(|(r, _)| *r == i) {
                t.push((l, a.clone()));
                t.push((k + l, -a));
            }
        }
        if t.is_empty() {
            continue;
        }
        t.push((surplus, rat(-1)));
        surplus += 1;
        t.sort_by_key(|(j, _)| *j);
        sub.push((t, Rational::zero()));
    }
    let mut last: Vec<(usize, Rational)> = Vec::new();
    for (l, &i) in support.iter().enumerate() {
        let b = &rows[i].1;
        if !b.is_zero() {
            last.push((l, b.clone()));
            last.push((k + l, -b));
        }
    }
    if last.is_empty() {
        return false;
    }
    last.sort_by_key(|(j, _)| *j);
    sub.push((last, rat(-1)));
    let Some(z) = phase_one(surplus, &sub) else { return false };
    let mut full = vec![Rational::zero(); m];
    for (l, &i) in support.iter().enumerate() {
        full[i] = &z[l] - &z[k + l];
    }
    is_farkas(rows, &cols, &full)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationalize_recovers_simple_fractions() {
        assert_eq!(rationalize(0.5, 1e-9), Rational::new(1.into(), 2.into()));
        assert_eq!(rationalize(1.0 / 3.0 + 1e-13, 1e-9), Rational::new(1.into(), 3.into()));
        assert_eq!(rationalize(0.9999998, 1e-6), rat(1));
        assert_eq!(rationalize(-2.0, 1e-9), rat(-2));
        assert_eq!(rationalize(1e-14, 1e-12), rat(0));
    }

    fn chain(n: usize, rhs_last: i64) -> Vec<(Vec<(usize, Rational)>, Rational)> {
        // x0 = 1, x_{i+1} - x_i = 0, and the last variable pinned to rhs_last
        let mut rows = vec![(vec![(0, rat(1))], rat(1))];
        for i in 0..n - 1 {
            rows.push((vec![(i, rat(-1)), (i + 1, rat(1))], rat(0)));
        }
        rows.push((vec![(n - 1, rat(1))], rat(rhs_last)));
        rows
    }

    #[test]
    fn large_feasible_block_is_certified() {
        let rows = chain(40, 1);
        let x = solve_block(40, &rows).unwrap();
        assert!(satisfies(&rows, &x));
    }

    #[test]
    fn large_infeasible_block_gets_a_farkas_vector() {
        let rows = chain(40, 2);
        assert!(certify_infeasible(40, &rows));
        assert!(solve_block(40, &rows).is_none());
    }

    #[test]
    fn large_denominator_vertex_is_recovered_exactly() {
        // x0 = 1/1234567 lies beyond the rounding denominators
        let mut rows = chain(30, 0);
        rows[0] = (vec![(0, rat(1_234_567))], rat(1));
        rows.pop();
        let x = solve_block(30, &rows).unwrap();
        assert_eq!(x[29], Rational::new(1.into(), 1_234_567.into()));
        assert!(satisfies(&rows, &x));
    }
}
