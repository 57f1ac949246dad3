//! Phase-one simplex on a sparse tableau with Bland's rule.
//!
//! Artificial columns are never stored: an artificial only ever leaves the
//! basis, so its column is irrelevant once it does and trivially a unit
//! column while it stays.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::Rational;

type SparseRow = Vec<(usize, Rational)>;

fn coeff(row: &SparseRow, j: usize) -> Option<&Rational> {
    row.binary_search_by_key(&j, |(c, _)| *c)
        .ok()
        .map(|k| &row[k].1)
}

/// `a - f * b` over sorted sparse rows.
fn sub_scaled(a: &SparseRow, f: &Rational, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut k) = (0, 0);
    while i < a.len() || k < b.len() {
        let take_a = k >= b.len() || (i < a.len() && a[i].0 < b[k].0);
        let take_b = i >= a.len() || (k < b.len() && b[k].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[k].0, -(f * &b[k].1)));
            k += 1;
        } else {
            let v = &a[i].1 - f * &b[k].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            k += 1;
        }
    }
    out
}

/// Finds `x >= 0` with `rows * x = rhs`, or `None` if none exists.
/// `n` is the number of variables; rows are sorted sparse.
pub fn phase_one(n: usize, rows: &[(Vec<(usize, Rational)>, Rational)]) -> Option<Vec<Rational>> {
    let m = rows.len();
    let mut tab: Vec<SparseRow> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    for (r, b) in rows {
        if b.is_negative() {
            tab.push(r.iter().map(|(j, a)| (*j, -a)).collect());
            rhs.push(-b);
        } else {
            tab.push(r.clone());
            rhs.push(b.clone());
        }
    }
    // artificial of row i has index n + i; every row starts with one basic
    let mut basis: Vec<usize> = (n..n + m).collect();

    // reduced costs of the phase-one objective (sum of artificials)
    let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut obj = Rational::zero();
    for (r, b) in tab.iter().zip(&rhs) {
        for (j, a) in r {
            *acc.entry(*j).or_insert_with(Rational::zero) -= a;
        }
        obj -= b;
    }
    let mut cost: SparseRow = acc.into_iter().filter(|(_, d)| !d.is_zero()).collect();

    // stop as soon as every artificial is at zero; optimality is not needed
    while !obj.is_zero() {
        let Some((j, dj)) = cost.iter().find(|(_, d)| d.is_negative()).cloned() else {
            break;
        };
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            let Some(a) = coeff(&tab[i], j) else { continue };
            if !a.is_positive() {
                continue;
            }
            let ratio = &rhs[i] / a;
            let better = match &leave {
                None => true,
                Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // the phase-one objective is bounded below by zero, so a negative
        // reduced cost always has a positive entry in its column
        let (r, _) = leave.expect("phase-one objective is bounded");

        let piv = coeff(&tab[r], j).cloned().expect("pivot entry present");
        let row_r: SparseRow = tab[r].iter().map(|(c, a)| (*c, a / &piv)).collect();
        let rhs_r = &rhs[r] / &piv;
        for i in 0..m {
            if i == r {
                continue;
            }
            if let Some(a) = coeff(&tab[i], j).cloned() {
                tab[i] = sub_scaled(&tab[i], &a, &row_r);
                rhs[i] -= &a * &rhs_r;
            }
        }
        cost = sub_scaled(&cost, &dj, &row_r);
        obj -= &dj * &rhs_r;
        tab[r] = row_r;
        rhs[r] = rhs_r;
        basis[r] = j;
    }

    if !obj.is_zero() {
        return None;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = rhs[i].clone();
        }
    }
    Some(x)
}
