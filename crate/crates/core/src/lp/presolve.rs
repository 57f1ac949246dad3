//! Reductions applied before simplex, and the postsolve that undoes them.
//!
//! Flow systems are dominated by rows that pin a variable, force a group to
//! zero, or equate two variables up to a positive factor. Folding those away
//! leaves a few small independent blocks for the simplex.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{Signed, Zero};

use super::certified::solve_block;
use super::{add_assign, mul, sub_assign, FeasibilityResult, LinearSystem, Rational};

enum Post {
    Fixed(usize, Rational),
    /// `y = c * x` with `c > 0`.
    Scaled { y: usize, x: usize, c: Rational },
}

struct Presolver {
    rows: Vec<Option<BTreeMap<usize, Rational>>>,
    rhs: Vec<Rational>,
    col_rows: Vec<BTreeSet<usize>>,
    post: Vec<Post>,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
}

struct Infeasible;

impl Presolver {
    fn new(sys: &LinearSystem) -> Self {
        let n = sys.variable_count();
        let mut col_rows = vec![BTreeSet::new(); n];
        let mut rows = Vec::with_capacity(sys.equation_count());
        let mut rhs = Vec::with_capacity(sys.equation_count());
        for (r, eq) in sys.equations().iter().enumerate() {
            for (v, _) in &eq.terms {
                col_rows[*v].insert(r);
            }
            rows.push(Some(eq.terms.iter().cloned().collect()));
            rhs.push(eq.rhs.clone());
        }
        let m = rows.len();
        Presolver {
            rows,
            rhs,
            col_rows,
            post: Vec::new(),
            queue: (0..m).collect(),
            queued: vec![true; m],
        }
    }

    fn enqueue(&mut self, r: usize) {
        if !self.queued[r] && self.rows[r].is_some() {
            self.queued[r] = true;
            self.queue.push_back(r);
        }
    }

    fn drop_row(&mut self, r: usize) {
        if let Some(row) = self.rows[r].take() {
            for v in row.keys() {
                self.col_rows[*v].remove(&r);
            }
        }
    }

    fn fix(&mut self, x: usize, value: Rational) {
        let touched = std::mem::take(&mut self.col_rows[x]);
        for &r in &touched {
            let row = self.rows[r].as_mut().expect("live row");
            let a = row.remove(&x).expect("column index is in sync");
            sub_assign(&mut self.rhs[r], &mul(&a, &value));
            self.enqueue(r);
        }
        self.post.push(Post::Fixed(x, value));
    }

    fn substitute(&mut self, y: usize, x: usize, c: Rational) {
        let touched = std::mem::take(&mut self.col_rows[y]);
        for &r in &touched {
            let row = self.rows[r].as_mut().expect("live row");
            let a = row.remove(&y).expect("column index is in sync");
            let entry = row.entry(x).or_insert_with(Rational::zero);
            add_assign(entry, &mul(&a, &c));
            if entry.is_zero() {
                row.remove(&x);
                self.col_rows[x].remove(&r);
            } else {
                self.col_rows[x].insert(r);
            }
            self.enqueue(r);
        }
        self.post.push(Post::Scaled { y, x, c });
    }

    fn process(&mut self, r: usize) -> Result<(), Infeasible> {
        let Some(row) = &self.rows[r] else { return Ok(()) };
        let b = self.rhs[r].clone();
        match row.len() {
            0 => {
                if !b.is_zero() {
                    return Err(Infeasible);
                }
                self.drop_row(r);
                return Ok(());
            }
            1 => {
                let (&x, a) = row.iter().next().expect("one term");
                let v = &b / a;
                if v.is_negative() {
                    return Err(Infeasible);
                }
                self.drop_row(r);
                self.fix(x, v);
                return Ok(());
            }
            _ => {}
        }
        let all_pos = row.values().all(Signed::is_positive);
        let all_neg = row.values().all(Signed::is_negative);
        if (all_pos && b.is_negative()) || (all_neg && b.is_positive()) {
            return Err(Infeasible);
        }
        if (all_pos || all_neg) && b.is_zero() {
            let vars: Vec<usize> = row.keys().copied().collect();
            self.drop_row(r);
            for x in vars {
                self.fix(x, Rational::zero());
            }
            return Ok(());
        }
        if row.len() == 2 && b.is_zero() {
            // a x + b y = 0 with opposite signs: y = (-a/b) x, c > 0
            let mut it = row.iter();
            let (&x, ax) = it.next().expect("two terms");
            let (&y, ay) = it.next().expect("two terms");
            let c = -(ax / ay);
            self.drop_row(r);
            self.substitute(y, x, c);
        }
        Ok(())
    }

    fn run(&mut self) -> Result<(), Infeasible> {
        while let Some(r) = self.queue.pop_front() {
            self.queued[r] = false;
            self.process(r)?;
        }
        Ok(())
    }
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

pub(super) fn solve(sys: &LinearSystem) -> FeasibilityResult {
    let n = sys.variable_count();
    let mut p = Presolver::new(sys);
    if p.run().is_err() {
        return FeasibilityResult::Infeasible;
    }

    // independent blocks of the remaining rows
    let mut parent: Vec<usize> = (0..n).collect();
    let live: Vec<usize> = (0..p.rows.len()).filter(|&r| p.rows[r].is_some()).collect();
    for &r in &live {
        let row = p.rows[r].as_ref().expect("live row");
        let mut vars = row.keys();
        if let Some(&first) = vars.next() {
            let a = find(&mut parent, first);
            for &v in vars {
                let b = find(&mut parent, v);
                parent[b] = a;
            }
        }
    }
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &r in &live {
        let first = *p.rows[r].as_ref().expect("live row").keys().next().expect("nonempty row");
        let root = find(&mut parent, first);
        blocks.entry(root).or_default().push(r);
    }

    let mut values = vec![Rational::zero(); n];
    for rows in blocks.values() {
        // homogeneous blocks are satisfied by zero
        if rows.iter().all(|&r| p.rhs[r].is_zero()) {
            continue;
        }
        let vars: BTreeSet<usize> = rows
            .iter()
            .flat_map(|&r| p.rows[r].as_ref().expect("live row").keys().copied())
            .collect();
        let local: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let block: Vec<(Vec<(usize, Rational)>, Rational)> = rows
            .iter()
            .map(|&r| {
                let row = p.rows[r].as_ref().expect("live row");
                (
                    row.iter().map(|(v, a)| (local[v], a.clone())).collect(),
                    p.rhs[r].clone(),
                )
            })
            .collect();
        match solve_block(vars.len(), &block) {
            Some(x) => {
                for (v, xv) in vars.iter().zip(x) {
                    values[*v] = xv;
                }
            }
            None => return FeasibilityResult::Infeasible,
        }
    }

    for step in p.post.iter().rev() {
        match step {
            Post::Fixed(x, v) => values[*x] = v.clone(),
            Post::Scaled { y, x, c } => values[*y] = mul(c, &values[*x]),
        }
    }
    FeasibilityResult::Feasible(values)
}
