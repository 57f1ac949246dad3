use proptest::prelude::*;

use ntmflow::decider::{decide, DeciderConfig, Verdict};
use ntmflow::difftest::words_up_to;
use ntmflow::lp::{
    format_assignment, parse_assignment, phase_one, rat, solve_feasibility, verify_assignment, Equation,
    LinearSystem, Rational, SolveLimits,
};
use ntmflow::machine::parse_machine;
use ntmflow::oracle::{oracle_decide, runs_of_length, OracleVerdict};
use ntmflow::random::{random_machine, MachineBounds};
use ntmflow::seqgraph::{build_seq_graph, build_seq_graph_dfs};
use ntmflow::step::{classify_sequence, steps_of_run};

fn small() -> MachineBounds {
    MachineBounds::new(3, 3, 6)
}

type Rows = Vec<(Vec<(usize, Rational)>, Rational)>;

fn system(n: usize, rows: &[(Vec<i64>, i64)]) -> (LinearSystem, Rows) {
    let mut sys = LinearSystem::new();
    for j in 0..n {
        sys.add_variable(format!("x{j}"));
    }
    let mut sparse = Vec::new();
    for (coeffs, b) in rows {
        let terms: Vec<(usize, Rational)> = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| (j, rat(c)))
            .collect();
        sys.add_equation(Equation::new(terms.clone(), rat(*b)));
        sparse.push((terms, rat(*b)));
    }
    (sys, sparse)
}

fn rows_strategy() -> impl Strategy<Value = (usize, Vec<(Vec<i64>, i64)>)> {
    (1usize..=6).prop_flat_map(|n| {
        let row = (proptest::collection::vec(-3i64..=3, n), -5i64..=5);
        (Just(n), proptest::collection::vec(row, 1..=5))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn machine_text_round_trips(seed in any::<u64>()) {
        let m = random_machine(seed, small());
        prop_assert_eq!(parse_machine(&m.to_text()).unwrap(), m);
    }

    #[test]
    fn bfs_and_dfs_graphs_agree(seed in any::<u64>(), mu in 1u32..=5) {
        let m = random_machine(seed, small());
        for x in words_up_to(&m, 2) {
            let g = build_seq_graph(&m, &x, mu);
            prop_assert_eq!(&build_seq_graph_dfs(&m, &x, mu), &g);
            let bound = m.delta().len() * (2 * mu as usize - 1) * mu as usize;
            prop_assert!(g.node_count() <= bound);
        }
    }

    #[test]
    fn real_runs_are_tape_consistent(seed in any::<u64>(), mu in 1u32..=5) {
        let m = random_machine(seed, small());
        for x in words_up_to(&m, 2) {
            for run in runs_of_length(&m, &x, mu, 10_000).unwrap() {
                prop_assert!(classify_sequence(&m, &x, &steps_of_run(&run)).unwrap().is_consistent());
            }
        }
    }

    #[test]
    fn solver_paths_agree_and_verify((n, rows) in rows_strategy()) {
        let (sys, sparse) = system(n, &rows);
        let exact = phase_one(n, &sparse);
        let solved = solve_feasibility(&sys, SolveLimits::default()).unwrap();
        prop_assert_eq!(exact.is_some(), solved.is_feasible());
        if let Some(x) = solved.assignment() {
            prop_assert!(verify_assignment(&sys, x).unwrap());
            let text = format_assignment(&sys, x);
            let back = sys.assignment_from_map(&parse_assignment(&text).unwrap()).unwrap();
            prop_assert_eq!(back.as_slice(), x);
            // moving any variable that appears in a row breaks some row
            if let Some((j, _)) = sparse.iter().flat_map(|(t, _)| t.iter()).next() {
                let mut y = x.to_vec();
                y[*j] += Rational::new(1.into(), 2.into());
                prop_assert!(!verify_assignment(&sys, &y).unwrap());
            }
        }
        if let Some(x) = exact {
            prop_assert!(verify_assignment(&sys, &x).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // the provable direction: an accepting run is never rejected
    #[test]
    fn oracle_accept_is_never_rejected(seed in any::<u64>()) {
        let m = random_machine(seed, MachineBounds::new(3, 2, 4));
        let config = DeciderConfig { step_cap: 5, limits: SolveLimits { max_variables: 20_000 }, parallel: false };
        for x in words_up_to(&m, 2) {
            let o = oracle_decide(&m, &x, config.step_cap);
            if o.verdict != OracleVerdict::Accept {
                continue;
            }
            if let Ok(d) = decide(&m, &x, config) {
                prop_assert_ne!(d.verdict, Verdict::Reject);
            }
        }
    }
}
