use blockbfgs_bench::{performance_profile, BenchError, CostMatrix};
use proptest::prelude::*;

fn names(prefix: &str, k: usize) -> Vec<String> {
    (0..k).map(|i| format!("{prefix}{i}")).collect()
}

#[test]
fn two_by_two_example() {
    let c = CostMatrix::new(
        vec!["A".into(), "B".into()],
        vec!["p1".into(), "p2".into()],
        vec![vec![2.0, 1.0], vec![4.0, 8.0]],
    )
    .unwrap();
    let curves = performance_profile(&c).unwrap();
    assert_eq!(curves[0].breakpoints, vec![1.0, 2.0]);
    assert_eq!(curves[0].values, vec![0.5, 1.0]);
    assert_eq!(curves[1].breakpoints, vec![1.0, 2.0]);
    assert_eq!(curves[1].values, vec![0.5, 1.0]);
    assert_eq!(curves[0].value_at(0.99), 0.0);
    assert_eq!(curves[0].value_at(1.5), 0.5);
}

#[test]
fn single_solver_and_unsolved_solver() {
    let c = CostMatrix::new(vec!["A".into()], names("p", 3), vec![vec![3.0], vec![1.0], vec![7.0]]).unwrap();
    let curves = performance_profile(&c).unwrap();
    assert_eq!(curves[0].value_at(1.0), 1.0);

    let inf = f64::INFINITY;
    let c = CostMatrix::new(vec!["A".into(), "B".into()], names("p", 2), vec![vec![1.0, inf], vec![2.0, inf]]).unwrap();
    let curves = performance_profile(&c).unwrap();
    assert_eq!(curves[1].value_at(1e300), 0.0);
}

#[test]
fn empty_and_unsolved_inputs_are_errors() {
    let c = CostMatrix::new(vec!["A".into()], vec![], vec![]).unwrap();
    assert!(matches!(performance_profile(&c), Err(BenchError::EmptyInput)));
    let c = CostMatrix::new(vec!["A".into()], vec!["p".into()], vec![vec![f64::INFINITY]]).unwrap();
    assert!(matches!(performance_profile(&c), Err(BenchError::UnsolvedProblem(_))));
}

fn cost_matrix() -> impl Strategy<Value = CostMatrix> {
    (1usize..5, 1usize..12).prop_flat_map(|(s, p)| {
        prop::collection::vec(prop::collection::vec(prop_oneof![4 => (1u32..50).prop_map(f64::from), 1 => Just(f64::INFINITY)], s), p)
            .prop_map(move |mut t| {
                for row in &mut t {
                    if row.iter().all(|c| c.is_infinite()) {
                        row[0] = 1.0;
                    }
                }
                CostMatrix::new(names("s", s), names("p", p), t).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn curves_are_monotone_steps_ending_at_solved_fraction(c in cost_matrix()) {
        let curves = performance_profile(&c).unwrap();
        let n_p = c.problems.len() as f64;
        for (s, curve) in curves.iter().enumerate() {
            prop_assert!(curve.breakpoints.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(curve.values.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(curve.breakpoints.iter().all(|&r| r >= 1.0));
            prop_assert!(curve.values.iter().all(|&v| (0.0..=1.0).contains(&v)));
            let solved = c.t.iter().filter(|row| row[s].is_finite()).count() as f64 / n_p;
            prop_assert_eq!(curve.solved_fraction(), solved);
        }
        let at_one: f64 = curves.iter().map(|c| c.value_at(1.0)).sum();
        prop_assert!(at_one >= 1.0 - 1e-12);
    }
}
