use std::collections::HashSet;

use intermittency::diagrams::{
    count_admissible, count_recursive, count_streaming, enumerate_admissible, enumerate_constrained, Diagram,
    Vertex,
};
use intermittency::exponents::{
    hbar, lower_exponents, matching_check, parse_rational, q, table, upper_exponents, TableParams, Q,
};
use intermittency::moments::optimized_exponents;
use intermittency::Error;
use proptest::prelude::*;

#[test]
fn small_counts() {
    assert_eq!(count_admissible(&[1, 1]).unwrap(), 1);
    assert_eq!(count_admissible(&[2, 2]).unwrap(), 2);
    assert_eq!(count_admissible(&[1, 1, 1, 1]).unwrap(), 3);
    assert_eq!(count_admissible(&[2, 1, 1]).unwrap(), 2);
    assert_eq!(count_admissible(&[3, 1]).unwrap(), 0);
    assert_eq!(count_admissible(&[1, 2]).unwrap(), 0);
    assert_eq!(count_streaming(&[1, 2]), Err(Error::OddVertexCount(3)));
}

#[test]
fn invalid_diagrams() {
    let v = Vertex::new;
    assert!(Diagram::new(vec![2], vec![(v(1, 1), v(1, 2))]).is_err());
    assert!(Diagram::new(vec![1, 1], vec![(v(1, 1), v(2, 1)), (v(1, 1), v(2, 1))]).is_err());
    assert!(Diagram::new(vec![1, 1], vec![(v(1, 1), v(2, 1))]).is_ok());
}

#[test]
fn constrained_count() {
    let n: usize = enumerate_constrained(4, 2).unwrap().count();
    assert_eq!(n, 24);
    assert!(enumerate_constrained(3, 2).is_err());
}

#[test]
fn parse_rationals() {
    assert_eq!(parse_rational("3/4").unwrap(), q(3, 4));
    assert_eq!(parse_rational("0.75").unwrap(), q(3, 4));
    assert_eq!(parse_rational("-2").unwrap(), q(-2, 1));
    assert!(parse_rational("1/0").is_err());
    assert!(parse_rational("x").is_err());
}

#[test]
fn lower_constraint() {
    assert!(matches!(
        lower_exponents(&q(0, 1), &q(1, 1), &q(1, 1), &q(1, 2)),
        Err(Error::ConstraintViolated(_))
    ));
}

#[test]
fn default_table_matches() {
    let p = TableParams { lambda: q(1, 2), hurst: q(3, 4), alpha: q(3, 2), beta: q(5, 4) };
    let rows = table(&p).unwrap();
    assert!(rows.iter().all(|r| r.matches()));
    assert_eq!((rows[0].t_exp_lower.clone(), rows[0].p_exp_lower.clone()), (q(5, 3), q(7, 3)));
}

fn rows_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..4, 1..5).prop_filter("even total at most 10", |r| {
        let n: usize = r.iter().sum();
        n <= 10 && n % 2 == 0
    })
}

fn rat(lo: i64, hi: i64, den: i64) -> impl Strategy<Value = Q> {
    (lo..hi).prop_map(move |n| q(n, den))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn count_is_permutation_invariant(rows in rows_strategy(), k in 0usize..24) {
        let mut perm = rows.clone();
        let n = perm.len();
        perm.rotate_left(k % n);
        if n > 1 {
            perm.swap(0, n - 1);
        }
        prop_assert_eq!(count_streaming(&rows).unwrap(), count_streaming(&perm).unwrap());
        prop_assert_eq!(count_streaming(&rows).unwrap(), count_recursive(&rows).unwrap());
    }

    #[test]
    fn enumeration_is_exact(rows in rows_strategy()) {
        let all: Vec<Diagram> = enumerate_admissible(&rows).unwrap().collect();
        prop_assert_eq!(all.len() as u128, count_admissible(&rows).unwrap());
        let distinct: HashSet<&Diagram> = all.iter().collect();
        prop_assert_eq!(distinct.len(), all.len());
        for d in &all {
            prop_assert!(d.validate().is_ok());
        }
    }

    #[test]
    fn exponents_match(a in rat(-3, 12, 4), b in rat(1, 16, 4), lambda in rat(1, 8, 4), gamma in rat(1, 9, 8)) {
        let dd = &b * (q(2, 1) * &a + q(1, 1)) - &lambda;
        prop_assume!(dd > q(0, 1));
        prop_assert!(matching_check(&a, &b, &lambda, &gamma));
        let (t, p) = lower_exponents(&a, &b, &lambda, &gamma).unwrap();
        prop_assert!(p > q(1, 1));
        prop_assert!(t >= q(1, 1));
        prop_assert_eq!(optimized_exponents(&a, &b, &lambda, &gamma).unwrap(), (t.clone(), p.clone()));
        let h = hbar(&a, &b, &lambda).unwrap();
        prop_assert_eq!(upper_exponents(&h, &gamma).unwrap(), (t, p));
    }
}
