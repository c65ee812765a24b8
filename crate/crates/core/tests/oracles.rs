//! Solver invariants against the independent oracles in `common`.

mod common;

use common::{circle_fibers, exhaustive_log_van, hyperbola, line, minimax_oracle, rows_of};
use curvecap_core::chebyshev::{minimax_solve, MinimaxConfig};
use curvecap_core::fekete::{exchange_refine, greedy_fekete};
use curvecap_core::{BasisKind, CMatrix, Curve, CurveConfig, MinimaxProblem, C64};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| C64::new(re, im))
}

/// `M` target values and `k ≤ 2` correction columns.
fn instance() -> impl Strategy<Value = (Vec<C64>, Vec<Vec<C64>>)> {
    (3usize..=24, 0usize..=2).prop_flat_map(|(m, k)| {
        (prop::collection::vec(complex(), m), prop::collection::vec(prop::collection::vec(complex(), m), k))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lawson_matches_certified_oracle((target, cols) in instance()) {
        let basis = CMatrix::from_fn(target.len(), cols.len(), |i, j| cols[j][i]);
        let labels = (0..cols.len()).map(|j| format!("c{j}")).collect();
        let p = MinimaxProblem::new(target.clone(), basis, labels, 1).unwrap();
        let got = minimax_solve(&p, &MinimaxConfig::default()).unwrap();
        let oracle = minimax_oracle(&target, &cols);
        prop_assert!(got.minimax_value >= oracle.lower - 1e-9, "{} below {}", got.minimax_value, oracle.lower);
        prop_assert!(got.lower_bound <= oracle.value + 1e-9, "{} above {}", got.lower_bound, oracle.value);
        prop_assert!((got.minimax_value - oracle.value).abs() <= 1e-4 * oracle.value.max(1.0));
        prop_assert_eq!(got.minimax_value, p.max_residual(&got.coefficients));
    }

    #[test]
    fn refined_fekete_matches_exhaustive(quarter in 2usize..=4, m in 1usize..=3, hyper in any::<bool>()) {
        // Base counts divisible by 4 keep the half-offset grid off z1 = ±i,
        // where hyperbola fibers are double.
        let ideal = if hyper { hyperbola() } else { line() };
        let curve = Curve::analyze(&ideal, 12, CurveConfig::default()).unwrap();
        let k = circle_fibers(&ideal, 4 * quarter, 1);
        let greedy = greedy_fekete(&curve, &k, m, BasisKind::C).unwrap();
        let refined = exchange_refine(&curve, &k, &greedy, 10).unwrap();
        let e = curve.c_basis().eval_matrix(&k.points, m);
        let cols: Vec<Vec<C64>> = (0..m).map(|j| e.column(j)).collect();
        let best = exhaustive_log_van(&rows_of(&cols), m);
        prop_assert!(refined.log_v[m - 1] >= greedy.log_v[m - 1] - 1e-12);
        prop_assert!((refined.log_v[m - 1] - best).abs() <= 1e-9, "{} vs {best}", refined.log_v[m - 1]);
    }
}
