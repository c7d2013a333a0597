use nalgebra::{DMatrix, DVector};
use smooth_lsvi::design::{frank_wolfe_design, round_counts, support_bound, DesignProblem, FwOptions};
use smooth_lsvi::harmonics::{FeatureMap, NormKind};

fn shipped() -> Vec<(usize, usize)> {
    [1, 2].into_iter().flat_map(|d| [2, 4, 8].into_iter().map(move |n| (d, n))).collect()
}

#[test]
fn shipped_configs_meet_target() {
    for (d, n) in shipped() {
        let fm = FeatureMap::orthonormal(d, n, NormKind::Linf).unwrap();
        let problem = DesignProblem::on_grid(fm, 0.1).unwrap();
        let p = problem.dim() as f64;
        let res = frank_wolfe_design(&problem, &FwOptions::default()).unwrap();
        assert!(res.is_success());
        assert!(res.g_value >= p - 1e-6 && res.g_value <= 2.0 * p, "d={d} N={n}: g={}", res.g_value);
        assert!(res.support.len() <= support_bound(problem.dim()));
        assert!(res.logdet_history.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    }
}

#[test]
fn rounded_design_covers_grid() {
    for (d, n, n_tot) in [(1, 4, 500u64), (2, 2, 1000), (2, 4, 2000)] {
        let fm = FeatureMap::orthonormal(d, n, NormKind::Linf).unwrap();
        let problem = DesignProblem::on_grid(fm, 0.1).unwrap();
        let p = problem.dim();
        let res = frank_wolfe_design(&problem, &FwOptions::default()).unwrap();
        let counts = round_counts(&res, n_tot);
        let x = problem.features();
        let mut v = DMatrix::zeros(p, p);
        for (&i, &c) in res.support.iter().zip(&counts) {
            let row = DVector::from_iterator(p, x.row(i).iter().copied());
            v.ger(c as f64, &row, &row, 1.0);
        }
        let chol = v.cholesky().unwrap();
        let bound = 2.0 * p as f64 / n_tot as f64;
        for j in 0..problem.len() {
            let row = DVector::from_iterator(p, x.row(j).iter().copied());
            let q = chol.solve(&row).dot(&row);
            assert!(q <= bound * (1.0 + 1e-9), "d={d} N={n} point {j}: {q} > {bound}");
        }
    }
}
