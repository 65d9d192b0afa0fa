use proptest::prelude::*;

use varcvx_core::linalg::{self, Matrix};
use varcvx_core::oracles;

fn sym(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-3.0f64..3.0, n * n).prop_map(move |a| {
        let m = Matrix::from_rows(&a.chunks(n).map(<[f64]>::to_vec).collect::<Vec<_>>());
        m.symmetrized()
    })
}

fn sym_any() -> impl Strategy<Value = Matrix> {
    (1usize..=5).prop_flat_map(sym)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigen_reconstructs(m in sym_any()) {
        let e = linalg::sym_eigen(&m).unwrap();
        let n = m.rows();
        let mut r = Matrix::zeros(n, n);
        for k in 0..n {
            let v = e.vector(k);
            for i in 0..n {
                for j in 0..n {
                    r[(i, j)] += e.values[k] * v[i] * v[j];
                }
            }
        }
        r.add_scaled(&m, -1.0);
        prop_assert!(r.max_abs() <= 1e-9 * (1.0 + m.max_abs()));
        let vtv = e.vectors.transpose().mul(&e.vectors);
        let mut d = vtv.clone();
        d.add_scaled(&Matrix::identity(n), -1.0);
        prop_assert!(d.max_abs() <= 1e-10);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigen_report_brackets_rayleigh_quotients(m in sym(3), x in prop::collection::vec(-1.0f64..1.0, 3)) {
        prop_assume!(linalg::norm(&x) > 1e-3);
        let r = oracles::symmetric_eigen(&m).unwrap();
        let q = m.quad_form(&x) / linalg::norm_sq(&x);
        prop_assert!(q >= r.min_eigenvalue - 1e-9 && q <= r.max_eigenvalue + 1e-9);
    }

    #[test]
    fn nullspace_is_annihilated(rows in prop::collection::vec(prop::collection::vec(-2i32..=2, 4), 1..4)) {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| *v as f64).collect()).collect();
        let a = Matrix::from_rows(&rows);
        let ns = linalg::nullspace(&a, 1e-10);
        prop_assert_eq!(ns.len() + linalg::rank(&a, 1e-10), 4);
        for v in &ns {
            prop_assert!(linalg::norm_inf(&a.mul_vec(v)) <= 1e-9);
        }
    }
}
