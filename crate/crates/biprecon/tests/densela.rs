use approx::assert_abs_diff_eq;
use biprecon::densela::*;
use biprecon::rng::Lcg64;
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = Lcg64::new(seed);
    ComplexMatrix::from_fn(n, n, |_, _| rng.complex())
}

fn random_hpd(n: usize, seed: u64) -> ComplexMatrix {
    let b = random_matrix(n, seed);
    b.adjoint().matmul(&b).add(&ComplexMatrix::identity(n).scale_real(0.1))
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

#[test]
fn hermitian_examples() {
    let e = hermitian_eigen(&ComplexMatrix::from_real_diag(&[1.0, 4.0])).unwrap();
    assert_eq!(e.real_values(), vec![4.0, 1.0]);
    let m = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
    let v = hermitian_eigen(&m).unwrap().real_values();
    assert_abs_diff_eq!(v[0], 3.0, epsilon = 1e-10);
    assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-10);
    let id = hermitian_eigen(&ComplexMatrix::identity(7)).unwrap();
    assert!(id.real_values().iter().all(|x| (x - 1.0).abs() < 1e-12));
}

#[test]
fn non_hermitian_rejected() {
    let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
    assert!(matches!(hermitian_eigen(&m), Err(DenseError::NonHermitian { .. })));
    let r = ComplexMatrix::zeros(2, 3);
    assert!(matches!(hermitian_eigen(&r), Err(DenseError::NonSquare { .. })));
}

#[test]
fn general_examples() {
    let d = general_eigen(&ComplexMatrix::from_diag(&[c(2.0, 0.0), c(0.0, 1.0)])).unwrap();
    assert!((d.eigenvalues[0] - c(2.0, 0.0)).norm() < 1e-10);
    assert!((d.eigenvalues[1] - c(0.0, 1.0)).norm() < 1e-10);
    let nil = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
    assert!(general_eigen(&nil).unwrap().moduli().iter().all(|x| *x < 1e-10));
    // companion of z² − 3z + 2
    let comp = ComplexMatrix::from_real(2, 2, &[3.0, -2.0, 1.0, 0.0]).unwrap();
    let e = general_eigen(&comp).unwrap().eigenvalues;
    assert!((e[0] - c(2.0, 0.0)).norm() < 1e-10);
    assert!((e[1] - c(1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn svd_examples() {
    assert_eq!(svd(&ComplexMatrix::from_real_diag(&[3.0, 1.0]), false).unwrap().values, vec![3.0, 1.0]);
    assert!(singular_values(&ComplexMatrix::zeros(3, 3)).iter().all(|s| *s == 0.0));
    let m = ComplexMatrix::from_real(2, 2, &[0.0, 2.0, 1.0, 0.0]).unwrap();
    let s = singular_values(&m);
    assert_abs_diff_eq!(s[0], 2.0, epsilon = 1e-12);
    assert_abs_diff_eq!(s[1], 1.0, epsilon = 1e-12);
}

#[test]
fn svd_reconstructs() {
    for seed in 0..5 {
        let m = random_matrix(12, seed);
        let r = svd(&m, true).unwrap();
        let (u, v) = (r.u.unwrap(), r.v.unwrap());
        let s = ComplexMatrix::from_real_diag(&r.values);
        let back = u.matmul(&s).matmul(&v.adjoint());
        assert!(norm_2(&back.sub(&m)) <= 1e-10 * r.values[0]);
        assert!(r.values.windows(2).all(|w| w[0] >= w[1]));
    }
}

#[test]
fn cholesky_examples() {
    assert_eq!(cholesky_hpd(&ComplexMatrix::identity(3)).unwrap(), ComplexMatrix::identity(3));
    let l = cholesky_hpd(&ComplexMatrix::from_real_diag(&[4.0, 9.0])).unwrap();
    assert_eq!(l.diagonal(), vec![c(2.0, 0.0), c(3.0, 0.0)]);
    let m = ComplexMatrix::from_real(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
    let l = cholesky_hpd(&m).unwrap();
    assert_abs_diff_eq!(l.row(0)[0].re, 2f64.sqrt(), epsilon = 1e-14);
    assert!(l.matmul(&l.adjoint()).sub(&m).max_abs() < 1e-12);
    let indef = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
    assert!(matches!(cholesky_hpd(&indef), Err(DenseError::NotPositiveDefinite { .. })));
}

#[test]
fn solve_examples() {
    let b = vec![c(1.0, 2.0), c(-3.0, 0.5)];
    assert_eq!(solve_linear(&ComplexMatrix::identity(2), &b).unwrap(), b);
    let x = solve_linear(&ComplexMatrix::from_real_diag(&[2.0, 4.0]), &from_real(&[2.0, 4.0])).unwrap();
    assert_eq!(x, from_real(&[1.0, 1.0]));
    let u = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
    let x = solve_linear(&u, &from_real(&[2.0, 1.0])).unwrap();
    assert!(norm2(&sub(&x, &from_real(&[1.0, 1.0]))) < 1e-14);
    let sing = ComplexMatrix::zeros(2, 2);
    assert!(matches!(solve_linear(&sing, &b), Err(DenseError::Singular { .. })));
}

#[test]
fn matrix_market_round_trip() {
    let m = random_matrix(5, 3);
    let back = parse_back(&io::matrix_market_string(&m));
    assert_eq!(back, m);
}

fn parse_back(s: &str) -> ComplexMatrix {
    io::parse_matrix_market(s).unwrap()
}

#[test]
fn solve_residual_on_random_instances() {
    let mut rng = Lcg64::new(99);
    for k in 0..100 {
        let n = 1 + (k * 7) % 64;
        // diagonal shift keeps the condition number moderate
        let a = random_matrix(n, 1000 + k as u64).add(&ComplexMatrix::identity(n).scale_real(2.0 * n as f64));
        let sv = singular_values(&a);
        assert!(sv[0] / sv[n - 1] <= 1e4);
        let b: Vec<Complex64> = (0..n).map(|_| rng.complex()).collect();
        let x = solve_linear(&a, &b).unwrap();
        let res = norm2(&sub(&a.matvec(&x), &b));
        assert!(res <= 1e-10 * (sv[0] * norm2(&x) + norm2(&b)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hpd_has_positive_spectrum(n in 1usize..16, seed in any::<u64>()) {
        let m = random_hpd(n, seed);
        let e = hermitian_eigen(&m).unwrap().real_values();
        prop_assert!(e.iter().all(|x| *x > 0.0));
        prop_assert!(cholesky_hpd(&m).is_ok());
    }

    #[test]
    fn svd_matches_eigen_for_normal(n in 1usize..12, seed in any::<u64>()) {
        // U·D·Uᴴ with unitary U from an SVD is normal
        let u = svd(&random_matrix(n, seed), true).unwrap().u.unwrap();
        let mut rng = Lcg64::new(seed ^ 0x5eed);
        let d: Vec<Complex64> = (0..n).map(|_| rng.complex()).collect();
        let m = u.matmul(&ComplexMatrix::from_diag(&d)).matmul(&u.adjoint());
        let s = singular_values(&m);
        let l = sorted_desc(general_eigen(&m).unwrap().moduli());
        for (a, b) in s.iter().zip(&l) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn euclidean_condition_dominates_spectral(n in 2usize..14, seed in any::<u64>()) {
        let m = random_matrix(n, seed);
        let s = singular_values(&m);
        let l = sorted_desc(general_eigen(&m).unwrap().moduli());
        let k2 = s[0] / s[n - 1];
        let ks = l[0] / l[n - 1];
        prop_assert!(k2 >= ks * (1.0 - 1e-8));
    }

    #[test]
    fn eigen_residuals_small(n in 1usize..14, seed in any::<u64>()) {
        let m = random_matrix(n, seed);
        let e = general_eigen(&m).unwrap();
        let r = eigen_residuals(&m, &e.eigenvalues).unwrap();
        prop_assert!(r.iter().all(|x| *x <= 1e-8));
    }
}
