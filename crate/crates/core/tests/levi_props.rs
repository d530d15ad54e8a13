mod common;

use common::{c, compose_linear, gaussian_vector, random_hermitian, random_unitary};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qconvex::expr::{parse, Expr};
use qconvex::levi::{
    classify_boundary_point, classify_function, eig_signature, levi_form, restrict_to, signature_oracle,
    LeviMatrix, TangentFrame, ZeroTol,
};
use qconvex::CPoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pt(re: &[f64]) -> CPoint {
    CPoint::from_reals(re).unwrap()
}

/// `Σ a_k |z_k|² − 1` with the given weights.
fn quadric(weights: &[f64]) -> Expr {
    let terms: Vec<String> = weights.iter().enumerate().map(|(k, a)| format!("({a})*abs2(z{})", k + 1)).collect();
    parse(&format!("{}-1", terms.join("+")), weights.len()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn boundary_signature_is_unitarily_invariant(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = (0..n).map(|k| if k == 0 { 1.0 } else { rng.random_range(-2.0..2.0) }).collect();
        let phi = quadric(&weights);
        // A boundary point off the coordinate axes: scale a generic vector onto φ = 0.
        let v = gaussian_vector(&mut rng, n);
        let q: f64 = (0..n).map(|k| weights[k] * v[k].norm_sqr()).sum();
        prop_assume!(q > 1e-2);
        let p = CPoint::new(v.iter().map(|x| x / q.sqrt()).collect()).unwrap();
        let u = random_unitary(&mut rng, n);
        let moved = Expr::from_node(compose_linear(phi.node(), &u), n).unwrap();
        let back = CPoint::new((u.adjoint() * nalgebra::DVector::from_column_slice(p.coords())).iter().copied().collect()).unwrap();
        let a = classify_boundary_point(&phi, &p, 1e-8).unwrap();
        let b = classify_boundary_point(&moved, &back, 1e-8).unwrap();
        prop_assert_eq!(a.restricted.counts(), b.restricted.counts());
        prop_assert_eq!(a.strict_q, b.strict_q);
    }

    #[test]
    fn restriction_does_not_depend_on_the_pivot(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = LeviMatrix::new(random_hermitian(&mut rng, n)).unwrap();
        let g = gaussian_vector(&mut rng, n);
        let pivot = rng.random_range(1..n);
        let f0 = TangentFrame::new(&g, 0).unwrap();
        let f1 = TangentFrame::new(&g, pivot).unwrap();
        for f in [&f0, &f1] {
            let gram = f.basis.adjoint() * &f.basis;
            prop_assert!((gram - DMatrix::<Complex64>::identity(n - 1, n - 1)).norm() <= 1e-12);
            prop_assert!((g.transpose() * &f.basis).norm() <= 1e-12 * g.norm());
        }
        // Both bases span the same space, so the restricted spectra coincide.
        let mut e0: Vec<f64> = restrict_to(&h, &f0.basis).unwrap().matrix().clone().symmetric_eigenvalues_hermitian();
        let mut e1: Vec<f64> = restrict_to(&h, &f1.basis).unwrap().matrix().clone().symmetric_eigenvalues_hermitian();
        e0.sort_by(f64::total_cmp);
        e1.sort_by(f64::total_cmp);
        for (x, y) in e0.iter().zip(&e1) {
            prop_assert!((x - y).abs() <= 1e-10 * h.frobenius().max(1.0));
        }
    }

    #[test]
    fn jacobi_agrees_with_real_embedding(seed in any::<u64>(), m in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = LeviMatrix::new(random_hermitian(&mut rng, m)).unwrap();
        prop_assert_eq!(eig_signature(&h, 1e-8).unwrap().counts(), signature_oracle(&h, 1e-8).counts());
    }
}

/// Eigenvalues of a Hermitian matrix through nalgebra's complex eigensolver.
trait HermitianSpectrum {
    fn symmetric_eigenvalues_hermitian(self) -> Vec<f64>;
}

impl HermitianSpectrum for DMatrix<Complex64> {
    fn symmetric_eigenvalues_hermitian(self) -> Vec<f64> {
        nalgebra::SymmetricEigen::new(self).eigenvalues.iter().copied().collect()
    }
}

#[test]
fn boundary_signature_patterns() {
    let sphere = parse("abs2(z1)+abs2(z2)+abs2(z3)-1", 3).unwrap();
    let s = classify_boundary_point(&sphere, &pt(&[0.0, 1.0, 0.0]), 1e-8).unwrap();
    assert_eq!(s.restricted.counts(), (2, 0, 0));
    assert_eq!((s.strict_q, s.weak_q), (Some(1), Some(1)));

    let hyper = parse("abs2(z1)+abs2(z2)-abs2(z3)-1", 3).unwrap();
    let h = classify_boundary_point(&hyper, &pt(&[1.0, 0.0, 0.0]), 1e-8).unwrap();
    assert_eq!(h.restricted.counts(), (1, 1, 0));
    assert_eq!(h.strict_q, Some(2));

    // Levi-flat: a real hyperplane.
    let flat = parse("re(z1)", 2).unwrap();
    let f = classify_boundary_point(&flat, &pt(&[0.0, 0.3]), 1e-8).unwrap();
    assert_eq!(f.restricted.counts(), (0, 0, 1));
    assert_eq!(f.strict_q, None);

    // The cylinder |z1|² = 1 in ℂ²: the tangent line is z2, along which φ is flat.
    let cyl = parse("abs2(z1)-1", 2).unwrap();
    let y = classify_boundary_point(&cyl, &pt(&[1.0, 5.0]), 1e-8).unwrap();
    assert_eq!(y.restricted.counts(), (0, 0, 1));
}

#[test]
fn boundary_errors() {
    let sphere = parse("abs2(z1)+abs2(z2)-1", 2).unwrap();
    assert!(classify_boundary_point(&sphere, &pt(&[0.5, 0.0]), 1e-8).is_err());
    assert!(classify_boundary_point(&sphere, &pt(&[1.0]), 1e-8).is_err());
    let not_real = parse("z1", 1).unwrap();
    assert!(levi_form(&not_real, &CPoint::new(vec![c(0.0, 0.5)]).unwrap()).is_err());
    let singular = parse("abs2(z1)^2", 1).unwrap();
    assert!(TangentFrame::new(&nalgebra::DVector::from_element(2, c(0.0, 0.0)), 0).is_err());
    assert!(classify_boundary_point(&singular, &pt(&[0.0]), 1e-8).is_err());
}

#[test]
fn function_classification() {
    let pts = [pt(&[0.1, 0.2, -0.3]), pt(&[1.0, 0.0, 0.5])];
    let norm = parse("abs2(z1)+abs2(z2)+abs2(z3)", 3).unwrap();
    assert_eq!(classify_function(&norm, &pts, 1e-8).unwrap().overall, Some(1));
    let split = parse("abs2(z1)+abs2(z2)-abs2(z3)", 3).unwrap();
    assert_eq!(classify_function(&split, &pts, 1e-8).unwrap().overall, Some(2));
    let pluriharmonic = parse("re(z1*z2)", 3).unwrap();
    assert_eq!(classify_function(&pluriharmonic, &pts, 1e-8).unwrap().overall, None);
    // A relative tolerance scales with the matrix.
    let tiny = parse("1e-12*abs2(z1)", 3).unwrap();
    assert_eq!(classify_function(&tiny, &pts, ZeroTol::Absolute(1e-8)).unwrap().overall, None);
    assert_eq!(classify_function(&tiny, &pts, ZeroTol::Relative(1e-8)).unwrap().overall, Some(3));
}
