use num_complex::Complex64;
use qconvex::expr::parse;
use qconvex::peak::{assemble_peak, verify_peak, ModelDomain, PeakError, PeakParams, VerifySettings};
use qconvex::{rng, CPoint};

const ELLIPSOID: &str = "abs2(z1)+1.5*abs2(z2)+2*abs2(z3)+0.3*re(z1^2)-0.5*re(z2^2)+0.8*re(z3^2)-1";

fn domain(phi: &str, n: usize, halfwidth: f64, seed: u64) -> ModelDomain {
    let mut dom = ModelDomain::new(parse(phi, n).unwrap(), halfwidth).unwrap();
    dom.certify_convexity(200, &mut rng::stream(seed, rng::DOMAIN_CERTIFY, 0)).unwrap();
    dom
}

/// Generic boundary point of the ellipsoid: a fixed direction scaled onto `φ = 0`.
fn ellipsoid_point() -> CPoint {
    let d = [Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.4), Complex64::new(0.2, -0.1)];
    let (a, b) = ([1.0, 1.5, 2.0], [0.3, -0.5, 0.8]);
    let quad: f64 = (0..3).map(|i| a[i] * d[i].norm_sqr() + b[i] * (d[i] * d[i]).re).sum();
    CPoint::new(d.iter().map(|x| x / quad.sqrt()).collect()).unwrap()
}

fn run(dom: &ModelDomain, p: &CPoint, q: usize, seed: u64) {
    let pc = assemble_peak(dom, p, q, &PeakParams::default(), &mut rng::stream(seed, rng::DOMAIN_PEAK, 0)).unwrap();
    assert!(dom.phi_at(p.coords()).unwrap().abs() < 1e-12);
    let rep = verify_peak(&pc, &VerifySettings::default(), &mut rng::stream(seed, rng::DOMAIN_PEAK, 1)).unwrap();
    assert!(rep.passed, "{rep:?}");
    assert!(rep.peak_value.error <= 1e-12);
    assert!(rep.sup_outside.sup < 1.0 - 1e-3);
    assert!(rep.residual.max <= 1e-5);
    assert_eq!(rep.vanishing.max_abs, 0.0);
    let f = pc.eval(p.coords()).unwrap();
    assert!((f - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
}

#[test]
fn ellipsoid_q1() {
    run(&domain(ELLIPSOID, 3, 1.5, 1), &ellipsoid_point(), 1, 1);
}

#[test]
fn ellipsoid_q2() {
    run(&domain(ELLIPSOID, 3, 1.5, 2), &ellipsoid_point(), 2, 2);
}

#[test]
fn ball_in_c2_q1() {
    let s = 0.5f64.sqrt();
    let p = CPoint::new(vec![Complex64::new(0.0, s), Complex64::new(s, 0.0)]).unwrap();
    run(&domain("abs2(z1)+abs2(z2)-1", 2, 2.0, 3), &p, 1, 3);
}

#[test]
fn construction_is_deterministic() {
    let dom = domain(ELLIPSOID, 3, 1.5, 4);
    let p = ellipsoid_point();
    let a = assemble_peak(&dom, &p, 2, &PeakParams::default(), &mut rng::stream(4, rng::DOMAIN_PEAK, 0)).unwrap();
    let b = assemble_peak(&dom, &p, 2, &PeakParams::default(), &mut rng::stream(4, rng::DOMAIN_PEAK, 0)).unwrap();
    assert_eq!(
        serde_json::to_string(&a.summary()).unwrap(),
        serde_json::to_string(&b.summary()).unwrap()
    );
}

#[test]
fn rejected_inputs() {
    let p = CPoint::from_reals(&[1.0, 0.0, 0.0]).unwrap();
    let params = PeakParams::default();
    let mut r = rng::stream(0, rng::DOMAIN_PEAK, 0);

    let uncertified = ModelDomain::new(parse("abs2(z1)+abs2(z2)+abs2(z3)-1", 3).unwrap(), 2.0).unwrap();
    assert!(matches!(assemble_peak(&uncertified, &p, 2, &params, &mut r), Err(PeakError::ConvexityNotCertified)));

    let ball = domain("abs2(z1)+abs2(z2)+abs2(z3)-1", 3, 2.0, 5);
    for q in [0, 3] {
        assert!(matches!(assemble_peak(&ball, &p, q, &params, &mut r), Err(PeakError::QOutOfRange { .. })));
    }
    let inside = CPoint::from_reals(&[0.5, 0.0, 0.0]).unwrap();
    assert!(assemble_peak(&ball, &inside, 2, &params, &mut r).is_err());

    let mut hyper = ModelDomain::new(parse("abs2(z1)+abs2(z2)-abs2(z3)-1", 3).unwrap(), 2.0).unwrap();
    assert!(matches!(
        hyper.certify_convexity(200, &mut rng::stream(0, rng::DOMAIN_CERTIFY, 0)),
        Err(PeakError::NotConvex { .. })
    ));

    let bad = PeakParams { c: -1.0, ..PeakParams::default() };
    assert!(matches!(assemble_peak(&ball, &p, 2, &bad, &mut r), Err(PeakError::Config(_))));
}
