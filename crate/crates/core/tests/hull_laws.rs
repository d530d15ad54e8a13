mod common;

use common::{c, gaussian_vector, random_point};
use proptest::prelude::*;
use qconvex::expr::parse;
use qconvex::hull::{
    basener_expr, box_sample, construct_lambda, discrete_hull, theorem2_experiment, FamilyMember, HullError,
    HullProblem, Lambda, Theorem2Config,
};
use qconvex::CPoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Point at distance `radius` from `center` along a random direction.
fn on_sphere<R: Rng>(rng: &mut R, center: &CPoint, radius: f64) -> CPoint {
    let v = gaussian_vector(rng, center.dim());
    let v = v.clone() / c(v.norm(), 0.0);
    CPoint::new(center.coords().iter().zip(v.iter()).map(|(p, d)| p + d * radius).collect()).unwrap()
}

fn certify_sample(center: &CPoint, seed: u64) -> Vec<CPoint> {
    box_sample(center, 3.0, 100, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn small_ball_is_excluded_by_reciprocal_family(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_point(&mut rng, n, 1.0);
        let r = rng.random_range(0.2..2.0);
        let k: Vec<CPoint> = (0..40).map(|_| {
            let t = rng.random_range(1.0..3.0);
            on_sphere(&mut rng, &p, r * t)
        }).collect();
        let inner = r / (n as f64).sqrt();
        let candidates: Vec<CPoint> = (0..15).map(|_| {
            let t = rng.random_range(0.01..0.99);
            on_sphere(&mut rng, &p, inner * t)
        }).collect();
        let sample = certify_sample(&p, seed ^ 1);
        let family: Vec<FamilyMember> = candidates
            .iter()
            .map(|z| FamilyMember::certify(basener_expr(&construct_lambda(z, &p).unwrap(), &p).unwrap(), n, &sample).unwrap())
            .collect();
        let res = discrete_hull(&HullProblem::new(n, k, candidates, family).unwrap()).unwrap();
        for o in &res.outcomes {
            prop_assert!(!o.member);
            prop_assert!(o.margin.unwrap() > 0.0);
            prop_assert!(o.witness.is_some());
        }
    }

    #[test]
    fn k_is_contained_and_margins_match_membership(seed in any::<u64>(), n in 2usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k: Vec<CPoint> = (0..20).map(|_| random_point(&mut rng, n, 1.0)).collect();
        let mut candidates: Vec<CPoint> = (0..30).map(|_| random_point(&mut rng, n, 2.0)).collect();
        candidates.extend(k.iter().cloned());
        let sample = certify_sample(&CPoint::origin(n), seed ^ 2);
        let family: Vec<FamilyMember> = (0..4)
            .filter_map(|_| {
                let centre = random_point(&mut rng, n, 1.0);
                FamilyMember::certify(basener_expr(&Lambda::random(n, &mut rng), &centre).unwrap(), n, &sample).ok()
            })
            .collect();
        let res = discrete_hull(&HullProblem::new(n, k.clone(), candidates.clone(), family).unwrap()).unwrap();
        for (z, o) in candidates.iter().zip(&res.outcomes) {
            if k.contains(z) {
                prop_assert!(o.member);
            }
            match o.margin {
                Some(m) => prop_assert_eq!(o.member, m <= 0.0),
                None => prop_assert!(!o.member && o.singular.is_some()),
            }
        }
    }
}

#[test]
fn empty_family_keeps_every_candidate() {
    let k = vec![CPoint::origin(2)];
    let cands: Vec<CPoint> = (0..5).map(|i| CPoint::from_reals(&[i as f64, 1.0]).unwrap()).collect();
    let res = discrete_hull(&HullProblem::new(2, k, cands, vec![]).unwrap()).unwrap();
    assert_eq!(res.member_count(), 5);
}

#[test]
fn singular_candidates_are_excluded_with_a_reason() {
    let n = 2;
    let p = CPoint::origin(n);
    let sample = certify_sample(&p, 9);
    let f = FamilyMember::certify(basener_expr(&Lambda::ones(n), &p).unwrap(), n, &sample).unwrap();
    let k = vec![CPoint::from_reals(&[1.0, 0.0]).unwrap()];
    let res = discrete_hull(&HullProblem::new(n, k, vec![p.clone()], vec![f]).unwrap()).unwrap();
    assert!(!res.outcomes[0].member);
    assert!(res.outcomes[0].singular.is_some());
    assert!(res.outcomes[0].margin.is_none());
}

#[test]
fn polynomial_hull_of_circle_keeps_the_disc_centre() {
    // Holomorphic polynomials cannot separate 0 from the unit circle in the z1-line.
    let n = 2;
    let sample = certify_sample(&CPoint::origin(n), 4);
    let family: Vec<FamilyMember> = ["z1", "z1^2", "z2", "z1*z2+3"]
        .iter()
        .map(|t| FamilyMember::certify(parse(t, n).unwrap(), 1, &sample).unwrap())
        .collect();
    let k: Vec<CPoint> = (0..16)
        .map(|j| {
            let a = std::f64::consts::TAU * j as f64 / 16.0;
            CPoint::new(vec![c(a.cos(), a.sin()), c(0.0, 0.0)]).unwrap()
        })
        .collect();
    let cands = vec![
        CPoint::origin(n),
        CPoint::from_reals(&[0.5, 0.0]).unwrap(),
        CPoint::from_reals(&[1.5, 0.0]).unwrap(),
        CPoint::from_reals(&[0.0, 0.5]).unwrap(),
    ];
    let res = discrete_hull(&HullProblem::new(n, k, cands, family).unwrap()).unwrap();
    assert_eq!(res.members(), vec![true, true, false, false]);
}

#[test]
fn certification_rejects_insufficiently_holomorphic_members() {
    let sample = certify_sample(&CPoint::origin(2), 5);
    let f = parse("abs2(z1)", 2).unwrap();
    assert!(matches!(FamilyMember::certify(f.clone(), 1, &sample), Err(HullError::NotCertified { .. })));
    assert!(FamilyMember::certify(f, 2, &sample).is_ok());
}

#[test]
fn theorem2_reports_preconditions() {
    let p = CPoint::origin(2);
    let cfg = Theorem2Config {
        n: 2,
        p: p.clone(),
        r: 1.0,
        k: vec![CPoint::from_reals(&[0.5, 0.0]).unwrap(), CPoint::from_reals(&[2.0, 0.0]).unwrap()],
        z: vec![CPoint::from_reals(&[0.9, 0.0]).unwrap(), CPoint::from_reals(&[0.1, 0.1]).unwrap()],
    };
    let rep = theorem2_experiment(&cfg).unwrap();
    let sets: Vec<(&str, usize)> = rep.preconditions.iter().map(|v| (v.set, v.index)).collect();
    assert!(sets.contains(&("K", 0)));
    assert!(sets.contains(&("z", 0)));
    assert!(!rep.is_clean());
}
