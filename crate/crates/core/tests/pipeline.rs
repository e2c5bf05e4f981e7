use henon_shadow::dynamics::repelling_cycles_up_to;
use henon_shadow::hyperbolicity::{certify_orbit, CertifyTolerances, Verdict};
use henon_shadow::linsolve::inverse_norm_exact;
use henon_shadow::loci::radius_bound;
use henon_shadow::sets::{
    build_a, build_ab, cycle_lift, hausdorff_distance, motion_trace, separation, skeleton, skeleton_points, PointCloud,
};
use henon_shadow::shadowing::{continue_orbit, straight_path, ContinuationConfig, ContinuationResult};
use henon_shadow::{Complex64, OrbitWindow, Params};

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn continued_cycles_stay_separated() {
    let c = cx(0.0, 0.0);
    let params = Params::new(c, cx(0.05, 0.0));
    let cfg = ContinuationConfig::default();
    let lifts: Vec<OrbitWindow> = repelling_cycles_up_to(c, 8).unwrap().iter().map(|cyc| cycle_lift(cyc, c)).collect();
    let tau = separation(&lifts).unwrap();
    let continued: Vec<OrbitWindow> = lifts.iter().map(|w| continue_orbit(w, &params, &cfg).unwrap().orbit).collect();
    assert!(separation(&continued).unwrap() > tau / 2.0);
}

#[test]
fn displacement_within_tangent_bound() {
    let c = cx(-0.1, 0.05);
    let cfg = ContinuationConfig::default();
    for cyc in repelling_cycles_up_to(c, 5).unwrap() {
        let w = cycle_lift(&cyc, c);
        for b in [0.01, 0.03] {
            let params = Params::new(c, cx(b, 0.0));
            let r = continue_orbit(&w, &params, &cfg).unwrap();
            let n = inverse_norm_exact(&w, &Params::new(c, cx(0.0, 0.0)))
                .unwrap()
                .max(inverse_norm_exact(&r.orbit, &params).unwrap());
            assert!(r.displacement <= n * radius_bound(c, params.b) * b);
        }
    }
}

#[test]
fn family_at_zero_is_the_lifted_set() {
    let c = cx(-0.2, 0.1);
    let cycles = skeleton(c, 5).unwrap();
    let fam = build_ab(c, cx(0.0, 0.0), &cycles, &ContinuationConfig::default());
    assert!(fam.failures.is_empty());
    let a = build_a(c, &skeleton_points(&cycles), "A");
    assert_eq!(hausdorff_distance(&fam.cloud.points, &a.points).unwrap(), 0.0);
}

#[test]
fn cloud_csv_survives_a_file_roundtrip() {
    let c = cx(0.1, -0.2);
    let fam = build_ab(c, cx(0.02, 0.01), &skeleton(c, 4).unwrap(), &ContinuationConfig::default());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.csv");
    fam.cloud.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
    let back = PointCloud::read_csv(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back.points, fam.cloud.points);
}

#[test]
fn continuation_result_json_roundtrip() {
    let c = cx(-0.3, 0.0);
    let cyc = &repelling_cycles_up_to(c, 3).unwrap()[2];
    let r = continue_orbit(&cycle_lift(cyc, c), &Params::new(c, cx(0.01, 0.02)), &ContinuationConfig::default()).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: ContinuationResult = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn certified_orbits_across_the_cardioid() {
    let tol = CertifyTolerances::default();
    let cfg = ContinuationConfig::default();
    for c in [cx(0.0, 0.0), cx(-0.3, 0.0), cx(0.15, 0.1)] {
        let params = Params::new(c, cx(0.02, -0.01));
        for cyc in repelling_cycles_up_to(c, 4).unwrap() {
            let r = continue_orbit(&cycle_lift(&cyc, c), &params, &cfg).unwrap();
            let est = certify_orbit(&r.orbit, &params, &tol);
            assert_eq!(est.verdict, Verdict::Hyperbolic, "c = {c}, period {}", cyc.period);
            if let Some(bound) = est.dichotomy_bound {
                assert!(est.inverse_norm.unwrap() <= bound + 1e-6);
            }
        }
    }
}

#[test]
fn distinct_motions_never_collide() {
    let c = cx(-0.1, 0.0);
    let cfg = ContinuationConfig::default();
    let mut path = vec![cx(0.0, 0.0)];
    path.extend(straight_path(cx(0.03, 0.02), 3));
    let traces: Vec<_> = repelling_cycles_up_to(c, 4)
        .unwrap()
        .iter()
        .map(|cyc| motion_trace(&cycle_lift(cyc, c), c, &path, &cfg).unwrap())
        .collect();
    for (i, a) in traces.iter().enumerate() {
        for b in &traces[i + 1..] {
            for k in 0..path.len() {
                assert!((a.positions[k] - b.positions[k]).norm() > 1e-6);
            }
        }
    }
}
