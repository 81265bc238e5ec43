use std::f64::consts::{PI, SQRT_2};

use geoswarm::attitude::{attitude_error, heading_alignment_delta};
use geoswarm::deployment::{ascending_direction, deployment_stats};
use geoswarm::fields::{Field, FieldSpec};
use geoswarm::so3::{
    adjoint_rotate, dist_frobenius, dist_geodesic, dist_log, exp_coord_derivative, exp_so3, hat,
    lie_bracket, log_so3,
};
use geoswarm::{Rotation, RotationVector, Vector3};
use proptest::prelude::*;

fn vec3(bound: f64) -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-bound..bound).prop_map(Vector3::from)
}

/// Rotation vector with angle strictly below `max_angle`.
fn rotvec(max_angle: f64) -> impl Strategy<Value = Vector3<f64>> {
    (vec3(1.0), 0.0..max_angle).prop_filter_map("zero axis", |(v, a)| {
        let n = v.norm();
        (n > 1e-3).then(|| v * (a / n))
    })
}

fn rotation() -> impl Strategy<Value = Rotation> {
    rotvec(PI).prop_map(|v| exp_so3(&RotationVector::new(v)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn exp_log_roundtrip(v in rotvec(PI - 1e-3)) {
        let back = log_so3(&exp_so3(&RotationVector::new(v))).unwrap();
        prop_assert!((back.vector() - v).norm() < 1e-9);
    }

    #[test]
    fn log_exp_roundtrip(r in rotation()) {
        prop_assume!(r.trace() > -1.0 + 1e-4);
        let back = exp_so3(&log_so3(&r).unwrap());
        prop_assert!((back.matrix() - r.matrix()).amax() < 1e-9);
    }

    #[test]
    fn exp_is_orthonormal(v in vec3(10.0)) {
        let r = exp_so3(&RotationVector::new(v));
        prop_assert!(r.orthonormality_error() < 1e-12);
        prop_assert!((r.matrix().determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn metric_ordering(a in rotation(), b in rotation()) {
        let rel = a.transpose() * b;
        prop_assume!(rel.trace() > -1.0 + 1e-4);
        let g = dist_geodesic(&a, &b).unwrap();
        let l = dist_log(&a, &b).unwrap();
        let f = dist_frobenius(&a, &b);
        prop_assert!((l - SQRT_2 * g).abs() < 1e-9);
        prop_assert!(f <= l + 1e-12);
        prop_assert!((f - 2.0 * SQRT_2 * (0.5 * g).sin()).abs() < 1e-9);
    }

    #[test]
    fn geodesic_distance_is_bi_invariant(a in rotation(), b in rotation(), q in rotation()) {
        prop_assume!((a.transpose() * b).trace() > -1.0 + 1e-4);
        let d = dist_geodesic(&a, &b).unwrap();
        prop_assert!((dist_geodesic(&(q * a), &(q * b)).unwrap() - d).abs() < 1e-8);
        prop_assert!((dist_geodesic(&(a * q), &(b * q)).unwrap() - d).abs() < 1e-8);
    }

    #[test]
    fn adjoint_matches_rotated_vector(r in rotation(), v in vec3(5.0)) {
        let lhs = adjoint_rotate(&r, &hat(&v)).vee();
        prop_assert!((lhs - r.matrix() * v).norm() < 1e-12 * (1.0 + v.norm()));
    }

    #[test]
    fn products_stay_rotations(a in rotation(), b in rotation()) {
        let r = a * b;
        prop_assert!(r.orthonormality_error() < 1e-9);
        prop_assert!((r.matrix().determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn adjoint_preserves_the_inner_product(r in rotation(), a in vec3(2.0), b in vec3(2.0)) {
        let (wa, wb) = (hat(&a), hat(&b));
        let lhs = adjoint_rotate(&r, &wa).inner(&adjoint_rotate(&r, &wb));
        prop_assert!((lhs - wa.inner(&wb)).abs() < 1e-10);
    }

    #[test]
    fn bracket_is_skew_adjoint(a in vec3(2.0), b in vec3(2.0), c in vec3(2.0)) {
        let (wa, wb, wc) = (hat(&a), hat(&b), hat(&c));
        let lhs = lie_bracket(&wa, &wb).inner(&wc);
        let rhs = -wb.inner(&lie_bracket(&wa, &wc));
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn hat_norm_identity(v in vec3(100.0)) {
        let h = hat(&v);
        prop_assert!((h.frobenius_norm() - SQRT_2 * v.norm()).abs() < 1e-12 * (1.0 + v.norm()));
        prop_assert!((h.matrix() + h.matrix().transpose()).amax() == 0.0);
        prop_assert_eq!(h.vee(), v);
    }

    #[test]
    fn exp_coord_derivative_matches_finite_difference(v in rotvec(2.8), w in vec3(1.0)) {
        let r = exp_so3(&RotationVector::new(v));
        let h = 1e-6;
        let fwd = log_so3(&(r * exp_so3(&RotationVector::new(w * h)))).unwrap();
        let bwd = log_so3(&(r * exp_so3(&RotationVector::new(-w * h)))).unwrap();
        let fd = (fwd.vector() - bwd.vector()) / (2.0 * h);
        let b = exp_coord_derivative(&RotationVector::new(v), &hat(&w)).unwrap().vee();
        prop_assert!((fd - b).norm() < 1e-6 * (1.0 + b.norm()), "{fd} vs {b}");
    }

    #[test]
    fn heading_error_never_exceeds_attitude_error(rd in rotation(), v in rotvec(PI - 1e-3)) {
        let r = rd * exp_so3(&RotationVector::new(v));
        let err = attitude_error(&rd, &r).unwrap();
        let delta = heading_alignment_delta(&r.heading(), &rd.heading());
        prop_assert!(delta <= err.mu + 1e-9);
    }
}

fn gaussian(source: Vector3<f64>, diag: Vector3<f64>, amplitude: f64) -> Field {
    Field::new(FieldSpec::Gaussian {
        source: source.into(),
        amplitude,
        covariance: [[diag.x, 0.0, 0.0], [0.0, diag.y, 0.0], [0.0, 0.0, diag.z]],
    })
    .unwrap()
}

fn positions() -> impl Strategy<Value = Vec<Vector3<f64>>> {
    prop::collection::vec(vec3(5.0), 4..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn field_gradient_matches_finite_difference(
        source in vec3(10.0),
        diag in prop::array::uniform3(4.0..50.0),
        amplitude in 1.0..100.0,
        offset in vec3(8.0),
    ) {
        let f = gaussian(source, Vector3::from(diag), amplitude);
        let p = source + offset;
        let g = f.gradient(&p);
        let h = 1e-5;
        let fd = Vector3::from_fn(|i, _| {
            let e = Vector3::ith(i, h);
            (f.eval(&(p + e)) - f.eval(&(p - e))) / (2.0 * h)
        });
        prop_assert!((fd - g).norm() <= 1e-6 * g.norm().max(1e-6 * amplitude), "{fd} vs {g}");
    }

    #[test]
    fn offsets_sum_to_zero_and_constants_cancel(ps in positions(), c in -50.0..50.0f64, s in prop::collection::vec(-5.0..5.0f64, 12)) {
        let stats = deployment_stats(&ps).unwrap();
        let sum: Vector3<f64> = stats.offsets.iter().sum();
        prop_assert!(sum.norm() < 1e-12 * (1.0 + stats.radius) * ps.len() as f64);
        let samples = &s[..ps.len()];
        let shifted: Vec<f64> = samples.iter().map(|v| v + c).collect();
        let l0 = ascending_direction(samples, &stats).unwrap();
        let l1 = ascending_direction(&shifted, &stats).unwrap();
        prop_assert!((l0 - l1).norm() < 1e-10 * (1.0 + c.abs()));
    }

    #[test]
    fn linear_field_gives_covariance_times_gradient(ps in positions(), g in vec3(3.0), a in -10.0..10.0f64) {
        let stats = deployment_stats(&ps).unwrap();
        let samples: Vec<f64> = ps.iter().map(|p| a + g.dot(p)).collect();
        let l = ascending_direction(&samples, &stats).unwrap();
        let want = stats.covariance * g / (stats.radius * stats.radius);
        prop_assert!((l - want).norm() < 1e-9 * (1.0 + want.norm() + a.abs()));
    }

    #[test]
    fn symmetric_deployment_ascends_a_quadratic(
        half in prop::collection::vec(vec3(2.0), 3..6),
        center in vec3(20.0),
        curv in prop::array::uniform3(0.01..0.2),
    ) {
        // ±x pairs cancel the third-moment term, so L = P ∇σ(p_c) / D² exactly.
        let ps: Vec<Vector3<f64>> = half.iter().flat_map(|x| [center + x, center - x]).collect();
        let stats = deployment_stats(&ps).unwrap();
        prop_assume!(stats.lambda_min > 1e-3);
        let f = Field::new(FieldSpec::Quadratic {
            source: [0.0; 3],
            amplitude: 1e4,
            curvature: [[curv[0], 0.0, 0.0], [0.0, curv[1], 0.0], [0.0, 0.0, curv[2]]],
            domain_radius: 100.0,
        })
        .unwrap();
        let samples: Vec<f64> = ps.iter().map(|p| f.eval(p)).collect();
        let l = ascending_direction(&samples, &stats).unwrap();
        let grad = f.gradient(&stats.centroid);
        let want = stats.covariance * grad / (stats.radius * stats.radius);
        prop_assert!((l - want).norm() < 1e-6 * (1.0 + want.norm()));
        prop_assert!(l.dot(&grad) >= stats.lambda_min * grad.norm_squared() / stats.radius.powi(2) * (1.0 - 1e-6) - 1e-9);
    }
}
