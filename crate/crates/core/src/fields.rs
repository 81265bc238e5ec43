//! Scalar fields σ: R³ → R₊ with a unique maximum, used as ground truth.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;

/// One anisotropic Gaussian bump `A exp(-½ dᵀ Σ⁻¹ d)`, `d = p - center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianComponent {
    pub center: [f64; 3],
    pub amplitude: f64,
    /// Positive-definite width matrix Σ, space units².
    pub covariance: [[f64; 3]; 3],
}

/// Field description as it appears in scenario files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Gaussian {
        source: [f64; 3],
        amplitude: f64,
        covariance: [[f64; 3]; 3],
    },
    /// `A - dᵀ Q d`, positive on the ball `|d| < domain_radius`; clipped to a
    /// tiny positive floor outside it.
    Quadratic {
        source: [f64; 3],
        amplitude: f64,
        curvature: [[f64; 3]; 3],
        domain_radius: f64,
    },
    /// Sum of Gaussians. The maximizer is located numerically and its
    /// uniqueness is checked on a grid when the field is built.
    SumOfGaussians { components: Vec<GaussianComponent> },
}

#[derive(Clone, Debug)]
struct Bump {
    center: Vector3<f64>,
    amplitude: f64,
    precision: Matrix3<f64>,
}

impl Bump {
    fn new(center: [f64; 3], amplitude: f64, covariance: &[[f64; 3]; 3]) -> Result<Self> {
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::param(
                "amplitude",
                format!("must be > 0, got {amplitude}"),
            ));
        }
        let cov = matrix(covariance);
        check_positive_definite(&cov, "covariance")?;
        let precision = cov
            .try_inverse()
            .ok_or_else(|| Error::param("covariance", "not invertible"))?;
        Ok(Bump {
            center: Vector3::from(center),
            amplitude,
            precision: (precision + precision.transpose()) * 0.5,
        })
    }

    fn value(&self, p: &Vector3<f64>) -> f64 {
        let d = p - self.center;
        self.amplitude * (-0.5 * d.dot(&(self.precision * d))).exp()
    }

    fn gradient(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let d = p - self.center;
        -(self.precision * d) * self.value(p)
    }

    fn hessian(&self, p: &Vector3<f64>) -> Matrix3<f64> {
        let d = p - self.center;
        let w = self.precision * d;
        (w * w.transpose() - self.precision) * self.value(p)
    }
}

#[derive(Clone, Debug)]
enum Model {
    Bumps(Vec<Bump>),
    Quadratic {
        amplitude: f64,
        curvature: Matrix3<f64>,
    },
}

/// A validated field ready for evaluation.
#[derive(Clone, Debug)]
pub struct Field {
    spec: FieldSpec,
    source: Vector3<f64>,
    model: Model,
}

fn matrix(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

fn check_positive_definite(m: &Matrix3<f64>, name: &'static str) -> Result<()> {
    if !m.iter().all(|v| v.is_finite()) || (m - m.transpose()).amax() > 1e-12 * (1.0 + m.amax()) {
        return Err(Error::param(name, "must be a finite symmetric matrix"));
    }
    if symmetric_eigenvalues(m)[0] <= 0.0 {
        return Err(Error::param(name, "must be positive definite"));
    }
    Ok(())
}

/// Smallest value the clipped quadratic field takes.
const QUADRATIC_FLOOR: f64 = 1e-12;

impl Field {
    pub fn new(spec: FieldSpec) -> Result<Self> {
        let (source, model) = match &spec {
            FieldSpec::Gaussian {
                source,
                amplitude,
                covariance,
            } => (
                Vector3::from(*source),
                Model::Bumps(vec![Bump::new(*source, *amplitude, covariance)?]),
            ),
            FieldSpec::Quadratic {
                source,
                amplitude,
                curvature,
                domain_radius,
            } => {
                let q = matrix(curvature);
                check_positive_definite(&q, "curvature")?;
                let lambda_max = symmetric_eigenvalues(&q)[2];
                if !(*domain_radius > 0.0
                    && *amplitude - lambda_max * domain_radius * domain_radius > 0.0)
                {
                    return Err(Error::param(
                        "amplitude",
                        "quadratic field must stay positive on its domain: need A > lambda_max(Q) r^2",
                    ));
                }
                let model = Model::Quadratic {
                    amplitude: *amplitude,
                    curvature: (q + q.transpose()) * 0.5,
                };
                (Vector3::from(*source), model)
            }
            FieldSpec::SumOfGaussians { components } => {
                if components.is_empty() {
                    return Err(Error::param("components", "need at least one component"));
                }
                let bumps = components
                    .iter()
                    .map(|c| Bump::new(c.center, c.amplitude, &c.covariance))
                    .collect::<Result<Vec<_>>>()?;
                let source = locate_maximum(&bumps)?;
                check_unimodal(&bumps, &source)?;
                (source, Model::Bumps(bumps))
            }
        };
        Ok(Field {
            spec,
            source,
            model,
        })
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    /// Location of the unique maximum `p_σ`.
    pub fn source(&self) -> Vector3<f64> {
        self.source
    }

    pub fn eval(&self, p: &Vector3<f64>) -> f64 {
        field_eval(self, p)
    }

    pub fn gradient(&self, p: &Vector3<f64>) -> Vector3<f64> {
        field_gradient(self, p)
    }
}

pub fn field_eval(field: &Field, p: &Vector3<f64>) -> f64 {
    match &field.model {
        Model::Bumps(bumps) => bumps.iter().map(|b| b.value(p)).sum(),
        Model::Quadratic {
            amplitude,
            curvature,
            ..
        } => {
            let d = p - field.source;
            (amplitude - d.dot(&(curvature * d))).max(QUADRATIC_FLOOR)
        }
    }
}

pub fn field_gradient(field: &Field, p: &Vector3<f64>) -> Vector3<f64> {
    match &field.model {
        Model::Bumps(bumps) => bumps.iter().map(|b| b.gradient(p)).sum(),
        Model::Quadratic {
            amplitude,
            curvature,
            ..
        } => {
            let d = p - field.source;
            if amplitude - d.dot(&(curvature * d)) <= QUADRATIC_FLOOR {
                Vector3::zeros()
            } else {
                -(curvature * d) * 2.0
            }
        }
    }
}

fn bumps_value(bumps: &[Bump], p: &Vector3<f64>) -> f64 {
    bumps.iter().map(|b| b.value(p)).sum()
}

fn bumps_gradient(bumps: &[Bump], p: &Vector3<f64>) -> Vector3<f64> {
    bumps.iter().map(|b| b.gradient(p)).sum()
}

/// Newton ascent from the tallest component center, with a gradient step
/// whenever the Hessian is not negative definite.
fn locate_maximum(bumps: &[Bump]) -> Result<Vector3<f64>> {
    let mut p = bumps
        .iter()
        .max_by(|a, b| a.value(&a.center).total_cmp(&b.value(&b.center)))
        .map(|b| b.center)
        .ok_or_else(|| Error::param("components", "empty"))?;
    for _ in 0..200 {
        let g = bumps_gradient(bumps, &p);
        if g.norm() <= 1e-13 * (1.0 + bumps_value(bumps, &p)) {
            return Ok(p);
        }
        let h: Matrix3<f64> = bumps.iter().map(|b| b.hessian(&p)).sum();
        let newton = if symmetric_eigenvalues(&h)[2] < 0.0 {
            h.try_inverse().map(|hi| -(hi * g))
        } else {
            None
        };
        let mut step = newton.unwrap_or_else(|| g * 0.1);
        let f0 = bumps_value(bumps, &p);
        while bumps_value(bumps, &(p + step)) < f0 && step.norm() > 1e-15 {
            step *= 0.5;
        }
        p += step;
    }
    Err(Error::param(
        "components",
        "could not locate the field maximum",
    ))
}

/// Ascent check on a coarse grid around the maximizer: `∇σ(p)ᵀ(p_σ - p) > 0`.
fn check_unimodal(bumps: &[Bump], source: &Vector3<f64>) -> Result<()> {
    let extent = bumps
        .iter()
        .map(|b| {
            let width = symmetric_eigenvalues(&b.precision)[0].recip().sqrt();
            (b.center - source).amax() + 2.0 * width
        })
        .fold(0.0f64, f64::max);
    const STEPS: i32 = 6;
    for i in -STEPS..=STEPS {
        for j in -STEPS..=STEPS {
            for k in -STEPS..=STEPS {
                if i == 0 && j == 0 && k == 0 {
                    continue;
                }
                let offset = Vector3::new(i as f64, j as f64, k as f64) * (extent / STEPS as f64);
                let p = source + offset;
                if bumps_gradient(bumps, &p).dot(&(-offset)) <= 0.0 {
                    return Err(Error::param(
                        "components",
                        format!("field is not unimodal: no ascent toward the maximum at {p:?}"),
                    ));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn iso(w: f64) -> [[f64; 3]; 3] {
        [[w * w, 0.0, 0.0], [0.0, w * w, 0.0], [0.0, 0.0, w * w]]
    }

    fn gaussian(source: [f64; 3], amplitude: f64, w: f64) -> Field {
        Field::new(FieldSpec::Gaussian {
            source,
            amplitude,
            covariance: iso(w),
        })
        .unwrap()
    }

    #[test]
    fn gaussian_closed_form() {
        let f = gaussian([1.0, -2.0, 0.5], 3.0, 2.0);
        let src = Vector3::new(1.0, -2.0, 0.5);
        assert_eq!(f.eval(&src), 3.0);
        assert_eq!(f.gradient(&src), Vector3::zeros());
        for r in [-3.0, -0.5, 0.7, 4.0] {
            let p = src + Vector3::new(r, 0.0, 0.0);
            let want = 3.0 * (-r * r / 8.0f64).exp();
            assert_abs_diff_eq!(f.eval(&p), want, epsilon = 1e-15);
            // points back toward the source with magnitude (|r| / w²) σ
            let g = f.gradient(&p);
            assert_abs_diff_eq!(g, Vector3::new(-r / 4.0 * want, 0.0, 0.0), epsilon = 1e-15);
        }
    }

    #[test]
    fn quadratic_field_and_domain_check() {
        let spec = FieldSpec::Quadratic {
            source: [0.0, 0.0, 0.0],
            amplitude: 100.0,
            curvature: [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.5]],
            domain_radius: 5.0,
        };
        let f = Field::new(spec.clone()).unwrap();
        let p = Vector3::new(1.0, 2.0, -2.0);
        assert_abs_diff_eq!(f.eval(&p), 100.0 - (1.0 + 8.0 + 2.0), epsilon = 1e-12);
        assert_abs_diff_eq!(
            f.gradient(&p),
            Vector3::new(-2.0, -8.0, 2.0),
            epsilon = 1e-12
        );
        // far outside: clipped but still positive
        assert!(f.eval(&Vector3::new(100.0, 0.0, 0.0)) > 0.0);

        let FieldSpec::Quadratic { curvature, .. } = spec else {
            unreachable!()
        };
        let too_big = FieldSpec::Quadratic {
            source: [0.0; 3],
            amplitude: 40.0,
            curvature,
            domain_radius: 5.0,
        };
        assert!(Field::new(too_big).is_err());
    }

    #[test]
    fn invalid_widths_are_rejected() {
        let spec = FieldSpec::Gaussian {
            source: [0.0; 3],
            amplitude: 1.0,
            covariance: [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        assert!(Field::new(spec).is_err());
        let spec = FieldSpec::Gaussian {
            source: [0.0; 3],
            amplitude: 0.0,
            covariance: iso(1.0),
        };
        assert!(Field::new(spec).is_err());
    }

    #[test]
    fn sum_of_gaussians_finds_its_peak() {
        let spec = FieldSpec::SumOfGaussians {
            components: vec![
                GaussianComponent {
                    center: [0.0, 0.0, 0.0],
                    amplitude: 2.0,
                    covariance: iso(3.0),
                },
                GaussianComponent {
                    center: [1.0, 0.5, 0.0],
                    amplitude: 1.0,
                    covariance: iso(2.0),
                },
            ],
        };
        let f = Field::new(spec).unwrap();
        let src = f.source();
        assert!(f.gradient(&src).norm() < 1e-12);
        assert!(src.x > 0.0 && src.x < 1.0);
        for p in [Vector3::new(2.0, 1.0, 0.3), Vector3::new(-1.0, 0.0, 0.0)] {
            assert!(f.eval(&p) < f.eval(&src));
        }
    }

    #[test]
    fn bimodal_sum_is_rejected() {
        let spec = FieldSpec::SumOfGaussians {
            components: vec![
                GaussianComponent {
                    center: [-5.0, 0.0, 0.0],
                    amplitude: 1.0,
                    covariance: iso(1.0),
                },
                GaussianComponent {
                    center: [5.0, 0.0, 0.0],
                    amplitude: 0.9,
                    covariance: iso(1.0),
                },
            ],
        };
        assert!(Field::new(spec).is_err());
    }
}
