//! Source terms `S⁽¹⁾, S⁽²⁾` of the Riemann-invariant balance law, in the
//! general `Γ̃` form and in factored per-family form `S = prefactor · ℘`.

use crate::contour::{self, Polyline};
use crate::error::{Error, Result};
use crate::metric::{GeometrySample, MetricFamily, Rect, Reciprocal};
use crate::poly::Cubic2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceEval {
    pub s1: f64,
    pub s2: f64,
    pub u: f64,
    pub v: f64,
    pub x: f64,
    pub y: f64,
}

/// The two source cubics at one point, read off from `Γ̃`.
pub fn general_cubics(sample: &GeometrySample) -> (Cubic2, Cubic2) {
    let t = &sample.normalized;
    let lin_u = t.c2_22 - 2.0 * t.c1_12;
    let quad_uu = 2.0 * t.c2_12 - t.c1_11;
    // u(u² − v²) ± v(u² − v²)
    let a = t.c2_11;
    let s1 = Cubic2([
        -t.c1_22,
        lin_u,
        t.c2_22,
        quad_uu,
        2.0 * t.c2_12,
        t.c1_11,
        a,
        a,
        -a,
        -a,
    ]);
    let s2 = Cubic2([
        -t.c1_22,
        lin_u,
        -t.c2_22,
        quad_uu,
        -2.0 * t.c2_12,
        t.c1_11,
        a,
        -a,
        -a,
        a,
    ]);
    (s1, s2)
}

pub fn source_general(sample: &GeometrySample, u: f64, v: f64) -> SourceEval {
    let (p1, p2) = general_cubics(sample);
    SourceEval {
        s1: p1.eval(u, v),
        s2: p2.eval(u, v),
        u,
        v,
        x: sample.x,
        y: sample.y,
    }
}

/// Sign-determining factor of a family's sources.
#[derive(Debug, Clone, PartialEq)]
pub struct SourcePolynomial {
    pub family: &'static str,
    pub poly: Cubic2,
    pub prefactor: f64,
    /// Human-readable form of the prefactor, e.g. `"1/y"`.
    pub prefactor_label: &'static str,
    /// Named parameters the coefficients depend on (`mu`, `k`, ...).
    pub params: Vec<(&'static str, f64)>,
}

impl SourcePolynomial {
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.prefactor * self.poly.eval(u, v)
    }
}

// (u − v)(u + v)² and (u + v)(u − v)² in monomial order.
const CUBE_1: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
const CUBE_2: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

fn with_cubic(low: [f64; 6], k: f64, cube: [f64; 4]) -> Cubic2 {
    let mut c = [0.0; 10];
    c[..6].copy_from_slice(&low);
    for i in 0..4 {
        c[6 + i] = k * cube[i];
    }
    Cubic2(c)
}

/// Family-specialised `℘⁽¹⁾, ℘⁽²⁾` at `(x, y)`.
pub fn source_polynomial(family: &MetricFamily, x: f64, y: f64) -> Result<(SourcePolynomial, SourcePolynomial)> {
    // Validates parameters and the point.
    let jet = crate::metric::eval_metric(family, x, y)?;
    let name = family.name();
    let mk = |poly, prefactor, prefactor_label, params: Vec<(&'static str, f64)>| SourcePolynomial {
        family: name,
        poly,
        prefactor,
        prefactor_label,
        params,
    };
    Ok(match *family {
        MetricFamily::Hyperbolic => (
            mk(with_cubic([0.0, 1.0, -1.0, 0.0, 0.0, 0.0], 1.0, CUBE_1), 1.0 / y, "1/y", vec![]),
            mk(with_cubic([0.0, 1.0, 1.0, 0.0, 0.0, 0.0], 1.0, CUBE_2), 1.0 / y, "1/y", vec![]),
        ),
        MetricFamily::HelicoidQuadratic { .. } => {
            let e = jet.e;
            let pre = jet.e_y / jet.e;
            (
                mk(with_cubic([0.0, -1.0, -1.0, 0.0, 0.0, 0.0], -0.5 * e, CUBE_1), pre, "E_y/E", vec![("E", e)]),
                mk(with_cubic([0.0, -1.0, 1.0, 0.0, 0.0, 0.0], -0.5 * e, CUBE_2), pre, "E_y/E", vec![("E", e)]),
            )
        }
        MetricFamily::GeneralizedCatenoid { c, beta } => {
            let b = beta * beta - 1.0;
            let m = c * c * b * b;
            let pre = jet.e_y / jet.e;
            (
                mk(with_cubic([0.0, -0.5, -0.5 * b, 0.0, 0.0, 0.0], -0.5 * m, CUBE_1), pre, "E_y/E", vec![]),
                mk(with_cubic([0.0, -0.5, 0.5 * b, 0.0, 0.0, 0.0], -0.5 * m, CUBE_2), pre, "E_y/E", vec![]),
            )
        }
        MetricFamily::Enneper { alpha } => {
            if !(y > 0.0) {
                return Err(Error::Domain {
                    family: name,
                    x,
                    y,
                    reason: "the factored Enneper sources need y > 0",
                });
            }
            let mu = x / y;
            let th = 1.0 + x * x + y * y;
            let pre = alpha * y / th;
            let r = 2.0 / alpha;
            let params = vec![("alpha", alpha), ("mu", mu)];
            (
                mk(
                    with_cubic([mu, -1.0, -r, mu, mu * (1.0 - r), -r * mu], -1.0, CUBE_1),
                    pre,
                    "alpha*y/Theta",
                    params.clone(),
                ),
                mk(
                    with_cubic([mu, -1.0, r, mu, -mu * (1.0 - r), -r * mu], -1.0, CUBE_2),
                    pre,
                    "alpha*y/Theta",
                    params,
                ),
            )
        }
        MetricFamily::Reciprocal(r) => {
            let (pre, label) = match r {
                Reciprocal::Exponential { omega, .. } => (-0.5 * omega, "-omega/2"),
                Reciprocal::HyperbolicCosine { omega, .. } => {
                    (-0.5 * omega * (omega * y).tanh(), "-omega*tanh(omega*y)/2")
                }
            };
            let k = jet.e * jet.e;
            (
                mk(with_cubic([0.0, 3.0, 0.0, 0.0, 0.0, 0.0], k, CUBE_1), pre, label, vec![("k", k)]),
                mk(with_cubic([0.0, 3.0, 0.0, 0.0, 0.0, 0.0], k, CUBE_2), pre, label, vec![("k", k)]),
            )
        }
        MetricFamily::Custom(_) => return Err(Error::UnsupportedFamily(name)),
    })
}

/// Reciprocal-type `℘` for a given `k`, independent of any metric point.
pub fn reciprocal_polynomials(k: f64) -> (Cubic2, Cubic2) {
    (
        with_cubic([0.0, 3.0, 0.0, 0.0, 0.0, 0.0], k, CUBE_1),
        with_cubic([0.0, 3.0, 0.0, 0.0, 0.0, 0.0], k, CUBE_2),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    NonNegative,
    NonPositive,
}

/// Sign of the factored prefactor over a rectangle, or `None` when it
/// changes sign strictly inside. Each family's prefactor has the sign of a
/// function monotone in `y`, so the endpoints decide.
pub fn prefactor_sign_on(family: &MetricFamily, rect: &Rect) -> Result<Option<Sign>> {
    let s = |y: f64| -> Result<f64> {
        Ok(match *family {
            MetricFamily::Hyperbolic => 1.0,
            MetricFamily::HelicoidQuadratic { a, b, .. } => 2.0 * a * y + b,
            MetricFamily::GeneralizedCatenoid { .. } | MetricFamily::Enneper { .. } => y,
            MetricFamily::Reciprocal(Reciprocal::Exponential { .. }) => -1.0,
            MetricFamily::Reciprocal(Reciprocal::HyperbolicCosine { .. }) => -y,
            MetricFamily::Custom(_) => return Err(Error::UnsupportedFamily(family.name())),
        })
    };
    let (lo, hi) = (s(rect.y0)?, s(rect.y1)?);
    Ok(if lo >= 0.0 && hi >= 0.0 {
        Some(Sign::NonNegative)
    } else if lo <= 0.0 && hi <= 0.0 {
        Some(Sign::NonPositive)
    } else {
        None
    })
}

/// Zero set of `poly` inside `[u0, u1] × [v0, v1]` by marching squares on a
/// `resolution²` cell grid.
pub fn zero_locus(poly: &Cubic2, window: &Rect, resolution: usize) -> Result<Vec<Polyline>> {
    if poly.is_zero() {
        return Err(Error::DegenerateLocus);
    }
    if resolution < 16 {
        return Err(Error::InvalidInput(format!("locus resolution must be >= 16, got {resolution}")));
    }
    Ok(contour::marching_squares(|u, v| poly.eval(u, v), window, resolution, resolution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::GeometrySample;

    fn hyper(y: f64) -> GeometrySample {
        GeometrySample::at(&MetricFamily::Hyperbolic, 0.0, y).unwrap()
    }

    #[test]
    fn hyperbolic_general_values() {
        let s = source_general(&hyper(1.0), 1.0, 1.0);
        assert_eq!(s.s1, 0.0);
        let s = source_general(&hyper(1.0), 0.0, 1.0);
        assert!((s.s1 + 2.0).abs() < 1e-14 && (s.s2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hyperbolic_coefficients_match_exactly() {
        let y = 2.5;
        let (g1, g2) = general_cubics(&hyper(y));
        let (p1, p2) = source_polynomial(&MetricFamily::Hyperbolic, 0.0, y).unwrap();
        for (g, p) in [(g1, p1), (g2, p2)] {
            for k in 0..10 {
                assert!((g.0[k] - p.prefactor * p.poly.0[k]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn enneper_constant_term() {
        let f = MetricFamily::Enneper { alpha: 2.0 };
        let s = source_general(&GeometrySample::at(&f, 1.0, 1.0).unwrap(), 0.0, 0.0);
        assert!((s.s1 - 2.0 / 3.0).abs() < 1e-12 && (s.s2 - 2.0 / 3.0).abs() < 1e-12);
        let (p1, _) = source_polynomial(&f, 0.0, 1.0).unwrap();
        // alpha = 2, mu = 0: -(u + v)²(u − v) − u − v
        let want = Cubic2([0.0, -1.0, -1.0, 0.0, 0.0, 0.0, -1.0, -1.0, 1.0, 1.0]);
        assert_eq!(p1.poly, want);
        assert!(source_polynomial(&f, 1.0, 0.0).is_err());
    }

    #[test]
    fn reciprocal_at_origin() {
        let f = MetricFamily::Reciprocal(Reciprocal::Exponential { a: 1.0, omega: 1.0 });
        let (p1, p2) = source_polynomial(&f, 0.0, 0.0).unwrap();
        assert_eq!(p1.params, vec![("k", 1.0)]);
        assert_eq!(p1.poly, Cubic2([0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, -1.0, -1.0]));
        for u in [-2.0, 0.3, 1.7] {
            assert!((p1.poly.eval(u, u) - 3.0 * u).abs() < 1e-14);
            assert!((p2.poly.eval(u, u) - 3.0 * u).abs() < 1e-14);
        }
    }

    #[test]
    fn custom_unsupported() {
        let f = MetricFamily::Custom(crate::metric::CustomMetric {
            e: std::sync::Arc::new(|_, _| 1.0),
            g: std::sync::Arc::new(|_, _| 1.0),
            domain: Rect::new(0.0, 1.0, 0.0, 1.0).unwrap(),
        });
        assert_eq!(source_polynomial(&f, 0.5, 0.5), Err(Error::UnsupportedFamily("custom")));
    }

    #[test]
    fn prefactor_signs() {
        let r = |y0, y1| Rect::new(0.0, 1.0, y0, y1).unwrap();
        let hel = MetricFamily::HelicoidQuadratic { a: 1.0, b: -2.0, c: 1.5 };
        assert_eq!(prefactor_sign_on(&hel, &r(1.0, 3.0)).unwrap(), Some(Sign::NonNegative));
        assert_eq!(prefactor_sign_on(&hel, &r(-1.0, 0.5)).unwrap(), Some(Sign::NonPositive));
        assert_eq!(prefactor_sign_on(&hel, &r(0.0, 2.0)).unwrap(), None);
        let rec = MetricFamily::Reciprocal(Reciprocal::Exponential { a: 1.0, omega: 1.0 });
        assert_eq!(prefactor_sign_on(&rec, &r(-3.0, 3.0)).unwrap(), Some(Sign::NonPositive));
    }

    #[test]
    fn zero_polynomial_locus_rejected() {
        let w = Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap();
        assert_eq!(zero_locus(&Cubic2::zero(), &w, 32), Err(Error::DegenerateLocus));
    }
}
