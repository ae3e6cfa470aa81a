//! Diagonal metrics `g = E dx² + G dy²` and the pointwise geometry derived
//! from them: Christoffel symbols, Gauss curvature, `γ = √(−κ)` and the
//! normalised symbols `Γ̃`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec;
use crate::fd;

/// Closed axis-aligned rectangle in the `(x, y)` plane. Zero-width sides are
/// allowed and stand for a single coordinate value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let r = Rect { x0, x1, y0, y1 };
        if ![x0, x1, y0, y1].iter().all(|t| t.is_finite()) || x1 < x0 || y1 < y0 {
            return Err(Error::InvalidInput(format!(
                "rectangle needs finite x0 <= x1 and y0 <= y1, got [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        Ok(r)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// `n` evenly spaced values on `[a, b]`; a single midpoint when `n == 1`
    /// and a single value when the interval is degenerate.
    pub fn axis(a: f64, b: f64, n: usize) -> Vec<f64> {
        if n <= 1 || a == b {
            return vec![0.5 * (a + b)];
        }
        let h = (b - a) / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
            .collect()
    }

    /// Tensor grid of `nx * ny` points, x varying fastest.
    pub fn grid(&self, nx: usize, ny: usize) -> Vec<(f64, f64)> {
        let xs = Rect::axis(self.x0, self.x1, nx);
        let ys = Rect::axis(self.y0, self.y1, ny);
        ys.iter()
            .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
            .collect()
    }
}

pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A user-supplied diagonal metric. Derivatives are taken numerically.
#[derive(Clone)]
pub struct CustomMetric {
    pub e: ScalarField,
    pub g: ScalarField,
    pub domain: Rect,
}

impl fmt::Debug for CustomMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMetric")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reciprocal {
    /// `E = A e^{ωy}`, `G = 1/E`.
    Exponential { a: f64, omega: f64 },
    /// `E = A cosh(ωy)`, `G = 1/E`.
    HyperbolicCosine { a: f64, omega: f64 },
}

#[derive(Debug, Clone)]
pub enum MetricFamily {
    /// `E = G = y⁻²` on the upper half plane.
    Hyperbolic,
    /// `E = Ay² + By + C`, `G = 1`.
    HelicoidQuadratic { a: f64, b: f64, c: f64 },
    /// `E = (c cosh(y/c))^{2/(β²−1)}`, `G = E / (c²(β²−1)²)`.
    GeneralizedCatenoid { c: f64, beta: f64 },
    /// `E = G = (1 + x² + y²)^α`.
    Enneper { alpha: f64 },
    Reciprocal(Reciprocal),
    Custom(CustomMetric),
}

/// Metric values with the partial derivatives needed downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub e: f64,
    pub g: f64,
    pub e_x: f64,
    pub e_y: f64,
    pub g_x: f64,
    pub g_y: f64,
    pub e_yy: f64,
    pub g_xx: f64,
}

/// Christoffel symbols of a diagonal metric, `c1_12` standing for `Γ¹₁₂`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Christoffel {
    pub c1_11: f64,
    pub c1_12: f64,
    pub c1_22: f64,
    pub c2_11: f64,
    pub c2_12: f64,
    pub c2_22: f64,
}

impl Christoffel {
    pub fn to_array(&self) -> [f64; 6] {
        [self.c1_11, self.c1_12, self.c1_22, self.c2_11, self.c2_12, self.c2_22]
    }
}

impl MetricFamily {
    pub fn name(&self) -> &'static str {
        match self {
            MetricFamily::Hyperbolic => "hyperbolic",
            MetricFamily::HelicoidQuadratic { .. } => "helicoid",
            MetricFamily::GeneralizedCatenoid { .. } => "catenoid",
            MetricFamily::Enneper { .. } => "enneper",
            MetricFamily::Reciprocal(Reciprocal::Exponential { .. }) => "reciprocal-exp",
            MetricFamily::Reciprocal(Reciprocal::HyperbolicCosine { .. }) => "reciprocal-cosh",
            MetricFamily::Custom(_) => "custom",
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, MetricFamily::Custom(_))
    }

    /// Checks the parameter constraints of the family.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            MetricFamily::Hyperbolic => Ok(()),
            MetricFamily::HelicoidQuadratic { a, b, c } => {
                if !(a > 0.0) || !(b * b - 4.0 * a * c < 0.0) {
                    return bad(format!("helicoid needs A > 0 and B^2 - 4AC < 0, got A={a}, B={b}, C={c}"));
                }
                Ok(())
            }
            MetricFamily::GeneralizedCatenoid { c, beta } => {
                if c == 0.0 || !c.is_finite() || !(beta >= std::f64::consts::SQRT_2) {
                    return bad(format!("catenoid needs c != 0 and beta >= sqrt(2), got c={c}, beta={beta}"));
                }
                Ok(())
            }
            MetricFamily::Enneper { alpha } => {
                if !(alpha > 0.0) {
                    return bad(format!("enneper needs alpha > 0, got {alpha}"));
                }
                Ok(())
            }
            MetricFamily::Reciprocal(Reciprocal::Exponential { a, omega })
            | MetricFamily::Reciprocal(Reciprocal::HyperbolicCosine { a, omega }) => {
                if !(a > 0.0) || !(omega > 0.0) {
                    return bad(format!("reciprocal metric needs A > 0 and omega > 0, got A={a}, omega={omega}"));
                }
                Ok(())
            }
            MetricFamily::Custom(ref m) => {
                Rect::new(m.domain.x0, m.domain.x1, m.domain.y0, m.domain.y1).map(|_| ())
            }
        }
    }

    fn check_point(&self, x: f64, y: f64) -> Result<()> {
        let domain = |reason| Error::Domain { family: self.name(), x, y, reason };
        if !x.is_finite() || !y.is_finite() {
            return Err(domain("coordinates must be finite"));
        }
        match self {
            MetricFamily::Hyperbolic if y <= 0.0 => Err(domain("requires y > 0")),
            MetricFamily::Custom(m) if !m.domain.contains(x, y) => {
                Err(domain("outside the declared domain"))
            }
            _ => Ok(()),
        }
    }

    /// `(E, G)` without domain or positivity checks.
    pub fn raw_eg(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            MetricFamily::Hyperbolic => {
                let e = 1.0 / (y * y);
                (e, e)
            }
            MetricFamily::HelicoidQuadratic { a, b, c } => (a * y * y + b * y + c, 1.0),
            MetricFamily::GeneralizedCatenoid { c, beta } => {
                let p = 1.0 / (beta * beta - 1.0);
                let e = (c * c * (y / c).cosh().powi(2)).powf(p);
                (e, p * p * e / (c * c))
            }
            MetricFamily::Enneper { alpha } => {
                let e = (1.0 + x * x + y * y).powf(alpha);
                (e, e)
            }
            MetricFamily::Reciprocal(Reciprocal::Exponential { a, omega }) => {
                let e = a * (omega * y).exp();
                (e, 1.0 / e)
            }
            MetricFamily::Reciprocal(Reciprocal::HyperbolicCosine { a, omega }) => {
                let e = a * (omega * y).cosh();
                (e, 1.0 / e)
            }
            MetricFamily::Custom(ref m) => ((m.e)(x, y), (m.g)(x, y)),
        }
    }

    fn jet_unchecked(&self, x: f64, y: f64) -> MetricJet {
        match *self {
            MetricFamily::Hyperbolic => {
                let e = 1.0 / (y * y);
                let e_y = -2.0 * e / y;
                let e_yy = 6.0 * e / (y * y);
                MetricJet { e, g: e, e_x: 0.0, e_y, g_x: 0.0, g_y: e_y, e_yy, g_xx: 0.0 }
            }
            MetricFamily::HelicoidQuadratic { a, b, c } => MetricJet {
                e: a * y * y + b * y + c,
                g: 1.0,
                e_x: 0.0,
                e_y: 2.0 * a * y + b,
                g_x: 0.0,
                g_y: 0.0,
                e_yy: 2.0 * a,
                g_xx: 0.0,
            },
            MetricFamily::GeneralizedCatenoid { c, beta } => {
                let p = 1.0 / (beta * beta - 1.0);
                let s = y / c;
                let th = s.tanh();
                let sech2 = 1.0 / s.cosh().powi(2);
                let e = (c * c * s.cosh().powi(2)).powf(p);
                let e_y = 2.0 * p * e * th / c;
                let e_yy = 2.0 * p / c * (e_y * th + e * sech2 / c);
                let q = p * p / (c * c);
                MetricJet { e, g: q * e, e_x: 0.0, e_y, g_x: 0.0, g_y: q * e_y, e_yy, g_xx: 0.0 }
            }
            MetricFamily::Enneper { alpha } => {
                let th = 1.0 + x * x + y * y;
                let e = th.powf(alpha);
                let d = 2.0 * alpha * th.powf(alpha - 1.0);
                let dd = 4.0 * alpha * (alpha - 1.0) * th.powf(alpha - 2.0);
                MetricJet {
                    e,
                    g: e,
                    e_x: d * x,
                    e_y: d * y,
                    g_x: d * x,
                    g_y: d * y,
                    e_yy: d + dd * y * y,
                    g_xx: d + dd * x * x,
                }
            }
            MetricFamily::Reciprocal(r) => {
                let (e, e_y, e_yy) = match r {
                    Reciprocal::Exponential { a, omega } => {
                        let e = a * (omega * y).exp();
                        (e, omega * e, omega * omega * e)
                    }
                    Reciprocal::HyperbolicCosine { a, omega } => {
                        let e = a * (omega * y).cosh();
                        (e, a * omega * (omega * y).sinh(), omega * omega * e)
                    }
                };
                MetricJet {
                    e,
                    g: 1.0 / e,
                    e_x: 0.0,
                    e_y,
                    g_x: 0.0,
                    g_y: -e_y / (e * e),
                    e_yy,
                    g_xx: 0.0,
                }
            }
            MetricFamily::Custom(ref m) => {
                let (e, g) = (m.e.as_ref(), m.g.as_ref());
                MetricJet {
                    e: e(x, y),
                    g: g(x, y),
                    e_x: fd::partial_x(e, x, y),
                    e_y: fd::partial_y(e, x, y),
                    g_x: fd::partial_x(g, x, y),
                    g_y: fd::partial_y(g, x, y),
                    e_yy: fd::partial_yy(e, x, y),
                    g_xx: fd::partial_xx(g, x, y),
                }
            }
        }
    }

    /// Closed-form `κ` for the built-in families.
    fn kappa_closed(&self, x: f64, y: f64) -> Option<f64> {
        match *self {
            MetricFamily::Hyperbolic => Some(-1.0),
            MetricFamily::HelicoidQuadratic { a, b, c } => {
                let e = a * y * y + b * y + c;
                Some((b * b - 4.0 * a * c) / (4.0 * e * e))
            }
            MetricFamily::GeneralizedCatenoid { c, beta } => {
                let p = 1.0 / (beta * beta - 1.0);
                let s = y / c;
                let e = (c * c * s.cosh().powi(2)).powf(p);
                Some(-1.0 / (s.cosh().powi(2) * p * e))
            }
            MetricFamily::Enneper { alpha } => {
                let th = 1.0 + x * x + y * y;
                Some(-2.0 * alpha * th.powf(-2.0 - alpha))
            }
            MetricFamily::Reciprocal(Reciprocal::Exponential { a, omega }) => {
                Some(-0.5 * omega * omega * a * (omega * y).exp())
            }
            MetricFamily::Reciprocal(Reciprocal::HyperbolicCosine { a, omega }) => {
                Some(-0.5 * omega * omega * a * (omega * y).cosh())
            }
            MetricFamily::Custom(_) => None,
        }
    }

    /// Curvature without the sign requirement: closed form for built-ins,
    /// Brioschi on a finite-difference jet for custom metrics.
    fn kappa_any_sign(&self, x: f64, y: f64) -> f64 {
        match self.kappa_closed(x, y) {
            Some(k) => k,
            None => brioschi(&self.jet_unchecked(x, y)),
        }
    }
}

/// Metric values and partials at `(x, y)`.
pub fn eval_metric(family: &MetricFamily, x: f64, y: f64) -> Result<MetricJet> {
    family.validate()?;
    family.check_point(x, y)?;
    let (e, g) = family.raw_eg(x, y);
    if !(e > 0.0) || !(g > 0.0) {
        return Err(Error::Positivity { x, y, e, g });
    }
    Ok(family.jet_unchecked(x, y))
}

pub fn christoffel(jet: &MetricJet) -> Result<Christoffel> {
    let MetricJet { e, g, e_x, e_y, g_x, g_y, .. } = *jet;
    if !(e > 0.0) || !(g > 0.0) {
        return Err(Error::Positivity { x: f64::NAN, y: f64::NAN, e, g });
    }
    Ok(Christoffel {
        c1_11: e_x / (2.0 * e),
        c1_12: e_y / (2.0 * e),
        c1_22: -g_x / (2.0 * e),
        c2_11: -e_y / (2.0 * g),
        c2_12: g_x / (2.0 * g),
        c2_22: g_y / (2.0 * g),
    })
}

/// Brioschi's formula specialised to `F = 0`.
pub fn brioschi(jet: &MetricJet) -> f64 {
    let MetricJet { e, g, e_x, e_y, g_x, g_y, e_yy, g_xx } = *jet;
    let eg = e * g;
    -(g_xx + e_yy) / (2.0 * eg)
        + (g_x * (e_x * g + e * g_x) + e_y * (e_y * g + e * g_y)) / (4.0 * eg * eg)
}

/// Brioschi evaluated from point values of `E` and `G` only, with every
/// derivative taken by finite differences. Independent of the closed forms.
pub fn brioschi_fd(family: &MetricFamily, x: f64, y: f64) -> Result<f64> {
    family.validate()?;
    family.check_point(x, y)?;
    let e = |s: f64, t: f64| family.raw_eg(s, t).0;
    let g = |s: f64, t: f64| family.raw_eg(s, t).1;
    let jet = MetricJet {
        e: e(x, y),
        g: g(x, y),
        e_x: fd::partial_x(&e, x, y),
        e_y: fd::partial_y(&e, x, y),
        g_x: fd::partial_x(&g, x, y),
        g_y: fd::partial_y(&g, x, y),
        e_yy: fd::partial_yy(&e, x, y),
        g_xx: fd::partial_xx(&g, x, y),
    };
    if !(jet.e > 0.0) || !(jet.g > 0.0) {
        return Err(Error::Positivity { x, y, e: jet.e, g: jet.g });
    }
    Ok(brioschi(&jet))
}

/// Relative tolerance for the closed-form against Brioschi cross-check.
const CROSS_CHECK_RTOL: f64 = 1e-9;

/// Gauss curvature at `(x, y)`; fails unless `κ < 0`.
pub fn gauss_curvature(family: &MetricFamily, x: f64, y: f64) -> Result<f64> {
    let jet = eval_metric(family, x, y)?;
    let b = brioschi(&jet);
    let kappa = match family.kappa_closed(x, y) {
        Some(k) => {
            if (k - b).abs() > CROSS_CHECK_RTOL * k.abs().max(f64::MIN_POSITIVE) {
                return Err(Error::CurvatureMismatch { x, y, closed: k, brioschi: b });
            }
            k
        }
        None => b,
    };
    if !(kappa < 0.0) {
        return Err(Error::CurvatureSign { x, y, kappa });
    }
    Ok(kappa)
}

/// `∇γ/γ` from the family's closed form of `γ`; `None` for custom metrics.
pub fn gamma_log_gradient_closed(family: &MetricFamily, x: f64, y: f64) -> Result<Option<(f64, f64)>> {
    family.validate()?;
    family.check_point(x, y)?;
    Ok(match *family {
        MetricFamily::Hyperbolic => Some((0.0, 0.0)),
        MetricFamily::HelicoidQuadratic { a, b, c } => {
            Some((0.0, -(2.0 * a * y + b) / (a * y * y + b * y + c)))
        }
        MetricFamily::GeneralizedCatenoid { c, beta } => {
            let p = 1.0 / (beta * beta - 1.0);
            Some((0.0, -(1.0 + p) * (y / c).tanh() / c))
        }
        MetricFamily::Enneper { alpha } => {
            let k = -(2.0 + alpha) / (1.0 + x * x + y * y);
            Some((k * x, k * y))
        }
        MetricFamily::Reciprocal(Reciprocal::Exponential { omega, .. }) => Some((0.0, 0.5 * omega)),
        MetricFamily::Reciprocal(Reciprocal::HyperbolicCosine { omega, .. }) => {
            Some((0.0, 0.5 * omega * (omega * y).tanh()))
        }
        MetricFamily::Custom(_) => None,
    })
}

/// `∇γ/γ` computed as `∇κ/(2κ)` by differencing the curvature.
pub fn gamma_log_gradient(family: &MetricFamily, x: f64, y: f64) -> Result<(f64, f64)> {
    let kappa = gauss_curvature(family, x, y)?;
    let k = |s: f64, t: f64| family.kappa_any_sign(s, t);
    let (kx, ky) = if family.is_builtin() {
        (fd::partial_x(&k, x, y), fd::partial_y(&k, x, y))
    } else {
        fd::nested_gradient(&k, x, y)
    };
    Ok((kx / (2.0 * kappa), ky / (2.0 * kappa)))
}

/// `Γ̃` from `Γ` and `∇γ/γ`.
pub fn normalized_christoffel(ch: &Christoffel, glg: (f64, f64)) -> Christoffel {
    let (gx, gy) = glg;
    Christoffel {
        c1_11: ch.c1_11 + gx,
        c1_12: ch.c1_12 + 0.5 * gy,
        c1_22: ch.c1_22,
        c2_11: ch.c2_11,
        c2_12: ch.c2_12 + 0.5 * gx,
        c2_22: ch.c2_22 + gy,
    }
}

/// Everything the source terms and the solver need at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub x: f64,
    pub y: f64,
    pub jet: MetricJet,
    pub christoffel: Christoffel,
    pub kappa: f64,
    pub gamma: f64,
    pub gamma_log_grad: (f64, f64),
    pub normalized: Christoffel,
}

impl GeometrySample {
    pub fn at(family: &MetricFamily, x: f64, y: f64) -> Result<Self> {
        let jet = eval_metric(family, x, y)?;
        let christoffel = christoffel(&jet)?;
        let kappa = gauss_curvature(family, x, y)?;
        let gamma_log_grad = match gamma_log_gradient_closed(family, x, y)? {
            Some(g) => g,
            None => gamma_log_gradient(family, x, y)?,
        };
        Ok(GeometrySample {
            x,
            y,
            jet,
            christoffel,
            kappa,
            gamma: (-kappa).sqrt(),
            gamma_log_grad,
            normalized: normalized_christoffel(&christoffel, gamma_log_grad),
        })
    }
}

/// Samples an `nx * ny` grid (x fastest). Any point with `κ >= 0` aborts.
pub fn sample_grid(family: &MetricFamily, rect: &Rect, nx: usize, ny: usize) -> Result<Vec<GeometrySample>> {
    let pts = rect.grid(nx, ny);
    exec::try_map_range(pts.len(), |i| GeometrySample::at(family, pts[i].0, pts[i].1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spectrum {
    RealDistinct { plus: f64, minus: f64 },
    /// Double real eigenvalue (`κ = 0`).
    Repeated(f64),
    ComplexPair { re: f64, im: f64 },
    /// `ρ = 0`: the flux Jacobian is undefined.
    Singular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicityReport {
    pub rho: f64,
    pub m: f64,
    pub spectrum: Spectrum,
    pub strictly_hyperbolic: bool,
}

impl HyperbolicityReport {
    pub fn lambda_plus(&self) -> Option<f64> {
        match self.spectrum {
            Spectrum::RealDistinct { plus, .. } => Some(plus),
            Spectrum::Repeated(l) => Some(l),
            _ => None,
        }
    }

    pub fn lambda_minus(&self) -> Option<f64> {
        match self.spectrum {
            Spectrum::RealDistinct { minus, .. } => Some(minus),
            Spectrum::Repeated(l) => Some(l),
            _ => None,
        }
    }
}

/// Eigen-structure of the normalised Codazzi system at `(ρ, m)`. Only the
/// sign of `curvature` matters.
pub fn hyperbolicity_check(rho: f64, m: f64, curvature: f64) -> HyperbolicityReport {
    let spectrum = if rho == 0.0 || !rho.is_finite() || !m.is_finite() {
        Spectrum::Singular
    } else if curvature < 0.0 {
        Spectrum::RealDistinct { plus: (m + 1.0) / rho, minus: (m - 1.0) / rho }
    } else if curvature > 0.0 {
        Spectrum::ComplexPair { re: m / rho, im: 1.0 / rho.abs() }
    } else {
        Spectrum::Repeated(m / rho)
    };
    let strictly_hyperbolic = matches!(
        spectrum,
        Spectrum::RealDistinct { plus, minus } if plus != minus
    );
    HyperbolicityReport { rho, m, spectrum, strictly_hyperbolic }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn builtins() -> Vec<(MetricFamily, Rect)> {
        vec![
            (MetricFamily::Hyperbolic, Rect::new(-2.0, 2.0, 0.5, 5.0).unwrap()),
            (
                MetricFamily::HelicoidQuadratic { a: 1.0, b: 0.5, c: 2.0 },
                Rect::new(-1.0, 1.0, -2.0, 2.0).unwrap(),
            ),
            (
                MetricFamily::GeneralizedCatenoid { c: 1.0, beta: 1.7 },
                Rect::new(0.0, 6.0, -1.0, 0.0).unwrap(),
            ),
            (MetricFamily::Enneper { alpha: 2.0 }, Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap()),
            (
                MetricFamily::Reciprocal(Reciprocal::Exponential { a: 1.0, omega: 1.0 }),
                Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(),
            ),
            (
                MetricFamily::Reciprocal(Reciprocal::HyperbolicCosine { a: 2.0, omega: 0.7 }),
                Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(),
            ),
        ]
    }

    #[test]
    fn hyperbolic_values_at_0_2() {
        let j = eval_metric(&MetricFamily::Hyperbolic, 0.0, 2.0).unwrap();
        assert_eq!((j.e, j.g, j.e_y, j.g_y, j.e_x, j.g_x), (0.25, 0.25, -0.25, -0.25, 0.0, 0.0));
        let c = christoffel(&j).unwrap();
        assert!(close(c.c2_11, 0.5, 1e-15));
        assert!(close(c.c1_12, -0.5, 1e-15));
        assert!(close(c.c2_22, -0.5, 1e-15));
        assert_eq!((c.c1_11, c.c1_22, c.c2_12), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hyperbolic_domain_and_curvature() {
        let f = MetricFamily::Hyperbolic;
        assert!(matches!(eval_metric(&f, 0.0, 0.0), Err(Error::Domain { .. })));
        assert!(matches!(eval_metric(&f, 0.0, -1.0), Err(Error::Domain { .. })));
        for y in [0.3, 1.0, 7.5] {
            assert!(close(gauss_curvature(&f, 1.3, y).unwrap(), -1.0, 1e-12));
        }
    }

    #[test]
    fn enneper_values() {
        let f = MetricFamily::Enneper { alpha: 2.0 };
        let j = eval_metric(&f, 0.0, 0.0).unwrap();
        assert_eq!((j.e, j.g, j.e_x, j.e_y, j.g_x, j.g_y), (1.0, 1.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(christoffel(&j).unwrap().to_array(), [0.0; 6]);
        assert!(close(gauss_curvature(&f, 0.0, 0.0).unwrap(), -4.0, 1e-14));

        let c = christoffel(&eval_metric(&f, 1.0, 0.0).unwrap()).unwrap();
        // alpha * x / Theta with Theta = 2
        assert!(close(c.c1_11, 1.0, 1e-14));
        assert!(close(c.c1_22, -1.0, 1e-14));
        assert!(close(c.c2_12, 1.0, 1e-14));
        assert_eq!((c.c1_12, c.c2_11, c.c2_22), (0.0, 0.0, 0.0));

        let s = GeometrySample::at(&f, 0.0, 0.0).unwrap();
        assert_eq!(s.normalized.to_array(), [0.0; 6]);
        assert!(close(s.gamma, 2.0, 1e-14));
    }

    #[test]
    fn helicoid_values() {
        let f = MetricFamily::HelicoidQuadratic { a: 1.0, b: 0.0, c: 1.0 };
        let j = eval_metric(&f, 0.0, 1.0).unwrap();
        assert_eq!((j.e, j.e_y, j.g, j.g_y), (2.0, 2.0, 1.0, 0.0));
        assert!(close(gauss_curvature(&f, 0.0, 1.0).unwrap(), -0.25, 1e-14));
        let (_, gy) = gamma_log_gradient(&f, 0.0, 1.0).unwrap();
        assert!(close(gy, -1.0, 1e-9));
    }

    #[test]
    fn reciprocal_values() {
        let f = MetricFamily::Reciprocal(Reciprocal::Exponential { a: 1.0, omega: 1.0 });
        assert!(close(gauss_curvature(&f, 0.0, 0.0).unwrap(), -0.5, 1e-14));
        for y in [-1.0, 0.0, 0.8] {
            let s = GeometrySample::at(&f, 0.2, y).unwrap();
            assert!(close(s.normalized.c2_22, 0.0, 1e-14));
        }
    }

    #[test]
    fn hyperbolic_normalized_equals_plain() {
        let s = GeometrySample::at(&MetricFamily::Hyperbolic, -0.4, 1.7).unwrap();
        assert_eq!(s.normalized, s.christoffel);
    }

    #[test]
    fn invalid_parameters_rejected() {
        let cases = [
            MetricFamily::HelicoidQuadratic { a: 1.0, b: 2.0, c: 1.0 },
            MetricFamily::HelicoidQuadratic { a: -1.0, b: 0.0, c: -1.0 },
            MetricFamily::GeneralizedCatenoid { c: 0.0, beta: 2.0 },
            MetricFamily::GeneralizedCatenoid { c: 1.0, beta: 1.2 },
            MetricFamily::Enneper { alpha: 0.0 },
            MetricFamily::Reciprocal(Reciprocal::Exponential { a: 1.0, omega: 0.0 }),
        ];
        for f in cases {
            assert!(matches!(eval_metric(&f, 0.0, 0.5), Err(Error::InvalidParameter(_))), "{f:?}");
        }
    }

    #[test]
    fn closed_form_matches_fd_brioschi() {
        for (f, r) in builtins() {
            for (x, y) in r.grid(20, 20) {
                let k = gauss_curvature(&f, x, y).unwrap();
                let b = brioschi_fd(&f, x, y).unwrap();
                assert!((k - b).abs() <= 1e-6 * k.abs(), "{} at ({x},{y}): {k} vs {b}", f.name());
            }
        }
    }

    #[test]
    fn log_gradient_lemma() {
        for (f, r) in builtins() {
            for (x, y) in r.grid(20, 20) {
                let a = gamma_log_gradient(&f, x, y).unwrap();
                let b = gamma_log_gradient_closed(&f, x, y).unwrap().unwrap();
                assert!(close(a.0, b.0, 1e-8) && close(a.1, b.1, 1e-8), "{} at ({x},{y})", f.name());
            }
        }
    }

    #[test]
    fn trace_identity() {
        for (f, r) in builtins() {
            for (x, y) in r.grid(5, 5) {
                let j = eval_metric(&f, x, y).unwrap();
                let c = christoffel(&j).unwrap();
                let rhs = 0.5 * (j.e_y / j.e + j.g_y / j.g);
                assert!(close(c.c1_12 + c.c2_22, rhs, 1e-10));
            }
        }
    }

    #[test]
    fn enneper_scaled_curvature() {
        for alpha in [1.0, 2.0, 5.0] {
            let f = MetricFamily::Enneper { alpha };
            for (x, y) in Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap().grid(7, 7) {
                let th: f64 = 1.0 + x * x + y * y;
                let k = gauss_curvature(&f, x, y).unwrap();
                assert!(close(k * th.powf(2.0 + alpha), -2.0 * alpha, 1e-8));
            }
        }
    }

    #[test]
    fn reciprocal_log_gradient_ratio() {
        let fams = [
            MetricFamily::Reciprocal(Reciprocal::Exponential { a: 1.3, omega: 0.9 }),
            MetricFamily::Reciprocal(Reciprocal::HyperbolicCosine { a: 1.3, omega: 0.9 }),
        ];
        for f in fams {
            for y in [-1.0, -0.3, 0.4, 1.1] {
                let j = eval_metric(&f, 0.0, y).unwrap();
                let (_, gy) = gamma_log_gradient_closed(&f, 0.0, y).unwrap().unwrap();
                assert!(close(gy, 0.5 * j.e_y / j.e, 1e-12));
            }
        }
    }

    #[test]
    fn custom_metric_matches_builtin() {
        let custom = MetricFamily::Custom(CustomMetric {
            e: Arc::new(|_x, y| 1.0 + y * y),
            g: Arc::new(|_x, _y| 1.0),
            domain: Rect::new(-1.0, 1.0, -1.0, 2.0).unwrap(),
        });
        let k = gauss_curvature(&custom, 0.0, 1.0).unwrap();
        assert!(close(k, -0.25, 1e-7), "{k}");
        let (_, gy) = gamma_log_gradient(&custom, 0.0, 1.0).unwrap();
        assert!(close(gy, -1.0, 1e-6), "{gy}");
        assert!(matches!(eval_metric(&custom, 0.0, 3.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn nonnegative_curvature_rejected() {
        let sphere_like = MetricFamily::Custom(CustomMetric {
            e: Arc::new(|_x, y: f64| y.cos().powi(2)),
            g: Arc::new(|_x, _y| 1.0),
            domain: Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(),
        });
        assert!(matches!(gauss_curvature(&sphere_like, 0.0, 0.3), Err(Error::CurvatureSign { .. })));
        let r = Rect::new(-1.0, 1.0, -0.5, 0.5).unwrap();
        assert!(sample_grid(&sphere_like, &r, 3, 3).is_err());
    }

    #[test]
    fn hyperbolicity_cases() {
        let r = hyperbolicity_check(1.0, 0.0, -1.0);
        assert_eq!(r.spectrum, Spectrum::RealDistinct { plus: 1.0, minus: -1.0 });
        assert!(r.strictly_hyperbolic);
        assert!(!hyperbolicity_check(0.0, 0.3, -1.0).strictly_hyperbolic);
        let c = hyperbolicity_check(2.0, 1.0, 1.0);
        assert_eq!(c.spectrum, Spectrum::ComplexPair { re: 0.5, im: 0.5 });
        assert!(!c.strictly_hyperbolic);
        assert_eq!(hyperbolicity_check(2.0, 1.0, 0.0).spectrum, Spectrum::Repeated(0.5));
    }
}
