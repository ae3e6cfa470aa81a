//! Dense cubic polynomials: bivariate in `(u, v)` and univariate in `t`.

use std::f64::consts::PI;

/// Monomial order of [`Cubic2`] coefficients.
pub const MONOMIALS: [(u32, u32); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

/// `Σ c_k u^i v^j` over [`MONOMIALS`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cubic2(pub [f64; 10]);

impl Cubic2 {
    pub fn zero() -> Self {
        Cubic2([0.0; 10])
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let c = &self.0;
        let (u2, v2) = (u * u, v * v);
        c[0] + c[1] * u
            + c[2] * v
            + c[3] * u2
            + c[4] * u * v
            + c[5] * v2
            + c[6] * u2 * u
            + c[7] * u2 * v
            + c[8] * u * v2
            + c[9] * v2 * v
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Cubic2(self.0.map(|c| c * s))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Restriction to the line `(u0, v0) + t (du, dv)`.
    pub fn restrict(&self, u0: f64, v0: f64, du: f64, dv: f64) -> Cubic1 {
        let mut out = [0.0; 4];
        for (k, &(i, j)) in MONOMIALS.iter().enumerate() {
            if self.0[k] == 0.0 {
                continue;
            }
            let mut term = [1.0, 0.0, 0.0, 0.0];
            for _ in 0..i {
                term = mul_linear(term, u0, du);
            }
            for _ in 0..j {
                term = mul_linear(term, v0, dv);
            }
            for d in 0..4 {
                out[d] += self.0[k] * term[d];
            }
        }
        Cubic1(out)
    }
}

fn mul_linear(p: [f64; 4], a: f64, b: f64) -> [f64; 4] {
    [a * p[0], a * p[1] + b * p[0], a * p[2] + b * p[1], a * p[3] + b * p[2]]
}

/// `c0 + c1 t + c2 t² + c3 t³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cubic1(pub [f64; 4]);

/// Extreme values of a [`Cubic1`] over a closed interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
}

impl Cubic1 {
    pub fn eval(&self, t: f64) -> f64 {
        let c = &self.0;
        ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
    }

    pub fn derivative_at(&self, t: f64) -> f64 {
        let c = &self.0;
        (3.0 * c[3] * t + 2.0 * c[2]) * t + c[1]
    }

    /// Real roots in ascending order, from the closed-form solutions of the
    /// effective degree. An identically zero polynomial has no isolated
    /// roots and returns an empty list.
    pub fn real_roots(&self) -> Vec<f64> {
        let [d, c, b, a] = self.0;
        let scale = self.0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return Vec::new();
        }
        let eps = 1e-14 * scale;
        let mut roots = if a.abs() > eps {
            cubic_roots(b / a, c / a, d / a)
        } else if b.abs() > eps {
            quadratic_roots(b, c, d)
        } else if c.abs() > eps {
            vec![-d / c]
        } else {
            Vec::new()
        };
        for r in roots.iter_mut() {
            *r = self.polish(*r);
        }
        roots.sort_by(|x, y| x.total_cmp(y));
        roots
    }

    fn polish(&self, mut t: f64) -> f64 {
        for _ in 0..3 {
            let d = self.derivative_at(t);
            if d == 0.0 {
                break;
            }
            let step = self.eval(t) / d;
            if !step.is_finite() {
                break;
            }
            let next = t - step;
            if self.eval(next).abs() >= self.eval(t).abs() {
                break;
            }
            t = next;
        }
        t
    }

    /// Critical points (roots of the derivative), ascending.
    pub fn critical_points(&self) -> Vec<f64> {
        let [_, c, b, a] = self.0;
        Cubic1([c, 2.0 * b, 3.0 * a, 0.0]).real_roots()
    }

    /// Exact extremes over `[lo, hi]`: candidates are the endpoints and the
    /// critical points inside.
    pub fn extremes_on(&self, lo: f64, hi: f64) -> Extremes {
        let mut cands = vec![lo, hi];
        cands.extend(self.critical_points().into_iter().filter(|&t| t > lo && t < hi));
        let mut ex = Extremes {
            min: f64::INFINITY,
            argmin: lo,
            max: f64::NEG_INFINITY,
            argmax: lo,
        };
        for t in cands {
            let f = self.eval(t);
            if f < ex.min {
                ex.min = f;
                ex.argmin = t;
            }
            if f > ex.max {
                ex.max = f;
                ex.argmax = t;
            }
        }
        ex
    }
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    // Avoids cancellation in the smaller root.
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Real roots of the monic cubic `t³ + a t² + b t + c`.
fn cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let q = (a * a - 3.0 * b) / 9.0;
    let r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
    let shift = a / 3.0;
    let q3 = q * q * q;
    if r * r < q3 {
        let theta = (r / q3.sqrt()).clamp(-1.0, 1.0).acos();
        let m = -2.0 * q.sqrt();
        vec![
            m * (theta / 3.0).cos() - shift,
            m * ((theta + 2.0 * PI) / 3.0).cos() - shift,
            m * ((theta - 2.0 * PI) / 3.0).cos() - shift,
        ]
    } else {
        let big_a = -r.signum() * (r.abs() + (r * r - q3).sqrt()).cbrt();
        let big_b = if big_a == 0.0 { 0.0 } else { q / big_a };
        let t1 = big_a + big_b - shift;
        // Double root when the discriminant vanishes.
        if (big_a - big_b).abs() <= 1e-12 * (big_a.abs() + big_b.abs()) && big_a != 0.0 {
            vec![t1, -0.5 * (big_a + big_b) - shift]
        } else {
            vec![t1]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restriction_is_exact() {
        let p = Cubic2([1.0, -2.0, 0.5, 3.0, -1.0, 2.0, 1.0, -4.0, 0.25, 2.0]);
        let line = p.restrict(0.3, -0.7, 1.5, 0.2);
        for t in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            let want = p.eval(0.3 + 1.5 * t, -0.7 + 0.2 * t);
            assert!((line.eval(t) - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn three_real_roots() {
        // (t - 1)(t + 2)(t - 3)
        let p = Cubic1([6.0, -5.0, -2.0, 1.0]);
        let r = p.real_roots();
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn one_real_root() {
        // (t - 2)(t² + 1)
        let r = Cubic1([-2.0, 1.0, -2.0, 1.0]).real_roots();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn double_root() {
        // (t - 1)²(t + 2)
        let r = Cubic1([2.0, -3.0, 0.0, 1.0]).real_roots();
        assert!(r.iter().any(|x| (x - 1.0).abs() < 1e-7));
        assert!(r.iter().any(|x| (x + 2.0).abs() < 1e-12));
    }

    #[test]
    fn lower_degrees() {
        assert_eq!(Cubic1([-4.0, 0.0, 1.0, 0.0]).real_roots(), vec![-2.0, 2.0]);
        assert_eq!(Cubic1([3.0, 2.0, 0.0, 0.0]).real_roots(), vec![-1.5]);
        assert!(Cubic1([1.0, 0.0, 1.0, 0.0]).real_roots().is_empty());
        assert!(Cubic1([0.0; 4]).real_roots().is_empty());
    }

    #[test]
    fn extremes_use_critical_points() {
        // t³ - 3t has a local max 2 at t=-1 and local min -2 at t=1.
        let p = Cubic1([0.0, -3.0, 0.0, 1.0]);
        let e = p.extremes_on(-1.5, 1.5);
        assert!((e.max - 2.0).abs() < 1e-14 && (e.argmax + 1.0).abs() < 1e-14);
        assert!((e.min + 2.0).abs() < 1e-14 && (e.argmin - 1.0).abs() < 1e-14);
        let inner = p.extremes_on(-0.5, 0.5);
        assert!((inner.max - 1.375).abs() < 1e-14);
    }
}
