//! Square invariant regions in Riemann-invariant coordinates.
//!
//! A square `{w_min ≤ w ≤ w_max, z_min ≤ z ≤ z_max}` is invariant for the
//! viscous system when `S⁽¹⁾ ≤ 0` on `e1 = {w = w_max}`, `S⁽²⁾ ≤ 0` on
//! `e2 = {z = z_max}`, `S⁽¹⁾ ≥ 0` on `e3 = {w = w_min}` and `S⁽²⁾ ≥ 0` on
//! `e4 = {z = z_min}`, for every `(x, y)` in the domain. The half-plane
//! gradients are constant coordinate vectors, so the remaining structural
//! conditions of the invariant-region theorem hold for every such square and
//! are not checked here.

use crate::error::{Error, Result};
use crate::exec;
use crate::metric::{GeometrySample, MetricFamily, Rect};
use crate::poly::Cubic2;
use crate::solver::StateField;
use crate::source::{self, Sign};

/// Margin below which a sampled sign condition counts as violated.
pub const SIGN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareRegion {
    pub w_min: f64,
    pub w_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    E1,
    E2,
    E3,
    E4,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::E1, Edge::E2, Edge::E3, Edge::E4];

    pub fn label(self) -> &'static str {
        match self {
            Edge::E1 => "e1",
            Edge::E2 => "e2",
            Edge::E3 => "e3",
            Edge::E4 => "e4",
        }
    }

    /// Which source the edge constrains (1 or 2) and the sign it needs.
    pub fn requirement(self) -> (usize, Sign) {
        match self {
            Edge::E1 => (1, Sign::NonPositive),
            Edge::E2 => (2, Sign::NonPositive),
            Edge::E3 => (1, Sign::NonNegative),
            Edge::E4 => (2, Sign::NonNegative),
        }
    }
}

impl SquareRegion {
    pub fn new(w_min: f64, w_max: f64, z_min: f64, z_max: f64) -> Result<Self> {
        let ok = [w_min, w_max, z_min, z_max].iter().all(|t| t.is_finite());
        if !ok || !(w_min < w_max) || !(z_min < z_max) {
            return Err(Error::DegenerateSquare { w_min, w_max, z_min, z_max });
        }
        Ok(SquareRegion { w_min, w_max, z_min, z_max })
    }

    /// Square with the given top vertex `(u, v)` and side lengths measured in
    /// `w` and `z`.
    pub fn from_uv_box(u_top: f64, v_top: f64, dw: f64, dz: f64) -> Result<Self> {
        let (w_max, z_min) = (u_top + v_top, u_top - v_top);
        SquareRegion::new(w_max - dw, w_max, z_min, z_min + dz)
    }

    /// Vertices `[top, right, bottom, left]` in `(u, v)`.
    pub fn vertices(&self) -> [(f64, f64); 4] {
        let uv = |w: f64, z: f64| (0.5 * (w + z), 0.5 * (w - z));
        [
            uv(self.w_max, self.z_min),
            uv(self.w_max, self.z_max),
            uv(self.w_min, self.z_max),
            uv(self.w_min, self.z_min),
        ]
    }

    pub fn center_uv(&self) -> (f64, f64) {
        let (w, z) = (
            0.5 * (self.w_min + self.w_max),
            0.5 * (self.z_min + self.z_max),
        );
        (0.5 * (w + z), 0.5 * (w - z))
    }

    /// Area in the `(u, v)` plane.
    pub fn area(&self) -> f64 {
        0.5 * (self.w_max - self.w_min) * (self.z_max - self.z_min)
    }

    /// Edge as `(start, direction)` in `(u, v)`, parametrised by `t ∈ [0, 1]`.
    pub fn edge_line(&self, edge: Edge) -> ((f64, f64), (f64, f64)) {
        let v = self.vertices();
        let (a, b) = match edge {
            Edge::E1 => (v[0], v[1]),
            Edge::E2 => (v[1], v[2]),
            Edge::E3 => (v[2], v[3]),
            Edge::E4 => (v[3], v[0]),
        };
        (a, (b.0 - a.0, b.1 - a.1))
    }

    pub fn contains_wz(&self, w: f64, z: f64) -> bool {
        w >= self.w_min && w <= self.w_max && z >= self.z_min && z <= self.z_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Violated,
}

/// Worst case of one edge condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeReport {
    pub edge: Edge,
    pub required: Sign,
    /// Largest `S` for a `≤ 0` edge, smallest `S` for a `≥ 0` edge.
    pub worst: f64,
    /// `worst` oriented so that negative means violated.
    pub margin: f64,
    /// `(x, y, u, v)` where `worst` was attained.
    pub location: (f64, f64, f64, f64),
}

impl EdgeReport {
    fn empty(edge: Edge) -> Self {
        EdgeReport {
            edge,
            required: edge.requirement().1,
            worst: f64::NAN,
            margin: f64::INFINITY,
            location: (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
        }
    }

    fn offer(&mut self, s: f64, at: (f64, f64, f64, f64)) {
        let margin = match self.required {
            Sign::NonPositive => -s,
            Sign::NonNegative => s,
        };
        if margin < self.margin || self.worst.is_nan() {
            self.margin = margin;
            self.worst = s;
            self.location = at;
        }
    }

    pub fn holds(&self) -> bool {
        self.margin >= -SIGN_TOLERANCE
    }
}

/// Result of the factored, root-based check.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactStatus {
    Done { verdict: Verdict, edges: [EdgeReport; 4] },
    /// The prefactor changes sign inside the domain; only sampling applies.
    PrefactorChangesSign,
    /// No factored form exists (custom metrics).
    Unavailable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionCertificate {
    pub square: SquareRegion,
    /// Violated if either the sampled or the exact check found a violation.
    pub verdict: Verdict,
    pub sampled_verdict: Verdict,
    pub edges: [EdgeReport; 4],
    pub exact: ExactStatus,
    pub edge_samples: usize,
    pub xy_samples: usize,
    pub xy_domain: Rect,
}

impl RegionCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }

    /// The smallest margin over all edges and both checks.
    pub fn worst_margin(&self) -> f64 {
        let mut m = self.edges.iter().fold(f64::INFINITY, |m, e| m.min(e.margin));
        if let ExactStatus::Done { edges, .. } = &self.exact {
            m = edges.iter().fold(m, |m, e| m.min(e.margin));
        }
        m
    }

    /// The edge report with the smallest margin.
    pub fn worst_edge(&self) -> EdgeReport {
        let mut all: Vec<EdgeReport> = self.edges.to_vec();
        if let ExactStatus::Done { edges, .. } = &self.exact {
            all.extend_from_slice(edges);
        }
        all.into_iter()
            .reduce(|a, b| if b.margin < a.margin { b } else { a })
            .expect("four edges")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub edge_samples: usize,
    /// Points per side of the `(x, y)` grid.
    pub xy_samples: usize,
    pub exact: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { edge_samples: 1024, xy_samples: 8, exact: true }
    }
}

/// Geometry on the `(x, y)` sample grid, shared across many squares.
pub struct DomainSamples {
    domain: Rect,
    xy_samples: usize,
    general: Vec<(f64, f64, Cubic2, Cubic2)>,
    factored: Option<Vec<(f64, f64, f64, Cubic2, Cubic2)>>,
    prefactor_sign: Option<Option<Sign>>,
}

impl DomainSamples {
    pub fn new(family: &MetricFamily, domain: &Rect, xy_samples: usize) -> Result<Self> {
        if xy_samples == 0 {
            return Err(Error::InvalidInput("xy_samples must be positive".into()));
        }
        let pts = domain.grid(xy_samples, xy_samples);
        let general = exec::try_map_range(pts.len(), |i| {
            let (x, y) = pts[i];
            let s = GeometrySample::at(family, x, y)?;
            let (g1, g2) = source::general_cubics(&s);
            Ok::<_, Error>((x, y, g1, g2))
        })?;
        let (factored, prefactor_sign) = if family.is_builtin() {
            let sign = source::prefactor_sign_on(family, domain)?;
            let f = exec::try_map_range(pts.len(), |i| {
                let (x, y) = pts[i];
                let (p1, p2) = source::source_polynomial(family, x, y)?;
                Ok::<_, Error>((x, y, p1.prefactor, p1.poly, p2.poly))
            })?;
            (Some(f), Some(sign))
        } else {
            (None, None)
        };
        Ok(DomainSamples { domain: *domain, xy_samples, general, factored, prefactor_sign })
    }
}

/// Checks the edge sign conditions of `square` over `xy_domain`.
pub fn verify_square(
    family: &MetricFamily,
    square: &SquareRegion,
    xy_domain: &Rect,
    opts: &VerifyOptions,
) -> Result<RegionCertificate> {
    let samples = DomainSamples::new(family, xy_domain, opts.xy_samples)?;
    verify_with(&samples, square, opts)
}

/// [`verify_square`] against precomputed domain samples.
pub fn verify_with(samples: &DomainSamples, square: &SquareRegion, opts: &VerifyOptions) -> Result<RegionCertificate> {
    if opts.edge_samples < 64 {
        return Err(Error::InvalidInput(format!("edge_samples must be >= 64, got {}", opts.edge_samples)));
    }
    SquareRegion::new(square.w_min, square.w_max, square.z_min, square.z_max)?;
    let n = opts.edge_samples;
    let lines = Edge::ALL.map(|e| square.edge_line(e));

    let mut edges = Edge::ALL.map(EdgeReport::empty);
    for &(x, y, ref g1, ref g2) in &samples.general {
        for (k, edge) in Edge::ALL.iter().enumerate() {
            let ((u0, v0), (du, dv)) = lines[k];
            let poly = if edge.requirement().0 == 1 { g1 } else { g2 };
            for i in 0..n {
                let t = i as f64 / (n - 1) as f64;
                let (u, v) = (u0 + t * du, v0 + t * dv);
                edges[k].offer(poly.eval(u, v), (x, y, u, v));
            }
        }
    }
    let sampled_verdict = if edges.iter().all(EdgeReport::holds) {
        Verdict::Certified
    } else {
        Verdict::Violated
    };

    let exact = if !opts.exact {
        ExactStatus::Unavailable
    } else {
        match (&samples.factored, samples.prefactor_sign) {
            (Some(f), Some(Some(sign))) => exact_check(f, square, sign),
            (Some(_), Some(None)) => ExactStatus::PrefactorChangesSign,
            _ => ExactStatus::Unavailable,
        }
    };
    let verdict = match (&exact, sampled_verdict) {
        (_, Verdict::Violated) => Verdict::Violated,
        (ExactStatus::Done { verdict, .. }, _) => *verdict,
        _ => Verdict::Certified,
    };
    Ok(RegionCertificate {
        square: *square,
        verdict,
        sampled_verdict,
        edges,
        exact,
        edge_samples: n,
        xy_samples: samples.xy_samples,
        xy_domain: samples.domain,
    })
}

/// Per `(x, y)` sample, the edge restriction of `℘` is a cubic in the edge
/// parameter whose extremes on `[0, 1]` are found in closed form.
fn exact_check(factored: &[(f64, f64, f64, Cubic2, Cubic2)], square: &SquareRegion, sign: Sign) -> ExactStatus {
    let mut edges = Edge::ALL.map(EdgeReport::empty);
    for &(x, y, pre, ref p1, ref p2) in factored {
        for (k, edge) in Edge::ALL.iter().enumerate() {
            let ((u0, v0), (du, dv)) = square.edge_line(*edge);
            let poly = if edge.requirement().0 == 1 { p1 } else { p2 };
            let ex = poly.restrict(u0, v0, du, dv).extremes_on(0.0, 1.0);
            // With pre of fixed sign, the worst S sits at an extreme of ℘.
            let need_max = (edge.requirement().1 == Sign::NonPositive) == (sign == Sign::NonNegative);
            let t = if need_max { ex.argmax } else { ex.argmin };
            let val = if need_max { ex.max } else { ex.min };
            edges[k].offer(pre * val, (x, y, u0 + t * du, v0 + t * dv));
        }
    }
    let verdict = if edges.iter().all(EdgeReport::holds) {
        Verdict::Certified
    } else {
        Verdict::Violated
    };
    ExactStatus::Done { verdict, edges }
}

/// Parameter space of a square search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchSpace {
    /// Independent grids over each bound; only `w_min < w_max`,
    /// `z_min < z_max` combinations are tried.
    Box4 { w: (f64, f64), z: (f64, f64) },
    /// Squares with vertices `(a+b, b), (a+2b, 0), (a+b, −b), (a, 0)`,
    /// i.e. `w, z ∈ [a, a+2b]`.
    Diamond { a: (f64, f64), b: (f64, f64) },
}

impl SearchSpace {
    pub fn candidates(&self, steps: usize) -> Vec<SquareRegion> {
        match *self {
            SearchSpace::Box4 { w, z } => {
                let ws = Rect::axis(w.0, w.1, steps);
                let zs = Rect::axis(z.0, z.1, steps);
                let mut out = Vec::new();
                for (i, &w0) in ws.iter().enumerate() {
                    for &w1 in &ws[i + 1..] {
                        for (j, &z0) in zs.iter().enumerate() {
                            for &z1 in &zs[j + 1..] {
                                out.push(SquareRegion { w_min: w0, w_max: w1, z_min: z0, z_max: z1 });
                            }
                        }
                    }
                }
                out
            }
            SearchSpace::Diamond { a, b } => {
                let r#as = Rect::axis(a.0, a.1, steps);
                let bs = Rect::axis(b.0, b.1, steps);
                let mut out = Vec::new();
                for &a in &r#as {
                    for &b in &bs {
                        if b > 0.0 {
                            let hi = a + 2.0 * b;
                            out.push(SquareRegion { w_min: a, w_max: hi, z_min: a, z_max: hi });
                        }
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found {
        best: RegionCertificate,
        certified: usize,
        tested: usize,
    },
    NotFound {
        certificates: Vec<RegionCertificate>,
    },
}

/// Grid search for the certified square of largest `(u, v)` area. Ties go to
/// the lexicographically smallest `(w_min, z_min)`.
pub fn search_square(
    family: &MetricFamily,
    xy_domain: &Rect,
    space: &SearchSpace,
    grid_steps: usize,
    opts: &VerifyOptions,
) -> Result<SearchOutcome> {
    if grid_steps < 4 {
        return Err(Error::InvalidInput(format!("grid_steps must be >= 4, got {grid_steps}")));
    }
    let cands = space.candidates(grid_steps);
    if cands.is_empty() {
        return Err(Error::InvalidInput("search space contains no non-degenerate square".into()));
    }
    let samples = DomainSamples::new(family, xy_domain, opts.xy_samples)?;
    let certs = exec::try_map_range(cands.len(), |i| verify_with(&samples, &cands[i], opts))?;

    let better = |a: &RegionCertificate, b: &RegionCertificate| {
        let (sa, sb) = (a.square, b.square);
        sa.area() > sb.area()
            || (sa.area() == sb.area() && (sa.w_min, sa.z_min) < (sb.w_min, sb.z_min))
    };
    let mut best: Option<&RegionCertificate> = None;
    let mut certified = 0;
    for c in certs.iter().filter(|c| c.is_certified()) {
        certified += 1;
        if best.is_none_or(|b| better(c, b)) {
            best = Some(c);
        }
    }
    Ok(match best {
        Some(b) => SearchOutcome::Found { best: b.clone(), certified, tested: certs.len() },
        None => SearchOutcome::NotFound { certificates: certs },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Containment {
    pub inside: bool,
    pub max_overshoot: f64,
}

/// Largest excursion of the state outside the square; negative when strictly
/// inside.
pub fn containment(state: &StateField, square: &SquareRegion) -> Containment {
    containment_wz(&state.w, &state.z, square)
}

pub fn containment_wz(w: &[f64], z: &[f64], square: &SquareRegion) -> Containment {
    let mut worst = f64::NEG_INFINITY;
    for (&wi, &zi) in w.iter().zip(z) {
        let o = (wi - square.w_max)
            .max(square.w_min - wi)
            .max(zi - square.z_max)
            .max(square.z_min - zi);
        worst = worst.max(o);
    }
    Containment { inside: worst <= 0.0, max_overshoot: worst }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::Reciprocal;

    fn opts() -> VerifyOptions {
        VerifyOptions { edge_samples: 256, xy_samples: 4, exact: true }
    }

    #[test]
    fn vertices_and_edges() {
        let q = SquareRegion::new(0.0, 2.0, -2.0, 0.0).unwrap();
        assert_eq!(q.vertices(), [(0.0, 2.0), (1.0, 1.0), (0.0, 0.0), (-1.0, 1.0)]);
        assert_eq!(q.area(), 2.0);
        assert_eq!(q.center_uv(), (0.0, 1.0));
        let ((u0, v0), (du, dv)) = q.edge_line(Edge::E1);
        assert_eq!((u0, v0, u0 + du, v0 + dv), (0.0, 2.0, 1.0, 1.0));
    }

    #[test]
    fn degenerate_square_rejected() {
        assert!(matches!(SquareRegion::new(1.0, 1.0, 0.0, 1.0), Err(Error::DegenerateSquare { .. })));
        let bad = SquareRegion { w_min: 1.0, w_max: 1.0, z_min: 0.0, z_max: 1.0 };
        let d = Rect::new(0.0, 0.0, 1.0, 2.0).unwrap();
        assert!(verify_square(&MetricFamily::Hyperbolic, &bad, &d, &opts()).is_err());
    }

    #[test]
    fn hyperbolic_square_fails_on_e2_and_e3() {
        // S⁽²⁾ = w(1 + z²)/y > 0 on e2 and S⁽¹⁾ = z(1 + w²)/y < 0 on e3.
        let q = SquareRegion::new(0.0, 2.0, -2.0, 0.0).unwrap();
        let d = Rect::new(0.0, 0.0, 1.0, 10.0).unwrap();
        let c = verify_square(&MetricFamily::Hyperbolic, &q, &d, &opts()).unwrap();
        assert_eq!(c.verdict, Verdict::Violated);
        assert!(c.edges[0].holds() && c.edges[3].holds());
        assert!(!c.edges[1].holds() && !c.edges[2].holds());
        let ExactStatus::Done { verdict, edges } = c.exact else { panic!() };
        assert_eq!(verdict, Verdict::Violated);
        assert!((edges[1].worst - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_violated_on_e1() {
        let f = MetricFamily::Reciprocal(Reciprocal::Exponential { a: 1.0, omega: 1.0 });
        let q = SquareRegion::new(0.0, 2.0, -2.0, 0.0).unwrap();
        let d = Rect::new(0.0, 0.0, 0.0, 1.0).unwrap();
        let c = verify_square(&f, &q, &d, &opts()).unwrap();
        assert_eq!(c.verdict, Verdict::Violated);
        assert!(!c.edges[0].holds());
        // Worst point is the top vertex (0, 2).
        let (_, _, u, v) = c.edges[0].location;
        assert_eq!((u, v), (0.0, 2.0));
    }

    #[test]
    fn helicoid_bound() {
        // E ≤ 0.45 on y ∈ [0, 0.5]; squares with 2 E a² ≤ 1 certify.
        let f = MetricFamily::HelicoidQuadratic { a: 1.0, b: 0.2, c: 0.1 };
        let d = Rect::new(0.0, 0.0, 0.0, 0.5).unwrap();
        for a in [0.25, 0.5, 1.0] {
            let q = SquareRegion::new(0.0, 2.0 * a, -2.0 * a, 0.0).unwrap();
            assert!(verify_square(&f, &q, &d, &opts()).unwrap().is_certified(), "a = {a}");
        }
        let q = SquareRegion::new(0.0, 3.0, -3.0, 0.0).unwrap();
        assert!(!verify_square(&f, &q, &d, &opts()).unwrap().is_certified());
    }

    #[test]
    fn helicoid_hyperbola_square_on_strip_is_violated() {
        let f = MetricFamily::HelicoidQuadratic { a: 1.0, b: -2.0, c: 1.5 };
        let d = Rect::new(0.0, 0.0, -1.0, 0.5).unwrap();
        let (ap, app) = (2.0, 1.0);
        // top (0, a'), bottom (0, a''): w_max = a', z_min = -a', w_min = a'', z_max = -a''.
        let q = SquareRegion::new(app, ap, -ap, -app).unwrap();
        assert!(!verify_square(&f, &q, &d, &opts()).unwrap().is_certified());
    }

    #[test]
    fn prefactor_sign_change_disables_exact() {
        let f = MetricFamily::HelicoidQuadratic { a: 1.0, b: 0.0, c: 1.0 };
        let d = Rect::new(0.0, 0.0, -1.0, 1.0).unwrap();
        let q = SquareRegion::new(0.0, 0.5, -0.5, 0.0).unwrap();
        let c = verify_square(&f, &q, &d, &opts()).unwrap();
        assert_eq!(c.exact, ExactStatus::PrefactorChangesSign);
    }

    #[test]
    fn search_requires_steps() {
        let d = Rect::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let s = SearchSpace::Box4 { w: (0.0, 1.0), z: (0.0, 1.0) };
        assert!(search_square(&MetricFamily::Hyperbolic, &d, &s, 3, &opts()).is_err());
        let empty = SearchSpace::Box4 { w: (1.0, 1.0), z: (0.0, 1.0) };
        assert!(search_square(&MetricFamily::Hyperbolic, &d, &empty, 4, &opts()).is_err());
    }

    #[test]
    fn search_prefers_largest_area() {
        let f = MetricFamily::HelicoidQuadratic { a: 1.0, b: 0.2, c: 0.1 };
        let d = Rect::new(0.0, 0.0, 0.0, 0.5).unwrap();
        let s = SearchSpace::Box4 { w: (-2.0, 2.0), z: (-2.0, 2.0) };
        let out = search_square(&f, &d, &s, 9, &opts()).unwrap();
        let SearchOutcome::Found { best, .. } = out else { panic!("expected a square") };
        assert!(best.is_certified());
        for c in SearchSpace::candidates(&s, 9) {
            if c.area() > best.square.area() {
                assert!(!verify_square(&f, &c, &d, &opts()).unwrap().is_certified());
            }
        }
    }

    #[test]
    fn containment_cases() {
        let q = SquareRegion::new(0.0, 2.0, -2.0, 0.0).unwrap();
        let c = containment_wz(&[1.0], &[-1.0], &q);
        assert!(c.inside && c.max_overshoot == -1.0);
        let c = containment_wz(&[2.0, 1.0], &[-1.0, -1.0], &q);
        assert!(c.inside && c.max_overshoot == 0.0);
        let c = containment_wz(&[1.0, 2.1], &[-1.0, -1.0], &q);
        assert!(!c.inside && (c.max_overshoot - 0.1).abs() < 1e-15);
    }
}
