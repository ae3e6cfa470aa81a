//! Central finite differences for metrics given only as point evaluators.

/// Step for first derivatives at coordinate `t`.
pub fn first_step(t: f64) -> f64 {
    (1e-5 * t.abs()).max(1e-5)
}

/// Step used for each level of a nested (second or higher) derivative.
pub fn nested_step(t: f64) -> f64 {
    (1e-3 * t.abs()).max(1e-3)
}

/// Five-point central difference of `f` at `t` with step `h`.
pub fn d5<F: Fn(f64) -> f64>(f: F, t: f64, h: f64) -> f64 {
    (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h)
}

pub fn partial_x<F: Fn(f64, f64) -> f64 + ?Sized>(f: &F, x: f64, y: f64) -> f64 {
    d5(|s| f(s, y), x, first_step(x))
}

pub fn partial_y<F: Fn(f64, f64) -> f64 + ?Sized>(f: &F, x: f64, y: f64) -> f64 {
    d5(|s| f(x, s), y, first_step(y))
}

/// Second derivative in x by nesting the five-point stencil.
pub fn partial_xx<F: Fn(f64, f64) -> f64 + ?Sized>(f: &F, x: f64, y: f64) -> f64 {
    let h = nested_step(x);
    d5(|s| d5(|r| f(r, y), s, h), x, h)
}

pub fn partial_yy<F: Fn(f64, f64) -> f64 + ?Sized>(f: &F, x: f64, y: f64) -> f64 {
    let h = nested_step(y);
    d5(|s| d5(|r| f(x, r), s, h), y, h)
}

/// Gradient with the nested step, for functions that are themselves built
/// from finite differences.
pub fn nested_gradient<F: Fn(f64, f64) -> f64 + ?Sized>(f: &F, x: f64, y: f64) -> (f64, f64) {
    (
        d5(|s| f(s, y), x, nested_step(x)),
        d5(|s| f(x, s), y, nested_step(y)),
    )
}
