use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({x}, {y}) is outside the domain of the {family} metric: {reason}")]
    Domain {
        family: &'static str,
        x: f64,
        y: f64,
        reason: &'static str,
    },

    #[error("metric is not positive definite at ({x}, {y}): E = {e}, G = {g}")]
    Positivity { x: f64, y: f64, e: f64, g: f64 },

    #[error("Gauss curvature must be negative, got kappa = {kappa} at ({x}, {y})")]
    CurvatureSign { x: f64, y: f64, kappa: f64 },

    #[error("closed-form curvature {closed} disagrees with Brioschi evaluation {brioschi} at ({x}, {y})")]
    CurvatureMismatch {
        x: f64,
        y: f64,
        closed: f64,
        brioschi: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no family-specialised source polynomial for the {0} metric")]
    UnsupportedFamily(&'static str),

    #[error("zero locus of the identically zero polynomial is degenerate")]
    DegenerateLocus,

    #[error("degenerate square: need w_min < w_max and z_min < z_max, got w in [{w_min}, {w_max}], z in [{z_min}, {z_max}]")]
    DegenerateSquare {
        w_min: f64,
        w_max: f64,
        z_min: f64,
        z_max: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("v dropped below the floor: v = {v} at x = {x}, y = {y}")]
    VFloorBreach { x: f64, y: f64, v: f64 },

    #[error("step size underflow at y = {y}: dy = {dy}")]
    StepSizeUnderflow { y: f64, dy: f64 },

    #[error("frame drift at ({x}, {y}): |n| = {norm}")]
    FrameDrift { x: f64, y: f64, norm: f64 },

    #[error("base frame is incompatible with the metric (defect {defect})")]
    IncompatibleBase { defect: f64 },
}

impl Error {
    /// True for faults raised by the numerical integrators rather than by bad input.
    pub fn is_numerical_fault(&self) -> bool {
        matches!(
            self,
            Error::VFloorBreach { .. } | Error::StepSizeUnderflow { .. } | Error::FrameDrift { .. }
        )
    }
}
