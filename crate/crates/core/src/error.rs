use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("root finder did not converge for {what}: bracket [{lo}, {hi}] after {iterations} iterations")]
    RootNotConverged {
        what: &'static str,
        lo: f64,
        hi: f64,
        iterations: usize,
    },

    #[error("quadrature on [{a}, {b}] missed tolerance: estimate {estimate}, error {error} after {subdivisions} subdivisions")]
    Quadrature {
        a: f64,
        b: f64,
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("Laplace inversion unstable at x = {x}: order {order} gives {value}, lower order gives {lower}")]
    InversionUnstable {
        x: f64,
        order: usize,
        value: f64,
        lower: f64,
    },

    #[error("series for {what} did not converge within {terms} terms")]
    SeriesNotConverged { what: &'static str, terms: usize },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("degenerate roots: (1-c)^2 + 2*alpha = 0 for c = {c}, alpha = {alpha}")]
    DegenerateRoots { c: f64, alpha: f64 },

    #[error("pole: {0}")]
    Pole(String),

    #[error("numeric inversion of W lost monotonicity: clamp of relative size {0:e}")]
    MonotonicityLost(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("simulation: {0}")]
    Simulation(String),

    #[error("i/o: {0}")]
    Io(String),
}
