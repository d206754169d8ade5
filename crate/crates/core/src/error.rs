use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("t = {t} is below the validity floor {min}")]
    Domain { t: f64, min: f64 },

    #[error("{what} = {value} is outside the supported range [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("precision target missed: estimated error {estimate:e} exceeds {target:e}")]
    Precision { estimate: f64, target: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: err {err:e} > tol {tol:e} at depth {depth}")]
    NonConvergence {
        a: f64,
        b: f64,
        err: f64,
        tol: f64,
        depth: u32,
    },

    #[error("root bracketing failed for target {target} (ladder grid not monotone?)")]
    Bracket { target: f64 },

    #[error("invalid window: {0}")]
    Window(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("ladder cache: {0}")]
    Cache(String),
}
