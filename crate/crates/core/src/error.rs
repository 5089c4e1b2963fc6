use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("truncation order {requested} exceeds the configured maximum {max}")]
    Order { requested: usize, max: usize },

    #[error("direction violates zeta.zeta = k0^2: residual {residual:.6e}")]
    Constraint { residual: f64 },

    #[error("unit direction has hermitian norm {norm:.15} (expected 1)")]
    Normalization { norm: f64 },

    #[error("caustic: |beta| = {beta:.3e} below beta_min = {beta_min:.3e}")]
    Caustic { beta: f64, beta_min: f64 },

    #[error("excised caustic measure fraction {fraction:.3e} exceeds the allowed {allowed:.3e}")]
    CausticCoverage { fraction: f64, allowed: f64 },

    #[error("singular configuration: {0}")]
    Singularity(String),

    #[error("quadratic roots too close: |r+ - r-| = {separation:.3e}")]
    DegenerateRoots { separation: f64 },

    #[error("no square-root branch satisfies the sector condition at phi = {phi}")]
    Branch { phi: f64 },

    #[error("order k = {0} is distributional and not supported")]
    UnsupportedOrder(usize),

    #[error("{what} did not converge (error estimate {err_est:.3e})")]
    NonConvergence { what: String, err_est: f64 },

    #[error("adaptive quadrature exhausted {limit} subdivisions (error estimate {err_est:.3e})")]
    MaxSubdivisions { limit: usize, err_est: f64 },

    #[error("principal-value singularities separated by {gap:.3e}, need more than {needed:.3e}")]
    Separation { gap: f64, needed: f64 },

    #[error("contour rotation sector violated: {0}")]
    Sector(String),

    #[error("degenerate data for slope fit: {0}")]
    DegenerateData(String),

    #[error("invalid angle {name} = {value}")]
    Angle { name: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("sweep point s = {s}, n = {n}: {source}")]
    SweepPoint {
        s: f64,
        n: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
