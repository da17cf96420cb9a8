use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("facet {facet}: normal {normal:?} is not primitive (gcd {gcd})")]
    NonPrimitiveNormal {
        facet: usize,
        normal: Vec<i64>,
        gcd: i64,
    },

    #[error("vertex {vertex:?} lies on {count} facets, expected {dim}")]
    VertexIncidence {
        vertex: Vec<f64>,
        count: usize,
        dim: usize,
    },

    #[error("vertex {vertex:?}: incident normals have determinant {det}, expected +-1")]
    NotUnimodular { vertex: Vec<f64>, det: i64 },

    #[error("degenerate facet {0}")]
    DegenerateFacet(usize),

    #[error("point {0:?} is not in the interior of the polytope")]
    PointOutside(Vec<f64>),

    #[error("grid spacing {h} is too coarse: {reason}")]
    GridTooCoarse { h: f64, reason: String },

    #[error("facet distance l_{facet} = {value} is not positive at {point:?}")]
    NonPositiveFacetDistance {
        facet: usize,
        value: f64,
        point: Vec<f64>,
    },

    #[error("Hessian is not positive definite at node {node} ({point:?})")]
    NotConvex { node: usize, point: Vec<f64> },

    #[error("stencil unavailable at node {node}: {reason}")]
    StencilUnavailable { node: usize, reason: String },

    #[error("Newton solve for xi = {xi:?} did not converge (residual {residual:e} after {iterations} iterations)")]
    NewtonFailed {
        xi: Vec<f64>,
        residual: f64,
        iterations: usize,
    },

    #[error("sample sets are misaligned: {0}")]
    Misaligned(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
