use thiserror::Error;

/// Errors raised by the discretization, assembly and solution routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate material denominator {value:e}: parameters sit on the stability boundary")]
    DegenerateDenominator { value: f64 },
    #[error("matrix is singular or not positive definite")]
    SingularMatrix,
    #[error("invalid mesh dimensions: {0}")]
    InvalidDimensions(&'static str),
    #[error("boundary edge {edge} is matched by no boundary predicate")]
    UncoveredBoundaryEdge { edge: usize },
    #[error("boundary edge {edge} is matched by both the Dirichlet and the Neumann predicate")]
    OverlappingBoundaryTags { edge: usize },
    #[error("mesh is not conforming: {0}")]
    NonConforming(&'static str),
    #[error("triangle {triangle} has non-positive signed area")]
    InvertedTriangle { triangle: usize },
    #[error("point lies outside element {element}")]
    PointOutsideElement { element: usize },
    #[error("no quadrature rule of degree {degree} is tabulated")]
    UnsupportedDegree { degree: usize },
    #[error("boundary data missing: {0}")]
    MissingBoundaryData(&'static str),
    #[error("stabilization parameter {name} = {value} is negative")]
    InvalidStabilization { name: &'static str, value: f64 },
    #[error("the operation requires a {expected} space")]
    WrongSpace { expected: &'static str },
    #[error("coercivity estimate {estimate:e} is not positive")]
    NonPositive { estimate: f64 },
    #[error("linear system is singular: {0}")]
    SingularSystem(&'static str),
    #[error("backward error {residual:e} exceeds tolerance {tol:e}")]
    ToleranceNotReached { residual: f64, tol: f64 },
    #[error("reference solution has zero norm")]
    ZeroReference,
    #[error("invalid refinement sequence: {0}")]
    InvalidSequence(&'static str),
    #[error("material violates pointwise stability")]
    StabilityViolation,
    #[error("no mesh vertex at the requested point")]
    PointNotInMesh,
}

pub type Result<T> = core::result::Result<T, Error>;
