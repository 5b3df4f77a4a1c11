use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a partition needs at least one cell")]
    EmptyPartition,
    #[error("breakpoints must be finite and strictly increasing")]
    NotIncreasing,
    #[error("invalid interval [{lo}, {hi}]")]
    BadInterval { lo: f64, hi: f64 },
    #[error("final time must be positive, got {0}")]
    BadFinalTime(f64),
    #[error("decomposition has no subdomains")]
    NoSubdomains,
    #[error("subdomain at position {expected} has id {found}")]
    BadSubdomainId { expected: usize, found: usize },
    #[error("subdomain {0} has an empty grid")]
    EmptyGrid(usize),
    #[error("subdomain {0} extends outside the domain")]
    OutsideDomain(usize),
    #[error("time partition of subdomain {subdomain} does not span [0, T]")]
    TimeSpan { subdomain: usize },
    #[error("subdomains {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("subdomains cover area {covered}, domain area is {expected}")]
    Gap { covered: f64, expected: f64 },
    #[error("subdomains {0} and {1} share a partial edge (corners must coincide)")]
    NonConforming(usize, usize),
    #[error("refinement level {0} out of range")]
    LevelOutOfRange(u32),
    #[error("subdomain {subdomain} does not touch interface {interface}")]
    NotOnInterface { subdomain: usize, interface: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("permeability tensor of cell {cell} is not symmetric positive definite")]
    NotSpd { cell: usize },
    #[error("permeability field has {found} cells, grid has {expected}")]
    FieldSize { expected: usize, found: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MortarError {
    #[error("polynomial degree {0} is not supported (0..=2)")]
    Degree(usize),
    #[error("mortar grid of interface {0} does not span its segment and [0, T]")]
    SegmentMismatch(usize),
    #[error("expected {expected} mortar spaces, got {found}")]
    Count { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("step system of subdomain {subdomain} is singular (pivot {pivot:e} at row {row})")]
    Singular {
        subdomain: usize,
        row: usize,
        pivot: f64,
    },
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("operator dimension {dim} exceeds dense cap {cap}")]
    DenseCap { dim: usize, cap: usize },
    #[error("symmetric part is not positive definite (lambda_min = {0:e})")]
    NotPositiveDefinite(f64),
    #[error(
        "GMRES did not converge: relative residual {residual:e} after {iterations} iterations"
    )]
    NotConverged { iterations: usize, residual: f64 },
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Mortar(#[from] MortarError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
