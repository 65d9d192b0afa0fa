use alloc::string::String;
use core::fmt;

/// Errors raised by the checkers and oracles.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A user oracle returned NaN (or −∞) at the given point.
    NanValue { at: String },
    /// Point or matrix dimensions do not agree.
    DimMismatch { expected: usize, found: usize },
    /// Matrix is not square.
    NonSquare { rows: usize, cols: usize },
    /// The function is `+∞` on every node of the grid.
    AllInfinite,
    /// The prox objective keeps decreasing as the search box grows.
    UnboundedBelow,
    /// Two jittered grids produce prox points farther apart than the tolerance.
    ProxMultivalued { distance: f64 },
    /// Central-difference stencil hits a point outside the domain.
    StencilLeavesDomain,
    /// The function has neither smooth oracles nor a subgradient-graph enumerator.
    NoGraphAndNonsmooth,
    /// No enumerator is available for the subgradient graph.
    NoEnumerator,
    /// The sampled subgradient graph is empty after the attentive cut.
    EmptyGraphSample,
    /// `gamma` is outside `(0, 1/|sigma|)`.
    GammaOutOfRange { gamma: f64, sigma: f64 },
    /// Point expected in the polyhedral set is outside it.
    NotInOmega,
    /// `(z, y)` is not in the graph of the normal-cone mapping.
    NotInGraph,
    /// Active index sets are not nested as `I+ ⊆ I ⊆ {1..s}`.
    InconsistentIndexSets,
    /// Multiplier system has no admissible solution.
    Infeasible { residual: f64 },
    /// The point violates a constraint beyond the activity band.
    InfeasiblePoint { index: usize, value: f64 },
    /// Multipliers are not unique (LICQ / full rank fails).
    NonUnique,
    /// The ψ oracle lacks the singular-subgradient test.
    NoSingularOracle,
    /// The ψ oracle lacks the second-order test.
    NoSecondOrderOracle,
    /// The grid budget would be exceeded.
    GridBudgetExceeded { nodes: usize, budget: usize },
    /// Unsupported configuration for the requested operation.
    Unsupported(String),
    /// Unknown gallery id.
    UnknownId(String),
    /// The gallery entry has no analytic subgradient graph.
    NoAnalyticGraph(String),
    /// Invalid argument.
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NanValue { at } => write!(f, "oracle returned NaN or -inf at {at}"),
            Error::DimMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonSquare { rows, cols } => write!(f, "matrix is not square ({rows}x{cols})"),
            Error::AllInfinite => write!(f, "function is +inf on the whole grid"),
            Error::UnboundedBelow => write!(f, "objective is unbounded below"),
            Error::ProxMultivalued { distance } => {
                write!(f, "proximal mapping looks multivalued (basins {distance:e} apart)")
            }
            Error::StencilLeavesDomain => write!(f, "finite-difference stencil leaves the domain"),
            Error::NoGraphAndNonsmooth => {
                write!(f, "function has neither smooth oracles nor a subgradient graph")
            }
            Error::NoEnumerator => write!(f, "no subgradient-graph enumerator available"),
            Error::EmptyGraphSample => write!(f, "graph sample is empty"),
            Error::GammaOutOfRange { gamma, sigma } => {
                write!(f, "gamma = {gamma} is outside (0, 1/|sigma|) for sigma = {sigma}")
            }
            Error::NotInOmega => write!(f, "point is not in the polyhedral set"),
            Error::NotInGraph => write!(f, "(z, y) is not in the normal-cone graph"),
            Error::InconsistentIndexSets => write!(f, "index sets are inconsistent"),
            Error::Infeasible { residual } => {
                write!(f, "multiplier system infeasible (residual {residual:e})")
            }
            Error::InfeasiblePoint { index, value } => {
                write!(f, "constraint {index} violated at the point (value {value:e})")
            }
            Error::NonUnique => write!(f, "multipliers are not unique"),
            Error::NoSingularOracle => write!(f, "psi oracle has no singular-subgradient test"),
            Error::NoSecondOrderOracle => write!(f, "psi oracle has no second-order test"),
            Error::GridBudgetExceeded { nodes, budget } => {
                write!(f, "grid of {nodes} nodes exceeds budget {budget}")
            }
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::UnknownId(id) => write!(f, "unknown gallery id `{id}`"),
            Error::NoAnalyticGraph(id) => write!(f, "gallery entry `{id}` has no analytic graph"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
