use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x:.6e}, {y:.6e}) lies inside the body")]
    InsideBody { x: f64, y: f64 },
    #[error("conformal fit did not reach the boundary tolerance (residual {residual:.3e} at order {order})")]
    FitDiverged { residual: f64, order: usize },
    #[error("boundary polyline is not simple: {0}")]
    NonSimpleBoundary(String),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("Newton iteration for the forward map did not converge at ({x:.6e}, {y:.6e})")]
    NewtonDiverged { x: f64, y: f64 },
    #[error("coincident evaluation and source points")]
    CoincidentPoints,
    #[error("potential-flow expansion diverged")]
    ExpansionDiverged,
    #[error("boundary quadrature unresolved (relative change {0:.3e} between 256 and 512 nodes)")]
    QuadratureUnresolved(f64),
    #[error("singular body system")]
    SingularSystem,
    #[error("particle {index} is {distance:.3e} from the boundary (limit {limit:.3e})")]
    ParticleTooClose {
        index: usize,
        distance: f64,
        limit: f64,
    },
    #[error("step rejected: {0}")]
    StepRejected(Box<Error>),
    #[error("finite-difference solver stagnated (residual {0:.3e})")]
    SolverStagnated(f64),
    #[error("energy is unbounded: far-field circulation {0:.6e} is nonzero")]
    UnboundedEnergy(f64),
    #[error("energy proxy {value:.6e} exceeds envelope {envelope:.6e} at t = {time}")]
    EnvelopeViolated {
        time: f64,
        value: f64,
        envelope: f64,
    },
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors signalling breakdown of the particle model rather
    /// than bad input.
    pub fn is_breakdown(&self) -> bool {
        match self {
            Error::ParticleTooClose { .. } => true,
            Error::StepRejected(inner) => inner.is_breakdown(),
            _ => false,
        }
    }
}
