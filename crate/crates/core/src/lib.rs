//! Exact ladder-operator algebra for the Schrodinger operator built on the
//! fourth Painleve transcendent, its induced lowest/highest-weight
//! representations, and a numerical cross-check layer.
//!
//! Layering, bottom up:
//!
//! * [`coeff`]: the parameter ring `Q[alpha, beta, s]/(s^2 + beta)`.
//! * [`ring`]: the differential ring in `x, f, 1/f, f'` with `f''` eliminated.
//! * [`op`]: linear differential operators over that ring, the Hamiltonian
//!   and the third-order ladder operators.
//! * [`pha`]: realization-free quadratic polynomial Heisenberg algebra data.
//! * [`states`]: zero modes and ladder states as exact ring elements.
//! * [`numeric`]: ODE trajectories, grid evaluation and residuals.
//! * [`verify`]: the exact identity suite used by the CLI and the tests.

pub mod coeff;
pub mod error;
pub mod numeric;
pub mod op;
pub mod pha;
pub mod ring;
pub mod states;
pub mod verify;

pub use coeff::{ParamMono, ParamScalar, Rational};
pub use error::{CoeffError, NumericError, OpError, PhaError, RingError, StateError};
pub use numeric::{GridState, P4Config, P4Trajectory};
pub use op::{DiffOp, GaugeTag, Realization, WhichW};
pub use pha::{HPoly, PhaSignature};
pub use ring::RingElem;
pub use states::{StateExpr, SupportLattice, WeightType};
