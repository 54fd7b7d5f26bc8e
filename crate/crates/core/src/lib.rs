//! Budget-feasible procurement mechanisms for subadditive and XOS
//! valuations, with exact rational arithmetic throughout.

pub mod agents;
pub mod error;
pub mod generate;
pub mod harness;
pub mod io;
pub mod lpcore;
pub mod mechanisms;
pub mod money;
pub mod optimize;
pub mod oracles;
pub mod suites;
pub mod valuations;

pub use agents::{AgentId, AgentSet, MAX_AGENTS};
pub use error::{Error, Result};
pub use mechanisms::{Bids, MechanismId, Outcome, RandomTape};
pub use money::Money;
pub use optimize::{BudgetedSolution, Instance};
pub use valuations::{ValuationSpec, ValueTable};
