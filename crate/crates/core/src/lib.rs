//! Online learning with high-probability regret guarantees: log-barrier bandits,
//! lifted self-concordant linear bandits, and adversarial episodic MDPs.

pub mod barrier;
pub mod cone;
pub mod env;
pub mod error;
pub mod exec;
pub mod freedman;
pub mod linalg;
pub mod linear;
pub mod mdp;
pub mod mab;
pub mod omd;
pub mod types;

pub use error::{Error, Result};
