pub mod envs;
pub mod error;
pub mod nets;
pub mod numcore;
pub mod policy;
pub mod ppo;
pub mod spline;
pub mod timing;

pub use error::{BridgeError, Error, Result};
