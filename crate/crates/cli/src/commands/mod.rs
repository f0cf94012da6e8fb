mod bench;
mod eval;
mod params;
mod train;

pub use bench::cmd_bench;
pub use eval::{cmd_eval, evaluate_checkpoint};
pub use params::{cmd_params, param_rows, ParamRow};
pub use train::{cmd_train, run_seed, SeedSummary};
