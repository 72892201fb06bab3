pub mod absorb;
pub mod cli;
pub mod config_model;
pub mod graph;
pub mod ledger;
pub mod matching;
pub mod perturb;
pub mod verify;
