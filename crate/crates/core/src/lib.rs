pub mod basis;
pub mod error;
pub mod lattice;
pub mod operator;
pub mod solver;
pub mod spin;
pub mod state;
pub mod ansatz;
pub mod lbfgs;
pub mod optimize;
pub mod circuit;
pub mod experiment;
