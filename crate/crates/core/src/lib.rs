pub mod algebra;
pub mod calculus;
pub mod context;
pub mod error;
pub mod expr;
pub mod lagrangian;
pub mod numeval;
pub mod parser;
pub mod render;
pub mod rules;
pub mod session;
pub mod symmetry;
