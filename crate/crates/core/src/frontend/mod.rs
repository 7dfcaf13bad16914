//! Surface syntax, export and the command-line front end.

pub mod printer;
pub mod parser;
pub mod export;
pub mod cli;
