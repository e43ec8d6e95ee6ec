pub mod analysis;
pub mod cli;
pub mod combinators;
pub mod diagonal;
pub mod dyadic;
pub mod error;
pub mod names;
pub mod sigma;
pub mod transfer;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
