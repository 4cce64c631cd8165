pub mod amplify;
pub mod cli;
pub mod encoder;
pub mod error;
pub mod imagery;
pub mod io;
pub mod preprocess;
pub mod qft;
pub mod randstats;
pub mod resources;
pub mod sim;

pub use error::{Error, Result};
