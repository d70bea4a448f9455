pub mod edt;
pub mod error;
pub mod fields;
pub mod lowtrans;
pub mod mam;
pub mod oracles;
pub mod stability;
pub mod verify;

pub use error::{Error, Result};
