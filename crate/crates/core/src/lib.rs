pub mod closure;
pub mod equi;
pub mod error;
pub mod expr;
pub mod field;
pub mod linalg;
pub mod malcev;
pub mod matrix;
pub mod nilcore;
pub mod poly;
pub mod subalg;
pub mod verify;

pub use error::{Error, Result};
