pub mod error;
pub mod perm;
pub mod permgroup;
mod schreier;

pub use error::{Error, Result};
pub use perm::Perm;
pub use permgroup::GroupHandle;
pub mod branch;
pub mod centlat;
pub mod decomp;
pub mod filtered;
pub mod filtration;
pub mod io;
pub mod lattice;
pub mod radicals;
pub mod stone;
pub mod table;
pub mod tree;
