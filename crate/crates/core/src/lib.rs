//! Finite MTL-algebras, labeled forests and the duality between them.

pub mod construct;
pub mod corpus;
pub mod duality;
pub mod io;
pub mod kconstruct;
pub mod mtl;
pub mod poset;
pub mod sheaf;

use thiserror::Error as ThisError;

/// Any error raised by this crate.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error(transparent)]
    Poset(#[from] poset::PosetError),
    #[error(transparent)]
    Mtl(#[from] mtl::MtlError),
    #[error(transparent)]
    Construct(#[from] construct::ConstructError),
    #[error(transparent)]
    Sheaf(#[from] sheaf::SheafError),
    #[error(transparent)]
    Duality(#[from] duality::DualityError),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error("config: {0}")]
    Config(String),
}

/// Default limit on the number of elements of a constructed algebra.
pub const DEFAULT_SIZE_CAP: usize = 2048;

/// Element cap for constructions; `MTLFOREST_CAP` overrides the default.
pub fn size_cap() -> usize {
    std::env::var("MTLFOREST_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_SIZE_CAP)
}
