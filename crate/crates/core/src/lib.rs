//! Principal configurations around umbilics of spacelike surfaces in null
//! hypersurfaces of Minkowski 4-space.

pub mod checks;
pub mod error;
pub mod frame;
pub mod integrate;
pub mod jet;
pub mod lie_cartan;
pub mod minkowski;
pub mod render;
pub mod shape;
pub mod surfaces;
pub mod theorem;

pub use error::{Error, Result};
