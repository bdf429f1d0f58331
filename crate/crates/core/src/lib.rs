pub mod data;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod imaging;
pub mod refdisk;
pub mod spectral;
pub mod specfun;
