//! Finite-model verification for sheaves on quantales and on semicartesian
//! monoidal sites.

pub mod cli;
pub mod coverage;
pub mod finset;
pub mod moncat;
pub mod presheaf;
pub mod quantale;
pub mod reflect;
pub mod sheaf;
