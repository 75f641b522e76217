//! Head reduction for the pair-pattern calculus and the two intersection
//! type systems that measure it.

pub mod derivation;
pub mod fuzz;
pub mod reduction;
pub mod syntax;
pub mod system_e;
pub mod system_u;
mod transform;
pub mod types;
