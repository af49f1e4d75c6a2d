//! Heat-kernel distributions, exact-support test functions, smoothness on
//! the half line, and Weil-algebra jets.

pub mod dist;
pub mod halfline;
pub mod named;
pub mod oracle;
pub mod quad;
pub mod richardson;
pub mod testfn;
pub mod verify;
pub mod weil;
