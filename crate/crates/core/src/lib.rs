//! Algebraic network coding over deterministic broadcast/superposition
//! networks.

pub mod codecon;
pub mod delaynet;
pub mod erasim;
pub mod format;
pub mod galois;
pub mod linalg;
pub mod mincut;
pub mod netmodel;
pub mod par;
pub mod rng;
