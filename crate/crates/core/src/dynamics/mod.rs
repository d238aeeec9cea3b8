//! Per-mode time integration: the primitive system and the good-unknown oracle.

pub mod derived;
pub mod primitive;
