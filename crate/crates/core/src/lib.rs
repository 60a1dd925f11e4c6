//! Domination, almost multiplicativity and equilibrium states for finite
//! tuples of invertible 2×2 real matrices.

pub mod linalg;
pub mod projective;
pub mod semigroup;
pub mod domination;
pub mod thermo;
