//! Command-line front end for the quasi-Hamiltonian toolkit.

pub mod commands;
pub mod examples;
pub mod render;
