//! Tuple-level Shapley and Banzhaf attribution for join-aggregate queries.
//!
//! The crate evaluates a query on sub-instances (coalitions of endogenous
//! tuples), computes exact values by enumeration for small games, and
//! estimates them by Monte Carlo, size-stratified and relation-stratified
//! sampling, optionally with adaptive Neyman-style allocation.

pub mod accel;
pub mod error;
pub mod game;
pub mod harness;
pub mod provenance;
pub mod relcore;
pub mod samplers;

pub use error::{Error, Result};
