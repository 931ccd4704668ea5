//! Pairwise-stable many-to-one job allocation with bounded integer salaries.
//!
//! Workers and firms value each admissible match through strictly monotone
//! functions of the salary. [`solver::run`] starts every pair at the highest
//! salary its firm still accepts, matches workers to their favourite firms,
//! and cuts the salary of every rejected proposal by the smallest integer
//! amount that makes it competitive again, until no proposal is rejected.
//! The [`verify`] module holds independent oracles for the result.

pub mod assignment;
pub mod cli;
pub mod format;
pub mod gen;
pub mod market;
pub mod solver;
pub mod valuation;
pub mod verify;
