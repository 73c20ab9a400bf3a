//! Planning tasks as graphs.
//!
//! Grounded SAS+ tasks compile to problem description graphs ([`pdg`]);
//! lifted PDDL tasks compile to abstract structure graphs ([`asg`]). Both
//! share the typed graph representation in [`graph`]. [`stats`] and
//! [`dataset`] cover corpus statistics, labels, splits and planner
//! selection; [`cli`] is the command-line front end.

pub mod asg;
pub mod cli;
pub mod dataset;
pub mod graph;
pub mod pddl;
pub mod pdg;
pub mod sas;
pub mod stats;
