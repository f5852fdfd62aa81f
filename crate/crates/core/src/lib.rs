//! Declarative visualisation of finite logic structures.
//!
//! Programs are written in a small typed first-order language (see
//! [`lang`]). The crate computes models by finite model expansion
//! ([`solver`]), steps linear-time theories forward ([`ltc`]), turns drawing
//! structures into a JSON animation format ([`vizencode`]), turns clicks
//! back into structures ([`inputdecode`]) and ties these together into the
//! visualisation and simulation applications ([`apps`]), served over HTTP
//! by [`service`] and driven from the command line by [`cli`].

pub mod apps;
pub mod cli;
pub mod inputdecode;
pub mod lang;
pub mod ltc;
pub mod model;
pub mod service;
pub mod solver;
pub mod vizencode;
