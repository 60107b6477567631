// SPDX-License-Identifier: Apache-2.0

//! Moment dynamics, decoherence rates and weak-coupling analysis for open
//! quantum systems whose variables close under a finite algebra.

pub mod cli;
pub mod composite;
pub mod config;
pub mod decoherence;
pub mod error;
pub mod isolated;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod qsde;
pub mod spectrum;
pub mod weak;

pub use error::{Error, Result};
