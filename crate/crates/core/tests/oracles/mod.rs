//! Independent reference implementations used to check the engine.
#![allow(dead_code)]

pub mod diff;
pub mod nsga;
