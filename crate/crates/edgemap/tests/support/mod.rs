//! Independent scalar references used as test oracles.
#![allow(dead_code)]

pub mod reference;
