#![allow(dead_code)]

pub mod dense;
pub mod fixtures;
pub mod random_lp;
