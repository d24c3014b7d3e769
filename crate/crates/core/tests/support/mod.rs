//! Independent reference implementations and fixtures shared by the
//! integration tests and the acceptance suite.
#![allow(dead_code)]

pub mod blr_oracle;
pub mod cost_cases;
pub mod finite_diff;
pub mod td_collapse;
pub mod toy;
