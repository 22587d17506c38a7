#![no_std]
// `!(x > 0.0)` is how NaN gets rejected; index loops mirror the math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod alignment;
pub mod demonstration;
pub mod diffusion;
pub mod geometry;
pub mod harness;
pub mod kinematics;
pub mod linalg;
pub mod perception;
pub mod synthesis;
