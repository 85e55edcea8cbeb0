//! Program builders for the reference workloads.

pub mod arith;
pub mod order;
pub mod shor;
pub mod teleport;
pub mod tfim;

pub use order::{extract_order, factors_from_order, OrderError};
pub use shor::{build_shor_order_finding, shor_source, ShorError, ShorSpec};
pub use teleport::build_teleportation;
pub use tfim::{build_tfim_quench, tfim_source, zz_rotation, TfimError, TfimQuenchSpec};
