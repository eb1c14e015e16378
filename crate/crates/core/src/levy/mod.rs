//! Lévy kernels, jump maps, cone masses and condition checks.

pub mod conditions;
pub mod cone;
pub mod jump;
pub mod kernel;
pub mod multiplier;

pub use conditions::{verify_jump_conditions, verify_measure_conditions, ConditionReport, ConditionResult, SamplePlan};
pub use cone::{cone_constant_example, cone_mass, cone_mass_at, ConeMass, ConeSpec};
pub use jump::{JumpFunction, JumpMap};
pub use kernel::{KernelKind, KernelKindTag, LevyKernel, SupportCone};
pub use multiplier::{fractional_constant, fractional_multiplier};
