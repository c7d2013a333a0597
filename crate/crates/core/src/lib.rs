pub mod design;
pub mod env;
pub mod harmonics;
pub mod kernel_sampler;
pub mod lsvi;
pub mod rng;
pub mod validation;
