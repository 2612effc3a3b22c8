//! Sampled certification of concavity structure: transforms, sandwich
//! bounds, transform chains and the subsolution form.

pub mod certificate;
pub mod chain;
pub mod constants;
pub mod sampling;
pub mod subsolution;
pub mod tensor;
pub mod transform;

pub use certificate::{
    check_sandwich, check_transform_concavity, sandwich_sweep, Certificate, SandwichCheck, Witness,
};
pub use chain::{build_chain, TransformChain};
pub use constants::{estimate_constants, Constants};
pub use subsolution::{certify_subsolution, subsolution_form, subsolution_form_with};
pub use tensor::Tensor3;
pub use transform::{Jet, ScalarTransform, TransformKind};
