//! Forms assembled on top of the link model, and their verifiers.

pub mod bsymplectic;
pub mod circular;
pub mod end_form;
pub mod foliated;
pub mod gluing;
pub mod profiles;
pub mod tubular;

pub use end_form::{assemble_end_form, choose_constants, verify_end_form, ChosenConstants, EndForm, EndGridConfig};
pub use profiles::{build_profile, KParams, Profile, ProfileName, ProfileParams};

use crate::error::Result;
use crate::exterior::{FormField, Form};

/// Pulls a form on the link chart `(x, u, v)` back to the last three axes of a `dim`-chart.
pub fn lift_link_form(f: &FormField, dim: usize) -> Result<FormField> {
    f.embed(dim, &[dim - 3, dim - 2, dim - 1])
}

/// The 0-form `profile(x_axis)` on a `dim`-chart.
pub fn profile_scalar(dim: usize, axis: usize, profile: &Profile) -> Result<FormField> {
    let p = profile.clone();
    FormField::new(dim, 0, move |x| Form { dim, degree: 0, coeffs: vec![x[axis].compose(p.eval(x[axis].value))] })
}
