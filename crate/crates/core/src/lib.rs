pub mod automorphism;
pub mod conjugacy;
pub mod error;
pub mod exec;
pub mod field;
pub mod green;
pub mod io;
pub mod groebner;
pub mod periodic;
pub mod poly;
pub mod radical;
pub mod roots;
pub mod upoly;

pub use automorphism::{classify, compose_maps, henon_normal_form, invert_map, jacobian_det, jung_decompose, PolyMap};
pub use error::{Error, Result};
pub use field::{Field, FieldElement, FieldSpec};
pub use poly::PlanePoly;
