//! Numerical exterior calculus and pointwise verification of contact open
//! books, Bourgeois contact forms, spinning-field monodromy, ideal Liouville
//! domains and pre-Lagrangian straightening.

// Checks are written as `!(value <= tol)` so that NaN fails.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bourgeois;
pub mod contact;
pub mod forms;
pub(crate) mod linalg;
pub mod liouville;
pub mod manifolds;
pub mod monodromy;
pub mod prelagrangian;
pub mod report;
pub mod standard;

pub use contact::{ContactError, ContactFormData, DefiningFunction, RepresentationData};
pub use forms::{AltForm, DiffScheme, FormError, KForm, Point, SmoothMap, VecField};
pub use manifolds::{orient_page_basis, ManifoldError, Orientation, OrientedBasis, Submanifold};
pub use report::{CheckReport, Sweep};
