//! Weighted composition operators `C_{φ,w} f = w·(f∘φ)` on discrete measure
//! spaces.
//!
//! * [`space`] builds finite spaces and the local interface shared with lazy families,
//! * [`calculus`] evaluates `h_{φ,w}`, conditional expectations, the Aluthge weight `w_α`
//!   and the actions of `C`, `C*`, `|C|^p`, `|C*|^p` and the range projection,
//! * [`properties`] decides dense definiteness, boundedness, p-hyponormality,
//!   quasinormality and the Aluthge closedness criteria pointwise,
//! * [`oracle`] re-derives everything from dense matrices by Jacobi eigendecomposition,
//! * [`gallery`] provides the classical example families with closed-form certificates.

pub mod agreement;
pub mod calculus;
pub mod exact;
pub mod family;
pub mod gallery;
pub mod linear;
pub mod oracle;
pub mod properties;
pub mod random;
pub mod verdict;
pub mod ext;
pub mod series;
pub mod space;

pub use ext::ExtReal;
pub use verdict::{Status, Verdict, Witness};
pub use space::{build_space, fibers, DiscreteSystem, Fiber, FiberIndex, PointSpace, ScalarField, SpaceDocument, SpaceError, WeightFunction};
