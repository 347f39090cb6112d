//! Monte Carlo Bregman generators for mixture and exponential family manifolds.
//!
//! The negentropy of a mixture family and the cumulant of an exponential
//! family are integrals with no closed form in general. Replacing the integral
//! by an importance-sampling sum over a fixed sample gives generators that are
//! strictly convex almost surely:
//!
//! * [`generators::MCMixtureGenerator`]: `(1/m) sum_i m(x_i; eta) log m(x_i; eta) / q(x_i)`;
//! * [`generators::MCExponentialGenerator`]: `log (1/m) sum_i exp(<t(x_i), theta> + k(x_i)) / q(x_i)`,
//!   stored as `lse0p(<a_i, theta> + b_i)` up to an affine term.
//!
//! [`geometry::DuallyFlatSpace`] builds divergences, dual coordinates and
//! geodesics on top of any [`generators::Generator`], and [`clustering`]
//! runs Bregman k-means on it.
//!
//! ```
//! use mcig::families::{Component, MixtureFamily};
//! use mcig::generators::build_mc_mixture_generator;
//! use mcig::geometry::DuallyFlatSpace;
//! use mcig::sampling::{draw_sample_set, uniform_mixture_proposal, FamilyRef};
//! use nalgebra::DVector;
//!
//! let family = MixtureFamily::from_components(&[
//!     Component::gaussian(0.0, 3.0).unwrap(),
//!     Component::gaussian(2.0, 1.0).unwrap(),
//! ])
//! .unwrap();
//! let q = uniform_mixture_proposal(&family);
//! let sample = draw_sample_set(&q, 1000, 7, FamilyRef::Mixture(&family)).unwrap();
//! let space = DuallyFlatSpace::new(build_mc_mixture_generator(&family, &sample).unwrap());
//! let b = space
//!     .bregman_divergence(&DVector::from_element(1, 0.2), &DVector::from_element(1, 0.7))
//!     .unwrap();
//! assert!(b > 0.0);
//! ```

pub mod cli;
pub mod clustering;
pub mod error;
pub mod families;
pub mod generators;
pub mod geometry;
pub mod quadrature;
pub mod reduce;
pub mod sampling;

pub use error::{Error, Result};
