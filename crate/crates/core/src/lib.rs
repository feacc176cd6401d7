//! Steady states of a coupled reaction-diffusion system on `(0, 1)`:
//!
//! ```text
//! -u'' = λ f(v) + μ h(u),    -v'' = λ g(u) + μ q(v),
//! du/dη + sqrt(λ + μ) u = 0, dv/dη + sqrt(λ + μ) v = 0.
//! ```
//!
//! The crate discretizes the Robin problem ([`grid`]), describes and checks
//! the reaction terms ([`nonlinearity`]), builds verified sub- and
//! supersolutions ([`subsuper`]), solves between them by monotone iteration
//! ([`monotone`]) and counts all solutions independently by shooting
//! ([`shooting`]).
//!
//! ```
//! use robin_rd::grid::{compute_a1, Grid1D};
//! use robin_rd::nonlinearity::example_family;
//!
//! let grid = Grid1D::new(256)?;
//! let quad = example_family(1.0, 10.0)?;
//! let a1 = compute_a1(grid, quad.g.deriv0())?;
//! assert!((a1 - std::f64::consts::FRAC_PI_2.powi(2)).abs() < 1e-4);
//! # Ok::<(), robin_rd::Error>(())
//! ```

pub mod error;
pub mod grid;
pub mod io;
pub mod monotone;
pub mod nonlinearity;
pub mod shooting;
pub mod subsuper;

pub use error::{Error, Result};
pub use grid::{Grid1D, RobinCoefficient, ScalarField};
pub use nonlinearity::{Nonlinearity, ReactionQuad};
pub use subsuper::{OrderInterval, PairField};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/discretization.md")]
    struct Discretization;
    #[doc = include_str!("../../../book/src/eigenvalues.md")]
    struct Eigenvalues;
    #[doc = include_str!("../../../book/src/nonlinearities.md")]
    struct Nonlinearities;
    #[doc = include_str!("../../../book/src/certificates.md")]
    struct Certificates;
    #[doc = include_str!("../../../book/src/monotone.md")]
    struct Monotone;
    #[doc = include_str!("../../../book/src/shooting.md")]
    struct Shooting;
    #[doc = include_str!("../../../book/src/example.md")]
    struct Example;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
