//! Additive functions `f(x + y) = f(x) + f(y)`: exact constructions on Hamel
//! spans, a numerical pipeline that recovers `f(x) = c·x` or exhibits a
//! witness against it, homomorphisms out of the flat torus, and an abstract
//! version of the pipeline parameterised by a regularity functional.

pub mod cli;
pub mod domain;
pub mod error;
pub mod estimator;
pub mod expr;
pub mod framework;
pub mod hamel;
pub mod oracle;
pub mod quadrature;
pub mod rational;
pub mod sampled;
pub mod torus;

pub use domain::{GridSpec, Parallelepiped, Point};
pub use error::{Error, Result};
pub use oracle::{ComplexOracle, Probe, RealOracle};
pub use rational::Rational;
