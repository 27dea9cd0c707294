//! Inclusion logic under lax team semantics.
//!
//! * [`syntax`]: formulas, parsing, printing, substitution and sugar.
//! * [`semantics`]: finite models, teams and two evaluators.
//! * [`normal_form`]: the prenex / quantifier-free / one-universal compiler.
//! * [`approx`]: finite approximations of the game expression of a sentence.
//! * [`proof`]: a checker for natural-deduction proof scripts.
//! * [`ind`]: implication of inclusion dependencies.

pub mod approx;
pub mod gen;
pub mod ind;
pub mod normal_form;
pub mod proof;
pub mod semantics;
pub mod suite;
pub mod syntax;
