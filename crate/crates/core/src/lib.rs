//! A decision procedure for quantifier-free linear integer arithmetic
//! (boolean combinations of linear constraints over unbounded integers)
//! that exploits "sparse, mostly difference" constraint structure.
//!
//! The pipeline is:
//!
//! 1. [`formula`] — parse an SMT-LIB 2 subset, desugar every relation to
//!    `>=` atoms, push negations into atoms (NNF), and optionally eliminate
//!    uninterpreted functions by Ackermann's reduction.
//! 2. [`analysis`] — partition variables into independent classes, classify
//!    each class (equality / difference / UTVPI / general), and compute a
//!    per-class bound `d` such that the formula is satisfiable iff it has a
//!    model with every class variable inside `[0, d]` or `[-d, d]`.
//! 3. [`encoder`] — blast each integer variable to a fixed-width
//!    two's-complement bit-vector sized from its class bound and translate
//!    the formula to CNF via Tseitin transformation.
//! 4. [`sat`] — decide the CNF with an embedded CDCL solver or an external
//!    DIMACS solver process.
//!
//! [`oracle`] provides brute-force reference semantics for small instances,
//! [`gen`] generates benchmark formulas, and [`pipeline`] ties the stages
//! together the way the `qfp` command-line tool drives them.

pub mod analysis;
pub mod encoder;
pub mod formula;
pub mod gen;
pub mod oracle;
pub mod pipeline;
pub mod sat;

pub use num_bigint::BigInt;
