//! Exact counting toolkit for linked diagonal Diophantine systems.
//!
//! The object of study is the ten-variable system
//!
//! ```text
//! Σ_{i=1..5} (x_i^k - y_i^k) = 0
//! Σ_{i=1..3} (x_i^n - y_i^n) = 0
//! Σ_{i=4..5} (x_i^m - y_i^m) = 0
//! ```
//!
//! over boxes `1 <= x_i, y_i <= B`. The crate counts its solutions exactly
//! at desk scale, decomposes the count through sparse frequency tables
//! linked by the shared degree-k value, cross-checks everything against
//! independent routes (divisor solvers, exact quadrature), and fits growth
//! exponents that separate the paucity regime from the abundant excluded
//! triples.
//!
//! Start with [`ExponentTriple`] and [`count_solutions`], or see the book
//! under `book/` for a guided tour.

mod error;
mod util;

pub mod cache;
pub mod circle;
pub mod divisor;
pub mod growth;
pub mod oracle;
pub mod tables;
pub mod triple;

pub use error::{Error, Result};

pub use circle::{
    build_major_arcs, major_arc_bound, minor_arc_weyl_scan, quadrature_count, ArcDissection,
    MajorArc, WeylSum,
};
pub use divisor::{
    build_psi1, build_psi2, solve_pair, solve_pair_21, solve_pair_m1, solve_pair_m2, PairSolution,
    PsiPolynomial,
};
pub use growth::{
    fit_log_constant, fit_power_law, scan_counts, GrowthFit, PaucityReport, Verdict,
    VerdictConfig, STANDARD_GRID,
};
pub use tables::{
    build_u_table, build_v_table, count_solutions, diagonal_count, moment_count, taxicab_count,
    CountReport, FreqTable, TableKind,
};
pub use triple::{classify, BoxConfig, ExponentTriple, TripleClass, MAX_EXPONENT};

// The book chapters double as doc-tests so their code stays in sync with
// the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/divisor-solvers.md")]
    mod divisor_solvers {}
    #[doc = include_str!("../../../book/src/circle-method.md")]
    mod circle_method {}
    #[doc = include_str!("../../../book/src/growth.md")]
    mod growth {}
}
