//! Exponent triples, their case classification, and the shared run configuration.
//!
//! A triple `(k, m, n)` fixes the linked system
//!
//! ```text
//! x1^k + .. + x5^k = y1^k + .. + y5^k
//! x1^n + x2^n + x3^n = y1^n + y2^n + y3^n
//! x4^m + x5^m = y4^m + y5^m
//! ```
//!
//! over boxes `1 <= x_i, y_i <= B`. Whether non-diagonal solutions are rare
//! depends only on the triple, and [`classify`] sorts every triple into the
//! bucket that decides it.

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest exponent the engines accept. Together with the box guard
/// (`5·B^k` must fit `i128`) this keeps every power sum inside 128 bits.
pub const MAX_EXPONENT: u32 = 12;

/// The exponents `(k, m, n)` of the linked system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ExponentTriple {
    /// Exponent of the ten-variable equation.
    pub k: u32,
    /// Exponent of the trailing pair slice.
    pub m: u32,
    /// Exponent of the leading triple slice.
    pub n: u32,
}

impl ExponentTriple {
    /// Validates `1 <= k, m, n <= MAX_EXPONENT`. Degenerate triples
    /// (`k ∈ {m, n}`) are accepted here so they can be classified and
    /// explained instead of silently rejected.
    pub fn new(k: u32, m: u32, n: u32) -> Result<Self> {
        for (name, e) in [("k", k), ("m", m), ("n", n)] {
            if e == 0 || e > MAX_EXPONENT {
                return Err(Error::InvalidParameter(format!(
                    "exponent {name}={e} out of range 1..={MAX_EXPONENT}"
                )));
            }
        }
        Ok(Self { k, m, n })
    }

    /// True iff `k ∈ {m, n}`, in which case the system collapses.
    pub fn is_degenerate(&self) -> bool {
        self.k == self.m || self.k == self.n
    }

    pub fn classify(&self) -> TripleClass {
        classify(self)
    }
}

impl std::fmt::Display for ExponentTriple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.k, self.m, self.n)
    }
}

/// The complete case analysis of a triple.
///
/// `Degenerate` and the three `Excluded*` variants fall outside the paucity
/// dichotomy; `CaseI`..`CaseV` partition everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleClass {
    /// `k ∈ {m, n}`.
    Degenerate,
    /// `(k, n) = (2, 1)`: the count grows like `B^5 log B`.
    ExcludedLog21,
    /// `(k, n) = (1, 2)`: same logarithmic abundance by symmetry.
    ExcludedLog12,
    /// `(k, m, n) = (3, 1, 1)`: the excess carries positive density.
    Excluded311,
    /// `m >= 3`.
    CaseI,
    /// `m ∈ {1, 2}` and `n >= 3`.
    CaseII,
    /// `m ∈ {1, 2}`, `n = 2`, `k >= 3`.
    CaseIII,
    /// `m ∈ {1, 2}`, `n = 1`, `k >= 4`.
    CaseIV,
    /// `(k, m, n) = (3, 2, 1)`.
    CaseV,
}

impl TripleClass {
    /// True for the five cases covered by the paucity dichotomy.
    pub fn is_theorem_case(&self) -> bool {
        matches!(
            self,
            TripleClass::CaseI
                | TripleClass::CaseII
                | TripleClass::CaseIII
                | TripleClass::CaseIV
                | TripleClass::CaseV
        )
    }

    pub fn is_excluded(&self) -> bool {
        matches!(
            self,
            TripleClass::ExcludedLog21 | TripleClass::ExcludedLog12 | TripleClass::Excluded311
        )
    }
}

impl std::fmt::Display for TripleClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TripleClass::Degenerate => "degenerate",
            TripleClass::ExcludedLog21 => "excluded_log_21",
            TripleClass::ExcludedLog12 => "excluded_log_12",
            TripleClass::Excluded311 => "excluded_311",
            TripleClass::CaseI => "case_i",
            TripleClass::CaseII => "case_ii",
            TripleClass::CaseIII => "case_iii",
            TripleClass::CaseIV => "case_iv",
            TripleClass::CaseV => "case_v",
        };
        f.write_str(s)
    }
}

/// Total classification of a triple. For every triple with `k ∉ {m, n}` that
/// is not excluded, exactly one of the five cases applies.
pub fn classify(t: &ExponentTriple) -> TripleClass {
    let (k, m, n) = (t.k, t.m, t.n);
    if k == m || k == n {
        return TripleClass::Degenerate;
    }
    if (k, n) == (2, 1) {
        return TripleClass::ExcludedLog21;
    }
    if (k, n) == (1, 2) {
        return TripleClass::ExcludedLog12;
    }
    if (k, m, n) == (3, 1, 1) {
        return TripleClass::Excluded311;
    }
    if m >= 3 {
        TripleClass::CaseI
    } else if n >= 3 {
        TripleClass::CaseII
    } else if n == 2 {
        debug_assert!(k >= 3);
        TripleClass::CaseIII
    } else if k >= 4 {
        debug_assert!(n == 1);
        TripleClass::CaseIV
    } else {
        debug_assert_eq!((k, m, n), (3, 2, 1));
        TripleClass::CaseV
    }
}

const DEFAULT_MEMORY_BUDGET: u64 = 8 << 30;

/// Box bound plus the engine knobs shared by all modules.
///
/// Immutable once built; safe to share across workers. `parallel_width = 0`
/// lets the worker pool pick, any other value fixes the number of work
/// chunks. Results are bit-identical for every width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoxConfig {
    /// Variables range over `[1, bound]`.
    pub bound: u64,
    /// Number of parallel work chunks; 0 = automatic.
    pub parallel_width: usize,
    /// Cap on projected table allocations, in bytes.
    pub memory_budget: u64,
}

impl BoxConfig {
    pub fn new(bound: u64) -> Self {
        Self {
            bound,
            parallel_width: 0,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }

    pub fn with_parallel_width(mut self, width: usize) -> Self {
        self.parallel_width = width;
        self
    }

    pub fn with_memory_budget(mut self, bytes: u64) -> Self {
        self.memory_budget = bytes;
        self
    }

    pub(crate) fn check_bound(&self) -> Result<()> {
        if self.bound == 0 {
            return Err(Error::InvalidParameter("box bound must be >= 1".into()));
        }
        Ok(())
    }

    pub(crate) fn chunks(&self) -> usize {
        if self.parallel_width == 0 {
            rayon::current_num_threads().max(1)
        } else {
            self.parallel_width
        }
    }
}
