//! Regressor terms and the design matrix built from them.

use std::fmt;
use std::ops::Range;

use num_complex::Complex64;

use crate::config::CancellerMemory;
use crate::error::{Error, Result};

/// Elementary signals that basis terms multiply together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Factor {
    /// `x`
    X,
    /// `x̄`
    XConj,
    /// `x²x̄`
    X2XConj,
    /// `x x̄²`
    XXConj2,
}

impl Factor {
    pub fn eval(self, x: Complex64) -> Complex64 {
        match self {
            Factor::X => x,
            Factor::XConj => x.conj(),
            Factor::X2XConj => x * x.norm_sqr(),
            Factor::XXConj2 => x.conj() * x.norm_sqr(),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Factor::X => "x",
            Factor::XConj => "xc",
            Factor::X2XConj => "x2xc",
            Factor::XXConj2 => "xxc2",
        }
    }
}

/// How lags combine inside a product term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lags {
    /// Every factor takes its own lag: `L^k` columns for `k` factors.
    Tensor,
    /// One lag shared by all factors, i.e. the product signal delayed:
    /// `L` columns.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisTerm {
    pub factors: Vec<Factor>,
    pub memory: usize,
    pub lags: Lags,
}

impl BasisTerm {
    pub fn new(factors: &[Factor], memory: usize, lags: Lags) -> Self {
        Self {
            factors: factors.to_vec(),
            memory,
            lags,
        }
    }

    pub fn width(&self) -> usize {
        match self.lags {
            Lags::Tensor => self.memory.pow(self.factors.len() as u32),
            Lags::Shared => self.memory,
        }
    }

    /// Lag tuples in column order, first factor's lag outermost.
    pub fn lag_tuples(&self) -> Vec<Vec<usize>> {
        let k = self.factors.len();
        match self.lags {
            Lags::Shared => (0..self.memory).map(|l| vec![l; k]).collect(),
            Lags::Tensor => {
                let mut out = vec![Vec::new()];
                for _ in 0..k {
                    out = out
                        .into_iter()
                        .flat_map(|t| {
                            (0..self.memory).map(move |l| {
                                let mut t = t.clone();
                                t.push(l);
                                t
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }

    pub fn label(&self) -> String {
        let f: Vec<&str> = self.factors.iter().map(|f| f.label()).collect();
        format!("{{{}}}", f.join(","))
    }
}

/// An ordered set of regressor terms, optionally led by a constant column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSpec {
    pub constant: bool,
    pub terms: Vec<BasisTerm>,
}

/// The twelve non-constant terms of the proposed canceller, in order.
pub fn proposed_factor_sets() -> Vec<Vec<Factor>> {
    use Factor::*;
    vec![
        vec![X],
        vec![XConj],
        vec![X, X],
        vec![X, XConj],
        vec![XConj, XConj],
        vec![X, X, X],
        vec![X, X, XConj],
        vec![X, XConj, XConj],
        vec![XConj, XConj, XConj],
        vec![X, X, X2XConj],
        vec![X, XConj, X2XConj],
        vec![X, X, XXConj2],
    ]
}

/// The cancellers compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CancellerKind {
    Proposed,
    Linear,
    WidelyLinear,
    Nonlinear,
    Cascaded,
}

impl CancellerKind {
    pub const ALL: [CancellerKind; 5] = [
        CancellerKind::Proposed,
        CancellerKind::Linear,
        CancellerKind::WidelyLinear,
        CancellerKind::Nonlinear,
        CancellerKind::Cascaded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CancellerKind::Proposed => "proposed",
            CancellerKind::Linear => "linear",
            CancellerKind::WidelyLinear => "wlinear",
            CancellerKind::Nonlinear => "nonlinear",
            CancellerKind::Cascaded => "cascaded",
        }
    }

    fn factor_sets(self) -> Vec<Vec<Factor>> {
        use Factor::*;
        match self {
            CancellerKind::Proposed => proposed_factor_sets(),
            CancellerKind::Linear => vec![vec![X]],
            CancellerKind::WidelyLinear => vec![vec![X], vec![XConj]],
            // The third-order term alongside the widely linear pair.
            CancellerKind::Nonlinear => vec![vec![X], vec![XConj], vec![X, X, XConj]],
            CancellerKind::Cascaded => vec![
                vec![X],
                vec![XConj],
                vec![X, X, X],
                vec![X, X, XConj],
                vec![X, XConj, XConj],
                vec![XConj, XConj, XConj],
            ],
        }
    }
}

impl fmt::Display for CancellerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for CancellerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CancellerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown canceller {s:?}")))
    }
}

impl BasisSpec {
    /// Proposed canceller with every term at memory `l`, lags combined
    /// across factors.
    pub fn proposed(l: usize) -> Self {
        Self {
            constant: true,
            terms: proposed_factor_sets()
                .iter()
                .map(|f| BasisTerm::new(f, l, Lags::Tensor))
                .collect(),
        }
    }

    /// Memory profile used in the experiments: linear terms span the
    /// channel, the dominant PA term `x²x̄` is delayed as a whole, and the
    /// remaining products are memoryless unless configured otherwise.
    pub fn for_experiment(kind: CancellerKind, mem: &CancellerMemory) -> Self {
        let third = [Factor::X, Factor::X, Factor::XConj];
        let terms = kind
            .factor_sets()
            .into_iter()
            .map(|f| {
                let memory = if f.len() == 1 {
                    mem.linear
                } else if f == third || kind != CancellerKind::Proposed {
                    mem.third_order
                } else {
                    mem.other
                };
                BasisTerm::new(&f, memory, Lags::Shared)
            })
            .collect();
        Self {
            constant: true,
            terms,
        }
    }

    pub fn width(&self) -> usize {
        usize::from(self.constant) + self.terms.iter().map(BasisTerm::width).sum::<usize>()
    }

    /// Largest lag used by any column.
    pub fn max_lag(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.memory.saturating_sub(1))
            .max()
            .unwrap_or(0)
    }
}

/// Baseline cancellers at a uniform memory `l`. Product terms are delayed
/// as a whole (a single convolution after the nonlinearity).
pub fn baseline_spec(kind: CancellerKind, l: usize) -> BasisSpec {
    BasisSpec {
        constant: true,
        terms: kind
            .factor_sets()
            .into_iter()
            .map(|f| BasisTerm::new(&f, l, Lags::Shared))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnBlock {
    pub label: String,
    pub columns: Range<usize>,
    pub lag_tuples: Vec<Vec<usize>>,
}

/// Column-major regressor matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub columns: Vec<Vec<Complex64>>,
    pub blocks: Vec<ColumnBlock>,
    pub rows: usize,
}

impl DesignMatrix {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn block(&self, label: &str) -> Option<&ColumnBlock> {
        self.blocks.iter().find(|b| b.label == label)
    }

    /// `Ψ·w`.
    pub fn apply(&self, w: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (col, &wk) in self.columns.iter().zip(w) {
            if wk == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, &c) in out.iter_mut().zip(col) {
                *o += c * wk;
            }
        }
        out
    }

    /// Label and lag tuple of every column.
    pub fn column_labels(&self) -> Vec<(String, Vec<usize>)> {
        self.blocks
            .iter()
            .flat_map(|b| {
                b.lag_tuples
                    .iter()
                    .map(move |t| (b.label.clone(), t.clone()))
            })
            .collect()
    }
}

/// Builds the regressors for output samples `rows` of `x`. Samples before
/// the start of `x` are taken as zero, the transmitter being silent there.
pub fn build_design_matrix(
    x: &[Complex64],
    spec: &BasisSpec,
    rows: Range<usize>,
) -> Result<DesignMatrix> {
    if rows.end > x.len() {
        return Err(Error::InsufficientSamples {
            needed: rows.end,
            available: x.len(),
        });
    }
    let n = rows.len();
    let zero = Complex64::new(0.0, 0.0);
    let lagged = |f: Factor, l: usize, i: usize| if i >= l { f.eval(x[i - l]) } else { zero };

    let mut columns = Vec::with_capacity(spec.width());
    let mut blocks = Vec::with_capacity(spec.terms.len() + 1);
    if spec.constant {
        blocks.push(ColumnBlock {
            label: "1".into(),
            columns: 0..1,
            lag_tuples: vec![Vec::new()],
        });
        columns.push(vec![Complex64::new(1.0, 0.0); n]);
    }
    for term in &spec.terms {
        let start = columns.len();
        let tuples = term.lag_tuples();
        for t in &tuples {
            let col = rows
                .clone()
                .map(|i| {
                    term.factors
                        .iter()
                        .zip(t)
                        .map(|(&f, &l)| lagged(f, l, i))
                        .product()
                })
                .collect();
            columns.push(col);
        }
        blocks.push(ColumnBlock {
            label: term.label(),
            columns: start..columns.len(),
            lag_tuples: tuples,
        });
    }
    Ok(DesignMatrix {
        columns,
        blocks,
        rows: n,
    })
}
