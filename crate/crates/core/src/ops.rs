//! Operator algebra `z ⊕ (x ⊗ y)` and the reference aggregation primitive.
//!
//! [`ap_reference`] is the plain double loop over destinations and their
//! in-edges. Every other aggregation path in the crate is tested against it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::element::Element;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::graph::CsrGraph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Copies the vertex operand and ignores the edge operand.
    CopyLhs,
    /// Copies the edge operand and ignores the vertex operand.
    CopyRhs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReduceOp {
    Sum,
    Max,
    Min,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 6] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::CopyLhs,
        BinaryOp::CopyRhs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "add",
            BinaryOp::Sub => "sub",
            BinaryOp::Mul => "mul",
            BinaryOp::Div => "div",
            BinaryOp::CopyLhs => "copylhs",
            BinaryOp::CopyRhs => "copyrhs",
        }
    }

    pub fn needs_edge_features(self) -> bool {
        !matches!(self, BinaryOp::CopyLhs)
    }

    #[inline]
    pub fn eval<T: Element>(self, x: T, y: T) -> Result<T> {
        Ok(match self {
            BinaryOp::Add => x.add(y),
            BinaryOp::Sub => x.sub(y),
            BinaryOp::Mul => x.mul(y),
            BinaryOp::Div => x.div(y).ok_or(Error::DivisionByZero)?,
            BinaryOp::CopyLhs => x,
            BinaryOp::CopyRhs => y,
        })
    }
}

impl ReduceOp {
    pub const ALL: [ReduceOp; 3] = [ReduceOp::Sum, ReduceOp::Max, ReduceOp::Min];

    pub fn name(self) -> &'static str {
        match self {
            ReduceOp::Sum => "sum",
            ReduceOp::Max => "max",
            ReduceOp::Min => "min",
        }
    }

    pub fn identity<T: Element>(self) -> T {
        match self {
            ReduceOp::Sum => T::zero(),
            ReduceOp::Max => T::lowest(),
            ReduceOp::Min => T::highest(),
        }
    }

    #[inline]
    pub fn fold<T: Element>(self, acc: T, x: T) -> T {
        match self {
            ReduceOp::Sum => acc.add(x),
            ReduceOp::Max => {
                if x > acc {
                    x
                } else {
                    acc
                }
            }
            ReduceOp::Min => {
                if x < acc {
                    x
                } else {
                    acc
                }
            }
        }
    }

    /// Element-wise `acc ⊕= x`.
    pub fn fold_row<T: Element>(self, acc: &mut [T], x: &[T]) {
        for (a, &b) in acc.iter_mut().zip(x) {
            *a = self.fold(*a, b);
        }
    }
}

macro_rules! impl_name_parsing {
    ($ty:ty, $what:literal) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                Self::ALL
                    .into_iter()
                    .find(|op| op.name().eq_ignore_ascii_case(s.trim()))
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown {} `{s}`", $what)))
            }
        }
    };
}

impl_name_parsing!(BinaryOp, "binary operator");
impl_name_parsing!(ReduceOp, "reduction");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub binary: BinaryOp,
    pub reduce: ReduceOp,
}

impl OperatorSpec {
    pub const fn new(binary: BinaryOp, reduce: ReduceOp) -> Self {
        OperatorSpec { binary, reduce }
    }

    /// `(copylhs, sum)`, the plain neighbor sum.
    pub const fn copy_sum() -> Self {
        Self::new(BinaryOp::CopyLhs, ReduceOp::Sum)
    }

    /// All 18 legal combinations.
    pub fn all() -> impl Iterator<Item = OperatorSpec> {
        BinaryOp::ALL
            .into_iter()
            .flat_map(|b| ReduceOp::ALL.into_iter().map(move |r| OperatorSpec::new(b, r)))
    }

    /// Folds one edge contribution into the accumulator row.
    #[inline]
    pub(crate) fn accumulate<T: Element>(
        self,
        acc: &mut [T],
        x: &[T],
        y: Option<&[T]>,
    ) -> Result<()> {
        match (self.binary, y) {
            (BinaryOp::CopyLhs, _) => self.reduce.fold_row(acc, x),
            (op, Some(y)) => {
                for ((a, &xv), &yv) in acc.iter_mut().zip(x).zip(y) {
                    *a = self.reduce.fold(*a, op.eval(xv, yv)?);
                }
            }
            (op, None) => return Err(Error::MissingEdgeFeatures(op.name())),
        }
        Ok(())
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.binary, self.reduce)
    }
}

impl FromStr for OperatorSpec {
    type Err = Error;

    /// Parses `"<binary>,<reduce>"`, e.g. `"copylhs,sum"`.
    fn from_str(s: &str) -> Result<Self> {
        let (b, r) = s
            .split_once([',', ':'])
            .ok_or_else(|| Error::InvalidParameter(format!("operator spec `{s}`")))?;
        Ok(OperatorSpec::new(b.parse()?, r.parse()?))
    }
}

/// `z ⊕ (x ⊗ y)` for a single element.
pub fn apply_elem<T: Element>(spec: OperatorSpec, x: T, y: T, z: T) -> Result<T> {
    Ok(spec.reduce.fold(z, spec.binary.eval(x, y)?))
}

/// Validates shapes and returns the feature dimension.
pub(crate) fn check_inputs<T: Element>(
    num_vertices: usize,
    num_edges: usize,
    fv: &FeatureMatrix<T>,
    fe: Option<&FeatureMatrix<T>>,
    spec: OperatorSpec,
) -> Result<usize> {
    if fv.rows() != num_vertices {
        return Err(Error::DimensionMismatch(format!(
            "vertex features have {} rows, graph has {} vertices",
            fv.rows(),
            num_vertices
        )));
    }
    match fe {
        Some(fe) if spec.binary.needs_edge_features() => {
            if fe.rows() != num_edges || fe.dim() != fv.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "edge features are {}x{}, expected {}x{}",
                    fe.rows(),
                    fe.dim(),
                    num_edges,
                    fv.dim()
                )));
            }
        }
        None if spec.binary.needs_edge_features() => {
            return Err(Error::MissingEdgeFeatures(spec.binary.name()));
        }
        _ => {}
    }
    Ok(fv.dim())
}

/// Rewrites rows that received no contribution to zero.
pub(crate) fn zero_empty_rows<T: Element>(out: &mut FeatureMatrix<T>, live: impl Fn(usize) -> bool) {
    for v in 0..out.rows() {
        if !live(v) {
            out.row_mut(v).fill(T::zero());
        }
    }
}

/// Reference aggregation: for every destination `v` in row order and every
/// in-edge `u -> v` in CSR order, `out[v] = out[v] ⊕ (fv[u] ⊗ fe[e_uv])`.
///
/// The output starts at the reduction identity; rows without in-edges are
/// reported as zero for every reduction.
pub fn ap_reference<T: Element>(
    g: &CsrGraph,
    fv: &FeatureMatrix<T>,
    fe: Option<&FeatureMatrix<T>>,
    spec: OperatorSpec,
) -> Result<FeatureMatrix<T>> {
    let d = check_inputs(g.num_vertices(), g.num_edges(), fv, fe, spec)?;
    let mut out = FeatureMatrix::filled(g.num_vertices(), d, spec.reduce.identity());
    for v in 0..g.num_vertices() {
        for (&u, &e) in g.in_neighbors(v).iter().zip(g.in_edge_ids(v)) {
            for j in 0..d {
                let y = fe.map_or(T::zero(), |fe| fe.row(e)[j]);
                let z = out.row(v)[j];
                out.row_mut(v)[j] = apply_elem(spec, fv.row(u)[j], y, z)?;
            }
        }
    }
    zero_empty_rows(&mut out, |v| g.in_degree(v) > 0);
    Ok(out)
}
