//! Dense 2-D tensors in row-major order.
//!
//! A `Tensor` is a plain value type; it only participates in differentiation
//! when an op on a [`crate::tape::Tape`] has stamped it with a node handle.

use thiserror::Error;

/// Handle into a tape's node list.
pub type NodeId = usize;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum TensorError {
    #[error("shape mismatch: expected {expected}, got {got} in {op}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        got: String,
    },
    #[error("value length {len} does not match shape {rows}x{cols}")]
    LengthMismatch { rows: usize, cols: usize, len: usize },
    #[error("non-finite value at index {index} in {context}")]
    NonFinite { context: &'static str, index: usize },
    #[error("log of non-positive value {value} at index {index}")]
    NonPositiveLog { value: f64, index: usize },
    #[error("edge weight vector has length {got}, adjacency expects {expected}")]
    WeightLength { expected: usize, got: usize },
    #[error("segment id {id} out of range for {num_segments} segments")]
    SegmentOutOfRange { id: usize, num_segments: usize },
    #[error("concat of an empty tensor list")]
    EmptyConcat,
    #[error("{op} expects a scalar (1x1) tensor, got {rows}x{cols}")]
    NotScalar { op: &'static str, rows: usize, cols: usize },
    #[error("tensor has no tape node; it was not produced by tape ops")]
    NoNode,
}

/// Dense row-major matrix of f64, optionally bound to a tape node.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    node: Option<NodeId>,
}

impl Tensor {
    /// Builds a tensor from row-major values, rejecting non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, TensorError> {
        if values.len() != rows * cols {
            return Err(TensorError::LengthMismatch { rows, cols, len: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(TensorError::NonFinite { context: "Tensor::from_vec", index: i });
        }
        Ok(Self { rows, cols, values, node: None })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, values: vec![0.0; rows * cols], node: None }
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        Self { rows, cols, values: vec![value; rows * cols], node: None }
    }

    pub fn scalar(value: f64) -> Self {
        Self { rows: 1, cols: 1, values: vec![value], node: None }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            t.values[i * n + i] = 1.0;
        }
        t
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    /// Scalar value of a 1x1 tensor.
    pub fn item(&self) -> Result<f64, TensorError> {
        if self.rows == 1 && self.cols == 1 {
            Ok(self.values[0])
        } else {
            Err(TensorError::NotScalar { op: "item", rows: self.rows, cols: self.cols })
        }
    }

    pub fn node(&self) -> Option<NodeId> {
        self.node
    }

    /// Copy of this tensor with no tape handle (frozen).
    pub fn detach(&self) -> Tensor {
        Tensor { rows: self.rows, cols: self.cols, values: self.values.clone(), node: None }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn with_node(rows: usize, cols: usize, values: Vec<f64>, node: NodeId) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values, node: Some(node) }
    }

    pub(crate) fn values_mut(&mut self) -> &mut Vec<f64> {
        &mut self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_checks_length_and_finiteness() {
        assert!(Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(matches!(
            Tensor::from_vec(1, 2, vec![1.0, f64::NAN]),
            Err(TensorError::NonFinite { index: 1, .. })
        ));
        let t = Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.get(1, 0), 3.0);
        assert_eq!(t.shape(), (2, 2));
    }

    #[test]
    fn item_requires_scalar() {
        assert_eq!(Tensor::scalar(4.5).item().unwrap(), 4.5);
        assert!(Tensor::zeros(2, 1).item().is_err());
    }

    #[test]
    fn detach_drops_node_and_keeps_values() {
        let t = Tensor::with_node(1, 2, vec![1.0, 2.0], 7);
        assert_eq!(t.node(), Some(7));
        let d = t.detach();
        assert_eq!(d.node(), None);
        assert_eq!(d.data(), t.data());
    }
}
