use std::path::Path;

use ndarray::{Array1, Array2, Zip};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Weights and biases of the two GCN layers.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnParams {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

impl GcnParams {
    pub fn zeros(d_x: usize, hidden: usize, num_classes: usize) -> Self {
        Self {
            w1: Array2::zeros((d_x, hidden)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((hidden, num_classes)),
            b2: Array1::zeros(num_classes),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot(d_x: usize, hidden: usize, num_classes: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let mut init = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..=limit))
        };
        let w1 = init(d_x, hidden);
        let w2 = init(hidden, num_classes);
        Self {
            w1,
            b1: Array1::zeros(hidden),
            w2,
            b2: Array1::zeros(num_classes),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), self.hidden_dim(), self.num_classes())
    }

    pub fn input_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.w2.ncols()
    }

    pub fn same_shape(&self, other: &GcnParams) -> bool {
        self.w1.dim() == other.w1.dim()
            && self.b1.dim() == other.b1.dim()
            && self.w2.dim() == other.w2.dim()
            && self.b2.dim() == other.b2.dim()
    }

    /// Flat views of every tensor in a fixed order.
    pub fn tensors(&self) -> [(&'static str, &[f64]); 4] {
        [
            ("w1", self.w1.as_slice().expect("standard layout")),
            ("b1", self.b1.as_slice().expect("standard layout")),
            ("w2", self.w2.as_slice().expect("standard layout")),
            ("b2", self.b2.as_slice().expect("standard layout")),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&'static str, &mut [f64]); 4] {
        [
            ("w1", self.w1.as_slice_mut().expect("standard layout")),
            ("b1", self.b1.as_slice_mut().expect("standard layout")),
            ("w2", self.w2.as_slice_mut().expect("standard layout")),
            ("b2", self.b2.as_slice_mut().expect("standard layout")),
        ]
    }

    /// Name of the first tensor holding a NaN or infinity.
    pub fn first_non_finite(&self) -> Option<&'static str> {
        self.tensors()
            .into_iter()
            .find(|(_, t)| t.iter().any(|x| !x.is_finite()))
            .map(|(name, _)| name)
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    /// Squared Frobenius distance summed over all tensors.
    pub fn sq_distance(&self, other: &GcnParams) -> f64 {
        self.tensors()
            .iter()
            .zip(other.tensors().iter())
            .flat_map(|((_, a), (_, b))| a.iter().zip(b.iter()))
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    }

    /// `self += alpha * other`, elementwise.
    pub fn add_scaled(&mut self, alpha: f64, other: &GcnParams) {
        Zip::from(&mut self.w1)
            .and(&other.w1)
            .for_each(|a, &b| *a += alpha * b);
        Zip::from(&mut self.b1)
            .and(&other.b1)
            .for_each(|a, &b| *a += alpha * b);
        Zip::from(&mut self.w2)
            .and(&other.w2)
            .for_each(|a, &b| *a += alpha * b);
        Zip::from(&mut self.b2)
            .and(&other.b2)
            .for_each(|a, &b| *a += alpha * b);
    }

    /// `self += alpha * (a - b)`, elementwise.
    pub fn add_scaled_difference(&mut self, alpha: f64, a: &GcnParams, b: &GcnParams) {
        for ((out, x), y) in self
            .tensors_mut()
            .into_iter()
            .zip(a.tensors())
            .zip(b.tensors())
        {
            for ((o, &xi), &yi) in out.1.iter_mut().zip(x.1).zip(y.1) {
                *o += alpha * (xi - yi);
            }
        }
    }

    /// `Σ weights[i] · params[i]`.
    pub fn weighted_sum(params: &[&GcnParams], weights: &[f64]) -> Result<GcnParams> {
        let first = params
            .first()
            .ok_or_else(|| Error::invalid("weighted sum of zero parameter sets"))?;
        if params.len() != weights.len() {
            return Err(Error::invalid(
                "weights and parameter sets differ in length",
            ));
        }
        let mut out = first.zeros_like();
        for (i, (p, &w)) in params.iter().zip(weights).enumerate() {
            if !p.same_shape(first) {
                return Err(Error::invalid(format!(
                    "parameter set {i} has a different shape"
                )));
            }
            out.add_scaled(w, p);
        }
        Ok(out)
    }
}

/// Debug dump as `tensor,row,col,value`; bias vectors use row 0.
pub fn write_params_csv(params: &GcnParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(["tensor", "row", "col", "value"])?;
    let mut matrix = |name: &str, m: &Array2<f64>| -> Result<()> {
        for ((r, c), x) in m.indexed_iter() {
            w.write_record([
                name.to_string(),
                r.to_string(),
                c.to_string(),
                format!("{x:?}"),
            ])?;
        }
        Ok(())
    };
    matrix("w1", &params.w1)?;
    matrix(
        "b1",
        &params.b1.view().insert_axis(ndarray::Axis(0)).to_owned(),
    )?;
    matrix("w2", &params.w2)?;
    matrix(
        "b2",
        &params.b2.view().insert_axis(ndarray::Axis(0)).to_owned(),
    )?;
    w.flush().map_err(|e| Error::io(path, e))
}
