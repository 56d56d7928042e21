//! Matrix form of a fixed lifting transform, its condition number and the
//! sparsity (ISE) curve.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LineGraph;
use crate::lifting::{forward, CoefficientSet, LiftingConfig, LiftingRecord};
use crate::scalar::Scalar;

/// Forward and inverse matrices of one lifting record.
///
/// Rows of `forward` (and columns of `inverse`) follow the coefficient order:
/// details in removal order, then the surviving scaling ids ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformMatrices<T> {
    pub m: usize,
    /// Row-major `m × m` forward matrix R̃.
    pub forward: Vec<T>,
    /// Row-major `m × m` inverse matrix R.
    pub inverse: Vec<T>,
    /// Vertex id owning each coefficient row.
    pub row_ids: Vec<usize>,
    /// Number of detail rows; the rest are scaling rows.
    pub detail_rows: usize,
}

impl<T: Scalar> TransformMatrices<T> {
    /// Assembles both matrices by pushing canonical vectors through the record.
    pub fn from_record(record: &LiftingRecord<T>) -> Result<Self> {
        let m = record.m;
        let columns: Vec<Vec<T>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![T::zero(); m];
                e[j] = T::one();
                record.transform(&e).map(|c| c.to_ordered())
            })
            .collect::<Result<_>>()?;
        let template = record.transform(&vec![T::zero(); m])?;
        let detail_rows = template.details.len();
        let inv_columns: Vec<Vec<T>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut coeffs = template.clone();
                let mut ordered = vec![T::zero(); m];
                ordered[j] = T::one();
                coeffs.details.copy_from_slice(&ordered[..detail_rows]);
                coeffs.scaling.copy_from_slice(&ordered[detail_rows..]);
                crate::lifting::inverse(&coeffs, record)
            })
            .collect::<Result<_>>()?;

        let mut fwd = vec![T::zero(); m * m];
        let mut inv = vec![T::zero(); m * m];
        for j in 0..m {
            for i in 0..m {
                fwd[i * m + j] = columns[j][i];
                inv[i * m + j] = inv_columns[j][i];
            }
        }
        let row_ids = template.detail_ids.iter().chain(&template.scaling_ids).copied().collect();
        Ok(Self { m, forward: fwd, inverse: inv, row_ids, detail_rows })
    }

    pub fn forward_at(&self, row: usize, col: usize) -> T {
        self.forward[row * self.m + col]
    }

    pub fn inverse_at(&self, row: usize, col: usize) -> T {
        self.inverse[row * self.m + col]
    }

    /// ∞-norm of `R̃R − I`.
    pub fn identity_residual(&self) -> f64 {
        let m = self.m;
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let s: f64 =
                            (0..m).map(|k| self.forward_at(i, k).as_f64() * self.inverse_at(k, j).as_f64()).sum();
                        (s - if i == j { 1.0 } else { 0.0 }).abs()
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Euclidean norm of each forward row: the dual wavelet and dual scaling
    /// vectors in coefficient order.
    pub fn forward_row_norms(&self) -> Vec<T> {
        self.forward.chunks(self.m).map(|row| row.iter().map(|&x| x * x).sum::<T>().sqrt()).collect()
    }

    pub fn forward_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.m, self.m, self.forward.iter().map(|x| x.as_f64()))
    }

    pub fn inverse_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.m, self.m, self.inverse.iter().map(|x| x.as_f64()))
    }
}

/// Euclidean norm of each detail row of R̃ (the dual wavelets), in removal
/// order, without forming the inverse.
pub fn detail_row_norms<T: Scalar>(record: &LiftingRecord<T>) -> Result<Vec<T>> {
    let m = record.m;
    let mut sums = vec![T::zero(); record.stages.len()];
    let mut e = vec![T::zero(); m];
    for j in 0..m {
        e[j] = T::one();
        let c = record.transform(&e)?;
        for (s, d) in sums.iter_mut().zip(&c.details) {
            *s += *d * *d;
        }
        e[j] = T::zero();
    }
    Ok(sums.into_iter().map(|s| s.sqrt()).collect())
}

/// Builds the matrices for the removal order `forward` picks on this graph.
///
/// The split order depends only on the graph and seed, so the zero signal
/// yields the same record as any other input.
pub fn build_matrices<T: Scalar>(lg: &LineGraph<T>, config: &LiftingConfig) -> Result<TransformMatrices<T>> {
    let (_, record) = forward(&vec![T::zero(); lg.m()], lg, config)?;
    TransformMatrices::from_record(&record)
}

/// `σ_max / σ_min` of a square matrix.
pub fn condition_number_of(matrix: &DMatrix<f64>) -> Result<f64> {
    let sv = matrix.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > max * f64::EPSILON * matrix.nrows() as f64) {
        return Err(Error::NotInvertible);
    }
    Ok(max / min)
}

/// Condition number of the forward matrix R̃.
pub fn condition_number<T: Scalar>(matrices: &TransformMatrices<T>) -> Result<f64> {
    condition_number_of(&matrices.forward_matrix())
}

/// Integrated squared error as more details are retained.
///
/// `ise[t - 1]` keeps the scaling coefficients and the `t - 1` largest details
/// by magnitude, for `t = 1..=m - τ + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityCurve {
    pub ise: Vec<f64>,
    /// Number of graphs averaged into the curve.
    pub graphs: usize,
}

impl SparsityCurve {
    /// Pointwise mean of curves of equal length.
    pub fn average(curves: &[SparsityCurve]) -> Result<SparsityCurve> {
        let first = curves.first().ok_or(Error::EmptyInput("no sparsity curves to average".into()))?;
        if curves.iter().any(|c| c.ise.len() != first.ise.len()) {
            return Err(Error::InvalidConfig("sparsity curves differ in length".into()));
        }
        let q = curves.len() as f64;
        let ise = (0..first.ise.len()).map(|t| curves.iter().map(|c| c.ise[t]).sum::<f64>() / q).collect();
        Ok(SparsityCurve { ise, graphs: curves.iter().map(|c| c.graphs).sum() })
    }

    /// Largest increase between consecutive points; `0` for a monotone curve.
    pub fn max_increase(&self) -> f64 {
        self.ise.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Detail indices sorted by decreasing magnitude, ties by position.
pub fn magnitude_order<T: Scalar>(details: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..details.len()).collect();
    idx.sort_by(|&a, &b| details[b].abs().partial_cmp(&details[a].abs()).unwrap().then(a.cmp(&b)));
    idx
}

/// Reconstruction from the scaling coefficients and the chosen details.
pub fn reconstruct_subset<T: Scalar>(
    coeffs: &CoefficientSet<T>,
    record: &LiftingRecord<T>,
    keep: &[usize],
) -> Result<Vec<T>> {
    let mut kept = coeffs.clone();
    kept.details.iter_mut().for_each(|d| *d = T::zero());
    for &i in keep {
        kept.details[i] = coeffs.details[i];
    }
    crate::lifting::inverse(&kept, record)
}

/// Sum of squared differences.
pub fn squared_error<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.as_f64() - y.as_f64()).powi(2)).sum()
}

/// Sparsity curve of a noiseless signal on one graph.
pub fn sparsity_curve<T: Scalar>(truth: &[T], lg: &LineGraph<T>, config: &LiftingConfig) -> Result<SparsityCurve> {
    let (coeffs, record) = forward(truth, lg, config)?;
    let order = magnitude_order(&coeffs.details);
    let ise = (0..=order.len())
        .map(|kept| reconstruct_subset(&coeffs, &record, &order[..kept]).map(|g| squared_error(&g, truth)))
        .collect::<Result<_>>()?;
    Ok(SparsityCurve { ise, graphs: 1 })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::graph::{LineVertex, MetricMode};
    use crate::lifting::{IntegralScheme, PredictionScheme, Variant};

    fn path3() -> LineGraph<f64> {
        let coords = [[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]];
        let vertices = coords
            .iter()
            .enumerate()
            .map(|(i, &c)| LineVertex { id: i as u64, source_edge: None, coord: Some(c), length: None, value: None })
            .collect();
        LineGraph::from_parts(vertices, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn trivial_condition_numbers() {
        assert_abs_diff_eq!(condition_number_of(&DMatrix::identity(4, 4)).unwrap(), 1.0, epsilon = 1e-12);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0]));
        assert_abs_diff_eq!(condition_number_of(&d).unwrap(), 4.0, epsilon = 1e-12);
        assert!(condition_number_of(&DMatrix::from_element(2, 2, 1.0)).is_err());
    }

    #[test]
    fn three_vertex_matrix_by_hand() {
        // Sum integrals on the path 0-1-2 with spacings 1 and 2: I = (1, 3, 2).
        // Vertex 0 goes first; its only neighbour 1 predicts it with weight 1.
        // Then I_1 = 3 + 1 = 4 and b_1 = I_1 I_0 / I_1^2 = 1/4.
        // d = f0 - f1, c1 = f1 + d/4 = (f0 + 3 f1)/4, c2 = f2.
        let lg = path3();
        let cfg = LiftingConfig::new(Variant::new(IntegralScheme::Sum, PredictionScheme::InverseDistance, MetricMode::Coordinate));
        let mats = build_matrices(&lg, &cfg).unwrap();
        assert_eq!(mats.row_ids, vec![0, 1, 2]);
        let expected = [1.0, -1.0, 0.0, 0.25, 0.75, 0.0, 0.0, 0.0, 1.0];
        for (a, b) in mats.forward.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(mats.identity_residual() < 1e-14);
    }

    #[test]
    fn constant_vector_has_zero_detail_rows() {
        let lg = path3();
        let mats = build_matrices(&lg, &LiftingConfig::default()).unwrap();
        for i in 0..mats.detail_rows {
            let s: f64 = (0..3).map(|j| mats.forward_at(i, j)).sum();
            assert!(s.abs() < 1e-14);
        }
    }

    #[test]
    fn sparsity_curve_endpoints() {
        let lg = path3();
        let cfg = LiftingConfig::default();
        let curve = sparsity_curve(&[2.0, -1.0, 5.0], &lg, &cfg).unwrap();
        assert_eq!(curve.ise.len(), 2);
        assert!(curve.ise[1] <= 1e-20);
        let flat = sparsity_curve(&[3.0; 3], &lg, &cfg).unwrap();
        assert!(flat.ise[0] <= 1e-24);
    }

    #[test]
    fn magnitude_order_breaks_ties_by_position() {
        assert_eq!(magnitude_order(&[1.0, -3.0, 3.0, 0.5]), vec![1, 2, 0, 3]);
    }

    #[test]
    fn averaging_curves() {
        let a = SparsityCurve { ise: vec![4.0, 2.0, 0.0], graphs: 1 };
        let b = SparsityCurve { ise: vec![2.0, 3.0, 0.0], graphs: 1 };
        let avg = SparsityCurve::average(&[a, b.clone()]).unwrap();
        assert_eq!(avg.ise, vec![3.0, 2.5, 0.0]);
        assert_eq!(avg.graphs, 2);
        assert_eq!(b.max_increase(), 1.0);
        assert!(SparsityCurve::average(&[]).is_err());
    }
}
