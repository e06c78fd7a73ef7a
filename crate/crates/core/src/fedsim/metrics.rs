//! Analysis metrics over similarity matrices and reconstructions.

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::ies::Reconstruction;

/// `(1/K) Σ_k Σ_{n ∈ C_k} m[k][n] / Σ_n m[k][n]`, where `C_k` is client
/// k's ground-truth cluster.
pub fn same_cluster_weight_proportion(m: ArrayView2<'_, f64>, clusters: &[usize]) -> Result<f64> {
    let k = m.nrows();
    if m.ncols() != k || k == 0 {
        return Err(Error::invalid(format!(
            "expected a non-empty square matrix, got {:?}",
            m.dim()
        )));
    }
    if clusters.len() != k {
        return Err(Error::invalid(format!(
            "{} cluster labels for {k} clients",
            clusters.len()
        )));
    }
    let num_clusters = clusters.iter().max().map_or(0, |&c| c + 1);
    if let Some(c) = (0..num_clusters).find(|c| !clusters.contains(c)) {
        return Err(Error::invalid(format!("cluster {c} is empty")));
    }
    let mut total = 0.0;
    for (i, row) in m.rows().into_iter().enumerate() {
        let mass: f64 = row.sum();
        if mass.is_nan() || mass <= 0.0 {
            return Err(Error::invalid(format!("row {i} has no positive mass")));
        }
        let same: f64 = row
            .iter()
            .zip(clusters)
            .filter(|(_, &c)| c == clusters[i])
            .map(|(x, _)| x)
            .sum();
        total += same / mass;
    }
    Ok(total / k as f64)
}

fn bin_of(w: f64, num_bins: usize) -> usize {
    let x = ((w + 1.0) / 2.0 * num_bins as f64).floor();
    (x.max(0.0) as usize).min(num_bins - 1)
}

/// Per-bin fraction of reference edges whose counterpart lands in the same
/// equal-width bin over `[−1, 1]`; `None` for bins with no reference edge.
pub fn bin_match_ratio(
    reference: &Reconstruction,
    other: &Reconstruction,
    num_bins: usize,
) -> Result<Vec<Option<f64>>> {
    if num_bins == 0 {
        return Err(Error::invalid("num_bins must be >= 1"));
    }
    if reference.weights.len() != other.weights.len() {
        return Err(Error::invalid(format!(
            "reconstructions cover {} and {} edges",
            reference.weights.len(),
            other.weights.len()
        )));
    }
    let mut total = vec![0usize; num_bins];
    let mut hits = vec![0usize; num_bins];
    for (&a, &b) in reference.weights.iter().zip(&other.weights) {
        let bin = bin_of(a, num_bins);
        total[bin] += 1;
        if bin_of(b, num_bins) == bin {
            hits[bin] += 1;
        }
    }
    Ok(total
        .iter()
        .zip(&hits)
        .map(|(&t, &h)| (t > 0).then(|| h as f64 / t as f64))
        .collect())
}

/// Mean and sample standard deviation (`n − 1`); the std of one value is 0.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    #[test]
    fn proportion_cases() {
        let ones = Array2::<f64>::ones((4, 4));
        assert_eq!(
            same_cluster_weight_proportion(ones.view(), &[0; 4]).unwrap(),
            1.0
        );

        let mut block = Array2::<f64>::zeros((4, 4));
        for i in 0..4 {
            for j in 0..4 {
                if i / 2 == j / 2 {
                    block[[i, j]] = 1.0;
                }
            }
        }
        let clusters = [0, 0, 1, 1];
        assert_eq!(
            same_cluster_weight_proportion(block.view(), &clusters).unwrap(),
            1.0
        );

        let uniform = Array2::<f64>::from_elem((10, 10), 0.3);
        let clusters: Vec<usize> = (0..10).map(|i| i / 5).collect();
        let p = same_cluster_weight_proportion(uniform.view(), &clusters).unwrap();
        assert!((p - 0.5).abs() < 1e-12);

        assert!(same_cluster_weight_proportion(ones.view(), &[0, 0, 2, 2]).is_err());
        assert!(same_cluster_weight_proportion(ones.view(), &[0, 0, 1]).is_err());
    }

    #[test]
    fn bin_match_identical_and_shifted() {
        let a = Reconstruction {
            weights: vec![-0.9, -0.5, 0.0, 0.5, 0.9, 0.95],
        };
        let r = bin_match_ratio(&a, &a, 5).unwrap();
        assert!(r.iter().flatten().all(|&x| x == 1.0));
        assert_eq!(r.iter().flatten().count(), 5);

        // every bin is 0.4 wide, so +0.4 moves each weight one bin up
        let src = Reconstruction {
            weights: vec![-0.9, -0.5, -0.1, 0.3],
        };
        let shifted = Reconstruction {
            weights: src.weights.iter().map(|w| w + 0.4).collect(),
        };
        let r = bin_match_ratio(&src, &shifted, 5).unwrap();
        assert!(r.iter().flatten().all(|&x| x == 0.0));

        assert!(bin_match_ratio(&src, &a, 5).is_err());
        assert!(bin_match_ratio(&src, &src, 0).is_err());
    }

    #[test]
    fn bin_match_independent_uniform() {
        let mut rng = crate::rng::seeded(11);
        let mut draw = || Reconstruction {
            weights: (0..100_000).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let a = draw();
        let b = draw();
        for r in bin_match_ratio(&a, &b, 5).unwrap() {
            assert!((r.unwrap() - 0.2).abs() < 0.01);
        }
    }

    #[test]
    fn endpoints_land_in_edge_bins() {
        assert_eq!(bin_of(-1.0, 5), 0);
        assert_eq!(bin_of(1.0, 5), 4);
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), Some((7.0, 0.0)));
        assert_eq!(mean_std(&[]), None);
    }
}
