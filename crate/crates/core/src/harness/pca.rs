use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Two-component principal-axis projection fitted on a pooled point set.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    /// Projected coordinates: actual points first, then synthetic.
    pub coords: Vec<[f64; 2]>,
    /// Variance fraction of every component, nonincreasing.
    pub explained_variance: Vec<f64>,
    pub mean: Vec<f64>,
    pub components: [Vec<f64>; 2],
}

impl PcaProjection {
    pub fn project(&self, x: &[f64]) -> [f64; 2] {
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        let dot = |c: &[f64]| c.iter().zip(&centered).map(|(a, b)| a * b).sum();
        [dot(&self.components[0]), dot(&self.components[1])]
    }

    pub fn reconstruct(&self, coord: [f64; 2]) -> Vec<f64> {
        self.mean
            .iter()
            .enumerate()
            .map(|(i, m)| m + coord[0] * self.components[0][i] + coord[1] * self.components[1][i])
            .collect()
    }
}

pub fn pca_project(actual: &[Vec<f64>], synthetic: &[Vec<f64>]) -> Result<PcaProjection> {
    let points: Vec<&Vec<f64>> = actual.iter().chain(synthetic).collect();
    let n = points.len();
    if n < 3 {
        return Err(Error::Experiment(format!(
            "PCA needs at least 3 points, got {n}"
        )));
    }
    let d = points[0].len();
    if d < 2 {
        return Err(Error::Experiment("PCA needs dimension >= 2".into()));
    }
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: p.len(),
        });
    }
    let mean: Vec<f64> = (0..d)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, d, |i, j| points[i][j] - mean[j]);
    let cov = (centered.transpose() * &centered) / n as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let total: f64 = values.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::Experiment(
            "degenerate PCA input: all points identical".into(),
        ));
    }
    let component = |k: usize| -> Vec<f64> {
        let col = eig.eigenvectors.column(order[k]);
        // sign convention: largest-magnitude entry positive
        let pivot = col
            .iter()
            .fold(0.0f64, |m, &v| if v.abs() > m.abs() { v } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        col.iter().map(|v| v * sign).collect()
    };
    let mut proj = PcaProjection {
        coords: Vec::with_capacity(n),
        explained_variance: values.iter().map(|v| v / total).collect(),
        mean,
        components: [component(0), component(1)],
    };
    proj.coords = points.iter().map(|p| proj.project(p)).collect();
    Ok(proj)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_data() {
        let pts: Vec<Vec<f64>> = (0..10)
            .map(|i| {
                let t = i as f64;
                vec![1.0 + t, 2.0 - 2.0 * t, 0.5 * t, 3.0]
            })
            .collect();
        let p = pca_project(&pts[..6], &pts[6..]).unwrap();
        assert!(p.explained_variance[1] < 1e-9);
        assert!((p.explained_variance[0] - 1.0).abs() < 1e-9);
        assert_eq!(p.coords.len(), 10);
    }

    #[test]
    fn rank_two_reconstruction_is_exact() {
        let (u, v) = ([1.0, 0.0, 2.0, -1.0, 0.5], [0.0, 3.0, -1.0, 1.0, 2.0]);
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let (a, b) = ((i as f64 * 0.7).sin() * 2.0, (i as f64 * 1.3).cos());
                (0..5).map(|j| 0.3 + a * u[j] + b * v[j]).collect()
            })
            .collect();
        let p = pca_project(&pts, &[]).unwrap();
        for (x, c) in pts.iter().zip(&p.coords) {
            for (a, b) in p.reconstruct(*c).iter().zip(x) {
                assert!((a - b).abs() < 1e-9);
            }
        }
        let ev = &p.explained_variance;
        assert!(ev.windows(2).all(|w| w[0] >= w[1]));
        assert!(ev.iter().sum::<f64>() <= 1.0 + 1e-12);
    }

    #[test]
    fn rejects_degenerate_input() {
        let same = vec![vec![0.2, 0.8]; 5];
        assert!(pca_project(&same, &[]).is_err());
        assert!(pca_project(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[]).is_err());
        assert!(pca_project(&[vec![0.0], vec![1.0], vec![2.0]], &[]).is_err());
    }
}
