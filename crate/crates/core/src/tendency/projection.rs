use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::ArrayView2;

use crate::error::{Error, Result};

/// Project rows onto the two leading principal directions of the column
/// covariance. Each direction's sign is fixed so its largest-magnitude
/// loading is positive. Single-column data lies on the first axis.
pub fn project_2d(data: ArrayView2<'_, f64>) -> Result<Vec<(f64, f64)>> {
    let (n, d) = data.dim();
    if d == 0 {
        return Err(Error::domain("projection needs at least one column"));
    }
    if n < 2 {
        return Err(Error::domain("projection needs at least 2 rows"));
    }
    let means: Vec<f64> = data
        .columns()
        .into_iter()
        .map(|c| c.sum() / n as f64)
        .collect();
    let centered = DMatrix::from_fn(n, d, |i, j| data[[i, j]] - means[j]);
    let cov = centered.transpose() * &centered / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let axis = |which: usize| {
        let mut v = eig.eigenvectors.column(order[which]).clone_owned();
        let lead = v
            .iter()
            .copied()
            .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.neg_mut();
        }
        v
    };
    let xs = &centered * axis(0);
    if d == 1 {
        return Ok(xs.iter().map(|&x| (x, 0.0)).collect());
    }
    let ys = &centered * axis(1);
    Ok(xs.iter().zip(ys.iter()).map(|(&x, &y)| (x, y)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn rank_one_data_has_flat_second_axis() {
        let data = array![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [-3.0, -3.0]];
        let p = project_2d(data.view()).unwrap();
        assert!(p.iter().all(|(_, y)| y.abs() < 1e-12));
        // Largest loading positive: points further along +x+y project positively.
        assert!(p[2].0 > p[1].0);
    }

    #[test]
    fn two_dimensional_data_keeps_distances() {
        let data = array![[0.3, -1.2], [1.1, 0.4], [-0.7, 0.9], [0.2, 0.1], [-0.9, -0.2]];
        let p = project_2d(data.view()).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let orig = ((data[[i, 0]] - data[[j, 0]]).powi(2) + (data[[i, 1]] - data[[j, 1]]).powi(2)).sqrt();
                let proj = ((p[i].0 - p[j].0).powi(2) + (p[i].1 - p[j].1).powi(2)).sqrt();
                assert!((orig - proj).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn one_column_is_centered_on_the_first_axis() {
        let data = array![[1.0], [3.0], [5.0]];
        assert_eq!(project_2d(data.view()).unwrap(), vec![(-2.0, 0.0), (0.0, 0.0), (2.0, 0.0)]);
        assert!(project_2d(Array2::<f64>::zeros((4, 0)).view()).is_err());
    }
}
