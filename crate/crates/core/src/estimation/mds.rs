use std::collections::VecDeque;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::graph::Network;

/// Hop distances over observed edges, ignoring direction. Unreachable pairs
/// get the largest finite distance plus one.
pub(crate) fn shortest_path_distances(net: &Network) -> Vec<Vec<f64>> {
    let n = net.node_count();
    let neighbours: Vec<Vec<usize>> = (0..n).map(|i| net.undirected_neighbours(i)).collect();
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    for (src, row) in dist.iter_mut().enumerate() {
        row[src] = 0.0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &neighbours[u] {
                if row[v].is_infinite() {
                    row[v] = row[u] + 1.0;
                    queue.push_back(v);
                }
            }
        }
    }
    let diameter = dist
        .iter()
        .flatten()
        .filter(|d| d.is_finite())
        .fold(0.0f64, |a, &b| a.max(b));
    for d in dist.iter_mut().flatten() {
        if d.is_infinite() {
            *d = diameter + 1.0;
        }
    }
    dist
}

/// Classical (Torgerson) multidimensional scaling of a distance matrix into
/// `dim` coordinates. Eigenvector signs are fixed so the largest-magnitude
/// component of each axis is positive.
pub fn classical_mds(dist: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let n = dist.len();
    if n == 0 {
        return Vec::new();
    }
    let sq = DMatrix::from_fn(n, n, |i, j| dist[i][j] * dist[i][j]);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).mean()).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));

    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&c)));

    let mut coords = vec![vec![0.0; dim]; n];
    for (axis, &col) in order.iter().take(dim).enumerate() {
        let scale = eig.eigenvalues[col].max(0.0).sqrt();
        let v = eig.eigenvectors.column(col);
        let pivot = (0..n)
            .max_by(|&a, &c| v[a].abs().total_cmp(&v[c].abs()).then(c.cmp(&a)))
            .unwrap_or(0);
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, row) in coords.iter_mut().enumerate() {
            row[axis] = sign * scale * v[i];
        }
    }
    coords
}
