//! Prequential fading-factor G-mean tracking and the feature-based
//! baseline representation (edge density, Laplacian spectral gap).

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

/// Per-class fading recall accumulators for prequential evaluation.
///
/// With fading factor `alpha`, every update scales the per-class correct
/// and total counts by `alpha` before adding the new outcome, so older
/// predictions are exponentially down-weighted. `alpha = 1` reduces to
/// plain cumulative counts.
#[derive(Debug, Clone)]
pub struct PrequentialTracker {
    correct: Vec<f64>,
    total: Vec<f64>,
    alpha: f64,
}

impl PrequentialTracker {
    pub fn new(num_classes: usize, alpha: f64) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::Config(format!(
                "prequential tracker needs at least 2 classes, got {num_classes}"
            )));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Config(format!(
                "fading factor must be in (0, 1], got {alpha}"
            )));
        }
        Ok(Self {
            correct: vec![0.0; num_classes],
            total: vec![0.0; num_classes],
            alpha,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.total.len()
    }

    /// Records one (truth, prediction) pair and returns the updated G-mean.
    pub fn update(&mut self, y: usize, y_hat: usize) -> Result<f64> {
        let k = self.num_classes();
        if y < 1 || y > k {
            return Err(Error::UnknownClass {
                label: y,
                num_classes: k,
            });
        }
        if y_hat < 1 || y_hat > k {
            return Err(Error::UnknownClass {
                label: y_hat,
                num_classes: k,
            });
        }
        for c in 0..k {
            self.correct[c] *= self.alpha;
            self.total[c] *= self.alpha;
        }
        self.total[y - 1] += 1.0;
        if y == y_hat {
            self.correct[y - 1] += 1.0;
        }
        Ok(self.gmean())
    }

    /// Fading recall per class; `None` until the class is first observed.
    pub fn recalls(&self) -> Vec<Option<f64>> {
        self.correct
            .iter()
            .zip(&self.total)
            .map(|(&s, &n)| if n > 0.0 { Some(s / n) } else { None })
            .collect()
    }

    /// Geometric mean of fading recalls over the classes observed so far.
    /// Classes never observed are excluded from the product.
    pub fn gmean(&self) -> f64 {
        let observed: Vec<f64> = self.recalls().into_iter().flatten().collect();
        if observed.is_empty() {
            return 0.0;
        }
        gmean(&observed).expect("recalls are in [0, 1] by construction")
    }
}

/// Geometric mean of recall values: `(prod r_c)^(1/K)`.
pub fn gmean(recalls: &[f64]) -> Result<f64> {
    if recalls.is_empty() {
        return Err(Error::EmptyWindow);
    }
    for &r in recalls {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::RecallOutOfRange(r));
        }
    }
    if recalls.contains(&0.0) {
        return Ok(0.0);
    }
    // Work in log space so long products of small recalls stay stable.
    let log_sum: f64 = recalls.iter().map(|r| r.ln()).sum();
    Ok((log_sum / recalls.len() as f64).exp().clamp(0.0, 1.0))
}

/// Edge density `M / (N (N - 1))` with single-counted undirected edges.
pub fn edge_density(g: &AttributedGraph) -> Result<f64> {
    let n = g.num_nodes();
    if n < 2 {
        return Err(Error::TooFewNodes {
            id: g.id.clone(),
            nodes: n,
        });
    }
    Ok(g.num_edges() as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// Laplacian spectral gap: largest minus second-largest eigenvalue of
/// `L = D - A` (eigenvalues sorted descending with multiplicity).
pub fn spectral_gap(g: &AttributedGraph) -> Result<f64> {
    if g.directed {
        return Err(Error::DirectedGraph { id: g.id.clone() });
    }
    let n = g.num_nodes();
    if n < 2 {
        return Err(Error::TooFewNodes {
            id: g.id.clone(),
            nodes: n,
        });
    }
    let eigs = laplacian_eigenvalues(g)?;
    Ok((eigs[0] - eigs[1]).max(0.0))
}

/// Eigenvalues of the Laplacian `D - A`, sorted descending.
pub fn laplacian_eigenvalues(g: &AttributedGraph) -> Result<Vec<f64>> {
    let a = g.adjacency()?;
    let n = g.num_nodes();
    let mut lap = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        let mut degree = 0.0;
        for j in 0..n {
            if a[(i, j)] != 0 {
                degree += 1.0;
                lap[(i, j)] = -1.0;
            }
        }
        lap[(i, i)] = degree;
    }
    let mut eigs = symmetric_eigenvalues(&lap);
    eigs.sort_by(|x, y| y.total_cmp(x));
    Ok(eigs)
}

/// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
/// Sweeps until the off-diagonal Frobenius norm drops below 1e-10,
/// capped at 100 sweeps.
pub fn symmetric_eigenvalues(mat: &Array2<f64>) -> Vec<f64> {
    let n = mat.nrows();
    assert_eq!(n, mat.ncols(), "matrix must be square");
    let mut a = mat.clone();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[(i, j)] * a[(i, j)];
                }
            }
        }
        if off.sqrt() < 1e-10 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                // Smaller-magnitude root of t^2 + 2*theta*t - 1 = 0.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }

    (0..n).map(|i| a[(i, i)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeRecord, NodeRecord};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> AttributedGraph {
        let nodes = (0..n)
            .map(|i| NodeRecord::new(format!("n{i}"), vec![]))
            .collect();
        let edge_records = edges
            .iter()
            .map(|&(a, b)| EdgeRecord::new(format!("n{a}"), format!("n{b}"), vec![]))
            .collect();
        AttributedGraph::new("g", nodes, edge_records, false, 0, 0)
    }

    #[test]
    fn gmean_hand_cases() {
        assert_abs_diff_eq!(gmean(&[1.0, 1.0, 1.0]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gmean(&[0.5, 0.5]).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(
            gmean(&[0.9, 0.4, 0.7]).unwrap(),
            0.252f64.powf(1.0 / 3.0),
            epsilon = 1e-12
        );
        assert_eq!(gmean(&[0.9, 0.0, 0.7]).unwrap(), 0.0);
    }

    #[test]
    fn gmean_rejects_out_of_range() {
        assert!(gmean(&[1.2]).is_err());
        assert!(gmean(&[-0.1]).is_err());
        assert!(gmean(&[]).is_err());
    }

    #[test]
    fn fading_counts_with_alpha_one_match_plain_recalls() {
        let mut tracker = PrequentialTracker::new(2, 1.0).unwrap();
        // (y, y_hat) = (1,1), (1,2), (2,2), (2,2)
        tracker.update(1, 1).unwrap();
        tracker.update(1, 2).unwrap();
        tracker.update(2, 2).unwrap();
        let g = tracker.update(2, 2).unwrap();
        let recalls = tracker.recalls();
        assert_abs_diff_eq!(recalls[0].unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(recalls[1].unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g, 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn all_correct_gives_gmean_one() {
        let mut tracker = PrequentialTracker::new(3, 0.99).unwrap();
        for y in [1, 2, 3, 1, 2, 3] {
            tracker.update(y, y).unwrap();
        }
        assert_abs_diff_eq!(tracker.gmean(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn all_wrong_class_zeroes_gmean() {
        let mut tracker = PrequentialTracker::new(2, 0.99).unwrap();
        tracker.update(1, 1).unwrap();
        tracker.update(2, 1).unwrap();
        assert_eq!(tracker.gmean(), 0.0);
    }

    #[test]
    fn unobserved_classes_excluded() {
        let mut tracker = PrequentialTracker::new(3, 0.99).unwrap();
        let g = tracker.update(1, 1).unwrap();
        assert_abs_diff_eq!(g, 1.0, epsilon = 1e-12);
        assert_eq!(tracker.recalls()[1], None);
        assert_eq!(tracker.recalls()[2], None);
    }

    #[test]
    fn invalid_labels_rejected() {
        let mut tracker = PrequentialTracker::new(2, 0.99).unwrap();
        assert!(tracker.update(0, 1).is_err());
        assert!(tracker.update(1, 3).is_err());
    }

    #[test]
    fn density_hand_cases() {
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_abs_diff_eq!(edge_density(&k3).unwrap(), 0.5, epsilon = 1e-12);
        let empty3 = graph(3, &[]);
        assert_abs_diff_eq!(edge_density(&empty3).unwrap(), 0.0, epsilon = 1e-12);
        let p2 = graph(2, &[(0, 1)]);
        assert_abs_diff_eq!(edge_density(&p2).unwrap(), 0.5, epsilon = 1e-12);
        assert!(edge_density(&graph(1, &[])).is_err());
    }

    #[test]
    fn known_spectra() {
        // K3 Laplacian spectrum {3, 3, 0} -> gap 0.
        let k3 = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_abs_diff_eq!(spectral_gap(&k3).unwrap(), 0.0, epsilon = 1e-9);
        // P2 spectrum {2, 0} -> gap 2.
        let p2 = graph(2, &[(0, 1)]);
        assert_abs_diff_eq!(spectral_gap(&p2).unwrap(), 2.0, epsilon = 1e-9);
        // Star on 4 nodes: spectrum {4, 1, 1, 0} -> gap 3.
        let s4 = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_abs_diff_eq!(spectral_gap(&s4).unwrap(), 3.0, epsilon = 1e-9);
    }

    #[test]
    fn spectral_gap_rejects_directed() {
        let mut g = graph(3, &[(0, 1)]);
        g.directed = true;
        assert!(spectral_gap(&g).is_err());
    }

    proptest! {
        #[test]
        fn gmean_permutation_invariant(mut recalls in proptest::collection::vec(0.0f64..=1.0, 1..6)) {
            let before = gmean(&recalls).unwrap();
            recalls.reverse();
            let after = gmean(&recalls).unwrap();
            prop_assert!((before - after).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&before));
        }

        #[test]
        fn gmean_of_equal_recalls_is_identity(r in 0.0f64..=1.0, k in 1usize..6) {
            let recalls = vec![r; k];
            let g = gmean(&recalls).unwrap();
            prop_assert!((g - r).abs() < 1e-9);
        }

        #[test]
        fn fading_alpha_one_matches_count_oracle(
            pairs in proptest::collection::vec((1usize..=3, 1usize..=3), 1..60)
        ) {
            let mut tracker = PrequentialTracker::new(3, 1.0).unwrap();
            let mut correct = [0u32; 3];
            let mut total = [0u32; 3];
            for &(y, y_hat) in &pairs {
                tracker.update(y, y_hat).unwrap();
                total[y - 1] += 1;
                if y == y_hat {
                    correct[y - 1] += 1;
                }
            }
            for c in 0..3 {
                match tracker.recalls()[c] {
                    Some(r) => {
                        prop_assert!(total[c] > 0);
                        let expected = f64::from(correct[c]) / f64::from(total[c]);
                        prop_assert!((r - expected).abs() < 1e-9);
                    }
                    None => prop_assert_eq!(total[c], 0),
                }
            }
        }

        #[test]
        fn spectral_gap_invariant_under_relabeling(seed in 0u64..500) {
            use rand::prelude::*;
            use rand_chacha::ChaCha20Rng;
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let n = rng.random_range(2..7usize);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_bool(0.5) {
                        edges.push((i, j));
                    }
                }
            }
            let g = graph(n, &edges);
            let gap = spectral_gap(&g).unwrap();

            // Apply a relabeling: rotate node order by one.
            let perm: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
            let nodes = (0..n).map(|i| crate::graph::NodeRecord::new(format!("n{i}"), vec![])).collect();
            let edge_records = edges
                .iter()
                .map(|&(a, b)| crate::graph::EdgeRecord::new(
                    format!("n{}", perm[a]),
                    format!("n{}", perm[b]),
                    vec![],
                ))
                .collect();
            let g2 = AttributedGraph::new("g2", nodes, edge_records, false, 0, 0);
            let gap2 = spectral_gap(&g2).unwrap();
            prop_assert!((gap - gap2).abs() < 1e-8);
        }
    }

    #[test]
    fn eigenvalue_sum_equals_twice_edge_count() {
        use rand::prelude::*;
        use rand_chacha::ChaCha20Rng;
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.random_range(2..9usize);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_bool(0.4) {
                        edges.push((i, j));
                    }
                }
            }
            let g = graph(n, &edges);
            let eigs = laplacian_eigenvalues(&g).unwrap();
            let sum: f64 = eigs.iter().sum();
            assert_abs_diff_eq!(sum, 2.0 * edges.len() as f64, epsilon = 1e-8);
        }
    }
}
