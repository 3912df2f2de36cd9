//! Spectral clustering of a pairwise similarity matrix into viewpoint
//! clusters, with an eigengap heuristic for choosing the cluster count.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub n: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<SimilarityMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("similarity matrix must be square"));
        }
        let s = SimilarityMatrix { n, data: rows.concat() };
        s.validate()?;
        Ok(s)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("empty similarity matrix"));
        }
        for i in 0..self.n {
            if (self.at(i, i) - 1.0).abs() > 1e-9 {
                return Err(Error::invalid("similarity diagonal must be 1"));
            }
            for j in 0..self.n {
                let v = self.at(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::invalid("similarities must lie in [0,1]"));
                }
                if (v - self.at(j, i)).abs() > 1e-9 {
                    return Err(Error::invalid("similarity matrix must be symmetric"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
}

/// Eigenvalues (ascending) of the symmetric normalized Laplacian
/// I - D^{-1/2} S D^{-1/2}, and its eigenvectors as columns.
fn laplacian_eigen(s: &SimilarityMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = s.n;
    let mut inv_sqrt_deg = vec![0.0; n];
    for i in 0..n {
        let d: f64 = (0..n).map(|j| s.at(i, j)).sum();
        if d <= 0.0 {
            return Err(Error::invalid("zero-degree row in similarity matrix"));
        }
        inv_sqrt_deg[i] = 1.0 / d.sqrt();
    }
    let lap = DMatrix::from_fn(n, n, |i, j| {
        let v = -s.at(i, j) * inv_sqrt_deg[i] * inv_sqrt_deg[j];
        if i == j { 1.0 + v } else { v }
    });
    let eig = nalgebra::SymmetricEigen::new(lap);
    if !eig.eigenvalues.iter().all(|v| v.is_finite()) {
        return Err(Error::NumericFailure("eigendecomposition produced non-finite values".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Laplacian spectrum, ascending. Exposed for diagnostics and tests.
pub fn laplacian_spectrum(s: &SimilarityMatrix) -> Result<Vec<f64>> {
    s.validate()?;
    Ok(laplacian_eigen(s)?.0)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Standard k-means with k-means++ seeding. Returns (labels, inertia).
fn kmeans(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let n = points.len();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.gen_range(0..n)].clone());
    while centers.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| centers.iter().map(|c| sq_dist(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut target = rng.gen_range(0.0..total);
            let mut idx = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    idx = i;
                    break;
                }
                target -= d;
            }
            idx
        };
        centers.push(points[next].clone());
    }

    let dim = points[0].len();
    let mut labels = vec![0usize; n];
    for _ in 0..100 {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let best = (0..k)
                .min_by(|&a, &b| sq_dist(p, &centers[a]).total_cmp(&sq_dist(p, &centers[b])))
                .unwrap();
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        // refill any emptied cluster with the point farthest from its center
        for c in 0..k {
            if labels.iter().any(|&l| l == c) {
                continue;
            }
            let far = (0..n)
                .max_by(|&a, &b| {
                    sq_dist(&points[a], &centers[labels[a]])
                        .total_cmp(&sq_dist(&points[b], &centers[labels[b]]))
                })
                .unwrap();
            labels[far] = c;
            changed = true;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[labels[i]] += 1;
            for (s, &v) in sums[labels[i]].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for s in &mut sums[c] {
                    *s /= counts[c] as f64;
                }
                centers[c] = sums[c].clone();
            }
        }
        if !changed {
            break;
        }
    }
    let inertia: f64 = points.iter().enumerate().map(|(i, p)| sq_dist(p, &centers[labels[i]])).sum();
    (labels, inertia)
}

/// Relabel clusters by first appearance so equal partitions compare equal.
fn canonicalize(labels: &mut [usize], k: usize) {
    let mut remap = vec![usize::MAX; k];
    let mut next = 0usize;
    for l in labels.iter_mut() {
        if remap[*l] == usize::MAX {
            remap[*l] = next;
            next += 1;
        }
        *l = remap[*l];
    }
}

/// Normalized spectral clustering: bottom-k Laplacian eigenvectors, rows
/// renormalized, then k-means with 10 seeded restarts (best inertia wins).
pub fn spectral_cluster(s: &SimilarityMatrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
    s.validate()?;
    if k < 2 || k > s.n {
        return Err(Error::invalid("cluster count must lie in [2, n]"));
    }
    let (_, vectors) = laplacian_eigen(s)?;
    let points: Vec<Vec<f64>> = (0..s.n)
        .map(|i| {
            let mut row: Vec<f64> = (0..k).map(|j| vectors[(i, j)]).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-12 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
            row
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..10 {
        let (labels, inertia) = kmeans(&points, k, &mut rng);
        if best.as_ref().map_or(true, |(_, bi)| inertia < *bi) {
            best = Some((labels, inertia));
        }
    }
    let (mut labels, _) = best.unwrap();
    canonicalize(&mut labels, k);
    Ok(ClusterAssignment { labels, k })
}

/// Largest-eigengap heuristic. A flat (all-zero-gap) spectrum means every
/// point is its own component, so n is suggested.
pub fn suggest_k(s: &SimilarityMatrix) -> Result<usize> {
    let values = laplacian_spectrum(s)?;
    let n = values.len();
    if n < 3 {
        return Ok(n);
    }
    let mut best_k = n;
    let mut best_gap = 1e-9;
    // gap after the k-th eigenvalue argues for k clusters; ties go to larger k
    for k in 2..n {
        let gap = values[k] - values[k - 1];
        if gap >= best_gap {
            best_gap = gap;
            best_k = k;
        }
    }
    Ok(best_k)
}

/// Noisy planted-partition similarity for benchmarks: within-block
/// 0.9 ± noise, cross-block 0.1 ± noise, clipped to [0,1].
pub fn planted_partition(
    block_sizes: &[usize],
    noise: f64,
    seed: u64,
) -> Result<(SimilarityMatrix, Vec<usize>)> {
    let n: usize = block_sizes.iter().sum();
    if n == 0 || block_sizes.iter().any(|&b| b == 0) {
        return Err(Error::invalid("block sizes must be positive"));
    }
    let mut truth = Vec::with_capacity(n);
    for (b, &size) in block_sizes.iter().enumerate() {
        truth.extend(std::iter::repeat(b).take(size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        rows[i][i] = 1.0;
        for j in i + 1..n {
            let base = if truth[i] == truth[j] { 0.9 } else { 0.1 };
            let v = (base + rng.gen_range(-noise..=noise)).clamp(0.0, 1.0);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    Ok((SimilarityMatrix::from_rows(rows)?, truth))
}

/// Fraction of pairs on which two partitions agree (same/different cluster),
/// a permutation-invariant agreement score.
pub fn pair_agreement(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / total as f64
}

pub fn write_matrix_csv(path: &Path, s: &SimilarityMatrix) -> Result<()> {
    let mut out = String::new();
    for i in 0..s.n {
        let row: Vec<String> = (0..s.n).map(|j| format!("{:.12}", s.at(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<SimilarityMatrix> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse().map_err(|_| Error::invalid("bad matrix entry")))
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    SimilarityMatrix::from_rows(rows)
}

const MATRIX_MAGIC: &[u8; 8] = b"SIMMAT01";

pub fn write_matrix_binary(path: &Path, s: &SimilarityMatrix) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(MATRIX_MAGIC)?;
    f.write_all(&(s.n as u64).to_le_bytes())?;
    for v in &s.data {
        f.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_matrix_binary(path: &Path) -> Result<SimilarityMatrix> {
    let mut f = std::fs::File::open(path)?;
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)?;
    if &magic != MATRIX_MAGIC {
        return Err(Error::invalid("not a similarity matrix file"));
    }
    let mut nb = [0u8; 8];
    f.read_exact(&mut nb)?;
    let n = u64::from_le_bytes(nb) as usize;
    let mut data = vec![0.0; n * n];
    let mut buf = [0u8; 8];
    for v in &mut data {
        f.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    let s = SimilarityMatrix { n, data };
    s.validate()?;
    Ok(s)
}

pub fn write_assignment(path: &Path, assignment: &ClusterAssignment) -> Result<()> {
    let mut out = String::from("index label\n");
    for (i, l) in assignment.labels.iter().enumerate() {
        out.push_str(&format!("{i} {l}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block_diagonal(sizes: &[usize]) -> (SimilarityMatrix, Vec<usize>) {
        let n: usize = sizes.iter().sum();
        let mut truth = Vec::new();
        for (b, &s) in sizes.iter().enumerate() {
            truth.extend(std::iter::repeat(b).take(s));
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if truth[i] == truth[j] { 1.0 } else { 0.0 }).collect())
            .collect();
        (SimilarityMatrix::from_rows(rows).unwrap(), truth)
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        assert!(SimilarityMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        assert!(SimilarityMatrix::from_rows(vec![vec![0.9]]).is_err());
        assert!(SimilarityMatrix::from_rows(vec![vec![1.0, 1.5], vec![1.5, 1.0]]).is_err());
        assert!(SimilarityMatrix::from_rows(vec![vec![1.0, 0.5]]).is_err());
    }

    #[test]
    fn exact_blocks_recovered() {
        let (s, truth) = block_diagonal(&[4, 6]);
        let a = spectral_cluster(&s, 2, 0).unwrap();
        assert_eq!(pair_agreement(&a.labels, &truth), 1.0);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let (s, _) = block_diagonal(&[1, 1, 1, 1, 1]);
        let a = spectral_cluster(&s, 5, 3).unwrap();
        let mut sorted = a.labels.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn noisy_two_block_benchmark() {
        let mut hits = 0;
        for seed in 0..50u64 {
            let (s, truth) = planted_partition(&[10, 10], 0.05, seed).unwrap();
            let a = spectral_cluster(&s, 2, seed).unwrap();
            if pair_agreement(&a.labels, &truth) >= 0.95 {
                hits += 1;
            }
        }
        assert!(hits >= 48, "only {hits}/50 seeds recovered the planted blocks");
    }

    #[test]
    fn suggest_k_cases() {
        let (s, _) = block_diagonal(&[3, 4, 5]);
        assert_eq!(suggest_k(&s).unwrap(), 3);

        // identity similarity: flat zero spectrum, every point its own cluster
        let (s, _) = block_diagonal(&[1; 6]);
        assert_eq!(suggest_k(&s).unwrap(), 6);

        let mut right = 0;
        for seed in 0..50u64 {
            let (s, _) = planted_partition(&[6, 6, 6, 6], 0.05, seed).unwrap();
            if suggest_k(&s).unwrap() == 4 {
                right += 1;
            }
        }
        assert!(right >= 45, "eigengap found k=4 in only {right}/50 seeds");
    }

    #[test]
    fn laplacian_spectrum_bounded() {
        for seed in 0..5u64 {
            let (s, _) = planted_partition(&[7, 8], 0.05, seed).unwrap();
            for v in laplacian_spectrum(&s).unwrap() {
                assert!((-1e-9..=2.0 + 1e-9).contains(&v));
            }
        }
    }

    #[test]
    fn deterministic_and_permutation_invariant() {
        let (s, _) = planted_partition(&[8, 8], 0.05, 9).unwrap();
        assert_eq!(spectral_cluster(&s, 2, 1).unwrap(), spectral_cluster(&s, 2, 1).unwrap());

        // reverse the point order and check the partition transports
        let n = s.n;
        let rows: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| s.at(n - 1 - i, n - 1 - j)).collect()).collect();
        let sp = SimilarityMatrix::from_rows(rows).unwrap();
        let a = spectral_cluster(&s, 2, 1).unwrap();
        let b = spectral_cluster(&sp, 2, 1).unwrap();
        let b_unreversed: Vec<usize> = b.labels.iter().rev().cloned().collect();
        assert_eq!(pair_agreement(&a.labels, &b_unreversed), 1.0);
    }

    #[test]
    fn matrix_io_roundtrips() {
        let (s, _) = planted_partition(&[5, 5], 0.05, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("m.csv");
        write_matrix_csv(&csv, &s).unwrap();
        let back = read_matrix_csv(&csv).unwrap();
        for i in 0..s.n {
            for j in 0..s.n {
                assert!((back.at(i, j) - s.at(i, j)).abs() < 1e-9);
            }
        }

        let bin = dir.path().join("m.bin");
        write_matrix_binary(&bin, &s).unwrap();
        assert_eq!(read_matrix_binary(&bin).unwrap(), s);
    }
}
