//! Triplet mining over a batch of embeddings with known object identities.

use crate::model::linalg::Mat;
use crate::model::loss::{MiningMode, Triplet};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// For every ordered (anchor, positive) pair within an object, pick one
/// negative from a different object.
///
/// Semi-hard mode prefers the hardest negative inside the band
/// (D(a,p), D(a,p) + margin); when the band is empty it falls back to the
/// overall hardest (closest) negative. Hardest mode always takes the closest
/// negative. Returns an empty list when no within-object pair exists.
pub fn mine_triplets(
    embeddings: &Mat,
    object_ids: &[usize],
    margin: f64,
    mode: MiningMode,
) -> Vec<Triplet> {
    assert_eq!(embeddings.rows, object_ids.len());
    let n = object_ids.len();
    let mut out = Vec::new();
    for a in 0..n {
        for p in 0..n {
            if p == a || object_ids[p] != object_ids[a] {
                continue;
            }
            let d_ap = sq_dist(embeddings.row(a), embeddings.row(p));
            let mut band_best: Option<(usize, f64)> = None;
            let mut hardest: Option<(usize, f64)> = None;
            for neg in 0..n {
                if object_ids[neg] == object_ids[a] {
                    continue;
                }
                let d_an = sq_dist(embeddings.row(a), embeddings.row(neg));
                if hardest.map_or(true, |(_, d)| d_an < d) {
                    hardest = Some((neg, d_an));
                }
                if d_an > d_ap && d_an < d_ap + margin && band_best.map_or(true, |(_, d)| d_an < d)
                {
                    band_best = Some((neg, d_an));
                }
            }
            let chosen = match mode {
                MiningMode::SemiHard => band_best.or(hardest),
                MiningMode::HardestNegative => hardest,
            };
            if let Some((neg, _)) = chosen {
                out.push(Triplet { anchor: a, positive: p, negative: neg });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_points(angles: &[f64]) -> Mat {
        Mat::from_rows(angles.iter().map(|a| vec![a.cos(), a.sin()]).collect())
    }

    #[test]
    fn well_separated_clusters_fall_back_to_hardest() {
        // two objects far apart: every cross distance exceeds within + margin
        let e = circle_points(&[0.0, 0.05, 3.0, 3.05]);
        let ids = [0, 0, 1, 1];
        let triplets = mine_triplets(&e, &ids, 0.1, MiningMode::SemiHard);
        // 4 ordered (a,p) pairs, each with a fallback negative
        assert_eq!(triplets.len(), 4);
        for t in &triplets {
            assert_eq!(ids[t.anchor], ids[t.positive]);
            assert_ne!(ids[t.anchor], ids[t.negative]);
        }
        // identical to hardest-negative mining in this configuration
        let hard = mine_triplets(&e, &ids, 0.1, MiningMode::HardestNegative);
        assert_eq!(triplets, hard);
    }

    #[test]
    fn band_negative_preferred() {
        // D(a,p)=0.1; negatives at D=0.15 (inside the band) and D=0.5
        let d_to_angle = |d: f64| 2.0 * ((d / 4.0f64).sqrt()).asin();
        let e = circle_points(&[0.0, d_to_angle(0.1), d_to_angle(0.15), d_to_angle(0.5)]);
        let ids = [0, 0, 1, 2];
        let triplets = mine_triplets(&e, &ids, 0.1, MiningMode::SemiHard);
        let t = triplets.iter().find(|t| t.anchor == 0 && t.positive == 1).unwrap();
        assert_eq!(t.negative, 2);
    }

    #[test]
    fn single_object_yields_nothing() {
        let e = circle_points(&[0.0, 0.2, 0.4]);
        assert!(mine_triplets(&e, &[7, 7, 7], 0.1, MiningMode::SemiHard).is_empty());
    }

    #[test]
    fn no_positive_pair_yields_nothing() {
        let e = circle_points(&[0.0, 1.0, 2.0]);
        assert!(mine_triplets(&e, &[0, 1, 2], 0.1, MiningMode::SemiHard).is_empty());
    }
}
