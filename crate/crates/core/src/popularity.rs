//! Zipf frequency-of-access rows.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used for the rank permutation of node `n` out of `node_count`. Each
/// MEN draws from its own stream and the BS (last node) from a fixed one, so
/// adding MENs leaves the existing rows unchanged.
fn node_stream(n: usize, node_count: usize) -> u64 {
    if n + 1 == node_count {
        0xB5
    } else {
        0x1000 + n as u64
    }
}

/// Normalized Zipf weights for ranks `1..=count`.
pub fn zipf_weights(count: usize, shape: f64) -> Vec<f64> {
    assert!(count >= 1, "content count must be positive");
    assert!(shape >= 0.0, "Zipf shape must be non-negative");
    let raw: Vec<f64> = (1..=count).map(|r| (r as f64).powf(-shape)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// One FoA row per node. With `shuffle`, node `n` assigns ranks by an
/// independent seeded permutation; otherwise content `i` has rank `i + 1`
/// everywhere. The last row belongs to the BS.
pub fn zipf_foa(node_count: usize, content_count: usize, shape: f64, seed: u64, shuffle: bool) -> Vec<Vec<f64>> {
    let weights = zipf_weights(content_count, shape);
    (0..node_count)
        .map(|n| {
            if !shuffle {
                return weights.clone();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(node_stream(n, node_count));
            let mut ranks: Vec<usize> = (0..content_count).collect();
            ranks.shuffle(&mut rng);
            ranks.iter().map(|&r| weights[r]).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn closed_form_three_contents() {
        let w = zipf_weights(3, 0.1);
        let raw = [1.0, 2f64.powf(-0.1), 3f64.powf(-0.1)];
        let total: f64 = raw.iter().sum();
        for k in 0..3 {
            assert_abs_diff_eq!(w[k], raw[k] / total, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(w[0], 0.3535, epsilon = 1e-4);
        assert_abs_diff_eq!(w[1], 0.3298, epsilon = 1e-4);
        assert_abs_diff_eq!(w[2], 0.3167, epsilon = 1e-4);
    }

    #[test]
    fn zero_shape_is_uniform() {
        for w in zipf_weights(7, 0.0) {
            assert_abs_diff_eq!(w, 1.0 / 7.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn seeded_permutations() {
        let a = zipf_foa(4, 50, 0.1, 7, true);
        let b = zipf_foa(4, 50, 0.1, 7, true);
        let c = zipf_foa(4, 50, 0.1, 8, true);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a[0], a[1], "nodes get independent permutations");
        for row in &a {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        let fixed = zipf_foa(2, 5, 0.1, 7, false);
        assert_eq!(fixed[0], zipf_weights(5, 0.1));
        assert_eq!(fixed[0], fixed[1]);
        let grown = zipf_foa(5, 50, 0.1, 7, true);
        assert_eq!(grown[..3], a[..3]);
        assert_eq!(grown[4], a[3], "the BS row does not depend on the MEN count");
    }
}
