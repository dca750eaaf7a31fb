//! Synthetic instances: uniform random points in the unit square and the
//! 3-row rectangular mesh.
//!
//! Random points come from ChaCha8 seeded with `seed_from_u64(seed)`; each
//! coordinate is `(next_u64() >> 11) / 2^53`, x before y, point by point.
//! That stream is fixed by the `rand_chacha` value-stability guarantee, so an
//! instance is identical on every platform.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, Source};
use crate::error::{Error, Result};

/// Distances are scaled by 2^14 before rounding to integers.
pub const SCALE: f64 = 16384.0;

/// `round(SCALE * |a - b|)`, halves rounded away from zero.
pub fn scaled_distance(a: (f64, f64), b: (f64, f64)) -> i64 {
    let d = (a.0 - b.0).hypot(a.1 - b.1);
    (SCALE * d).round() as i64
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Instance label in the `RE_<letters>_<n>` style: seed 0 is `A`, 25 is `Z`,
/// 26 is `AA`.
pub fn random_euclidean_name(n: usize, seed: u64) -> String {
    let mut letters = Vec::new();
    let mut k = seed as u128 + 1;
    while k > 0 {
        k -= 1;
        letters.push(b'A' + (k % 26) as u8);
        k /= 26;
    }
    letters.reverse();
    format!("RE_{}_{n}", String::from_utf8(letters).expect("ascii"))
}

pub fn gen_random_euclidean(n: usize, seed: u64) -> Result<Instance> {
    if n < 3 {
        return Err(Error::domain(format!("random instance needs n >= 3, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let x = unit_f64(&mut rng);
            let y = unit_f64(&mut rng);
            (x, y)
        })
        .collect();
    Instance::from_points(
        random_euclidean_name(n, seed),
        Source::RandomEuclidean,
        points,
        scaled_distance,
    )
}

/// A 3 x `cols` grid with unit spacing. Vertex `r * cols + c` sits at `(c, r)`.
pub fn gen_mesh(cols: usize) -> Result<Instance> {
    if cols < 4 || !cols.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "mesh needs an even column count >= 4, got {cols}"
        )));
    }
    let points = (0..3)
        .flat_map(|r| (0..cols).map(move |c| (c as f64, r as f64)))
        .collect();
    Instance::from_points(format!("mesh_3x{cols}"), Source::Mesh, points, scaled_distance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_distance_examples() {
        assert_eq!(scaled_distance((0.0, 0.0), (0.5, 0.0)), 8192);
        // 16384 * sqrt(2) = 23170.475...
        assert_eq!(scaled_distance((0.0, 0.0), (1.0, 1.0)), 23170);
        assert_eq!(scaled_distance((0.3, 0.7), (0.3, 0.7)), 0);
    }

    #[test]
    fn half_rounds_away_from_zero() {
        // 2.5 / 16384 is exactly representable, so the scaled value is exactly 2.5.
        let d = 2.5 / SCALE;
        assert_eq!(scaled_distance((0.0, 0.0), (d, 0.0)), 3);
    }

    #[test]
    fn random_is_reproducible() {
        let a = gen_random_euclidean(40, 7).unwrap();
        let b = gen_random_euclidean(40, 7).unwrap();
        let c = gen_random_euclidean(40, 8).unwrap();
        assert_eq!(a.weights(), b.weights());
        assert_ne!(a.weights(), c.weights());
        for &(x, y) in a.coords().unwrap() {
            assert!((0.0..1.0).contains(&x) && (0.0..1.0).contains(&y));
        }
    }

    #[test]
    fn random_rejects_tiny_n() {
        assert!(matches!(gen_random_euclidean(2, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn names_follow_letter_scheme() {
        assert_eq!(random_euclidean_name(150, 0), "RE_A_150");
        assert_eq!(random_euclidean_name(150, 4), "RE_E_150");
        assert_eq!(random_euclidean_name(10, 25), "RE_Z_10");
        assert_eq!(random_euclidean_name(10, 26), "RE_AA_10");
    }

    #[test]
    fn mesh_shape_and_weights() {
        let m = gen_mesh(4).unwrap();
        assert_eq!(m.n(), 12);
        assert_eq!(m.w(0, 1), 16384);
        assert_eq!(m.w(0, 4), 16384);
        assert_eq!(m.w(0, 5), 23170);
        assert!(gen_mesh(5).is_err());
        assert!(gen_mesh(2).is_err());
        assert_eq!(gen_mesh(6).unwrap().n(), 18);
    }
}
