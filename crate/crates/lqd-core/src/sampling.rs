//! Seeded random diagrams, matrices and profiles for campaigns.
//!
//! Each trial draws from its own ChaCha stream, so results do not depend on
//! how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{symmetrize, Mat};
use crate::riccati::CurvatureProfile;
use crate::young::YoungDiagram;

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Random partition of `n` into row lengths.
pub fn random_diagram(n: usize, rng: &mut impl Rng) -> YoungDiagram {
    let mut rows = Vec::new();
    let mut left = n;
    while left > 0 {
        let r = rng.gen_range(1..=left);
        rows.push(r);
        left -= r;
    }
    YoungDiagram::from_rows(&rows).expect("parts are positive")
}

pub fn random_symmetric(n: usize, amplitude: f64, rng: &mut impl Rng) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-amplitude..=amplitude));
    symmetrize(&g)
}

/// `G Gᵀ` with entries of `G` uniform in `[−amplitude, amplitude]`.
pub fn random_psd(n: usize, amplitude: f64, rng: &mut impl Rng) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-amplitude..=amplitude));
    &g * g.transpose()
}

/// Random matrix satisfying the normal-form conditions of `y`: symmetric,
/// diagonal within rows, banded and partially skew between rows of equal
/// length, and supported on the allowed pairs between rows of different
/// length.
pub fn random_normal_matrix(y: &YoungDiagram, amplitude: f64, rng: &mut impl Rng) -> Mat {
    let n = y.n();
    let rows = y.rows();
    let mut r = Mat::zeros(n, n);
    let set = |r: &mut Mat, p: usize, q: usize, v: f64| {
        r[(p, q)] = v;
        r[(q, p)] = v;
    };
    for a in 0..y.k() {
        for i in 0..rows[a] {
            let p = y.box_index(a, i);
            set(&mut r, p, p, rng.gen_range(-amplitude..=amplitude));
        }
        for b in a + 1..y.k() {
            let (na, nb) = (rows[a], rows[b]);
            if na == nb {
                for i in 0..na {
                    let v = rng.gen_range(-amplitude..=amplitude);
                    set(&mut r, y.box_index(a, i), y.box_index(b, i), v);
                }
                for i in 0..na - 1 {
                    let x = rng.gen_range(-amplitude..=amplitude);
                    set(&mut r, y.box_index(a, i), y.box_index(b, i + 1), x);
                    set(&mut r, y.box_index(b, i), y.box_index(a, i + 1), -x);
                }
            } else {
                // rows are sorted, so na > nb
                for (i, j) in crate::young::allowed_pairs(na, nb) {
                    let v = rng.gen_range(-amplitude..=amplitude);
                    set(&mut r, y.box_index(a, i - 1), y.box_index(b, j - 1), v);
                }
            }
        }
    }
    r
}

/// `R(t) = R₀ + t R₁ + sin(ω t) R₂` with each `Rᵢ` normal for `y`.
pub fn random_normal_profile(y: &YoungDiagram, amplitude: f64, rng: &mut impl Rng) -> CurvatureProfile {
    let r0 = random_normal_matrix(y, amplitude, rng);
    let r1 = random_normal_matrix(y, amplitude, rng);
    let r2 = random_normal_matrix(y, amplitude, rng);
    let omega = rng.gen_range(0.5..4.0);
    CurvatureProfile::from_fn(y, move |t| &r0 + &r1 * t + &r2 * (omega * t).sin())
}

/// `R(t) = R₀ + sin(ω t) R₁` with symmetric `Rᵢ`.
pub fn random_symmetric_profile(y: &YoungDiagram, amplitude: f64, rng: &mut impl Rng) -> CurvatureProfile {
    let r0 = random_symmetric(y.n(), amplitude, rng);
    let r1 = random_symmetric(y.n(), amplitude, rng);
    let omega = rng.gen_range(0.5..4.0);
    CurvatureProfile::from_fn(y, move |t| &r0 + &r1 * (omega * t).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::young::is_zelenko_li_normal;

    #[test]
    fn streams_are_reproducible() {
        let a: f64 = trial_rng(7, 3).gen();
        let b: f64 = trial_rng(7, 3).gen();
        let c: f64 = trial_rng(7, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn diagrams_have_requested_size() {
        let mut rng = trial_rng(1, 0);
        for n in 1..8 {
            assert_eq!(random_diagram(n, &mut rng).n(), n);
        }
    }

    #[test]
    fn normal_matrices_are_normal() {
        let mut rng = trial_rng(2, 0);
        for rows in [vec![2, 1], vec![2, 2, 1], vec![3, 1, 1], vec![4, 2], vec![3, 3, 2, 1]] {
            let y = YoungDiagram::from_rows(&rows).unwrap();
            for _ in 0..20 {
                let r = random_normal_matrix(&y, 1.0, &mut rng);
                let rep = is_zelenko_li_normal(&r, &y, 1e-12).unwrap();
                assert!(rep.normal, "{rows:?}: {:?}", rep.violation);
            }
        }
    }

    #[test]
    fn psd_is_psd() {
        let mut rng = trial_rng(3, 0);
        let p = random_psd(4, 1.0, &mut rng);
        assert!(crate::linalg::min_eigenvalue(&p) > -1e-12);
    }
}
