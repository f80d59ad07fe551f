//! Sparse quantization index modulation on the projection of an L-vector
//! onto a unit direction.

use crate::error::{Error, Result};

const UNIT_TOLERANCE: f64 = 1e-12;

/// Nearest point of coset `u` of the lattice `delta * Z + u * delta / 2`.
pub fn quantize(s: f64, u: u8, delta: f64) -> f64 {
    let offset = u as f64 * delta / 2.0;
    delta * ((s - offset) / delta).round() + offset
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check(x: &[f64], p: &[f64], delta: f64) -> Result<()> {
    if x.len() != p.len() {
        return Err(Error::SizeMismatch {
            expected: p.len(),
            found: x.len(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "quantization step must be positive, got {delta}"
        )));
    }
    let norm = dot(p, p).sqrt();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitProjection(norm));
    }
    Ok(())
}

/// Moves `x` along `p` so that its projection lands on coset `u`.
pub fn qim_embed(x: &[f64], p: &[f64], u: u8, delta: f64) -> Result<Vec<f64>> {
    check(x, p, delta)?;
    let s = dot(x, p);
    let shift = quantize(s, u, delta) - s;
    Ok(x.iter().zip(p).map(|(xi, pi)| xi + shift * pi).collect())
}

/// Detected bit and distance from the projection to the chosen coset point.
/// Equidistant projections decode as 0.
pub fn qim_detect(r: &[f64], p: &[f64], delta: f64) -> Result<(u8, f64)> {
    check(r, p, delta)?;
    Ok(detect_scalar(dot(r, p), delta))
}

pub fn detect_scalar(s: f64, delta: f64) -> (u8, f64) {
    let d0 = (s - quantize(s, 0, delta)).abs();
    let d1 = (s - quantize(s, 1, delta)).abs();
    if d1 < d0 {
        (1, d1)
    } else {
        (0, d0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let n = dot(&v, &v).sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    #[test]
    fn worked_examples() {
        let p = unit(vec![1.0, 2.0, 2.0]);
        // x orthogonal to p, coset 0 contains 0.
        let x = vec![2.0, -1.0, 0.0];
        assert_eq!(qim_embed(&x, &p, 0, 1.0).unwrap(), x);

        let x: Vec<f64> = p.iter().map(|v| v * 0.3).collect();
        let y = qim_embed(&x, &p, 1, 1.0).unwrap();
        assert!((quantize(0.3, 1, 1.0) - 0.5).abs() < 1e-15);
        for i in 0..3 {
            assert!((y[i] - (x[i] + 0.2 * p[i])).abs() < 1e-12);
        }

        assert_eq!(detect_scalar(0.45, 1.0).0, 1);
        assert!((detect_scalar(0.45, 1.0).1 - 0.05).abs() < 1e-12);
        // Exactly between 0 and 0.5: ties go to 0.
        assert_eq!(detect_scalar(0.25, 1.0).0, 0);
    }

    #[test]
    fn rejects_bad_projection() {
        assert!(matches!(
            qim_embed(&[1.0, 1.0], &[1.0, 1.0], 0, 1.0),
            Err(Error::NonUnitProjection(_))
        ));
        assert!(qim_embed(&[1.0], &[1.0], 0, 0.0).is_err());
    }

    fn random_case(seed: u64) -> (Vec<f64>, Vec<f64>, u8, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = rng.random_range(1..=32);
        let x: Vec<f64> = (0..l).map(|_| rng.random_range(-10.0..10.0)).collect();
        let p = unit((0..l).map(|_| rng.random_range(-1.0..1.0)).collect());
        (
            x,
            p,
            rng.random::<bool>() as u8,
            rng.random_range(0.01..1.0),
        )
    }

    proptest! {
        #[test]
        fn distortion_and_noiseless_detection(seed in any::<u64>()) {
            let (x, p, u, delta) = random_case(seed);
            let y = qim_embed(&x, &p, u, delta).unwrap();
            let dist = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prop_assert!(dist <= delta / 2.0 + 1e-12);
            let (bit, resid) = qim_detect(&y, &p, delta).unwrap();
            prop_assert_eq!(bit, u);
            prop_assert!(resid < 1e-9);
        }

        #[test]
        fn orthogonal_perturbations_are_invisible(seed in any::<u64>(), scale in 0.0f64..100.0) {
            let (x, p, u, delta) = random_case(seed);
            let y = qim_embed(&x, &p, u, delta).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let mut e: Vec<f64> = (0..p.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let along = dot(&e, &p);
            e.iter_mut().zip(&p).for_each(|(ei, pi)| *ei -= along * pi);
            let r: Vec<f64> = y.iter().zip(&e).map(|(a, b)| a + scale * b).collect();
            prop_assert_eq!(qim_detect(&r, &p, delta).unwrap().0, u);
        }

        #[test]
        fn small_on_axis_perturbations_are_absorbed(seed in any::<u64>(), frac in -0.999f64..0.999) {
            let (x, p, u, delta) = random_case(seed);
            let y = qim_embed(&x, &p, u, delta).unwrap();
            let eps = frac * delta / 4.0;
            let r: Vec<f64> = y.iter().zip(&p).map(|(a, b)| a + eps * b).collect();
            prop_assert_eq!(qim_detect(&r, &p, delta).unwrap().0, u);
        }
    }
}
