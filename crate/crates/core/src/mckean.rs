//! McKean collision trees and the velocity `V = sum_j pi_j v_j`.

use crate::datum::InitialDatum;
use crate::error::{KacError, Result};
use crate::numerics::{mean_and_se, pairwise_sum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Largest leaf count accepted from the geometric draw.
pub const NU_MAX: usize = 10_000_000;

/// A sampled tree: `nu` leaves with signed weights whose squares sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct McKeanTree {
    pub nu: usize,
    /// Split angles in `[0, 2pi)`, one per split.
    pub angles: Vec<f64>,
    /// Index of the leaf split at each step.
    pub split_history: Vec<usize>,
    pub weights: Vec<f64>,
}

impl McKeanTree {
    /// `|sum pi_j^2 - 1|`.
    pub fn sphere_defect(&self) -> f64 {
        let sq: Vec<f64> = self.weights.iter().map(|w| w * w).collect();
        (pairwise_sum(&sq) - 1.0).abs()
    }
}

/// Counter-based stream for sample `index` of `batch` under `seed`.
pub fn stream(seed: u64, batch: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&batch.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Leaf count with `P(nu = n) = e^{-t} (1 - e^{-t})^{n-1}`, by inversion.
pub fn sample_nu<R: Rng + ?Sized>(t: f64, rng: &mut R) -> Result<usize> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(KacError::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(1);
    }
    // ln(1 - e^{-t}), accurate for both small and large t
    let lq = (-(-t).exp()).ln_1p();
    let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let extra = (u.ln() / lq).floor();
    if !(extra < (NU_MAX - 1) as f64) {
        return Err(KacError::Resource(format!(
            "leaf count draw {} exceeds {NU_MAX} at t = {t}",
            extra + 1.0
        )));
    }
    Ok(1 + extra as usize)
}

/// Geometric leaf count, then `nu - 1` splits of a uniformly chosen leaf at a
/// uniform angle: the split leaf keeps `w cos`, the new leaf gets `w sin`.
pub fn sample_tree<R: Rng + ?Sized>(t: f64, rng: &mut R) -> Result<McKeanTree> {
    let nu = sample_nu(t, rng)?;
    let mut weights = Vec::with_capacity(nu);
    let mut angles = Vec::with_capacity(nu - 1);
    let mut split_history = Vec::with_capacity(nu - 1);
    weights.push(1.0);
    for _ in 1..nu {
        let leaf = rng.gen_range(0..weights.len());
        let theta = rng.gen::<f64>() * 2.0 * PI;
        let (s, c) = theta.sin_cos();
        let w = weights[leaf];
        weights[leaf] = w * c;
        weights.push(w * s);
        angles.push(theta);
        split_history.push(leaf);
    }
    Ok(McKeanTree {
        nu,
        angles,
        split_history,
        weights,
    })
}

/// `sum_j |pi_j|^m`.
pub fn weight_power_sum(tree: &McKeanTree, m: f64) -> f64 {
    let p: Vec<f64> = tree.weights.iter().map(|w| w.abs().powf(m)).collect();
    pairwise_sum(&p)
}

/// `sum_j pi_j v_j` with `v_j` drawn i.i.d. from the datum.
pub fn sample_velocity<R: Rng + ?Sized>(tree: &McKeanTree, d: &InitialDatum, rng: &mut R) -> Result<f64> {
    let terms: Vec<f64> = tree.weights.iter().map(|w| w * d.sample(rng)).collect();
    Ok(pairwise_sum(&terms))
}

/// Velocities at time `t`, one independent tree per sample.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub t: f64,
    pub values: Vec<f64>,
    pub seed: u64,
    pub n_samples: usize,
}

impl SampleBatch {
    pub fn mean_and_se(&self) -> (f64, f64) {
        mean_and_se(&self.values)
    }

    /// Sample second moment.
    pub fn second_moment(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        pairwise_sum(&sq) / self.values.len() as f64
    }
}

/// `n` velocities at `t`. Sample `k` uses `stream(seed, 0, k)`, so the batch
/// does not depend on the worker count.
pub fn sample_batch(d: &InitialDatum, t: f64, n: usize, seed: u64) -> Result<SampleBatch> {
    let values = (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, 0, k);
            let tree = sample_tree(t, &mut rng)?;
            sample_velocity(&tree, d, &mut rng)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SampleBatch {
        t,
        values,
        seed,
        n_samples: n,
    })
}

/// Monte Carlo mean and standard error of `sum |pi_j|^m` for each `m`,
/// sharing the same `n` trees.
pub fn weight_power_stats(t: f64, ms: &[f64], n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let per_tree = (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let tree = sample_tree(t, &mut stream(seed, 1, k))?;
            Ok(ms.iter().map(|m| weight_power_sum(&tree, *m)).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((0..ms.len())
        .map(|i| {
            let col: Vec<f64> = per_tree.iter().map(|r| r[i]).collect();
            mean_and_se(&col)
        })
        .collect())
}

/// Largest `|sum pi_j^2 - 1|` over `n` sampled trees.
pub fn max_sphere_defect(t: f64, n: usize, seed: u64) -> Result<f64> {
    (0..n as u64)
        .into_par_iter()
        .map(|k| Ok(sample_tree(t, &mut stream(seed, 2, k))?.sphere_defect()))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Empirical characteristic function with its `1/sqrt n` envelope.
#[derive(Debug, Clone)]
pub struct EmpiricalCf {
    pub xi: Vec<f64>,
    pub values: Vec<Complex64>,
    pub envelope: f64,
}

pub fn empirical_cf(batch: &SampleBatch, xi_nodes: &[f64]) -> EmpiricalCf {
    let n = batch.values.len() as f64;
    let values = xi_nodes
        .par_iter()
        .map(|&x| {
            if x == 0.0 {
                return Complex64::new(1.0, 0.0);
            }
            let (s, c): (Vec<f64>, Vec<f64>) = batch.values.iter().map(|v| (x * v).sin_cos()).unzip();
            Complex64::new(pairwise_sum(&c) / n, pairwise_sum(&s) / n)
        })
        .collect();
    EmpiricalCf {
        xi: xi_nodes.to_vec(),
        values,
        envelope: 1.0 / n.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::decay_exponent;
    use proptest::prelude::*;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn time_zero_is_a_single_leaf() {
        let mut rng = stream(1, 0, 0);
        for _ in 0..100 {
            let tr = sample_tree(0.0, &mut rng).unwrap();
            assert_eq!(tr.nu, 1);
            assert_eq!(tr.weights, vec![1.0]);
            assert_eq!(weight_power_sum(&tr, 7.3), 1.0);
        }
    }

    #[test]
    fn leaf_count_mean_is_e_to_the_t() {
        let n = 100_000;
        let nus: Vec<f64> = (0..n)
            .map(|k| sample_nu(1.0, &mut stream(5, 9, k)).unwrap() as f64)
            .collect();
        let (m, se) = mean_and_se(&nus);
        assert!((m - 1f64.exp()).abs() < 3.0 * se, "{m} +- {se}");
    }

    #[test]
    fn weight_power_four_at_unit_time() {
        let r = weight_power_stats(1.0, &[2.0, 4.0], 100_000, 17).unwrap();
        assert!((r[0].0 - 1.0).abs() < 1e-12);
        let want = (-decay_exponent(4.0).unwrap()).exp();
        assert!((r[1].0 - want).abs() < 3.0 * r[1].1, "{:?} vs {want}", r[1]);
    }

    #[test]
    fn absurd_times_hit_the_resource_limit() {
        let mut rng = stream(0, 0, 0);
        assert!(matches!(sample_nu(40.0, &mut rng), Err(KacError::Resource(_))));
        assert!(sample_nu(-1.0, &mut rng).is_err());
    }

    #[test]
    fn gaussian_velocities_stay_gaussian() {
        let d = InitialDatum::gaussian(1.5).unwrap();
        let mut b = sample_batch(&d, 2.0, 20_000, 3).unwrap();
        b.values.sort_by(f64::total_cmp);
        let normal = Normal::new(0.0, 1.5).unwrap();
        let n = b.values.len() as f64;
        let ks = b
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let c = normal.cdf(*v);
                (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.628 / n.sqrt(), "KS = {ks}");
    }

    #[test]
    fn uniform_energy_is_conserved() {
        let d = InitialDatum::uniform_unit();
        let b = sample_batch(&d, 2.0, 100_000, 11).unwrap();
        let sq: Vec<f64> = b.values.iter().map(|v| v * v).collect();
        let (m2, se) = mean_and_se(&sq);
        assert!((m2 - 1.0).abs() < 3.0 * se, "{m2} +- {se}");
        let (mean, _) = b.mean_and_se();
        assert!(mean * mean <= d.sigma2() * (1.0 + 10.0 / (b.n_samples as f64).sqrt()));
    }

    #[test]
    fn two_point_single_leaf() {
        let d = InitialDatum::two_point(1.0).unwrap();
        let b = sample_batch(&d, 0.0, 1000, 4).unwrap();
        assert!(b.values.iter().all(|v| v.abs() == 1.0));
        let e = empirical_cf(&b, &[0.0, 1.0]);
        assert_eq!(e.values[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn batches_are_reproducible_across_pools() {
        let d = InitialDatum::laplace_unit();
        let a = sample_batch(&d, 1.0, 5000, 99).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| sample_batch(&d, 1.0, 5000, 99).unwrap());
        assert_eq!(a.values, b.values);
        let c = sample_batch(&d, 1.0, 5000, 100).unwrap();
        assert_ne!(a.values, c.values);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn weights_lie_on_the_sphere(t in 0.0f64..4.0, seed in any::<u64>()) {
            let tr = sample_tree(t, &mut stream(seed, 0, 0)).unwrap();
            prop_assert!(tr.sphere_defect() < 1e-12);
            prop_assert_eq!(tr.weights.len(), tr.nu);
            prop_assert_eq!(tr.angles.len(), tr.nu - 1);
            for m in [2.5, 3.0, 6.0] {
                let s = weight_power_sum(&tr, m);
                prop_assert!(s > 0.0 && s <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn weights_replay_from_history(t in 0.0f64..3.0, seed in any::<u64>()) {
            let tr = sample_tree(t, &mut stream(seed, 0, 1)).unwrap();
            let mut w = vec![1.0];
            for (leaf, th) in tr.split_history.iter().zip(&tr.angles) {
                let p = w[*leaf];
                w[*leaf] = p * th.cos();
                w.push(p * th.sin());
            }
            prop_assert_eq!(w, tr.weights.clone());
        }
    }
}
