//! Seeded samplers for prices and random test economies.
//!
//! Everything here is driven by a `ChaCha8Rng`, so identical seeds give
//! identical streams on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::economy::{Consumer, Economy, Preference, PriceVector};
use crate::simplex::TrimmedSimplex;

/// Share of the barycenter mixed into [`interior_price`].
pub const INTERIOR_MIX: f64 = 0.1;

/// Smallest distance from a facet produced by [`boundary_biased_price`]:
/// ten times machine precision.
pub const BOUNDARY_FLOOR: f64 = 10.0 * f64::EPSILON;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the simplex of dimension `dim` (flat Dirichlet), with
/// every coordinate strictly positive.
pub fn dirichlet(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim)
        .map(|_| {
            // 1 - u lies in (0, 1], so the log is finite.
            let u: f64 = rng.random();
            -(1.0 - u).ln() + f64::MIN_POSITIVE
        })
        .collect();
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    v
}

pub fn dirichlet_price(rng: &mut impl Rng, dim: usize) -> PriceVector {
    to_price(dirichlet(rng, dim))
}

/// Uniform simplex point pulled toward the barycenter by [`INTERIOR_MIX`],
/// so every coordinate is at least `INTERIOR_MIX / dim`.
pub fn interior_price(rng: &mut impl Rng, dim: usize) -> PriceVector {
    let bar = 1.0 / dim as f64;
    let v = dirichlet(rng, dim)
        .into_iter()
        .map(|x| (1.0 - INTERIOR_MIX) * x + INTERIOR_MIX * bar)
        .collect();
    to_price(v)
}

/// Uniform simplex point with one random coordinate pushed to a
/// log-uniform distance in `[BOUNDARY_FLOOR, 0.1]` from its facet.
pub fn boundary_biased_price(rng: &mut impl Rng, dim: usize) -> PriceVector {
    let mut v = dirichlet(rng, dim);
    let l = rng.random_range(0..dim);
    let lo = BOUNDARY_FLOOR.log10();
    let small = 10f64.powf(rng.random_range(lo..-1.0));
    let rest: f64 = v
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != l)
        .map(|(_, x)| x)
        .sum();
    for (k, x) in v.iter_mut().enumerate() {
        *x = if k == l {
            small
        } else {
            *x / rest * (1.0 - small)
        };
    }
    to_price(v)
}

/// Uniform point of the trimmed simplex.
pub fn point_in_trimmed(rng: &mut impl Rng, simplex: &TrimmedSimplex) -> PriceVector {
    let eps = simplex.epsilon();
    let budget = simplex.budget();
    let v = dirichlet(rng, simplex.dim())
        .into_iter()
        .map(|x| eps + budget * x)
        .collect();
    to_price(v)
}

fn to_price(mut v: Vec<f64>) -> PriceVector {
    // Rounding can leave the sum a few ulps off; one renormalization fixes it.
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    PriceVector::new(v).expect("sampler produced a simplex point")
}

/// Shape of randomly generated economies.
#[derive(Clone, Debug)]
pub struct EconomyShape {
    pub min_dim: usize,
    pub max_dim: usize,
    pub max_consumers: usize,
    /// Probability that a consumer is CES rather than Cobb-Douglas.
    pub ces_share: f64,
    pub sigma_range: (f64, f64),
    /// Probability that an endowment entry is zero.
    pub zero_endowment_share: f64,
}

impl Default for EconomyShape {
    fn default() -> Self {
        EconomyShape {
            min_dim: 2,
            max_dim: 10,
            max_consumers: 20,
            ces_share: 0.0,
            sigma_range: (0.3, 3.0),
            zero_endowment_share: 0.3,
        }
    }
}

/// Draws a valid economy: weights in `[0.05, 1)` before normalization,
/// endowments in `[0, 2)` with some entries zeroed, and a top-up on any
/// commodity whose aggregate endowment came out zero.
pub fn random_economy(rng: &mut impl Rng, shape: &EconomyShape) -> Economy {
    let dim = rng.random_range(shape.min_dim..=shape.max_dim);
    let count = rng.random_range(1..=shape.max_consumers);
    let mut specs: Vec<(Preference, Vec<f64>)> = (0..count)
        .map(|_| {
            let weights: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..1.0)).collect();
            let preference = if rng.random_bool(shape.ces_share) {
                let mut sigma = rng.random_range(shape.sigma_range.0..shape.sigma_range.1);
                if (sigma - 1.0).abs() < 1e-3 {
                    sigma += 0.01;
                }
                Preference::Ces { weights, sigma }
            } else {
                Preference::CobbDouglas { weights }
            };
            let endowment = (0..dim)
                .map(|_| {
                    if rng.random_bool(shape.zero_endowment_share) {
                        0.0
                    } else {
                        rng.random_range(0.0..2.0)
                    }
                })
                .collect();
            (preference, endowment)
        })
        .collect();
    for l in 0..dim {
        if specs.iter().all(|(_, e)| e[l] == 0.0) {
            let i = rng.random_range(0..count);
            specs[i].1[l] = rng.random_range(0.5..1.5);
        }
    }
    let consumers = specs
        .into_iter()
        .map(|(p, e)| {
            Consumer::normalizing(p, e)
                .expect("generated consumer is valid")
                .0
        })
        .collect();
    Economy::new(consumers).expect("generated economy is valid")
}
