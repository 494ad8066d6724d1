//! The trimmed simplex and the perturbed argmax map on it.

use serde::{Deserialize, Serialize};

use crate::economy::{dot, Economy, ExcessDemand, PriceVector, SIMPLEX_TOL};
use crate::error::{Result, WalrasError};

/// `{ p in simplex : p_l >= epsilon for all l }` with `0 < epsilon <= 1/L`.
///
/// Always non-empty (it contains the barycenter), compact and convex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimmedSimplex {
    dim: usize,
    epsilon: f64,
}

impl TrimmedSimplex {
    pub fn new(dim: usize, epsilon: f64) -> Result<Self> {
        if dim < 2 {
            return Err(WalrasError::Domain(format!(
                "trimmed simplex needs at least 2 commodities, got {dim}"
            )));
        }
        let cap = 1.0 / dim as f64;
        if !(epsilon > 0.0 && epsilon <= cap * (1.0 + SIMPLEX_TOL)) {
            return Err(WalrasError::Domain(format!(
                "epsilon must lie in (0, 1/{dim}], got {epsilon}"
            )));
        }
        Ok(TrimmedSimplex {
            dim,
            epsilon: epsilon.min(cap),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Mass left after every coordinate gets its floor: `1 - L epsilon`.
    pub fn budget(&self) -> f64 {
        (1.0 - self.dim as f64 * self.epsilon).max(0.0)
    }

    /// Membership test; `strict` asks for the interior `p_l > epsilon`.
    pub fn contains(&self, p: &PriceVector, strict: bool) -> bool {
        p.len() == self.dim
            && p.as_slice().iter().all(|&v| {
                if strict {
                    v > self.epsilon
                } else {
                    v >= self.epsilon
                }
            })
    }

    /// Like non-strict [`TrimmedSimplex::contains`] but accepting coordinates
    /// up to [`SIMPLEX_TOL`] below the floor, which is what convex
    /// combinations of members can produce after rounding.
    pub(crate) fn contains_approx(&self, p: &PriceVector) -> bool {
        p.len() == self.dim
            && p.as_slice()
                .iter()
                .all(|&v| v >= self.epsilon - SIMPLEX_TOL)
    }

    /// The `L` vertices: `(1 - (L-1) eps)` on one coordinate, `eps` elsewhere.
    pub fn vertices(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let top = self.epsilon + self.budget();
        (0..self.dim).map(move |k| {
            (0..self.dim)
                .map(|l| if l == k { top } else { self.epsilon })
                .collect()
        })
    }
}

/// Shorthand for [`TrimmedSimplex::contains`].
pub fn contains(p: &PriceVector, simplex: &TrimmedSimplex, strict: bool) -> bool {
    simplex.contains(p, strict)
}

/// The barycenter `(1/L, ..., 1/L)`.
pub fn barycenter(dim: usize) -> Result<PriceVector> {
    if dim < 2 {
        return Err(WalrasError::Domain(format!(
            "barycenter needs at least 2 commodities, got {dim}"
        )));
    }
    PriceVector::new(vec![1.0 / dim as f64; dim])
}

/// Euclidean projection of `x` onto the trimmed simplex.
///
/// Shifting by `epsilon` reduces the problem to projecting onto
/// `{ v >= 0 : sum v = 1 - L eps }`, solved exactly with a descending sort
/// and prefix sums: `tau` is fixed by the largest `k` with
/// `u_k > (sum_{j<=k} u_j - budget) / k`. Ties in the sort are broken by
/// index; `tau` does not depend on the order among equal values.
pub fn project_trimmed(x: &[f64], simplex: &TrimmedSimplex) -> Result<PriceVector> {
    let dim = simplex.dim();
    if x.len() != dim {
        return Err(WalrasError::Domain(format!(
            "point has {} coordinates, simplex has {dim}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(WalrasError::Domain(format!(
            "cannot project non-finite point {x:?}"
        )));
    }
    let eps = simplex.epsilon();
    let budget = simplex.budget();
    let shifted: Vec<f64> = x.iter().map(|v| v - eps).collect();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| shifted[j].total_cmp(&shifted[i]).then(i.cmp(&j)));

    let mut prefix = 0.0;
    let mut tau = shifted[order[0]] - budget;
    for (k, &i) in order.iter().enumerate() {
        prefix += shifted[i];
        let candidate = (prefix - budget) / (k + 1) as f64;
        if k == 0 || shifted[i] > candidate {
            tau = candidate;
        } else {
            break;
        }
    }

    let q: Vec<f64> = shifted.iter().map(|v| (v - tau).max(0.0) + eps).collect();
    PriceVector::normalized_onto(q, eps)
}

impl PriceVector {
    /// Removes the rounding drift of a projected point: rescales the mass
    /// above the floor so the total is one, keeping every coordinate `>= eps`.
    fn normalized_onto(mut q: Vec<f64>, eps: f64) -> Result<PriceVector> {
        let sum: f64 = q.iter().sum();
        let excess = sum - 1.0;
        if excess != 0.0 {
            let above: f64 = q.iter().map(|v| v - eps).sum();
            if above > 0.0 {
                let factor = (above - excess) / above;
                q.iter_mut().for_each(|v| *v = eps + (*v - eps) * factor);
            }
        }
        PriceVector::new(q)
    }
}

/// Value of the perturbed objective `g(q, p) = q . z(p) - ||q - p||^2`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ObjectiveValue(pub f64);

pub fn objective_g(q: &PriceVector, p: &PriceVector, z: &ExcessDemand) -> Result<ObjectiveValue> {
    if q.len() != p.len() || z.z.len() != p.len() {
        return Err(WalrasError::Domain(format!(
            "dimension mismatch: q has {}, p has {}, z has {}",
            q.len(),
            p.len(),
            z.z.len()
        )));
    }
    let dist2: f64 = q
        .as_slice()
        .iter()
        .zip(p.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(ObjectiveValue(dot(q.as_slice(), &z.z) - dist2))
}

/// The unique maximizer of `g(., p)` over the trimmed simplex.
///
/// `q . z - ||q - p||^2 = -||q - (p + z/2)||^2 + const`, so the maximizer is
/// the projection of `p + z(p)/2`.
pub fn phi(economy: &Economy, p: &PriceVector, simplex: &TrimmedSimplex) -> Result<PriceVector> {
    phi_with_demand(economy, p, simplex).map(|(q, _)| q)
}

/// [`phi`] together with the excess demand evaluated at `p`.
pub fn phi_with_demand(
    economy: &Economy,
    p: &PriceVector,
    simplex: &TrimmedSimplex,
) -> Result<(PriceVector, ExcessDemand)> {
    if economy.dim() != simplex.dim() || !simplex.contains_approx(p) {
        return Err(WalrasError::Domain(format!(
            "phi needs a point of the trimmed simplex (L = {}, epsilon = {}), got {:?}",
            simplex.dim(),
            simplex.epsilon(),
            p.as_slice()
        )));
    }
    let z = economy.excess_demand(p)?;
    let target: Vec<f64> = p
        .as_slice()
        .iter()
        .zip(&z.z)
        .map(|(pl, zl)| pl + 0.5 * zl)
        .collect();
    Ok((project_trimmed(&target, simplex)?, z))
}
