//! Slow reference computations for cross-checking the solver.
//!
//! Nothing here shares code with the fast paths beyond excess-demand
//! evaluation: equilibria are found by lattice enumeration or by power
//! iteration on the Cobb-Douglas clearing matrix, projections by lattice
//! enumeration.

use serde::{Deserialize, Serialize};

use crate::economy::{Economy, Preference, PriceVector};
use crate::error::{Result, WalrasError};
use crate::simplex::TrimmedSimplex;

pub const MAX_GRID_DIM: usize = 4;
pub const MAX_PROJECTION_DIM: usize = 3;

/// Lattice `{ eps + (1 - L eps) k / resolution : k in N^L, sum k = resolution }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub resolution: usize,
    /// Floor of every coordinate; `0` enumerates the whole simplex (boundary
    /// points are then skipped where excess demand is undefined).
    pub epsilon: f64,
}

impl GridSpec {
    pub fn new(resolution: usize, epsilon: f64) -> Result<Self> {
        if resolution < 2 {
            return Err(WalrasError::Domain(format!(
                "grid resolution must be at least 2, got {resolution}"
            )));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(WalrasError::Domain(format!(
                "grid epsilon must be >= 0, got {epsilon}"
            )));
        }
        Ok(GridSpec {
            resolution,
            epsilon,
        })
    }

    /// Distance between neighbouring lattice values of one coordinate.
    pub fn spacing(&self, dim: usize) -> f64 {
        (1.0 - dim as f64 * self.epsilon) / self.resolution as f64
    }

    fn check(&self, dim: usize) -> Result<()> {
        if self.epsilon * dim as f64 > 1.0 {
            return Err(WalrasError::Domain(format!(
                "grid epsilon {} exceeds 1/{dim}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Visits every composition of `total` into `parts` non-negative integers in
/// lexicographic order.
fn for_each_composition(total: usize, parts: usize, mut visit: impl FnMut(&[usize])) {
    fn rec(rest: usize, slot: usize, k: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if slot + 1 == k.len() {
            k[slot] = rest;
            visit(k);
            return;
        }
        for v in 0..=rest {
            k[slot] = v;
            rec(rest - v, slot + 1, k, visit);
        }
    }
    let mut k = vec![0; parts];
    rec(total, 0, &mut k, &mut visit);
}

fn lattice_point(k: &[usize], grid: &GridSpec) -> Vec<f64> {
    let dim = k.len();
    let budget = 1.0 - dim as f64 * grid.epsilon;
    let n = grid.resolution as f64;
    k.iter()
        .map(|&ki| grid.epsilon + budget * ki as f64 / n)
        .collect()
}

/// Lattice point of the trimmed simplex minimizing `||z(p)||_inf`, and that
/// minimum. Ties go to the lexicographically smallest lattice index.
pub fn grid_search_equilibrium(economy: &Economy, grid: &GridSpec) -> Result<(PriceVector, f64)> {
    let dim = economy.dim();
    if dim > MAX_GRID_DIM {
        return Err(WalrasError::Refused(format!(
            "grid search supports at most {MAX_GRID_DIM} commodities, economy has {dim}"
        )));
    }
    grid.check(dim)?;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut failure = None;
    for_each_composition(grid.resolution, dim, |k| {
        if failure.is_some() {
            return;
        }
        let p = lattice_point(k, grid);
        if p.iter().any(|&v| v <= 0.0) {
            return;
        }
        match economy.excess_demand_raw(&p) {
            Ok(z) => {
                let norm = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if best.as_ref().is_none_or(|(_, b)| norm < *b) {
                    best = Some((p, norm));
                }
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (p, norm) =
        best.ok_or_else(|| WalrasError::Domain("grid contains no interior lattice point".into()))?;
    Ok((PriceVector::normalized(p)?, norm))
}

/// Equilibrium of an all-Cobb-Douglas economy by power iteration.
///
/// Clearing `sum_i a_il (p . w_i) / p_l = Omega_l` says `p = B p` with
/// `B_lm = sum_i a_il w_im / Omega_l`. `B` is entrywise positive (weights
/// are positive and every commodity is owned by someone), so iterating
/// `p <- B p / sum(B p)` from the barycenter converges to its Perron vector.
/// Stops when successive iterates differ by less than `tol` in the sup norm,
/// then checks `||z(p)||_inf < 10 tol scale` with
/// `scale = max_l Omega_l / p_l`.
pub fn cobb_douglas_perron(economy: &Economy, tol: f64, max_iters: usize) -> Result<PriceVector> {
    let dim = economy.dim();
    let omega = economy.aggregate_endowment();
    let mut b = vec![vec![0.0; dim]; dim];
    for (i, c) in economy.consumers().iter().enumerate() {
        let Preference::CobbDouglas { weights } = c.preference() else {
            return Err(WalrasError::Refused(format!(
                "consumer {i} is not Cobb-Douglas; the Perron oracle covers Cobb-Douglas economies only"
            )));
        };
        for l in 0..dim {
            for m in 0..dim {
                b[l][m] += weights[l] * c.endowment()[m] / omega[l];
            }
        }
    }

    let mut p = vec![1.0 / dim as f64; dim];
    for _ in 0..max_iters {
        let mut next: Vec<f64> = b
            .iter()
            .map(|row| row.iter().zip(&p).map(|(x, y)| x * y).sum())
            .collect();
        let sum: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= sum);
        let change = next
            .iter()
            .zip(&p)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        p = next;
        if change < tol {
            let p = PriceVector::normalized(p)?;
            let scale = omega
                .iter()
                .zip(p.as_slice())
                .fold(0.0f64, |m, (o, pl)| m.max(o / pl));
            let residual = economy.excess_demand(&p)?.sup_norm();
            if residual >= 10.0 * tol * scale {
                return Err(WalrasError::Refused(format!(
                    "power iteration stalled: clearing residual {residual:e} exceeds {:e}",
                    10.0 * tol * scale
                )));
            }
            return Ok(p);
        }
    }
    Err(WalrasError::OracleNonConvergence {
        iterations: max_iters,
    })
}

/// Lattice point of the trimmed simplex nearest to `x`.
pub fn projection_oracle(
    x: &[f64],
    simplex: &TrimmedSimplex,
    resolution: usize,
) -> Result<PriceVector> {
    let dim = simplex.dim();
    if x.len() != dim {
        return Err(WalrasError::Domain(format!(
            "point has {} coordinates, simplex has {dim}",
            x.len()
        )));
    }
    if dim > MAX_PROJECTION_DIM {
        return Err(WalrasError::Refused(format!(
            "projection oracle supports at most {MAX_PROJECTION_DIM} coordinates, got {dim}"
        )));
    }
    let grid = GridSpec::new(resolution, simplex.epsilon())?;
    grid.check(dim)?;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for_each_composition(resolution, dim, |k| {
        let q = lattice_point(k, &grid);
        let d: f64 = q.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(_, b)| d < *b) {
            best = Some((q, d));
        }
    });
    let (q, _) = best.expect("a lattice has at least one point");
    PriceVector::normalized(q)
}
