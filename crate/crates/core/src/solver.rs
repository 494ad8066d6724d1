//! Locating and certifying equilibrium prices.
//!
//! [`epsilon_search`] runs a damped fixed-point iteration of
//! [`phi`](crate::simplex::phi) on a trimmed simplex and shrinks the trim
//! until the candidate sits strictly inside it and a seeded sample of the
//! set `Q = { p interior : sum_l z_l(p) <= 0 }` does too. The accepted point
//! is then checked against market clearing, interiority and the variational
//! inequality `q . z(p*) <= 0` over the trimmed simplex.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::economy::{l2_diff, Economy, ExcessDemand, PriceVector};
use crate::error::{Result, WalrasError};
use crate::sampling;
use crate::simplex::{barycenter, phi_with_demand, project_trimmed, TrimmedSimplex};

/// Number of halvings after which adaptive damping stops shrinking.
const MAX_DAMPING_HALVINGS: i32 = 30;

/// Iterates kept for the error raised on a non-finite step.
const TAIL_LEN: usize = 5;

/// Iteration hyperparameters.
///
/// | field | default |
/// |---|---|
/// | `epsilon_init` | `1/(2L)` |
/// | `epsilon_shrink` | `0.5` |
/// | `damping` | `0.5` |
/// | `tol_fixed_point` | `1e-10` |
/// | `tol_market_clearing` | `1e-8` |
/// | `interior_margin` | `1e-9` |
/// | `max_iters` | `100000` |
/// | `max_epsilon_rounds` | `40` |
/// | `q_sample_count` | `10000` |
/// | `adaptive_damping` | `true` |
/// | `seed` | `0` |
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Initial trim; `None` means `1/(2L)`.
    pub epsilon_init: Option<f64>,
    pub epsilon_shrink: f64,
    /// Krasnoselskii-Mann weight on `phi(p)`.
    pub damping: f64,
    pub tol_fixed_point: f64,
    pub tol_market_clearing: f64,
    /// A candidate is interior when `min_l p_l > epsilon + interior_margin`.
    pub interior_margin: f64,
    pub max_iters: usize,
    pub max_epsilon_rounds: usize,
    pub q_sample_count: usize,
    /// Halve the damping whenever the fixed-point residual grows.
    pub adaptive_damping: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon_init: None,
            epsilon_shrink: 0.5,
            damping: 0.5,
            tol_fixed_point: 1e-10,
            tol_market_clearing: 1e-8,
            interior_margin: 1e-9,
            max_iters: 100_000,
            max_epsilon_rounds: 40,
            q_sample_count: 10_000,
            adaptive_damping: true,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn epsilon_init_for(&self, dim: usize) -> f64 {
        self.epsilon_init.unwrap_or(0.5 / dim as f64)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let eps = self.epsilon_init_for(dim);
        if !(eps > 0.0 && eps <= 1.0 / dim as f64) {
            return Err(WalrasError::Domain(format!(
                "epsilon_init must lie in (0, 1/{dim}], got {eps}"
            )));
        }
        if !(self.epsilon_shrink > 0.0 && self.epsilon_shrink < 1.0) {
            return Err(WalrasError::Domain(format!(
                "epsilon_shrink must lie in (0, 1), got {}",
                self.epsilon_shrink
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(WalrasError::Domain(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        for (name, v) in [
            ("tol_fixed_point", self.tol_fixed_point),
            ("tol_market_clearing", self.tol_market_clearing),
            ("interior_margin", self.interior_margin),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(WalrasError::Domain(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One row of the optional iteration trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub epsilon: f64,
    pub p: Vec<f64>,
    pub fixed_point_residual: f64,
    pub clearing_residual: f64,
}

/// Outcome of [`fixed_point_iterate`].
#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointRun {
    pub p: PriceVector,
    /// Damped updates performed.
    pub iterations: usize,
    /// `||p - phi(p)||` at the returned point.
    pub residual: f64,
    pub converged: bool,
    pub damping_final: f64,
    /// Iterate with the smallest residual seen, and that residual.
    pub best: (PriceVector, f64),
}

/// Damped iteration `p <- (1 - lambda) p + lambda phi(p)` from `p0` until
/// `||p - phi(p)|| <= tol_fixed_point` or `max_iters` updates.
///
/// With `adaptive_damping`, `lambda` is halved each time the residual
/// increases (down to `damping * 2^-30`). Every iterate is a convex
/// combination of points of the trimmed simplex, so the run never leaves it.
pub fn fixed_point_iterate(
    economy: &Economy,
    simplex: &TrimmedSimplex,
    p0: &PriceVector,
    config: &SolverConfig,
) -> Result<FixedPointRun> {
    iterate(
        economy,
        simplex,
        p0,
        config,
        config.damping,
        &mut Tracer::off(),
    )
}

struct Tracer<'a> {
    rows: Option<&'a mut Vec<TraceRow>>,
    offset: usize,
}

impl<'a> Tracer<'a> {
    fn off() -> Self {
        Tracer {
            rows: None,
            offset: 0,
        }
    }
}

fn iterate(
    economy: &Economy,
    simplex: &TrimmedSimplex,
    p0: &PriceVector,
    config: &SolverConfig,
    damping: f64,
    tracer: &mut Tracer<'_>,
) -> Result<FixedPointRun> {
    if !simplex.contains_approx(p0) {
        return Err(WalrasError::Domain(format!(
            "starting point {:?} is outside the trimmed simplex (epsilon = {})",
            p0.as_slice(),
            simplex.epsilon()
        )));
    }
    let floor = damping * 0.5f64.powi(MAX_DAMPING_HALVINGS);
    let mut lambda = damping;
    let mut p = p0.clone();
    let mut previous = f64::INFINITY;
    let mut best = (p.clone(), f64::INFINITY);
    let mut tail: VecDeque<Vec<f64>> = VecDeque::with_capacity(TAIL_LEN);
    let mut k = 0;
    loop {
        let (target, z) = phi_with_demand(economy, &p, simplex)?;
        let residual = l2_diff(p.as_slice(), target.as_slice());
        if let Some(rows) = tracer.rows.as_deref_mut() {
            rows.push(TraceRow {
                iteration: tracer.offset + k,
                epsilon: simplex.epsilon(),
                p: p.as_slice().to_vec(),
                fixed_point_residual: residual,
                clearing_residual: z.sup_norm(),
            });
        }
        if residual < best.1 {
            best = (p.clone(), residual);
        }
        let converged = residual <= config.tol_fixed_point;
        if converged || k >= config.max_iters {
            tracer.offset += k + 1;
            return Ok(FixedPointRun {
                p,
                iterations: k,
                residual,
                converged,
                damping_final: lambda,
                best,
            });
        }
        if config.adaptive_damping && residual > previous {
            lambda = (lambda * 0.5).max(floor);
        }
        previous = residual;

        let next: Vec<f64> = p
            .as_slice()
            .iter()
            .zip(target.as_slice())
            .map(|(a, b)| a + lambda * (b - a))
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(WalrasError::NonFiniteIterate {
                iteration: k + 1,
                tail: tail.into_iter().collect(),
            });
        }
        if tail.len() == TAIL_LEN {
            tail.pop_front();
        }
        tail.push_back(p.as_slice().to_vec());
        p = PriceVector::normalized(next)?;
        k += 1;
    }
}

/// Certified outcome of a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub p_star: PriceVector,
    pub z_at_star: ExcessDemand,
    pub epsilon_final: f64,
    /// Damped updates summed over all rounds and restarts.
    pub iterations: usize,
    pub epsilon_rounds: usize,
    /// `||p* - phi(p*)||`.
    pub fixed_point_residual: f64,
    /// `||z(p*)||_inf`.
    pub clearing_residual: f64,
    /// `|p* . z(p*)|`.
    pub walras_residual: f64,
    pub interior_certificate: bool,
    /// `max` over the vertices of the trimmed simplex of `v . z(p*)`.
    pub vi_certificate: f64,
    /// Every sampled price with `sum_l z_l <= 0` lies strictly inside the
    /// final trimmed simplex.
    pub q_containment: bool,
    pub q_sample_size: usize,
    /// Smallest coordinate over sampled members of `Q`.
    pub q_sample_min_coordinate: f64,
    pub damping_final: f64,
    /// Retries with halved damping after exhausting `max_iters`.
    pub restarts: usize,
    pub seed: u64,
    pub converged: bool,
}

/// Per-point certificates; the subset of [`SolverReport`] that depends only
/// on the candidate price and the trimmed simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCheck {
    pub z: ExcessDemand,
    pub clearing_residual: f64,
    pub walras_residual: f64,
    pub fixed_point_residual: f64,
    pub interior_certificate: bool,
    pub vi_certificate: f64,
    pub converged: bool,
}

pub fn verify_equilibrium(
    economy: &Economy,
    p: &PriceVector,
    simplex: &TrimmedSimplex,
    config: &SolverConfig,
) -> Result<EquilibriumCheck> {
    let (target, z) = phi_with_demand(economy, p, simplex)?;
    let fixed_point_residual = l2_diff(p.as_slice(), target.as_slice());
    let clearing_residual = z.sup_norm();
    let walras_residual = z.walras_residual.abs();
    let interior_certificate = is_interior(p, simplex, config.interior_margin);
    let vi_certificate = vi_value(&z.z, simplex);
    let converged = clearing_residual <= config.tol_market_clearing
        && fixed_point_residual <= config.tol_fixed_point
        && interior_certificate
        && vi_certificate <= config.tol_market_clearing;
    Ok(EquilibriumCheck {
        z,
        clearing_residual,
        walras_residual,
        fixed_point_residual,
        interior_certificate,
        vi_certificate,
        converged,
    })
}

/// `max_{q in trimmed simplex} q . z(p)`, attained at a vertex.
pub fn verify_variational_inequality(
    economy: &Economy,
    p: &PriceVector,
    simplex: &TrimmedSimplex,
) -> Result<f64> {
    let z = economy.excess_demand(p)?;
    Ok(vi_value(&z.z, simplex))
}

fn vi_value(z: &[f64], simplex: &TrimmedSimplex) -> f64 {
    simplex
        .vertices()
        .map(|v| v.iter().zip(z).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn is_interior(p: &PriceVector, simplex: &TrimmedSimplex, margin: f64) -> bool {
    simplex.contains(p, true) && p.min() > simplex.epsilon() + margin
}

/// Seeded sample of interior prices and the members of `Q` among them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QSample {
    pub size: usize,
    pub members: usize,
    /// Smallest coordinate over members; the barycenter is always a member.
    pub min_coordinate: f64,
}

impl QSample {
    pub fn contained_in(&self, simplex: &TrimmedSimplex) -> bool {
        self.min_coordinate > simplex.epsilon()
    }
}

/// Samples `count` prices (the barycenter, then alternating uniform and
/// boundary-biased draws) and records where `sum_l z_l(p) <= 0`.
pub fn sample_q(economy: &Economy, count: usize, seed: u64) -> Result<QSample> {
    let dim = economy.dim();
    // sum_l z_l(q-bar) = L (q-bar . z(q-bar)) vanishes by Walras' law; it is
    // counted as a member regardless of rounding.
    let mut min_coordinate = 1.0 / dim as f64;
    let mut members = 1;
    let mut rng = sampling::rng(seed);
    for k in 1..count.max(1) {
        let p = if k % 2 == 1 {
            sampling::dirichlet_price(&mut rng, dim)
        } else {
            sampling::boundary_biased_price(&mut rng, dim)
        };
        let z = economy.excess_demand(&p)?;
        if z.sum() <= 0.0 {
            members += 1;
            min_coordinate = min_coordinate.min(p.min());
        }
    }
    Ok(QSample {
        size: count.max(1),
        members,
        min_coordinate,
    })
}

/// Sampled surrogate for `Q subset int(trimmed simplex)`.
pub fn check_q_containment(
    economy: &Economy,
    simplex: &TrimmedSimplex,
    sample_count: usize,
    seed: u64,
) -> Result<bool> {
    Ok(sample_q(economy, sample_count, seed)?.contained_in(simplex))
}

/// Runs the fixed-point iteration at `epsilon_init`, shrinking the trim by
/// `epsilon_shrink` until the candidate is interior and the sampled `Q` is
/// contained, warm-starting each round from the previous candidate.
///
/// Fails with [`WalrasError::BoundaryTrapped`] when `max_epsilon_rounds` runs
/// out. A round whose iteration does not converge (even after one retry
/// with halved damping) ends the search with `converged = false`.
pub fn epsilon_search(
    economy: &Economy,
    config: &SolverConfig,
) -> Result<(TrimmedSimplex, SolverReport)> {
    search(economy, config, None, &mut Tracer::off())
}

fn search(
    economy: &Economy,
    config: &SolverConfig,
    start: Option<PriceVector>,
    tracer: &mut Tracer<'_>,
) -> Result<(TrimmedSimplex, SolverReport)> {
    let dim = economy.dim();
    config.validate(dim)?;
    let q_sample = sample_q(economy, config.q_sample_count, config.seed)?;
    let mut eps = config.epsilon_init_for(dim);
    let mut p = match start {
        Some(p) => p,
        None => barycenter(dim)?,
    };
    let mut iterations = 0;
    let mut restarts = 0;
    let mut last = None;
    for round in 1..=config.max_epsilon_rounds {
        let simplex = TrimmedSimplex::new(dim, eps)?;
        p = project_trimmed(p.as_slice(), &simplex)?;
        let mut run = iterate(economy, &simplex, &p, config, config.damping, tracer)?;
        iterations += run.iterations;
        if !run.converged {
            restarts += 1;
            let retry_from = run.best.0.clone();
            run = iterate(
                economy,
                &simplex,
                &retry_from,
                config,
                run.damping_final * 0.5,
                tracer,
            )?;
            iterations += run.iterations;
        }
        p = run.p.clone();
        let check = verify_equilibrium(economy, &p, &simplex, config)?;
        let q_containment = q_sample.contained_in(&simplex);
        let accepted = run.converged && check.interior_certificate && q_containment;
        let report = SolverReport {
            p_star: p.clone(),
            clearing_residual: check.clearing_residual,
            walras_residual: check.walras_residual,
            fixed_point_residual: check.fixed_point_residual,
            interior_certificate: check.interior_certificate,
            vi_certificate: check.vi_certificate,
            z_at_star: check.z,
            epsilon_final: eps,
            iterations,
            epsilon_rounds: round,
            q_containment,
            q_sample_size: q_sample.size,
            q_sample_min_coordinate: q_sample.min_coordinate,
            damping_final: run.damping_final,
            restarts,
            seed: config.seed,
            converged: accepted && check.converged,
        };
        if accepted || !run.converged {
            return Ok((simplex, report));
        }
        last = Some(report);
        eps *= config.epsilon_shrink;
    }
    match last {
        Some(report) => Err(WalrasError::BoundaryTrapped {
            report: Box::new(report),
        }),
        None => Err(WalrasError::Domain(
            "max_epsilon_rounds must be at least 1".into(),
        )),
    }
}

/// Finds and certifies equilibrium prices. Deterministic in
/// `(economy, config)`.
pub fn solve(economy: &Economy, config: &SolverConfig) -> Result<SolverReport> {
    epsilon_search(economy, config).map(|(_, report)| report)
}

/// [`solve`] that also returns every iterate.
pub fn solve_traced(
    economy: &Economy,
    config: &SolverConfig,
) -> Result<(SolverReport, Vec<TraceRow>)> {
    let mut rows = Vec::new();
    let mut tracer = Tracer {
        rows: Some(&mut rows),
        offset: 0,
    };
    let (_, report) = search(economy, config, None, &mut tracer)?;
    Ok((report, rows))
}

/// Runs `starts` independent solves concurrently, seeds `config.seed + k`.
/// Start 0 begins at the barycenter, the others at seeded random points of
/// the initial trimmed simplex. The best report is picked by
/// (converged, clearing residual, seed).
pub fn solve_multistart(
    economy: &Economy,
    config: &SolverConfig,
    starts: usize,
) -> Result<SolverReport> {
    let dim = economy.dim();
    config.validate(dim)?;
    let initial = TrimmedSimplex::new(dim, config.epsilon_init_for(dim))?;
    let outcomes: Vec<Result<SolverReport>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..starts.max(1) as u64)
            .map(|k| {
                let mut cfg = config.clone();
                cfg.seed = config.seed.wrapping_add(k);
                scope.spawn(move || {
                    let start = if k == 0 {
                        barycenter(dim)?
                    } else {
                        sampling::point_in_trimmed(&mut sampling::rng(cfg.seed), &initial)
                    };
                    search(economy, &cfg, Some(start), &mut Tracer::off()).map(|(_, r)| r)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect()
    });

    let mut best: Option<SolverReport> = None;
    let mut first_error = None;
    for outcome in outcomes {
        let report = match outcome {
            Ok(r) => r,
            Err(WalrasError::BoundaryTrapped { report }) => *report,
            Err(e) => {
                first_error.get_or_insert(e);
                continue;
            }
        };
        let better = best.as_ref().is_none_or(|b| {
            (!report.converged, report.clearing_residual, report.seed)
                .partial_cmp(&(!b.converged, b.clearing_residual, b.seed))
                .is_some_and(|o| o.is_lt())
        });
        if better {
            best = Some(report);
        }
    }
    match (best, first_error) {
        (Some(r), _) => Ok(r),
        (None, Some(e)) => Err(e),
        (None, None) => unreachable!("at least one start runs"),
    }
}
