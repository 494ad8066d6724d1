//! Exchange economies and their aggregate excess demand.
//!
//! Demands are closed-form: Cobb-Douglas consumers spend the fixed share
//! `alpha_l` of wealth on good `l`, CES consumers follow the constant
//! elasticity demand system. `z` is defined on all of `R^L_{++}`; only the
//! solver restricts attention to the simplex.
//!
//! Commodity indices are 0-based throughout the API.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalrasError};
use crate::sampling;
use crate::simplex::TrimmedSimplex;

/// Absolute tolerance for simplex membership (sum to one) and weight
/// normalization.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// A point of the unit simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PriceVector(Vec<f64>);

impl PriceVector {
    /// Wraps `values`, checking `L >= 2`, non-negativity and `sum == 1`
    /// within [`SIMPLEX_TOL`].
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(WalrasError::Domain(format!(
                "price vector needs at least 2 commodities, got {}",
                values.len()
            )));
        }
        if let Some((l, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(WalrasError::Domain(format!(
                "price {l} is {v}, expected a finite non-negative number"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(WalrasError::Domain(format!(
                "prices sum to {sum}, expected 1 within {SIMPLEX_TOL:e}"
            )));
        }
        Ok(Self(values))
    }

    /// Rescales a non-negative vector with positive sum onto the simplex.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        let sum: f64 = values.iter().sum();
        if !(sum.is_finite() && sum > 0.0) || values.iter().any(|v| !(*v >= 0.0)) {
            return Err(WalrasError::Domain(format!(
                "cannot normalize {values:?} onto the simplex"
            )));
        }
        Self::new(values.into_iter().map(|v| v / sum).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All entries strictly positive.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&v| v > 0.0)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<f64>> for PriceVector {
    type Error = WalrasError;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<PriceVector> for Vec<f64> {
    fn from(p: PriceVector) -> Self {
        p.0
    }
}

impl AsRef<[f64]> for PriceVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Preference family of a consumer. Serializes as
/// `{"type": "cobb_douglas" | "ces", "weights": [...], "sigma": ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Preference {
    CobbDouglas { weights: Vec<f64> },
    Ces { weights: Vec<f64>, sigma: f64 },
}

impl Preference {
    pub fn weights(&self) -> &[f64] {
        match self {
            Preference::CobbDouglas { weights } | Preference::Ces { weights, .. } => weights,
        }
    }

    fn weights_mut(&mut self) -> &mut Vec<f64> {
        match self {
            Preference::CobbDouglas { weights } | Preference::Ces { weights, .. } => weights,
        }
    }

    pub fn is_cobb_douglas(&self) -> bool {
        matches!(self, Preference::CobbDouglas { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Consumer {
    preference: Preference,
    endowment: Vec<f64>,
}

impl Consumer {
    /// Builds a consumer whose weights are already normalized.
    pub fn new(preference: Preference, endowment: Vec<f64>) -> Result<Self> {
        let sum: f64 = preference.weights().iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(WalrasError::InvalidEconomy(format!(
                "preference weights sum to {sum}, expected 1"
            )));
        }
        Self::normalizing(preference, endowment).map(|(c, _)| c)
    }

    /// Builds a consumer, dividing the weights by their sum. Returns the
    /// consumer and the sum that was divided out.
    pub fn normalizing(mut preference: Preference, endowment: Vec<f64>) -> Result<(Self, f64)> {
        let len = preference.weights().len();
        if len < 2 {
            return Err(WalrasError::InvalidEconomy(format!(
                "a consumer needs at least 2 commodities, got {len}"
            )));
        }
        if endowment.len() != len {
            return Err(WalrasError::InvalidEconomy(format!(
                "endowment has {} entries but weights have {len}",
                endowment.len()
            )));
        }
        if let Some((l, w)) = preference
            .weights()
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(WalrasError::InvalidEconomy(format!(
                "weight for commodity {l} is {w}, expected a finite positive number"
            )));
        }
        if let Preference::Ces { sigma, .. } = preference {
            if !(sigma.is_finite() && sigma > 0.0) || sigma == 1.0 {
                return Err(WalrasError::InvalidEconomy(format!(
                    "CES elasticity must be positive, finite and different from 1, got {sigma}"
                )));
            }
        }
        if let Some((l, w)) = endowment
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w >= 0.0))
        {
            return Err(WalrasError::InvalidEconomy(format!(
                "endowment of commodity {l} is {w}, expected a finite non-negative number"
            )));
        }
        // An all-zero endowment is legal here: wealth is zero and so is demand.
        let sum: f64 = preference.weights().iter().sum();
        preference.weights_mut().iter_mut().for_each(|w| *w /= sum);
        Ok((
            Consumer {
                preference,
                endowment,
            },
            sum,
        ))
    }

    pub fn preference(&self) -> &Preference {
        &self.preference
    }

    pub fn endowment(&self) -> &[f64] {
        &self.endowment
    }

    pub fn wealth(&self, p: &[f64]) -> f64 {
        dot(p, &self.endowment)
    }

    /// Adds this consumer's demand at prices `p` into `out`.
    fn add_demand(&self, p: &[f64], out: &mut [f64]) {
        let wealth = self.wealth(p);
        if wealth == 0.0 {
            return;
        }
        match &self.preference {
            Preference::CobbDouglas { weights } => {
                for ((o, a), pl) in out.iter_mut().zip(weights).zip(p) {
                    *o += a * wealth / pl;
                }
            }
            Preference::Ces { weights, sigma } => {
                // x_l = a_l^s p_l^-s w / sum_m a_m^s p_m^(1-s), evaluated in
                // log space with the largest exponent factored out.
                let s = *sigma;
                let expo = |a: f64, pl: f64| s * a.ln() + (1.0 - s) * pl.ln();
                let top = weights
                    .iter()
                    .zip(p)
                    .map(|(&a, &pl)| expo(a, pl))
                    .fold(f64::NEG_INFINITY, f64::max);
                let denom: f64 = weights
                    .iter()
                    .zip(p)
                    .map(|(&a, &pl)| (expo(a, pl) - top).exp())
                    .sum();
                for ((o, &a), &pl) in out.iter_mut().zip(weights).zip(p) {
                    *o += wealth * (expo(a, pl) - top).exp() / (denom * pl);
                }
            }
        }
    }
}

/// Serialized form of an economy, as read from an economy file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomySpec {
    pub consumers: Vec<ConsumerSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsumerSpec {
    pub preference: Preference,
    pub endowment: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Economy {
    consumers: Vec<Consumer>,
    aggregate: Vec<f64>,
    weight_sums: Vec<f64>,
}

impl Economy {
    pub fn new(consumers: Vec<Consumer>) -> Result<Self> {
        let n = consumers.len();
        Self::build(consumers, vec![1.0; n])
    }

    /// Builds an economy from file data, normalizing each consumer's weights.
    /// The divided-out sums are kept in [`Economy::weight_sums`].
    pub fn from_spec(spec: EconomySpec) -> Result<Self> {
        let mut consumers = Vec::with_capacity(spec.consumers.len());
        let mut sums = Vec::with_capacity(spec.consumers.len());
        for (i, c) in spec.consumers.into_iter().enumerate() {
            let (consumer, sum) = Consumer::normalizing(c.preference, c.endowment)
                .map_err(|e| WalrasError::InvalidEconomy(format!("consumer {i}: {e}")))?;
            consumers.push(consumer);
            sums.push(sum);
        }
        Self::build(consumers, sums)
    }

    fn build(consumers: Vec<Consumer>, weight_sums: Vec<f64>) -> Result<Self> {
        let first = consumers
            .first()
            .ok_or_else(|| WalrasError::InvalidEconomy("economy has no consumers".into()))?;
        let dim = first.endowment.len();
        if let Some((i, c)) = consumers
            .iter()
            .enumerate()
            .find(|(_, c)| c.endowment.len() != dim)
        {
            return Err(WalrasError::InvalidEconomy(format!(
                "consumer {i} has {} commodities, consumer 0 has {dim}",
                c.endowment.len()
            )));
        }
        let mut aggregate = vec![0.0; dim];
        for c in &consumers {
            for (a, w) in aggregate.iter_mut().zip(&c.endowment) {
                *a += w;
            }
        }
        if let Some(l) = aggregate.iter().position(|&a| !(a > 0.0)) {
            return Err(WalrasError::InvalidEconomy(format!(
                "commodity {l} (0-based) has zero aggregate endowment"
            )));
        }
        Ok(Economy {
            consumers,
            aggregate,
            weight_sums,
        })
    }

    pub fn to_spec(&self) -> EconomySpec {
        EconomySpec {
            consumers: self
                .consumers
                .iter()
                .map(|c| ConsumerSpec {
                    preference: c.preference.clone(),
                    endowment: c.endowment.clone(),
                })
                .collect(),
        }
    }

    /// Number of commodities `L`.
    pub fn dim(&self) -> usize {
        self.aggregate.len()
    }

    pub fn consumers(&self) -> &[Consumer] {
        &self.consumers
    }

    /// Aggregate endowment `Omega`.
    pub fn aggregate_endowment(&self) -> &[f64] {
        &self.aggregate
    }

    /// Per-consumer weight sums divided out at load time (1 for consumers
    /// built from normalized weights).
    pub fn weight_sums(&self) -> &[f64] {
        &self.weight_sums
    }

    pub fn is_cobb_douglas(&self) -> bool {
        self.consumers
            .iter()
            .all(|c| c.preference.is_cobb_douglas())
    }

    /// Same preferences, every endowment multiplied by `factor`.
    pub fn with_scaled_endowments(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(WalrasError::Domain(format!(
                "endowment scale must be positive, got {factor}"
            )));
        }
        let consumers = self
            .consumers
            .iter()
            .map(|c| Consumer {
                preference: c.preference.clone(),
                endowment: c.endowment.iter().map(|w| w * factor).collect(),
            })
            .collect();
        Self::build(consumers, self.weight_sums.clone())
    }

    /// Excess demand at any strictly positive price vector, normalized or not.
    pub fn excess_demand_raw(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim() {
            return Err(WalrasError::Domain(format!(
                "price vector has {} entries, economy has {} commodities",
                p.len(),
                self.dim()
            )));
        }
        if p.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(WalrasError::Domain(format!(
                "excess demand needs strictly positive prices, got {p:?}"
            )));
        }
        let mut z = vec![0.0; p.len()];
        for c in &self.consumers {
            c.add_demand(p, &mut z);
        }
        for (zl, omega) in z.iter_mut().zip(&self.aggregate) {
            *zl -= omega;
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(WalrasError::Numeric { price: p.to_vec() });
        }
        Ok(z)
    }

    /// Excess demand at an interior point of the simplex.
    pub fn excess_demand(&self, p: &PriceVector) -> Result<ExcessDemand> {
        if !p.is_interior() {
            return Err(WalrasError::Domain(format!(
                "excess demand is defined on interior prices only, got {:?}",
                p.as_slice()
            )));
        }
        let z = self.excess_demand_raw(p.as_slice())?;
        let walras_residual = dot(p.as_slice(), &z);
        Ok(ExcessDemand { z, walras_residual })
    }

    /// `|p . z(p)|`.
    pub fn walras_residual(&self, p: &PriceVector) -> Result<f64> {
        Ok(self.excess_demand(p)?.walras_residual.abs())
    }

    /// `||z(scale * p) - z(p)||_inf`.
    pub fn check_homogeneity(&self, p: &PriceVector, scale: f64) -> Result<f64> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(WalrasError::Domain(format!(
                "homogeneity scale must be positive, got {scale}"
            )));
        }
        let base = self.excess_demand(p)?;
        let scaled: Vec<f64> = p.as_slice().iter().map(|v| v * scale).collect();
        let moved = self.excess_demand_raw(&scaled)?;
        Ok(max_abs_diff(&base.z, &moved))
    }

    /// A bound `s` with `z_l(p) > -s` everywhere. Demands are non-negative,
    /// so `z_l >= -Omega_l`; one unit of slack makes the inequality strict.
    pub fn lower_bound_s(&self) -> f64 {
        self.aggregate
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
            + 1.0
    }

    /// Walks from the barycenter toward the boundary face where the
    /// commodities in `vanishing` have price zero and records `max_l z_l`.
    ///
    /// Step `n` (1-based) puts `2^-n / L` on each vanishing commodity and
    /// spreads the remaining mass evenly over the others. The verdict is
    /// `Pass` when the last recorded value is at least `divergence_factor`
    /// times `max(first, s)`, with `s` from [`Economy::lower_bound_s`] as the
    /// scale floor; a single step is `Inconclusive`.
    pub fn boundary_divergence_probe(
        &self,
        vanishing: &[usize],
        steps: usize,
        divergence_factor: f64,
    ) -> Result<BoundaryProbe> {
        let dim = self.dim();
        let mut set: Vec<usize> = vanishing.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() || set.len() >= dim {
            return Err(WalrasError::Domain(format!(
                "vanishing set must be a non-empty proper subset of the {dim} commodities, got {vanishing:?}"
            )));
        }
        if let Some(&l) = set.iter().find(|&&l| l >= dim) {
            return Err(WalrasError::Domain(format!(
                "commodity {l} out of range for {dim} commodities"
            )));
        }
        if steps == 0 {
            return Err(WalrasError::Domain("probe needs at least one step".into()));
        }
        let mut points = Vec::with_capacity(steps);
        for n in 1..=steps {
            let small = 0.5f64.powi(n as i32) / dim as f64;
            let rest = (1.0 - small * set.len() as f64) / (dim - set.len()) as f64;
            let values: Vec<f64> = (0..dim)
                .map(|l| {
                    if set.binary_search(&l).is_ok() {
                        small
                    } else {
                        rest
                    }
                })
                .collect();
            let p = PriceVector::normalized(values)?;
            let z = self.excess_demand(&p)?;
            let top = z.z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            points.push((p, top));
        }
        let verdict = if steps < 2 {
            Verdict::Inconclusive
        } else {
            let first = points[0].1;
            let last = points[steps - 1].1;
            if last >= divergence_factor * first.max(self.lower_bound_s()) {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        };
        Ok(BoundaryProbe {
            vanishing_set: set,
            points,
            verdict,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessDemand {
    pub z: Vec<f64>,
    /// Signed `p . z`; zero up to rounding by Walras' law.
    pub walras_residual: f64,
}

impl ExcessDemand {
    pub fn sup_norm(&self) -> f64 {
        self.z.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.z.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryProbe {
    /// Sorted, deduplicated 0-based commodity indices.
    pub vanishing_set: Vec<usize>,
    /// `(p^n, max_l z_l(p^n))` for `n = 1..=steps`.
    pub points: Vec<(PriceVector, f64)>,
    pub verdict: Verdict,
}

impl BoundaryProbe {
    pub fn initial(&self) -> f64 {
        self.points.first().map_or(f64::NAN, |p| p.1)
    }

    pub fn last(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.1)
    }

    /// Length of the strictly increasing run at the end of the sequence.
    pub fn increasing_tail(&self) -> usize {
        let values: Vec<f64> = self.points.iter().map(|p| p.1).collect();
        let mut run = usize::from(!values.is_empty());
        for w in values.windows(2).rev() {
            if w[1] > w[0] {
                run += 1;
            } else {
                break;
            }
        }
        run
    }
}

/// Sample sizes and thresholds for [`check_assumptions`]. Stored in the
/// report so that every verdict can be audited against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    pub price_samples: usize,
    pub homogeneity_scales: Vec<f64>,
    pub tol_walras: f64,
    pub tol_homogeneity: f64,
    pub lower_bound_samples: usize,
    pub continuity_pairs: usize,
    pub continuity_step: f64,
    pub probe_steps: usize,
    pub divergence_factor: f64,
    /// Directions probed for boundary divergence; `None` means every
    /// singleton.
    pub vanishing_sets: Option<Vec<Vec<usize>>>,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            price_samples: 200,
            homogeneity_scales: vec![0.1, 1.0, 7.3, 100.0],
            tol_walras: 1e-10,
            tol_homogeneity: 1e-10,
            lower_bound_samples: 10_000,
            continuity_pairs: 200,
            continuity_step: 1e-8,
            probe_steps: 40,
            divergence_factor: 1e3,
            vanishing_sets: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub vanishing_set: Vec<usize>,
    pub initial_max_z: f64,
    pub final_max_z: f64,
    pub increasing_tail: usize,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionVerdicts {
    pub continuity: Verdict,
    pub homogeneity: Verdict,
    pub walras_law: Verdict,
    pub lower_bound: Verdict,
    pub boundary_divergence: Verdict,
}

impl AssumptionVerdicts {
    pub fn all_pass(&self) -> bool {
        [
            self.continuity,
            self.homogeneity,
            self.walras_law,
            self.lower_bound,
            self.boundary_divergence,
        ]
        .iter()
        .all(|v| *v == Verdict::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    /// Largest `||z(scale p) - z(p)||_inf` seen.
    pub homogeneity_residual: f64,
    /// Largest `|p . z(p)|` seen.
    pub walras_residual: f64,
    pub lower_bound_s: f64,
    /// Smallest `min_l z_l(p)` over the lower-bound sample.
    pub min_sampled_excess: f64,
    /// Largest observed `jump / (K * step)` in the continuity spot check.
    pub continuity_ratio: f64,
    pub boundary_probes: Vec<ProbeSummary>,
    /// Full sequence of the probe with the smallest final value.
    pub boundary_divergence_witness: Vec<(PriceVector, f64)>,
    pub verdicts: AssumptionVerdicts,
    pub config: CheckConfig,
}

/// Runs the numeric checks for continuity, homogeneity of degree zero,
/// Walras' law, the uniform lower bound and boundary divergence.
pub fn check_assumptions(economy: &Economy, config: &CheckConfig) -> Result<AssumptionReport> {
    let dim = economy.dim();
    let mut rng = sampling::rng(config.seed);
    let pass_if = |ok: bool| if ok { Verdict::Pass } else { Verdict::Fail };

    let mut walras = 0.0f64;
    let mut homogeneity = 0.0f64;
    for _ in 0..config.price_samples {
        let p = sampling::interior_price(&mut rng, dim);
        walras = walras.max(economy.walras_residual(&p)?);
        for &scale in &config.homogeneity_scales {
            homogeneity = homogeneity.max(economy.check_homogeneity(&p, scale)?);
        }
    }

    let s = economy.lower_bound_s();
    let mut min_excess = f64::INFINITY;
    for k in 0..config.lower_bound_samples {
        let p = if k % 2 == 0 {
            sampling::dirichlet_price(&mut rng, dim)
        } else {
            sampling::boundary_biased_price(&mut rng, dim)
        };
        let z = economy.excess_demand(&p)?;
        min_excess = z.z.iter().copied().fold(min_excess, f64::min);
    }

    let continuity_ratio = continuity_spot_check(economy, config, &mut rng)?;

    let sets = match &config.vanishing_sets {
        Some(sets) => sets.clone(),
        None => (0..dim).map(|l| vec![l]).collect(),
    };
    let mut probes = Vec::with_capacity(sets.len());
    let mut witness: Option<BoundaryProbe> = None;
    for set in &sets {
        let probe =
            economy.boundary_divergence_probe(set, config.probe_steps, config.divergence_factor)?;
        probes.push(ProbeSummary {
            vanishing_set: probe.vanishing_set.clone(),
            initial_max_z: probe.initial(),
            final_max_z: probe.last(),
            increasing_tail: probe.increasing_tail(),
            verdict: probe.verdict,
        });
        if witness.as_ref().is_none_or(|w| probe.last() < w.last()) {
            witness = Some(probe);
        }
    }
    let boundary_divergence = if probes.iter().any(|p| p.verdict == Verdict::Fail) {
        Verdict::Fail
    } else if probes.is_empty() || probes.iter().any(|p| p.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };

    Ok(AssumptionReport {
        homogeneity_residual: homogeneity,
        walras_residual: walras,
        lower_bound_s: s,
        min_sampled_excess: min_excess,
        continuity_ratio,
        boundary_probes: probes,
        boundary_divergence_witness: witness.map(|w| w.points).unwrap_or_default(),
        verdicts: AssumptionVerdicts {
            continuity: pass_if(continuity_ratio <= 10.0),
            homogeneity: pass_if(homogeneity <= config.tol_homogeneity),
            walras_law: pass_if(walras <= config.tol_walras),
            lower_bound: pass_if(min_excess > -s),
            boundary_divergence,
        },
        config: config.clone(),
    })
}

/// For random pairs at distance `continuity_step`, compares the jump in `z`
/// with a local slope `K` measured along the same direction at step `1e-4`.
/// Returns the worst `jump / (K * step)`; the check passes at `<= 10`.
fn continuity_spot_check(
    economy: &Economy,
    config: &CheckConfig,
    rng: &mut impl Rng,
) -> Result<f64> {
    const COARSE: f64 = 1e-4;
    let dim = economy.dim();
    let margin = (0.5 / dim as f64).min(0.01);
    let region = TrimmedSimplex::new(dim, margin)?;
    let floor_scale = 1e3 * f64::EPSILON;
    let mut worst = 0.0f64;
    for _ in 0..config.continuity_pairs {
        let p = sampling::point_in_trimmed(rng, &region);
        let mut dir: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let mean = dir.iter().sum::<f64>() / dim as f64;
        dir.iter_mut().for_each(|d| *d -= mean);
        let norm = dot(&dir, &dir).sqrt();
        if norm == 0.0 {
            continue;
        }
        dir.iter_mut().for_each(|d| *d /= norm);
        let shifted = |h: f64| -> Vec<f64> {
            p.as_slice()
                .iter()
                .zip(&dir)
                .map(|(a, d)| a + h * d)
                .collect()
        };
        let base = economy.excess_demand_raw(p.as_slice())?;
        let coarse = economy.excess_demand_raw(&shifted(COARSE))?;
        let fine = economy.excess_demand_raw(&shifted(config.continuity_step))?;
        let slope = l2_diff(&coarse, &base) / COARSE;
        let jump = l2_diff(&fine, &base);
        let magnitude = base.iter().fold(0.0f64, |m, v| m.max(v.abs())) + economy.lower_bound_s();
        let allowance = slope * config.continuity_step + floor_scale * magnitude;
        worst = worst.max(jump / allowance);
    }
    Ok(worst)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn l2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
