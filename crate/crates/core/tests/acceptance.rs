//! Acceptance criteria. Runs as a plain binary (no libtest harness) so that
//! every criterion prints exactly one PASS/FAIL line; exits non-zero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use walras_core::economy::{Consumer, Economy, Preference};
use walras_core::oracle::{cobb_douglas_perron, projection_oracle, GridSpec};
use walras_core::sampling::{self, EconomyShape};
use walras_core::simplex::{objective_g, phi_with_demand, project_trimmed, TrimmedSimplex};
use walras_core::solver::{check_q_containment, solve, SolverConfig, SolverReport};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn(&mut Ledger) -> Outcome,
}

/// Every converged solve from criteria 7 and 8, re-examined by 9-11.
#[derive(Default)]
struct Ledger {
    solved: Vec<(String, Economy, SolverConfig, SolverReport)>,
}

fn mixed_shape() -> EconomyShape {
    EconomyShape {
        ces_share: 0.5,
        ..EconomyShape::default()
    }
}

fn mixed_economies(seed: u64, count: usize) -> Vec<Economy> {
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|_| sampling::random_economy(&mut rng, &mixed_shape()))
        .collect()
}

fn cobb_douglas_economies(seed: u64, count: usize) -> Vec<Economy> {
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|_| sampling::random_economy(&mut rng, &EconomyShape::default()))
        .collect()
}

fn cd(weights: &[f64], endowment: &[f64]) -> Consumer {
    Consumer::normalizing(
        Preference::CobbDouglas {
            weights: weights.to_vec(),
        },
        endowment.to_vec(),
    )
    .unwrap()
    .0
}

fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn dist_l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn walras_law(_: &mut Ledger) -> Outcome {
    let mut worst = 0.0f64;
    let mut rng = sampling::rng(101);
    for econ in mixed_economies(1, 50) {
        for _ in 0..200 {
            let p = sampling::interior_price(&mut rng, econ.dim());
            worst = worst.max(econ.walras_residual(&p).map_err(|e| e.to_string())?);
        }
    }
    if worst <= 1e-10 {
        Ok(format!("max |p.z(p)| = {worst:.3e} <= 1e-10"))
    } else {
        Err(format!("max |p.z(p)| = {worst:.3e} > 1e-10"))
    }
}

fn homogeneity(_: &mut Ledger) -> Outcome {
    let mut worst = 0.0f64;
    let mut rng = sampling::rng(101);
    for econ in mixed_economies(1, 50) {
        for _ in 0..200 {
            let p = sampling::interior_price(&mut rng, econ.dim());
            for scale in [0.1, 7.3, 100.0] {
                let r = econ
                    .check_homogeneity(&p, scale)
                    .map_err(|e| e.to_string())?;
                worst = worst.max(r);
            }
        }
    }
    if worst <= 1e-10 {
        Ok(format!("max ||z(lp) - z(p)||_inf = {worst:.3e} <= 1e-10"))
    } else {
        Err(format!("max ||z(lp) - z(p)||_inf = {worst:.3e} > 1e-10"))
    }
}

fn lower_bound(_: &mut Ledger) -> Outcome {
    let mut rng = sampling::rng(103);
    let mut tightest = f64::INFINITY;
    for econ in mixed_economies(3, 50) {
        let s = econ.lower_bound_s();
        let mut min_z = f64::INFINITY;
        for k in 0..10_000 {
            let p = if k % 2 == 0 {
                sampling::dirichlet_price(&mut rng, econ.dim())
            } else {
                sampling::boundary_biased_price(&mut rng, econ.dim())
            };
            let z = econ.excess_demand(&p).map_err(|e| e.to_string())?;
            min_z = z.z.iter().copied().fold(min_z, f64::min);
        }
        if min_z <= -s {
            return Err(format!("min z = {min_z} <= -s = {}", -s));
        }
        tightest = tightest.min(min_z + s);
    }
    Ok(format!(
        "smallest margin min_l z_l + s = {tightest:.3e} > 0"
    ))
}

fn boundary_divergence(_: &mut Ledger) -> Outcome {
    let mut weakest = f64::INFINITY;
    for econ in cobb_douglas_economies(4, 10) {
        for l in 0..econ.dim() {
            let probe = econ
                .boundary_divergence_probe(&[l], 40, 1e3)
                .map_err(|e| e.to_string())?;
            let growth = probe.last() / probe.initial();
            if !(probe.last() >= 1e3 * probe.initial())
                || probe.verdict != walras_core::Verdict::Pass
            {
                return Err(format!(
                    "commodity {l}: initial {} final {} verdict {:?}",
                    probe.initial(),
                    probe.last(),
                    probe.verdict
                ));
            }
            weakest = weakest.min(growth);
        }
    }
    Ok(format!(
        "smallest final/initial growth = {weakest:.3e} >= 1e3"
    ))
}

fn projection(_: &mut Ledger) -> Outcome {
    let mut rng = sampling::rng(105);
    let mut worst_ratio = 0.0f64;
    for _ in 0..100 {
        let dim = rng.random_range(2..=3);
        let eps = rng.random_range(0.001..0.9) / dim as f64;
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..2.0)).collect();
        let resolution = if dim == 2 { 10_000 } else { 400 };
        let s = TrimmedSimplex::new(dim, eps).map_err(|e| e.to_string())?;
        let exact = project_trimmed(&x, &s).map_err(|e| e.to_string())?;
        let grid = projection_oracle(&x, &s, resolution).map_err(|e| e.to_string())?;
        let spacing = GridSpec::new(resolution, eps).unwrap().spacing(dim);
        let d = dist_inf(exact.as_slice(), grid.as_slice());
        if d > 2.0 * spacing {
            return Err(format!(
                "x = {x:?}, eps = {eps}: |exact - grid| = {d} > 2 * {spacing}"
            ));
        }
        worst_ratio = worst_ratio.max(d / spacing);
    }
    let mut worst_gap = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let dim = rng.random_range(2..=10);
        let eps = rng.random_range(0.001..1.0) / dim as f64;
        let s = TrimmedSimplex::new(dim, eps).unwrap();
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let px = project_trimmed(&x, &s).unwrap();
        let py = project_trimmed(&y, &s).unwrap();
        let gap = dist_l2(px.as_slice(), py.as_slice()) - dist_l2(&x, &y);
        if gap > 1e-12 {
            return Err(format!("expansion by {gap:e} for x = {x:?}, y = {y:?}"));
        }
        worst_gap = worst_gap.max(gap);
    }
    Ok(format!(
        "grid agreement <= {worst_ratio:.2} spacings; max ||Px-Py|| - ||x-y|| = {worst_gap:.2e}"
    ))
}

fn argmax_certificate(_: &mut Ledger) -> Outcome {
    let mut rng = sampling::rng(106);
    let mut tightest = f64::INFINITY;
    for econ in mixed_economies(6, 20) {
        let dim = econ.dim();
        let eps = rng.random_range(0.05..0.9) / dim as f64;
        let s = TrimmedSimplex::new(dim, eps).unwrap();
        for _ in 0..50 {
            let p = sampling::point_in_trimmed(&mut rng, &s);
            let (best, z) = phi_with_demand(&econ, &p, &s).map_err(|e| e.to_string())?;
            let g_best = objective_g(&best, &p, &z).unwrap().0;
            for _ in 0..10_000 {
                let q = sampling::point_in_trimmed(&mut rng, &s);
                let g = objective_g(&q, &p, &z).unwrap().0;
                if g_best < g - 1e-9 {
                    return Err(format!("g(phi(p), p) = {g_best} < g(q, p) = {g} - 1e-9"));
                }
                tightest = tightest.min(g_best - g);
            }
        }
    }
    Ok(format!(
        "min g(phi(p),p) - g(q,p) over 10^7 samples = {tightest:.3e}"
    ))
}

fn symmetric_economy(dim: usize, consumers: usize) -> Economy {
    let w = vec![1.0 / dim as f64; dim];
    Economy::new((0..consumers).map(|_| cd(&w, &vec![1.0; dim])).collect()).unwrap()
}

fn closed_form(ledger: &mut Ledger) -> Outcome {
    let config = SolverConfig::default();
    let e2x2 = Economy::new(vec![
        cd(&[0.6, 0.4], &[1.0, 0.0]),
        cd(&[0.3, 0.7], &[0.0, 1.0]),
    ])
    .unwrap();
    let oracle = cobb_douglas_perron(&e2x2, 1e-15, 100_000).map_err(|e| e.to_string())?;
    if dist_inf(oracle.as_slice(), &[3.0 / 7.0, 4.0 / 7.0]) > 1e-12 {
        return Err(format!(
            "Perron oracle gave {oracle:?}, expected (3/7, 4/7)"
        ));
    }
    let started = Instant::now();
    let report = solve(&e2x2, &config).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let delta = dist_inf(report.p_star.as_slice(), oracle.as_slice());
    if !report.converged || delta > 1e-8 || elapsed > Duration::from_secs(1) {
        return Err(format!(
            "E2x2: converged {} delta {delta:e} in {elapsed:?}",
            report.converged
        ));
    }
    ledger
        .solved
        .push(("E2x2".into(), e2x2, config.clone(), report));

    let mut worst = 0.0f64;
    for (dim, consumers) in [(2, 2), (3, 1), (5, 4), (10, 7)] {
        let econ = symmetric_economy(dim, consumers);
        let started = Instant::now();
        let report = solve(&econ, &config).map_err(|e| e.to_string())?;
        let elapsed = started.elapsed();
        let d = dist_inf(report.p_star.as_slice(), &vec![1.0 / dim as f64; dim]);
        if !report.converged || d > 1e-10 || elapsed > Duration::from_secs(1) {
            return Err(format!(
                "symmetric L={dim}: converged {} delta {d:e} in {elapsed:?}",
                report.converged
            ));
        }
        worst = worst.max(d);
        ledger
            .solved
            .push((format!("symmetric L={dim}"), econ, config.clone(), report));
    }
    Ok(format!(
        "E2x2 delta vs Perron = {delta:.2e}; symmetric delta vs q-bar <= {worst:.2e}"
    ))
}

fn oracle_sweep(ledger: &mut Ledger) -> Outcome {
    let mut worst_delta = 0.0f64;
    let mut worst_clearing = 0.0f64;
    for (k, econ) in cobb_douglas_economies(8, 20).into_iter().enumerate() {
        let config = SolverConfig {
            seed: k as u64,
            ..SolverConfig::default()
        };
        let report = solve(&econ, &config).map_err(|e| format!("economy {k}: {e}"))?;
        let oracle = cobb_douglas_perron(&econ, 1e-15, 1_000_000).map_err(|e| e.to_string())?;
        let delta = dist_inf(report.p_star.as_slice(), oracle.as_slice());
        if !report.converged || report.clearing_residual > 1e-8 || delta > 1e-6 {
            return Err(format!(
                "economy {k} (L={}, {} consumers): converged {} clearing {:e} delta {delta:e}",
                econ.dim(),
                econ.consumers().len(),
                report.converged,
                report.clearing_residual
            ));
        }
        worst_delta = worst_delta.max(delta);
        worst_clearing = worst_clearing.max(report.clearing_residual);
        ledger
            .solved
            .push((format!("cobb-douglas #{k}"), econ, config, report));
    }
    // CES economies have no closed-form oracle; their solves feed the
    // certificate checks of criteria 9-11 only.
    for (k, econ) in mixed_economies(9, 10).into_iter().enumerate() {
        let config = SolverConfig {
            seed: 100 + k as u64,
            ..SolverConfig::default()
        };
        if let Ok(report) = solve(&econ, &config) {
            if report.converged {
                ledger
                    .solved
                    .push((format!("mixed #{k}"), econ, config, report));
            }
        }
    }
    Ok(format!(
        "20/20 converged; max ||z(p*)||_inf = {worst_clearing:.2e}, max delta vs Perron = {worst_delta:.2e}"
    ))
}

fn proof_certificates(ledger: &mut Ledger) -> Outcome {
    for (name, _, _, r) in &ledger.solved {
        if !(r.p_star.min() > r.epsilon_final) || r.vi_certificate > 1e-8 {
            return Err(format!(
                "{name}: min p* = {} vs eps {}, VI = {:e}",
                r.p_star.min(),
                r.epsilon_final,
                r.vi_certificate
            ));
        }
    }
    let worst_vi = ledger
        .solved
        .iter()
        .map(|s| s.3.vi_certificate)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "{} converged runs interior; max vertex p.z(p*) = {worst_vi:.2e}",
        ledger.solved.len()
    ))
}

fn q_containment(ledger: &mut Ledger) -> Outcome {
    for (name, econ, config, r) in &ledger.solved {
        let s = TrimmedSimplex::new(econ.dim(), r.epsilon_final).unwrap();
        let ok = check_q_containment(econ, &s, 10_000, config.seed).map_err(|e| e.to_string())?;
        if !ok {
            return Err(format!(
                "{name}: sampled Q leaves int D_eps at eps = {}",
                r.epsilon_final
            ));
        }
    }
    Ok(format!(
        "{} converged runs pass the 10^4-sample check",
        ledger.solved.len()
    ))
}

fn determinism(ledger: &mut Ledger) -> Outcome {
    for (name, econ, config, r) in &ledger.solved {
        let again = solve(econ, config).map_err(|e| e.to_string())?;
        let a = serde_json::to_string(r).unwrap();
        let b = serde_json::to_string(&again).unwrap();
        if a != b {
            return Err(format!("{name}: reports differ"));
        }
        let parsed: SolverReport = serde_json::from_str(&a).unwrap();
        if &parsed != r {
            return Err(format!("{name}: report does not survive a JSON round trip"));
        }
    }
    let econ = &mixed_economies(1, 1)[0];
    let config = walras_core::CheckConfig::default();
    let a = serde_json::to_string(&walras_core::check_assumptions(econ, &config).unwrap()).unwrap();
    let b = serde_json::to_string(&walras_core::check_assumptions(econ, &config).unwrap()).unwrap();
    if a != b {
        return Err("assumption reports differ".into());
    }
    Ok(format!(
        "{} solve reports and an assumption report are byte-identical on rerun",
        ledger.solved.len()
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "Walras' law",
            budget: Some(Duration::from_secs(5)),
            run: walras_law,
        },
        Criterion {
            id: 2,
            name: "homogeneity of degree zero",
            budget: None,
            run: homogeneity,
        },
        Criterion {
            id: 3,
            name: "uniform lower bound",
            budget: None,
            run: lower_bound,
        },
        Criterion {
            id: 4,
            name: "boundary divergence",
            budget: None,
            run: boundary_divergence,
        },
        Criterion {
            id: 5,
            name: "projection correctness",
            budget: Some(Duration::from_secs(10)),
            run: projection,
        },
        Criterion {
            id: 6,
            name: "phi argmax certificate",
            budget: None,
            run: argmax_certificate,
        },
        Criterion {
            id: 7,
            name: "closed-form equilibria",
            budget: None,
            run: closed_form,
        },
        Criterion {
            id: 8,
            name: "oracle-equivalence sweep",
            budget: Some(Duration::from_secs(30)),
            run: oracle_sweep,
        },
        Criterion {
            id: 9,
            name: "interiority and VI certificates",
            budget: None,
            run: proof_certificates,
        },
        Criterion {
            id: 10,
            name: "sampled Q containment",
            budget: None,
            run: q_containment,
        },
        Criterion {
            id: 11,
            name: "determinism",
            budget: None,
            run: determinism,
        },
    ];
    let mut ledger = Ledger::default();
    let mut failures = 0;
    for c in &criteria {
        let started = Instant::now();
        let mut outcome = (c.run)(&mut ledger);
        let elapsed = started.elapsed();
        if let (Ok(msg), Some(budget)) = (&outcome, c.budget) {
            if elapsed > budget {
                outcome = Err(format!("{msg}; but took {elapsed:.2?} > {budget:?}"));
            }
        }
        match outcome {
            Ok(msg) => println!("[PASS] {:>2} {}: {msg} ({elapsed:.2?})", c.id, c.name),
            Err(msg) => {
                failures += 1;
                println!("[FAIL] {:>2} {}: {msg} ({elapsed:.2?})", c.id, c.name);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
