//! Seeded perturbation experiments and the robustness sweep grids.
//!
//! The Monte-Carlo study deploys tolls built from multiplicatively perturbed
//! coefficients, `gamma_tilde = (1 + mu) * gamma` with `mu` uniform on
//! `[-delta, delta]` per coordinate, and reports per noise level the maximum
//! and average realized price of anarchy and the fraction of trials whose
//! Nash set contains a member absent from the noiseless one. Draws are keyed
//! by `(seed, delta index, trial, coordinate)`, so summaries are pure
//! functions of the inputs regardless of scheduling.

use crate::equilibrium::{self, NashSet};
use crate::error::Result;
use crate::game::{CoefficientMatrix, DeployedTolls, Game};
use crate::rng;
use crate::robust;
use crate::tolls::{self, TollMechanismSpec};
use std::fmt::Write as _;
use std::path::Path;

// ---------------------------------------------------------------------------
// Protocol and summaries
// ---------------------------------------------------------------------------

/// Perturbation schedule for the Monte-Carlo study.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationProtocol {
    pub delta_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for PerturbationProtocol {
    fn default() -> Self {
        PerturbationProtocol {
            delta_grid: (1..=10).map(|k| k as f64 * 0.05).collect(),
            trials: 200,
            seed: 0,
        }
    }
}

/// Aggregates over the trials at one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub delta: f64,
    pub max_poa: f64,
    pub avg_poa: f64,
    pub frac_new_ne: f64,
}

/// One point of the mechanism-robustness sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismSweepRow {
    pub mechanism: &'static str,
    pub delta: f64,
    pub poa: f64,
}

/// One point of the lambda-family sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSweepRow {
    pub lambda: f64,
    pub delta: f64,
    pub poa: f64,
}

// ---------------------------------------------------------------------------
// Monte-Carlo perturbation study
// ---------------------------------------------------------------------------

/// Runs the perturbation study for one game and mechanism.
///
/// The noiseless Nash set is computed once; each trial enumerates the set
/// under tolls deployed with perturbed coefficients and compares with exact
/// set semantics (profile-level in symmetric mode).
pub fn run_monte_carlo(
    game: &Game,
    spec: &TollMechanismSpec,
    protocol: &PerturbationProtocol,
    cap: usize,
) -> Result<Vec<TrialSummary>> {
    let tables = tolls::toll_tables(spec, game.basis())?;
    let noiseless = DeployedTolls::new(tables.clone(), game.gamma().clone())?;
    let baseline = equilibrium::enumerate_nash(game, &noiseless, cap)?;
    let (opt_cost, _) = equilibrium::optimal_cost(game, cap)?;
    let m = game.basis().len();

    let mut out = Vec::with_capacity(protocol.delta_grid.len());
    for (d_idx, &delta) in protocol.delta_grid.iter().enumerate() {
        let mut max_poa = f64::NEG_INFINITY;
        let mut sum_poa = 0.0;
        let mut new_ne = 0usize;
        for trial in 0..protocol.trials {
            let rows: Vec<Vec<f64>> = (0..game.num_resources())
                .map(|e| {
                    (0..m)
                        .map(|j| {
                            let mu = rng::symmetric(
                                protocol.seed,
                                d_idx as u64,
                                trial as u64,
                                (e * m + j) as u64,
                                delta,
                            );
                            // Deployed coefficients live in the non-negative
                            // orthant; noise levels above 1 clip at zero.
                            ((1.0 + mu) * game.gamma().get(e, j)).max(0.0)
                        })
                        .collect()
                })
                .collect();
            let perturbed =
                DeployedTolls::new(tables.clone(), CoefficientMatrix::new(rows)?)?;
            let nash = equilibrium::enumerate_nash(game, &perturbed, cap)?;
            let worst = worst_system_cost(game, &nash);
            let poa = if opt_cost == 0.0 { 1.0 } else { worst / opt_cost };
            max_poa = max_poa.max(poa);
            sum_poa += poa;
            if !nash.subset_of(&baseline) {
                new_ne += 1;
            }
        }
        out.push(TrialSummary {
            delta,
            max_poa,
            avg_poa: sum_poa / protocol.trials as f64,
            frac_new_ne: new_ne as f64 / protocol.trials as f64,
        });
    }
    Ok(out)
}

fn worst_system_cost(game: &Game, nash: &NashSet) -> f64 {
    match nash {
        NashSet::Generic(members) => members
            .iter()
            .map(|a| game.system_cost_loads(&game.loads_unchecked(a)))
            .fold(f64::NEG_INFINITY, f64::max),
        NashSet::Symmetric(members) => members
            .iter()
            .map(|p| game.system_cost_loads(&equilibrium::profile_loads(game, &p.counts)))
            .fold(f64::NEG_INFINITY, f64::max),
    }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Worst-case PoA per mechanism and noise level over the class of games on
/// `basis` with at most `n` agents.
pub fn sweep_robust_poa(
    specs: &[TollMechanismSpec],
    basis: &crate::game::BasisSet,
    n: usize,
    delta_grid: &[f64],
) -> Result<Vec<MechanismSweepRow>> {
    let mut out = Vec::new();
    for spec in specs {
        let tables = tolls::toll_tables(spec, basis)?;
        for &delta in delta_grid {
            let sol = robust::solve_robust_poa(basis, &tables, n, delta)?;
            out.push(MechanismSweepRow {
                mechanism: spec.kind.name(),
                delta,
                poa: sol.poa,
            });
        }
    }
    Ok(out)
}

/// Worst-case PoA of the lambda family of a base mechanism across noise
/// levels. At `delta = 0` every positive lambda shares the base mechanism's
/// nominal value; `lambda = 0` erases composite costs entirely and the PoA
/// is reported as infinite.
pub fn sweep_lambda(
    base: &TollMechanismSpec,
    lambda_grid: &[f64],
    delta_grid: &[f64],
    basis: &crate::game::BasisSet,
    n: usize,
) -> Result<Vec<LambdaSweepRow>> {
    let base_tables = tolls::toll_tables(base, basis)?;
    let mut out = Vec::new();
    for &lambda in lambda_grid {
        let tables: Vec<Vec<f64>> = base_tables
            .iter()
            .enumerate()
            .map(|(j, t)| tolls::lambda_scale(t, basis.table(j), lambda))
            .collect();
        for &delta in delta_grid {
            let sol = robust::solve_robust_poa(basis, &tables, n, delta)?;
            out.push(LambdaSweepRow {
                lambda,
                delta,
                poa: sol.poa,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

pub fn mc_summary_csv(rows: &[TrialSummary]) -> String {
    let mut s = String::from("delta,max_poa,avg_poa,frac_new_ne\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.delta, r.max_poa, r.avg_poa, r.frac_new_ne);
    }
    s
}

pub fn fig2_csv(rows: &[MechanismSweepRow]) -> String {
    let mut s = String::from("mechanism,delta,poa\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.mechanism, r.delta, r.poa);
    }
    s
}

pub fn fig3_csv(rows: &[LambdaSweepRow]) -> String {
    let mut s = String::from("lambda,delta,poa\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.lambda, r.delta, r.poa);
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Rank statistics
// ---------------------------------------------------------------------------

/// Spearman rank correlation with average ranks on ties; 0 when either
/// series is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
