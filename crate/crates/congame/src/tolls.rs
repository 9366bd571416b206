//! Local linear toll mechanisms and their robustness certificates.
//!
//! A mechanism turns each basis cost table into a toll table; deployed tolls
//! combine those tables with (possibly misspecified) coefficients. Four kinds
//! are provided: zero tolls, marginal-cost tolls, and the LP-designed optimal
//! local and optimal constant tolls, all optionally rescaled through the
//! lambda family `T_lambda(l) = lambda (l + T(l)) - l`.
//!
//! `certify_epsilon` makes the Nash-set containment guarantee algorithmic:
//! for every non-equilibrium allocation it measures, per improving deviation,
//! how far the deployed coefficients can move before the deviation's
//! advantage is exhausted. The gain is affine in the deployed coefficients,
//! so the exact threshold is `h / sum |w|` with `w` the toll weights touched
//! by the deviation.

use crate::equilibrium::{self, NASH_TOL};
use crate::error::{Error, Result};
use crate::game::{Allocation, BasisSet, Bundle, CoefficientMatrix, DeployedTolls, Game};
use simplex::{LpProblem, LpStatus};

// ---------------------------------------------------------------------------
// Mechanism specification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TollKind {
    Zero,
    MarginalCost,
    OptimalLocal,
    OptimalConstant,
}

impl TollKind {
    pub fn name(&self) -> &'static str {
        match self {
            TollKind::Zero => "zero",
            TollKind::MarginalCost => "marginal_cost",
            TollKind::OptimalLocal => "optimal_local",
            TollKind::OptimalConstant => "optimal_constant",
        }
    }

    pub fn parse(s: &str) -> Option<TollKind> {
        match s {
            "zero" => Some(TollKind::Zero),
            "marginal_cost" | "mc" => Some(TollKind::MarginalCost),
            "optimal_local" | "local" => Some(TollKind::OptimalLocal),
            "optimal_constant" | "constant" => Some(TollKind::OptimalConstant),
            _ => None,
        }
    }
}

/// A toll rule: the kind, a lambda rescaling (1 leaves the rule unchanged),
/// and whether LP-designed tolls may subsidize.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TollMechanismSpec {
    pub kind: TollKind,
    pub lambda: f64,
    pub allow_negative: bool,
}

impl TollMechanismSpec {
    pub fn new(kind: TollKind) -> Self {
        TollMechanismSpec {
            kind,
            lambda: 1.0,
            allow_negative: false,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_allow_negative(mut self, allow: bool) -> Self {
        self.allow_negative = allow;
        self
    }
}

// ---------------------------------------------------------------------------
// Elementary mechanisms
// ---------------------------------------------------------------------------

/// Marginal-cost toll: `toll(x) = (x - 1)(l(x) - l(x - 1))`, zero at `x = 1`.
pub fn marginal_cost_toll(cost: &[f64]) -> Vec<f64> {
    (0..cost.len())
        .map(|i| {
            if i == 0 {
                0.0
            } else {
                i as f64 * (cost[i] - cost[i - 1])
            }
        })
        .collect()
}

/// Lambda family: `out[k] = lambda (cost[k] + base[k]) - cost[k]`.
pub fn lambda_scale(base: &[f64], cost: &[f64], lambda: f64) -> Vec<f64> {
    base.iter()
        .zip(cost)
        .map(|(t, c)| lambda * (c + t) - c)
        .collect()
}

// ---------------------------------------------------------------------------
// Optimal toll design
// ---------------------------------------------------------------------------

/// One label row of the design LP, shared by both variants.
struct DesignRow {
    /// `(x + z) b(x + z)` — worst-case optimal-cost mass.
    opt: f64,
    /// `(x + y) b(x + y)` — equilibrium-cost mass.
    ne: f64,
    /// `y b(x+y) - z b(x+y+1)` — latency part of the aggregated Nash row.
    lat: f64,
    /// Toll coefficients: `(index, weight)` pairs into the toll table.
    toll: Vec<(usize, f64)>,
}

fn bval(table: &[f64], k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        table[k - 1]
    }
}

fn design_rows(cost: &[f64], n: usize, constant: bool) -> Vec<DesignRow> {
    let mut rows = Vec::new();
    for x in 0..=n {
        for y in 0..=n - x {
            for z in 0..=n - x - y {
                if x + y + z == 0 {
                    continue;
                }
                let mut toll = Vec::new();
                if constant {
                    let w = y as f64 - z as f64;
                    if w != 0.0 {
                        toll.push((0, w));
                    }
                } else {
                    if y >= 1 {
                        toll.push((x + y - 1, y as f64));
                    }
                    if z >= 1 {
                        toll.push((x + y, -(z as f64)));
                    }
                }
                rows.push(DesignRow {
                    opt: (x + z) as f64 * bval(cost, x + z),
                    ne: (x + y) as f64 * bval(cost, x + y),
                    lat: y as f64 * bval(cost, x + y)
                        - if z >= 1 {
                            z as f64 * bval(cost, x + y + 1)
                        } else {
                            0.0
                        },
                    toll,
                });
            }
        }
    }
    rows
}

/// Solves the two-stage toll design LP for a single basis table.
///
/// Stage 1 finds the best guaranteed equilibrium-efficiency ratio `nu*` over
/// all mechanisms of the requested shape. The Nash-row multiplier is kept as
/// a variable `mu` with the toll entering as `g = mu * f`, which keeps the
/// rows linear without normalizing `mu` away (fixing `mu = 1` is only sound
/// for unconstrained tolls).
///
/// Stage 2 re-solves at `nu*` in perspective form (variables `1/mu` and `f`
/// itself) and picks the canonical representative: the toll of minimum total
/// magnitude, non-negative unless subsidies were allowed. The worst-case
/// price of anarchy of the returned toll is exactly `1 / nu*`, which the
/// robustness LP reproduces at `delta = 0`.
fn design_toll(
    cost: &[f64],
    n: usize,
    constant: bool,
    allow_negative: bool,
) -> Result<(Vec<f64>, f64)> {
    assert!(n >= 1 && cost.len() >= n, "toll design needs a table on 1..=n");
    let rows = design_rows(cost, n, constant);
    let nf = if constant { 1 } else { n };

    // Stage 1: max nu over (nu, mu, g):  nu*ne - mu*lat - W(g) <= opt.
    let mut obj = vec![0.0; 2 + nf];
    obj[0] = -1.0;
    let mut lp = LpProblem::minimize(&obj).free_var(0);
    if allow_negative || !constant {
        for j in 0..nf {
            lp = lp.free_var(2 + j);
        }
    }
    for row in &rows {
        let mut coeffs = vec![0.0; 2 + nf];
        coeffs[0] = row.ne;
        coeffs[1] = -row.lat;
        for &(idx, w) in &row.toll {
            coeffs[2 + idx] -= w;
        }
        lp = lp.ub_row(&coeffs, row.opt);
    }
    let stage1 = lp.solve()?;
    if stage1.status != LpStatus::Optimal {
        return Err(Error::DesignLp {
            stage: "stage 1 (efficiency bound)",
            status: format!("{:?}", stage1.status),
        });
    }
    let nu_star = stage1.x[0];

    // Stage 2: pick a canonical representative among the optimal mechanisms.
    let nu_hat = nu_star - 1e-9;
    let f = if allow_negative {
        // Signed tolls: re-solve in (mu, g = mu*f) form, where any vertex
        // with mu > 0 carries its own dual certificate, and divide out mu.
        // (The perspective form below is unsound here: its lam = 0 face
        // holds mu -> infinity limits that are not valid mechanisms.)
        let mut obj2 = vec![0.0; 1 + 2 * nf];
        for v in obj2.iter_mut().skip(1) {
            *v = 1.0;
        }
        let mut lp2 = LpProblem::minimize(&obj2);
        for row in &rows {
            // nu_hat*ne - mu*lat - W(g+) + W(g-) <= opt
            let mut coeffs = vec![0.0; 1 + 2 * nf];
            coeffs[0] = -row.lat;
            for &(idx, w) in &row.toll {
                coeffs[1 + idx] -= w;
                coeffs[1 + nf + idx] += w;
            }
            lp2 = lp2.ub_row(&coeffs, row.opt - nu_hat * row.ne);
        }
        let stage2 = lp2.solve()?;
        if stage2.status != LpStatus::Optimal {
            return Err(Error::DesignLp {
                stage: "stage 2 (canonical signed toll)",
                status: format!("{:?}", stage2.status),
            });
        }
        let mu = stage2.x[0];
        if mu > 1e-9 {
            (0..nf)
                .map(|j| (stage2.x[1 + j] - stage2.x[1 + nf + j]) / mu)
                .collect()
        } else {
            // Tolls cannot improve on the untolled guarantee; zero is optimal.
            vec![0.0; nf]
        }
    } else {
        // Non-negative tolls: perspective form (lam = 1/mu, f itself) with
        // rows  -lam*(opt - nu*ne) - W(f) <= lat, minimizing total magnitude.
        // With f >= 0 the lam = 0 face is empty, so feasibility here is
        // exactly optimality of the mechanism.
        let mut obj2 = vec![0.0; 1 + nf];
        for v in obj2.iter_mut().skip(1) {
            *v = 1.0;
        }
        let mut lp2 = LpProblem::minimize(&obj2);
        for row in &rows {
            let mut coeffs = vec![0.0; 1 + nf];
            coeffs[0] = -(row.opt - nu_hat * row.ne);
            for &(idx, w) in &row.toll {
                coeffs[1 + idx] -= w;
            }
            lp2 = lp2.ub_row(&coeffs, row.lat);
        }
        let stage2 = lp2.solve()?;
        if stage2.status != LpStatus::Optimal {
            return Err(Error::DesignLp {
                stage: "stage 2 (canonical toll)",
                status: format!("{:?}", stage2.status),
            });
        }
        stage2.x[1..1 + nf].to_vec()
    };
    let table = if constant { vec![f[0]; n] } else { f };
    Ok((table, 1.0 / nu_star))
}

/// Optimal congestion-dependent toll table for one basis function, plus the
/// worst-case price of anarchy it guarantees at accurate parameters.
pub fn optimal_local_toll(cost: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    design_toll(cost, n, false, false)
}

/// As `optimal_local_toll` with subsidies permitted.
pub fn optimal_local_toll_signed(cost: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    design_toll(cost, n, false, true)
}

/// Optimal congestion-independent toll for one basis function.
pub fn optimal_constant_toll(cost: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    design_toll(cost, n, true, false)
}

/// As `optimal_constant_toll` with subsidies permitted.
pub fn optimal_constant_toll_signed(cost: &[f64], n: usize) -> Result<(Vec<f64>, f64)> {
    design_toll(cost, n, true, true)
}

// ---------------------------------------------------------------------------
// Deployment
// ---------------------------------------------------------------------------

/// Toll tables for every basis function under a mechanism spec, lambda
/// scaling included.
pub fn toll_tables(spec: &TollMechanismSpec, basis: &BasisSet) -> Result<Vec<Vec<f64>>> {
    let n = basis.max_load();
    let mut tables = Vec::with_capacity(basis.len());
    for j in 0..basis.len() {
        let b = basis.table(j);
        let base = match spec.kind {
            TollKind::Zero => vec![0.0; n],
            TollKind::MarginalCost => marginal_cost_toll(b),
            TollKind::OptimalLocal => {
                if spec.allow_negative {
                    optimal_local_toll_signed(b, n)?.0
                } else {
                    optimal_local_toll(b, n)?.0
                }
            }
            TollKind::OptimalConstant => {
                if spec.allow_negative {
                    optimal_constant_toll_signed(b, n)?.0
                } else {
                    optimal_constant_toll(b, n)?.0
                }
            }
        };
        tables.push(if spec.lambda == 1.0 {
            base
        } else {
            lambda_scale(&base, b, spec.lambda)
        });
    }
    Ok(tables)
}

/// Builds the deployed tolls for a game: mechanism tables from the game's
/// basis, coefficients as supplied (equal to the game's for the noiseless
/// case, different when misspecified).
pub fn build_deployed_tolls(
    game: &Game,
    spec: &TollMechanismSpec,
    gamma_tilde: CoefficientMatrix,
) -> Result<DeployedTolls> {
    if gamma_tilde.num_resources() != game.num_resources()
        || gamma_tilde.num_bases() != game.basis().len()
    {
        return Err(Error::InvalidCoefficients {
            reason: format!(
                "deployed coefficients are {}x{}, game needs {}x{}",
                gamma_tilde.num_resources(),
                gamma_tilde.num_bases(),
                game.num_resources(),
                game.basis().len()
            ),
        });
    }
    DeployedTolls::new(toll_tables(spec, game.basis())?, gamma_tilde)
}

// ---------------------------------------------------------------------------
// Robustness certification
// ---------------------------------------------------------------------------

/// Largest certified misspecification radii for one game and mechanism.
#[derive(Debug, Clone)]
pub struct RobustnessCertificate {
    /// Additive infinity-ball radius; infinite when no deviation's advantage
    /// depends on the deployed coefficients.
    pub epsilon: f64,
    /// Relative radius via the conservative conversion
    /// `epsilon / max positive gamma`.
    pub delta: f64,
    /// The non-equilibrium allocation and deviation attaining the minimum
    /// slack, absent when `epsilon` is infinite.
    pub witness: Option<CertificateWitness>,
}

#[derive(Debug, Clone)]
pub struct CertificateWitness {
    pub allocation: Allocation,
    pub agent: usize,
    pub deviate_to: usize,
    pub slack: f64,
}

/// Gain of one deviation as an affine function of the deployed coefficients:
/// returns `(h(gamma), sum |w|)` where `h` is the cost saved by moving and
/// `w` are the toll-table weights the move touches.
fn deviation_sensitivity(
    game: &Game,
    tolls: &DeployedTolls,
    own: &Bundle,
    alt: &Bundle,
    loads: &[usize],
) -> (f64, f64) {
    let mut h = 0.0;
    let mut wsum = 0.0;
    let m = game.basis().len();
    for &e in own.resources() {
        if alt.contains(e) {
            continue;
        }
        let k = loads[e];
        h += game.composite_at(tolls, e, k);
        for j in 0..m {
            wsum += tolls.base_value(j, k).abs();
        }
    }
    for &e in alt.resources() {
        if own.contains(e) {
            continue;
        }
        let k = loads[e] + 1;
        h -= game.composite_at(tolls, e, k);
        for j in 0..m {
            wsum += tolls.base_value(j, k).abs();
        }
    }
    (h, wsum)
}

/// Certifies the Nash-set containment radius of a mechanism on a game.
///
/// For every allocation that is not an equilibrium under accurately deployed
/// tolls, some deviation strictly improves; the certificate keeps, per such
/// allocation, the deviation whose advantage survives the largest coefficient
/// perturbation, and takes the minimum over allocations. Deployed
/// coefficients anywhere in the resulting infinity-ball (intersected with the
/// non-negative orthant) cannot create new equilibria.
///
/// Games whose joint-action space exceeds `cap` are handled through the
/// anonymous-profile reduction when symmetric and rejected otherwise.
pub fn certify_epsilon(
    game: &Game,
    spec: &TollMechanismSpec,
    cap: usize,
) -> Result<RobustnessCertificate> {
    let tolls = build_deployed_tolls(game, spec, game.gamma().clone())?;
    let generic = game.joint_action_count() <= cap as f64;
    if !generic && game.symmetric_action_set().is_none() {
        return Err(Error::InstanceTooLarge {
            joint_actions: game.joint_action_count(),
            cap,
        });
    }

    let mut epsilon = f64::INFINITY;
    let mut witness: Option<CertificateWitness> = None;

    let mut consider =
        |alloc_for_witness: &Allocation,
         deviations: &[(usize, usize, f64, f64)]| {
            // eps_a: best-surviving improving deviation for this allocation.
            let mut eps_a = f64::NEG_INFINITY;
            let mut arg: Option<(usize, usize)> = None;
            let mut any_improving = false;
            for &(agent, alt_idx, h, wsum) in deviations {
                if h <= NASH_TOL {
                    continue;
                }
                any_improving = true;
                let eps_dev = if wsum <= 1e-15 { f64::INFINITY } else { h / wsum };
                if eps_dev > eps_a {
                    eps_a = eps_dev;
                    arg = Some((agent, alt_idx));
                }
            }
            if any_improving && eps_a < epsilon {
                epsilon = eps_a;
                let (agent, alt_idx) = arg.unwrap();
                witness = Some(CertificateWitness {
                    allocation: alloc_for_witness.clone(),
                    agent,
                    deviate_to: alt_idx,
                    slack: eps_a,
                });
            }
        };

    if generic {
        let mut choices = vec![0usize; game.n_agents()];
        loop {
            let a = Allocation::new(choices.clone());
            let loads = game.loads_unchecked(&a);
            let mut deviations = Vec::new();
            for i in 0..game.n_agents() {
                let own = game.bundle(&a, i);
                for (alt_idx, alt) in game.action_set(i).iter().enumerate() {
                    if alt_idx == a.choice(i) {
                        continue;
                    }
                    let (h, w) =
                        deviation_sensitivity(game, &tolls, own, alt, loads.counts());
                    deviations.push((i, alt_idx, h, w));
                }
            }
            consider(&a, &deviations);
            let mut done = true;
            for i in (0..choices.len()).rev() {
                choices[i] += 1;
                if choices[i] < game.action_set(i).len() {
                    done = false;
                    break;
                }
                choices[i] = 0;
            }
            if done {
                break;
            }
        }
    } else {
        let actions = game.symmetric_action_set().unwrap().to_vec();
        for counts in equilibrium::profiles(game.n_agents(), actions.len()) {
            let loads = equilibrium::profile_loads(game, &counts);
            let profile = equilibrium::Profile { counts: counts.clone() };
            let rep = profile.representative();
            let mut deviations = Vec::new();
            for (from, &c) in counts.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                // Representative agent: first agent on `from` in the
                // representative allocation.
                let agent = counts[..from].iter().sum::<usize>();
                for (to, alt) in actions.iter().enumerate() {
                    if to == from {
                        continue;
                    }
                    let (h, w) = deviation_sensitivity(
                        game,
                        &tolls,
                        &actions[from],
                        alt,
                        loads.counts(),
                    );
                    deviations.push((agent, to, h, w));
                }
            }
            consider(&rep, &deviations);
        }
    }

    let max_gamma = (0..game.num_resources())
        .flat_map(|e| game.gamma().row(e).iter().copied())
        .filter(|&g| g > 0.0)
        .fold(0.0f64, f64::max);
    let delta = if epsilon.is_infinite() || max_gamma == 0.0 {
        f64::INFINITY
    } else {
        epsilon / max_gamma
    };
    Ok(RobustnessCertificate {
        epsilon,
        delta,
        witness: if epsilon.is_infinite() { None } else { witness },
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
