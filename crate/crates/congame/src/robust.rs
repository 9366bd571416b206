//! Worst-case price of anarchy over a game class under relative toll
//! misspecification, as a linear program, plus the matching tight game.
//!
//! Games are abstracted into labels `(x, y, z, j)`: on each resource, `x`
//! agents stay between the worst equilibrium and the optimum, `y` appear only
//! at equilibrium, `z` only at optimum, and `j` names the basis function. The
//! LP minimizes the optimal-allocation cost subject to the equilibrium cost
//! normalized to one, an aggregated Nash inequality, and a relative box
//! `(1 - delta) theta <= theta_hat <= (1 + delta) theta` tying the deployed
//! coefficient mass `theta_hat` to the true mass `theta`. The reciprocal of
//! the optimum is the worst-case price of anarchy, and an optimal solution
//! assembles into an explicit game attaining it.

use crate::error::{Error, Result};
use crate::game::{
    Allocation, BasisSet, Bundle, CoefficientMatrix, DeployedTolls, Game,
};
use simplex::{LpProblem, LpStatus};

/// Labels with true mass at or below this are dropped when constructing the
/// tight game; simplex vertices carry exact zeros, the tolerance guards
/// round-off.
pub const PRUNE_TOL: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Label index
// ---------------------------------------------------------------------------

/// One resource label: usage split `(x, y, z)` and basis index `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub j: usize,
}

/// All labels with `1 <= x + y + z <= n` and `j < m`, lexicographic in
/// `(x, y, z, j)`; the order is stable so LP columns are reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelIndex {
    pub n: usize,
    pub m: usize,
    labels: Vec<Label>,
}

impl LabelIndex {
    pub fn build(n: usize, m: usize) -> Self {
        assert!(n >= 1 && m >= 1);
        let mut labels = Vec::new();
        for x in 0..=n {
            for y in 0..=n - x {
                for z in 0..=n - x - y {
                    if x + y + z == 0 {
                        continue;
                    }
                    for j in 0..m {
                        labels.push(Label { x, y, z, j });
                    }
                }
            }
        }
        labels.sort();
        LabelIndex { n, m, labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
}

// ---------------------------------------------------------------------------
// LP construction
// ---------------------------------------------------------------------------

/// Coefficients of the robustness LP, reproducible bit-for-bit from
/// `(basis, toll bases, n, delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustLpInstance {
    pub delta: f64,
    pub index: LabelIndex,
    /// Objective: `(x + z) b_j(x + z)` per label.
    pub objective: Vec<f64>,
    /// Normalization row: `(x + y) b_j(x + y)` per label.
    pub normalization: Vec<f64>,
    /// Nash-row weight on `theta`: `y b_j(x+y) - z b_j(x+y+1)`.
    pub ne_theta: Vec<f64>,
    /// Nash-row weight on `theta_hat`: `y tau_j(x+y) - z tau_j(x+y+1)`.
    pub ne_theta_hat: Vec<f64>,
}

fn tval(table: &[f64], k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        table[k - 1]
    }
}

/// Builds the LP coefficients for a basis set and toll tables on `1..=n`.
///
/// The index `x + y + 1` stays within the tables because the term only
/// appears when `z >= 1`, which forces `x + y <= n - 1`; load-0 evaluations
/// contribute 0.
pub fn build_lp(basis: &BasisSet, toll_bases: &[Vec<f64>], n: usize, delta: f64) -> RobustLpInstance {
    assert_eq!(basis.len(), toll_bases.len(), "one toll table per basis fn");
    assert!(basis.max_load() >= n && delta >= 0.0);
    let index = LabelIndex::build(n, basis.len());
    let mut objective = Vec::with_capacity(index.len());
    let mut normalization = Vec::with_capacity(index.len());
    let mut ne_theta = Vec::with_capacity(index.len());
    let mut ne_theta_hat = Vec::with_capacity(index.len());
    for &Label { x, y, z, j } in index.labels() {
        let b = basis.table(j);
        let t = &toll_bases[j];
        objective.push((x + z) as f64 * tval(b, x + z));
        normalization.push((x + y) as f64 * tval(b, x + y));
        let zb = if z >= 1 { z as f64 * tval(b, x + y + 1) } else { 0.0 };
        let zt = if z >= 1 { z as f64 * tval(t, x + y + 1) } else { 0.0 };
        ne_theta.push(y as f64 * tval(b, x + y) - zb);
        ne_theta_hat.push(y as f64 * tval(t, x + y) - zt);
    }
    RobustLpInstance {
        delta,
        index,
        objective,
        normalization,
        ne_theta,
        ne_theta_hat,
    }
}

/// Solved worst case: LP value, its reciprocal, and the optimal masses.
#[derive(Debug, Clone)]
pub struct RobustSolution {
    pub p_star: f64,
    /// `1 / p_star`; infinite when the LP value is (numerically) zero, which
    /// means the class admits unboundedly inefficient equilibria.
    pub poa: f64,
    pub theta: Vec<f64>,
    pub theta_hat: Vec<f64>,
}

impl RobustLpInstance {
    /// Solves by projecting `theta_hat` out: the deployed mass appears only
    /// in the Nash row and the box, so per label its worst admissible choice
    /// is `(1 - delta) theta` when the toll weight is positive and
    /// `(1 + delta) theta` when negative. The projection is exact and the
    /// eliminated variables are recovered afterwards by the same sign rule.
    pub fn solve_reduced(&self) -> Result<RobustSolution> {
        let len = self.index.len();
        let mut ne_row = Vec::with_capacity(len);
        for i in 0..len {
            let w = self.ne_theta_hat[i];
            ne_row.push(self.ne_theta[i] + w - self.delta * w.abs());
        }
        let lp = LpProblem::minimize(&self.objective)
            .eq_row(&self.normalization, 1.0)
            .ub_row(&ne_row, 0.0);
        let sol = lp.solve()?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::DesignLp {
                stage: "robust PoA (reduced)",
                status: format!("{:?}", sol.status),
            });
        }
        let theta = sol.x;
        let theta_hat = theta
            .iter()
            .zip(&self.ne_theta_hat)
            .map(|(&t, &w)| {
                if w > 0.0 {
                    (1.0 - self.delta) * t
                } else if w < 0.0 {
                    (1.0 + self.delta) * t
                } else {
                    t
                }
            })
            .collect();
        Ok(self.package(sol.value, theta, theta_hat))
    }

    /// Solves the full LP with `theta_hat` explicit and the box as rows.
    /// Exponentially larger than the reduced form; intended for cross-checks
    /// at small `n`.
    pub fn solve_boxed(&self) -> Result<RobustSolution> {
        let len = self.index.len();
        let mut objective = vec![0.0; 2 * len];
        objective[..len].copy_from_slice(&self.objective);
        let mut norm = vec![0.0; 2 * len];
        norm[..len].copy_from_slice(&self.normalization);
        let mut ne = vec![0.0; 2 * len];
        ne[..len].copy_from_slice(&self.ne_theta);
        ne[len..].copy_from_slice(&self.ne_theta_hat);

        let mut lp = LpProblem::minimize(&objective)
            .eq_row(&norm, 1.0)
            .ub_row(&ne, 0.0);
        for i in 0..len {
            let mut low = vec![0.0; 2 * len];
            low[i] = 1.0 - self.delta;
            low[len + i] = -1.0;
            lp = lp.ub_row(&low, 0.0);
            let mut high = vec![0.0; 2 * len];
            high[i] = -(1.0 + self.delta);
            high[len + i] = 1.0;
            lp = lp.ub_row(&high, 0.0);
        }
        let sol = lp.solve()?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::DesignLp {
                stage: "robust PoA (boxed)",
                status: format!("{:?}", sol.status),
            });
        }
        let theta = sol.x[..len].to_vec();
        let theta_hat = sol.x[len..].to_vec();
        Ok(self.package(sol.value, theta, theta_hat))
    }

    /// Solves with `theta_hat` substituted by `theta`, valid only at
    /// `delta = 0`; kept as an independent route for the equivalence check.
    pub fn solve_eliminated(&self) -> Result<RobustSolution> {
        assert_eq!(self.delta, 0.0, "elimination requires delta = 0");
        let ne_row: Vec<f64> = self
            .ne_theta
            .iter()
            .zip(&self.ne_theta_hat)
            .map(|(a, b)| a + b)
            .collect();
        let lp = LpProblem::minimize(&self.objective)
            .eq_row(&self.normalization, 1.0)
            .ub_row(&ne_row, 0.0);
        let sol = lp.solve()?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::DesignLp {
                stage: "robust PoA (theta_hat eliminated)",
                status: format!("{:?}", sol.status),
            });
        }
        let theta = sol.x;
        let theta_hat = theta.clone();
        Ok(self.package(sol.value, theta, theta_hat))
    }

    fn package(&self, value: f64, theta: Vec<f64>, theta_hat: Vec<f64>) -> RobustSolution {
        let poa = if value > 1e-12 { 1.0 / value } else { f64::INFINITY };
        RobustSolution {
            p_star: value,
            poa,
            theta,
            theta_hat,
        }
    }
}

/// Worst-case PoA of the class of games on `basis` with at most `n` agents
/// when the mechanism with the given toll tables is deployed at relative
/// coefficient error `delta`.
pub fn solve_robust_poa(
    basis: &BasisSet,
    toll_bases: &[Vec<f64>],
    n: usize,
    delta: f64,
) -> Result<RobustSolution> {
    build_lp(basis, toll_bases, n, delta).solve_reduced()
}

// ---------------------------------------------------------------------------
// Resource labeling
// ---------------------------------------------------------------------------

/// Per-resource `(x, y, z)` split between two allocations: users of both,
/// of `a_ne` only, and of `a_opt` only.
pub fn label_resources(
    game: &Game,
    a_ne: &Allocation,
    a_opt: &Allocation,
) -> Result<Vec<(usize, usize, usize)>> {
    game.validate_allocation(a_ne)?;
    game.validate_allocation(a_opt)?;
    let mut out = vec![(0usize, 0usize, 0usize); game.num_resources()];
    for i in 0..game.n_agents() {
        let ne = game.bundle(a_ne, i);
        let opt = game.bundle(a_opt, i);
        for e in ne.intersection(opt) {
            out[e].0 += 1;
        }
        for e in ne.difference(opt) {
            out[e].1 += 1;
        }
        for e in opt.difference(ne) {
            out[e].2 += 1;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Tight worst-case game
// ---------------------------------------------------------------------------

/// A game assembled from an optimal `(theta, theta_hat)` whose price of
/// anarchy attains the LP bound, together with its designated allocations.
#[derive(Debug, Clone)]
pub struct WorstCaseGame {
    pub game: Game,
    pub tolls: DeployedTolls,
    pub a_ne: Allocation,
    pub a_opt: Allocation,
    /// Labels retained after pruning, with their `(theta, theta_hat)` mass.
    pub provenance: Vec<(Label, f64, f64)>,
}

/// Builds the cyclic tight game: for each retained label, `n` ring-indexed
/// resources. Agent `i`'s equilibrium bundle on a ring covers offsets
/// `i .. i+x+y-1` (mod n) and its optimal bundle covers
/// `i+y .. i+y+x+z-1` (mod n), so every ring resource keeps the label's
/// `(x, y, z)` split; each ring resource weights its label's basis function
/// by `theta / n` and its toll by `theta_hat / n`.
pub fn construct_worst_case_game(
    instance: &RobustLpInstance,
    theta: &[f64],
    theta_hat: &[f64],
    basis: &BasisSet,
    toll_bases: &[Vec<f64>],
    prune_tol: f64,
) -> Result<WorstCaseGame> {
    let len = instance.index.len();
    if theta.len() != len || theta_hat.len() != len {
        return Err(Error::InvalidLpSolution {
            reason: format!(
                "mass vectors of length {}/{} for {} labels",
                theta.len(),
                theta_hat.len(),
                len
            ),
        });
    }
    if theta.iter().chain(theta_hat).any(|v| !v.is_finite() || *v < -prune_tol) {
        return Err(Error::InvalidLpSolution {
            reason: "masses must be finite and non-negative".into(),
        });
    }
    let n = instance.index.n;
    let kept: Vec<(Label, f64, f64)> = instance
        .index
        .labels()
        .iter()
        .zip(theta.iter().zip(theta_hat))
        .filter(|(_, (&t, _))| t > prune_tol)
        .map(|(&l, (&t, &th))| (l, t, th))
        .collect();
    if kept.is_empty() {
        return Err(Error::InvalidLpSolution {
            reason: "all labels pruned; nothing to construct".into(),
        });
    }

    let num_resources = kept.len() * n;
    let m = basis.len();
    let mut gamma = vec![vec![0.0; m]; num_resources];
    let mut gamma_tilde = vec![vec![0.0; m]; num_resources];
    for (ring, &(label, t, th)) in kept.iter().enumerate() {
        for p in 0..n {
            gamma[ring * n + p][label.j] = t / n as f64;
            gamma_tilde[ring * n + p][label.j] = th / n as f64;
        }
    }

    let mut action_sets = Vec::with_capacity(n);
    for agent in 0..n {
        let mut ne_bundle = Vec::new();
        let mut opt_bundle = Vec::new();
        for (ring, &(label, _, _)) in kept.iter().enumerate() {
            for s in 0..label.x + label.y {
                ne_bundle.push(ring * n + (agent + s) % n);
            }
            for s in 0..label.x + label.z {
                opt_bundle.push(ring * n + (agent + label.y + s) % n);
            }
        }
        action_sets.push(vec![Bundle::new(ne_bundle), Bundle::new(opt_bundle)]);
    }

    let game = Game::new(
        n,
        num_resources,
        action_sets,
        CoefficientMatrix::new(gamma)?,
        basis.clone(),
    )?;
    let tolls = DeployedTolls::new(toll_bases.to_vec(), CoefficientMatrix::new(gamma_tilde)?)?;
    Ok(WorstCaseGame {
        game,
        tolls,
        a_ne: Allocation::new(vec![0; n]),
        a_opt: Allocation::new(vec![1; n]),
        provenance: kept,
    })
}

/// Outcome of validating a constructed worst-case game.
#[derive(Debug, Clone)]
pub struct WorstCaseReport {
    /// The designated equilibrium survives a full deviation check.
    pub nash_ok: bool,
    pub violating_agent: Option<usize>,
    /// System cost of the designated equilibrium (normalized to 1).
    pub ne_cost: f64,
    pub ne_cost_ok: bool,
    /// Optimal-to-equilibrium cost ratio against the provenance LP value.
    pub ratio: f64,
    pub expected_p_star: f64,
    pub ratio_ok: bool,
}

impl WorstCaseReport {
    pub fn all_ok(&self) -> bool {
        self.nash_ok && self.ne_cost_ok && self.ratio_ok
    }
}

/// Checks the three defining properties of a constructed game: the
/// designated equilibrium is a Nash equilibrium under the deployed tolls,
/// its system cost is 1, and the cost ratio reproduces the provenance mass'
/// objective value.
pub fn verify_worst_case(wcg: &WorstCaseGame, tol: f64) -> Result<WorstCaseReport> {
    let game = &wcg.game;
    let basis = game.basis();
    let loads = game.loads_unchecked(&wcg.a_ne);
    let mut nash_ok = true;
    let mut violating_agent = None;
    for i in 0..game.n_agents() {
        let own = game.agent_cost_unchecked(&wcg.tolls, &wcg.a_ne, i, &loads);
        let ne_bundle = game.bundle(&wcg.a_ne, i);
        let alt = &game.action_set(i)[1];
        let mut dev = 0.0;
        for &e in alt.resources() {
            let k = if ne_bundle.contains(e) {
                loads.load(e)
            } else {
                loads.load(e) + 1
            };
            dev += game.composite_at(&wcg.tolls, e, k);
        }
        if dev < own - 1e-9 {
            nash_ok = false;
            violating_agent = Some(i);
            break;
        }
    }

    let ne_cost = game.system_cost(&wcg.a_ne)?;
    let opt_cost = game.system_cost(&wcg.a_opt)?;
    let expected_p_star: f64 = wcg
        .provenance
        .iter()
        .map(|&(Label { x, y: _, z, j }, t, _)| {
            (x + z) as f64 * tval(basis.table(j), x + z) * t
        })
        .sum();
    let ratio = opt_cost / ne_cost;
    Ok(WorstCaseReport {
        nash_ok,
        violating_agent,
        ne_cost,
        ne_cost_ok: (ne_cost - 1.0).abs() <= tol,
        ratio,
        expected_p_star,
        ratio_ok: (ratio - expected_p_star).abs() <= tol * (1.0 + expected_p_star),
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{self, DEFAULT_ENUM_CAP};
    use crate::fixtures;
    use crate::tolls;

    fn zero_tables(basis: &BasisSet) -> Vec<Vec<f64>> {
        vec![vec![0.0; basis.max_load()]; basis.len()]
    }

    #[test]
    fn index_small_cases() {
        let idx = LabelIndex::build(1, 1);
        assert_eq!(idx.len(), 3);
        let mut got: Vec<(usize, usize, usize)> =
            idx.labels().iter().map(|l| (l.x, l.y, l.z)).collect();
        got.sort();
        assert_eq!(got, vec![(0, 0, 1), (0, 1, 0), (1, 0, 0)]);

        assert_eq!(LabelIndex::build(2, 1).len(), 9);
        assert_eq!(LabelIndex::build(15, 2).len(), 1630);
    }

    #[test]
    fn lp_coefficients_edge_labels() {
        let n = 3;
        let basis = BasisSet::affine(n);
        let inst = build_lp(&basis, &zero_tables(&basis), n, 0.0);
        for (i, l) in inst.index.labels().iter().enumerate() {
            if l.x == 0 && l.y == n && l.z == 0 {
                // NE-row theta coefficient n * b_j(n); objective 0.
                let b = basis.table(l.j);
                assert_eq!(inst.ne_theta[i], n as f64 * b[n - 1]);
                assert_eq!(inst.objective[i], 0.0);
            }
            if l.y == 0 && l.z == 0 {
                assert_eq!(inst.ne_theta[i], 0.0);
                assert_eq!(inst.ne_theta_hat[i], 0.0);
            }
            if l.x == 0 && l.y == 0 && l.z == n {
                // load-0 convention zeroes the normalization coefficient
                assert_eq!(inst.normalization[i], 0.0);
            }
        }
    }

    #[test]
    fn constant_basis_class_is_efficient() {
        let basis = BasisSet::constant(4);
        let sol = solve_robust_poa(&basis, &zero_tables(&basis), 4, 0.0).unwrap();
        assert!((sol.poa - 1.0).abs() < 1e-9, "{}", sol.poa);
    }

    #[test]
    fn affine_untolled_matches_literature() {
        // Frozen from an independent LP solve: exactly 2 at n = 2 and 5/2
        // from n = 3 on (the affine atomic asymptote).
        let basis = BasisSet::affine(2);
        let sol = solve_robust_poa(&basis, &zero_tables(&basis), 2, 0.0).unwrap();
        assert!((sol.poa - 2.0).abs() < 1e-7, "{}", sol.poa);

        let basis = BasisSet::affine(3);
        let sol = solve_robust_poa(&basis, &zero_tables(&basis), 3, 0.0).unwrap();
        assert!((sol.poa - 2.5).abs() < 1e-7, "{}", sol.poa);
    }

    #[test]
    fn linear_class_mechanism_values_at_n20() {
        let n = 20;
        let basis = BasisSet::monomial(n, 1);
        let zero = zero_tables(&basis);
        let untolled = solve_robust_poa(&basis, &zero, n, 0.0).unwrap();
        assert!((untolled.poa - 2.5).abs() < 0.05, "{}", untolled.poa);

        let mc: Vec<Vec<f64>> = basis.tables_iter().map(tolls::marginal_cost_toll).collect();
        let mc_sol = solve_robust_poa(&basis, &mc, n, 0.0).unwrap();
        let (opt_table, opt_poa) = tolls::optimal_local_toll(basis.table(0), n).unwrap();
        let opt_sol = solve_robust_poa(&basis, &[opt_table], n, 0.0).unwrap();
        assert!((opt_sol.poa - opt_poa).abs() < 1e-6 * opt_poa);
        // The designed toll dominates both marginal-cost tolls and no tolls.
        // Marginal-cost tolls are worse than no tolls here: their worst case
        // is attained by a real game (see the tightness tests), so the class
        // value genuinely rises to 3.
        assert!(opt_sol.poa < mc_sol.poa);
        assert!(opt_sol.poa < untolled.poa);
        assert!((mc_sol.poa - 3.0).abs() < 1e-6, "{}", mc_sol.poa);
    }

    #[test]
    fn constant_class_brute_force_cross_check() {
        // Congestion-independent costs make every equilibrium optimal; the
        // LP value 1 is confirmed by exhaustive enumeration of random
        // constant-cost games.
        let mut rng = crate::rng::SplitMix64::new(0xc0c0);
        for _ in 0..20 {
            let n = 2 + rng.below(2) as usize;
            let resources = 2 + rng.below(2) as usize;
            let basis = BasisSet::constant(n);
            let gamma = CoefficientMatrix::new(
                (0..resources)
                    .map(|_| vec![rng.below(4) as f64 / 2.0])
                    .collect(),
            )
            .unwrap();
            let mut sets = Vec::new();
            for _ in 0..n {
                let mut set = vec![Bundle::new(vec![rng.below(resources as u64) as usize])];
                let extra = Bundle::new(vec![
                    rng.below(resources as u64) as usize,
                    rng.below(resources as u64) as usize,
                ]);
                if !set.contains(&extra) {
                    set.push(extra);
                }
                sets.push(set);
            }
            let game = Game::new(n, resources, sets, gamma, basis).unwrap();
            let report =
                equilibrium::poa(&game, &DeployedTolls::zero(&game), 1 << 20).unwrap();
            assert!(
                (report.poa - 1.0).abs() < 1e-9 || report.poa.is_infinite(),
                "constant-cost game with poa {}",
                report.poa
            );
        }
    }

    #[test]
    fn constructed_gamma_tilde_stays_in_the_relative_band() {
        // Label-wise box feasibility carries to every ring resource.
        let n = 3;
        let delta = 0.25;
        let basis = BasisSet::affine(n);
        let tables: Vec<Vec<f64>> = basis.tables_iter().map(tolls::marginal_cost_toll).collect();
        let inst = build_lp(&basis, &tables, n, delta);
        let sol = inst.solve_reduced().unwrap();
        let wcg = construct_worst_case_game(
            &inst,
            &sol.theta,
            &sol.theta_hat,
            &basis,
            &tables,
            PRUNE_TOL,
        )
        .unwrap();
        for e in 0..wcg.game.num_resources() {
            for j in 0..basis.len() {
                let g = wcg.game.gamma().get(e, j);
                let gt = wcg.tolls.gamma_tilde().get(e, j);
                assert!(
                    (gt - g).abs() <= delta * g + 1e-12,
                    "resource {e} basis {j}: {gt} vs {g}"
                );
            }
        }
    }

    #[test]
    fn delta_monotonicity() {
        let n = 5;
        let basis = BasisSet::affine(n);
        let tables: Vec<Vec<f64>> = basis.tables_iter().map(tolls::marginal_cost_toll).collect();
        let mut prev = f64::INFINITY;
        for step in 0..5 {
            let delta = step as f64 * 0.1;
            let sol = solve_robust_poa(&basis, &tables, n, delta).unwrap();
            assert!(
                sol.p_star <= prev + 1e-9,
                "p* must not increase with delta"
            );
            prev = sol.p_star;
        }
    }

    #[test]
    fn boxed_and_reduced_agree() {
        let n = 4;
        let basis = BasisSet::affine(n);
        let tables: Vec<Vec<f64>> = basis.tables_iter().map(tolls::marginal_cost_toll).collect();
        for delta in [0.0, 0.25, 0.5] {
            let inst = build_lp(&basis, &tables, n, delta);
            let red = inst.solve_reduced().unwrap();
            let boxed = inst.solve_boxed().unwrap();
            assert!(
                (red.p_star - boxed.p_star).abs() < 1e-8,
                "delta {delta}: {} vs {}",
                red.p_star,
                boxed.p_star
            );
        }
    }

    #[test]
    fn eliminated_route_matches_boxed_at_delta_zero() {
        let n = 5;
        let basis = BasisSet::affine(n);
        for tables in [
            zero_tables(&basis),
            basis.tables_iter().map(tolls::marginal_cost_toll).collect(),
        ] {
            let inst = build_lp(&basis, &tables, n, 0.0);
            let elim = inst.solve_eliminated().unwrap();
            let boxed = inst.solve_boxed().unwrap();
            assert!(
                (elim.p_star - boxed.p_star).abs() < 1e-9,
                "{} vs {}",
                elim.p_star,
                boxed.p_star
            );
        }
    }

    #[test]
    fn scale_invariance() {
        let n = 4;
        let base = BasisSet::new(vec![(1..=n).map(|k| k as f64).collect()]).unwrap();
        let scaled = BasisSet::new(vec![(1..=n).map(|k| 7.5 * k as f64).collect()]).unwrap();
        let a = solve_robust_poa(&base, &zero_tables(&base), n, 0.0).unwrap();
        let b = solve_robust_poa(&scaled, &zero_tables(&scaled), n, 0.0).unwrap();
        assert!((a.poa - b.poa).abs() < 1e-9);
    }

    #[test]
    fn label_resources_examples() {
        let x = fixtures::game_x();
        let a_ne = Allocation::new(vec![0, 1]);
        let a_opt = Allocation::new(vec![1, 0]);
        let labels = label_resources(&x, &a_ne, &a_opt).unwrap();
        assert_eq!(labels, vec![(0, 1, 1), (0, 1, 1)]);

        // identical allocations: y = z = 0 and x = load
        let labels = label_resources(&x, &a_ne, &a_ne).unwrap();
        assert_eq!(labels, vec![(1, 0, 0), (1, 0, 0)]);
    }

    #[test]
    fn single_label_ring_structure() {
        // label (0,1,1), n = 2: resource i is agent i's NE bundle, the
        // other resource its OPT bundle.
        let n = 2;
        let basis = BasisSet::new(vec![(1..=n).map(|k| k as f64).collect()]).unwrap();
        let tables = zero_tables(&basis);
        let inst = build_lp(&basis, &tables, n, 0.0);
        let mut theta = vec![0.0; inst.index.len()];
        let mut theta_hat = vec![0.0; inst.index.len()];
        let pos = inst
            .index
            .labels()
            .iter()
            .position(|l| (l.x, l.y, l.z) == (0, 1, 1))
            .unwrap();
        theta[pos] = 1.0;
        theta_hat[pos] = 1.0;
        let wcg =
            construct_worst_case_game(&inst, &theta, &theta_hat, &basis, &tables, PRUNE_TOL)
                .unwrap();
        assert_eq!(wcg.game.num_resources(), 2);
        for agent in 0..2 {
            let ne = &wcg.game.action_set(agent)[0];
            let opt = &wcg.game.action_set(agent)[1];
            assert_eq!(ne.resources(), &[agent]);
            assert_eq!(opt.resources(), &[(agent + 1) % 2]);
        }
        let labels = label_resources(&wcg.game, &wcg.a_ne, &wcg.a_opt).unwrap();
        assert!(labels.iter().all(|&l| l == (0, 1, 1)));
    }

    #[test]
    fn coincident_label_keeps_bundles_equal() {
        let n = 2;
        let basis = BasisSet::new(vec![(1..=n).map(|k| k as f64).collect()]).unwrap();
        let tables = zero_tables(&basis);
        let inst = build_lp(&basis, &tables, n, 0.0);
        let mut theta = vec![0.0; inst.index.len()];
        let pos = inst
            .index
            .labels()
            .iter()
            .position(|l| (l.x, l.y, l.z) == (1, 0, 0))
            .unwrap();
        theta[pos] = 1.0;
        let wcg = construct_worst_case_game(&inst, &theta, &theta, &basis, &tables, PRUNE_TOL)
            .unwrap();
        for agent in 0..n {
            assert_eq!(
                wcg.game.action_set(agent)[0],
                wcg.game.action_set(agent)[1]
            );
        }
    }

    #[test]
    fn tightness_affine_zero_tolls_n2() {
        let n = 2;
        let basis = BasisSet::affine(n);
        let tables = zero_tables(&basis);
        let inst = build_lp(&basis, &tables, n, 0.0);
        let sol = inst.solve_reduced().unwrap();
        let wcg = construct_worst_case_game(
            &inst,
            &sol.theta,
            &sol.theta_hat,
            &basis,
            &tables,
            PRUNE_TOL,
        )
        .unwrap();
        let report = verify_worst_case(&wcg, 1e-6).unwrap();
        assert!(report.all_ok(), "{report:?}");
        let brute = equilibrium::poa(&wcg.game, &wcg.tolls, DEFAULT_ENUM_CAP).unwrap();
        assert!(
            (brute.poa - sol.poa).abs() < 1e-4,
            "brute {} vs lp {}",
            brute.poa,
            sol.poa
        );
    }

    #[test]
    fn verify_flags_scaled_theta() {
        let n = 2;
        let basis = BasisSet::affine(n);
        let tables = zero_tables(&basis);
        let inst = build_lp(&basis, &tables, n, 0.0);
        let sol = inst.solve_reduced().unwrap();
        let doubled: Vec<f64> = sol.theta.iter().map(|v| 2.0 * v).collect();
        let wcg =
            construct_worst_case_game(&inst, &doubled, &doubled, &basis, &tables, PRUNE_TOL)
                .unwrap();
        let report = verify_worst_case(&wcg, 1e-6).unwrap();
        assert!(!report.ne_cost_ok);
        assert!((report.ne_cost - 2.0).abs() < 1e-9);
    }

    #[test]
    fn verify_flags_nash_violation() {
        // Mass on (0, n, 0) alone: every agent strictly prefers the empty
        // optimal bundle, so the designated equilibrium fails the check.
        let n = 2;
        let basis = BasisSet::new(vec![(1..=n).map(|k| k as f64).collect()]).unwrap();
        let tables = zero_tables(&basis);
        let inst = build_lp(&basis, &tables, n, 0.0);
        let mut theta = vec![0.0; inst.index.len()];
        let pos = inst
            .index
            .labels()
            .iter()
            .position(|l| (l.x, l.y, l.z) == (0, 2, 0))
            .unwrap();
        theta[pos] = 0.25; // normalization: 2 * b(2) * 0.25 = 1
        let wcg = construct_worst_case_game(&inst, &theta, &theta, &basis, &tables, PRUNE_TOL)
            .unwrap();
        let report = verify_worst_case(&wcg, 1e-6).unwrap();
        assert!(!report.nash_ok);
        assert!(report.ne_cost_ok, "normalized: {}", report.ne_cost);
    }

    #[test]
    fn construct_rejects_malformed_masses() {
        let basis = BasisSet::affine(2);
        let tables = zero_tables(&basis);
        let inst = build_lp(&basis, &tables, 2, 0.0);
        let short = vec![1.0];
        assert!(matches!(
            construct_worst_case_game(&inst, &short, &short, &basis, &tables, PRUNE_TOL),
            Err(Error::InvalidLpSolution { .. })
        ));
        let negative = vec![-1.0; inst.index.len()];
        assert!(construct_worst_case_game(
            &inst,
            &negative,
            &negative,
            &basis,
            &tables,
            PRUNE_TOL
        )
        .is_err());
    }
}
