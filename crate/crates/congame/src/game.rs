//! Atomic congestion games with basis-parameterized costs and local tolls.
//!
//! A game couples `n` agents, a resource set `E`, per-agent bundle choices,
//! and resource costs `l_e(k) = sum_j gamma[e][j] * b_j(k)` built from a
//! shared set of non-negative, non-decreasing basis tables. Tolls live in the
//! span of per-basis toll tables and are deployed with their own coefficient
//! matrix, which may differ from the game's (the misspecified case).
//!
//! All types are immutable after construction and every operation is a pure
//! function, so evaluation is safe from any number of concurrent workers.
//!
//! Evaluations at load 0 return 0 by convention; no formula consumes a
//! load-0 value with a nonzero multiplier.

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Basis tables
// ---------------------------------------------------------------------------

/// A set of `m` basis cost functions tabulated on loads `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    n: usize,
    tables: Vec<Vec<f64>>,
}

impl BasisSet {
    /// Builds a basis set, enforcing non-negativity and monotonicity.
    pub fn new(tables: Vec<Vec<f64>>) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::InvalidBasis {
                index: 0,
                reason: "no basis functions".into(),
            });
        }
        let n = tables[0].len();
        for (j, t) in tables.iter().enumerate() {
            if t.is_empty() || t.len() != n {
                return Err(Error::InvalidBasis {
                    index: j,
                    reason: format!("table length {} (expected {n})", t.len()),
                });
            }
            for (k, &v) in t.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidBasis {
                        index: j,
                        reason: format!("b({}) = {v} is not a finite non-negative value", k + 1),
                    });
                }
                if k > 0 && v < t[k - 1] {
                    return Err(Error::InvalidBasis {
                        index: j,
                        reason: format!("decreasing at load {}: {} -> {v}", k + 1, t[k - 1]),
                    });
                }
            }
        }
        Ok(BasisSet { n, tables })
    }

    /// Constant basis `b(k) = 1` on `1..=n`.
    pub fn constant(n: usize) -> Self {
        BasisSet {
            n,
            tables: vec![vec![1.0; n]],
        }
    }

    /// Monomial basis `b(k) = k^degree` on `1..=n`.
    pub fn monomial(n: usize, degree: u32) -> Self {
        BasisSet {
            n,
            tables: vec![(1..=n).map(|k| (k as f64).powi(degree as i32)).collect()],
        }
    }

    /// Affine basis `{1, k}`.
    pub fn affine(n: usize) -> Self {
        BasisSet {
            n,
            tables: vec![vec![1.0; n], (1..=n).map(|k| k as f64).collect()],
        }
    }

    /// BPR-style quartic basis `{1, k^4}`.
    pub fn quartic(n: usize) -> Self {
        BasisSet {
            n,
            tables: vec![
                vec![1.0; n],
                (1..=n).map(|k| (k as f64).powi(4)).collect(),
            ],
        }
    }

    /// Maximum load the tables cover.
    pub fn max_load(&self) -> usize {
        self.n
    }

    /// Number of basis functions.
    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    /// Table of basis function `j`, indexed by `k - 1`.
    pub fn table(&self, j: usize) -> &[f64] {
        &self.tables[j]
    }

    pub fn tables_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.tables.iter().map(|t| t.as_slice())
    }

    /// `b_j(k)`, with `b_j(0) = 0` by convention.
    #[inline]
    pub fn value(&self, j: usize, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.tables[j][k - 1]
        }
    }
}

// ---------------------------------------------------------------------------
// Coefficients
// ---------------------------------------------------------------------------

/// Non-negative weights, one row per resource, one column per basis function.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    rows: Vec<Vec<f64>>,
}

impl CoefficientMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.first().map_or(0, |r| r.len());
        for (e, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidCoefficients {
                    reason: format!("row {e} has {} entries, expected {m}", row.len()),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidCoefficients {
                        reason: format!("gamma[{e}][{j}] = {v} must be finite and >= 0"),
                    });
                }
            }
        }
        Ok(CoefficientMatrix { rows })
    }

    pub fn num_resources(&self) -> usize {
        self.rows.len()
    }

    pub fn num_bases(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn row(&self, e: usize) -> &[f64] {
        &self.rows[e]
    }

    #[inline]
    pub fn get(&self, e: usize, j: usize) -> f64 {
        self.rows[e][j]
    }

    /// Component-wise scaled copy: `gamma[e][j] * factors[e][j]`.
    pub fn scaled(&self, factors: &[Vec<f64>]) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .zip(factors)
            .map(|(r, f)| r.iter().zip(f).map(|(a, b)| a * b).collect())
            .collect();
        CoefficientMatrix::new(rows)
    }
}

// ---------------------------------------------------------------------------
// Bundles, allocations, loads
// ---------------------------------------------------------------------------

/// A set of resource indices, kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bundle {
    resources: Vec<usize>,
}

impl Bundle {
    pub fn new(mut resources: Vec<usize>) -> Self {
        resources.sort_unstable();
        resources.dedup();
        Bundle { resources }
    }

    pub fn resources(&self) -> &[usize] {
        &self.resources
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    #[inline]
    pub fn contains(&self, e: usize) -> bool {
        self.resources.binary_search(&e).is_ok()
    }

    /// Resources in `self` and `other`.
    pub fn intersection<'a>(&'a self, other: &'a Bundle) -> impl Iterator<Item = usize> + 'a {
        self.resources
            .iter()
            .copied()
            .filter(move |&e| other.contains(e))
    }

    /// Resources in `self` but not `other`.
    pub fn difference<'a>(&'a self, other: &'a Bundle) -> impl Iterator<Item = usize> + 'a {
        self.resources
            .iter()
            .copied()
            .filter(move |&e| !other.contains(e))
    }
}

/// A joint action: each agent's index into its own action set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Allocation {
    choices: Vec<usize>,
}

impl Allocation {
    pub fn new(choices: Vec<usize>) -> Self {
        Allocation { choices }
    }

    pub fn choices(&self) -> &[usize] {
        &self.choices
    }

    pub fn choice(&self, agent: usize) -> usize {
        self.choices[agent]
    }

    /// Copy with one agent's choice replaced.
    pub fn with_choice(&self, agent: usize, choice: usize) -> Self {
        let mut c = self.choices.clone();
        c[agent] = choice;
        Allocation { choices: c }
    }
}

/// Number of users per resource under some allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadProfile {
    counts: Vec<usize>,
}

impl LoadProfile {
    pub fn from_counts(counts: Vec<usize>) -> Self {
        LoadProfile { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    #[inline]
    pub fn load(&self, e: usize) -> usize {
        self.counts[e]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

// ---------------------------------------------------------------------------
// Deployed tolls
// ---------------------------------------------------------------------------

/// Toll tables per basis function plus the coefficients they were deployed
/// with. `gamma_tilde` may differ from the game's true coefficients; toll
/// tables may be negative when the mechanism subsidizes.
#[derive(Debug, Clone, PartialEq)]
pub struct DeployedTolls {
    toll_bases: Vec<Vec<f64>>,
    gamma_tilde: CoefficientMatrix,
}

impl DeployedTolls {
    pub fn new(toll_bases: Vec<Vec<f64>>, gamma_tilde: CoefficientMatrix) -> Result<Self> {
        if toll_bases.len() != gamma_tilde.num_bases() {
            return Err(Error::InvalidCoefficients {
                reason: format!(
                    "{} toll tables vs {} coefficient columns",
                    toll_bases.len(),
                    gamma_tilde.num_bases()
                ),
            });
        }
        let n = toll_bases.first().map_or(0, |t| t.len());
        for (j, t) in toll_bases.iter().enumerate() {
            if t.len() != n {
                return Err(Error::InvalidBasis {
                    index: j,
                    reason: format!("toll table length {} (expected {n})", t.len()),
                });
            }
        }
        Ok(DeployedTolls {
            toll_bases,
            gamma_tilde,
        })
    }

    /// Zero tolls for a game (all toll tables identically zero).
    pub fn zero(game: &Game) -> Self {
        let n = game.basis().max_load();
        let m = game.basis().len();
        DeployedTolls {
            toll_bases: vec![vec![0.0; n]; m],
            gamma_tilde: game.gamma().clone(),
        }
    }

    pub fn toll_bases(&self) -> &[Vec<f64>] {
        &self.toll_bases
    }

    pub fn gamma_tilde(&self) -> &CoefficientMatrix {
        &self.gamma_tilde
    }

    /// `tau_j(k)`, with the load-0 convention.
    #[inline]
    pub fn base_value(&self, j: usize, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.toll_bases[j][k - 1]
        }
    }

    /// Deployed toll on resource `e` at load `k`.
    #[inline]
    pub fn value(&self, e: usize, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.gamma_tilde
            .row(e)
            .iter()
            .enumerate()
            .map(|(j, &g)| g * self.toll_bases[j][k - 1])
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Game
// ---------------------------------------------------------------------------

/// An atomic congestion game.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    n_agents: usize,
    num_resources: usize,
    action_sets: Vec<Vec<Bundle>>,
    gamma: CoefficientMatrix,
    basis: BasisSet,
}

impl Game {
    pub fn new(
        n_agents: usize,
        num_resources: usize,
        action_sets: Vec<Vec<Bundle>>,
        gamma: CoefficientMatrix,
        basis: BasisSet,
    ) -> Result<Self> {
        if n_agents == 0 || action_sets.len() != n_agents {
            return Err(Error::AgentOutOfRange {
                agent: action_sets.len(),
                agents: n_agents,
            });
        }
        if n_agents > basis.max_load() {
            return Err(Error::TooManyAgents {
                agents: n_agents,
                basis_max: basis.max_load(),
            });
        }
        if gamma.num_resources() != num_resources {
            return Err(Error::InvalidCoefficients {
                reason: format!(
                    "{} coefficient rows for {num_resources} resources",
                    gamma.num_resources()
                ),
            });
        }
        if gamma.num_bases() != basis.len() {
            return Err(Error::InvalidCoefficients {
                reason: format!(
                    "{} coefficient columns for {} basis functions",
                    gamma.num_bases(),
                    basis.len()
                ),
            });
        }
        for (i, set) in action_sets.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::EmptyActionSet { agent: i });
            }
            for bundle in set {
                for &e in bundle.resources() {
                    if e >= num_resources {
                        return Err(Error::InvalidBundle {
                            agent: i,
                            resource: e,
                        });
                    }
                }
            }
        }
        Ok(Game {
            n_agents,
            num_resources,
            action_sets,
            gamma,
            basis,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn num_resources(&self) -> usize {
        self.num_resources
    }

    pub fn action_set(&self, agent: usize) -> &[Bundle] {
        &self.action_sets[agent]
    }

    pub fn gamma(&self) -> &CoefficientMatrix {
        &self.gamma
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    /// The shared action set when every agent has an identical one.
    pub fn symmetric_action_set(&self) -> Option<&[Bundle]> {
        let first = &self.action_sets[0];
        if self.action_sets.iter().all(|s| s == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Number of joint actions, saturating as a float for cap checks.
    pub fn joint_action_count(&self) -> f64 {
        self.action_sets
            .iter()
            .map(|s| s.len() as f64)
            .product()
    }

    pub fn validate_allocation(&self, a: &Allocation) -> Result<()> {
        if a.choices().len() != self.n_agents {
            return Err(Error::InvalidAllocation {
                agent: a.choices().len(),
                choice: 0,
                available: self.n_agents,
            });
        }
        for (i, &c) in a.choices().iter().enumerate() {
            if c >= self.action_sets[i].len() {
                return Err(Error::InvalidAllocation {
                    agent: i,
                    choice: c,
                    available: self.action_sets[i].len(),
                });
            }
        }
        Ok(())
    }

    /// Chosen bundle of `agent` under `a`.
    pub fn bundle(&self, a: &Allocation, agent: usize) -> &Bundle {
        &self.action_sets[agent][a.choice(agent)]
    }

    /// Per-resource user counts `|a|_e`.
    pub fn load_profile(&self, a: &Allocation) -> Result<LoadProfile> {
        self.validate_allocation(a)?;
        Ok(self.loads_unchecked(a))
    }

    pub(crate) fn loads_unchecked(&self, a: &Allocation) -> LoadProfile {
        let mut counts = vec![0usize; self.num_resources];
        for (i, &c) in a.choices().iter().enumerate() {
            for &e in self.action_sets[i][c].resources() {
                counts[e] += 1;
            }
        }
        LoadProfile { counts }
    }

    /// `l_e(k)`, the per-user cost of resource `e` at load `k`.
    pub fn resource_cost(&self, e: usize, k: usize) -> Result<f64> {
        if e >= self.num_resources {
            return Err(Error::ResourceOutOfRange {
                resource: e,
                resources: self.num_resources,
            });
        }
        if k > self.basis.max_load() {
            return Err(Error::LoadOutOfRange {
                load: k,
                max: self.basis.max_load(),
            });
        }
        Ok(self.cost_at(e, k))
    }

    #[inline]
    pub(crate) fn cost_at(&self, e: usize, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.gamma
            .row(e)
            .iter()
            .enumerate()
            .map(|(j, &g)| g * self.basis.tables[j][k - 1])
            .sum()
    }

    /// Deployed toll on resource `e` at load `k`.
    pub fn toll_value(&self, tolls: &DeployedTolls, e: usize, k: usize) -> Result<f64> {
        if e >= self.num_resources {
            return Err(Error::ResourceOutOfRange {
                resource: e,
                resources: self.num_resources,
            });
        }
        if k > self.basis.max_load() {
            return Err(Error::LoadOutOfRange {
                load: k,
                max: self.basis.max_load(),
            });
        }
        Ok(tolls.value(e, k))
    }

    /// Composite per-user cost `l_e(k) + tau_e(k)`.
    #[inline]
    pub(crate) fn composite_at(&self, tolls: &DeployedTolls, e: usize, k: usize) -> f64 {
        self.cost_at(e, k) + tolls.value(e, k)
    }

    /// Agent `i`'s total latency-plus-toll cost under `a`.
    pub fn agent_cost(&self, tolls: &DeployedTolls, a: &Allocation, i: usize) -> Result<f64> {
        self.validate_allocation(a)?;
        if i >= self.n_agents {
            return Err(Error::AgentOutOfRange {
                agent: i,
                agents: self.n_agents,
            });
        }
        let loads = self.loads_unchecked(a);
        Ok(self.agent_cost_unchecked(tolls, a, i, &loads))
    }

    pub(crate) fn agent_cost_unchecked(
        &self,
        tolls: &DeployedTolls,
        a: &Allocation,
        i: usize,
        loads: &LoadProfile,
    ) -> f64 {
        self.bundle(a, i)
            .resources()
            .iter()
            .map(|&e| self.composite_at(tolls, e, loads.load(e)))
            .sum()
    }

    /// System cost: total latency over all resources, tolls excluded.
    pub fn system_cost(&self, a: &Allocation) -> Result<f64> {
        self.validate_allocation(a)?;
        Ok(self.system_cost_loads(&self.loads_unchecked(a)))
    }

    /// System cost of a load profile (resources at load 0 contribute 0).
    pub fn system_cost_loads(&self, loads: &LoadProfile) -> f64 {
        loads
            .counts()
            .iter()
            .enumerate()
            .map(|(e, &k)| k as f64 * self.cost_at(e, k))
            .sum()
    }

    /// Rosenthal potential under composite costs. Unilateral deviations
    /// change the potential by exactly the deviator's cost change, which is
    /// what makes best-response dynamics terminate.
    pub fn rosenthal_potential(&self, tolls: &DeployedTolls, a: &Allocation) -> Result<f64> {
        self.validate_allocation(a)?;
        let loads = self.loads_unchecked(a);
        let mut phi = 0.0;
        for (e, &k) in loads.counts().iter().enumerate() {
            for load in 1..=k {
                phi += self.composite_at(tolls, e, load);
            }
        }
        Ok(phi)
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
