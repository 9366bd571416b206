//! Pure Nash equilibria, best-response dynamics, and the price of anarchy.
//!
//! Enumeration is exhaustive over the joint-action space, with an anonymous
//! profile reduction for symmetric games: when every agent shares one action
//! set, costs depend only on per-action counts, so it suffices to enumerate
//! count vectors and check a single representative deviation per occupied
//! action. The reduction is exact and is this crate's method of record for
//! instances whose joint-action space exceeds the enumeration cap.
//!
//! Ties decide toward equilibrium membership: an allocation is rejected only
//! when some unilateral deviation improves by more than `NASH_TOL`.

use crate::error::{Error, Result};
use crate::game::{Allocation, DeployedTolls, Game, LoadProfile};

/// Strictness tolerance for cost comparisons.
pub const NASH_TOL: f64 = 1e-12;
/// Default ceiling on exhaustively enumerated joint actions.
pub const DEFAULT_ENUM_CAP: usize = 1_000_000;

// ---------------------------------------------------------------------------
// Nash sets
// ---------------------------------------------------------------------------

/// An anonymous profile: how many agents picked each shared action.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile {
    pub counts: Vec<usize>,
}

impl Profile {
    /// Number of allocations that induce this profile.
    pub fn multiplicity(&self) -> u64 {
        let n: usize = self.counts.iter().sum();
        let mut value = 1u64;
        let mut remaining = n;
        for &c in &self.counts {
            value *= binomial(remaining, c);
            remaining -= c;
        }
        value
    }

    /// A representative allocation: agents in index order fill action 0
    /// first, then action 1, and so on.
    pub fn representative(&self) -> Allocation {
        let mut choices = Vec::new();
        for (action, &c) in self.counts.iter().enumerate() {
            choices.extend(std::iter::repeat_n(action, c));
        }
        Allocation::new(choices)
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

/// The set of pure Nash equilibria, in the representation the enumeration
/// route produced. Members are sorted, so serialization is stable.
#[derive(Debug, Clone, PartialEq)]
pub enum NashSet {
    Generic(Vec<Allocation>),
    Symmetric(Vec<Profile>),
}

impl NashSet {
    pub fn len(&self) -> usize {
        match self {
            NashSet::Generic(v) => v.len(),
            NashSet::Symmetric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Whether every member of `self` also appears in `other`. Both sets must
    /// come from the same enumeration mode.
    pub fn subset_of(&self, other: &NashSet) -> bool {
        match (self, other) {
            (NashSet::Generic(a), NashSet::Generic(b)) => {
                a.iter().all(|x| b.binary_search(x).is_ok())
            }
            (NashSet::Symmetric(a), NashSet::Symmetric(b)) => {
                a.iter().all(|x| b.binary_search(x).is_ok())
            }
            _ => false,
        }
    }

    /// Expands symmetric profiles into representative allocations.
    pub fn representative_allocations(&self) -> Vec<Allocation> {
        match self {
            NashSet::Generic(v) => v.clone(),
            NashSet::Symmetric(v) => v.iter().map(Profile::representative).collect(),
        }
    }
}

/// Worst equilibrium against best achievable system cost.
#[derive(Debug, Clone)]
pub struct PoaReport {
    pub worst_ne_cost: f64,
    pub opt_cost: f64,
    pub poa: f64,
    pub worst_equilibrium: Allocation,
    pub optimal_allocation: Allocation,
}

// ---------------------------------------------------------------------------
// Equilibrium checks
// ---------------------------------------------------------------------------

/// Whether no agent can strictly improve by a unilateral bundle change.
pub fn is_nash(game: &Game, tolls: &DeployedTolls, a: &Allocation) -> Result<bool> {
    game.validate_allocation(a)?;
    let loads = game.loads_unchecked(a);
    for i in 0..game.n_agents() {
        let current = game.agent_cost_unchecked(tolls, a, i, &loads);
        let own = game.bundle(a, i);
        for alt_idx in 0..game.action_set(i).len() {
            if alt_idx == a.choice(i) {
                continue;
            }
            let alt = &game.action_set(i)[alt_idx];
            let mut dev = 0.0;
            for &e in alt.resources() {
                let k = if own.contains(e) {
                    loads.load(e)
                } else {
                    loads.load(e) + 1
                };
                dev += game.composite_at(tolls, e, k);
            }
            if dev < current - NASH_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exhaustively enumerates the Nash set. Uses the generic route when the
/// joint-action space fits under `cap`, the symmetric reduction otherwise.
pub fn enumerate_nash(game: &Game, tolls: &DeployedTolls, cap: usize) -> Result<NashSet> {
    if game.joint_action_count() <= cap as f64 {
        return enumerate_nash_generic(game, tolls);
    }
    if game.symmetric_action_set().is_some() {
        return enumerate_nash_symmetric(game, tolls);
    }
    Err(Error::InstanceTooLarge {
        joint_actions: game.joint_action_count(),
        cap,
    })
}

/// Brute force over all joint actions, in lexicographic order.
pub fn enumerate_nash_generic(game: &Game, tolls: &DeployedTolls) -> Result<NashSet> {
    let mut out = Vec::new();
    let mut choices = vec![0usize; game.n_agents()];
    loop {
        let a = Allocation::new(choices.clone());
        if is_nash(game, tolls, &a)? {
            out.push(a);
        }
        if !advance(&mut choices, game) {
            break;
        }
    }
    Ok(NashSet::Generic(out))
}

fn advance(choices: &mut [usize], game: &Game) -> bool {
    for i in (0..choices.len()).rev() {
        choices[i] += 1;
        if choices[i] < game.action_set(i).len() {
            return true;
        }
        choices[i] = 0;
    }
    false
}

/// Anonymous-profile enumeration for symmetric games.
pub fn enumerate_nash_symmetric(game: &Game, tolls: &DeployedTolls) -> Result<NashSet> {
    let actions = game
        .symmetric_action_set()
        .ok_or(Error::InstanceTooLarge {
            joint_actions: game.joint_action_count(),
            cap: 0,
        })?
        .to_vec();
    let mut out = Vec::new();
    for counts in profiles(game.n_agents(), actions.len()) {
        if profile_is_nash(game, tolls, &counts)? {
            out.push(Profile { counts });
        }
    }
    out.sort();
    Ok(NashSet::Symmetric(out))
}

/// All count vectors over `q` actions summing to `n`, lexicographic.
pub fn profiles(n: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; q];
    fill(n, 0, &mut cur, &mut out);
    out
}

fn fill(remaining: usize, idx: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if idx == cur.len() - 1 {
        cur[idx] = remaining;
        out.push(cur.clone());
        return;
    }
    for c in 0..=remaining {
        cur[idx] = c;
        fill(remaining - c, idx + 1, cur, out);
    }
}

/// Per-resource loads induced by a profile.
pub fn profile_loads(game: &Game, counts: &[usize]) -> LoadProfile {
    let actions = game.symmetric_action_set().expect("symmetric game");
    let mut loads = vec![0usize; game.num_resources()];
    for (action, &c) in counts.iter().enumerate() {
        if c > 0 {
            for &e in actions[action].resources() {
                loads[e] += c;
            }
        }
    }
    LoadProfile::from_counts(loads)
}

/// Equilibrium check on a profile: one representative deviation per occupied
/// action suffices because agent costs depend only on loads.
pub fn profile_is_nash(game: &Game, tolls: &DeployedTolls, counts: &[usize]) -> Result<bool> {
    let actions = game
        .symmetric_action_set()
        .ok_or(Error::InstanceTooLarge {
            joint_actions: game.joint_action_count(),
            cap: 0,
        })?;
    let loads = profile_loads(game, counts);
    for (from, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let own = &actions[from];
        let current: f64 = own
            .resources()
            .iter()
            .map(|&e| game.composite_at(tolls, e, loads.load(e)))
            .sum();
        for (to, alt) in actions.iter().enumerate() {
            if to == from {
                continue;
            }
            let mut dev = 0.0;
            for &e in alt.resources() {
                let k = if own.contains(e) {
                    loads.load(e)
                } else {
                    loads.load(e) + 1
                };
                dev += game.composite_at(tolls, e, k);
            }
            if dev < current - NASH_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Best-response dynamics
// ---------------------------------------------------------------------------

/// Round-robin best-response walk from `start`: agents are scanned in index
/// order and the first strictly improving bundle is taken. Each accepted move
/// lowers the Rosenthal potential by the same strictly positive amount, so
/// the walk reaches a Nash equilibrium in finitely many steps.
pub fn best_response_dynamics(
    game: &Game,
    tolls: &DeployedTolls,
    start: &Allocation,
) -> Result<Allocation> {
    game.validate_allocation(start)?;
    let mut current = start.clone();
    loop {
        let mut improved = false;
        'agents: for i in 0..game.n_agents() {
            let loads = game.loads_unchecked(&current);
            let cost = game.agent_cost_unchecked(tolls, &current, i, &loads);
            let own = game.bundle(&current, i);
            for alt_idx in 0..game.action_set(i).len() {
                if alt_idx == current.choice(i) {
                    continue;
                }
                let alt = &game.action_set(i)[alt_idx];
                let mut dev = 0.0;
                for &e in alt.resources() {
                    let k = if own.contains(e) {
                        loads.load(e)
                    } else {
                        loads.load(e) + 1
                    };
                    dev += game.composite_at(tolls, e, k);
                }
                if dev < cost - NASH_TOL {
                    current = current.with_choice(i, alt_idx);
                    improved = true;
                    break 'agents;
                }
            }
        }
        if !improved {
            return Ok(current);
        }
    }
}

// ---------------------------------------------------------------------------
// Optimal cost and PoA
// ---------------------------------------------------------------------------

/// Exact minimum of the system cost over all joint actions (tolls excluded).
pub fn optimal_cost(game: &Game, cap: usize) -> Result<(f64, Allocation)> {
    if game.joint_action_count() <= cap as f64 {
        let mut best: Option<(f64, Allocation)> = None;
        let mut choices = vec![0usize; game.n_agents()];
        loop {
            let a = Allocation::new(choices.clone());
            let cost = game.system_cost_loads(&game.loads_unchecked(&a));
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, a));
            }
            if !advance(&mut choices, game) {
                break;
            }
        }
        return Ok(best.expect("nonempty action sets"));
    }
    if game.symmetric_action_set().is_some() {
        let q = game.symmetric_action_set().unwrap().len();
        let mut best: Option<(f64, Profile)> = None;
        for counts in profiles(game.n_agents(), q) {
            let cost = game.system_cost_loads(&profile_loads(game, &counts));
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, Profile { counts }));
            }
        }
        let (cost, profile) = best.expect("nonempty profile space");
        return Ok((cost, profile.representative()));
    }
    Err(Error::InstanceTooLarge {
        joint_actions: game.joint_action_count(),
        cap,
    })
}

/// Price of anarchy: worst Nash system cost (equilibria computed under the
/// deployed tolls) against the toll-free optimum.
pub fn poa(game: &Game, tolls: &DeployedTolls, cap: usize) -> Result<PoaReport> {
    let nash = enumerate_nash(game, tolls, cap)?;
    let (opt_cost, optimal_allocation) = optimal_cost(game, cap)?;
    let mut worst: Option<(f64, Allocation)> = None;
    match &nash {
        NashSet::Generic(members) => {
            for a in members {
                let cost = game.system_cost_loads(&game.loads_unchecked(a));
                if worst.as_ref().is_none_or(|(w, _)| cost > *w) {
                    worst = Some((cost, a.clone()));
                }
            }
        }
        NashSet::Symmetric(members) => {
            for p in members {
                let cost = game.system_cost_loads(&profile_loads(game, &p.counts));
                if worst.as_ref().is_none_or(|(w, _)| cost > *w) {
                    worst = Some((cost, p.representative()));
                }
            }
        }
    }
    let (worst_ne_cost, worst_equilibrium) =
        worst.expect("Rosenthal guarantees a nonempty Nash set");
    // Degenerate all-zero-cost games: every allocation is optimal.
    let poa = if opt_cost == 0.0 {
        if worst_ne_cost <= NASH_TOL {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        worst_ne_cost / opt_cost
    };
    debug_assert!(poa >= 1.0 - 1e-9, "PoA below 1: {poa}");
    Ok(PoaReport {
        worst_ne_cost,
        opt_cost,
        poa,
        worst_equilibrium,
        optimal_allocation,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
