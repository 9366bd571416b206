//! Property tests over randomly generated small games and toll tables.

use congame::equilibrium::{self, DEFAULT_ENUM_CAP};
use congame::game::{Allocation, BasisSet, Bundle, CoefficientMatrix, DeployedTolls, Game};
use congame::gamefile;
use congame::tolls;
use proptest::prelude::*;

/// Random game: up to 3 agents on up to 4 resources with an affine basis.
fn small_game() -> impl Strategy<Value = Game> {
    (1usize..=3, 1usize..=4)
        .prop_flat_map(|(n, resources)| {
            // gamma rows: one per resource, two columns (affine basis).
            let gamma = prop::collection::vec(
                prop::collection::vec(0.0f64..2.0, 2),
                resources,
            );
            let bundle = prop::collection::btree_set(0..resources, 1..=2.min(resources))
                .prop_map(|s| Bundle::new(s.into_iter().collect()));
            let action_set = prop::collection::vec(bundle, 1..=3);
            let action_sets = prop::collection::vec(action_set, n);
            (Just(n), Just(resources), gamma, action_sets)
        })
        .prop_map(|(n, resources, gamma, action_sets)| {
            Game::new(
                n,
                resources,
                action_sets,
                CoefficientMatrix::new(gamma).unwrap(),
                BasisSet::affine(n),
            )
            .unwrap()
        })
}

/// Non-decreasing non-negative table of length 2..=6.
fn cost_table() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..3.0, 2..=6).prop_map(|steps| {
        let mut acc = 0.0;
        steps
            .iter()
            .map(|s| {
                acc += s;
                acc
            })
            .collect()
    })
}

fn all_allocations(game: &Game) -> Vec<Allocation> {
    let mut out = Vec::new();
    let mut choices = vec![0usize; game.n_agents()];
    loop {
        out.push(Allocation::new(choices.clone()));
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
            return out;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Unilateral deviations change the potential by exactly the deviator's
    /// cost change.
    #[test]
    fn potential_is_exact(game in small_game()) {
        let tolls = DeployedTolls::zero(&game);
        for a in all_allocations(&game) {
            let phi = game.rosenthal_potential(&tolls, &a).unwrap();
            for i in 0..game.n_agents() {
                let cost = game.agent_cost(&tolls, &a, i).unwrap();
                for alt in 0..game.action_set(i).len() {
                    let b = a.with_choice(i, alt);
                    let phi_b = game.rosenthal_potential(&tolls, &b).unwrap();
                    let cost_b = game.agent_cost(&tolls, &b, i).unwrap();
                    prop_assert!(((phi_b - phi) - (cost_b - cost)).abs() <= 1e-12);
                }
            }
        }
    }

    /// Load counts sum to the total bundle size; system cost equals the sum
    /// of untolled agent costs.
    #[test]
    fn load_and_cost_accounting(game in small_game()) {
        let tolls = DeployedTolls::zero(&game);
        for a in all_allocations(&game) {
            let loads = game.load_profile(&a).unwrap();
            let expected: usize = (0..game.n_agents())
                .map(|i| game.bundle(&a, i).len())
                .sum();
            prop_assert_eq!(loads.total(), expected);

            let total: f64 = (0..game.n_agents())
                .map(|i| game.agent_cost(&tolls, &a, i).unwrap())
                .sum();
            let sys = game.system_cost(&a).unwrap();
            prop_assert!((total - sys).abs() <= 1e-9 * (1.0 + sys.abs()));
        }
    }

    /// Best-response dynamics terminate at a Nash equilibrium from any start.
    #[test]
    fn dynamics_end_at_equilibrium(game in small_game()) {
        let tolls = DeployedTolls::zero(&game);
        let start = Allocation::new(vec![0; game.n_agents()]);
        let end = equilibrium::best_response_dynamics(&game, &tolls, &start).unwrap();
        prop_assert!(equilibrium::is_nash(&game, &tolls, &end).unwrap());
    }

    /// Every enumerated equilibrium re-verifies against the definition.
    #[test]
    fn enumerated_equilibria_reverify(game in small_game()) {
        let tolls = DeployedTolls::zero(&game);
        let nash = equilibrium::enumerate_nash(&game, &tolls, DEFAULT_ENUM_CAP).unwrap();
        for a in nash.representative_allocations() {
            prop_assert!(equilibrium::is_nash(&game, &tolls, &a).unwrap());
        }
        prop_assert!(!nash.is_empty(), "Rosenthal guarantees existence");
    }

    /// The marginal-cost rule commutes with non-negative linear combinations.
    #[test]
    fn marginal_cost_is_linear(
        a in cost_table(),
        b in cost_table(),
        alpha in 0.0f64..3.0,
        beta in 0.0f64..3.0,
    ) {
        let n = a.len().min(b.len());
        let combined: Vec<f64> = (0..n).map(|k| alpha * a[k] + beta * b[k]).collect();
        let lhs = tolls::marginal_cost_toll(&combined);
        let ta = tolls::marginal_cost_toll(&a[..n]);
        let tb = tolls::marginal_cost_toll(&b[..n]);
        for k in 0..n {
            let rhs = alpha * ta[k] + beta * tb[k];
            prop_assert!((lhs[k] - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }

    /// Lambda scaling at 1 is the identity; at 0 it refunds the full cost.
    #[test]
    fn lambda_family_algebra(base in cost_table()) {
        let cost: Vec<f64> = (1..=base.len()).map(|k| k as f64).collect();
        let same = tolls::lambda_scale(&base, &cost, 1.0);
        for (x, y) in same.iter().zip(&base) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        let refund = tolls::lambda_scale(&base, &cost, 0.0);
        for (x, c) in refund.iter().zip(&cost) {
            prop_assert!((x + c).abs() <= 1e-12);
        }
    }

    /// Serialization round-trips every generated game exactly.
    #[test]
    fn gamefile_round_trip(game in small_game()) {
        let text = gamefile::save_game(&game);
        let back = gamefile::parse_game(&text).unwrap();
        prop_assert_eq!(back, game);
    }
}
