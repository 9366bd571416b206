//! Small reference games used across tests and documentation.
//!
//! Game X: two agents, resources `{e1, e2}`, both agents choose one resource,
//! single basis `b(k) = k`, unit coefficients. Its Nash equilibria are the two
//! split allocations.
//!
//! Game Y: same structure with bases `{1, k}`; `e1` costs a flat 1 and `e2`
//! costs `0.5 k`. Without tolls the all-`e2` profile is a (tied) equilibrium;
//! marginal-cost tolls destroy it.

use crate::game::{BasisSet, Bundle, CoefficientMatrix, DeployedTolls, Game};
use crate::tolls;

/// Two agents, two resources, `l(k) = k` on both.
pub fn game_x() -> Game {
    let basis = BasisSet::new(vec![vec![1.0, 2.0]]).unwrap();
    let gamma = CoefficientMatrix::new(vec![vec![1.0], vec![1.0]]).unwrap();
    let actions = vec![Bundle::new(vec![0]), Bundle::new(vec![1])];
    Game::new(2, 2, vec![actions.clone(), actions], gamma, basis).unwrap()
}

/// Two agents, `l_e1 = 1` flat, `l_e2(k) = 0.5 k`.
pub fn game_y() -> Game {
    let basis = BasisSet::new(vec![vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
    let gamma = CoefficientMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 0.5]]).unwrap();
    let actions = vec![Bundle::new(vec![0]), Bundle::new(vec![1])];
    Game::new(2, 2, vec![actions.clone(), actions], gamma, basis).unwrap()
}

/// Marginal-cost tolls for game Y deployed with the true coefficients.
pub fn game_y_marginal_cost_tolls() -> DeployedTolls {
    let g = game_y();
    let bases = g
        .basis()
        .tables_iter()
        .map(tolls::marginal_cost_toll)
        .collect();
    DeployedTolls::new(bases, g.gamma().clone()).unwrap()
}
