//! Cross-checks the simplex solver against an exhaustive vertex-enumeration
//! oracle on randomly generated feasible, bounded LPs with rational data.
//!
//! The oracle shares no code with the solver: it builds its own standard form
//! and enumerates every basic solution by Gaussian elimination, so agreement
//! validates the whole pivoting path.

use simplex::{LpProblem, LpStatus};

// A splitmix64 generator keeps the instances reproducible without deps.
struct Rng(u64);

impl Rng {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    /// Rational coefficient in {-3, -2.5, ..., 3}.
    fn coeff(&mut self) -> f64 {
        (self.below(13) as f64 - 6.0) / 2.0
    }
}

struct Instance {
    problem: LpProblem,
    c: Vec<f64>,
    eq: Vec<(Vec<f64>, f64)>,
    ub: Vec<(Vec<f64>, f64)>,
}

/// Feasible by construction: rhs values are derived from a known point x0.
/// Bounded by construction: a box row caps the coordinate sum.
fn random_instance(rng: &mut Rng) -> Instance {
    loop {
        let n_vars = 2 + rng.below(11) as usize; // 2..=12
        let max_rows = 12usize;
        let n_eq = rng.below(3).min(n_vars as u64 - 1) as usize;
        let n_ub = 1 + rng.below((max_rows - n_eq) as u64) as usize;
        // Keep the oracle's basis enumeration tractable.
        let rows = n_eq + n_ub;
        let cols = n_vars + n_ub;
        if binomial(cols, rows) > 120_000 {
            continue;
        }

        let x0: Vec<f64> = (0..n_vars).map(|_| rng.below(5) as f64 / 2.0).collect();
        let c: Vec<f64> = (0..n_vars).map(|_| rng.coeff()).collect();

        let mut eq = Vec::new();
        for _ in 0..n_eq {
            let row: Vec<f64> = (0..n_vars).map(|_| rng.coeff()).collect();
            let rhs: f64 = row.iter().zip(&x0).map(|(a, b)| a * b).sum();
            eq.push((row, rhs));
        }
        let mut ub = Vec::new();
        for _ in 0..n_ub - 1 {
            let row: Vec<f64> = (0..n_vars).map(|_| rng.coeff()).collect();
            let slack = rng.below(3) as f64 / 2.0;
            let rhs: f64 = row.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>() + slack;
            ub.push((row, rhs));
        }
        let total: f64 = x0.iter().sum();
        ub.push((vec![1.0; n_vars], total + 5.0));

        let mut p = LpProblem::minimize(&c);
        for (row, rhs) in &eq {
            p = p.eq_row(row, *rhs);
        }
        for (row, rhs) in &ub {
            p = p.ub_row(row, *rhs);
        }
        return Instance {
            problem: p,
            c,
            eq,
            ub,
        };
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
        if acc > 10_000_000 {
            return acc;
        }
    }
    acc
}

/// Minimum objective over all feasible basic solutions of the standard form.
fn vertex_enumeration_min(inst: &Instance) -> f64 {
    let n_vars = inst.c.len();
    let m = inst.eq.len() + inst.ub.len();
    let cols = n_vars + inst.ub.len();
    // Dense row-major standard form [A | slacks].
    let mut a = vec![vec![0.0; cols]; m];
    let mut b = vec![0.0; m];
    let mut cost = vec![0.0; cols];
    cost[..n_vars].copy_from_slice(&inst.c);
    for (i, (row, rhs)) in inst.eq.iter().enumerate() {
        a[i][..n_vars].copy_from_slice(row);
        b[i] = *rhs;
    }
    for (k, (row, rhs)) in inst.ub.iter().enumerate() {
        let i = inst.eq.len() + k;
        a[i][..n_vars].copy_from_slice(row);
        a[i][n_vars + k] = 1.0;
        b[i] = *rhs;
    }

    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..m).collect();
    loop {
        if let Some(xb) = solve_square(&a, &b, &subset) {
            if xb.iter().all(|&v| v >= -1e-9) {
                let val: f64 = subset.iter().zip(&xb).map(|(&j, &v)| cost[j] * v).sum();
                if val < best {
                    best = val;
                }
            }
        }
        // Next lexicographic m-subset of 0..cols.
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] != i + cols - m {
                subset[i] += 1;
                for k in i + 1..m {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Gaussian elimination on the basis columns; returns None when singular.
fn solve_square(a: &[Vec<f64>], b: &[f64], basis: &[usize]) -> Option<Vec<f64>> {
    let m = b.len();
    let mut mat = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for (k, &j) in basis.iter().enumerate() {
            mat[i][k] = a[i][j];
        }
        mat[i][m] = b[i];
    }
    for k in 0..m {
        let mut piv = k;
        for i in k + 1..m {
            if mat[i][k].abs() > mat[piv][k].abs() {
                piv = i;
            }
        }
        if mat[piv][k].abs() < 1e-10 {
            return None;
        }
        mat.swap(k, piv);
        for i in 0..m {
            if i != k {
                let f = mat[i][k] / mat[k][k];
                if f != 0.0 {
                    for col in k..=m {
                        let v = mat[k][col];
                        mat[i][col] -= f * v;
                    }
                }
            }
        }
    }
    Some((0..m).map(|i| mat[i][m] / mat[i][i]).collect())
}

#[test]
fn matches_vertex_enumeration_on_100_random_lps() {
    let mut rng = Rng(0x5eed_1234_abcd_0001);
    for trial in 0..100 {
        let inst = random_instance(&mut rng);
        let sol = inst.problem.solve().unwrap_or_else(|e| {
            panic!("trial {trial}: solver error {e}\n{}", inst.problem.dump())
        });
        assert_eq!(
            sol.status,
            LpStatus::Optimal,
            "trial {trial}: feasible bounded LP must be optimal\n{}",
            inst.problem.dump()
        );
        let oracle = vertex_enumeration_min(&inst);
        let tol = 1e-6 * (1.0 + oracle.abs());
        assert!(
            (sol.value - oracle).abs() <= tol,
            "trial {trial}: solver {} vs oracle {}\n{}",
            sol.value,
            oracle,
            inst.problem.dump()
        );

        // Primal feasibility at the reported point.
        for (row, rhs) in &inst.eq {
            let lhs: f64 = row.iter().zip(&sol.x).map(|(a, b)| a * b).sum();
            assert!(
                (lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()),
                "trial {trial}: eq residual"
            );
        }
        for (row, rhs) in &inst.ub {
            let lhs: f64 = row.iter().zip(&sol.x).map(|(a, b)| a * b).sum();
            assert!(
                lhs <= rhs + 1e-8 * (1.0 + rhs.abs()),
                "trial {trial}: ub residual"
            );
        }

        // Strong duality.
        let dual: f64 = inst
            .eq
            .iter()
            .zip(&sol.duals_eq)
            .map(|((_, rhs), y)| rhs * y)
            .sum::<f64>()
            + inst
                .ub
                .iter()
                .zip(&sol.duals_ub)
                .map(|((_, rhs), y)| rhs * y)
                .sum::<f64>();
        assert!(
            (dual - sol.value).abs() <= 1e-7 * (1.0 + sol.value.abs()),
            "trial {trial}: duality gap {} vs {}",
            dual,
            sol.value
        );

        // Deterministic re-solve.
        let again = inst.problem.solve().unwrap();
        assert_eq!(sol, again, "trial {trial}: non-deterministic solve");
    }
}
