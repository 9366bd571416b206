//! Command-line driver for the congestion-game toolkit.

use congame::equilibrium::{self, NashSet, DEFAULT_ENUM_CAP};
use congame::error::Result;
use congame::experiments::{self, PerturbationProtocol};
use congame::game::{BasisSet, DeployedTolls, Game};
use congame::gamefile;
use congame::robust;
use congame::tolls::{self, TollKind, TollMechanismSpec};
use std::collections::BTreeMap;
use std::path::Path;
use std::process::ExitCode;

const USAGE: &str = "\
congame — atomic congestion games, toll design, and robustness analysis

USAGE:
  congame <command> [--flag value ...]

COMMANDS:
  nash          enumerate pure Nash equilibria of a game under a mechanism
  poa           price of anarchy of a game under a mechanism
  design-tolls  toll tables and guaranteed PoA for a basis
  certify-eps   certified misspecification radii for a game and mechanism
  robust-poa    worst-case PoA over a game class at given noise levels
  worst-case    construct and verify the tight worst-case game
  perturb       Monte-Carlo perturbation study (writes mc_summary.csv)
  sweep-lambda  robustness of the lambda toll family (writes fig3.csv)

COMMON FLAGS:
  --game X        path to a game file, or a bundled name
                  (sioux_falls_simplified | sioux | game_x | game_y)
  --mechanism M   zero | marginal_cost | optimal_local | optimal_constant,
                  or a comma list for robust-poa
  --basis B       affine | quartic | constant | linear   (default affine)
  --n N           agent count for class-level commands    (default 8)
  --delta D       single noise level                      (default 0)
  --delta-grid    comma list of noise levels
  --lambda L      lambda rescaling of the mechanism       (default 1)
  --lambda-grid   comma list of lambdas (sweep-lambda)
  --trials T      Monte-Carlo trials per noise level      (default 200)
  --seed S        64-bit experiment seed                  (default 0)
  --cap C         enumeration cap on joint actions        (default 1000000)
  --allow-negative   permit subsidies in designed tolls
  --out PATH      write CSV/TOML output here
  --fig2 PATH     (robust-poa) also write the mechanism,delta,poa table
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("{msg}");
            eprintln!("{USAGE}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

enum CliError {
    Usage(String),
    Runtime(congame::Error),
}

impl From<congame::Error> for CliError {
    fn from(e: congame::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn run(args: &[String]) -> std::result::Result<(), CliError> {
    let Some(command) = args.first() else {
        return Err(CliError::Usage("missing command".into()));
    };
    let flags = Flags::parse(&args[1..])?;
    match command.as_str() {
        "nash" => cmd_nash(flags),
        "poa" => cmd_poa(flags),
        "design-tolls" => cmd_design_tolls(flags),
        "certify-eps" => cmd_certify(flags),
        "robust-poa" => cmd_robust_poa(flags),
        "worst-case" => cmd_worst_case(flags),
        "perturb" => cmd_perturb(flags),
        "sweep-lambda" => cmd_sweep_lambda(flags),
        other => Err(CliError::Usage(format!("unknown command {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// Flag parsing
// ---------------------------------------------------------------------------

struct Flags {
    values: BTreeMap<String, String>,
}

const KNOWN_FLAGS: &[&str] = &[
    "game",
    "mechanism",
    "basis",
    "n",
    "delta",
    "delta-grid",
    "lambda",
    "lambda-grid",
    "trials",
    "seed",
    "cap",
    "allow-negative",
    "out",
    "fig2",
];

impl Flags {
    fn parse(args: &[String]) -> std::result::Result<Self, CliError> {
        let mut values = BTreeMap::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let Some(name) = arg.strip_prefix("--") else {
                return Err(CliError::Usage(format!("unexpected argument {arg:?}")));
            };
            if !KNOWN_FLAGS.contains(&name) {
                return Err(CliError::Usage(format!("unknown flag --{name}")));
            }
            if name == "allow-negative" {
                values.insert(name.to_string(), "true".to_string());
                i += 1;
                continue;
            }
            let Some(value) = args.get(i + 1) else {
                return Err(CliError::Usage(format!("flag --{name} needs a value")));
            };
            values.insert(name.to_string(), value.clone());
            i += 2;
        }
        Ok(Flags { values })
    }

    fn str(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(|s| s.as_str())
    }

    fn f64(&self, name: &str, default: f64) -> std::result::Result<f64, CliError> {
        match self.values.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("--{name}: bad number {v:?}"))),
        }
    }

    fn usize(&self, name: &str, default: usize) -> std::result::Result<usize, CliError> {
        match self.values.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("--{name}: bad integer {v:?}"))),
        }
    }

    fn u64(&self, name: &str, default: u64) -> std::result::Result<u64, CliError> {
        match self.values.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Usage(format!("--{name}: bad integer {v:?}"))),
        }
    }

    fn grid(&self, name: &str, default: Vec<f64>) -> std::result::Result<Vec<f64>, CliError> {
        match self.values.get(name) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| CliError::Usage(format!("--{name}: bad number {s:?}")))
                })
                .collect(),
        }
    }

    fn mechanism(&self) -> std::result::Result<TollMechanismSpec, CliError> {
        let kind = match self.str("mechanism") {
            None => TollKind::Zero,
            Some(name) => TollKind::parse(name)
                .ok_or_else(|| CliError::Usage(format!("unknown mechanism {name:?}")))?,
        };
        let lambda = self.f64("lambda", 1.0)?;
        let allow = self.str("allow-negative").is_some();
        Ok(TollMechanismSpec::new(kind)
            .with_lambda(lambda)
            .with_allow_negative(allow))
    }

    fn basis(&self, n: usize) -> std::result::Result<BasisSet, CliError> {
        match self.str("basis").unwrap_or("affine") {
            "affine" => Ok(BasisSet::affine(n)),
            "quartic" => Ok(BasisSet::quartic(n)),
            "constant" | "const" => Ok(BasisSet::constant(n)),
            "linear" => Ok(BasisSet::monomial(n, 1)),
            other => Err(CliError::Usage(format!("unknown basis {other:?}"))),
        }
    }

    fn game(&self) -> std::result::Result<Game, CliError> {
        let name = self
            .str("game")
            .ok_or_else(|| CliError::Usage("--game is required".into()))?;
        Ok(gamefile::load_game(name)?)
    }

    /// Resolved-config record; every run starts with one of these lines so
    /// the exact invocation can be reproduced.
    fn log_config(&self, command: &str) {
        let mut line = format!("config: command={command}");
        for (k, v) in &self.values {
            line.push_str(&format!(" {k}={v}"));
        }
        println!("{line}");
    }
}

fn deployed(game: &Game, spec: &TollMechanismSpec) -> Result<DeployedTolls> {
    tolls::build_deployed_tolls(game, spec, game.gamma().clone())
}

fn write_out(flags: &Flags, contents: &str) -> Result<()> {
    if let Some(path) = flags.str("out") {
        experiments::write_file(Path::new(path), contents)?;
        println!("wrote {path}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_nash(flags: Flags) -> std::result::Result<(), CliError> {
    flags.log_config("nash");
    let game = flags.game()?;
    let spec = flags.mechanism()?;
    let cap = flags.usize("cap", DEFAULT_ENUM_CAP)?;
    let tolls = deployed(&game, &spec)?;
    let nash = equilibrium::enumerate_nash(&game, &tolls, cap)?;
    let mut lines = String::new();
    match &nash {
        NashSet::Generic(members) => {
            println!("{} pure Nash equilibria (allocations)", members.len());
            for a in members {
                let row = a
                    .choices()
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                println!("  [{row}]");
                lines.push_str(&row);
                lines.push('\n');
            }
        }
        NashSet::Symmetric(members) => {
            println!(
                "{} pure Nash equilibria (anonymous profiles over {} actions)",
                members.len(),
                game.symmetric_action_set().map_or(0, |s| s.len())
            );
            for p in members {
                let row = p
                    .counts
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                println!("  ({row})  x{}", p.multiplicity());
                lines.push_str(&row);
                lines.push('\n');
            }
        }
    }
    write_out(&flags, &lines)?;
    Ok(())
}

fn cmd_poa(flags: Flags) -> std::result::Result<(), CliError> {
    flags.log_config("poa");
    let game = flags.game()?;
    let spec = flags.mechanism()?;
    let cap = flags.usize("cap", DEFAULT_ENUM_CAP)?;
    let tolls = deployed(&game, &spec)?;
    let report = equilibrium::poa(&game, &tolls, cap)?;
    println!(
        "worst_ne_cost={} opt_cost={} poa={}",
        report.worst_ne_cost, report.opt_cost, report.poa
    );
    Ok(())
}

fn cmd_design_tolls(flags: Flags) -> std::result::Result<(), CliError> {
    flags.log_config("design-tolls");
    let n = flags.usize("n", 8)?;
    let basis = flags.basis(n)?;
    let spec = flags.mechanism()?;
    let tables = tolls::toll_tables(&spec, &basis)?;
    let mut csv = String::from("basis_fn,load,toll\n");
    for (j, table) in tables.iter().enumerate() {
        let shown: Vec<String> = table.iter().map(|v| format!("{v:.6}")).collect();
        println!("tau*[{j}] = [{}]", shown.join(", "));
        for (k, v) in table.iter().enumerate() {
            csv.push_str(&format!("{j},{},{v}\n", k + 1));
        }
    }
    if matches!(spec.kind, TollKind::OptimalLocal | TollKind::OptimalConstant) {
        for j in 0..basis.len() {
            let b = basis.table(j);
            let (_, poa) = match (spec.kind, spec.allow_negative) {
                (TollKind::OptimalLocal, false) => tolls::optimal_local_toll(b, n)?,
                (TollKind::OptimalLocal, true) => tolls::optimal_local_toll_signed(b, n)?,
                (TollKind::OptimalConstant, false) => tolls::optimal_constant_toll(b, n)?,
                (TollKind::OptimalConstant, true) => tolls::optimal_constant_toll_signed(b, n)?,
                _ => unreachable!(),
            };
            println!("basis_fn {j}: guaranteed worst-case poa {poa}");
        }
    }
    write_out(&flags, &csv)?;
    Ok(())
}

fn cmd_certify(flags: Flags) -> std::result::Result<(), CliError> {
    flags.log_config("certify-eps");
    let game = flags.game()?;
    let spec = flags.mechanism()?;
    let cap = flags.usize("cap", DEFAULT_ENUM_CAP)?;
    let cert = tolls::certify_epsilon(&game, &spec, cap)?;
    println!("epsilon={} delta={}", cert.epsilon, cert.delta);
    if let Some(w) = &cert.witness {
        println!(
            "witness: allocation {:?}, agent {} deviating to action {}, slack {}",
            w.allocation.choices(),
            w.agent,
            w.deviate_to,
            w.slack
        );
    } else {
        println!("witness: none (mechanism is coefficient-independent on this game)");
    }
    Ok(())
}

fn cmd_robust_poa(flags: Flags) -> std::result::Result<(), CliError> {
    flags.log_config("robust-poa");
    let n = flags.usize("n", 8)?;
    let basis = flags.basis(n)?;
    let delta = flags.f64("delta", 0.0)?;
    let grid = flags.grid("delta-grid", vec![delta])?;
    let lambda = flags.f64("lambda", 1.0)?;
    let allow = flags.str("allow-negative").is_some();
    let kinds: Vec<TollKind> = match flags.str("mechanism") {
        None => vec![TollKind::Zero],
        Some(list) => list
            .split(',')
            .map(|name| {
                TollKind::parse(name.trim())
                    .ok_or_else(|| CliError::Usage(format!("unknown mechanism {name:?}")))
            })
            .collect::<std::result::Result<_, _>>()?,
    };
    let mut csv = String::from("mechanism,n,delta,p_star,poa\n");
    let mut fig2_rows = Vec::new();
    for kind in kinds {
        let spec = TollMechanismSpec::new(kind)
            .with_lambda(lambda)
            .with_allow_negative(allow);
        let tables = tolls::toll_tables(&spec, &basis)?;
        for &d in &grid {
            let sol = robust::solve_robust_poa(&basis, &tables, n, d)?;
            println!(
                "mechanism={} n={n} delta={d} p_star={} poa={}",
                kind.name(),
                sol.p_star,
                sol.poa
            );
            csv.push_str(&format!(
                "{},{n},{d},{},{}\n",
                kind.name(),
                sol.p_star,
                sol.poa
            ));
            fig2_rows.push(experiments::MechanismSweepRow {
                mechanism: kind.name(),
                delta: d,
                poa: sol.poa,
            });
        }
    }
    write_out(&flags, &csv)?;
    if let Some(path) = flags.str("fig2") {
        experiments::write_file(Path::new(path), &experiments::fig2_csv(&fig2_rows))?;
        println!("wrote {path}");
    }
    Ok(())
}

fn cmd_worst_case(flags: Flags) -> std::result::Result<(), CliError> {
    flags.log_config("worst-case");
    let n = flags.usize("n", 2)?;
    let basis = flags.basis(n)?;
    let delta = flags.f64("delta", 0.0)?;
    let cap = flags.usize("cap", DEFAULT_ENUM_CAP)?;
    let spec = flags.mechanism()?;
    let tables = tolls::toll_tables(&spec, &basis)?;
    let instance = robust::build_lp(&basis, &tables, n, delta);
    let sol = instance.solve_reduced()?;
    println!("p_star={} poa={}", sol.p_star, sol.poa);
    let wcg = robust::construct_worst_case_game(
        &instance,
        &sol.theta,
        &sol.theta_hat,
        &basis,
        &tables,
        robust::PRUNE_TOL,
    )?;
    println!(
        "constructed game: {} agents, {} resources, {} retained labels",
        wcg.game.n_agents(),
        wcg.game.num_resources(),
        wcg.provenance.len()
    );
    let report = robust::verify_worst_case(&wcg, 1e-6)?;
    println!(
        "verify: nash_ok={} ne_cost={} (ok={}) opt/ne={} vs p*={} (ok={})",
        report.nash_ok,
        report.ne_cost,
        report.ne_cost_ok,
        report.ratio,
        report.expected_p_star,
        report.ratio_ok
    );
    if wcg.game.joint_action_count() <= cap as f64 {
        let brute = equilibrium::poa(&wcg.game, &wcg.tolls, cap)?;
        println!("brute_force_poa={}", brute.poa);
    }
    if let Some(path) = flags.str("out") {
        experiments::write_file(Path::new(path), &gamefile::save_game(&wcg.game))?;
        println!("wrote {path}");
    }
    Ok(())
}

fn cmd_perturb(flags: Flags) -> std::result::Result<(), CliError> {
    flags.log_config("perturb");
    let game = flags.game()?;
    let spec = flags.mechanism()?;
    let cap = flags.usize("cap", DEFAULT_ENUM_CAP)?;
    let protocol = PerturbationProtocol {
        delta_grid: flags.grid("delta-grid", PerturbationProtocol::default().delta_grid)?,
        trials: flags.usize("trials", 200)?,
        seed: flags.u64("seed", 0)?,
    };
    let rows = experiments::run_monte_carlo(&game, &spec, &protocol, cap)?;
    for r in &rows {
        println!(
            "delta={} max_poa={} avg_poa={} frac_new_ne={}",
            r.delta, r.max_poa, r.avg_poa, r.frac_new_ne
        );
    }
    let csv = experiments::mc_summary_csv(&rows);
    let path = flags.str("out").unwrap_or("mc_summary.csv");
    experiments::write_file(Path::new(path), &csv)?;
    println!("wrote {path}");
    Ok(())
}

fn cmd_sweep_lambda(flags: Flags) -> std::result::Result<(), CliError> {
    flags.log_config("sweep-lambda");
    let n = flags.usize("n", 8)?;
    let basis = flags.basis(n)?;
    let kind = match flags.str("mechanism") {
        None => TollKind::OptimalLocal,
        Some(name) => TollKind::parse(name)
            .ok_or_else(|| CliError::Usage(format!("unknown mechanism {name:?}")))?,
    };
    let base =
        TollMechanismSpec::new(kind).with_allow_negative(flags.str("allow-negative").is_some());
    let lambda_grid = flags.grid("lambda-grid", vec![0.0, 0.25, 0.5, 1.0, 2.0, 4.0])?;
    if !lambda_grid.contains(&1.0) {
        return Err(CliError::Usage(
            "--lambda-grid must include 1 (the base mechanism)".into(),
        ));
    }
    let delta_grid = flags.grid("delta-grid", (0..=10).map(|k| k as f64 * 0.05).collect())?;
    let rows = experiments::sweep_lambda(&base, &lambda_grid, &delta_grid, &basis, n)?;
    for r in &rows {
        println!("lambda={} delta={} poa={}", r.lambda, r.delta, r.poa);
    }
    let csv = experiments::fig3_csv(&rows);
    let path = flags.str("out").unwrap_or("fig3.csv");
    experiments::write_file(Path::new(path), &csv)?;
    println!("wrote {path}");
    Ok(())
}
