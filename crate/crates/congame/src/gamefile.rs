//! Game instances as human-editable TOML documents.
//!
//! A document carries the agent count, named basis tables (explicit values or
//! the generator tags `const` / `poly:d`), per-resource coefficient rows, and
//! either explicit per-agent bundle lists or a routing block (nodes, directed
//! edges mapped 1:1 onto resources, one origin-destination pair, and explicit
//! routes as edge sequences shared by all agents). The full grammar is
//! documented in `docs/format.md`.
//!
//! Validation errors name the offending field.

use crate::error::{Error, Result};
use crate::game::{BasisSet, Bundle, CoefficientMatrix, Game};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA: &str = "congame/v1";

// ---------------------------------------------------------------------------
// Document model
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameDoc {
    pub schema: String,
    pub n_agents: usize,
    pub basis: BasisDoc,
    pub resources: Vec<ResourceDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub agents: Vec<AgentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routing: Option<RoutingDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisDoc {
    /// Table length; defaults to `n_agents`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub functions: Vec<BasisFnDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisFnDoc {
    pub name: String,
    /// Generator tag: `const` or `poly:d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen: Option<String>,
    /// Explicit table over loads `1..=n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResourceDoc {
    pub name: String,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentDoc {
    /// Bundles as lists of resource indices (0-based).
    pub bundles: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoutingDoc {
    /// Node count; nodes are numbered `1..=nodes`.
    pub nodes: usize,
    pub origin: usize,
    pub destination: usize,
    /// `edges[i] = [from, to]` is the directed edge carried by resource `i`.
    pub edges: Vec<[usize; 2]>,
    /// Routes as sequences of edge indices (0-based), origin to destination.
    pub routes: Vec<Vec<usize>>,
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

fn field_err(field: &str, message: impl Into<String>) -> Error {
    Error::GameFile {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Parses and validates a TOML document into a game.
pub fn parse_game(text: &str) -> Result<Game> {
    let doc: GameDoc = toml::from_str(text)
        .map_err(|e| field_err("document", e.to_string()))?;
    build_game(&doc)
}

/// Loads a game from a path, or from a bundled instance when the argument
/// names one (`sioux_falls_simplified` / `sioux`, `game_x`, `game_y`).
pub fn load_game(path_or_name: &str) -> Result<Game> {
    if Path::new(path_or_name).exists() {
        let text = std::fs::read_to_string(path_or_name)?;
        return parse_game(&text);
    }
    match builtin(path_or_name) {
        Some(text) => parse_game(text),
        None => Err(field_err(
            "path",
            format!("no such file or bundled instance: {path_or_name}"),
        )),
    }
}

/// Bundled instance documents.
pub fn builtin(name: &str) -> Option<&'static str> {
    match name {
        "sioux_falls_simplified" | "sioux" => {
            Some(include_str!("../data/sioux_falls_simplified.toml"))
        }
        "game_x" => Some(include_str!("../data/game_x.toml")),
        "game_y" => Some(include_str!("../data/game_y.toml")),
        _ => None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["sioux_falls_simplified", "game_x", "game_y"]
}

fn build_game(doc: &GameDoc) -> Result<Game> {
    if doc.schema != SCHEMA {
        return Err(field_err(
            "schema",
            format!("unrecognized version {:?}, expected {SCHEMA:?}", doc.schema),
        ));
    }
    if doc.n_agents == 0 {
        return Err(field_err("n_agents", "must be at least 1"));
    }
    let n = doc.basis.n.unwrap_or(doc.n_agents);
    if n < doc.n_agents {
        return Err(field_err(
            "basis.n",
            format!("{n} is below n_agents = {}", doc.n_agents),
        ));
    }

    let mut tables = Vec::new();
    for (j, f) in doc.basis.functions.iter().enumerate() {
        let field = format!("basis.functions[{j}]");
        let table = match (&f.gen, &f.values) {
            (Some(_), Some(_)) => {
                return Err(field_err(&field, "give either gen or values, not both"))
            }
            (None, None) => return Err(field_err(&field, "missing gen or values")),
            (Some(tag), None) => expand_generator(&field, tag, n)?,
            (None, Some(values)) => {
                if values.len() != n {
                    return Err(field_err(
                        &format!("{field}.values"),
                        format!("{} entries for basis length {n}", values.len()),
                    ));
                }
                values.clone()
            }
        };
        tables.push(table);
    }
    let basis = BasisSet::new(tables).map_err(|e| field_err("basis", e.to_string()))?;

    for (e, r) in doc.resources.iter().enumerate() {
        if r.gamma.len() != doc.basis.functions.len() {
            return Err(field_err(
                &format!("resources[{e}].gamma"),
                format!(
                    "{} coefficients for {} basis functions",
                    r.gamma.len(),
                    doc.basis.functions.len()
                ),
            ));
        }
    }
    let gamma_rows: Vec<Vec<f64>> = doc.resources.iter().map(|r| r.gamma.clone()).collect();
    let gamma =
        CoefficientMatrix::new(gamma_rows).map_err(|e| field_err("resources", e.to_string()))?;

    let action_sets = match (&doc.routing, doc.agents.is_empty()) {
        (Some(routing), true) => {
            let routes = validate_routing(routing, doc.resources.len())?;
            vec![routes; doc.n_agents]
        }
        (None, false) => {
            if doc.agents.len() != doc.n_agents {
                return Err(field_err(
                    "agents",
                    format!("{} entries for {} agents", doc.agents.len(), doc.n_agents),
                ));
            }
            doc.agents
                .iter()
                .map(|a| a.bundles.iter().map(|b| Bundle::new(b.clone())).collect())
                .collect()
        }
        (Some(_), false) => {
            return Err(field_err(
                "agents",
                "give either agents or a routing block, not both",
            ))
        }
        (None, true) => {
            return Err(field_err(
                "agents",
                "missing: give per-agent bundles or a routing block",
            ))
        }
    };

    Game::new(
        doc.n_agents,
        doc.resources.len(),
        action_sets,
        gamma,
        basis,
    )
    .map_err(|e| field_err("game", e.to_string()))
}

fn expand_generator(field: &str, tag: &str, n: usize) -> Result<Vec<f64>> {
    if tag == "const" {
        return Ok(vec![1.0; n]);
    }
    if let Some(d) = tag.strip_prefix("poly:") {
        let degree: u32 = d
            .parse()
            .map_err(|_| field_err(field, format!("bad polynomial degree {d:?}")))?;
        return Ok((1..=n).map(|k| (k as f64).powi(degree as i32)).collect());
    }
    Err(field_err(
        field,
        format!("unknown generator {tag:?} (expected \"const\" or \"poly:d\")"),
    ))
}

/// Checks edge/route consistency and expands routes to bundles.
fn validate_routing(routing: &RoutingDoc, num_resources: usize) -> Result<Vec<Bundle>> {
    if routing.edges.len() != num_resources {
        return Err(field_err(
            "routing.edges",
            format!(
                "{} edges for {} resources (the mapping is positional)",
                routing.edges.len(),
                num_resources
            ),
        ));
    }
    let node_ok = |v: usize| (1..=routing.nodes).contains(&v);
    if !node_ok(routing.origin) {
        return Err(field_err("routing.origin", "node out of range"));
    }
    if !node_ok(routing.destination) {
        return Err(field_err("routing.destination", "node out of range"));
    }
    for (i, [from, to]) in routing.edges.iter().enumerate() {
        if !node_ok(*from) || !node_ok(*to) {
            return Err(field_err(
                &format!("routing.edges[{i}]"),
                "endpoint node out of range",
            ));
        }
    }
    if routing.routes.is_empty() {
        return Err(field_err("routing.routes", "at least one route required"));
    }
    let mut bundles = Vec::new();
    for (r, route) in routing.routes.iter().enumerate() {
        let field = format!("routing.routes[{r}]");
        if route.is_empty() {
            return Err(field_err(&field, "empty route"));
        }
        let mut at = routing.origin;
        for (step, &edge) in route.iter().enumerate() {
            let [from, to] = *routing
                .edges
                .get(edge)
                .ok_or_else(|| field_err(&field, format!("edge index {edge} out of range")))?;
            if from != at {
                return Err(field_err(
                    &field,
                    format!("step {step}: edge {edge} starts at node {from}, expected {at}"),
                ));
            }
            at = to;
        }
        if at != routing.destination {
            return Err(field_err(
                &field,
                format!(
                    "ends at node {at}, not the destination {}",
                    routing.destination
                ),
            ));
        }
        bundles.push(Bundle::new(route.clone()));
    }
    Ok(bundles)
}

// ---------------------------------------------------------------------------
// Saving
// ---------------------------------------------------------------------------

/// Serializes a game with explicit per-agent bundles (routing shorthand is
/// not reconstructed). `load(save(g))` reproduces `g` exactly.
pub fn save_game(game: &Game) -> String {
    let doc = GameDoc {
        schema: SCHEMA.to_string(),
        n_agents: game.n_agents(),
        basis: BasisDoc {
            n: Some(game.basis().max_load()),
            functions: (0..game.basis().len())
                .map(|j| BasisFnDoc {
                    name: format!("b{}", j + 1),
                    gen: None,
                    values: Some(game.basis().table(j).to_vec()),
                })
                .collect(),
        },
        resources: (0..game.num_resources())
            .map(|e| ResourceDoc {
                name: format!("e{}", e + 1),
                gamma: game.gamma().row(e).to_vec(),
            })
            .collect(),
        agents: (0..game.n_agents())
            .map(|i| AgentDoc {
                bundles: game
                    .action_set(i)
                    .iter()
                    .map(|b| b.resources().to_vec())
                    .collect(),
            })
            .collect(),
        routing: None,
    };
    toml::to_string_pretty(&doc).expect("game documents always serialize")
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn bundled_sioux_falls_matches_published_shape() {
        let g = load_game("sioux_falls_simplified").unwrap();
        assert_eq!(g.n_agents(), 15);
        assert_eq!(g.num_resources(), 10);
        let actions = g.symmetric_action_set().expect("routing games are symmetric");
        assert_eq!(actions.len(), 5);
        // Spot-check the coefficient table.
        assert!((g.gamma().get(0, 0) - 1.33).abs() < 1e-12);
        assert!((g.gamma().get(0, 1) - 0.02).abs() < 1e-12);
        assert!((g.gamma().get(4, 0) - 1.00).abs() < 1e-12);
        assert!((g.gamma().get(4, 1) - 0.01).abs() < 1e-12);
        // Quartic basis: b2(2) = 16.
        assert_eq!(g.basis().value(1, 2), 16.0);
    }

    #[test]
    fn bundled_fixtures_match_programmatic_ones() {
        assert_eq!(load_game("game_x").unwrap(), fixtures::game_x());
        assert_eq!(load_game("game_y").unwrap(), fixtures::game_y());
    }

    #[test]
    fn round_trip_all_fixtures() {
        for g in [
            fixtures::game_x(),
            fixtures::game_y(),
            load_game("sioux").unwrap(),
        ] {
            let text = save_game(&g);
            let back = parse_game(&text).unwrap();
            assert_eq!(back, g);
        }
    }

    #[test]
    fn disconnected_route_is_named_in_the_error() {
        let text = r#"
schema = "congame/v1"
n_agents = 2

[basis]
functions = [{ name = "lin", gen = "poly:1" }]

[[resources]]
name = "a"
gamma = [1.0]

[[resources]]
name = "b"
gamma = [1.0]

[routing]
nodes = 3
origin = 1
destination = 3
edges = [[1, 2], [1, 3]]
routes = [[0, 1]]
"#;
        let err = parse_game(text).unwrap_err();
        match err {
            Error::GameFile { field, message } => {
                assert_eq!(field, "routing.routes[0]");
                assert!(message.contains("edge 1"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn dangling_indices_are_rejected() {
        let text = r#"
schema = "congame/v1"
n_agents = 1

[basis]
functions = [{ name = "c", gen = "const" }]

[[resources]]
name = "a"
gamma = [1.0]

[[agents]]
bundles = [[3]]
"#;
        assert!(parse_game(text).is_err());
    }

    #[test]
    fn schema_version_is_enforced() {
        let text = r#"
schema = "congame/v999"
n_agents = 1

[basis]
functions = [{ name = "c", gen = "const" }]

[[resources]]
name = "a"
gamma = [1.0]

[[agents]]
bundles = [[0]]
"#;
        let err = parse_game(text).unwrap_err();
        assert!(matches!(err, Error::GameFile { ref field, .. } if field == "schema"));
    }

    #[test]
    fn generator_tags_expand() {
        let text = r#"
schema = "congame/v1"
n_agents = 3

[basis]
functions = [
  { name = "one", gen = "const" },
  { name = "quartic", gen = "poly:4" },
]

[[resources]]
name = "a"
gamma = [1.0, 2.0]

[[agents]]
bundles = [[0]]

[[agents]]
bundles = [[0]]

[[agents]]
bundles = [[0]]
"#;
        let g = parse_game(text).unwrap();
        assert_eq!(g.basis().value(0, 3), 1.0);
        assert_eq!(g.basis().value(1, 3), 81.0);
    }
}
