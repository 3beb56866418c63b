//! Scenario files.
//!
//! A scenario is one JSON object. Only `preferences`, `sigma2` and `horizon`
//! are required:
//!
//! ```json
//! {
//!   "preferences": { "preset": "example1" },
//!   "rule": { "kind": "zero" },
//!   "sigma2": 0.25,
//!   "alpha": 3.0,
//!   "horizon": 10000,
//!   "seeds": [1, 2, 3]
//! }
//! ```
//!
//! See the README for every field.

use std::path::{Path, PathBuf};

use matchmarket::generate::{random_pairwise_unique_rho, random_strict_prefs};
use matchmarket::metrics::geometric_checkpoints;
use matchmarket::{
    pricing_defaults, MarketShape, Matcher, PreferenceTable64, PricingParams64, RewardDist, RuleRegime64, Scenario64,
    Side,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Names accepted by `{"preset": ...}`.
pub const PRESETS: [&str; 1] = ["example1"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PrefSource {
    /// Row-major tables: `users[u][p] = mu(u, p)`, `providers[p][u] = mu(p, u)`.
    Explicit { users: Vec<Vec<f64>>, providers: Vec<Vec<f64>> },
    /// Entries in `[margin, 1]` with every row separated by `margin`.
    Random {
        seed: u64,
        margin: f64,
        n_users: usize,
        n_providers: usize,
    },
    /// Pairwise-unique `rho` with gaps of at least `min_gap`.
    RandomRho {
        seed: u64,
        min_gap: f64,
        n_users: usize,
        n_providers: usize,
    },
    Preset(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    Zero,
    Proportional {
        gamma: f64,
    },
    Balanced,
    /// Without `c1`, `c2` and `g` the default uniqueness-forcing schedule is
    /// built from `bound` (default: the largest `|mu(u, .)|`) and `ordering`
    /// (default: natural provider order).
    Pricing {
        #[serde(default)]
        bound: Option<f64>,
        #[serde(default)]
        ordering: Option<Vec<usize>>,
        #[serde(default)]
        c1: Option<f64>,
        #[serde(default)]
        c2: Option<f64>,
        #[serde(default)]
        g: Option<Vec<f64>>,
    },
}

impl Default for RuleSpec {
    fn default() -> Self {
        RuleSpec::Zero
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Directory for artifacts; overridden by `--out`.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Trace file name. With several seeds `_seed<k>` is inserted before the
    /// extension.
    #[serde(default)]
    pub trace_csv: Option<String>,
    #[serde(default)]
    pub summary_json: Option<String>,
}

fn default_alpha() -> f64 {
    3.0
}

fn default_warm_start() -> u64 {
    1
}

fn default_proposer() -> Side {
    Side::Provider
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub preferences: PrefSource,
    #[serde(default)]
    pub rule: RuleSpec,
    pub sigma2: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_warm_start")]
    pub warm_start: u64,
    pub horizon: u64,
    #[serde(default = "default_proposer")]
    pub proposer: Side,
    #[serde(default)]
    pub matcher: Matcher,
    #[serde(default)]
    pub reward_dist: RewardDist,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default)]
    pub outputs: OutputSpec,
}

/// A validated scenario file.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub file: ScenarioFile,
    /// Scenario for the first seed; other seeds differ only in `seed`.
    pub scenario: Scenario64,
    pub pricing: Option<PricingParams64>,
    pub seeds: Vec<u64>,
    pub checkpoints: Vec<u64>,
}

impl LoadedScenario {
    pub fn with_seed(&self, seed: u64) -> Scenario64 {
        Scenario64 {
            seed,
            ..self.scenario.clone()
        }
    }

    pub fn shape(&self) -> MarketShape {
        self.scenario.shape()
    }
}

/// Example 1: three users and three providers with two stable matchings.
/// Cardinal values 0.3 > 0.2 > 0.1 follow each agent's ranking.
pub fn example1() -> PreferenceTable64 {
    let shape = MarketShape::new(3, 3).expect("3x3");
    PreferenceTable64::new(
        shape,
        vec![vec![0.1, 0.2, 0.3], vec![0.2, 0.1, 0.3], vec![0.3, 0.2, 0.1]],
        vec![vec![0.3, 0.2, 0.1], vec![0.3, 0.2, 0.1], vec![0.1, 0.2, 0.3]],
    )
    .expect("finite table")
}

fn shape_of(field: &str, n_users: usize, n_providers: usize) -> CliResult<MarketShape> {
    MarketShape::new(n_users, n_providers).map_err(|e| CliError::invalid(field, e))
}

pub fn build_preferences(source: &PrefSource) -> CliResult<PreferenceTable64> {
    let table = match source {
        PrefSource::Explicit { users, providers } => {
            let field = "preferences.explicit";
            let n_providers = providers.len();
            let shape = shape_of(field, users.len(), n_providers)?;
            for (u, row) in users.iter().enumerate() {
                if row.len() != n_providers {
                    return Err(CliError::invalid(
                        format!("{field}.users[{u}]"),
                        format!("expected {n_providers} entries, found {}", row.len()),
                    ));
                }
            }
            for (p, row) in providers.iter().enumerate() {
                if row.len() != users.len() {
                    return Err(CliError::invalid(
                        format!("{field}.providers[{p}]"),
                        format!("expected {} entries, found {}", users.len(), row.len()),
                    ));
                }
            }
            let table = PreferenceTable64::new(shape, users.clone(), providers.clone())
                .map_err(|e| CliError::invalid(field, e))?;
            table.check_strict().map_err(|e| CliError::invalid(field, e))?;
            table
        }
        PrefSource::Random {
            seed,
            margin,
            n_users,
            n_providers,
        } => {
            let field = "preferences.random";
            let shape = shape_of(field, *n_users, *n_providers)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            random_strict_prefs(&mut rng, shape, *margin).map_err(|e| CliError::invalid(field, e))?
        }
        PrefSource::RandomRho {
            seed,
            min_gap,
            n_users,
            n_providers,
        } => {
            let field = "preferences.random_rho";
            let shape = shape_of(field, *n_users, *n_providers)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            random_pairwise_unique_rho(&mut rng, shape, *min_gap).map_err(|e| CliError::invalid(field, e))?
        }
        PrefSource::Preset(name) => match name.as_str() {
            "example1" => example1(),
            other => {
                return Err(CliError::invalid(
                    "preferences.preset",
                    format!("unknown preset `{other}`; known presets: {}", PRESETS.join(", ")),
                ))
            }
        },
    };
    Ok(table)
}

/// Resolves a rule spec against the true preferences.
pub fn build_rule(spec: &RuleSpec, mu: &PreferenceTable64) -> CliResult<(RuleRegime64, Option<PricingParams64>)> {
    let n_providers = mu.shape().n_providers;
    let rule = match spec {
        RuleSpec::Zero => RuleRegime64::Zero,
        RuleSpec::Balanced => RuleRegime64::Balanced,
        RuleSpec::Proportional { gamma } => RuleRegime64::Proportional { gamma: *gamma },
        RuleSpec::Pricing {
            bound,
            ordering,
            c1,
            c2,
            g,
        } => {
            let bound = bound.unwrap_or_else(|| mu.user_abs_bound());
            let params = match (c1, c2, g) {
                (None, None, None) => {
                    let natural: Vec<usize> = (0..n_providers).collect();
                    let ordering = ordering.as_deref().unwrap_or(&natural);
                    pricing_defaults(bound, n_providers, ordering).map_err(|e| CliError::invalid("rule", e))?
                }
                (Some(c1), Some(c2), Some(g)) => {
                    if ordering.is_some() {
                        return Err(CliError::invalid("rule.ordering", "only used with the default price schedule"));
                    }
                    PricingParams64 {
                        bound,
                        c1: *c1,
                        c2: *c2,
                        g: g.clone(),
                    }
                }
                _ => return Err(CliError::invalid("rule", "give all of c1, c2 and g, or none of them")),
            };
            params.check_bound(mu).map_err(|e| CliError::invalid("rule.bound", e))?;
            let rule = params.rule();
            rule.validate(n_providers).map_err(|e| CliError::invalid("rule.g", e))?;
            return Ok((rule, Some(params)));
        }
    };
    rule.validate(n_providers).map_err(|e| CliError::invalid("rule", e))?;
    Ok((rule, None))
}

/// Validates a parsed scenario file.
pub fn resolve(file: ScenarioFile) -> CliResult<LoadedScenario> {
    let mu = build_preferences(&file.preferences)?;
    let (rule, pricing) = build_rule(&file.rule, &mu)?;
    if !(file.sigma2 >= 0.0) || !file.sigma2.is_finite() {
        return Err(CliError::invalid("sigma2", "must be a non-negative number"));
    }
    if !(file.alpha > 2.0) || !file.alpha.is_finite() {
        return Err(CliError::invalid("alpha", "must exceed 2"));
    }
    if file.warm_start < 1 {
        return Err(CliError::invalid("warm_start", "must be at least 1"));
    }
    if file.seeds.is_empty() {
        return Err(CliError::invalid("seeds", "at least one seed is required"));
    }
    let checkpoints = match &file.checkpoints {
        Some(list) => {
            if list.iter().any(|&c| c < 1 || c > file.horizon) || list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::invalid(
                    "checkpoints",
                    format!("must be strictly increasing within [1, {}]", file.horizon),
                ));
            }
            list.clone()
        }
        None if file.horizon == 0 => Vec::new(),
        None => geometric_checkpoints(file.horizon, 8),
    };
    let scenario = Scenario64 {
        true_prefs: mu,
        rule,
        sigma2: file.sigma2,
        alpha: file.alpha,
        warm_start: file.warm_start,
        horizon: file.horizon,
        proposer: file.proposer,
        matcher: file.matcher,
        reward_dist: file.reward_dist,
        seed: file.seeds[0],
        pricing_bound: pricing.as_ref().map(|p| p.bound),
    };
    scenario.validate().map_err(|e| CliError::invalid("matcher", e))?;
    Ok(LoadedScenario {
        seeds: file.seeds.clone(),
        file,
        scenario,
        pricing,
        checkpoints,
    })
}

pub fn parse_scenario(text: &str) -> CliResult<LoadedScenario> {
    let mut de = serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        CliError::Schema {
            field: if field == "." { "<root>".into() } else { field },
            message: e.into_inner().to_string(),
        }
    })?;
    resolve(file)
}

pub fn load_scenario(path: &Path) -> CliResult<LoadedScenario> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use matchmarket::generate::min_row_gap;

    #[test]
    fn minimal_file() {
        let s = parse_scenario(r#"{"preferences": {"preset": "example1"}, "sigma2": 1, "horizon": 100}"#).unwrap();
        assert_eq!(s.shape(), MarketShape::new(3, 3).unwrap());
        assert_eq!(s.scenario.rule, RuleRegime64::Zero);
        assert_eq!(s.checkpoints.last(), Some(&100));
    }

    #[test]
    fn random_source_respects_margin() {
        let s = parse_scenario(
            r#"{"preferences": {"random": {"seed": 7, "margin": 0.05, "n_users": 4, "n_providers": 3}},
                "sigma2": 0.25, "horizon": 10}"#,
        )
        .unwrap();
        assert!(s.scenario.true_prefs.is_strict());
        assert!(min_row_gap(&s.scenario.true_prefs) >= 0.05);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let err = parse_scenario(r#"{"preferences": {"preset": "example1"}, "sigma2": "x", "horizon": 1}"#).unwrap_err();
        assert!(matches!(&err, CliError::Schema { field, .. } if field == "sigma2"), "{err}");
        let err = parse_scenario(r#"{"preferences": {"preset": "example1"}, "sigma2": 1}"#).unwrap_err();
        assert!(err.to_string().contains("horizon"), "{err}");
        let err = parse_scenario(
            r#"{"preferences": {"preset": "example1"}, "rule": {"kind": "proportional", "gama": 1}, "sigma2": 1, "horizon": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("rule"), "{err}");
    }

    #[test]
    fn ties_are_rejected_with_field() {
        let err = parse_scenario(
            r#"{"preferences": {"explicit": {"users": [[0.5, 0.5], [0.1, 0.2]], "providers": [[0.1, 0.2], [0.3, 0.4]]}},
                "sigma2": 1, "horizon": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("preferences.explicit"), "{err}");
        assert!(err.to_string().contains("tie"), "{err}");
    }

    #[test]
    fn pricing_bound_violation() {
        let err = parse_scenario(
            r#"{"preferences": {"preset": "example1"}, "rule": {"kind": "pricing", "bound": 0.2},
                "sigma2": 1, "horizon": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("rule.bound"), "{err}");
    }

    #[test]
    fn unknown_preset() {
        let err = parse_scenario(r#"{"preferences": {"preset": "nope"}, "sigma2": 1, "horizon": 1}"#).unwrap_err();
        assert!(err.to_string().contains("preferences.preset"), "{err}");
    }
}
