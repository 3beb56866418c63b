//! The repeated matching process.
//!
//! Each step: learners report `nu_t`, the platform evaluates payoffs under
//! the rule and matches, matched agents draw rewards, costs and transfers
//! are settled at `nu_t`, and the learners absorb the new samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentId, MarketShape, Side};
use crate::bandit::LearnerState;
use crate::error::{MarketError, Result};
use crate::matching::Matching;
use crate::payoff::{blocking_pair, payoff_table};
use crate::prefs::PreferenceTable;
use crate::reward::RewardDist;
use crate::rules::{cost, transfer, RuleRegime};
use crate::scalar::Scalar;
use crate::stable::{greedy_balanced, gs_propose, max_weight_matching, WeightMatrix};

/// How the platform turns reported payoffs into a matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// Deferred acceptance with the scenario's proposer side.
    #[default]
    GaleShapley,
    /// Sorted-edge sweep; balanced rule only.
    GreedyBalanced,
    /// Ignores payoffs: provider 0 always gets user 0, provider 1 a uniformly
    /// random other user, remaining providers the lowest free users. Every
    /// matching is stable when payoffs vanish identically, so this is a
    /// legitimate choice under proportional costs with `gamma = 1`.
    PinnedRandom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: serde::de::DeserializeOwned"))]
pub struct Scenario<T> {
    pub true_prefs: PreferenceTable<T>,
    pub rule: RuleRegime<T>,
    pub sigma2: T,
    pub alpha: T,
    pub warm_start: u64,
    pub horizon: u64,
    pub proposer: Side,
    pub matcher: Matcher,
    pub reward_dist: RewardDist,
    pub seed: u64,
    /// Bound `B` on user preferences, required to hold for pricing scenarios
    /// built from the default price schedule.
    pub pricing_bound: Option<T>,
}

impl<T: Scalar> Scenario<T> {
    /// Scenario with the common defaults: GS with providers proposing,
    /// Gaussian rewards, one warm-start sample per pair.
    pub fn new(true_prefs: PreferenceTable<T>, rule: RuleRegime<T>, sigma2: T, alpha: T, horizon: u64, seed: u64) -> Self {
        Scenario {
            true_prefs,
            rule,
            sigma2,
            alpha,
            warm_start: 1,
            horizon,
            proposer: Side::Provider,
            matcher: Matcher::GaleShapley,
            reward_dist: RewardDist::Gaussian,
            seed,
            pricing_bound: None,
        }
    }

    pub fn shape(&self) -> MarketShape {
        self.true_prefs.shape()
    }

    pub fn validate(&self) -> Result<()> {
        let shape = self.shape();
        self.true_prefs.check_strict()?;
        self.rule.validate(shape.n_providers)?;
        if self.matcher == Matcher::GreedyBalanced && self.rule != RuleRegime::Balanced {
            return Err(MarketError::Parameter("the greedy matcher requires the balanced rule".into()));
        }
        if self.matcher == Matcher::PinnedRandom && shape.n_providers < 2 {
            return Err(MarketError::Parameter("the pinned-random scheduler needs two providers".into()));
        }
        if let (RuleRegime::Pricing { .. }, Some(bound)) = (&self.rule, self.pricing_bound) {
            let observed = self.true_prefs.user_abs_bound();
            if observed > bound {
                return Err(MarketError::Parameter(format!(
                    "pricing bound B = {bound} is below max |mu(u, .)| = {observed}"
                )));
            }
        }
        if self.warm_start < 1 {
            return Err(MarketError::Parameter("warm start must be at least 1".into()));
        }
        if !(self.alpha > T::two()) {
            return Err(MarketError::Parameter(format!("UCB alpha must exceed 2, got {}", self.alpha)));
        }
        if !(self.sigma2 >= T::zero()) {
            return Err(MarketError::Parameter(format!("sigma2 must be non-negative, got {}", self.sigma2)));
        }
        Ok(())
    }
}

/// One step of the process. Per-agent vectors are in
/// [`MarketShape::agents`] order (users, then providers).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord<T> {
    pub t: u64,
    /// FNV-1a over the bit patterns of `nu_t`.
    pub transient_digest: u64,
    pub matching: Matching,
    /// `X_t(a, m(a))`, `None` for unmatched agents.
    pub rewards: Vec<Option<T>>,
    pub costs: Vec<T>,
    pub transfers: Vec<T>,
    /// Observed payoff `U_t(a)`.
    pub payoffs: Vec<T>,
    /// Whether the matching is stable under `V(., .; nu_t)`.
    pub stable: bool,
    /// `W_t = sum_a V(a, m(a); nu_t)`.
    pub welfare: T,
    /// Best `sum_a V(a, M(a); nu_t)` over all feasible `M`.
    pub welfare_max: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace<T> {
    pub scenario: Scenario<T>,
    pub records: Vec<StepRecord<T>>,
    pub learners: LearnerState<T>,
}

fn digest<T: Scalar>(table: &PreferenceTable<T>) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for a in table.shape().agents() {
        for x in table.row(a) {
            for byte in x.to_f64_lossy().to_bits().to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(PRIME);
            }
        }
    }
    h
}

fn pinned_random<R: Rng + ?Sized>(shape: MarketShape, rng: &mut R) -> Matching {
    let mut provider_to_user = Vec::with_capacity(shape.n_providers);
    provider_to_user.push(0);
    if shape.n_providers > 1 {
        provider_to_user.push(1 + rng.random_range(0..shape.n_users - 1));
    }
    let taken = provider_to_user.clone();
    let mut free = (0..shape.n_users).filter(|u| !taken.contains(u));
    while provider_to_user.len() < shape.n_providers {
        provider_to_user.push(free.next().expect("N >= L"));
    }
    Matching::new(provider_to_user, shape).expect("distinct users by construction")
}

/// Welfare weights `V(u, p) + V(p, u)` of each potential pair.
pub fn pair_welfare<T: Scalar>(payoffs: &PreferenceTable<T>) -> WeightMatrix<T> {
    WeightMatrix::from_fn(payoffs.shape(), |u, p| {
        payoffs.row(AgentId::user(u))[p] + payoffs.row(AgentId::provider(p))[u]
    })
}

/// Runs step `t`, mutating `learners` with the new samples.
///
/// Reward draws follow provider order; for each matched pair the user's draw
/// comes before the provider's.
pub fn step<T: Scalar, R: Rng + ?Sized>(
    learners: &mut LearnerState<T>,
    scenario: &Scenario<T>,
    t: u64,
    rng: &mut R,
) -> Result<StepRecord<T>> {
    let shape = scenario.shape();
    let transient = learners.transient(t)?;
    let payoffs = payoff_table(&scenario.rule, &transient)?;

    let matching = match scenario.matcher {
        Matcher::GaleShapley => gs_propose(&payoffs, scenario.proposer)?,
        Matcher::GreedyBalanced => greedy_balanced(&transient)?,
        Matcher::PinnedRandom => pinned_random(shape, rng),
    };

    let n_agents = shape.n_agents();
    let mut rewards = vec![None; n_agents];
    for (u, p) in matching.pairs() {
        let (user, provider) = (AgentId::user(u), AgentId::provider(p));
        let x_user = scenario
            .reward_dist
            .sample(scenario.true_prefs.at(user, p), scenario.sigma2, rng);
        let x_provider = scenario
            .reward_dist
            .sample(scenario.true_prefs.at(provider, u), scenario.sigma2, rng);
        rewards[shape.agent_slot(user)] = Some(x_user);
        rewards[shape.agent_slot(provider)] = Some(x_provider);
    }

    let mut costs = vec![T::zero(); n_agents];
    let mut transfers = vec![T::zero(); n_agents];
    let mut observed = vec![T::zero(); n_agents];
    for (slot, a) in shape.agents().enumerate() {
        let partner = matching.partner(a);
        costs[slot] = cost(&scenario.rule, &transient, a, partner)?;
        transfers[slot] = transfer(&scenario.rule, &transient, a, partner)?;
        if let Some(x) = rewards[slot] {
            observed[slot] = x - costs[slot] + transfers[slot];
        }
    }
    // Unmatched users contribute nothing, so summing over matched pairs is
    // the same as summing over agents.
    let welfare = matching
        .pairs()
        .map(|(u, p)| payoffs.row(AgentId::user(u))[p] + payoffs.row(AgentId::provider(p))[u])
        .sum();

    for (u, p) in matching.pairs() {
        let (user, provider) = (AgentId::user(u), AgentId::provider(p));
        learners.observe(user, provider, rewards[shape.agent_slot(user)].expect("matched"))?;
        learners.observe(provider, user, rewards[shape.agent_slot(provider)].expect("matched"))?;
    }

    let stable = blocking_pair(&matching, &payoffs)?.is_none();
    let (_, welfare_max) = max_weight_matching(&pair_welfare(&payoffs));

    Ok(StepRecord {
        t,
        transient_digest: digest(&transient),
        matching,
        rewards,
        costs,
        transfers,
        payoffs: observed,
        stable,
        welfare,
        welfare_max,
    })
}

/// Full run from a seeded warm start; deterministic in `scenario.seed`.
pub fn run<T: Scalar>(scenario: &Scenario<T>) -> Result<Trace<T>> {
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut learners = LearnerState::init_warm_start(
        scenario.shape(),
        scenario.sigma2,
        scenario.alpha,
        scenario.warm_start,
        &scenario.true_prefs,
        scenario.reward_dist,
        &mut rng,
    )?;
    let mut records = Vec::with_capacity(scenario.horizon as usize);
    for t in 1..=scenario.horizon {
        records.push(step(&mut learners, scenario, t, &mut rng)?);
    }
    Ok(Trace {
        scenario: scenario.clone(),
        records,
        learners,
    })
}
