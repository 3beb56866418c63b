use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agent::{AgentId, MarketShape, Side};
use crate::error::{MarketError, Result};

/// Why a provider-to-user array is not a feasible matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// The array length differs from the number of providers.
    WrongLength { expected: usize, found: usize },
    /// Provider `provider` points at a user index `>= N`.
    UserOutOfRange { provider: usize, user: usize },
    /// `user` is assigned to more than one provider.
    UserMatchedTwice { user: usize, providers: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongLength { expected, found } => {
                write!(f, "expected {expected} provider entries, found {found}")
            }
            Violation::UserOutOfRange { provider, user } => {
                write!(f, "provider {provider} matched to out-of-range user {user}")
            }
            Violation::UserMatchedTwice { user, providers } => {
                write!(f, "user {user} matched twice (providers {providers:?})")
            }
        }
    }
}

/// Lists every reason `provider_to_user` fails to be in the feasible set;
/// empty means feasible.
pub fn feasibility_check(provider_to_user: &[usize], shape: MarketShape) -> Vec<Violation> {
    let mut violations = Vec::new();
    if provider_to_user.len() != shape.n_providers {
        violations.push(Violation::WrongLength {
            expected: shape.n_providers,
            found: provider_to_user.len(),
        });
    }
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); shape.n_users];
    for (p, &u) in provider_to_user.iter().enumerate() {
        if u >= shape.n_users {
            violations.push(Violation::UserOutOfRange { provider: p, user: u });
        } else {
            holders[u].push(p);
        }
    }
    for (u, providers) in holders.into_iter().enumerate() {
        if providers.len() > 1 {
            violations.push(Violation::UserMatchedTwice { user: u, providers });
        }
    }
    violations
}

/// Every provider matched to a distinct user; users may be left unmatched.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    provider_to_user: Vec<usize>,
    user_to_provider: Vec<Option<usize>>,
}

impl Serialize for Matching {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.provider_to_user.serialize(serializer)
    }
}

impl Matching {
    pub fn new(provider_to_user: Vec<usize>, shape: MarketShape) -> Result<Self> {
        let violations = feasibility_check(&provider_to_user, shape);
        if let Some(v) = violations.first() {
            return Err(MarketError::Infeasible(v.to_string()));
        }
        let mut user_to_provider = vec![None; shape.n_users];
        for (p, &u) in provider_to_user.iter().enumerate() {
            user_to_provider[u] = Some(p);
        }
        Ok(Matching {
            provider_to_user,
            user_to_provider,
        })
    }

    pub fn provider_to_user(&self) -> &[usize] {
        &self.provider_to_user
    }

    pub fn user_to_provider(&self) -> &[Option<usize>] {
        &self.user_to_provider
    }

    pub fn shape(&self) -> MarketShape {
        MarketShape {
            n_users: self.user_to_provider.len(),
            n_providers: self.provider_to_user.len(),
        }
    }

    pub fn user_of(&self, provider: usize) -> usize {
        self.provider_to_user[provider]
    }

    pub fn provider_of(&self, user: usize) -> Option<usize> {
        self.user_to_provider[user]
    }

    /// `m(a)`, or `None` for an unmatched user.
    pub fn partner(&self, a: AgentId) -> Option<AgentId> {
        match a.side {
            Side::User => self.user_to_provider[a.index].map(AgentId::provider),
            Side::Provider => Some(AgentId::user(self.provider_to_user[a.index])),
        }
    }

    /// Matched pairs as `(user, provider)` in provider order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.provider_to_user.iter().enumerate().map(|(p, &u)| (u, p))
    }

    /// Dash-joined provider-to-user indices, e.g. `1-0-2`.
    pub fn dashed(&self) -> String {
        self.provider_to_user
            .iter()
            .map(|u| u.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self.pairs().map(|(u, p)| format!("u{u}-p{p}")).collect();
        write!(f, "{{{}}}", pairs.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(n: usize, l: usize) -> MarketShape {
        MarketShape::new(n, l).unwrap()
    }

    #[test]
    fn single_pair_is_feasible() {
        assert!(feasibility_check(&[0], shape(1, 1)).is_empty());
    }

    #[test]
    fn duplicate_user_is_reported() {
        let v = feasibility_check(&[0, 0], shape(2, 2));
        assert_eq!(
            v,
            vec![Violation::UserMatchedTwice {
                user: 0,
                providers: vec![0, 1]
            }]
        );
        assert_eq!(v[0].to_string(), "user 0 matched twice (providers [0, 1])");
    }

    #[test]
    fn extra_users_stay_unmatched() {
        let m = Matching::new(vec![2, 1], shape(3, 2)).unwrap();
        assert_eq!(m.provider_of(0), None);
        assert_eq!(m.provider_of(2), Some(0));
        assert_eq!(m.partner(AgentId::user(1)), Some(AgentId::provider(1)));
        assert_eq!(m.dashed(), "2-1");
    }

    #[test]
    fn out_of_range_and_length() {
        let v = feasibility_check(&[5], shape(3, 2));
        assert!(v.contains(&Violation::WrongLength { expected: 2, found: 1 }));
        assert!(v.contains(&Violation::UserOutOfRange { provider: 0, user: 5 }));
        assert!(Matching::new(vec![5, 0], shape(3, 2)).is_err());
    }
}
