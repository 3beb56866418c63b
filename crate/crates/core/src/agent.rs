use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MarketError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    User,
    Provider,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::User => Side::Provider,
            Side::Provider => Side::User,
        }
    }
}

/// A user `u<i>` or a provider `p<i>`, zero-indexed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId {
    pub side: Side,
    pub index: usize,
}

impl AgentId {
    pub const fn user(index: usize) -> Self {
        AgentId {
            side: Side::User,
            index,
        }
    }

    pub const fn provider(index: usize) -> Self {
        AgentId {
            side: Side::Provider,
            index,
        }
    }

    pub fn is_user(self) -> bool {
        self.side == Side::User
    }

    pub fn is_provider(self) -> bool {
        self.side == Side::Provider
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::User => write!(f, "u{}", self.index),
            Side::Provider => write!(f, "p{}", self.index),
        }
    }
}

/// `N` users and `L` providers with `N >= L >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarketShape {
    pub n_users: usize,
    pub n_providers: usize,
}

impl MarketShape {
    pub fn new(n_users: usize, n_providers: usize) -> Result<Self> {
        if n_providers == 0 {
            return Err(MarketError::InvalidShape("at least one provider required".into()));
        }
        if n_users < n_providers {
            return Err(MarketError::InvalidShape(format!(
                "need N >= L, got N = {n_users}, L = {n_providers}"
            )));
        }
        Ok(MarketShape {
            n_users,
            n_providers,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n_users + self.n_providers
    }

    pub fn side_len(&self, side: Side) -> usize {
        match side {
            Side::User => self.n_users,
            Side::Provider => self.n_providers,
        }
    }

    pub fn contains(&self, a: AgentId) -> bool {
        a.index < self.side_len(a.side)
    }

    pub fn check(&self, a: AgentId) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(MarketError::AgentOutOfRange(a))
        }
    }

    /// Users first, then providers. This is the column order of every
    /// per-agent array in the crate.
    pub fn agents(&self) -> impl Iterator<Item = AgentId> + '_ {
        (0..self.n_users)
            .map(AgentId::user)
            .chain((0..self.n_providers).map(AgentId::provider))
    }

    /// Position of `a` in [`MarketShape::agents`].
    pub fn agent_slot(&self, a: AgentId) -> usize {
        match a.side {
            Side::User => a.index,
            Side::Provider => self.n_users + a.index,
        }
    }

    pub fn agent_at(&self, slot: usize) -> AgentId {
        if slot < self.n_users {
            AgentId::user(slot)
        } else {
            AgentId::provider(slot - self.n_users)
        }
    }

    /// Number of injective provider-to-user assignments, `N! / (N - L)!`.
    pub fn feasible_count(&self) -> u128 {
        let n = self.n_users as u128;
        (0..self.n_providers as u128).fold(1u128, |acc, k| acc.saturating_mul(n - k))
    }
}
