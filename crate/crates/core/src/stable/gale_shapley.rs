use crate::agent::{AgentId, Side};
use crate::error::Result;
use crate::matching::Matching;
use crate::prefs::PreferenceTable;
use crate::scalar::Scalar;

/// Deferred acceptance over the payoff table `payoffs`, with `proposer`
/// making the offers.
///
/// The lowest-indexed eligible proposer always moves next. An unmatched
/// acceptor takes any offer; a matched one trades up only on a strictly
/// higher payoff. With users proposing and `N > L`, users who exhaust their
/// list stay unmatched. Any tie in any row is rejected up front.
pub fn gs_propose<T: Scalar>(payoffs: &PreferenceTable<T>, proposer: Side) -> Result<Matching> {
    payoffs.check_strict()?;
    let shape = payoffs.shape();
    let n_proposers = shape.side_len(proposer);
    let n_acceptors = shape.side_len(proposer.other());
    let agent = |side: Side, i: usize| AgentId { side, index: i };

    let queues: Vec<Vec<usize>> = (0..n_proposers)
        .map(|i| payoffs.ordering(agent(proposer, i)))
        .collect();
    let mut next = vec![0usize; n_proposers];
    let mut proposer_match: Vec<Option<usize>> = vec![None; n_proposers];
    let mut acceptor_match: Vec<Option<usize>> = vec![None; n_acceptors];

    while let Some(i) = (0..n_proposers).find(|&i| proposer_match[i].is_none() && next[i] < n_acceptors) {
        let j = queues[i][next[i]];
        next[i] += 1;
        let acceptor_row = payoffs.row(agent(proposer.other(), j));
        match acceptor_match[j] {
            None => {
                acceptor_match[j] = Some(i);
                proposer_match[i] = Some(j);
            }
            Some(held) if acceptor_row[i] > acceptor_row[held] => {
                proposer_match[held] = None;
                acceptor_match[j] = Some(i);
                proposer_match[i] = Some(j);
            }
            Some(_) => {}
        }
    }

    let provider_to_user: Vec<usize> = match proposer {
        Side::Provider => proposer_match
            .into_iter()
            .map(|u| u.expect("N >= L leaves no provider unmatched"))
            .collect(),
        Side::User => acceptor_match
            .into_iter()
            .map(|u| u.expect("N >= L leaves no provider unmatched"))
            .collect(),
    };
    Matching::new(provider_to_user, shape)
}

/// The unique stable matching, when deferred acceptance from both sides
/// agrees; `None` when the stable set has more than one member.
pub fn unique_stable<T: Scalar>(payoffs: &PreferenceTable<T>) -> Result<Option<Matching>> {
    let from_providers = gs_propose(payoffs, Side::Provider)?;
    let from_users = gs_propose(payoffs, Side::User)?;
    Ok((from_providers == from_users).then_some(from_providers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::MarketShape;
    use crate::error::MarketError;
    use crate::payoff::is_stable;

    fn table(users: Vec<Vec<f64>>, providers: Vec<Vec<f64>>) -> PreferenceTable<f64> {
        let shape = MarketShape::new(users.len(), providers.len()).unwrap();
        PreferenceTable::new(shape, users, providers).unwrap()
    }

    #[test]
    fn mutual_favourites_are_forced() {
        let t = table(
            vec![vec![0.9, 0.1], vec![0.2, 0.8]],
            vec![vec![0.7, 0.3], vec![0.4, 0.6]],
        );
        let expect = Matching::new(vec![0, 1], t.shape()).unwrap();
        assert_eq!(gs_propose(&t, Side::Provider).unwrap(), expect);
        assert_eq!(gs_propose(&t, Side::User).unwrap(), expect);
        assert_eq!(unique_stable(&t).unwrap(), Some(expect));
    }

    #[test]
    fn crossed_instance_has_two_sides() {
        // Providers both rank u0 first; u0 prefers p1, u1 prefers p0.
        let t = table(
            vec![vec![0.2, 0.9], vec![0.8, 0.3]],
            vec![vec![0.9, 0.1], vec![0.8, 0.2]],
        );
        let by_p = gs_propose(&t, Side::Provider).unwrap();
        let by_u = gs_propose(&t, Side::User).unwrap();
        assert!(is_stable(&by_p, &t).unwrap());
        assert!(is_stable(&by_u, &t).unwrap());
        // u0-p1 / u1-p0 gives every user its first choice and p1 its first too.
        assert_eq!(by_u.provider_to_user(), &[1, 0]);
        assert_eq!(by_p, by_u);
    }

    #[test]
    fn users_propose_with_surplus_users() {
        let t = table(
            vec![vec![0.9, 0.5], vec![0.8, 0.4], vec![0.7, 0.6]],
            vec![vec![0.1, 0.2, 0.3], vec![0.3, 0.2, 0.1]],
        );
        let m = gs_propose(&t, Side::User).unwrap();
        assert!(is_stable(&m, &t).unwrap());
        assert_eq!(m.user_to_provider().iter().filter(|x| x.is_none()).count(), 1);
    }

    #[test]
    fn ties_are_rejected() {
        let t = table(vec![vec![0.5, 0.5], vec![0.2, 0.8]], vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
        assert!(matches!(gs_propose(&t, Side::Provider), Err(MarketError::Ties { .. })));
    }
}
