//! Per-helper delivery: feasible user sets, XOR codewords with phantom
//! users, nulling plans for interference reduction, and superposition
//! messages for cache congestion control.
//!
//! Beamformers never exist as vectors here. A transmission records which
//! users its signal (or a single stream of it) is suppressed at, and the
//! collision model treats those users as not hearing it.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, k_subsets, ProfileSet};
use crate::error::{Error, Result};
use crate::placement::{PlacementParams, ProfileAssignment, Requests, SubpacketIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeliveryMode {
    /// Single-antenna delivery.
    Siso,
    /// Interference reduction: each active helper nulls its whole signal at
    /// up to `mux_gain - 1` users.
    Ir,
    /// Cache congestion control: up to `mux_gain` users per profile share a
    /// message, separated by per-stream nulling.
    Ccc,
}

impl DeliveryMode {
    pub const ALL: [DeliveryMode; 3] = [DeliveryMode::Siso, DeliveryMode::Ir, DeliveryMode::Ccc];

    pub fn name(self) -> &'static str {
        match self {
            DeliveryMode::Siso => "siso",
            DeliveryMode::Ir => "ir",
            DeliveryMode::Ccc => "ccc",
        }
    }
}

impl std::str::FromStr for DeliveryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "siso" => Ok(DeliveryMode::Siso),
            "ir" => Ok(DeliveryMode::Ir),
            "ccc" => Ok(DeliveryMode::Ccc),
            other => Err(Error::InvalidParameters(format!("unknown mode `{other}`"))),
        }
    }
}

/// Users each active helper suppresses its entire signal at (`Z_i`).
/// Only helpers with a nonempty set are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NullingPlan {
    sets: BTreeMap<usize, Vec<usize>>,
}

impl NullingPlan {
    pub fn from_sets<I: IntoIterator<Item = (usize, Vec<usize>)>>(sets: I) -> Self {
        let sets = sets
            .into_iter()
            .filter_map(|(i, mut users)| {
                users.sort_unstable();
                users.dedup();
                (!users.is_empty()).then_some((i, users))
            })
            .collect();
        NullingPlan { sets }
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn get(&self, helper: usize) -> Option<&[usize]> {
        self.sets.get(&helper).map(Vec::as_slice)
    }

    pub fn nulled_at(&self, helper: usize) -> &[usize] {
        self.get(helper).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.sets.iter().map(|(&i, v)| (i, v.as_slice()))
    }

    /// True when `self` nulls a subset of what `other` nulls at every helper.
    pub fn is_subplan_of(&self, other: &NullingPlan) -> bool {
        self.iter().all(|(i, z)| {
            let theirs = other.nulled_at(i);
            z.iter().all(|k| theirs.contains(k))
        })
    }

    pub fn check_budget(&self, mux_gain: usize) -> Result<()> {
        match self.iter().find(|(_, z)| z.len() + 1 > mux_gain) {
            Some((i, z)) => Err(Error::InconsistentPolicy(format!(
                "helper {i} nulls {} users but the multiplexing gain is {mux_gain}",
                z.len()
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibleMode {
    /// One user per profile (SISO and interference reduction).
    SingleStream,
    /// Up to `mux_gain` users per profile.
    Ccc,
}

/// Users one active helper serves in a round.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeasibleSet {
    pub helper: usize,
    pub users: Vec<usize>,
    pub mode: FeasibleMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransmissionKind {
    XorCodeword,
    Superposition,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    #[serde(flatten)]
    pub subpacket: SubpacketIndex,
    pub intended_user: usize,
    /// Users this term's stream is suppressed at.
    #[serde(default)]
    pub nulled_users: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transmission {
    pub helper: usize,
    pub kind: TransmissionKind,
    pub terms: Vec<Term>,
    /// Users the whole transmission is suppressed at.
    #[serde(default)]
    pub helper_nulling: Vec<usize>,
}

/// Transmissions of every active helper in one policy. Slot `s` of each
/// helper is sent concurrently; helpers with shorter lists idle afterwards.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionSchedule {
    pub helpers: Vec<HelperSchedule>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelperSchedule {
    pub helper: usize,
    pub transmissions: Vec<Transmission>,
}

impl TransmissionSchedule {
    pub fn slots(&self) -> usize {
        self.helpers.iter().map(|h| h.transmissions.len()).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// Splits `users` by profile: entry `l` holds `U^l`, sorted.
pub fn group_by_profile(users: &[usize], assignment: &ProfileAssignment) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); assignment.profile_count()];
    for &k in users {
        groups[assignment.profile_of(k)].push(k);
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// `C(L, t+1) - C(absent, t+1)`: slots needed to deliver a full chunk to a
/// feasible set missing `absent` profiles.
pub fn transmission_count(profiles: usize, t: usize, absent: usize) -> u64 {
    binomial(profiles, t + 1) - binomial(absent, t + 1)
}

/// Every maximal one-user-per-profile subset of `users`.
pub fn feasible_sets_siso(users: &[usize], assignment: &ProfileAssignment) -> Vec<Vec<usize>> {
    let groups: Vec<Vec<usize>> = group_by_profile(users, assignment).into_iter().filter(|g| !g.is_empty()).collect();
    if groups.is_empty() {
        return Vec::new();
    }
    groups
        .iter()
        .map(|g| g.iter().copied())
        .multi_cartesian_product()
        .map(|mut v| {
            v.sort_unstable();
            v
        })
        .collect()
}

/// Every maximal subset of `users` with at most `mux_gain` users per profile.
pub fn feasible_sets_ccc(users: &[usize], assignment: &ProfileAssignment, mux_gain: usize) -> Vec<Vec<usize>> {
    let per_group: Vec<Vec<Vec<usize>>> = group_by_profile(users, assignment)
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let take = g.len().min(mux_gain);
            g.into_iter().combinations(take).collect()
        })
        .collect();
    if per_group.is_empty() {
        return Vec::new();
    }
    per_group
        .iter()
        .map(|choices| choices.iter())
        .multi_cartesian_product()
        .map(|picked| {
            let mut v: Vec<usize> = picked.into_iter().flatten().copied().collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Number of profiles with no member in `users`.
pub fn absent_profiles(users: &[usize], assignment: &ProfileAssignment) -> usize {
    let present: ProfileSet = users.iter().map(|&k| assignment.profile_of(k)).collect();
    assignment.profile_count() - present.len()
}

/// XOR codewords for a one-user-per-profile feasible set. Absent profiles
/// are filled with phantom users; codewords touching only phantoms are
/// dropped and phantom terms are stripped from the rest. `helper_nulling`
/// is attached to every transmission. Terms are ordered by intended user.
pub fn build_codewords(
    helper: usize,
    users: &[usize],
    assignment: &ProfileAssignment,
    requests: &Requests,
    params: &PlacementParams,
    helper_nulling: &[usize],
) -> Result<Vec<Transmission>> {
    check_profile_count(assignment, params)?;
    let mut by_profile: Vec<Option<usize>> = vec![None; params.profiles];
    for &k in users {
        let slot = &mut by_profile[assignment.profile_of(k)];
        if let Some(other) = slot {
            return Err(Error::InvalidFeasibleSet(format!(
                "users {other} and {k} share profile {}",
                assignment.profile_of(k)
            )));
        }
        *slot = Some(k);
    }
    let mut nulling = helper_nulling.to_vec();
    nulling.sort_unstable();
    nulling.dedup();

    let mut out = Vec::new();
    for subset in k_subsets(params.profiles, params.t + 1) {
        let set: ProfileSet = subset.iter().copied().collect();
        let mut terms: Vec<Term> = subset
            .iter()
            .filter_map(|&p| by_profile[p].map(|k| (p, k)))
            .map(|(p, k)| Term {
                subpacket: SubpacketIndex::new(requests.chunk_of(k), set.without(p)),
                intended_user: k,
                nulled_users: Vec::new(),
            })
            .collect();
        terms.sort_by_key(|t| t.intended_user);
        if !terms.is_empty() {
            out.push(Transmission {
                helper,
                kind: TransmissionKind::XorCodeword,
                terms,
                helper_nulling: nulling.clone(),
            });
        }
    }
    Ok(out)
}

/// Superposition messages for a congestion-control feasible set. For every
/// `(t+1)`-subset `S` of profiles, each member `u` with profile in `S` gets
/// a stream carrying `W_{d_u, S \ {L(u)}}` that is nulled at the other
/// members sharing `u`'s profile.
pub fn build_ccc_messages(
    helper: usize,
    users: &[usize],
    assignment: &ProfileAssignment,
    requests: &Requests,
    params: &PlacementParams,
    mux_gain: usize,
) -> Result<Vec<Transmission>> {
    check_profile_count(assignment, params)?;
    let groups = group_by_profile(users, assignment);
    if let Some((p, g)) = groups.iter().enumerate().find(|(_, g)| g.len() > mux_gain) {
        return Err(Error::InvalidFeasibleSet(format!(
            "{} users share profile {p}, multiplexing gain is {mux_gain}",
            g.len()
        )));
    }
    let mut out = Vec::new();
    for subset in k_subsets(params.profiles, params.t + 1) {
        let set: ProfileSet = subset.iter().copied().collect();
        let mut terms: Vec<Term> = subset
            .iter()
            .flat_map(|&p| {
                let group = &groups[p];
                group.iter().map(move |&k| Term {
                    subpacket: SubpacketIndex::new(requests.chunk_of(k), set.without(p)),
                    intended_user: k,
                    nulled_users: group.iter().copied().filter(|&j| j != k).collect(),
                })
            })
            .collect();
        if terms.is_empty() {
            continue;
        }
        terms.sort_by_key(|t| t.intended_user);
        out.push(Transmission { helper, kind: TransmissionKind::Superposition, terms, helper_nulling: Vec::new() });
    }
    Ok(out)
}

fn check_profile_count(assignment: &ProfileAssignment, params: &PlacementParams) -> Result<()> {
    if assignment.profile_count() != params.profiles {
        return Err(Error::InvalidParameters(format!(
            "assignment uses {} profiles, placement {}",
            assignment.profile_count(),
            params.profiles
        )));
    }
    Ok(())
}

/// Number of nonempty nulling plans: `prod_i sum_{m < mux_gain} C(|I_i|, m) - 1`.
pub fn nulling_plan_count(candidate_sizes: &[usize], mux_gain: usize) -> u64 {
    let product: u64 = candidate_sizes.iter().map(|&n| (0..mux_gain).map(|m| binomial(n, m)).sum::<u64>()).product();
    product - 1
}

/// Choices of `Z_i` for one helper: subsets of its candidates with fewer
/// than `mux_gain` members, by size then lexicographically.
pub fn nulling_choices(candidates: &[usize], mux_gain: usize) -> Vec<Vec<usize>> {
    (0..mux_gain.max(1)).flat_map(|m| candidates.iter().copied().combinations(m)).collect()
}

/// Every nulling plan over the active helpers' candidate sets except the
/// all-empty one.
pub fn enumerate_nulling_plans(candidates: &BTreeMap<usize, Vec<usize>>, mux_gain: usize) -> Vec<NullingPlan> {
    if candidates.is_empty() {
        return Vec::new();
    }
    let helpers: Vec<usize> = candidates.keys().copied().collect();
    let choices: Vec<Vec<Vec<usize>>> = candidates.values().map(|c| nulling_choices(c, mux_gain)).collect();
    choices
        .iter()
        .map(|c| c.iter())
        .multi_cartesian_product()
        .map(|picked| NullingPlan::from_sets(helpers.iter().copied().zip(picked.into_iter().cloned())))
        .filter(|plan| !plan.is_empty())
        .collect()
}
