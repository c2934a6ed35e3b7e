//! Policy enumeration and rate vectors.
//!
//! A [`Configuration`] is one activation pattern plus one nulling plan,
//! reduced to what each active helper can offer: the users it covers,
//! grouped by profile, and how many of each group a feasible set takes.
//! Every policy is a configuration plus one concrete pick per group, so the
//! policy count of a configuration is a product of binomials. Fairness
//! solving works on configurations directly; explicit `(Policy, RateVector)`
//! lists are only materialised for small instances and audits.

use std::collections::{BTreeMap, HashMap, HashSet};

use fixedbitset::FixedBitSet;
use itertools::Itertools;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::binomial;
use crate::delivery::{
    absent_profiles, build_ccc_messages, build_codewords, nulling_choices, nulling_plan_count, transmission_count,
    DeliveryMode, FeasibleMode, FeasibleSet, HelperSchedule, NullingPlan, TransmissionSchedule,
};
use crate::error::{Error, Result};
use crate::placement::{PlacementParams, ProfileAssignment, Requests};
use crate::topology::{ActivationPattern, NetworkTopology};

/// One activation pattern with a nulling plan and a feasible set per
/// serving helper.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Policy {
    pub pattern: ActivationPattern,
    pub mode: DeliveryMode,
    #[serde(default)]
    pub nulling: NullingPlan,
    pub choices: Vec<FeasibleSet>,
}

/// Per-user rates in chunks per transmission slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RateVector(pub Vec<f64>);

impl RateVector {
    pub fn zeros(users: usize) -> Self {
        RateVector(vec![0.0; users])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &RateVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

/// Guardrails for exhaustive enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Limits {
    /// Above this many helpers activation patterns are sampled.
    pub max_exhaustive_helpers: usize,
    /// Cap on explicitly materialised policies.
    pub max_policies: u64,
    /// Cap on interference-reduction nulling plans per activation pattern.
    pub max_plans_per_pattern: u64,
    /// Sample when a cap is exceeded instead of failing.
    pub sampling: bool,
    pub seed: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_exhaustive_helpers: 12,
            max_policies: 500_000,
            max_plans_per_pattern: 4096,
            sampling: true,
            seed: 0x5eed,
        }
    }
}

/// Users of one profile a helper can reach, and how many a feasible set takes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProfileGroup {
    pub profile: usize,
    pub take: usize,
    pub users: Vec<usize>,
}

/// Everything one active helper can do under a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HelperOffer {
    pub helper: usize,
    /// Slots per delivered chunk; every served user gets rate `1 / transmissions`.
    pub transmissions: u64,
    pub feasible_mode: FeasibleMode,
    pub groups: Vec<ProfileGroup>,
}

impl HelperOffer {
    pub fn rate(&self) -> f64 {
        1.0 / self.transmissions as f64
    }

    pub fn choice_count(&self) -> u64 {
        self.groups.iter().map(|g| binomial(g.users.len(), g.take)).fold(1u64, u64::saturating_mul)
    }

    /// All feasible sets, in lexicographic order of group picks.
    pub fn feasible_sets(&self) -> Vec<Vec<usize>> {
        self.groups
            .iter()
            .map(|g| g.users.iter().copied().combinations(g.take).collect::<Vec<_>>())
            .multi_cartesian_product()
            .map(|picks| {
                let mut v: Vec<usize> = picks.into_iter().flatten().collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    fn random_feasible_set(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .groups
            .iter()
            .flat_map(|g| sample(rng, g.users.len(), g.take).into_iter().map(|i| g.users[i]))
            .collect();
        v.sort_unstable();
        v
    }

    /// Feasible set maximising `sum_{k in V} weights[k]`; ties go to lower
    /// user indices.
    pub fn best_feasible_set(&self, weights: &[f64]) -> (f64, Vec<usize>) {
        let mut total = 0.0;
        let mut picked = Vec::new();
        for g in &self.groups {
            let mut ranked = g.users.clone();
            ranked.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
            for &k in &ranked[..g.take] {
                total += weights[k];
                picked.push(k);
            }
        }
        picked.sort_unstable();
        (total, picked)
    }
}

/// An activation pattern and nulling plan, reduced to per-helper offers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    pub pattern: ActivationPattern,
    pub mode: DeliveryMode,
    pub nulling: NullingPlan,
    pub offers: Vec<HelperOffer>,
}

impl Configuration {
    pub fn policy_count(&self) -> u64 {
        self.offers.iter().map(HelperOffer::choice_count).fold(1u64, u64::saturating_mul)
    }

    pub fn policy(&self, picks: Vec<Vec<usize>>) -> Policy {
        Policy {
            pattern: self.pattern,
            mode: self.mode,
            nulling: self.nulling.clone(),
            choices: self
                .offers
                .iter()
                .zip(picks)
                .map(|(o, users)| FeasibleSet { helper: o.helper, users, mode: o.feasible_mode })
                .collect(),
        }
    }

    fn rate_vector_for(&self, picks: &[Vec<usize>], users: usize) -> RateVector {
        let mut r = RateVector::zeros(users);
        for (offer, pick) in self.offers.iter().zip(picks) {
            for &k in pick {
                r.0[k] = offer.rate();
            }
        }
        r
    }

    /// All policies of this configuration with their rate vectors.
    pub fn expand(&self, users: usize) -> Vec<(Policy, RateVector)> {
        self.offers
            .iter()
            .map(HelperOffer::feasible_sets)
            .multi_cartesian_product()
            .map(|picks| {
                let r = self.rate_vector_for(&picks, users);
                (self.policy(picks), r)
            })
            .collect()
    }

    fn sample_policies(&self, users: usize, count: u64, rng: &mut ChaCha8Rng) -> Vec<(Policy, RateVector)> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        // bounded retries keep tiny configurations from spinning
        for _ in 0..count.saturating_mul(4) {
            if out.len() as u64 >= count {
                break;
            }
            let picks: Vec<Vec<usize>> = self.offers.iter().map(|o| o.random_feasible_set(rng)).collect();
            if seen.insert(picks.clone()) {
                let r = self.rate_vector_for(&picks, users);
                out.push((self.policy(picks), r));
            }
        }
        out
    }

    /// Users this configuration can serve under some policy.
    pub fn servable(&self) -> impl Iterator<Item = usize> + '_ {
        self.offers.iter().flat_map(|o| o.groups.iter().flat_map(|g| g.users.iter().copied()))
    }

    /// Best policy for linear weights over users, with its score and rates.
    pub fn best_response(&self, weights: &[f64]) -> (f64, Vec<Vec<usize>>) {
        let mut score = 0.0;
        let mut picks = Vec::with_capacity(self.offers.len());
        for offer in &self.offers {
            let (w, pick) = offer.best_feasible_set(weights);
            score += offer.rate() * w;
            picks.push(pick);
        }
        (score, picks)
    }
}

/// Everything needed to turn coverage into offers.
#[derive(Clone, Copy, Debug)]
pub struct Instance<'a> {
    pub topology: &'a NetworkTopology,
    pub assignment: &'a ProfileAssignment,
    pub params: &'a PlacementParams,
    /// Spatial multiplexing gain (transmit streams per helper).
    pub mux_gain: usize,
}

impl<'a> Instance<'a> {
    pub fn new(
        topology: &'a NetworkTopology,
        assignment: &'a ProfileAssignment,
        params: &'a PlacementParams,
        mux_gain: usize,
    ) -> Result<Self> {
        if assignment.user_count() != topology.user_count() {
            return Err(Error::InvalidParameters(format!(
                "{} profiles assigned for {} users",
                assignment.user_count(),
                topology.user_count()
            )));
        }
        if assignment.profile_count() != params.profiles {
            return Err(Error::InvalidParameters(format!(
                "assignment has {} profiles, placement expects {}",
                assignment.profile_count(),
                params.profiles
            )));
        }
        if mux_gain == 0 {
            return Err(Error::InvalidParameters("multiplexing gain must be at least 1".into()));
        }
        if topology.helper_count() > ActivationPattern::MAX_HELPERS {
            return Err(Error::InstanceTooLarge(format!(
                "{} helpers exceeds the pattern width of {}",
                topology.helper_count(),
                ActivationPattern::MAX_HELPERS
            )));
        }
        Ok(Instance { topology, assignment, params, mux_gain })
    }

    pub fn user_count(&self) -> usize {
        self.topology.user_count()
    }

    fn offer(&self, helper: usize, covered: &FixedBitSet, feasible_mode: FeasibleMode) -> Option<HelperOffer> {
        let mut by_profile: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for k in covered.ones() {
            by_profile.entry(self.assignment.profile_of(k)).or_default().push(k);
        }
        if by_profile.is_empty() {
            return None;
        }
        let absent = self.params.profiles - by_profile.len();
        let groups = by_profile
            .into_iter()
            .map(|(profile, users)| {
                let take = match feasible_mode {
                    FeasibleMode::SingleStream => 1,
                    FeasibleMode::Ccc => users.len().min(self.mux_gain),
                };
                ProfileGroup { profile, take, users }
            })
            .collect();
        Some(HelperOffer {
            helper,
            transmissions: transmission_count(self.params.profiles, self.params.t, absent),
            feasible_mode,
            groups,
        })
    }

    /// Offers under a pattern and nulling plan, or `None` if nobody is served.
    pub fn configuration(
        &self,
        pattern: ActivationPattern,
        mode: DeliveryMode,
        nulling: NullingPlan,
    ) -> Result<Option<Configuration>> {
        let masks = self.nulling_masks(&nulling, &pattern)?;
        Ok(self.configuration_with_masks(pattern, mode, nulling, &masks))
    }

    fn nulling_masks(&self, nulling: &NullingPlan, pattern: &ActivationPattern) -> Result<Vec<Option<FixedBitSet>>> {
        let k = self.user_count();
        let mut masks = vec![None; self.topology.helper_count()];
        for (i, users) in nulling.iter() {
            if !pattern.is_active(i) {
                return Err(Error::InconsistentPolicy(format!("nulling plan references inactive helper {i}")));
            }
            let mut set = FixedBitSet::with_capacity(k);
            for &u in users {
                if u >= k {
                    return Err(Error::InconsistentPolicy(format!("nulled user {u} out of range")));
                }
                set.insert(u);
            }
            masks[i] = Some(set);
        }
        Ok(masks)
    }

    fn configuration_with_masks(
        &self,
        pattern: ActivationPattern,
        mode: DeliveryMode,
        nulling: NullingPlan,
        masks: &[Option<FixedBitSet>],
    ) -> Option<Configuration> {
        let feasible_mode = match mode {
            DeliveryMode::Ccc => FeasibleMode::Ccc,
            _ => FeasibleMode::SingleStream,
        };
        let offers: Vec<HelperOffer> = self
            .topology
            .coverage_bits(&pattern, masks)
            .into_iter()
            .filter_map(|(i, covered)| self.offer(i, &covered, feasible_mode))
            .collect();
        (!offers.is_empty()).then_some(Configuration { pattern, mode, nulling, offers })
    }

    fn patterns(&self, limits: &Limits) -> Result<(Vec<ActivationPattern>, bool)> {
        let h = self.topology.helper_count();
        if h == 0 {
            return Ok((Vec::new(), false));
        }
        if h <= limits.max_exhaustive_helpers {
            return Ok(((1..(1u64 << h)).map(|m| ActivationPattern::from_mask(h, m)).collect(), false));
        }
        if !limits.sampling {
            return Err(Error::InstanceTooLarge(format!(
                "{h} helpers exceeds the exhaustive limit of {}",
                limits.max_exhaustive_helpers
            )));
        }
        let budget = 1usize << limits.max_exhaustive_helpers.min(20);
        let mut rng = ChaCha8Rng::seed_from_u64(limits.seed);
        let mut masks: Vec<u64> = (0..h).map(|i| 1u64 << i).collect();
        let mut seen: HashSet<u64> = masks.iter().copied().collect();
        let full = if h == 64 { u64::MAX } else { (1u64 << h) - 1 };
        for _ in 0..budget * 4 {
            if masks.len() >= budget {
                break;
            }
            let m = rng.gen::<u64>() & full;
            if m != 0 && seen.insert(m) {
                masks.push(m);
            }
        }
        masks.sort_unstable();
        Ok((masks.into_iter().map(|m| ActivationPattern::from_mask(h, m)).collect(), true))
    }

    /// Nonempty nulling plans for a pattern, sampled beyond the per-pattern cap.
    pub fn nulling_plans(&self, pattern: &ActivationPattern, limits: &Limits) -> Result<(Vec<NullingPlan>, bool)> {
        let candidates = self.topology.interference_bits(pattern);
        let helpers: Vec<usize> = candidates.iter().map(|(i, _)| *i).collect();
        let per_helper: Vec<Vec<Vec<usize>>> =
            candidates.iter().map(|(_, set)| nulling_choices(&set.ones().collect::<Vec<_>>(), self.mux_gain)).collect();
        let sizes: Vec<usize> = candidates.iter().map(|(_, s)| s.count_ones(..)).collect();
        let total = nulling_plan_count(&sizes, self.mux_gain);
        if total <= limits.max_plans_per_pattern {
            let plans = per_helper
                .iter()
                .map(|c| c.iter())
                .multi_cartesian_product()
                .map(|picked| NullingPlan::from_sets(helpers.iter().copied().zip(picked.into_iter().cloned())))
                .filter(|p| !p.is_empty())
                .collect();
            return Ok((plans, false));
        }
        if !limits.sampling {
            return Err(Error::InstanceTooLarge(format!(
                "pattern {pattern:?} has {total} nulling plans, limit {}",
                limits.max_plans_per_pattern
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(limits.seed ^ pattern.mask().wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut seen = HashSet::new();
        let mut plans = Vec::new();
        for _ in 0..limits.max_plans_per_pattern * 4 {
            if plans.len() as u64 >= limits.max_plans_per_pattern {
                break;
            }
            let plan = NullingPlan::from_sets(
                helpers.iter().zip(&per_helper).map(|(&i, c)| (i, c[rng.gen_range(0..c.len())].clone())),
            );
            if !plan.is_empty() && seen.insert(plan.clone()) {
                plans.push(plan);
            }
        }
        plans.sort();
        Ok((plans, true))
    }

    /// Configurations for one pattern under `mode`, SISO baseline first.
    fn pattern_configurations(
        &self,
        pattern: ActivationPattern,
        mode: DeliveryMode,
        limits: &Limits,
    ) -> Result<(Vec<Configuration>, bool)> {
        let no_masks = vec![None; self.topology.helper_count()];
        let mut out = Vec::new();
        let mut sampled = false;
        out.extend(self.configuration_with_masks(pattern, DeliveryMode::Siso, NullingPlan::default(), &no_masks));
        match mode {
            DeliveryMode::Siso => {}
            DeliveryMode::Ccc => {
                out.extend(self.configuration_with_masks(
                    pattern,
                    DeliveryMode::Ccc,
                    NullingPlan::default(),
                    &no_masks,
                ));
            }
            DeliveryMode::Ir => {
                let (plans, was_sampled) = self.nulling_plans(&pattern, limits)?;
                sampled |= was_sampled;
                for plan in plans {
                    let masks = self.nulling_masks(&plan, &pattern)?;
                    out.extend(self.configuration_with_masks(pattern, DeliveryMode::Ir, plan, &masks));
                }
            }
        }
        Ok((out, sampled))
    }

    /// All configurations for `mode` in canonical order (pattern mask, then
    /// baseline before MISO variants). SISO-baseline configurations are
    /// included for every mode.
    pub fn configurations(&self, mode: DeliveryMode, limits: &Limits) -> Result<ConfigurationSet> {
        let (patterns, patterns_sampled) = self.patterns(limits)?;
        let per_pattern: Vec<Result<(Vec<Configuration>, bool)>> =
            patterns.par_iter().map(|&p| self.pattern_configurations(p, mode, limits)).collect();
        let mut configurations = Vec::new();
        let mut sampled = patterns_sampled;
        for r in per_pattern {
            let (cs, s) = r?;
            sampled |= s;
            configurations.extend(cs);
        }
        Ok(ConfigurationSet { configurations, sampled })
    }

    /// Effectiveness of every nonempty nulling plan on `pattern`: a plan is
    /// effective when one of its rate vectors is not weakly dominated by a
    /// rate vector of any of its strict sub-plans (the empty plan included).
    pub fn effective_nulling_plans(&self, pattern: ActivationPattern) -> Result<Vec<(NullingPlan, bool)>> {
        let limits = Limits { max_plans_per_pattern: u64::MAX, sampling: false, ..Limits::default() };
        let (plans, _) = self.nulling_plans(&pattern, &limits)?;
        let users = self.user_count();
        let vectors_of = |plan: &NullingPlan| -> Result<Vec<RateVector>> {
            let mode = if plan.is_empty() { DeliveryMode::Siso } else { DeliveryMode::Ir };
            Ok(self
                .configuration(pattern, mode, plan.clone())?
                .map(|c| c.expand(users).into_iter().map(|(_, r)| r).collect())
                .unwrap_or_default())
        };
        let mut all = vec![(NullingPlan::default(), vectors_of(&NullingPlan::default())?)];
        for p in &plans {
            all.push((p.clone(), vectors_of(p)?));
        }
        let mut out = Vec::new();
        for (plan, vectors) in &all[1..] {
            let reference: Vec<&RateVector> =
                all.iter().filter(|(q, _)| q != plan && q.is_subplan_of(plan)).flat_map(|(_, vs)| vs.iter()).collect();
            let effective = vectors.iter().any(|v| !reference.iter().any(|w| w.dominates(v)));
            out.push((plan.clone(), effective));
        }
        Ok(out)
    }

    /// Rates of a policy; users outside every chosen feasible set get zero.
    pub fn policy_rate_vector(&self, policy: &Policy) -> Result<RateVector> {
        policy_rate_vector(policy, self.assignment, self.params)
    }

    /// The concrete transmissions realising a policy.
    pub fn policy_schedule(&self, policy: &Policy, requests: &Requests) -> Result<TransmissionSchedule> {
        let mut helpers = Vec::with_capacity(policy.choices.len());
        for choice in &policy.choices {
            if !policy.pattern.is_active(choice.helper) {
                return Err(Error::InconsistentPolicy(format!("feasible set for inactive helper {}", choice.helper)));
            }
            let transmissions = match choice.mode {
                FeasibleMode::SingleStream => build_codewords(
                    choice.helper,
                    &choice.users,
                    self.assignment,
                    requests,
                    self.params,
                    policy.nulling.nulled_at(choice.helper),
                )?,
                FeasibleMode::Ccc => build_ccc_messages(
                    choice.helper,
                    &choice.users,
                    self.assignment,
                    requests,
                    self.params,
                    self.mux_gain,
                )?,
            };
            helpers.push(HelperSchedule { helper: choice.helper, transmissions });
        }
        Ok(TransmissionSchedule { helpers })
    }
}

/// Rates of a policy; users outside every chosen feasible set get zero.
pub fn policy_rate_vector(
    policy: &Policy,
    assignment: &ProfileAssignment,
    params: &PlacementParams,
) -> Result<RateVector> {
    let mut rates = RateVector::zeros(assignment.user_count());
    let mut seen = HashSet::new();
    for choice in &policy.choices {
        if choice.users.is_empty() {
            continue;
        }
        let absent = absent_profiles(&choice.users, assignment);
        let rate = 1.0 / transmission_count(params.profiles, params.t, absent) as f64;
        for &k in &choice.users {
            if k >= rates.0.len() {
                return Err(Error::InconsistentPolicy(format!("user {k} out of range")));
            }
            if !seen.insert(k) {
                return Err(Error::InconsistentPolicy(format!("user {k} chosen by two helpers")));
            }
            rates.0[k] = rate;
        }
    }
    Ok(rates)
}

#[derive(Clone, Debug, Default)]
pub struct ConfigurationSet {
    pub configurations: Vec<Configuration>,
    /// Whether patterns or nulling plans were sampled rather than enumerated.
    pub sampled: bool,
}

impl ConfigurationSet {
    pub fn policy_count(&self) -> u64 {
        self.configurations.iter().map(Configuration::policy_count).fold(0u64, u64::saturating_add)
    }

    /// Drops configurations whose offers repeat an earlier one; they span
    /// the same rate vectors.
    pub fn dedup_offers(&mut self) {
        let mut seen: HashMap<Vec<HelperOffer>, ()> = HashMap::new();
        self.configurations.retain(|c| seen.insert(c.offers.clone(), ()).is_none());
    }
}

/// Result of [`enumerate_policies`].
#[derive(Clone, Debug)]
pub struct PolicyEnumeration {
    pub policies: Vec<(Policy, RateVector)>,
    /// Whether anything was sampled instead of enumerated exhaustively.
    pub sampled: bool,
}

/// Materialises every `(Policy, RateVector)` for `mode`, in deterministic
/// order. Beyond `limits.max_policies` policies are sampled per
/// configuration (or the call fails when sampling is off).
pub fn enumerate_policies(instance: &Instance<'_>, mode: DeliveryMode, limits: &Limits) -> Result<PolicyEnumeration> {
    let set = instance.configurations(mode, limits)?;
    let total = set.policy_count();
    let users = instance.user_count();
    if total <= limits.max_policies {
        let policies = set.configurations.par_iter().flat_map_iter(|c| c.expand(users)).collect();
        return Ok(PolicyEnumeration { policies, sampled: set.sampled });
    }
    if !limits.sampling {
        return Err(Error::InstanceTooLarge(format!("{total} policies exceeds the limit of {}", limits.max_policies)));
    }
    let per_config = (limits.max_policies / set.configurations.len().max(1) as u64).max(1);
    let policies = set
        .configurations
        .par_iter()
        .enumerate()
        .flat_map_iter(|(idx, c)| {
            if c.policy_count() <= per_config {
                c.expand(users)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(limits.seed.wrapping_add(idx as u64));
                c.sample_policies(users, per_config, &mut rng)
            }
        })
        .collect();
    Ok(PolicyEnumeration { policies, sampled: true })
}

/// Removes duplicates and every vector weakly dominated by another one.
/// Survivors keep their first-occurrence order.
pub fn prune_rate_vectors(vectors: &[RateVector]) -> Vec<RateVector> {
    let sums: Vec<f64> = vectors.iter().map(|v| v.0.iter().sum()).collect();
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    // larger sums first: a later vector can never strictly dominate an earlier one
    order.sort_by(|&a, &b| sums[b].total_cmp(&sums[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        if !kept.iter().any(|&j| vectors[j].dominates(&vectors[i])) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept.into_iter().map(|i| vectors[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::two_helper_instance;

    fn rv(v: &[f64]) -> RateVector {
        RateVector(v.to_vec())
    }

    #[test]
    fn prune_examples() {
        assert_eq!(prune_rate_vectors(&[rv(&[1.0, 0.0]), rv(&[1.0, 1.0])]), vec![rv(&[1.0, 1.0])]);
        let inc = vec![rv(&[1.0, 0.0]), rv(&[0.0, 1.0])];
        assert_eq!(prune_rate_vectors(&inc), inc);
        assert_eq!(prune_rate_vectors(&[rv(&[0.5]), rv(&[0.5])]), vec![rv(&[0.5])]);
        assert!(prune_rate_vectors(&[]).is_empty());
    }

    #[test]
    fn two_helper_rate_vectors() {
        let (topo, a) = two_helper_instance();
        let params = PlacementParams::new(3, 1).unwrap();
        let inst = Instance::new(&topo, &a, &params, 2).unwrap();
        let h2 = ActivationPattern::from_bits(&[false, true]);
        let cfg = inst.configuration(h2, DeliveryMode::Siso, NullingPlan::default()).unwrap().unwrap();
        assert_eq!(cfg.policy_count(), 2);
        let third = 1.0 / 3.0;
        let expanded = cfg.expand(5);
        assert_eq!(expanded[0].1, rv(&[0.0, 0.0, third, third, 0.0]));
        assert_eq!(expanded[1].1, rv(&[0.0, 0.0, 0.0, third, third]));
        assert_eq!(inst.policy_rate_vector(&expanded[0].0).unwrap(), expanded[0].1);
    }

    #[test]
    fn overlapping_choices_rejected() {
        let (topo, a) = two_helper_instance();
        let params = PlacementParams::new(3, 1).unwrap();
        let both = ActivationPattern::from_bits(&[true, true]);
        let policy = Policy {
            pattern: both,
            mode: DeliveryMode::Siso,
            nulling: NullingPlan::default(),
            choices: vec![
                FeasibleSet { helper: 0, users: vec![2], mode: FeasibleMode::SingleStream },
                FeasibleSet { helper: 1, users: vec![2], mode: FeasibleMode::SingleStream },
            ],
        };
        assert!(matches!(policy_rate_vector(&policy, &a, &params), Err(Error::InconsistentPolicy(_))));
        let _ = topo;
    }

    #[test]
    fn single_user_unicast() {
        let topo = NetworkTopology::from_reachability(1, &[vec![0]], &[vec![0]]).unwrap();
        let a = ProfileAssignment::new(vec![0], 1).unwrap();
        let params = PlacementParams::new(1, 0).unwrap();
        let inst = Instance::new(&topo, &a, &params, 1).unwrap();
        let all = enumerate_policies(&inst, DeliveryMode::Siso, &Limits::default()).unwrap();
        assert_eq!(all.policies.len(), 1);
        assert_eq!(all.policies[0].1, rv(&[1.0]));
    }

    #[test]
    fn strict_limits_fail_instead_of_sampling() {
        let (topo, a) = two_helper_instance();
        let params = PlacementParams::new(3, 1).unwrap();
        let inst = Instance::new(&topo, &a, &params, 2).unwrap();
        let strict = Limits { max_policies: 2, sampling: false, ..Limits::default() };
        assert!(matches!(enumerate_policies(&inst, DeliveryMode::Siso, &strict), Err(Error::InstanceTooLarge(_))));
        let sampled = Limits { max_policies: 2, ..Limits::default() };
        let got = enumerate_policies(&inst, DeliveryMode::Siso, &sampled).unwrap();
        assert!(got.sampled && !got.policies.is_empty());
    }

    #[test]
    fn best_feasible_set_takes_heaviest() {
        let offer = HelperOffer {
            helper: 0,
            transmissions: 3,
            feasible_mode: FeasibleMode::Ccc,
            groups: vec![
                ProfileGroup { profile: 0, take: 2, users: vec![0, 1, 2] },
                ProfileGroup { profile: 1, take: 1, users: vec![3] },
            ],
        };
        let (w, pick) = offer.best_feasible_set(&[0.1, 0.5, 0.3, 1.0]);
        assert_eq!(pick, vec![1, 2, 3]);
        assert!((w - 1.8).abs() < 1e-12);
        assert_eq!(offer.choice_count(), 3);
        assert_eq!(offer.feasible_sets().len(), 3);
    }
}
