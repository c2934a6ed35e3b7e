//! Independent reception check for schedules.
//!
//! Works only from a [`TransmissionSchedule`], the topology and the cache
//! placement. Each user hears, per slot, every active helper whose
//! interference range covers it, minus whatever is nulled at it. Signals
//! from two or more helpers collide; a lone signal from a helper whose
//! transmission range does not cover the user is lost. A surviving term set
//! is decodable when exactly one term is not already cached.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::delivery::{NullingPlan, TransmissionKind, TransmissionSchedule};
use crate::error::{Error, Result};
use crate::placement::{cached_at, subpacket_indices, PlacementParams, ProfileAssignment, Requests, SubpacketIndex};
use crate::policy::RateVector;
use crate::topology::{ActivationPattern, NetworkTopology};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceivedTerm {
    pub subpacket: SubpacketIndex,
    pub origin: usize,
    pub intended_user: usize,
}

/// What one user hears in one slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub user: usize,
    pub slot: usize,
    /// Terms that reach the user after nulling.
    pub received_terms: Vec<ReceivedTerm>,
    /// Terms suppressed at this user by helper-level or per-stream nulling.
    pub nulled_terms: Vec<ReceivedTerm>,
    /// Surviving terms come from two or more helpers.
    pub collided: bool,
    /// The only surviving origin is outside transmission range.
    pub out_of_range: bool,
}

impl Observation {
    pub fn decodable_origin(&self) -> Option<usize> {
        if self.collided || self.out_of_range {
            None
        } else {
            self.received_terms.first().map(|t| t.origin)
        }
    }
}

struct Scene<'a> {
    schedule: &'a TransmissionSchedule,
    topology: &'a NetworkTopology,
    /// Effective helper-level nulling per schedule entry.
    helper_nulls: Vec<BTreeSet<usize>>,
}

impl<'a> Scene<'a> {
    fn new(
        schedule: &'a TransmissionSchedule,
        topology: &'a NetworkTopology,
        pattern: &ActivationPattern,
        nulling: &NullingPlan,
    ) -> Result<Self> {
        let h = topology.helper_count();
        let k = topology.user_count();
        let mut seen = BTreeSet::new();
        for hs in &schedule.helpers {
            if hs.helper >= h {
                return Err(Error::Schema(format!("helper {} out of range", hs.helper)));
            }
            if !pattern.is_active(hs.helper) {
                return Err(Error::Schema(format!("helper {} transmits but is inactive", hs.helper)));
            }
            if !seen.insert(hs.helper) {
                return Err(Error::Schema(format!("helper {} listed twice", hs.helper)));
            }
            for tx in &hs.transmissions {
                if tx.helper != hs.helper {
                    return Err(Error::Schema(format!(
                        "transmission tagged helper {} inside schedule of helper {}",
                        tx.helper, hs.helper
                    )));
                }
                if tx.terms.is_empty() {
                    return Err(Error::Schema("transmission without terms".into()));
                }
                let users = tx
                    .helper_nulling
                    .iter()
                    .chain(tx.terms.iter().flat_map(|t| std::iter::once(&t.intended_user).chain(&t.nulled_users)));
                if let Some(u) = users.into_iter().find(|&&u| u >= k) {
                    return Err(Error::Schema(format!("user {u} out of range")));
                }
            }
        }
        for (i, _) in nulling.iter() {
            if !pattern.is_active(i) {
                return Err(Error::Schema(format!("nulling plan names inactive helper {i}")));
            }
        }
        let helper_nulls =
            schedule.helpers.iter().map(|hs| nulling.nulled_at(hs.helper).iter().copied().collect()).collect();
        Ok(Scene { schedule, topology, helper_nulls })
    }

    fn observe(&self, user: usize, slot: usize) -> Observation {
        let mut received = Vec::new();
        let mut nulled = Vec::new();
        let mut origins = BTreeSet::new();
        for (hs, plan_nulls) in self.schedule.helpers.iter().zip(&self.helper_nulls) {
            let Some(tx) = hs.transmissions.get(slot) else { continue };
            if !self.topology.in_inter(hs.helper, user) {
                continue;
            }
            let whole = plan_nulls.contains(&user) || tx.helper_nulling.contains(&user);
            for term in &tx.terms {
                let r =
                    ReceivedTerm { subpacket: term.subpacket, origin: hs.helper, intended_user: term.intended_user };
                if whole || term.nulled_users.contains(&user) {
                    nulled.push(r);
                } else {
                    origins.insert(hs.helper);
                    received.push(r);
                }
            }
        }
        let collided = origins.len() > 1;
        let out_of_range = !collided && origins.iter().next().is_some_and(|&h| !self.topology.in_trans(h, user));
        Observation { user, slot, received_terms: received, nulled_terms: nulled, collided, out_of_range }
    }
}

/// Every user's view of every slot.
pub fn simulate_reception(
    schedule: &TransmissionSchedule,
    topology: &NetworkTopology,
    pattern: &ActivationPattern,
    nulling: &NullingPlan,
) -> Result<Vec<Observation>> {
    let scene = Scene::new(schedule, topology, pattern, nulling)?;
    let mut out = Vec::new();
    for user in 0..topology.user_count() {
        for slot in 0..schedule.slots() {
            out.push(scene.observe(user, slot));
        }
    }
    Ok(out)
}

/// Everything [`verify_schedule`] needs besides the schedule itself.
#[derive(Clone, Copy, Debug)]
pub struct VerifyContext<'a> {
    pub topology: &'a NetworkTopology,
    pub assignment: &'a ProfileAssignment,
    pub params: &'a PlacementParams,
    pub requests: &'a Requests,
    pub mux_gain: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    Schema,
    NullingBudget,
    Collision,
    OutOfRange,
    Undecodable,
    InterferenceSplit,
    IncompleteChunk,
    RateMismatch,
    UnexpectedDelivery,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub user: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slot: Option<usize>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UserLedger {
    pub user: usize,
    pub claimed_rate: f64,
    /// Terms heard in slots the user could decode from.
    pub received: usize,
    pub cancelled_by_cache: usize,
    pub cancelled_by_nulling: usize,
    /// New subpackets of the user's own chunk.
    pub recovered: Vec<SubpacketIndex>,
    /// New subpackets of other users' chunks picked up along the way.
    pub overheard: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub findings: Vec<Finding>,
    pub users: Vec<UserLedger>,
}

impl VerificationReport {
    fn failed(kind: FindingKind, message: String) -> Self {
        VerificationReport {
            passed: false,
            findings: vec![Finding { kind, user: None, slot: None, message }],
            users: Vec::new(),
        }
    }
}

/// Checks that every user with a positive claimed rate recovers its whole
/// chunk within its helper's schedule, at exactly the claimed rate, and
/// that nobody else is delivered anything of their own chunk. Problems are
/// reported as findings, never returned as errors.
pub fn verify_schedule(
    schedule: &TransmissionSchedule,
    pattern: &ActivationPattern,
    nulling: &NullingPlan,
    ctx: &VerifyContext<'_>,
    claimed: &RateVector,
) -> VerificationReport {
    let topology = ctx.topology;
    let users = topology.user_count();
    if claimed.0.len() != users || ctx.assignment.user_count() != users || ctx.requests.len() != users {
        return VerificationReport::failed(
            FindingKind::Schema,
            format!("rate vector, assignment and requests must all cover {users} users"),
        );
    }
    let scene = match Scene::new(schedule, topology, pattern, nulling) {
        Ok(s) => s,
        Err(e) => return VerificationReport::failed(FindingKind::Schema, e.to_string()),
    };

    let mut findings = Vec::new();
    let budget = ctx.mux_gain.saturating_sub(1);
    for hs in &schedule.helpers {
        let plan_nulls = nulling.nulled_at(hs.helper).len();
        for (slot, tx) in hs.transmissions.iter().enumerate() {
            let helper_level = tx.helper_nulling.len().max(plan_nulls);
            let worst_term = tx.terms.iter().map(|t| t.nulled_users.len()).max().unwrap_or(0);
            if helper_level > budget || worst_term > budget {
                findings.push(Finding {
                    kind: FindingKind::NullingBudget,
                    user: None,
                    slot: Some(slot),
                    message: format!(
                        "helper {} nulls {} users per stream, budget {budget}",
                        hs.helper,
                        helper_level.max(worst_term)
                    ),
                });
            }
        }
    }

    // who each helper's terms are meant for
    let mut serving: HashMap<usize, BTreeSet<usize>> = HashMap::new();
    for hs in &schedule.helpers {
        for tx in &hs.transmissions {
            for t in &tx.terms {
                serving.entry(t.intended_user).or_default().insert(hs.helper);
            }
        }
    }

    let slots = schedule.slots();
    let all_sets = subpacket_indices(ctx.params.profiles, ctx.params.t);
    let mut ledgers = Vec::with_capacity(users);
    for user in 0..users {
        let profile = ctx.assignment.profile_of(user);
        let chunk = ctx.requests.chunk_of(user);
        let mut ledger = UserLedger { user, claimed_rate: claimed.0[user], ..Default::default() };
        let mut user_findings = Vec::new();
        let mut recovered: BTreeSet<SubpacketIndex> = BTreeSet::new();
        let mut last_useful_slot = None;

        for slot in 0..slots {
            let obs = scene.observe(user, slot);
            let meant_for_me = obs.received_terms.iter().chain(&obs.nulled_terms).any(|t| t.intended_user == user);
            if obs.collided || obs.out_of_range {
                if meant_for_me {
                    let kind = if obs.collided { FindingKind::Collision } else { FindingKind::OutOfRange };
                    user_findings.push(Finding {
                        kind,
                        user: Some(user),
                        slot: Some(slot),
                        message: "term for this user is lost".into(),
                    });
                }
                continue;
            }
            if obs.received_terms.is_empty() {
                if meant_for_me {
                    user_findings.push(Finding {
                        kind: FindingKind::Undecodable,
                        user: Some(user),
                        slot: Some(slot),
                        message: "every term for this user is nulled at it".into(),
                    });
                }
                continue;
            }
            ledger.received += obs.received_terms.len();
            ledger.cancelled_by_nulling += obs.nulled_terms.len();
            let unknown: Vec<&ReceivedTerm> =
                obs.received_terms.iter().filter(|t| !cached_at(profile, &t.subpacket)).collect();
            ledger.cancelled_by_cache += obs.received_terms.len() - unknown.len();
            match unknown.as_slice() {
                [single] => {
                    if single.subpacket.chunk == chunk {
                        recovered.insert(single.subpacket);
                        last_useful_slot = Some(slot);
                        let origin = single.origin;
                        let tx = &schedule.helpers.iter().find(|h| h.helper == origin).unwrap().transmissions[slot];
                        if tx.kind == TransmissionKind::Superposition {
                            check_split(user, slot, tx, ctx, &mut user_findings);
                        }
                    } else {
                        ledger.overheard += 1;
                    }
                }
                [] => {}
                _ => {
                    if meant_for_me {
                        user_findings.push(Finding {
                            kind: FindingKind::Undecodable,
                            user: Some(user),
                            slot: Some(slot),
                            message: format!("{} unknown terms in one slot", unknown.len()),
                        });
                    }
                }
            }
        }

        let served = ledger.claimed_rate > 0.0;
        if served {
            let missing: Vec<_> = all_sets
                .iter()
                .filter(|s| !s.contains(profile))
                .map(|&s| SubpacketIndex::new(chunk, s))
                .filter(|s| !recovered.contains(s))
                .collect();
            if !missing.is_empty() {
                user_findings.push(Finding {
                    kind: FindingKind::IncompleteChunk,
                    user: Some(user),
                    slot: None,
                    message: format!("{} subpackets of chunk {chunk} never recovered", missing.len()),
                });
            }
            let helpers = serving.get(&user).cloned().unwrap_or_default();
            if helpers.len() != 1 {
                user_findings.push(Finding {
                    kind: FindingKind::RateMismatch,
                    user: Some(user),
                    slot: None,
                    message: format!("served by {} helpers", helpers.len()),
                });
            } else {
                let h = *helpers.iter().next().unwrap();
                let n = schedule.helpers.iter().find(|x| x.helper == h).unwrap().transmissions.len();
                let within = last_useful_slot.is_none_or(|s| s < n);
                if (ledger.claimed_rate * n as f64 - 1.0).abs() > 1e-9 || !within {
                    user_findings.push(Finding {
                        kind: FindingKind::RateMismatch,
                        user: Some(user),
                        slot: None,
                        message: format!("one chunk per {n} slots, claimed rate {}", ledger.claimed_rate),
                    });
                }
            }
        } else if !recovered.is_empty() || serving.contains_key(&user) {
            user_findings.push(Finding {
                kind: FindingKind::UnexpectedDelivery,
                user: Some(user),
                slot: None,
                message: "user with zero claimed rate is sent its chunk".into(),
            });
        }
        ledger.recovered = recovered.into_iter().collect();
        ledger.passed = user_findings.is_empty();
        findings.extend(user_findings);
        ledgers.push(ledger);
    }
    VerificationReport { passed: findings.is_empty(), findings, users: ledgers }
}

/// In a superposition message every other stream must be removed from the
/// decoding user by exactly one mechanism: its cache (different profile)
/// or a null (same profile).
fn check_split(
    user: usize,
    slot: usize,
    tx: &crate::delivery::Transmission,
    ctx: &VerifyContext<'_>,
    findings: &mut Vec<Finding>,
) {
    let profile = ctx.assignment.profile_of(user);
    for term in tx.terms.iter().filter(|t| t.intended_user != user) {
        let by_cache = cached_at(profile, &term.subpacket);
        let by_null = term.nulled_users.contains(&user);
        let same_profile = ctx.assignment.profile_of(term.intended_user) == profile;
        if by_cache == by_null || by_null != same_profile {
            findings.push(Finding {
                kind: FindingKind::InterferenceSplit,
                user: Some(user),
                slot: Some(slot),
                message: format!("stream for user {} removed by cache={by_cache} null={by_null}", term.intended_user),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delivery::DeliveryMode;
    use crate::policy::{Instance, Policy};
    use crate::topology::two_helper_instance;

    const THIRD: f64 = 1.0 / 3.0;

    struct Fixture {
        topo: NetworkTopology,
        assignment: ProfileAssignment,
        params: PlacementParams,
        requests: Requests,
    }

    fn fixture() -> Fixture {
        let (topo, assignment) = two_helper_instance();
        Fixture { topo, assignment, params: PlacementParams::new(3, 1).unwrap(), requests: Requests::distinct(5) }
    }

    fn ctx(f: &Fixture) -> VerifyContext<'_> {
        VerifyContext {
            topology: &f.topo,
            assignment: &f.assignment,
            params: &f.params,
            requests: &f.requests,
            mux_gain: 2,
        }
    }

    fn policies(f: &Fixture, bits: &[bool], mode: DeliveryMode, plan: NullingPlan) -> Vec<(Policy, RateVector)> {
        let inst = Instance::new(&f.topo, &f.assignment, &f.params, 2).unwrap();
        inst.configuration(ActivationPattern::from_bits(bits), mode, plan).unwrap().unwrap().expand(5)
    }

    fn schedule(f: &Fixture, p: &Policy) -> TransmissionSchedule {
        Instance::new(&f.topo, &f.assignment, &f.params, 2).unwrap().policy_schedule(p, &f.requests).unwrap()
    }

    fn cross_nulling_plan() -> NullingPlan {
        NullingPlan::from_sets([(0, vec![2]), (1, vec![1])])
    }

    #[test]
    fn single_helper_policies_pass() {
        let f = fixture();
        for (p, r) in policies(&f, &[false, true], DeliveryMode::Siso, NullingPlan::default()) {
            let report = verify_schedule(&schedule(&f, &p), &p.pattern, &p.nulling, &ctx(&f), &r);
            assert!(report.passed, "{:?}", report.findings);
            for l in report.users.iter().filter(|l| l.claimed_rate > 0.0) {
                assert_eq!(l.recovered.len(), 2);
            }
        }
    }

    #[test]
    fn cross_nulling_passes_and_observes_one_helper() {
        let f = fixture();
        let all = policies(&f, &[true, true], DeliveryMode::Ir, cross_nulling_plan());
        let (p, r) =
            all.iter().find(|(_, r)| r.0 == vec![THIRD, THIRD, THIRD, THIRD, 0.0]).expect("full-coverage policy");
        let s = schedule(&f, p);
        let report = verify_schedule(&s, &p.pattern, &p.nulling, &ctx(&f), r);
        assert!(report.passed, "{:?}", report.findings);

        let obs = simulate_reception(&s, &f.topo, &p.pattern, &p.nulling).unwrap();
        // user 2 sits in both ranges; helper 0 is nulled at it
        let u2 = obs.iter().find(|o| o.user == 2 && o.slot == 0).unwrap();
        assert!(!u2.collided);
        assert_eq!(u2.decodable_origin(), Some(1));
        assert!(u2.nulled_terms.iter().all(|t| t.origin == 0));
        assert!(!u2.nulled_terms.is_empty());
    }

    #[test]
    fn removing_nulls_breaks_cross_nulling() {
        let f = fixture();
        let all = policies(&f, &[true, true], DeliveryMode::Ir, cross_nulling_plan());
        let (p, r) = all.iter().find(|(_, r)| r.0[0] > 0.0 && r.0[3] > 0.0).unwrap();
        let mut s = schedule(&f, p);
        for hs in &mut s.helpers {
            for tx in &mut hs.transmissions {
                tx.helper_nulling.clear();
            }
        }
        let report = verify_schedule(&s, &p.pattern, &NullingPlan::default(), &ctx(&f), r);
        assert!(!report.passed);
        assert!(report.findings.iter().any(|x| x.kind == FindingKind::Collision));
    }

    #[test]
    fn ccc_second_helper_passes() {
        let f = fixture();
        let all = policies(&f, &[false, true], DeliveryMode::Ccc, NullingPlan::default());
        assert_eq!(all.len(), 1);
        let (p, r) = &all[0];
        assert_eq!(r.0, vec![0.0, 0.0, THIRD, THIRD, THIRD]);
        let report = verify_schedule(&schedule(&f, p), &p.pattern, &p.nulling, &ctx(&f), r);
        assert!(report.passed, "{:?}", report.findings);
        assert!(report.users[2].cancelled_by_nulling > 0);
    }

    #[test]
    fn dropping_stream_nulls_breaks_ccc() {
        let f = fixture();
        let (p, r) = policies(&f, &[false, true], DeliveryMode::Ccc, NullingPlan::default()).remove(0);
        let mut s = schedule(&f, &p);
        for tx in &mut s.helpers[0].transmissions {
            for term in &mut tx.terms {
                term.nulled_users.clear();
            }
        }
        let report = verify_schedule(&s, &p.pattern, &p.nulling, &ctx(&f), &r);
        assert!(!report.passed);
    }

    #[test]
    fn wrong_claims_are_flagged() {
        let f = fixture();
        let (p, r) = policies(&f, &[false, true], DeliveryMode::Siso, NullingPlan::default()).remove(0);
        let s = schedule(&f, &p);
        let mut inflated = r.clone();
        inflated.0[2] = 0.5;
        let report = verify_schedule(&s, &p.pattern, &p.nulling, &ctx(&f), &inflated);
        assert!(report.findings.iter().any(|x| x.kind == FindingKind::RateMismatch && x.user == Some(2)));

        let mut hidden = r.clone();
        hidden.0[3] = 0.0;
        let report = verify_schedule(&s, &p.pattern, &p.nulling, &ctx(&f), &hidden);
        assert!(report.findings.iter().any(|x| x.kind == FindingKind::UnexpectedDelivery));

        let mut phantom = r;
        phantom.0[4] = THIRD;
        let report = verify_schedule(&s, &p.pattern, &p.nulling, &ctx(&f), &phantom);
        assert!(report.findings.iter().any(|x| x.kind == FindingKind::IncompleteChunk && x.user == Some(4)));
    }

    #[test]
    fn schema_problems_become_findings() {
        let f = fixture();
        let (p, r) = policies(&f, &[false, true], DeliveryMode::Siso, NullingPlan::default()).remove(0);
        let s = schedule(&f, &p);
        let off = ActivationPattern::from_bits(&[true, false]);
        let report = verify_schedule(&s, &off, &p.nulling, &ctx(&f), &r);
        assert!(!report.passed);
        assert_eq!(report.findings[0].kind, FindingKind::Schema);
        assert!(simulate_reception(&s, &f.topo, &off, &p.nulling).is_err());

        let report = verify_schedule(&s, &p.pattern, &p.nulling, &ctx(&f), &RateVector(vec![0.0; 3]));
        assert_eq!(report.findings[0].kind, FindingKind::Schema);
    }

    #[test]
    fn nulling_budget_is_enforced() {
        let f = fixture();
        let plan = NullingPlan::from_sets([(0, vec![1, 2])]);
        let policy = Policy {
            pattern: ActivationPattern::from_bits(&[true, true]),
            mode: DeliveryMode::Ir,
            nulling: plan.clone(),
            choices: vec![crate::delivery::FeasibleSet {
                helper: 0,
                users: vec![0],
                mode: crate::delivery::FeasibleMode::SingleStream,
            }],
        };
        let s = schedule(&f, &policy);
        let r = RateVector(vec![0.5, 0.0, 0.0, 0.0, 0.0]);
        let report = verify_schedule(&s, &policy.pattern, &plan, &ctx(&f), &r);
        assert!(report.findings.iter().any(|x| x.kind == FindingKind::NullingBudget));
    }
}
