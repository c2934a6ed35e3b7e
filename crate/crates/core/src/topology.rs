//! Geometric network model: helper grid, random user drop, and the
//! per-pattern reachability sets that drive the collision model.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::delivery::NullingPlan;
use crate::error::{Error, Result};
use crate::placement::ProfileAssignment;

/// Distances within this slack of a radius count as inside it.
const RADIUS_SLACK: f64 = 1e-9;

/// Transmission radius used by the reference experiments.
pub const DEFAULT_R_TRANS: f64 = 1.0;
/// Interference radius used by the reference experiments.
pub const DEFAULT_R_INTER: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// On/off selection of helpers transmitting in the same slot.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActivationPattern {
    helpers: usize,
    mask: u64,
}

impl ActivationPattern {
    pub const MAX_HELPERS: usize = 64;

    pub fn from_mask(helpers: usize, mask: u64) -> Self {
        assert!(helpers <= Self::MAX_HELPERS, "too many helpers for a pattern");
        let keep = if helpers == 64 { u64::MAX } else { (1u64 << helpers) - 1 };
        ActivationPattern { helpers, mask: mask & keep }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mask = bits.iter().enumerate().fold(0u64, |m, (i, &b)| if b { m | (1 << i) } else { m });
        Self::from_mask(bits.len(), mask)
    }

    /// Pattern with exactly the listed helpers active.
    pub fn with_active(helpers: usize, active: &[usize]) -> Self {
        Self::from_mask(helpers, active.iter().fold(0, |m, &i| m | (1 << i)))
    }

    pub fn helper_count(&self) -> usize {
        self.helpers
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn is_active(&self, helper: usize) -> bool {
        helper < self.helpers && self.mask & (1 << helper) != 0
    }

    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.helpers).filter(move |&i| self.is_active(i))
    }

    pub fn active_count(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.helpers).map(|i| self.is_active(i)).collect()
    }
}

impl std::fmt::Debug for ActivationPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = self.bits().iter().map(|&b| if b { '1' } else { '0' }).collect();
        write!(f, "[{s}]")
    }
}

impl Serialize for ActivationPattern {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.bits().into_iter().map(u8::from))
    }
}

impl<'de> Deserialize<'de> for ActivationPattern {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(deserializer)?;
        if bits.len() > Self::MAX_HELPERS || bits.iter().any(|&b| b > 1) {
            return Err(serde::de::Error::custom("pattern must be at most 64 bits of 0/1"));
        }
        let bools: Vec<bool> = bits.into_iter().map(|b| b == 1).collect();
        Ok(Self::from_bits(&bools))
    }
}

/// Helpers, users and the reachability relations between them.
///
/// Immutable once built. `in_trans(i, k)` implies `in_inter(i, k)`.
#[derive(Clone, Debug)]
pub struct NetworkTopology {
    helper_positions: Option<Vec<Point2D>>,
    user_positions: Option<Vec<Point2D>>,
    helper_count: usize,
    user_count: usize,
    r_trans: f64,
    r_inter: f64,
    trans: Vec<FixedBitSet>,
    inter: Vec<FixedBitSet>,
}

impl NetworkTopology {
    pub fn from_coordinates(helpers: Vec<Point2D>, users: Vec<Point2D>, r_trans: f64, r_inter: f64) -> Result<Self> {
        if !(r_trans > 0.0 && r_trans.is_finite()) {
            return Err(Error::InvalidTopology(format!("r_trans must be positive, got {r_trans}")));
        }
        if !(r_inter >= r_trans && r_inter.is_finite()) {
            return Err(Error::InvalidTopology(format!("r_inter ({r_inter}) must be at least r_trans ({r_trans})")));
        }
        if let Some(p) = helpers.iter().chain(&users).find(|p| !p.is_finite()) {
            return Err(Error::InvalidTopology(format!("non-finite coordinate {p:?}")));
        }
        let reach = |radius: f64| -> Vec<FixedBitSet> {
            helpers
                .iter()
                .map(|h| {
                    let mut set = FixedBitSet::with_capacity(users.len());
                    for (k, u) in users.iter().enumerate() {
                        if h.distance(u) <= radius + RADIUS_SLACK {
                            set.insert(k);
                        }
                    }
                    set
                })
                .collect()
        };
        let trans = reach(r_trans);
        let inter = reach(r_inter);
        Ok(NetworkTopology {
            helper_count: helpers.len(),
            user_count: users.len(),
            helper_positions: Some(helpers),
            user_positions: Some(users),
            r_trans,
            r_inter,
            trans,
            inter,
        })
    }

    /// Builds a topology from explicit per-helper user lists.
    pub fn from_reachability(user_count: usize, trans: &[Vec<usize>], inter: &[Vec<usize>]) -> Result<Self> {
        if trans.len() != inter.len() {
            return Err(Error::InvalidTopology(format!(
                "{} transmission lists but {} interference lists",
                trans.len(),
                inter.len()
            )));
        }
        let to_bits = |lists: &[Vec<usize>]| -> Result<Vec<FixedBitSet>> {
            lists
                .iter()
                .map(|list| {
                    let mut set = FixedBitSet::with_capacity(user_count);
                    for &k in list {
                        if k >= user_count {
                            return Err(Error::InvalidTopology(format!("user {k} out of range (K = {user_count})")));
                        }
                        set.insert(k);
                    }
                    Ok(set)
                })
                .collect()
        };
        let trans = to_bits(trans)?;
        let inter = to_bits(inter)?;
        for (i, (t, n)) in trans.iter().zip(&inter).enumerate() {
            if !t.is_subset(n) {
                return Err(Error::InvalidTopology(format!(
                    "helper {i}: transmission set is not inside the interference set"
                )));
            }
        }
        Ok(NetworkTopology {
            helper_positions: None,
            user_positions: None,
            helper_count: trans.len(),
            user_count,
            r_trans: DEFAULT_R_TRANS,
            r_inter: DEFAULT_R_INTER,
            trans,
            inter,
        })
    }

    pub fn helper_count(&self) -> usize {
        self.helper_count
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn r_trans(&self) -> f64 {
        self.r_trans
    }

    pub fn r_inter(&self) -> f64 {
        self.r_inter
    }

    pub fn helper_positions(&self) -> Option<&[Point2D]> {
        self.helper_positions.as_deref()
    }

    pub fn user_positions(&self) -> Option<&[Point2D]> {
        self.user_positions.as_deref()
    }

    pub fn in_trans(&self, helper: usize, user: usize) -> bool {
        self.trans[helper].contains(user)
    }

    pub fn in_inter(&self, helper: usize, user: usize) -> bool {
        self.inter[helper].contains(user)
    }

    pub fn trans_set(&self, helper: usize) -> &FixedBitSet {
        &self.trans[helper]
    }

    pub fn inter_set(&self, helper: usize) -> &FixedBitSet {
        &self.inter[helper]
    }

    /// Users inside no helper's transmission range; they can never be served.
    pub fn unreachable_users(&self) -> Vec<usize> {
        (0..self.user_count).filter(|&k| !(0..self.helper_count).any(|i| self.in_trans(i, k))).collect()
    }

    fn check_pattern(&self, pattern: &ActivationPattern) -> Result<()> {
        if pattern.helper_count() != self.helper_count {
            return Err(Error::InconsistentPolicy(format!(
                "pattern has {} helpers, topology has {}",
                pattern.helper_count(),
                self.helper_count
            )));
        }
        Ok(())
    }

    /// Users each active helper can serve: inside its transmission range, not
    /// nulled by the helper itself, and for every other active helper either
    /// outside its interference range or nulled by it.
    pub fn coverage_sets(
        &self,
        pattern: &ActivationPattern,
        nulling: &NullingPlan,
    ) -> Result<BTreeMap<usize, Vec<usize>>> {
        self.check_pattern(pattern)?;
        for (helper, users) in nulling.iter() {
            if !pattern.is_active(helper) {
                return Err(Error::InconsistentPolicy(format!("nulling plan references inactive helper {helper}")));
            }
            if let Some(&k) = users.iter().find(|&&k| k >= self.user_count) {
                return Err(Error::InconsistentPolicy(format!("nulled user {k} out of range")));
            }
        }
        let masks: Vec<Option<FixedBitSet>> = (0..self.helper_count)
            .map(|i| {
                nulling.get(i).map(|users| {
                    let mut set = FixedBitSet::with_capacity(self.user_count);
                    set.extend(users.iter().copied());
                    set
                })
            })
            .collect();
        Ok(self.coverage_bits(pattern, &masks).into_iter().map(|(i, set)| (i, set.ones().collect())).collect())
    }

    /// Bitset form of [`coverage_sets`](Self::coverage_sets); `nulled[i]` is
    /// the nulling set of helper `i` if any. The pattern is not validated.
    pub fn coverage_bits(
        &self,
        pattern: &ActivationPattern,
        nulled: &[Option<FixedBitSet>],
    ) -> Vec<(usize, FixedBitSet)> {
        // blocked_by[j] = users hit by helper j's signal (inter minus its nulls)
        let blocked_by: Vec<Option<FixedBitSet>> = (0..self.helper_count)
            .map(|j| {
                pattern.is_active(j).then(|| {
                    let mut hit = self.inter[j].clone();
                    if let Some(Some(z)) = nulled.get(j) {
                        hit.difference_with(z);
                    }
                    hit
                })
            })
            .collect();
        pattern
            .active()
            .map(|i| {
                let mut set = self.trans[i].clone();
                if let Some(Some(z)) = nulled.get(i) {
                    set.difference_with(z);
                }
                for (j, hit) in blocked_by.iter().enumerate() {
                    if j != i {
                        if let Some(hit) = hit {
                            set.difference_with(hit);
                        }
                    }
                }
                (i, set)
            })
            .collect()
    }

    /// Users in the interference range of an active helper that some other
    /// active helper could transmit to; the only useful nulling targets.
    pub fn interference_candidates(&self, pattern: &ActivationPattern) -> Result<BTreeMap<usize, Vec<usize>>> {
        self.check_pattern(pattern)?;
        Ok(self.interference_bits(pattern).into_iter().map(|(i, set)| (i, set.ones().collect())).collect())
    }

    pub(crate) fn interference_bits(&self, pattern: &ActivationPattern) -> Vec<(usize, FixedBitSet)> {
        pattern
            .active()
            .map(|i| {
                let mut reachable_elsewhere = FixedBitSet::with_capacity(self.user_count);
                for j in pattern.active().filter(|&j| j != i) {
                    reachable_elsewhere.union_with(&self.trans[j]);
                }
                reachable_elsewhere.intersect_with(&self.inter[i]);
                (i, reachable_elsewhere)
            })
            .collect()
    }

    pub fn to_document(&self, assignment: Option<&ProfileAssignment>) -> TopologyDocument {
        let network = match (&self.helper_positions, &self.user_positions) {
            (Some(helpers), Some(users)) => NetworkSpec::Coordinates {
                helpers: helpers.clone(),
                users: users.clone(),
                r_trans: self.r_trans,
                r_inter: self.r_inter,
            },
            _ => NetworkSpec::Reachability {
                users: self.user_count,
                trans: self.trans.iter().map(|s| s.ones().collect()).collect(),
                inter: self.inter.iter().map(|s| s.ones().collect()).collect(),
            },
        };
        TopologyDocument {
            network,
            profile_count: assignment.map(|a| a.profile_count()),
            profiles: assignment.map(|a| a.profiles().to_vec()),
        }
    }
}

/// JSON form of a topology, optionally carrying a profile assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologyDocument {
    #[serde(flatten)]
    pub network: NetworkSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NetworkSpec {
    Coordinates { helpers: Vec<Point2D>, users: Vec<Point2D>, r_trans: f64, r_inter: f64 },
    Reachability { users: usize, trans: Vec<Vec<usize>>, inter: Vec<Vec<usize>> },
}

impl TopologyDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidTopology(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serializes")
    }

    pub fn build(&self) -> Result<(NetworkTopology, Option<ProfileAssignment>)> {
        let topology = match &self.network {
            NetworkSpec::Coordinates { helpers, users, r_trans, r_inter } => {
                NetworkTopology::from_coordinates(helpers.clone(), users.clone(), *r_trans, *r_inter)?
            }
            NetworkSpec::Reachability { users, trans, inter } => {
                NetworkTopology::from_reachability(*users, trans, inter)?
            }
        };
        let assignment = match (&self.profiles, self.profile_count) {
            (Some(profiles), count) => {
                if profiles.len() != topology.user_count() {
                    return Err(Error::InvalidTopology(format!(
                        "{} profiles for {} users",
                        profiles.len(),
                        topology.user_count()
                    )));
                }
                let count = count.unwrap_or_else(|| profiles.iter().max().map_or(1, |m| m + 1));
                Some(ProfileAssignment::new(profiles.clone(), count)?)
            }
            (None, _) => None,
        };
        Ok((topology, assignment))
    }
}

const TWO_HELPER_JSON: &str = include_str!("../fixtures/two_helper.json");

/// The two-helper, five-user reference network with its profile assignment
/// (three profiles). Users and helpers are 0-based.
pub fn two_helper_instance() -> (NetworkTopology, ProfileAssignment) {
    let doc = TopologyDocument::from_json(TWO_HELPER_JSON).expect("bundled fixture parses");
    let (topology, assignment) = doc.build().expect("bundled fixture is valid");
    (topology, assignment.expect("bundled fixture carries profiles"))
}

/// Raw text of the bundled reference fixture.
pub fn two_helper_fixture() -> &'static str {
    TWO_HELPER_JSON
}

/// Centers of a hexagonal grid of unit-radius cells: the central cell first,
/// then each ring walked in a fixed angular order. Neighbouring centers are
/// `sqrt(3)` apart.
pub fn build_hex_grid(rings: usize) -> Vec<Point2D> {
    // axial directions for pointy-top layout
    const DIRS: [(i64, i64); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];
    let to_point = |q: i64, r: i64| {
        let s3 = 3f64.sqrt();
        Point2D::new(s3 * (q as f64 + r as f64 / 2.0), 1.5 * r as f64)
    };
    let mut centers = vec![Point2D::new(0.0, 0.0)];
    for ring in 1..=rings as i64 {
        let (mut q, mut r) = (DIRS[4].0 * ring, DIRS[4].1 * ring);
        for &(dq, dr) in &DIRS {
            for _ in 0..ring {
                centers.push(to_point(q, r));
                q += dq;
                r += dr;
            }
        }
    }
    centers
}

/// Drops a Poisson number of users (mean `users_per_helper * H`) uniformly
/// over the union of the helpers' transmission disks.
pub fn place_users(helpers: &[Point2D], r_trans: f64, users_per_helper: f64, seed: u64) -> Result<Vec<Point2D>> {
    if helpers.is_empty() {
        return Err(Error::InvalidTopology("no helpers to place users around".into()));
    }
    if !(users_per_helper > 0.0 && users_per_helper.is_finite()) {
        return Err(Error::InvalidParameters(format!("users per helper must be positive, got {users_per_helper}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = users_per_helper * helpers.len() as f64;
    let poisson = Poisson::new(mean).map_err(|e| Error::InvalidParameters(e.to_string()))?;
    let count = poisson.sample(&mut rng) as usize;

    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for h in helpers {
        min_x = min_x.min(h.x - r_trans);
        max_x = max_x.max(h.x + r_trans);
        min_y = min_y.min(h.y - r_trans);
        max_y = max_y.max(h.y + r_trans);
    }
    let mut users = Vec::with_capacity(count);
    while users.len() < count {
        let p = Point2D::new(rng.gen_range(min_x..=max_x), rng.gen_range(min_y..=max_y));
        if helpers.iter().any(|h| h.distance(&p) <= r_trans) {
            users.push(p);
        }
    }
    Ok(users)
}
