//! Cache-replication placement: `L` profiles, each chunk split into `C(L, t)`
//! subpackets `W_{n,S}` indexed by `t`-subsets of profiles. A user with
//! profile `l` caches exactly the subpackets whose index set contains `l`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, k_subsets, ProfileSet, MAX_PROFILES};
use crate::error::{Error, Result};

/// Tolerance when checking that `L * M / N` is integral.
const INTEGRALITY_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementParams {
    /// Number of cache profiles `L`.
    pub profiles: usize,
    /// Replication parameter `t = L M / N`.
    pub t: usize,
}

impl PlacementParams {
    /// Builds parameters from chunk counts, rejecting non-integral `t`.
    pub fn from_counts(profiles: usize, cache_chunks: u64, total_chunks: u64) -> Result<Self> {
        Ok(PlacementParams { profiles, t: compute_t(profiles, cache_chunks, total_chunks)? })
    }

    /// Builds parameters from the cache ratio `M / N`. A single profile is
    /// the uncoded baseline and always gets `t = 0`.
    pub fn from_ratio(profiles: usize, cache_ratio: f64) -> Result<Self> {
        check_profiles(profiles)?;
        if !(cache_ratio > 0.0 && cache_ratio < 1.0) {
            return Err(Error::InvalidParameters(format!("cache ratio M/N must lie in (0, 1), got {cache_ratio}")));
        }
        if profiles == 1 {
            return Ok(PlacementParams { profiles, t: 0 });
        }
        let t = profiles as f64 * cache_ratio;
        let rounded = t.round();
        if (t - rounded).abs() > INTEGRALITY_SLACK {
            return Err(Error::InvalidParameters(format!("L * M/N = {t} is not an integer")));
        }
        Self::new(profiles, rounded as usize)
    }

    pub fn new(profiles: usize, t: usize) -> Result<Self> {
        check_profiles(profiles)?;
        if t >= profiles && !(profiles == 1 && t == 0) {
            return Err(Error::InvalidParameters(format!("t = {t} must be below L = {profiles}")));
        }
        Ok(PlacementParams { profiles, t })
    }

    /// Subpackets per chunk, `C(L, t)`.
    pub fn subpackets_per_chunk(&self) -> u64 {
        binomial(self.profiles, self.t)
    }

    /// Subpacket index sets in canonical lexicographic order.
    pub fn subpacket_indices(&self) -> Vec<ProfileSet> {
        subpacket_indices(self.profiles, self.t)
    }
}

fn check_profiles(profiles: usize) -> Result<()> {
    if profiles == 0 || profiles > MAX_PROFILES {
        return Err(Error::InvalidParameters(format!("profile count must be in 1..={MAX_PROFILES}, got {profiles}")));
    }
    Ok(())
}

/// `t = L M / N`, which must be an integer.
pub fn compute_t(profiles: usize, cache_chunks: u64, total_chunks: u64) -> Result<usize> {
    check_profiles(profiles)?;
    if cache_chunks == 0 || cache_chunks >= total_chunks {
        return Err(Error::InvalidParameters(format!("need 0 < M < N, got M = {cache_chunks}, N = {total_chunks}")));
    }
    let num = profiles as u64 * cache_chunks;
    if !num.is_multiple_of(total_chunks) {
        return Err(Error::InvalidParameters(format!("L M / N = {num}/{total_chunks} is not an integer")));
    }
    Ok((num / total_chunks) as usize)
}

/// All `t`-subsets of `[L]`, lexicographic.
pub fn subpacket_indices(profiles: usize, t: usize) -> Vec<ProfileSet> {
    k_subsets(profiles, t).map(|s| s.into_iter().collect()).collect()
}

/// Identity of one subpacket `W_{chunk, profile_set}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubpacketIndex {
    pub chunk: usize,
    pub profile_set: ProfileSet,
}

impl SubpacketIndex {
    pub fn new(chunk: usize, profile_set: ProfileSet) -> Self {
        SubpacketIndex { chunk, profile_set }
    }
}

/// Whether a user of `profile` holds `subpacket` in its cache.
pub fn cached_at(profile: usize, subpacket: &SubpacketIndex) -> bool {
    subpacket.profile_set.contains(profile)
}

/// Subpackets of `chunk` that a user of `profile` lacks; `C(L-1, t)` of them.
pub fn missing_subpackets(profile: usize, chunk: usize, profiles: usize, t: usize) -> Vec<SubpacketIndex> {
    subpacket_indices(profiles, t)
        .into_iter()
        .filter(|s| !s.contains(profile))
        .map(|s| SubpacketIndex::new(chunk, s))
        .collect()
}

/// Profile of every user, 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileAssignment {
    profiles: Vec<usize>,
    profile_count: usize,
}

impl ProfileAssignment {
    pub fn new(profiles: Vec<usize>, profile_count: usize) -> Result<Self> {
        check_profiles(profile_count)?;
        if let Some((k, &p)) = profiles.iter().enumerate().find(|(_, &p)| p >= profile_count) {
            return Err(Error::InvalidParameters(format!("user {k} has profile {p}, but L = {profile_count}")));
        }
        Ok(ProfileAssignment { profiles, profile_count })
    }

    pub fn profile_of(&self, user: usize) -> usize {
        self.profiles[user]
    }

    pub fn profiles(&self) -> &[usize] {
        &self.profiles
    }

    pub fn profile_count(&self) -> usize {
        self.profile_count
    }

    pub fn user_count(&self) -> usize {
        self.profiles.len()
    }
}

/// I.i.d. uniform profile draw per user, reproducible from `seed`.
pub fn assign_profiles(users: usize, profile_count: usize, seed: u64) -> Result<ProfileAssignment> {
    check_profiles(profile_count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles = (0..users).map(|_| rng.gen_range(0..profile_count)).collect();
    ProfileAssignment::new(profiles, profile_count)
}

/// Chunk requested by each user. Every user asks for a different chunk, so
/// user `k` requests chunk `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Requests(Vec<usize>);

impl Requests {
    pub fn distinct(users: usize) -> Self {
        Requests((0..users).collect())
    }

    pub fn new(chunks: Vec<usize>) -> Result<Self> {
        let mut sorted = chunks.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameters("two users request the same chunk".into()));
        }
        Ok(Requests(chunks))
    }

    pub fn chunk_of(&self, user: usize) -> usize {
        self.0[user]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
