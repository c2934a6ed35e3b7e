//! Small combinatorial helpers shared by placement and delivery.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest supported profile count. Profile sets are stored as a `u32` mask.
pub const MAX_PROFILES: usize = 32;

/// Binomial coefficient, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial overflow")
}

/// All `k`-subsets of `0..n` in lexicographic order of their sorted members.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).combinations(k)
}

/// Set of cache profiles (0-based) packed into a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct ProfileSet(u32);

impl ProfileSet {
    pub const EMPTY: ProfileSet = ProfileSet(0);

    pub fn from_bits(bits: u32) -> Self {
        ProfileSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn singleton(profile: usize) -> Self {
        assert!(profile < MAX_PROFILES, "profile {profile} out of range");
        ProfileSet(1 << profile)
    }

    pub fn contains(self, profile: usize) -> bool {
        profile < MAX_PROFILES && self.0 & (1 << profile) != 0
    }

    pub fn insert(&mut self, profile: usize) {
        *self = self.with(profile);
    }

    pub fn with(self, profile: usize) -> Self {
        ProfileSet(self.0 | Self::singleton(profile).0)
    }

    pub fn without(self, profile: usize) -> Self {
        ProfileSet(self.0 & !Self::singleton(profile).0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_PROFILES).filter(move |&p| self.contains(p))
    }
}

impl FromIterator<usize> for ProfileSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(ProfileSet::EMPTY, ProfileSet::with)
    }
}

impl fmt::Debug for ProfileSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ProfileSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ProfileSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let members = Vec::<usize>::deserialize(deserializer)?;
        if let Some(&bad) = members.iter().find(|&&p| p >= MAX_PROFILES) {
            return Err(serde::de::Error::custom(format!(
                "profile {bad} exceeds the supported maximum of {MAX_PROFILES}"
            )));
        }
        Ok(members.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_matches_pascal() {
        for n in 0..30 {
            for k in 0..=n + 1 {
                let expected = if k == 0 {
                    1
                } else if k > n {
                    0
                } else {
                    binomial(n - 1, k - 1) + binomial(n - 1, k)
                };
                if n > 0 {
                    assert_eq!(binomial(n, k), expected, "C({n},{k})");
                }
            }
        }
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(32, 16), 601_080_390);
    }

    #[test]
    fn subsets_are_lexicographic() {
        let all: Vec<_> = k_subsets(4, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(k_subsets(3, 0).count(), 1);
    }

    #[test]
    fn profile_set_ops() {
        let s: ProfileSet = [0, 2].into_iter().collect();
        assert!(s.contains(2) && !s.contains(1));
        assert_eq!(s.without(2), ProfileSet::singleton(0));
        assert_eq!(s.len(), 2);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[0,2]");
        assert_eq!(serde_json::from_str::<ProfileSet>(&json).unwrap(), s);
        assert!(serde_json::from_str::<ProfileSet>("[40]").is_err());
    }
}
