//! Capacity-bounded chunk cache with LRU, FIFO, LFU and RANDOM replacement.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rustc_hash::FxHashMap;

use crate::ccn_node::ContentName;
use crate::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ReplacementPolicy {
    #[default]
    Lru,
    Fifo,
    Lfu,
    Random,
}

impl ReplacementPolicy {
    pub const ALL: [ReplacementPolicy; 4] = [Self::Lru, Self::Fifo, Self::Lfu, Self::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lru => "LRU",
            Self::Fifo => "FIFO",
            Self::Lfu => "LFU",
            Self::Random => "RANDOM",
        }
    }
}

impl fmt::Display for ReplacementPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReplacementPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LRU" => Ok(Self::Lru),
            "FIFO" => Ok(Self::Fifo),
            "LFU" => Ok(Self::Lfu),
            "RANDOM" | "RAND" => Ok(Self::Random),
            other => Err(format!("unknown replacement policy {other:?}")),
        }
    }
}

/// Result of [`ContentStore::insert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    /// The name became resident, possibly displacing a victim.
    Stored { evicted: Option<ContentName> },
    /// Already resident; policy metadata was refreshed as for a hit.
    Refreshed,
    /// Zero-capacity store; nothing happened.
    Rejected,
}

impl Insert {
    pub fn evicted(self) -> Option<ContentName> {
        match self {
            Insert::Stored { evicted } => evicted,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    key: (u64, u64),
    freq: u64,
    inserted: u64,
    // index into `residents` (RANDOM only)
    pos: usize,
}

#[derive(Debug, Clone)]
pub struct ContentStore {
    capacity: usize,
    policy: ReplacementPolicy,
    entries: FxHashMap<ContentName, Slot>,
    // eviction order for LRU/FIFO/LFU: smallest key is the victim
    order: BTreeSet<((u64, u64), ContentName)>,
    residents: Vec<ContentName>,
    rng: SimRng,
    // RANDOM victim index, drawn once and reused until an eviction consumes it
    pending_victim: Option<usize>,
    clock: u64,
}

impl ContentStore {
    pub fn new(capacity: usize, policy: ReplacementPolicy, seed: u64) -> Self {
        ContentStore {
            capacity,
            policy,
            entries: FxHashMap::default(),
            order: BTreeSet::new(),
            residents: Vec::new(),
            rng: SimRng::seed_from_u64(seed),
            pending_victim: None,
            clock: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn policy(&self) -> ReplacementPolicy {
        self.policy
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    /// Presence test without touching policy metadata.
    pub fn contains(&self, name: &ContentName) -> bool {
        self.entries.contains_key(name)
    }

    /// LFU access count of a resident name.
    pub fn frequency(&self, name: &ContentName) -> Option<u64> {
        self.entries.get(name).map(|s| s.freq)
    }

    /// Resident names, sorted.
    pub fn names(&self) -> Vec<ContentName> {
        let mut v: Vec<_> = self.entries.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// Cache lookup. A hit refreshes recency (LRU) or frequency (LFU).
    pub fn lookup(&mut self, name: &ContentName) -> bool {
        if !self.entries.contains_key(name) {
            return false;
        }
        self.touch(name);
        true
    }

    pub fn insert(&mut self, name: ContentName) -> Insert {
        if self.capacity == 0 {
            return Insert::Rejected;
        }
        if self.entries.contains_key(&name) {
            self.touch(&name);
            return Insert::Refreshed;
        }
        let evicted = if self.is_full() { self.evict() } else { None };
        self.clock += 1;
        let inserted = self.clock;
        let mut slot = Slot {
            key: (0, 0),
            freq: 1,
            inserted,
            pos: 0,
        };
        match self.policy {
            ReplacementPolicy::Random => {
                slot.pos = self.residents.len();
                self.residents.push(name);
            }
            _ => {
                slot.key = self.rank(&slot);
                self.order.insert((slot.key, name));
            }
        }
        self.entries.insert(name, slot);
        Insert::Stored { evicted }
    }

    /// The entry the next insertion into a full store would displace.
    /// `None` while the store still has room.
    pub fn peek_victim(&mut self) -> Option<ContentName> {
        if !self.is_full() || self.entries.is_empty() {
            return None;
        }
        match self.policy {
            ReplacementPolicy::Random => {
                let idx = self.random_victim_index();
                Some(self.residents[idx])
            }
            _ => self.order.first().map(|&(_, n)| n),
        }
    }

    pub fn remove(&mut self, name: &ContentName) -> bool {
        let Some(slot) = self.entries.remove(name) else {
            return false;
        };
        match self.policy {
            ReplacementPolicy::Random => {
                self.residents.swap_remove(slot.pos);
                if let Some(moved) = self.residents.get(slot.pos) {
                    self.entries.get_mut(moved).unwrap().pos = slot.pos;
                }
                self.pending_victim = None;
            }
            _ => {
                self.order.remove(&(slot.key, *name));
            }
        }
        true
    }

    fn rank(&self, slot: &Slot) -> (u64, u64) {
        match self.policy {
            ReplacementPolicy::Lru => (self.clock, 0),
            ReplacementPolicy::Fifo => (slot.inserted, 0),
            ReplacementPolicy::Lfu => (slot.freq, slot.inserted),
            ReplacementPolicy::Random => (0, 0),
        }
    }

    fn touch(&mut self, name: &ContentName) {
        self.clock += 1;
        let mut slot = self.entries[name];
        slot.freq += 1;
        if matches!(self.policy, ReplacementPolicy::Lru | ReplacementPolicy::Lfu) {
            self.order.remove(&(slot.key, *name));
            slot.key = self.rank(&slot);
            self.order.insert((slot.key, *name));
        }
        self.entries.insert(*name, slot);
    }

    fn random_victim_index(&mut self) -> usize {
        let len = self.residents.len();
        match self.pending_victim {
            Some(i) if i < len => i,
            _ => {
                let i = self.rng.random_range(0..len);
                self.pending_victim = Some(i);
                i
            }
        }
    }

    fn evict(&mut self) -> Option<ContentName> {
        let victim = match self.policy {
            ReplacementPolicy::Random => {
                let idx = self.random_victim_index();
                self.residents[idx]
            }
            _ => self.order.first().map(|&(_, n)| n)?,
        };
        self.remove(&victim);
        Some(victim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(object: u64) -> ContentName {
        ContentName::new(object, 0)
    }

    #[test]
    fn empty_store_misses() {
        let mut cs = ContentStore::new(4, ReplacementPolicy::Lru, 0);
        assert!(!cs.lookup(&n(1)));
        cs.insert(n(1));
        assert!(cs.lookup(&n(1)));
    }

    #[test]
    fn lru_evicts_least_recent() {
        let mut cs = ContentStore::new(2, ReplacementPolicy::Lru, 0);
        cs.insert(n(1));
        cs.insert(n(2));
        assert!(cs.lookup(&n(1)));
        assert_eq!(
            cs.insert(n(3)),
            Insert::Stored {
                evicted: Some(n(2))
            }
        );
        assert!(cs.contains(&n(1)));
    }

    #[test]
    fn fifo_ignores_recency() {
        let mut cs = ContentStore::new(2, ReplacementPolicy::Fifo, 0);
        cs.insert(n(1));
        cs.insert(n(2));
        assert!(cs.lookup(&n(1)));
        assert_eq!(cs.insert(n(3)).evicted(), Some(n(1)));
    }

    #[test]
    fn lfu_evicts_least_frequent() {
        let mut cs = ContentStore::new(2, ReplacementPolicy::Lfu, 0);
        cs.insert(n(1));
        assert!(cs.lookup(&n(1)));
        cs.insert(n(2));
        assert_eq!(cs.frequency(&n(1)), Some(2));
        assert_eq!(cs.frequency(&n(2)), Some(1));
        assert_eq!(cs.insert(n(3)).evicted(), Some(n(2)));
    }

    #[test]
    fn lfu_ties_go_to_oldest_insertion() {
        let mut cs = ContentStore::new(2, ReplacementPolicy::Lfu, 0);
        cs.insert(n(1));
        cs.insert(n(2));
        assert_eq!(cs.insert(n(3)).evicted(), Some(n(1)));
    }

    #[test]
    fn lfu_counters_reset_on_eviction() {
        let mut cs = ContentStore::new(1, ReplacementPolicy::Lfu, 0);
        cs.insert(n(1));
        cs.lookup(&n(1));
        cs.insert(n(2));
        cs.insert(n(1));
        assert_eq!(cs.frequency(&n(1)), Some(1));
    }

    #[test]
    fn random_with_one_slot_evicts_the_sole_resident() {
        let mut cs = ContentStore::new(1, ReplacementPolicy::Random, 3);
        cs.insert(n(1));
        assert_eq!(cs.insert(n(2)).evicted(), Some(n(1)));
    }

    #[test]
    fn random_peek_matches_next_eviction() {
        let mut cs = ContentStore::new(8, ReplacementPolicy::Random, 17);
        for i in 0..8 {
            cs.insert(n(i));
        }
        for i in 8..40 {
            let peeked = cs.peek_victim();
            assert_eq!(cs.peek_victim(), peeked);
            assert_eq!(cs.insert(n(i)).evicted(), peeked);
        }
    }

    #[test]
    fn zero_capacity_rejects() {
        let mut cs = ContentStore::new(0, ReplacementPolicy::Lru, 0);
        assert_eq!(cs.insert(n(1)), Insert::Rejected);
        assert!(cs.is_empty());
        assert_eq!(cs.peek_victim(), None);
    }

    #[test]
    fn reinsert_refreshes_instead_of_duplicating() {
        let mut cs = ContentStore::new(2, ReplacementPolicy::Lru, 0);
        cs.insert(n(1));
        cs.insert(n(2));
        assert_eq!(cs.insert(n(1)), Insert::Refreshed);
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.insert(n(3)).evicted(), Some(n(2)));
    }

    #[test]
    fn peek_is_none_until_full() {
        let mut cs = ContentStore::new(2, ReplacementPolicy::Fifo, 0);
        cs.insert(n(1));
        assert_eq!(cs.peek_victim(), None);
        cs.insert(n(2));
        assert_eq!(cs.peek_victim(), Some(n(1)));
    }

    #[test]
    fn policy_names_round_trip() {
        for p in ReplacementPolicy::ALL {
            assert_eq!(p.as_str().parse::<ReplacementPolicy>(), Ok(p));
        }
        assert!("MRU".parse::<ReplacementPolicy>().is_err());
    }
}
