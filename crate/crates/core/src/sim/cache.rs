//! Array-backed cache states for the simulators.
//!
//! Objects are dense indices, so every structure here is a flat vector
//! indexed by object id that grows on demand.

use std::collections::VecDeque;

use rand::Rng;

use crate::analytic::{Policy, PolicySpec};

const NIL: u32 = u32::MAX;

/// Intrusive doubly linked recency list; the head is the most recent entry.
#[derive(Debug, Clone)]
pub(crate) struct LruList {
    prev: Vec<u32>,
    next: Vec<u32>,
    resident: Vec<bool>,
    head: u32,
    tail: u32,
    len: usize,
    capacity: usize,
}

impl LruList {
    pub(crate) fn new(capacity: usize, objects: usize) -> Self {
        Self {
            prev: vec![NIL; objects],
            next: vec![NIL; objects],
            resident: vec![false; objects],
            head: NIL,
            tail: NIL,
            len: 0,
            capacity,
        }
    }

    fn ensure(&mut self, objects: usize) {
        if objects > self.resident.len() {
            self.prev.resize(objects, NIL);
            self.next.resize(objects, NIL);
            self.resident.resize(objects, false);
        }
    }

    pub(crate) fn contains(&self, m: usize) -> bool {
        self.resident.get(m).copied().unwrap_or(false)
    }

    pub(crate) fn len(&self) -> usize {
        self.len
    }

    fn unlink(&mut self, m: u32) {
        let (p, n) = (self.prev[m as usize], self.next[m as usize]);
        if p == NIL {
            self.head = n;
        } else {
            self.next[p as usize] = n;
        }
        if n == NIL {
            self.tail = p;
        } else {
            self.prev[n as usize] = p;
        }
    }

    fn link_front(&mut self, m: u32) {
        self.prev[m as usize] = NIL;
        self.next[m as usize] = self.head;
        if self.head != NIL {
            self.prev[self.head as usize] = m;
        }
        self.head = m;
        if self.tail == NIL {
            self.tail = m;
        }
    }

    /// Moves a resident object to the most-recent position.
    pub(crate) fn touch(&mut self, m: usize) {
        let m = m as u32;
        if self.head != m {
            self.unlink(m);
            self.link_front(m);
        }
    }

    /// Inserts a non-resident object at the front, evicting the least
    /// recent entry when full.
    pub(crate) fn insert(&mut self, m: usize) -> Option<usize> {
        self.ensure(m + 1);
        debug_assert!(!self.resident[m]);
        let evicted = if self.len == self.capacity {
            let victim = self.tail;
            self.unlink(victim);
            self.resident[victim as usize] = false;
            self.len -= 1;
            Some(victim as usize)
        } else {
            None
        };
        self.link_front(m as u32);
        self.resident[m] = true;
        self.len += 1;
        evicted
    }

    /// Residents from most to least recent.
    pub(crate) fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let mut cur = self.head;
        std::iter::from_fn(move || {
            if cur == NIL {
                None
            } else {
                let m = cur;
                cur = self.next[m as usize];
                Some(m as usize)
            }
        })
    }
}

/// What a single request did to the physical cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessOutcome {
    pub hit: bool,
    /// The requested object was placed in the physical cache.
    pub inserted: bool,
    pub evicted: Option<usize>,
}

impl AccessOutcome {
    const HIT: Self = Self {
        hit: true,
        inserted: false,
        evicted: None,
    };
    const MISS: Self = Self {
        hit: false,
        inserted: false,
        evicted: None,
    };

    fn inserted(evicted: Option<usize>) -> Self {
        Self {
            hit: false,
            inserted: true,
            evicted,
        }
    }
}

/// Contents of one simulated cache.
#[derive(Debug, Clone)]
pub struct CacheState(Kind);

#[derive(Debug, Clone)]
enum Kind {
    Lru(LruList),
    QLru { list: LruList, q: f64 },
    Fifo {
        queue: VecDeque<u32>,
        resident: Vec<bool>,
        capacity: usize,
    },
    Random {
        members: Vec<u32>,
        position: Vec<u32>,
        capacity: usize,
    },
    /// Stages `0..k-1` hold identifiers only; the last stage is the cache.
    KLru { stages: Vec<LruList>, seen: Vec<bool> },
    /// A fixed set of objects that never changes.
    Static { resident: Vec<bool>, len: usize },
}

impl Kind {
    /// Empty cache for objects `0..objects`. LFU holds objects
    /// `0..capacity`, i.e. the most popular ones.
    pub fn new(spec: &PolicySpec, objects: usize) -> Self {
        let c = spec.capacity;
        match spec.policy {
            Policy::Lru => Self::Lru(LruList::new(c, objects)),
            Policy::QLru { q } => Self::QLru {
                list: LruList::new(c, objects),
                q,
            },
            Policy::Fifo => Self::Fifo {
                queue: VecDeque::with_capacity(c),
                resident: vec![false; objects],
                capacity: c,
            },
            Policy::Random => Self::Random {
                members: Vec::with_capacity(c),
                position: vec![NIL; objects],
                capacity: c,
            },
            Policy::KLru { k } => Self::KLru {
                stages: (0..k).map(|_| LruList::new(c, objects)).collect(),
                seen: vec![false; k],
            },
            Policy::Lfu => Self::fixed(0..c.min(objects), objects),
        }
    }

    /// A cache that permanently holds `set`.
    pub fn fixed(set: impl IntoIterator<Item = usize>, objects: usize) -> Self {
        let mut resident = vec![false; objects];
        let mut len = 0;
        for m in set {
            if m >= resident.len() {
                resident.resize(m + 1, false);
            }
            if !resident[m] {
                resident[m] = true;
                len += 1;
            }
        }
        Self::Static { resident, len }
    }

    pub fn contains(&self, m: usize) -> bool {
        match self {
            Self::Lru(list) | Self::QLru { list, .. } => list.contains(m),
            Self::Fifo { resident, .. } | Self::Static { resident, .. } => {
                resident.get(m).copied().unwrap_or(false)
            }
            Self::Random { position, .. } => position.get(m).is_some_and(|p| *p != NIL),
            Self::KLru { stages, .. } => stages.last().is_some_and(|s| s.contains(m)),
        }
    }

    /// Whether stage `stage` of a k-LRU cache holds `m`; other policies have
    /// a single stage.
    pub fn stage_contains(&self, stage: usize, m: usize) -> bool {
        match self {
            Self::KLru { stages, .. } => stages[stage].contains(m),
            _ => stage == 0 && self.contains(m),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Lru(list) | Self::QLru { list, .. } => list.len(),
            Self::Fifo { queue, .. } => queue.len(),
            Self::Random { members, .. } => members.len(),
            Self::KLru { stages, .. } => stages.last().map_or(0, LruList::len),
            Self::Static { len, .. } => *len,
        }
    }

    fn residents(&self) -> Vec<usize> {
        match self {
            Self::Lru(list) | Self::QLru { list, .. } => list.iter().collect(),
            Self::Fifo { queue, .. } => queue.iter().map(|m| *m as usize).collect(),
            Self::Random { members, .. } => members.iter().map(|m| *m as usize).collect(),
            Self::KLru { stages, .. } => stages.last().map(|s| s.iter().collect()).unwrap_or_default(),
            Self::Static { resident, .. } => resident
                .iter()
                .enumerate()
                .filter(|(_, r)| **r)
                .map(|(m, _)| m)
                .collect(),
        }
    }

    /// Serves one request for `m`.
    pub fn access<R: Rng + ?Sized>(&mut self, m: usize, rng: &mut R) -> AccessOutcome {
        match self {
            Self::Lru(list) => {
                if list.contains(m) {
                    list.touch(m);
                    AccessOutcome::HIT
                } else {
                    AccessOutcome::inserted(list.insert(m))
                }
            }
            Self::QLru { list, q } => {
                if list.contains(m) {
                    list.touch(m);
                    AccessOutcome::HIT
                } else if *q >= 1.0 || rng.gen::<f64>() < *q {
                    AccessOutcome::inserted(list.insert(m))
                } else {
                    AccessOutcome::MISS
                }
            }
            Self::Fifo {
                queue,
                resident,
                capacity,
            } => {
                if resident.get(m).copied().unwrap_or(false) {
                    return AccessOutcome::HIT;
                }
                if m >= resident.len() {
                    resident.resize(m + 1, false);
                }
                let evicted = if queue.len() == *capacity {
                    let victim = queue.pop_front().expect("full queue") as usize;
                    resident[victim] = false;
                    Some(victim)
                } else {
                    None
                };
                queue.push_back(m as u32);
                resident[m] = true;
                AccessOutcome::inserted(evicted)
            }
            Self::Random {
                members,
                position,
                capacity,
            } => {
                if position.get(m).is_some_and(|p| *p != NIL) {
                    return AccessOutcome::HIT;
                }
                if m >= position.len() {
                    position.resize(m + 1, NIL);
                }
                let evicted = if members.len() == *capacity {
                    let slot = rng.gen_range(0..members.len());
                    let victim = members[slot] as usize;
                    members[slot] = m as u32;
                    position[victim] = NIL;
                    position[m] = slot as u32;
                    Some(victim)
                } else {
                    position[m] = members.len() as u32;
                    members.push(m as u32);
                    None
                };
                AccessOutcome::inserted(evicted)
            }
            Self::KLru { stages, seen } => {
                for (flag, stage) in seen.iter_mut().zip(stages.iter()) {
                    *flag = stage.contains(m);
                }
                let last = stages.len() - 1;
                let mut outcome = AccessOutcome::MISS;
                for i in 0..stages.len() {
                    let admit = i == 0 || seen[i - 1];
                    let stage = &mut stages[i];
                    if seen[i] {
                        stage.touch(m);
                        if i == last {
                            outcome = AccessOutcome::HIT;
                        }
                    } else if admit {
                        let evicted = stage.insert(m);
                        if i == last {
                            outcome = AccessOutcome::inserted(evicted);
                        }
                    }
                }
                outcome
            }
            Self::Static { resident, .. } => {
                if resident.get(m).copied().unwrap_or(false) {
                    AccessOutcome::HIT
                } else {
                    AccessOutcome::MISS
                }
            }
        }
    }
}

impl CacheState {
    /// Empty cache for objects `0..objects`. LFU holds objects
    /// `0..capacity`, i.e. the most popular ones.
    pub fn new(spec: &PolicySpec, objects: usize) -> Self {
        Self(Kind::new(spec, objects))
    }

    /// A cache that permanently holds `set`.
    pub fn fixed(set: impl IntoIterator<Item = usize>, objects: usize) -> Self {
        Self(Kind::fixed(set, objects))
    }

    pub fn contains(&self, m: usize) -> bool {
        self.0.contains(m)
    }

    /// Whether stage `stage` of a k-LRU cache holds `m`; other policies have
    /// a single stage.
    pub fn stage_contains(&self, stage: usize, m: usize) -> bool {
        self.0.stage_contains(stage, m)
    }

    /// Number of objects in the physical cache.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 0
    }

    /// Objects currently in the physical cache.
    pub fn residents(&self) -> Vec<usize> {
        self.0.residents()
    }

    /// Serves one request for `m`.
    pub fn access<R: Rng + ?Sized>(&mut self, m: usize, rng: &mut R) -> AccessOutcome {
        self.0.access(m, rng)
    }
}
