use alloc::vec::Vec;

use rand::Rng;

/// One stored experience. `action` holds one sub-action index per branch.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<usize>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Column-wise minibatch: `states` and `next_states` are `len x state_len`
/// row-major, `actions` is `len x branches`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Batch {
    pub states: Vec<f64>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<f64>,
    pub terminals: Vec<bool>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn push(&mut self, t: &Transition) {
        self.states.extend_from_slice(&t.state);
        self.actions.extend_from_slice(&t.action);
        self.rewards.push(t.reward);
        self.next_states.extend_from_slice(&t.next_state);
        self.terminals.push(t.terminal);
    }

    pub fn from_transitions<'a>(items: impl IntoIterator<Item = &'a Transition>) -> Self {
        let mut batch = Self::default();
        for t in items {
            batch.push(t);
        }
        batch
    }

    /// Sub-action chosen by row `row` in branch `b`.
    pub fn action(&self, row: usize, b: usize) -> usize {
        let branches = self.actions.len() / self.len();
        self.actions[row * branches + b]
    }
}

/// Fixed-capacity ring of transitions; the oldest entry is overwritten
/// first once full.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    /// Slot the next push writes to once the ring is full.
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self { capacity, items: Vec::new(), head: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    /// Transitions from newest to oldest.
    pub fn iter_newest_first(&self) -> impl Iterator<Item = &Transition> {
        let n = self.items.len();
        let start = if n < self.capacity { n } else { self.head };
        (1..=n).map(move |i| &self.items[(start + n - i) % n])
    }

    /// Transitions from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let n = self.items.len();
        let start = if n < self.capacity { 0 } else { self.head };
        (0..n).map(move |i| &self.items[(start + i) % n])
    }

    /// Uniform minibatch without replacement; `None` while the buffer holds
    /// fewer than `size` transitions.
    pub fn sample<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Option<Batch> {
        if size == 0 || self.items.len() < size {
            return None;
        }
        let picks = rand::seq::index::sample(rng, self.items.len(), size);
        Some(Batch::from_transitions(picks.iter().map(|i| &self.items[i])))
    }
}
