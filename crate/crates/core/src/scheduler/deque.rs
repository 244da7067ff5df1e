//! Per-worker work queues. The owner pushes and pops at the bottom; thieves
//! take the oldest item from the top.

use crossbeam_deque::{Steal, Stealer, Worker};
use rand::Rng;

pub struct Deque<T> {
    worker: Worker<T>,
}

/// Shareable handle that steals from one deque's top.
pub struct StealHandle<T> {
    stealer: Stealer<T>,
}

impl<T> Clone for StealHandle<T> {
    fn clone(&self) -> Self {
        StealHandle { stealer: self.stealer.clone() }
    }
}

impl<T> Deque<T> {
    pub fn new() -> Self {
        Deque { worker: Worker::new_lifo() }
    }

    pub fn push(&self, item: T) {
        self.worker.push(item);
    }

    pub fn pop(&self) -> Option<T> {
        self.worker.pop()
    }

    pub fn len(&self) -> usize {
        self.worker.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worker.is_empty()
    }

    pub fn steal_handle(&self) -> StealHandle<T> {
        StealHandle { stealer: self.worker.stealer() }
    }
}

impl<T> Default for Deque<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> StealHandle<T> {
    /// Takes one item from the top. Returns `None` when the victim is empty or
    /// the attempt lost a race with the owner or another thief.
    pub fn steal(&self) -> Option<T> {
        match self.stealer.steal() {
            Steal::Success(item) => Some(item),
            Steal::Empty | Steal::Retry => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.stealer.is_empty()
    }
}

/// One steal attempt against a victim chosen uniformly among the workers
/// other than `thief`.
pub fn steal<T>(thief: usize, victims: &[StealHandle<T>], rng: &mut impl Rng) -> Option<T> {
    if victims.len() < 2 {
        return None;
    }
    let mut victim = rng.gen_range(0..victims.len() - 1);
    if victim >= thief {
        victim += 1;
    }
    victims[victim].steal()
}
