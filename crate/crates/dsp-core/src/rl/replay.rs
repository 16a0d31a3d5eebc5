//! FIFO replay memory.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One interaction record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Bounded FIFO store; pushing past capacity evicts the oldest entry.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    store: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid_argument(
                "replay capacity must be >= 1".to_string(),
            ));
        }
        Ok(ReplayBuffer {
            capacity,
            store: VecDeque::with_capacity(capacity),
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.store.len() == self.capacity {
            self.store.pop_front();
        }
        self.store.push_back(t);
    }

    /// Oldest-first access.
    pub fn get(&self, index: usize) -> Option<&Transition> {
        self.store.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.store.iter()
    }
}
