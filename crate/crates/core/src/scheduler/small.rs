//! Sequence with four inline slots that spills to the heap on the fifth push.
//!
//! Flow children and per-node work lists are almost always short, so the
//! common case never allocates.

use std::fmt;
use std::ops::Deref;

use smallvec::SmallVec;
use thiserror::Error;

/// Number of elements stored without a heap allocation.
pub const INLINE_CAPACITY: usize = 4;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("index {index} out of range for buffer of length {len}")]
pub struct IndexOutOfRange {
    pub index: usize,
    pub len: usize,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SmallBuffer<T> {
    items: SmallVec<[T; INLINE_CAPACITY]>,
}

impl<T> SmallBuffer<T> {
    pub fn new() -> Self {
        SmallBuffer { items: SmallVec::new() }
    }

    pub fn push(&mut self, item: T) {
        self.items.push(item);
    }

    pub fn pop(&mut self) -> Option<T> {
        self.items.pop()
    }

    pub fn get(&self, index: usize) -> Result<&T, IndexOutOfRange> {
        self.items.get(index).ok_or(IndexOutOfRange { index, len: self.items.len() })
    }

    pub fn get_mut(&mut self, index: usize) -> Result<&mut T, IndexOutOfRange> {
        let len = self.items.len();
        self.items.get_mut(index).ok_or(IndexOutOfRange { index, len })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// True while the contents have never left the inline slots.
    pub fn is_inline(&self) -> bool {
        !self.items.spilled()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.items
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.items
    }

    pub fn retain(&mut self, keep: impl FnMut(&mut T) -> bool) {
        self.items.retain(keep);
    }

    pub fn insert(&mut self, index: usize, item: T) -> Result<(), IndexOutOfRange> {
        if index > self.items.len() {
            return Err(IndexOutOfRange { index, len: self.items.len() });
        }
        self.items.insert(index, item);
        Ok(())
    }
}

impl<T> Default for SmallBuffer<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> Deref for SmallBuffer<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.items
    }
}

impl<T: fmt::Debug> fmt::Debug for SmallBuffer<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.items.iter()).finish()
    }
}

impl<T> FromIterator<T> for SmallBuffer<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        SmallBuffer { items: iter.into_iter().collect() }
    }
}

impl<T> Extend<T> for SmallBuffer<T> {
    fn extend<I: IntoIterator<Item = T>>(&mut self, iter: I) {
        self.items.extend(iter);
    }
}

impl<'a, T> IntoIterator for &'a SmallBuffer<T> {
    type Item = &'a T;
    type IntoIter = std::slice::Iter<'a, T>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

impl<T> IntoIterator for SmallBuffer<T> {
    type Item = T;
    type IntoIter = smallvec::IntoIter<[T; INLINE_CAPACITY]>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.into_iter()
    }
}
