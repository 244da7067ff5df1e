use std::collections::VecDeque;

use super::TokenizerError;

/// Pending characters plus the point where script output is spliced in.
///
/// The insertion point sits just before the next unconsumed character and
/// moves past each inserted run, so consecutive writes keep their order.
#[derive(Debug, Clone, Default)]
pub struct InputStream {
    pending: VecDeque<char>,
    insertion_offset: usize,
    ended: bool,
    fed: usize,
    inserted: usize,
    consumed: usize,
}

impl InputStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn feed(&mut self, chunk: &str) -> Result<(), TokenizerError> {
        if self.ended {
            return Err(TokenizerError::FedAfterEnd);
        }
        let before = self.pending.len();
        self.pending.extend(chunk.chars());
        self.fed += self.pending.len() - before;
        Ok(())
    }

    pub fn insert(&mut self, text: &str) -> Result<(), TokenizerError> {
        if self.ended {
            return Err(TokenizerError::InsertAfterEnd);
        }
        let tail = self.pending.split_off(self.insertion_offset);
        let before = self.pending.len();
        self.pending.extend(text.chars());
        let added = self.pending.len() - before;
        self.pending.extend(tail);
        self.insertion_offset += added;
        self.inserted += added;
        Ok(())
    }

    pub fn end(&mut self) -> Result<(), TokenizerError> {
        if self.ended {
            return Err(TokenizerError::DoubleEnd);
        }
        self.ended = true;
        Ok(())
    }

    pub fn peek(&self) -> Option<char> {
        self.pending.front().copied()
    }

    pub fn advance(&mut self) {
        if self.pending.pop_front().is_some() {
            self.consumed += 1;
            self.insertion_offset = self.insertion_offset.saturating_sub(1);
        }
    }

    pub fn is_ended(&self) -> bool {
        self.ended
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    pub fn pending_text(&self) -> String {
        self.pending.iter().collect()
    }

    pub fn total_fed(&self) -> usize {
        self.fed
    }

    pub fn total_inserted(&self) -> usize {
        self.inserted
    }

    pub fn total_consumed(&self) -> usize {
        self.consumed
    }
}
