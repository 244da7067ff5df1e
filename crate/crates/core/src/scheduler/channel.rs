//! Unbounded multiple-writer, single-reader channels connecting pipeline tasks.
//!
//! Senders clone freely; the receiver cannot be cloned, so exactly one task
//! owns the read side. Messages from one sender arrive in the order sent.

use std::sync::mpsc;
use std::time::Duration;

use thiserror::Error;

/// The receiver was dropped; the undelivered message is handed back.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("send after receiver dropped")]
pub struct SendAfterReceiverDropped<T>(pub T);

/// Every sender is gone and the queue is drained.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("channel closed")]
pub struct Closed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TryRecv {
    Empty,
    Closed,
}

#[derive(Debug)]
pub struct Sender<T> {
    inner: mpsc::Sender<T>,
}

impl<T> Clone for Sender<T> {
    fn clone(&self) -> Self {
        Sender { inner: self.inner.clone() }
    }
}

impl<T> Sender<T> {
    /// Never blocks.
    pub fn send(&self, message: T) -> Result<(), SendAfterReceiverDropped<T>> {
        self.inner.send(message).map_err(|e| SendAfterReceiverDropped(e.0))
    }
}

#[derive(Debug)]
pub struct Receiver<T> {
    inner: mpsc::Receiver<T>,
}

impl<T> Receiver<T> {
    /// Blocks until a message arrives or all senders have been dropped.
    pub fn recv(&self) -> Result<T, Closed> {
        self.inner.recv().map_err(|_| Closed)
    }

    pub fn try_recv(&self) -> Result<T, TryRecv> {
        self.inner.try_recv().map_err(|e| match e {
            mpsc::TryRecvError::Empty => TryRecv::Empty,
            mpsc::TryRecvError::Disconnected => TryRecv::Closed,
        })
    }

    /// `Ok(None)` on timeout.
    pub fn recv_timeout(&self, timeout: Duration) -> Result<Option<T>, Closed> {
        match self.inner.recv_timeout(timeout) {
            Ok(m) => Ok(Some(m)),
            Err(mpsc::RecvTimeoutError::Timeout) => Ok(None),
            Err(mpsc::RecvTimeoutError::Disconnected) => Err(Closed),
        }
    }

    /// Drains messages until the channel closes.
    pub fn iter(&self) -> impl Iterator<Item = T> + '_ {
        std::iter::from_fn(move || self.recv().ok())
    }
}

pub fn channel<T>() -> (Sender<T>, Receiver<T>) {
    let (tx, rx) = mpsc::channel();
    (Sender { inner: tx }, Receiver { inner: rx })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifo_single_sender() {
        let (tx, rx) = channel();
        for i in 1..=3 {
            tx.send(i).unwrap();
        }
        drop(tx);
        assert_eq!(rx.iter().collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn per_sender_order_with_two_senders() {
        let (a, rx) = channel();
        let b = a.clone();
        a.send("a1").unwrap();
        b.send("b1").unwrap();
        a.send("a2").unwrap();
        drop((a, b));
        let got: Vec<_> = rx.iter().collect();
        let pa = got.iter().position(|m| *m == "a1").unwrap();
        let pb = got.iter().position(|m| *m == "a2").unwrap();
        assert!(pa < pb);
        assert_eq!(got.len(), 3);
    }

    #[test]
    fn closed_after_senders_drop() {
        let (tx, rx) = channel::<u8>();
        drop(tx);
        assert_eq!(rx.recv(), Err(Closed));
        assert_eq!(rx.try_recv(), Err(TryRecv::Closed));
    }

    #[test]
    fn send_fails_without_receiver() {
        let (tx, rx) = channel();
        drop(rx);
        assert_eq!(tx.send(7), Err(SendAfterReceiverDropped(7)));
    }
}
