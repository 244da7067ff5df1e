//! Concurrency primitives: work-stealing tree traversals, pipeline channels,
//! and the inline-capacity buffer.

pub mod channel;
pub mod deque;
pub mod small;
pub mod traversal;

pub use channel::{channel, Closed, Receiver, SendAfterReceiverDropped, Sender};
pub use deque::{steal, Deque, StealHandle};
pub use small::{IndexOutOfRange, SmallBuffer, INLINE_CAPACITY};
pub use traversal::{
    execute_traversal, traverse_bottom_up, traverse_top_down, Children, Direction, NodeSlots, Scope, TraversalError,
    TraversalOptions, TraversalStats, TraversalTree, TreeShape, DEFAULT_CUTOFF,
};
