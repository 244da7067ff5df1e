//! Parallel tree traversals over a work-stealing worker pool.
//!
//! A traversal visits each participating node exactly once. Top-down visits a
//! node strictly before its descendants; bottom-up strictly after them. Each
//! visit gets exclusive access to its own slot in a [`NodeSlots`] table plus
//! shared access to the neighbours whose visits are already complete: the
//! parent (top-down) or the children (bottom-up). Those ordering rules are
//! what make the slot table safe to share without locks.

use std::cell::UnsafeCell;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use rand::rngs::SmallRng;
use rand::SeedableRng;
use thiserror::Error;

use super::deque::{steal, Deque, StealHandle};

/// Subtrees with at most this many nodes are processed by one worker without
/// further scheduling.
pub const DEFAULT_CUTOFF: usize = 16;

/// Shape of a tree addressed by dense `usize` indices.
pub trait TraversalTree: Sync {
    fn root(&self) -> usize;
    /// Upper bound (exclusive) on node indices.
    fn node_capacity(&self) -> usize;
    fn children(&self, node: usize) -> &[usize];
    fn parent(&self, node: usize) -> Option<usize>;
    /// Number of nodes in the subtree rooted at `node`, itself included.
    fn subtree_size(&self, node: usize) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    TopDown,
    BottomUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraversalOptions {
    pub workers: usize,
    pub cutoff: usize,
}

impl TraversalOptions {
    pub fn with_workers(workers: usize) -> Self {
        TraversalOptions { workers, cutoff: DEFAULT_CUTOFF }
    }
}

impl Default for TraversalOptions {
    fn default() -> Self {
        let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        TraversalOptions { workers, cutoff: DEFAULT_CUTOFF }
    }
}

/// Which nodes take part in a traversal.
#[derive(Debug, Clone, Copy)]
pub enum Scope<'a> {
    Full,
    /// Bottom-up: only flagged nodes are visited; the flagged set must be
    /// closed under taking parents. Top-down: a flagged node is visited even
    /// when its parent's visit declined to descend.
    Subset(&'a [bool]),
}

impl Scope<'_> {
    fn contains(&self, node: usize) -> bool {
        match self {
            Scope::Full => true,
            Scope::Subset(flags) => flags.get(node).copied().unwrap_or(false),
        }
    }

    fn forces(&self, node: usize) -> bool {
        match self {
            Scope::Full => false,
            Scope::Subset(flags) => flags.get(node).copied().unwrap_or(false),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraversalError {
    #[error("visit panicked: {0}")]
    PanicPropagated(String),
    #[error("traversal needs at least one worker")]
    NoWorkers,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TraversalStats {
    pub visits_per_worker: Vec<usize>,
    pub steals: usize,
}

impl TraversalStats {
    pub fn total_visits(&self) -> usize {
        self.visits_per_worker.iter().sum()
    }
}

/// Per-node mutable state shared with traversal workers.
pub struct NodeSlots<T> {
    cells: Box<[UnsafeCell<T>]>,
}

// SAFETY: the traversal functions hand out `&mut T` only to the unique visit
// of a node (or to its parent's visit once the node is finished), and `&T`
// only for nodes whose visit has completed; see the module docs.
unsafe impl<T: Send + Sync> Sync for NodeSlots<T> {}

impl<T> NodeSlots<T> {
    pub fn from_vec(values: Vec<T>) -> Self {
        NodeSlots { cells: values.into_iter().map(UnsafeCell::new).collect() }
    }

    pub fn into_vec(self) -> Vec<T> {
        self.cells.into_vec().into_iter().map(UnsafeCell::into_inner).collect()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&mut self, node: usize) -> &T {
        self.cells[node].get_mut()
    }

    pub fn get_mut(&mut self, node: usize) -> &mut T {
        self.cells[node].get_mut()
    }

    /// # Safety
    /// No other reference to this slot may be live.
    #[allow(clippy::mut_from_ref)]
    unsafe fn slot_mut(&self, node: usize) -> &mut T {
        &mut *self.cells[node].get()
    }

    /// # Safety
    /// No mutable reference to this slot may be live.
    unsafe fn slot(&self, node: usize) -> &T {
        &*self.cells[node].get()
    }
}

impl<T: Default> NodeSlots<T> {
    pub fn with_len(len: usize) -> Self {
        Self::from_vec((0..len).map(|_| T::default()).collect())
    }
}

/// Finished children of the node being visited bottom-up.
pub struct Children<'a, T> {
    slots: &'a NodeSlots<T>,
    ids: &'a [usize],
}

impl<'a, T> Children<'a, T> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, index: usize) -> usize {
        self.ids[index]
    }

    pub fn get(&self, index: usize) -> &T {
        // SAFETY: children are complete and only this visit may touch them.
        unsafe { self.slots.slot(self.ids[index]) }
    }

    pub fn get_mut(&mut self, index: usize) -> &mut T {
        // SAFETY: as above; `&mut self` prevents overlapping borrows.
        unsafe { self.slots.slot_mut(self.ids[index]) }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> + '_ {
        (0..self.ids.len()).map(move |i| self.get(i))
    }
}

/// Runs `visit` on every node of `tree` top-down. The visit returns whether
/// the node's children should be visited; under [`Scope::Subset`] flagged
/// children are visited regardless.
pub fn traverse_top_down<G, T, F>(
    tree: &G,
    slots: &mut NodeSlots<T>,
    scope: Scope<'_>,
    options: TraversalOptions,
    visit: F,
) -> Result<TraversalStats, TraversalError>
where
    G: TraversalTree + ?Sized,
    T: Send + Sync,
    F: Fn(usize, &mut T, Option<&T>) -> bool + Sync,
{
    assert!(slots.len() >= tree.node_capacity(), "slot table smaller than tree");
    let slots = &*slots;
    let run_one = |node: usize| -> bool {
        let parent = tree.parent(node);
        // SAFETY: `node` is scheduled exactly once; its parent finished
        // before any of its children were scheduled and is only read now.
        unsafe {
            let parent_slot = parent.map(|p| slots.slot(p));
            visit(node, slots.slot_mut(node), parent_slot)
        }
    };
    let task = |node: usize, ctx: &mut WorkerCtx<'_>| {
        if tree.subtree_size(node) <= options.cutoff {
            let mut stack = vec![node];
            while let Some(n) = stack.pop() {
                let descend = run_one(n);
                ctx.visits += 1;
                for &c in tree.children(n).iter().rev() {
                    if descend || scope.forces(c) {
                        stack.push(c);
                    }
                }
            }
        } else {
            let descend = run_one(node);
            ctx.visits += 1;
            for &c in tree.children(node).iter().rev() {
                if descend || scope.forces(c) {
                    ctx.spawn(c);
                }
            }
        }
    };
    run_pool(tree.root(), options.workers, &task)
}

/// Runs `visit` on every participating node of `tree` bottom-up. Leaves are
/// discovered by a parallel descent; the last child to finish visits its
/// parent.
pub fn traverse_bottom_up<G, T, F>(
    tree: &G,
    slots: &mut NodeSlots<T>,
    scope: Scope<'_>,
    options: TraversalOptions,
    visit: F,
) -> Result<TraversalStats, TraversalError>
where
    G: TraversalTree + ?Sized,
    T: Send + Sync,
    F: Fn(usize, &mut T, Children<'_, T>) + Sync,
{
    assert!(slots.len() >= tree.node_capacity(), "slot table smaller than tree");
    let root = tree.root();
    if !scope.contains(root) {
        return Ok(TraversalStats { visits_per_worker: vec![0; options.workers.max(1)], steals: 0 });
    }
    let slots = &*slots;
    let pending: Vec<AtomicUsize> = (0..tree.node_capacity()).map(|_| AtomicUsize::new(0)).collect();

    let run_one = |node: usize| {
        // SAFETY: every participating child has completed (countdown reached
        // zero or sequential post-order), and nothing else touches `node` or
        // its children until this visit returns.
        unsafe {
            let children = Children { slots, ids: tree.children(node) };
            visit(node, slots.slot_mut(node), children);
        }
    };
    let complete = |mut node: usize, ctx: &mut WorkerCtx<'_>| {
        while node != root {
            let Some(parent) = tree.parent(node) else { return };
            if pending[parent].fetch_sub(1, Ordering::AcqRel) != 1 {
                return;
            }
            run_one(parent);
            ctx.visits += 1;
            node = parent;
        }
    };
    let task = |node: usize, ctx: &mut WorkerCtx<'_>| {
        if tree.subtree_size(node) <= options.cutoff {
            // Post-order over the participating part of the subtree.
            let mut stack = vec![(node, false)];
            while let Some((n, expanded)) = stack.pop() {
                if expanded {
                    run_one(n);
                    ctx.visits += 1;
                    continue;
                }
                stack.push((n, true));
                for &c in tree.children(n).iter().rev() {
                    if scope.contains(c) {
                        stack.push((c, false));
                    }
                }
            }
            complete(node, ctx);
            return;
        }
        let active = tree.children(node).iter().filter(|&&c| scope.contains(c)).count();
        if active == 0 {
            run_one(node);
            ctx.visits += 1;
            complete(node, ctx);
            return;
        }
        pending[node].store(active, Ordering::Release);
        for &c in tree.children(node).iter().rev() {
            if scope.contains(c) {
                ctx.spawn(c);
            }
        }
    };
    run_pool(root, options.workers, &task)
}

/// Visits every node once without per-node state.
pub fn execute_traversal<G, F>(
    tree: &G,
    direction: Direction,
    options: TraversalOptions,
    visit: F,
) -> Result<TraversalStats, TraversalError>
where
    G: TraversalTree + ?Sized,
    F: Fn(usize) + Sync,
{
    let mut slots: NodeSlots<()> = NodeSlots::with_len(tree.node_capacity());
    match direction {
        Direction::TopDown => traverse_top_down(tree, &mut slots, Scope::Full, options, |n, _, _| {
            visit(n);
            true
        }),
        Direction::BottomUp => traverse_bottom_up(tree, &mut slots, Scope::Full, options, |n, _, _| visit(n)),
    }
}

struct Pool {
    stealers: Vec<StealHandle<usize>>,
    outstanding: AtomicUsize,
    done: AtomicBool,
    sleepers: AtomicUsize,
    lock: Mutex<()>,
    wake: Condvar,
    failure: Mutex<Option<String>>,
}

impl Pool {
    fn finished(&self) -> bool {
        self.done.load(Ordering::Acquire)
    }

    fn notify_one(&self) {
        if self.sleepers.load(Ordering::Acquire) > 0 {
            let _guard = self.lock.lock().unwrap();
            self.wake.notify_one();
        }
    }

    fn finish(&self) {
        self.done.store(true, Ordering::Release);
        let _guard = self.lock.lock().unwrap();
        self.wake.notify_all();
    }

    fn park(&self) {
        let guard = self.lock.lock().unwrap();
        self.sleepers.fetch_add(1, Ordering::AcqRel);
        let idle = !self.finished() && self.stealers.iter().all(|s| s.is_empty());
        if idle {
            // The timeout covers a wakeup racing with the emptiness check.
            let _ = self.wake.wait_timeout(guard, Duration::from_millis(1)).unwrap();
        }
        self.sleepers.fetch_sub(1, Ordering::AcqRel);
    }
}

struct WorkerCtx<'p> {
    deque: Deque<usize>,
    pool: &'p Pool,
    visits: usize,
}

impl WorkerCtx<'_> {
    fn spawn(&mut self, node: usize) {
        self.pool.outstanding.fetch_add(1, Ordering::AcqRel);
        self.deque.push(node);
        self.pool.notify_one();
    }
}

type Task<'t> = dyn Fn(usize, &mut WorkerCtx<'_>) + Sync + 't;

fn run_pool(root: usize, workers: usize, task: &Task<'_>) -> Result<TraversalStats, TraversalError> {
    if workers == 0 {
        return Err(TraversalError::NoWorkers);
    }
    let deques: Vec<Deque<usize>> = (0..workers).map(|_| Deque::new()).collect();
    let pool = Pool {
        stealers: deques.iter().map(|d| d.steal_handle()).collect(),
        outstanding: AtomicUsize::new(1),
        done: AtomicBool::new(false),
        sleepers: AtomicUsize::new(0),
        lock: Mutex::new(()),
        wake: Condvar::new(),
        failure: Mutex::new(None),
    };
    deques[0].push(root);

    let results: Vec<(usize, usize)> = if workers == 1 {
        let deque = deques.into_iter().next().unwrap();
        vec![worker_loop(0, deque, &pool, task)]
    } else {
        std::thread::scope(|s| {
            let mut iter = deques.into_iter();
            let first = iter.next().unwrap();
            let handles: Vec<_> = iter
                .enumerate()
                .map(|(i, deque)| {
                    let pool = &pool;
                    s.spawn(move || worker_loop(i + 1, deque, pool, task))
                })
                .collect();
            let mut out = vec![worker_loop(0, first, &pool, task)];
            out.extend(handles.into_iter().map(|h| h.join().expect("worker loop panicked")));
            out
        })
    };

    if let Some(msg) = pool.failure.into_inner().unwrap() {
        return Err(TraversalError::PanicPropagated(msg));
    }
    Ok(TraversalStats {
        visits_per_worker: results.iter().map(|r| r.0).collect(),
        steals: results.iter().map(|r| r.1).sum(),
    })
}

/// Returns (visits, steals).
fn worker_loop(index: usize, deque: Deque<usize>, pool: &Pool, task: &Task<'_>) -> (usize, usize) {
    let workers = pool.stealers.len();
    let mut ctx = WorkerCtx { deque, pool, visits: 0 };
    let mut rng = SmallRng::seed_from_u64(0x9e37_79b9 ^ index as u64);
    let mut steals = 0;
    let mut failed_rounds = 0;
    while !pool.finished() {
        let next = ctx.deque.pop().or_else(|| {
            let stolen = steal(index, &pool.stealers, &mut rng);
            if stolen.is_some() {
                steals += 1;
            }
            stolen
        });
        let Some(node) = next else {
            failed_rounds += 1;
            if failed_rounds >= 2 * workers {
                pool.park();
                failed_rounds = 0;
            } else {
                std::hint::spin_loop();
            }
            continue;
        };
        failed_rounds = 0;
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| task(node, &mut ctx)));
        if let Err(payload) = outcome {
            let msg = panic_message(payload.as_ref());
            let mut failure = pool.failure.lock().unwrap();
            if failure.is_none() {
                *failure = Some(msg);
            }
            drop(failure);
            pool.finish();
            break;
        }
        if pool.outstanding.fetch_sub(1, Ordering::AcqRel) == 1 {
            pool.finish();
        }
    }
    (ctx.visits, steals)
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

/// Compact read-only tree built from any child relation; used for the DOM
/// style pass and in tests.
#[derive(Debug, Clone)]
pub struct TreeShape {
    root: usize,
    parent: Vec<Option<usize>>,
    child_start: Vec<usize>,
    child_end: Vec<usize>,
    child_list: Vec<usize>,
    subtree: Vec<usize>,
}

impl TreeShape {
    /// Builds the shape reachable from `root`. Node indices must be below
    /// `capacity`.
    pub fn build<I>(root: usize, capacity: usize, mut children_of: impl FnMut(usize) -> I) -> Self
    where
        I: IntoIterator<Item = usize>,
    {
        let mut shape = TreeShape {
            root,
            parent: vec![None; capacity],
            child_start: vec![0; capacity],
            child_end: vec![0; capacity],
            child_list: Vec::new(),
            subtree: vec![0; capacity],
        };
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(n) = stack.pop() {
            order.push(n);
            let start = shape.child_list.len();
            shape.child_list.extend(children_of(n));
            let end = shape.child_list.len();
            shape.child_start[n] = start;
            shape.child_end[n] = end;
            for i in start..end {
                let c = shape.child_list[i];
                shape.parent[c] = Some(n);
                stack.push(c);
            }
        }
        for &n in order.iter().rev() {
            let kids = &shape.child_list[shape.child_start[n]..shape.child_end[n]];
            shape.subtree[n] = 1 + kids.iter().map(|&c| shape.subtree[c]).sum::<usize>();
        }
        shape
    }

    /// Builds from a parent array where `parents[i]` is the parent of `i`
    /// and exactly one entry (the root) is `None`.
    pub fn from_parents(parents: &[Option<usize>]) -> Self {
        let mut kids = vec![Vec::new(); parents.len()];
        let mut root = 0;
        for (i, p) in parents.iter().enumerate() {
            match p {
                Some(p) => kids[*p].push(i),
                None => root = i,
            }
        }
        Self::build(root, parents.len(), |n| kids[n].clone())
    }

    pub fn len(&self) -> usize {
        self.subtree[self.root]
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl TraversalTree for TreeShape {
    fn root(&self) -> usize {
        self.root
    }

    fn node_capacity(&self) -> usize {
        self.parent.len()
    }

    fn children(&self, node: usize) -> &[usize] {
        &self.child_list[self.child_start[node]..self.child_end[node]]
    }

    fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    fn subtree_size(&self, node: usize) -> usize {
        self.subtree[node]
    }
}
