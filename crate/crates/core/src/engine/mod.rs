//! Orchestration: document loading with script execution, mutations and
//! incremental relayout, the threaded pipeline, and the benchmark harness.

mod bench;
mod pipeline;
mod script;
pub mod synth;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::display::{build_display_list, DisplayError, DisplayItem};
use crate::dom::{DomError, DomTree, NodeId, NodeKind, TreeBuilder};
use crate::flow::{build_flow_tree, FlowError, FlowTree};
use crate::layout::{self, dump_layout, LayoutStats};
use crate::scheduler::{TraversalError, TraversalOptions};
use crate::style::{compute_styles, parse_sheets, restyle_subtree, Rule, StyleError, StyleMap};
use crate::tokenizer::{StepResult, Token, TokenizerMachine};

pub use bench::{benchmark, format_bench_table, BenchCell, BenchRow, REFERENCE_NOTE};
pub use pipeline::{
    run_pipeline, start_pipeline, Pipeline, PipelineMessage, PipelineOptions, PipelineOutput, Rendered, Stage,
    StageTiming,
};
pub use script::{parse_script, AppendPayload, NodePath, ScriptCommand, ScriptDiagnostic};

pub const DEFAULT_VIEWPORT: f64 = 800.0;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("path {0} does not name a node")]
    BadPath(NodePath),
    #[error(transparent)]
    Dom(#[from] DomError),
    #[error(transparent)]
    Style(#[from] StyleError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Traversal(#[from] TraversalError),
    #[error(transparent)]
    Display(#[from] DisplayError),
    #[error("pipeline failed: {0}")]
    Pipeline(String),
    #[error("{0}")]
    Usage(String),
}

pub fn read_file(path: &str) -> Result<String, EngineError> {
    std::fs::read_to_string(path).map_err(|e| EngineError::Io { path: path.to_string(), message: e.to_string() })
}

/// Result of parsing with scripts executed.
#[derive(Debug, Clone)]
pub struct ParsedDocument {
    pub tree: DomTree,
    pub tokens: Vec<Token>,
    /// Mutation commands found in scripts; they run after load.
    pub deferred: Vec<ScriptCommand>,
    pub diagnostics: Vec<String>,
    pub prefetch: Vec<String>,
}

/// Tokenizes and builds the tree, running each script as soon as its end
/// tag is processed. `on_batch` receives tokens in order, in batches.
pub fn parse_document(html: &str, batch_size: usize, mut on_batch: impl FnMut(Vec<Token>)) -> ParsedDocument {
    let mut machine = TokenizerMachine::new();
    machine.feed(html).expect("fresh stream accepts input");
    let prefetch = machine.prefetch_candidates();
    let mut builder = TreeBuilder::new();
    let mut tokens = Vec::new();
    let mut batch = Vec::new();
    let mut deferred = Vec::new();
    let mut diagnostics = Vec::new();
    loop {
        match machine.next_token() {
            StepResult::Emitted(token) => {
                tokens.push(token.clone());
                batch.push(token.clone());
                if batch.len() >= batch_size.max(1) {
                    on_batch(std::mem::take(&mut batch));
                }
                if let Some(script) = builder.process(token) {
                    let (commands, diags) = parse_script(&builder.tree().text_content(script));
                    diagnostics.extend(diags.iter().map(|d| format!("script {script}: {d}")));
                    for c in commands {
                        match c {
                            // The stream stays open until input runs dry, so
                            // this cannot fail.
                            ScriptCommand::Write { text } => {
                                machine.insert_at_insertion_point(&text).expect("stream still open")
                            }
                            other => deferred.push(other),
                        }
                    }
                }
            }
            StepResult::NeedMoreInput => machine.end_stream().expect("stream ends once"),
            StepResult::Finished => break,
        }
    }
    if !batch.is_empty() {
        on_batch(batch);
    }
    ParsedDocument { tree: builder.finish(), tokens, deferred, diagnostics, prefetch }
}

/// Border box in viewport coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

/// A styled, laid-out document.
#[derive(Debug, Clone)]
pub struct Page {
    pub dom: DomTree,
    pub rules: Vec<Rule>,
    pub styles: StyleMap,
    pub flows: FlowTree,
    pub viewport: f64,
    pub options: TraversalOptions,
    pub diagnostics: Vec<String>,
}

/// Text of every `<style>` element in document order.
pub fn embedded_sheets(dom: &DomTree) -> Vec<String> {
    dom.elements_named("style").map(|s| dom.text_content(s)).collect()
}

/// Time spent in each part of building a page.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BuildTimes {
    pub style: Duration,
    pub flow: Duration,
    pub layout: Duration,
}

impl Page {
    /// Styles and lays out `dom`. External sheets precede `<style>` elements
    /// in cascade order.
    pub fn from_dom(
        dom: DomTree,
        css: &[String],
        viewport: f64,
        options: TraversalOptions,
    ) -> Result<Page, EngineError> {
        Self::from_dom_timed(dom, css, viewport, options).map(|(p, _)| p)
    }

    pub fn from_dom_timed(
        dom: DomTree,
        css: &[String],
        viewport: f64,
        options: TraversalOptions,
    ) -> Result<(Page, BuildTimes), EngineError> {
        let embedded = embedded_sheets(&dom);
        let sheet = parse_sheets(css.iter().chain(&embedded).map(String::as_str));
        let diagnostics = sheet.diagnostics.iter().map(|d| format!("css: {d}")).collect();
        let t0 = Instant::now();
        let styles = compute_styles(&dom, &sheet.rules, options)?;
        let t1 = Instant::now();
        let mut flows = build_flow_tree(&dom, &styles)?;
        let t2 = Instant::now();
        layout::layout(&mut flows, viewport, options)?;
        let t3 = Instant::now();
        let page = Page { dom, rules: sheet.rules, styles, flows, viewport, options, diagnostics };
        Ok((page, BuildTimes { style: t1 - t0, flow: t2 - t1, layout: t3 - t2 }))
    }

    /// Parses, runs scripts, lays out, then applies deferred mutations.
    pub fn load(html: &str, css: &[String], viewport: f64, options: TraversalOptions) -> Result<Page, EngineError> {
        let parsed = parse_document(html, usize::MAX, |_| {});
        let mut page = Page::from_dom(parsed.tree, css, viewport, options)?;
        page.diagnostics.extend(parsed.diagnostics);
        if !parsed.deferred.is_empty() {
            page.apply_mutations(&parsed.deferred)?;
            page.incremental_relayout()?;
        }
        Ok(page)
    }

    pub fn resolve(&self, path: &NodePath) -> Result<NodeId, EngineError> {
        path.resolve(&self.dom).ok_or_else(|| EngineError::BadPath(path.clone()))
    }

    /// Applies commands to the DOM, restyles what they touch and rebuilds
    /// the affected flows. Returns the live flows marked self-dirty.
    /// `Write` commands are ignored once the document has loaded.
    pub fn apply_mutations(&mut self, commands: &[ScriptCommand]) -> Result<Vec<usize>, EngineError> {
        let mut dirtied = BTreeSet::new();
        for command in commands {
            let changed = match command {
                ScriptCommand::Write { .. } => continue,
                ScriptCommand::SetAttribute { path, name, value } => {
                    let node = self.resolve(path)?;
                    self.dom.set_attribute(node, name, value)?;
                    restyle_subtree(&self.dom, &self.rules, node, &mut self.styles, self.options)?;
                    node
                }
                ScriptCommand::AppendChild { parent, payload } => {
                    let p = self.resolve(parent)?;
                    let kind = match payload {
                        AppendPayload::Element(name) => NodeKind::element(name),
                        AppendPayload::Text(text) => NodeKind::text(text),
                    };
                    let child = self.dom.append_child(p, kind)?;
                    if self.dom.element_name(child).is_some() {
                        restyle_subtree(&self.dom, &self.rules, child, &mut self.styles, self.options)?;
                    }
                    p
                }
                ScriptCommand::RemoveNode { path } => {
                    let node = self.resolve(path)?;
                    let parent = self.dom.parent(node).ok_or(DomError::CannotRemoveRoot)?;
                    for d in self.dom.descendants(node) {
                        self.styles.remove(d);
                    }
                    self.dom.remove_node(node)?;
                    parent
                }
            };
            dirtied.extend(self.flows.rebuild_for(&self.dom, &self.styles, changed)?);
        }
        Ok(dirtied.into_iter().filter(|&f| self.flows.is_alive(f) && self.flows.dirty(f).self_dirty).collect())
    }

    pub fn incremental_relayout(&mut self) -> Result<LayoutStats, EngineError> {
        Ok(layout::incremental_relayout(&mut self.flows, self.viewport, self.options)?)
    }

    /// Full layout of the current flow tree.
    pub fn relayout(&mut self) -> Result<LayoutStats, EngineError> {
        Ok(layout::layout(&mut self.flows, self.viewport, self.options)?)
    }

    /// Layout dump of a page rebuilt from scratch from the current DOM; the
    /// oracle for incremental relayout.
    pub fn from_scratch_dump(&self) -> Result<String, EngineError> {
        let styles = compute_styles(&self.dom, &self.rules, self.options)?;
        let mut flows = build_flow_tree(&self.dom, &styles)?;
        layout::layout(&mut flows, self.viewport, self.options)?;
        Ok(dump_layout(&flows))
    }

    pub fn dump_layout(&self) -> String {
        dump_layout(&self.flows)
    }

    pub fn display_list(&self) -> Result<Vec<DisplayItem>, EngineError> {
        Ok(build_display_list(&self.flows)?)
    }

    /// Border box of the block flow generated by `node`.
    pub fn geometry(&self, node: NodeId) -> Option<Rect> {
        let f = self.flows.flow_for(node)?;
        let (x, y) = self.flows.absolute_position(f);
        let m = self.flows.metrics(f);
        Some(Rect { x, y, w: m.used_width, h: m.used_height })
    }

    /// Canvas size for painting the whole page.
    pub fn canvas_size(&self) -> (usize, usize) {
        let h = self.flows.metrics(self.flows.root()).used_height;
        ((self.viewport.ceil() as usize).max(1), (h.ceil() as usize).max(1))
    }
}

/// Free-function form of [`Page::apply_mutations`].
pub fn apply_mutations(page: &mut Page, commands: &[ScriptCommand]) -> Result<Vec<usize>, EngineError> {
    page.apply_mutations(commands)
}

/// See [`Page::incremental_relayout`].
pub fn incremental_relayout(page: &mut Page) -> Result<LayoutStats, EngineError> {
    page.incremental_relayout()
}
