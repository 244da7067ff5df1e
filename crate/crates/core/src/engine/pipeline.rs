//! Three long-lived tasks joined by channels: parse, style+layout, display.
//! Documents and flow trees move between tasks inside messages; nothing is
//! shared. Once the page is displayed, the display task owns it and answers
//! geometry queries until it is told to quit.

use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crate::display::{paint, to_json, DisplayItem, RasterImage};
use crate::dom::{DomTree, NodeId};
use crate::scheduler::{channel, Receiver, Sender, TraversalOptions};
use crate::tokenizer::Token;

use super::{parse_document, read_file, EngineError, Page, Rect, ScriptCommand, DEFAULT_VIEWPORT};

const TOKEN_BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Parse,
    Style,
    Flow,
    Layout,
    Display,
    Paint,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Style => "style",
            Stage::Flow => "flow",
            Stage::Layout => "layout",
            Stage::Display => "display",
            Stage::Paint => "paint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageTiming {
    pub stage: Stage,
    pub elapsed: Duration,
}

#[derive(Debug)]
pub enum PipelineMessage {
    TokensReady(Vec<Token>),
    DomReady {
        tree: DomTree,
        deferred: Vec<ScriptCommand>,
        diagnostics: Vec<String>,
        prefetch: Vec<String>,
    },
    /// Every element has a computed style.
    StylesReady {
        elements: usize,
    },
    LayoutDone {
        page: Box<Page>,
        tokens: Vec<Token>,
        prefetch: Vec<String>,
    },
    /// Synchronous geometry lookup served by the task that owns the page.
    GeometryQuery {
        node: NodeId,
        reply: Sender<Option<Rect>>,
    },
    /// Ends the receiving task; `error` carries an upstream failure.
    Quit {
        error: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub traversal: TraversalOptions,
    pub viewport: f64,
    pub raster: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { traversal: TraversalOptions::default(), viewport: DEFAULT_VIEWPORT, raster: false }
    }
}

#[derive(Debug, Clone)]
pub struct Rendered {
    pub items: Vec<DisplayItem>,
    pub json: String,
    pub raster: Option<RasterImage>,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub page: Page,
    pub tokens: Vec<Token>,
    pub prefetch: Vec<String>,
    pub rendered: Rendered,
    pub timings: Vec<StageTiming>,
}

enum DisplayEvent {
    Rendered(Rendered),
    Finished { page: Box<Page>, tokens: Vec<Token>, prefetch: Vec<String> },
    Failed(String),
}

/// Handle to a running pipeline.
pub struct Pipeline {
    display_inbox: Sender<PipelineMessage>,
    events: Receiver<DisplayEvent>,
    timings: Receiver<StageTiming>,
    rendered: Option<Rendered>,
    handles: Vec<JoinHandle<()>>,
}

pub fn start_pipeline(html: String, css: Vec<String>, options: PipelineOptions) -> Pipeline {
    let (style_tx, style_rx) = channel::<PipelineMessage>();
    let (display_tx, display_rx) = channel::<PipelineMessage>();
    let (event_tx, event_rx) = channel::<DisplayEvent>();
    let (timing_tx, timing_rx) = channel::<StageTiming>();

    let parse_timing = timing_tx.clone();
    let parse = thread::spawn(move || parse_task(html, style_tx, parse_timing));
    let style_timing = timing_tx.clone();
    let downstream = display_tx.clone();
    let style = thread::spawn(move || style_layout_task(style_rx, downstream, css, options, style_timing));
    let display = thread::spawn(move || display_task(display_rx, event_tx, options, timing_tx));

    Pipeline {
        display_inbox: display_tx,
        events: event_rx,
        timings: timing_rx,
        rendered: None,
        handles: vec![parse, style, display],
    }
}

fn report(timing: &Sender<StageTiming>, stage: Stage, start: Instant) {
    // Timing is advisory; a vanished reader is not an error.
    let _ = timing.send(StageTiming { stage, elapsed: start.elapsed() });
}

fn parse_task(html: String, out: Sender<PipelineMessage>, timing: Sender<StageTiming>) {
    let start = Instant::now();
    let parsed = parse_document(&html, TOKEN_BATCH, |batch| {
        let _ = out.send(PipelineMessage::TokensReady(batch));
    });
    report(&timing, Stage::Parse, start);
    let _ = out.send(PipelineMessage::DomReady {
        tree: parsed.tree,
        deferred: parsed.deferred,
        diagnostics: parsed.diagnostics,
        prefetch: parsed.prefetch,
    });
}

fn style_layout_task(
    inbox: Receiver<PipelineMessage>,
    out: Sender<PipelineMessage>,
    css: Vec<String>,
    options: PipelineOptions,
    timing: Sender<StageTiming>,
) {
    let mut tokens = Vec::new();
    while let Ok(message) = inbox.recv() {
        match message {
            PipelineMessage::TokensReady(batch) => tokens.extend(batch),
            PipelineMessage::DomReady { tree, deferred, diagnostics, prefetch } => {
                let result = (|| -> Result<Page, EngineError> {
                    let (mut page, times) = Page::from_dom_timed(tree, &css, options.viewport, options.traversal)?;
                    let _ = out.send(PipelineMessage::StylesReady { elements: page.styles.len() });
                    page.diagnostics.extend(diagnostics);
                    let start = Instant::now();
                    if !deferred.is_empty() {
                        page.apply_mutations(&deferred)?;
                        page.incremental_relayout()?;
                    }
                    for (stage, elapsed) in [(Stage::Style, times.style), (Stage::Flow, times.flow)] {
                        let _ = timing.send(StageTiming { stage, elapsed });
                    }
                    let _ = timing.send(StageTiming { stage: Stage::Layout, elapsed: times.layout + start.elapsed() });
                    Ok(page)
                })();
                let message = match result {
                    Ok(page) => PipelineMessage::LayoutDone {
                        page: Box::new(page),
                        tokens: std::mem::take(&mut tokens),
                        prefetch,
                    },
                    Err(e) => PipelineMessage::Quit { error: Some(e.to_string()) },
                };
                let _ = out.send(message);
                return;
            }
            PipelineMessage::Quit { error } => {
                let _ = out.send(PipelineMessage::Quit { error });
                return;
            }
            _ => {}
        }
    }
    // The parser vanished without delivering a document.
    let _ = out.send(PipelineMessage::Quit { error: Some("parser stopped before the document was complete".into()) });
}

fn display_task(
    inbox: Receiver<PipelineMessage>,
    events: Sender<DisplayEvent>,
    options: PipelineOptions,
    timing: Sender<StageTiming>,
) {
    let mut owned: Option<(Box<Page>, Vec<Token>, Vec<String>)> = None;
    while let Ok(message) = inbox.recv() {
        match message {
            PipelineMessage::LayoutDone { page, tokens, prefetch } => {
                let start = Instant::now();
                let items = match page.display_list() {
                    Ok(items) => items,
                    Err(e) => {
                        let _ = events.send(DisplayEvent::Failed(e.to_string()));
                        return;
                    }
                };
                let json = to_json(&items);
                report(&timing, Stage::Display, start);
                let raster = options.raster.then(|| {
                    let start = Instant::now();
                    let (w, h) = page.canvas_size();
                    let image = paint(&items, w, h);
                    report(&timing, Stage::Paint, start);
                    image
                });
                let _ = events.send(DisplayEvent::Rendered(Rendered { items, json, raster }));
                owned = Some((page, tokens, prefetch));
            }
            PipelineMessage::GeometryQuery { node, reply } => {
                let _ = reply.send(owned.as_ref().and_then(|(p, _, _)| p.geometry(node)));
            }
            PipelineMessage::Quit { error: Some(e) } => {
                let _ = events.send(DisplayEvent::Failed(e));
                return;
            }
            PipelineMessage::Quit { error: None } => {
                if let Some((page, tokens, prefetch)) = owned.take() {
                    let _ = events.send(DisplayEvent::Finished { page, tokens, prefetch });
                } else {
                    let _ = events.send(DisplayEvent::Failed("quit before layout finished".into()));
                }
                return;
            }
            PipelineMessage::StylesReady { .. }
            | PipelineMessage::TokensReady(_)
            | PipelineMessage::DomReady { .. } => {}
        }
    }
}

impl Pipeline {
    /// Blocks until the display list is ready.
    pub fn wait_rendered(&mut self) -> Result<&Rendered, EngineError> {
        if self.rendered.is_none() {
            match self.events.recv() {
                Ok(DisplayEvent::Rendered(r)) => self.rendered = Some(r),
                Ok(DisplayEvent::Failed(e)) => return Err(EngineError::Pipeline(e)),
                Ok(DisplayEvent::Finished { .. }) => {
                    return Err(EngineError::Pipeline("finished before rendering".into()))
                }
                Err(_) => return Err(EngineError::Pipeline("display task exited".into())),
            }
        }
        Ok(self.rendered.as_ref().expect("set above"))
    }

    /// Asks the page owner for a node's border box.
    pub fn query_geometry(&mut self, node: NodeId) -> Result<Option<Rect>, EngineError> {
        self.wait_rendered()?;
        let (tx, rx) = channel();
        self.display_inbox
            .send(PipelineMessage::GeometryQuery { node, reply: tx })
            .map_err(|_| EngineError::Pipeline("display task exited".into()))?;
        rx.recv().map_err(|_| EngineError::Pipeline("no geometry reply".into()))
    }

    /// Stops every task and collects the results.
    pub fn finish(mut self) -> Result<PipelineOutput, EngineError> {
        let rendered = self.wait_rendered().cloned();
        let _ = self.display_inbox.send(PipelineMessage::Quit { error: None });
        let finished = match (&rendered, self.events.recv()) {
            (Ok(_), Ok(DisplayEvent::Finished { page, tokens, prefetch })) => Ok((page, tokens, prefetch)),
            (Ok(_), Ok(DisplayEvent::Failed(e))) => Err(EngineError::Pipeline(e)),
            (Err(e), _) => Err(e.clone()),
            _ => Err(EngineError::Pipeline("display task exited".into())),
        };
        for h in self.handles.drain(..) {
            if h.join().is_err() {
                return Err(EngineError::Pipeline("a pipeline task panicked".into()));
            }
        }
        let (page, tokens, prefetch) = finished?;
        let timings = self.timings.iter().collect();
        Ok(PipelineOutput { page: *page, tokens, prefetch, rendered: rendered?, timings })
    }
}

/// Reads the inputs and runs the pipeline to completion.
pub fn run_pipeline(
    html_path: &str,
    css_paths: &[String],
    options: PipelineOptions,
) -> Result<PipelineOutput, EngineError> {
    let html = read_file(html_path)?;
    let css = css_paths.iter().map(|p| read_file(p)).collect::<Result<Vec<_>, _>>()?;
    start_pipeline(html, css, options).finish()
}
