//! Geometry over the flow tree in three traversals: intrinsic widths
//! (bottom-up), used widths (top-down), heights and placement (bottom-up).
//!
//! Positions are stored relative to the parent flow's border box;
//! [`FlowTree::absolute_position`] sums them.

use std::fmt::Write as _;

use crate::flow::{FlowKind, FlowTree, Fragment};
use crate::fmt2;
use crate::scheduler::{
    traverse_bottom_up, traverse_top_down, Children, NodeSlots, Scope, TraversalError, TraversalOptions,
};
use crate::style::{ComputedStyle, Size};

/// Horizontal advance of every character, as a fraction of the font size.
pub const CHAR_ADVANCE: f64 = 0.5;
/// Line height as a fraction of the largest font size on the line.
pub const LINE_HEIGHT: f64 = 1.2;
/// Baseline offset from the line top, as a fraction of the largest font size.
pub const BASELINE: f64 = 0.9;

pub fn char_advance(font_size: f64) -> f64 {
    CHAR_ADVANCE * font_size
}

pub fn line_height(font_size: f64) -> f64 {
    LINE_HEIGHT * font_size
}

/// Advance of `text` under the fixed-width text model.
pub fn text_advance(text: &str, font_size: f64) -> f64 {
    text.chars().count() as f64 * char_advance(font_size)
}

/// Text from one fragment placed on one line.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePiece {
    pub fragment: usize,
    /// Offset from the inline flow's left edge.
    pub x: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineBox {
    /// Offset from the inline flow's top edge.
    pub top: f64,
    pub height: f64,
    pub baseline: f64,
    pub pieces: Vec<LinePiece>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayoutMetrics {
    pub intrinsic_min_width: f64,
    pub intrinsic_pref_width: f64,
    /// Border-box width.
    pub used_width: f64,
    /// Border-box height.
    pub used_height: f64,
    /// Width handed to children.
    pub content_width: f64,
    /// Border-box origin relative to the parent flow's border box.
    pub x: f64,
    pub y: f64,
    pub lines: Vec<LineBox>,
    pub laid_out: bool,
}

/// Visit counts of the three passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LayoutStats {
    pub intrinsic_visits: usize,
    pub width_visits: usize,
    pub height_visits: usize,
}

impl LayoutStats {
    pub fn total(&self) -> usize {
        self.intrinsic_visits + self.width_visits + self.height_visits
    }
}

/// Runs all three passes over the whole tree.
pub fn layout(
    tree: &mut FlowTree,
    viewport_width: f64,
    options: TraversalOptions,
) -> Result<LayoutStats, TraversalError> {
    let intrinsic_visits = compute_intrinsic_widths(tree, options)?;
    let width_visits = assign_widths(tree, viewport_width, options)?;
    let height_visits = assign_heights(tree, options)?;
    tree.clear_dirty();
    Ok(LayoutStats { intrinsic_visits, width_visits, height_visits })
}

/// Fills the intrinsic min/preferred widths. Returns the visit count.
pub fn compute_intrinsic_widths(tree: &mut FlowTree, options: TraversalOptions) -> Result<usize, TraversalError> {
    with_slots(tree, |tree, slots| intrinsic_pass(tree, slots, Scope::Full, options))
}

/// Assigns used widths from `containing_width` down. Returns the visit count.
pub fn assign_widths(
    tree: &mut FlowTree,
    containing_width: f64,
    options: TraversalOptions,
) -> Result<usize, TraversalError> {
    with_slots(tree, |tree, slots| width_pass(tree, slots, containing_width, None, options))
}

/// Wraps lines, computes heights and places children. Returns the visit count.
pub fn assign_heights(tree: &mut FlowTree, options: TraversalOptions) -> Result<usize, TraversalError> {
    with_slots(tree, |tree, slots| height_pass(tree, slots, Scope::Full, options))
}

/// Recomputes only what the dirty bits require, then clears them. The
/// result is identical to a full [`layout`].
pub fn incremental_relayout(
    tree: &mut FlowTree,
    viewport_width: f64,
    options: TraversalOptions,
) -> Result<LayoutStats, TraversalError> {
    let spine: Vec<bool> = (0..tree.capacity())
        .map(|f| {
            let d = tree.dirty(f);
            tree.is_alive(f) && (d.self_dirty || d.descendant_dirty)
        })
        .collect();
    if !spine.iter().any(|&d| d) {
        return Ok(LayoutStats::default());
    }
    let stats = with_slots(tree, |tree, slots| {
        let intrinsic_visits = intrinsic_pass(tree, slots, Scope::Subset(&spine), options)?;
        let visited: Vec<std::sync::atomic::AtomicBool> =
            (0..tree.capacity()).map(|_| std::sync::atomic::AtomicBool::new(false)).collect();
        let width_visits = width_pass(
            tree,
            slots,
            viewport_width,
            Some(IncrementalWidth { forced: &spine, visited: &visited }),
            options,
        )?;
        let visited: Vec<bool> = visited.into_iter().map(|v| v.into_inner()).collect();
        let height_visits = height_pass(tree, slots, Scope::Subset(&visited), options)?;
        Ok(LayoutStats { intrinsic_visits, width_visits, height_visits })
    })?;
    tree.clear_dirty();
    Ok(stats)
}

fn with_slots<R>(
    tree: &mut FlowTree,
    run: impl FnOnce(&FlowTree, &mut NodeSlots<LayoutMetrics>) -> Result<R, TraversalError>,
) -> Result<R, TraversalError> {
    let mut slots = NodeSlots::from_vec(std::mem::take(&mut tree.metrics));
    let result = run(tree, &mut slots);
    tree.metrics = slots.into_vec();
    result
}

fn horizontal_margin_box(style: &ComputedStyle) -> f64 {
    style.margin.horizontal() + style.padding.horizontal()
}

fn intrinsic_pass(
    tree: &FlowTree,
    slots: &mut NodeSlots<LayoutMetrics>,
    scope: Scope<'_>,
    options: TraversalOptions,
) -> Result<usize, TraversalError> {
    let stats = traverse_bottom_up(tree, slots, scope, options, |f, m: &mut LayoutMetrics, children| {
        let flow = tree.flow(f);
        let (min, pref) = match flow.kind {
            FlowKind::Inline => inline_intrinsic(&flow.fragments),
            FlowKind::Block => {
                let style = &flow.style;
                match style.width {
                    Size::Px(w) => {
                        let v = w + horizontal_margin_box(style);
                        (v, v)
                    }
                    Size::Auto => {
                        let extra = horizontal_margin_box(style);
                        let min = children.iter().map(|c| c.intrinsic_min_width).fold(0.0, f64::max);
                        let pref = children.iter().map(|c| c.intrinsic_pref_width).fold(0.0, f64::max);
                        (min + extra, pref + extra)
                    }
                }
            }
        };
        m.intrinsic_min_width = min;
        m.intrinsic_pref_width = pref;
    })?;
    Ok(stats.total_visits())
}

struct IncrementalWidth<'a> {
    forced: &'a [bool],
    visited: &'a [std::sync::atomic::AtomicBool],
}

fn width_pass(
    tree: &FlowTree,
    slots: &mut NodeSlots<LayoutMetrics>,
    viewport_width: f64,
    incremental: Option<IncrementalWidth<'_>>,
    options: TraversalOptions,
) -> Result<usize, TraversalError> {
    let scope = match &incremental {
        Some(inc) => Scope::Subset(inc.forced),
        None => Scope::Full,
    };
    let stats = traverse_top_down(tree, slots, scope, options, |f, m, parent| {
        let flow = tree.flow(f);
        let containing = parent.map_or(viewport_width, |p| p.content_width);
        let (used, content) = match flow.kind {
            FlowKind::Inline => (containing, containing),
            FlowKind::Block => {
                let style = &flow.style;
                let used = match style.width {
                    Size::Px(w) => w + style.padding.horizontal(),
                    Size::Auto => (containing - style.margin.horizontal()).max(0.0),
                };
                (used, (used - style.padding.horizontal()).max(0.0))
            }
        };
        let changed = !m.laid_out || m.content_width != content || m.used_width != used;
        m.used_width = used;
        m.content_width = content;
        m.laid_out = true;
        match &incremental {
            None => true,
            Some(inc) => {
                inc.visited[f].store(true, std::sync::atomic::Ordering::Relaxed);
                changed
            }
        }
    })?;
    Ok(stats.total_visits())
}

fn height_pass(
    tree: &FlowTree,
    slots: &mut NodeSlots<LayoutMetrics>,
    scope: Scope<'_>,
    options: TraversalOptions,
) -> Result<usize, TraversalError> {
    let stats = traverse_bottom_up(tree, slots, scope, options, |f, m, mut children: Children<'_, LayoutMetrics>| {
        let flow = tree.flow(f);
        if f == tree.root() {
            m.x = 0.0;
            m.y = 0.0;
        }
        match flow.kind {
            FlowKind::Inline => {
                m.lines = wrap_lines(&flow.fragments, m.used_width);
                m.used_height = m.lines.iter().map(|l| l.height).sum();
            }
            FlowKind::Block => {
                let style = &flow.style;
                let mut cursor = style.padding.top;
                for i in 0..children.len() {
                    let child = tree.flow(children.id(i));
                    let child_style = &child.style;
                    let (ml, mt, mb) = match child.kind {
                        FlowKind::Block => (child_style.margin.left, child_style.margin.top, child_style.margin.bottom),
                        FlowKind::Inline => (0.0, 0.0, 0.0),
                    };
                    let c = children.get_mut(i);
                    c.x = style.padding.left + ml;
                    c.y = cursor + mt;
                    cursor = c.y + c.used_height + mb;
                }
                m.used_height = match style.height {
                    Size::Px(h) => h + style.padding.vertical(),
                    Size::Auto => cursor + style.padding.bottom,
                };
            }
        }
    })?;
    Ok(stats.total_visits())
}

/// One unbreakable unit of inline content.
struct Word<'a> {
    fragment: usize,
    text: &'a str,
    font_size: f64,
    /// Whether a space separates this word from the previous one on a line.
    spaced: bool,
}

fn words(fragments: &[Fragment]) -> Vec<Word<'_>> {
    let mut out = Vec::new();
    let mut after_marker = true;
    for (i, frag) in fragments.iter().enumerate() {
        let font_size = frag.style().font_size;
        if frag.is_marker() {
            out.push(Word { fragment: i, text: frag.text(), font_size, spaced: !after_marker });
            after_marker = true;
            continue;
        }
        for w in frag.text().split(' ') {
            out.push(Word { fragment: i, text: w, font_size, spaced: !after_marker });
            after_marker = false;
        }
    }
    out
}

fn inline_intrinsic(fragments: &[Fragment]) -> (f64, f64) {
    let mut min: f64 = 0.0;
    let mut pref = 0.0;
    for w in words(fragments) {
        let adv = text_advance(w.text, w.font_size);
        min = min.max(adv);
        if w.spaced {
            pref += char_advance(w.font_size);
        }
        pref += adv;
    }
    (min, pref)
}

/// Greedy wrap: a word moves to a new line when it would overflow a
/// non-empty line.
pub fn wrap_lines(fragments: &[Fragment], width: f64) -> Vec<LineBox> {
    let mut lines = Vec::new();
    let mut current: Vec<(usize, f64, String, f64)> = Vec::new();
    let mut cursor = 0.0;
    let mut top = 0.0;
    let mut finish = |current: &mut Vec<(usize, f64, String, f64)>, top: &mut f64| {
        if current.is_empty() {
            return;
        }
        let max_font = current.iter().map(|p| p.3).fold(0.0, f64::max);
        let mut pieces: Vec<LinePiece> = Vec::new();
        for (fragment, x, text, _) in current.drain(..) {
            match pieces.last_mut() {
                Some(last) if last.fragment == fragment => {
                    last.text.push(' ');
                    last.text.push_str(&text);
                }
                _ => pieces.push(LinePiece { fragment, x, text }),
            }
        }
        let height = line_height(max_font);
        lines.push(LineBox { top: *top, height, baseline: *top + BASELINE * max_font, pieces });
        *top += height;
    };
    for w in words(fragments) {
        let adv = text_advance(w.text, w.font_size);
        let gap = if w.spaced && !current.is_empty() { char_advance(w.font_size) } else { 0.0 };
        if !current.is_empty() && cursor + gap + adv > width {
            finish(&mut current, &mut top);
            cursor = 0.0;
            current.push((w.fragment, 0.0, w.text.to_string(), w.font_size));
            cursor += adv;
        } else {
            current.push((w.fragment, cursor + gap, w.text.to_string(), w.font_size));
            cursor += gap + adv;
        }
    }
    finish(&mut current, &mut top);
    lines
}

/// `kind origin x y w h` per live flow in pre-order, absolute coordinates.
pub fn dump_layout(tree: &FlowTree) -> String {
    let mut out = String::new();
    for f in tree.preorder() {
        let flow = tree.flow(f);
        let m = tree.metrics(f);
        let (x, y) = tree.absolute_position(f);
        let kind = match flow.kind {
            FlowKind::Block => "block",
            FlowKind::Inline => "inline",
        };
        let origin = flow.dom_origin.map_or("anon".to_string(), |o| o.to_string());
        let _ = writeln!(out, "{kind} {origin} {} {} {} {}", fmt2(x), fmt2(y), fmt2(m.used_width), fmt2(m.used_height));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::{build, NodeId};
    use crate::flow::build_flow_tree;
    use crate::style::{compute_styles, parse_stylesheet};
    use crate::tokenizer::tokenize;

    fn text_fragment(text: &str, font_size: f64) -> Fragment {
        let mut style = ComputedStyle::initial().anonymous_inline();
        style.font_size = font_size;
        Fragment::Text { text: text.into(), style, dom_origin: NodeId::from_index(0) }
    }

    fn laid_out(html: &str, css: &str, viewport: f64, workers: usize) -> (crate::dom::DomTree, FlowTree) {
        let tree = build(tokenize(html));
        let opts = TraversalOptions::with_workers(workers);
        let styles = compute_styles(&tree, &parse_stylesheet(css).rules, opts).unwrap();
        let mut ft = build_flow_tree(&tree, &styles).unwrap();
        layout(&mut ft, viewport, opts).unwrap();
        (tree, ft)
    }

    fn metrics_of<'a>(tree: &crate::dom::DomTree, ft: &'a FlowTree, name: &str) -> &'a LayoutMetrics {
        ft.metrics(ft.flow_for(tree.elements_named(name).next().unwrap()).unwrap())
    }

    #[test]
    fn text_intrinsic_widths() {
        assert_eq!(inline_intrinsic(&[text_fragment("hello world", 16.0)]), (40.0, 88.0));
    }

    #[test]
    fn greedy_wrap_example() {
        let lines = wrap_lines(&[text_fragment("hello world", 16.0)], 40.0);
        let texts: Vec<&str> = lines.iter().map(|l| l.pieces[0].text.as_str()).collect();
        assert_eq!(texts, vec!["hello", "world"]);
        let h: f64 = lines.iter().map(|l| l.height).sum();
        assert_eq!(fmt2(h), "38.40");
    }

    #[test]
    fn long_word_overflows_alone() {
        let lines = wrap_lines(&[text_fragment("a extraordinarily b", 16.0)], 40.0);
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].pieces[0].text, "extraordinarily");
    }

    #[test]
    fn fixed_width_intrinsic() {
        let (tree, ft) = laid_out("<div>x</div>", "div {width: 100px; margin: 0 10px}", 800.0, 1);
        let m = metrics_of(&tree, &ft, "div");
        assert_eq!((m.intrinsic_min_width, m.intrinsic_pref_width), (120.0, 120.0));
        assert_eq!(m.used_width, 100.0);
    }

    #[test]
    fn empty_block() {
        let (tree, ft) = laid_out("<div></div>", "", 800.0, 1);
        let m = metrics_of(&tree, &ft, "div");
        assert_eq!((m.intrinsic_min_width, m.intrinsic_pref_width, m.used_height), (0.0, 0.0, 0.0));
    }

    #[test]
    fn auto_width_subtracts_margins() {
        let (tree, ft) = laid_out("<div>x</div>", "div {margin: 0 10px}", 800.0, 2);
        assert_eq!(metrics_of(&tree, &ft, "div").used_width, 780.0);
        let (tree, ft) = laid_out("<div><p>x</p></div>", "div {width: 50px} p {margin: 0 30px}", 800.0, 2);
        assert_eq!(metrics_of(&tree, &ft, "p").used_width, 0.0);
    }

    #[test]
    fn blocks_stack() {
        let (tree, ft) =
            laid_out("<div><p class=a></p><p class=b></p></div>", ".a {height: 30px} .b {height: 50px}", 800.0, 1);
        assert_eq!(metrics_of(&tree, &ft, "div").used_height, 80.0);
        let b = ft.flow_for(tree.elements_named("p").nth(1).unwrap()).unwrap();
        assert_eq!(ft.absolute_position(b).1, 30.0);
    }

    #[test]
    fn single_text_page() {
        let (_, ft) = laid_out("hello world", "", 800.0, 1);
        let dump = dump_layout(&ft);
        assert!(dump.starts_with("block 0 0.00 0.00 800.00 19.20\n"), "{dump}");
        assert!(dump.ends_with("inline anon 0.00 0.00 800.00 19.20\n"), "{dump}");
    }

    #[test]
    fn marker_glues_to_first_word() {
        let mut style = ComputedStyle::initial().anonymous_inline();
        style.font_size = 10.0;
        let marker = Fragment::Marker { glyph: "\u{2022} ".into(), style, dom_origin: NodeId::from_index(0) };
        let frags = [marker, text_fragment("ab", 10.0)];
        let lines = wrap_lines(&frags, 100.0);
        assert_eq!(lines[0].pieces[1].x, 10.0);
        assert_eq!(inline_intrinsic(&frags), (10.0, 20.0));
    }

    #[test]
    fn workers_do_not_change_geometry() {
        let html = "<ul><li>one two three</li><li>four</li></ul><div>a<p>b c d e f</p>g</div>";
        let css = "p {padding: 3px; margin: 2px 1em} li {font-size: 1.5em}";
        let base = dump_layout(&laid_out(html, css, 120.0, 1).1);
        for w in [2, 4, 8] {
            assert_eq!(dump_layout(&laid_out(html, css, 120.0, w).1), base);
        }
    }

    #[test]
    fn incremental_with_nothing_dirty_visits_nothing() {
        let (_, mut ft) = laid_out("<div>x</div>", "", 800.0, 1);
        let stats = incremental_relayout(&mut ft, 800.0, TraversalOptions::with_workers(2)).unwrap();
        assert_eq!(stats.total(), 0);
    }

    #[test]
    fn incremental_all_dirty_equals_full() {
        let (_, mut ft) = laid_out("<div>x<p>y</p></div>", "", 800.0, 1);
        let before = dump_layout(&ft);
        ft.mark_all_dirty();
        incremental_relayout(&mut ft, 800.0, TraversalOptions::with_workers(2)).unwrap();
        assert_eq!(dump_layout(&ft), before);
        assert!(ft.self_dirty_flows().is_empty());
    }
}
