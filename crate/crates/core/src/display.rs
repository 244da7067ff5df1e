//! Display list construction and a software painter.

use std::fmt::Write as _;

use thiserror::Error;

use crate::flow::{FlowKind, FlowTree};
use crate::fmt2;
use crate::layout::char_advance;
use crate::style::{Color, Rgb};

/// Glyph box height as a fraction of the font size.
pub const GLYPH_HEIGHT: f64 = 0.8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DisplayError {
    #[error("flow {0} has not been laid out")]
    LayoutIncomplete(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DisplayItem {
    SolidRect {
        x: f64,
        y: f64,
        w: f64,
        h: f64,
        color: Rgb,
    },
    /// `(x, y)` is the left end of the baseline.
    TextRun {
        x: f64,
        y: f64,
        text: String,
        font_size: f64,
        color: Rgb,
    },
}

/// Backgrounds before content, flows in pre-order.
pub fn build_display_list(tree: &FlowTree) -> Result<Vec<DisplayItem>, DisplayError> {
    let mut items = Vec::new();
    for f in tree.preorder() {
        let m = tree.metrics(f);
        if !m.laid_out {
            return Err(DisplayError::LayoutIncomplete(f));
        }
        let flow = tree.flow(f);
        let (x, y) = tree.absolute_position(f);
        match flow.kind {
            FlowKind::Block => {
                if let Color::Rgb(color) = flow.style.background_color {
                    items.push(DisplayItem::SolidRect { x, y, w: m.used_width, h: m.used_height, color });
                }
            }
            FlowKind::Inline => {
                for line in &m.lines {
                    for piece in &line.pieces {
                        let style = flow.fragments[piece.fragment].style();
                        if let Color::Rgb(color) = style.color {
                            items.push(DisplayItem::TextRun {
                                x: x + piece.x,
                                y: y + line.baseline,
                                text: piece.text.clone(),
                                font_size: style.font_size,
                                color,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(items)
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// JSON array, one item per line, numbers with two decimals.
pub fn to_json(items: &[DisplayItem]) -> String {
    if items.is_empty() {
        return "[]\n".to_string();
    }
    let mut out = String::from("[\n");
    for (i, item) in items.iter().enumerate() {
        out.push_str("  ");
        match item {
            DisplayItem::SolidRect { x, y, w, h, color } => {
                let _ = write!(
                    out,
                    "{{\"type\":\"rect\",\"x\":{},\"y\":{},\"w\":{},\"h\":{},\"color\":\"{color}\"}}",
                    fmt2(*x),
                    fmt2(*y),
                    fmt2(*w),
                    fmt2(*h)
                );
            }
            DisplayItem::TextRun { x, y, text, font_size, color } => {
                let _ = write!(
                    out,
                    "{{\"type\":\"text\",\"x\":{},\"y\":{},\"text\":{},\"font_size\":{},\"color\":\"{color}\"}}",
                    fmt2(*x),
                    fmt2(*y),
                    json_string(text),
                    fmt2(*font_size)
                );
            }
        }
        out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples.
    pub pixels: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, fill: Rgb) -> RasterImage {
        let pixels = [fill.0, fill.1, fill.2].repeat(width * height);
        RasterImage { width, height, pixels }
    }

    pub fn pixel(&self, x: usize, y: usize) -> Rgb {
        let i = (y * self.width + x) * 3;
        Rgb(self.pixels[i], self.pixels[i + 1], self.pixels[i + 2])
    }

    /// Fills every pixel whose center lies in `[x, x+w) x [y, y+h)`.
    pub fn fill_rect(&mut self, x: f64, y: f64, w: f64, h: f64, color: Rgb) {
        let (cols, rows) = (span(x, w, self.width), span(y, h, self.height));
        for py in rows {
            for px in cols.clone() {
                let i = (py * self.width + px) * 3;
                self.pixels[i..i + 3].copy_from_slice(&[color.0, color.1, color.2]);
            }
        }
    }

    /// Binary PPM (P6), maxval 255.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Pixel indices whose centers fall in `[start, start+len)`, clipped to `limit`.
fn span(start: f64, len: f64, limit: usize) -> std::ops::Range<usize> {
    if len <= 0.0 || !start.is_finite() || !len.is_finite() {
        return 0..0;
    }
    let first = (start - 0.5).ceil().max(0.0);
    let end = (start + len - 0.5).ceil().max(0.0);
    let first = (first as usize).min(limit);
    let end = (end as usize).min(limit);
    first..end.max(first)
}

/// Paints `items` in order onto a white canvas. Glyphs are solid boxes.
pub fn paint(items: &[DisplayItem], width: usize, height: usize) -> RasterImage {
    let mut image = RasterImage::new(width, height, Rgb::WHITE);
    for item in items {
        match item {
            DisplayItem::SolidRect { x, y, w, h, color } => image.fill_rect(*x, *y, *w, *h, *color),
            DisplayItem::TextRun { x, y, text, font_size, color } => {
                let adv = char_advance(*font_size);
                let glyph_h = GLYPH_HEIGHT * font_size;
                for (i, c) in text.chars().enumerate() {
                    if !c.is_whitespace() {
                        image.fill_rect(x + i as f64 * adv, y - glyph_h, adv, glyph_h, *color);
                    }
                }
            }
        }
    }
    image
}
