//! Synthetic pages for benchmarks and randomized tests.

use rand::rngs::SmallRng;
use rand::{Rng, SeedableRng};

/// A balanced tree of `div`s with `branching` children per inner node and
/// a short text in each leaf, holding roughly `flows` flows in total.
pub fn wide_tree_page(flows: usize, branching: usize) -> String {
    let branching = branching.max(1);
    // Each leaf contributes a block and an anonymous inline.
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut total = 1;
    let mut next = 0;
    while total < flows {
        if children[next].len() == branching {
            next += 1;
        }
        let id = children.len();
        children.push(Vec::new());
        children[next].push(id);
        total += if children[next].len() == 1 { 1 } else { 2 };
    }
    let mut html = String::from("<html><body>");
    let mut stack = vec![(0usize, false)];
    while let Some((n, closing)) = stack.pop() {
        if closing {
            html.push_str("</div>");
            continue;
        }
        html.push_str(&format!("<div class=\"n{}\">", n % 7));
        if children[n].is_empty() {
            html.push_str(&format!("leaf {n} text"));
        }
        stack.push((n, true));
        for &c in children[n].iter().rev() {
            stack.push((c, false));
        }
    }
    html.push_str("</body></html>");
    html
}

/// Stylesheet used with [`wide_tree_page`].
pub fn wide_tree_css() -> String {
    (0..7)
        .map(|i| format!(".n{i} {{ padding: {}px; margin: 0 {}px; font-size: {}px }}\n", i % 3, i % 2, 12 + i))
        .collect()
}

const TAGS: &[&str] = &["div", "p", "span", "em", "ul", "li", "h1", "h2", "section", "b"];
const WORDS: &[&str] = &["alpha", "be", "gamma", "do", "epsilon", "zeta", "x", "longerword", "io"];
const CLASSES: &[&str] = &["a", "b", "c", "d"];

/// Random well-formed markup with about `elements` elements.
pub fn random_page(seed: u64, elements: usize) -> String {
    let mut rng = SmallRng::seed_from_u64(seed);
    let mut html = String::from("<html><body>");
    let mut open: Vec<&str> = Vec::new();
    let mut made = 0;
    while made < elements {
        match rng.gen_range(0..10) {
            0..=4 => {
                let tag = TAGS[rng.gen_range(0..TAGS.len())];
                html.push('<');
                html.push_str(tag);
                if rng.gen_bool(0.5) {
                    html.push_str(&format!(" class=\"{}\"", CLASSES[rng.gen_range(0..CLASSES.len())]));
                }
                if rng.gen_bool(0.1) {
                    html.push_str(&format!(" id=\"i{}\"", rng.gen_range(0..5)));
                }
                if rng.gen_bool(0.1) {
                    html.push_str(&format!(" style=\"padding: {}px\"", rng.gen_range(0..4)));
                }
                html.push('>');
                open.push(tag);
                made += 1;
            }
            5..=7 => {
                let n = rng.gen_range(1..5);
                let words: Vec<&str> = (0..n).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect();
                html.push_str(&words.join(" "));
                html.push(' ');
            }
            _ => {
                if let Some(tag) = open.pop() {
                    html.push_str(&format!("</{tag}>"));
                }
            }
        }
    }
    while let Some(tag) = open.pop() {
        html.push_str(&format!("</{tag}>"));
    }
    html.push_str("</body></html>");
    html
}

/// Random rules over the vocabulary of [`random_page`].
pub fn random_css(seed: u64, rules: usize) -> String {
    let mut rng = SmallRng::seed_from_u64(seed);
    let mut css = String::new();
    for _ in 0..rules {
        let compounds = rng.gen_range(1..=3);
        let mut sel = Vec::new();
        for i in 0..compounds {
            if i > 0 && rng.gen_bool(0.3) {
                sel.push(">".to_string());
            }
            let mut c = match rng.gen_range(0..3) {
                0 => "*".to_string(),
                1 => TAGS[rng.gen_range(0..TAGS.len())].to_string(),
                _ => String::new(),
            };
            if c.is_empty() || rng.gen_bool(0.3) {
                c.push('.');
                c.push_str(CLASSES[rng.gen_range(0..CLASSES.len())]);
            }
            sel.push(c);
        }
        let decl = match rng.gen_range(0..7) {
            0 => format!("margin: {}px {}px", rng.gen_range(0..6), rng.gen_range(0..6)),
            1 => format!("padding: {}px", rng.gen_range(0..5)),
            2 => format!("font-size: {}px", rng.gen_range(8..30)),
            3 => format!("width: {}px", rng.gen_range(20..300)),
            4 => {
                ["display: block", "display: inline", "display: list-item", "display: none"][rng.gen_range(0..4)].into()
            }
            5 => format!("font-size: {}em", [0.5, 1.0, 1.5, 2.0][rng.gen_range(0..4)]),
            _ => format!("height: {}px", rng.gen_range(0..60)),
        };
        css.push_str(&format!("{} {{ {decl} }}\n", sel.join(" ")));
    }
    css
}
