//! Speculative scan of unconsumed input for resources worth fetching early.
//!
//! The scan ignores comments and script context, so it can report URLs the
//! real parse will never request. It never misses one in a well-formed
//! `img`, `script`, or `link` tag outside a comment.

const PREFETCH_TAGS: [&str; 3] = ["img", "script", "link"];

/// `src`/`href` values of `img`, `script`, and `link` tags, in document order.
pub fn scan_prefetch(pending: &str) -> Vec<String> {
    let chars: Vec<char> = pending.chars().collect();
    let mut urls = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] != '<' {
            i += 1;
            continue;
        }
        i += 1;
        let start = i;
        while i < chars.len() && chars[i].is_ascii_alphanumeric() {
            i += 1;
        }
        let name: String = chars[start..i].iter().collect::<String>().to_ascii_lowercase();
        if !PREFETCH_TAGS.contains(&name.as_str()) {
            continue;
        }
        i = scan_attributes(&chars, i, &mut urls);
    }
    urls
}

/// Reads attributes up to the closing `>`; returns the index after it.
fn scan_attributes(chars: &[char], mut i: usize, urls: &mut Vec<String>) -> usize {
    loop {
        while i < chars.len() && (chars[i].is_whitespace() || chars[i] == '/') {
            i += 1;
        }
        if i >= chars.len() {
            return i;
        }
        if chars[i] == '>' {
            return i + 1;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() && !matches!(chars[i], '=' | '>' | '/') {
            i += 1;
        }
        let name: String = chars[start..i].iter().collect::<String>().to_ascii_lowercase();
        while i < chars.len() && chars[i].is_whitespace() {
            i += 1;
        }
        if i >= chars.len() || chars[i] != '=' {
            continue;
        }
        i += 1;
        while i < chars.len() && chars[i].is_whitespace() {
            i += 1;
        }
        let value = if i < chars.len() && (chars[i] == '"' || chars[i] == '\'') {
            let quote = chars[i];
            i += 1;
            let start = i;
            while i < chars.len() && chars[i] != quote {
                i += 1;
            }
            let v: String = chars[start..i].iter().collect();
            i = (i + 1).min(chars.len());
            v
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '>' {
                i += 1;
            }
            chars[start..i].iter().collect()
        };
        if (name == "src" || name == "href") && !value.is_empty() {
            urls.push(value);
        }
    }
}
