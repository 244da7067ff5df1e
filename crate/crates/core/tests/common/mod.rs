//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use minibrowser::dom::{DomTree, NodeId, NodeKind};
use rand::Rng;

pub struct CorpusPage {
    pub name: String,
    pub html: String,
    pub css: Vec<String>,
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("corpus")
}

/// Every `.html` file in the corpus with its same-named `.css`, if any.
pub fn corpus() -> Vec<CorpusPage> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "html"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let css = std::fs::read_to_string(p.with_extension("css")).into_iter().collect();
            CorpusPage {
                name: p.file_name().unwrap().to_string_lossy().into_owned(),
                html: std::fs::read_to_string(&p).unwrap(),
                css,
            }
        })
        .collect()
}

pub const TAGS: &[&str] = &["div", "p", "span", "ul", "li"];
pub const CLASSES: &[&str] = &["a", "b", "c"];
pub const IDS: &[&str] = &["x", "y"];

/// A random element tree of `n` elements below the document node.
pub fn random_dom(rng: &mut impl Rng, n: usize) -> DomTree {
    let mut tree = DomTree::new();
    let mut nodes: Vec<NodeId> = Vec::new();
    for _ in 0..n {
        let parent = if nodes.is_empty() { tree.root() } else { nodes[rng.gen_range(0..nodes.len())] };
        let tag = TAGS[rng.gen_range(0..TAGS.len())];
        let id = tree.append_child(parent, NodeKind::element(tag)).unwrap();
        if rng.gen_bool(0.5) {
            let k = rng.gen_range(1..=2);
            let classes: Vec<&str> = (0..k).map(|_| CLASSES[rng.gen_range(0..CLASSES.len())]).collect();
            tree.set_attribute(id, "class", &classes.join(" ")).unwrap();
        }
        if rng.gen_bool(0.15) {
            tree.set_attribute(id, "id", IDS[rng.gen_range(0..IDS.len())]).unwrap();
        }
        nodes.push(id);
    }
    tree
}

fn random_compound(rng: &mut impl Rng) -> String {
    let mut s = match rng.gen_range(0..3) {
        0 => "*".to_string(),
        1 => TAGS[rng.gen_range(0..TAGS.len())].to_string(),
        _ => String::new(),
    };
    if rng.gen_bool(0.2) {
        s.push('#');
        s.push_str(IDS[rng.gen_range(0..IDS.len())]);
    }
    if s.is_empty() || rng.gen_bool(0.4) {
        s.push('.');
        s.push_str(CLASSES[rng.gen_range(0..CLASSES.len())]);
    }
    s
}

/// Selector text with one to `max_compounds` compounds.
pub fn random_selector(rng: &mut impl Rng, max_compounds: usize) -> String {
    let n = rng.gen_range(1..=max_compounds);
    let mut parts = vec![random_compound(rng)];
    for _ in 1..n {
        parts.push(if rng.gen_bool(0.4) { ">".into() } else { String::new() });
        parts.push(random_compound(rng));
    }
    parts.retain(|p| !p.is_empty());
    parts.join(" ")
}

/// Matching oracle: tries every chain of ancestors for the compounds left
/// of the subject, with no pruning.
pub fn oracle_matches(selector: &str, tree: &DomTree, node: NodeId) -> bool {
    let mut compounds: Vec<&str> = Vec::new();
    let mut child_link: Vec<bool> = Vec::new();
    let mut pending_child = false;
    for tok in selector.split_whitespace() {
        if tok == ">" {
            pending_child = true;
        } else {
            if !compounds.is_empty() {
                child_link.push(pending_child);
            }
            pending_child = false;
            compounds.push(tok);
        }
    }
    let mut ancestors = Vec::new();
    let mut cur = tree.parent(node);
    while let Some(a) = cur {
        if tree.element_name(a).is_some() {
            ancestors.push(a);
        }
        cur = tree.parent(a);
    }
    if !compound_matches(compounds[compounds.len() - 1], tree, node) {
        return false;
    }
    // chain[i] is an index into `ancestors` (distance - 1) for compound
    // len-2-i; enumerate all strictly increasing chains.
    let need = compounds.len() - 1;
    let mut found = false;
    enumerate_chains(ancestors.len(), need, &mut Vec::new(), &mut |chain| {
        let ok = chain.iter().enumerate().all(|(i, &a)| {
            let ci = compounds.len() - 2 - i;
            if !compound_matches(compounds[ci], tree, ancestors[a]) {
                return false;
            }
            let prev = if i == 0 { None } else { Some(chain[i - 1]) };
            if child_link[ci] {
                // parent of the previous chain element
                match prev {
                    None => a == 0,
                    Some(p) => a == p + 1,
                }
            } else {
                true
            }
        });
        found |= ok;
    });
    found
}

fn enumerate_chains(n: usize, need: usize, chain: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if chain.len() == need {
        f(chain);
        return;
    }
    let start = chain.last().map_or(0, |&l| l + 1);
    for a in start..n {
        chain.push(a);
        enumerate_chains(n, need, chain, f);
        chain.pop();
    }
}

fn compound_matches(compound: &str, tree: &DomTree, node: NodeId) -> bool {
    let name = tree.element_name(node).unwrap();
    let classes: Vec<&str> = tree.attr(node, "class").map(|c| c.split_whitespace().collect()).unwrap_or_default();
    let id = tree.attr(node, "id");
    let mut rest = compound;
    let tag_end = rest.find(['.', '#']).unwrap_or(rest.len());
    let tag = &rest[..tag_end];
    if !(tag.is_empty() || tag == "*" || tag == name) {
        return false;
    }
    rest = &rest[tag_end..];
    while !rest.is_empty() {
        let kind = rest.as_bytes()[0];
        let end = rest[1..].find(['.', '#']).map_or(rest.len(), |e| e + 1);
        let value = &rest[1..end];
        let ok = if kind == b'#' { id == Some(value) } else { classes.contains(&value) };
        if !ok {
            return false;
        }
        rest = &rest[end..];
    }
    true
}

/// Element nodes of `tree` in document order.
pub fn elements(tree: &DomTree) -> Vec<NodeId> {
    tree.descendants(tree.root()).into_iter().filter(|&n| tree.element_name(n).is_some()).collect()
}

/// Random parent array for a tree of `n` nodes rooted at 0, either deep
/// (parents among the last few nodes) or wide (any earlier node).
pub fn random_parents(rng: &mut impl Rng, n: usize) -> Vec<Option<usize>> {
    let mut parents = vec![None];
    let deep = rng.gen_bool(0.5);
    for i in 1..n {
        let p = if deep { i - 1 - rng.gen_range(0..i.min(4)) } else { rng.gen_range(0..i) };
        parents.push(Some(p));
    }
    parents
}
