use super::{DomTree, NodeId, NodeKind};

const VOID_ELEMENTS: &[&str] =
    &["area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track", "wbr"];
const RAW_TEXT: &[&str] = &["script", "style"];

/// HTML serialization of the document's children: lowercase names,
/// double-quoted attributes, `&`/`<`/`>` escaped in text.
pub fn serialize(tree: &DomTree) -> String {
    let mut out = String::new();
    for &c in tree.children(tree.root()) {
        write_node(tree, c, false, &mut out);
    }
    out
}

fn write_node(tree: &DomTree, id: NodeId, raw: bool, out: &mut String) {
    let Some(node) = tree.get(id) else { return };
    match &node.kind {
        NodeKind::Document => {}
        NodeKind::Text(t) if raw => out.push_str(t),
        NodeKind::Text(t) => {
            for c in t.chars() {
                match c {
                    '&' => out.push_str("&amp;"),
                    '<' => out.push_str("&lt;"),
                    '>' => out.push_str("&gt;"),
                    c => out.push(c),
                }
            }
        }
        NodeKind::Comment(t) => {
            out.push_str("<!--");
            out.push_str(t);
            out.push_str("-->");
        }
        NodeKind::Element { name, attributes } => {
            out.push('<');
            out.push_str(name);
            for (k, v) in attributes.iter() {
                out.push(' ');
                out.push_str(k);
                out.push_str("=\"");
                out.push_str(&v.replace('&', "&amp;").replace('"', "&quot;"));
                out.push('"');
            }
            out.push('>');
            if VOID_ELEMENTS.contains(&name.as_str()) {
                return;
            }
            let raw = RAW_TEXT.contains(&name.as_str());
            for &c in &node.children {
                write_node(tree, c, raw, out);
            }
            out.push_str("</");
            out.push_str(name);
            out.push('>');
        }
    }
}
