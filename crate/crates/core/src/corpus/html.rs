//! A small, strict HTML reader: enough to walk the pages our sites emit and
//! the forms agents need to fill in. Tags must nest properly; void elements
//! (`input`, `br`, `meta`, ...) need no end tag.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed html at byte {offset}: {reason}")]
pub struct HtmlError {
    pub offset: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
}

const VOID: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track", "wbr",
];

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.attr("class")
            .is_some_and(|c| c.split_ascii_whitespace().any(|x| x == class))
    }

    /// Depth-first, document order.
    pub fn descendants(&self) -> Vec<&Element> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a Element, out: &mut Vec<&'a Element>) {
            for c in &e.children {
                if let Node::Element(child) = c {
                    out.push(child);
                    walk(child, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn find<'a>(&'a self, pred: impl Fn(&Element) -> bool) -> Option<&'a Element> {
        self.descendants().into_iter().find(|e| pred(e))
    }

    pub fn find_all<'a>(&'a self, pred: impl Fn(&Element) -> bool) -> Vec<&'a Element> {
        self.descendants().into_iter().filter(|e| pred(e)).collect()
    }

    pub fn by_id(&self, id: &str) -> Option<&Element> {
        self.find(|e| e.attr("id") == Some(id))
    }

    /// Concatenated text of all descendant text nodes.
    pub fn text(&self) -> String {
        let mut s = String::new();
        fn walk(e: &Element, s: &mut String) {
            for c in &e.children {
                match c {
                    Node::Text(t) => s.push_str(t),
                    Node::Element(child) => walk(child, s),
                }
            }
        }
        walk(self, &mut s);
        s
    }
}

/// Parses a document into a synthetic root element named `#document`.
pub fn parse(html: &str) -> Result<Element, HtmlError> {
    Parser { src: html, pos: 0 }.run()
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, reason: impl Into<String>) -> Result<T, HtmlError> {
        Err(HtmlError {
            offset: self.pos,
            reason: reason.into(),
        })
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn run(mut self) -> Result<Element, HtmlError> {
        let mut stack = vec![Element {
            name: "#document".into(),
            attrs: Vec::new(),
            children: Vec::new(),
        }];
        while self.pos < self.src.len() {
            let rest = self.rest();
            if let Some(after) = rest.strip_prefix("<!--") {
                let Some(end) = after.find("-->") else {
                    return self.err("unterminated comment");
                };
                self.pos += 4 + end + 3;
            } else if rest.starts_with("<!") {
                let Some(end) = rest.find('>') else {
                    return self.err("unterminated declaration");
                };
                self.pos += end + 1;
            } else if let Some(after) = rest.strip_prefix("</") {
                let Some(end) = after.find('>') else {
                    return self.err("unterminated end tag");
                };
                let name = after[..end].trim().to_ascii_lowercase();
                let Some(open) = stack.pop() else {
                    return self.err("unbalanced end tag");
                };
                if open.name != name || stack.is_empty() {
                    return self.err(format!("end tag </{name}> does not close <{}>", open.name));
                }
                stack.last_mut().unwrap().children.push(Node::Element(open));
                self.pos += 2 + end + 1;
            } else if rest.starts_with('<') {
                let (el, self_closing) = self.start_tag()?;
                if self_closing || VOID.contains(&el.name.as_str()) {
                    stack.last_mut().unwrap().children.push(Node::Element(el));
                } else {
                    stack.push(el);
                }
            } else {
                let end = rest.find('<').unwrap_or(rest.len());
                let text = unescape(&rest[..end]).map_err(|reason| HtmlError {
                    offset: self.pos,
                    reason,
                })?;
                if !text.is_empty() {
                    stack.last_mut().unwrap().children.push(Node::Text(text));
                }
                self.pos += end;
            }
        }
        if stack.len() != 1 {
            return self.err(format!("unclosed <{}>", stack.last().unwrap().name));
        }
        Ok(stack.pop().unwrap())
    }

    fn start_tag(&mut self) -> Result<(Element, bool), HtmlError> {
        self.pos += 1;
        let name = self.ident();
        if name.is_empty() {
            return self.err("empty tag name");
        }
        let mut attrs = Vec::new();
        loop {
            self.skip_ws();
            let rest = self.rest();
            if rest.starts_with("/>") {
                self.pos += 2;
                return Ok((element(name, attrs), true));
            }
            if rest.starts_with('>') {
                self.pos += 1;
                return Ok((element(name, attrs), false));
            }
            if rest.is_empty() {
                return self.err("unterminated start tag");
            }
            let key = self.ident();
            if key.is_empty() {
                return self.err("bad attribute name");
            }
            self.skip_ws();
            let value = if self.rest().starts_with('=') {
                self.pos += 1;
                self.skip_ws();
                self.attr_value()?
            } else {
                String::new()
            };
            attrs.push((key, value));
        }
    }

    fn ident(&mut self) -> String {
        let rest = self.rest();
        let end = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == ':'))
            .unwrap_or(rest.len());
        self.pos += end;
        rest[..end].to_ascii_lowercase()
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
    }

    fn attr_value(&mut self) -> Result<String, HtmlError> {
        let rest = self.rest();
        let raw = if let Some(q) = rest.chars().next().filter(|c| *c == '"' || *c == '\'') {
            let Some(end) = rest[1..].find(q) else {
                return self.err("unterminated attribute value");
            };
            self.pos += end + 2;
            &rest[1..1 + end]
        } else {
            let end = rest
                .find(|c: char| c.is_whitespace() || c == '>')
                .unwrap_or(rest.len());
            let end = if rest[..end].ends_with('/') && rest[end..].starts_with('>') {
                end - 1
            } else {
                end
            };
            self.pos += end;
            &rest[..end]
        };
        unescape(raw).map_err(|reason| HtmlError {
            offset: self.pos,
            reason,
        })
    }
}

fn element(name: String, attrs: Vec<(String, String)>) -> Element {
    Element {
        name,
        attrs,
        children: Vec::new(),
    }
}

/// Escapes the five XML-special characters.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

pub fn unescape(s: &str) -> Result<String, String> {
    if !s.contains('&') {
        return Ok(s.to_string());
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let Some(end) = rest.find(';') else {
            return Err(format!("unterminated entity in {s:?}"));
        };
        let name = &rest[1..end];
        let ch = match name {
            "amp" => '&',
            "lt" => '<',
            "gt" => '>',
            "quot" => '"',
            "apos" => '\'',
            "nbsp" => '\u{a0}',
            _ => {
                let code = if let Some(hex) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                    u32::from_str_radix(hex, 16).ok()
                } else if let Some(dec) = name.strip_prefix('#') {
                    dec.parse().ok()
                } else {
                    None
                };
                code.and_then(char::from_u32)
                    .ok_or_else(|| format!("unknown entity &{name};"))?
            }
        };
        out.push(ch);
        rest = &rest[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Serializes an element tree back to markup.
pub fn render(el: &Element) -> String {
    let mut s = String::new();
    fn walk(e: &Element, s: &mut String) {
        if e.name == "#document" {
            for c in &e.children {
                node(c, s);
            }
            return;
        }
        let _ = write!(s, "<{}", e.name);
        for (k, v) in &e.attrs {
            let _ = write!(s, " {k}=\"{}\"", escape(v));
        }
        if VOID.contains(&e.name.as_str()) {
            s.push_str("/>");
            return;
        }
        s.push('>');
        for c in &e.children {
            node(c, s);
        }
        let _ = write!(s, "</{}>", e.name);
    }
    fn node(n: &Node, s: &mut String) {
        match n {
            Node::Text(t) => s.push_str(&escape(t)),
            Node::Element(e) => walk(e, s),
        }
    }
    walk(el, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_nested_form() {
        let doc = parse(
            "<!DOCTYPE html><html><body><!-- c --><form id=\"f\" action=\"/x\">\
             <input type=text name=q value='a&amp;b'/><input name=\"z\"><button id=\"go\">Go</button></form></body></html>",
        )
        .unwrap();
        let form = doc.by_id("f").unwrap();
        assert_eq!(form.attr("action"), Some("/x"));
        let inputs = form.find_all(|e| e.name == "input");
        assert_eq!(inputs.len(), 2);
        assert_eq!(inputs[0].attr("value"), Some("a&b"));
        assert_eq!(inputs[0].attr("type"), Some("text"));
        assert_eq!(doc.by_id("go").unwrap().text(), "Go");
    }

    #[test]
    fn rejects_mismatched_and_unclosed() {
        assert!(parse("<div><span></div>").is_err());
        assert!(parse("<div>").is_err());
        assert!(parse("</div>").is_err());
        assert!(parse("<p>&bogus;</p>").is_err());
    }

    #[test]
    fn numeric_entities() {
        assert_eq!(unescape("&#39;&#x41;&lt;").unwrap(), "'A<");
    }

    proptest! {
        #[test]
        fn escape_round_trips(s in "\\PC*") {
            prop_assert_eq!(unescape(&escape(&s)).unwrap(), s.clone());
            let doc = parse(&format!("<p title=\"{}\">{}</p>", escape(&s), escape(&s))).unwrap();
            let p = doc.find(|e| e.name == "p").unwrap();
            prop_assert_eq!(p.attr("title").unwrap(), s.as_str());
            prop_assert_eq!(p.text(), s);
        }
    }
}
