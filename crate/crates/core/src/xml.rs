//! Minimal element tree on top of `quick-xml`, plus the canonical writer
//! shared by every document format in the crate.
//!
//! Canonical output: one element per line, two-space indentation, attributes
//! in the order the caller supplies them, childless elements self-closed,
//! text-only elements written inline, and a single trailing newline.

use quick_xml::escape::{escape, resolve_predefined_entity};
use quick_xml::events::Event;
use quick_xml::{Reader, XmlVersion};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Element>,
    /// Concatenation of all character data directly inside this element.
    pub text: String,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn required(&self, name: &str) -> Result<&str> {
        self.attr(name)
            .ok_or_else(|| Error::MissingAttribute(format!("{}@{}", self.name, name)))
    }

    /// Fails unless the element has no non-whitespace character data.
    pub fn expect_no_text(&self) -> Result<()> {
        if self.text.trim().is_empty() {
            Ok(())
        } else {
            Err(Error::XmlSyntax(format!(
                "unexpected text inside <{}>",
                self.name
            )))
        }
    }
}

fn syntax<E: std::fmt::Display>(err: E) -> Error {
    Error::XmlSyntax(err.to_string())
}

/// Parses a document into its root element. Comments, processing
/// instructions and the XML declaration are skipped.
pub fn parse_document(text: &str) -> Result<Element> {
    let mut reader = Reader::from_str(text);
    reader.config_mut().trim_text(false);
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;

    loop {
        match reader.read_event().map_err(syntax)? {
            Event::Start(start) => {
                if root.is_some() {
                    return Err(Error::XmlSyntax("content after the root element".into()));
                }
                stack.push(open_element(&start)?);
            }
            Event::Empty(start) => {
                if root.is_some() {
                    return Err(Error::XmlSyntax("content after the root element".into()));
                }
                let element = open_element(&start)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(element),
                    None => root = Some(element),
                }
            }
            Event::End(_) => {
                let element = stack
                    .pop()
                    .ok_or_else(|| Error::XmlSyntax("unbalanced end tag".into()))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(element),
                    None => root = Some(element),
                }
            }
            Event::Text(text) => {
                let content = text.xml_content(XmlVersion::Implicit1_0);
                match stack.last_mut() {
                    Some(current) => current.text.push_str(&content),
                    None if content.trim().is_empty() => {}
                    None => return Err(Error::XmlSyntax("text outside the root element".into())),
                }
            }
            Event::CData(data) => {
                let content = data.xml_content(XmlVersion::Implicit1_0);
                match stack.last_mut() {
                    Some(current) => current.text.push_str(&content),
                    None => return Err(Error::XmlSyntax("CDATA outside the root element".into())),
                }
            }
            Event::GeneralRef(reference) => {
                let current = stack
                    .last_mut()
                    .ok_or_else(|| Error::XmlSyntax("entity outside the root element".into()))?;
                if let Some(ch) = reference.resolve_char_ref().map_err(syntax)? {
                    current.text.push(ch);
                } else {
                    let name = reference.xml_content(XmlVersion::Implicit1_0);
                    let value = resolve_predefined_entity(&name).ok_or_else(|| {
                        Error::XmlSyntax(format!("unknown entity `&{name};`"))
                    })?;
                    current.text.push_str(value);
                }
            }
            Event::Eof => break,
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
        }
    }

    if !stack.is_empty() {
        return Err(Error::XmlSyntax("unexpected end of document".into()));
    }
    root.ok_or_else(|| Error::XmlSyntax("document has no root element".into()))
}

fn open_element(start: &quick_xml::events::BytesStart<'_>) -> Result<Element> {
    let name = start.name().0.to_string();
    let mut attrs = Vec::new();
    for attr in start.attributes() {
        let attr = attr.map_err(syntax)?;
        let key = attr.key.0.to_string();
        let value = attr
            .normalized_value(XmlVersion::Implicit1_0)
            .map_err(syntax)?
            .into_owned();
        attrs.push((key, value));
    }
    Ok(Element {
        name,
        attrs,
        ..Element::default()
    })
}

/// Streaming writer for canonical documents.
#[derive(Debug, Default)]
pub struct XmlWriter {
    out: String,
    depth: usize,
}

impl XmlWriter {
    pub fn new() -> Self {
        Self::default()
    }

    fn start_tag(&mut self, name: &str, attrs: &[(&str, &str)]) {
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push('<');
        self.out.push_str(name);
        for (key, value) in attrs {
            self.out.push(' ');
            self.out.push_str(key);
            self.out.push_str("=\"");
            self.out.push_str(&escape(*value));
            self.out.push('"');
        }
    }

    pub fn open(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.start_tag(name, attrs);
        self.out.push_str(">\n");
        self.depth += 1;
    }

    pub fn close(&mut self, name: &str) {
        self.depth -= 1;
        for _ in 0..self.depth {
            self.out.push_str("  ");
        }
        self.out.push_str("</");
        self.out.push_str(name);
        self.out.push_str(">\n");
    }

    pub fn empty(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.start_tag(name, attrs);
        self.out.push_str("/>\n");
    }

    /// `<name attrs>text</name>`, or self-closed when `text` is empty.
    pub fn text_element(&mut self, name: &str, attrs: &[(&str, &str)], text: &str) {
        if text.is_empty() {
            self.empty(name, attrs);
            return;
        }
        self.start_tag(name, attrs);
        self.out.push('>');
        self.out.push_str(&escape(text));
        self.out.push_str("</");
        self.out.push_str(name);
        self.out.push_str(">\n");
    }

    pub fn finish(self) -> String {
        self.out
    }
}

pub(crate) fn split_list(value: Option<&str>) -> Vec<String> {
    value
        .map(|v| {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_elements_and_entities() {
        let root = parse_document(
            "<?xml version=\"1.0\"?>\n<a x=\"1 &amp; 2\"><!-- c --><b>t&lt;u&#x41;</b><c/></a>",
        )
        .unwrap();
        assert_eq!(root.name, "a");
        assert_eq!(root.attr("x"), Some("1 & 2"));
        assert_eq!(root.children.len(), 2);
        assert_eq!(root.children[0].text, "t<uA");
        assert_eq!(root.children[1].name, "c");
    }

    #[test]
    fn rejects_unbalanced_and_trailing_content() {
        assert!(matches!(parse_document("<a><b></a>"), Err(Error::XmlSyntax(_))));
        assert!(matches!(parse_document("<a/><b/>"), Err(Error::XmlSyntax(_))));
        assert!(matches!(parse_document(""), Err(Error::XmlSyntax(_))));
        assert!(matches!(parse_document("<a>"), Err(Error::XmlSyntax(_))));
    }

    #[test]
    fn writer_is_reparseable() {
        let mut w = XmlWriter::new();
        w.open("root", &[("name", "a\"b<c")]);
        w.text_element("leaf", &[], "x & y");
        w.text_element("blank", &[("k", "v")], "");
        w.close("root");
        let text = w.finish();
        assert_eq!(
            text,
            "<root name=\"a&quot;b&lt;c\">\n  <leaf>x &amp; y</leaf>\n  <blank k=\"v\"/>\n</root>\n"
        );
        let root = parse_document(&text).unwrap();
        assert_eq!(root.attr("name"), Some("a\"b<c"));
        assert_eq!(root.children[0].text, "x & y");
    }
}
