use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::expr::{read_attr_map, write_attr_map};
use crate::rules::Env;
use crate::xml::{parse_document, XmlWriter};

/// Canned response of one provider operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockResponse {
    /// Bindings merged into the instance environment.
    #[serde(default)]
    pub outputs: Env,
    /// Logical ticks the call takes.
    pub latency: u64,
}

/// Mock endpoints keyed by (provider id, operation).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Mocks {
    entries: BTreeMap<(String, String), MockResponse>,
}

impl Mocks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, provider: &str, operation: &str, response: MockResponse) {
        self.entries
            .insert((provider.to_string(), operation.to_string()), response);
    }

    pub fn get(&self, provider: &str, operation: &str) -> Option<&MockResponse> {
        self.entries.get(&(provider.to_string(), operation.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `<mocks><mock provider operation latency?>` with `<attr>`
    /// children for the outputs. Latency defaults to 1.
    pub fn from_xml(text: &str) -> Result<Mocks> {
        let root = parse_document(text)?;
        if root.name != "mocks" {
            return Err(Error::UnknownElement(root.name));
        }
        root.expect_no_text()?;
        let mut mocks = Mocks::new();
        for element in &root.children {
            if element.name != "mock" {
                return Err(Error::UnknownElement(element.name.clone()));
            }
            element.expect_no_text()?;
            let latency = match element.attr("latency") {
                None => 1,
                Some(text) => text
                    .parse()
                    .map_err(|_| Error::SchemaViolation(format!("mock@latency `{text}` is not a tick count")))?,
            };
            mocks.insert(
                element.required("provider")?,
                element.required("operation")?,
                MockResponse {
                    outputs: read_attr_map(element)?,
                    latency,
                },
            );
        }
        Ok(mocks)
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        if self.is_empty() {
            w.empty("mocks", &[]);
            return w.finish();
        }
        w.open("mocks", &[]);
        for ((provider, operation), response) in &self.entries {
            let latency = response.latency.to_string();
            let attrs = [("provider", provider.as_str()), ("operation", operation), ("latency", &latency)];
            if response.outputs.is_empty() {
                w.empty("mock", &attrs);
            } else {
                w.open("mock", &attrs);
                write_attr_map(&mut w, &response.outputs);
                w.close("mock");
            }
        }
        w.close("mocks");
        w.finish()
    }
}

/// Reads an environment document: `<env>` with `<attr>` children.
pub fn parse_env(text: &str) -> Result<Env> {
    let root = parse_document(text)?;
    if root.name != "env" {
        return Err(Error::UnknownElement(root.name));
    }
    root.expect_no_text()?;
    read_attr_map(&root)
}

pub fn serialize_env(env: &Env) -> String {
    let mut w = XmlWriter::new();
    if env.is_empty() {
        w.empty("env", &[]);
    } else {
        w.open("env", &[]);
        write_attr_map(&mut w, env);
        w.close("env");
    }
    w.finish()
}
