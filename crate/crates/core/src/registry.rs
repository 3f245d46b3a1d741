//! Service registry and broker: provider records grouped into families and
//! discovery-rule based provider proposals.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::expr::{read_attr_map, write_attr_map};
use crate::rules::{DiscoveryRule, Env};
use crate::xml::{parse_document, XmlWriter};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provider {
    pub id: String,
    pub family: String,
    #[serde(default)]
    pub attributes: Env,
    #[serde(default)]
    pub endpoint: String,
}

impl Provider {
    pub fn new(id: impl Into<String>, family: impl Into<String>) -> Self {
        Provider {
            id: id.into(),
            family: family.into(),
            attributes: Env::new(),
            endpoint: String::new(),
        }
    }

    pub fn with_attr(mut self, path: &str, value: impl Into<crate::rules::Scalar>) -> Self {
        self.attributes.insert(path.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Registry {
    providers: BTreeMap<String, Provider>,
    by_family: BTreeMap<String, BTreeSet<String>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, provider: Provider) -> Result<()> {
        if provider.id.is_empty() || provider.family.is_empty() {
            return Err(Error::SchemaViolation(format!(
                "provider `{}` needs a non-empty id and family",
                provider.id
            )));
        }
        if self.providers.contains_key(&provider.id) {
            return Err(Error::DuplicateProvider(provider.id));
        }
        self.by_family
            .entry(provider.family.clone())
            .or_default()
            .insert(provider.id.clone());
        self.providers.insert(provider.id.clone(), provider);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Provider> {
        self.providers.get(id)
    }

    pub fn families(&self) -> impl Iterator<Item = &str> {
        self.by_family.keys().map(String::as_str)
    }

    pub fn family(&self, family: &str) -> Vec<&Provider> {
        self.by_family
            .get(family)
            .into_iter()
            .flatten()
            .map(|id| &self.providers[id])
            .collect()
    }

    pub fn len(&self) -> usize {
        self.providers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.providers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Provider> {
        self.providers.values()
    }

    /// Providers satisfying every discovery rule attached to `task`, ordered
    /// by (family, id). Rules for other tasks are ignored; with no rules at
    /// all, every provider is proposed. An empty result is a valid proposal.
    pub fn discover(&self, task: &str, rules: &[DiscoveryRule]) -> Vec<&Provider> {
        let applicable: Vec<&DiscoveryRule> = rules.iter().filter(|r| r.task == task).collect();
        let mut out: Vec<&Provider> = self
            .providers
            .values()
            .filter(|p| {
                applicable.iter().all(|r| {
                    r.family.as_ref().is_none_or(|f| *f == p.family)
                        && r.predicate.eval(&p.attributes)
                })
            })
            .collect();
        out.sort_by(|a, b| (&a.family, &a.id).cmp(&(&b.family, &b.id)));
        out
    }

    /// Loads a `<providers>` document.
    pub fn from_xml(text: &str) -> Result<Registry> {
        let root = parse_document(text)?;
        if root.name != "providers" {
            return Err(Error::UnknownElement(root.name));
        }
        root.expect_no_text()?;
        let mut registry = Registry::new();
        for element in &root.children {
            if element.name != "provider" {
                return Err(Error::UnknownElement(element.name.clone()));
            }
            element.expect_no_text()?;
            registry.register(Provider {
                id: element.required("id")?.to_string(),
                family: element.required("family")?.to_string(),
                endpoint: element.attr("endpoint").unwrap_or_default().to_string(),
                attributes: read_attr_map(element)?,
            })?;
        }
        Ok(registry)
    }

    pub fn to_xml(&self) -> String {
        let mut w = XmlWriter::new();
        if self.is_empty() {
            w.empty("providers", &[]);
            return w.finish();
        }
        w.open("providers", &[]);
        for p in self.providers.values() {
            let attrs = [("id", p.id.as_str()), ("family", &p.family), ("endpoint", &p.endpoint)];
            if p.attributes.is_empty() {
                w.empty("provider", &attrs);
            } else {
                w.open("provider", &attrs);
                write_attr_map(&mut w, &p.attributes);
                w.close("provider");
            }
        }
        w.close("providers");
        w.finish()
    }
}

/// Thread-safe registry handle: concurrent reads, exclusive atomic writes.
#[derive(Debug, Clone, Default)]
pub struct SharedRegistry(Arc<RwLock<Registry>>);

impl SharedRegistry {
    pub fn new(registry: Registry) -> Self {
        SharedRegistry(Arc::new(RwLock::new(registry)))
    }

    pub fn register(&self, provider: Provider) -> Result<()> {
        self.0.write().expect("registry lock poisoned").register(provider)
    }

    pub fn read<T>(&self, f: impl FnOnce(&Registry) -> T) -> T {
        f(&self.0.read().expect("registry lock poisoned"))
    }
}
