use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};

use super::{parse_rules, Rule, RuleKind};

/// Rules keyed by id, with secondary indexes by kind and by referenced task.
#[derive(Debug, Clone, Default)]
pub struct RuleRepository {
    rules: BTreeMap<String, Rule>,
    by_kind: BTreeMap<RuleKind, BTreeSet<String>>,
    by_task: BTreeMap<String, BTreeSet<String>>,
}

impl RuleRepository {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rules(rules: impl IntoIterator<Item = Rule>) -> Result<Self> {
        let mut repo = Self::new();
        for rule in rules {
            repo.put(rule)?;
        }
        Ok(repo)
    }

    /// Loads every `*.xml` file of a directory, in file-name order.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let mut paths: Vec<_> = std::fs::read_dir(dir.as_ref())?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "xml"))
            .collect();
        paths.sort();
        let mut repo = Self::new();
        for path in paths {
            let text = std::fs::read_to_string(&path)?;
            for rule in parse_rules(&text)? {
                repo.put(rule)?;
            }
        }
        Ok(repo)
    }

    pub fn put(&mut self, rule: Rule) -> Result<()> {
        rule.validate()?;
        let id = rule.id().to_string();
        if self.rules.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.by_kind
            .entry(rule.kind())
            .or_default()
            .insert(id.clone());
        for task in rule.task_refs() {
            self.by_task
                .entry(task.to_string())
                .or_default()
                .insert(id.clone());
        }
        self.rules.insert(id, rule);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&Rule> {
        self.rules
            .get(id)
            .ok_or_else(|| Error::NotFound(format!("rule {id}")))
    }

    pub fn remove(&mut self, id: &str) -> Result<Rule> {
        let rule = self
            .rules
            .remove(id)
            .ok_or_else(|| Error::NotFound(format!("rule {id}")))?;
        if let Some(ids) = self.by_kind.get_mut(&rule.kind()) {
            ids.remove(id);
        }
        for task in rule.task_refs() {
            if let Some(ids) = self.by_task.get_mut(task) {
                ids.remove(id);
                if ids.is_empty() {
                    self.by_task.remove(task);
                }
            }
        }
        Ok(rule)
    }

    /// Rules matching every given filter, in id order.
    pub fn query(&self, kind: Option<RuleKind>, task: Option<&str>) -> Vec<&Rule> {
        let empty = BTreeSet::new();
        let ids: Box<dyn Iterator<Item = &String>> = match (kind, task) {
            (None, None) => Box::new(self.rules.keys()),
            (Some(kind), None) => Box::new(self.by_kind.get(&kind).unwrap_or(&empty).iter()),
            (None, Some(task)) => Box::new(self.by_task.get(task).unwrap_or(&empty).iter()),
            (Some(kind), Some(task)) => {
                let of_kind = self.by_kind.get(&kind).unwrap_or(&empty);
                Box::new(
                    self.by_task
                        .get(task)
                        .unwrap_or(&empty)
                        .iter()
                        .filter(move |id| of_kind.contains(*id)),
                )
            }
        };
        ids.map(|id| &self.rules[id]).collect()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rule> {
        self.rules.values()
    }

    /// Checks that both secondary indexes agree with the primary store.
    pub fn indexes_consistent(&self) -> bool {
        let mut kinds: BTreeMap<RuleKind, BTreeSet<String>> = BTreeMap::new();
        let mut tasks: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (id, rule) in &self.rules {
            kinds.entry(rule.kind()).or_default().insert(id.clone());
            for task in rule.task_refs() {
                tasks.entry(task.to_string()).or_default().insert(id.clone());
            }
        }
        let strip = |m: &BTreeMap<RuleKind, BTreeSet<String>>| {
            m.iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, v)| (*k, v.clone()))
                .collect::<BTreeMap<_, _>>()
        };
        strip(&self.by_kind) == kinds && self.by_task == tasks
    }
}

/// Thread-safe handle: concurrent readers, exclusive writers.
#[derive(Debug, Clone, Default)]
pub struct SharedRuleRepository(Arc<RwLock<RuleRepository>>);

impl SharedRuleRepository {
    pub fn new(repo: RuleRepository) -> Self {
        SharedRuleRepository(Arc::new(RwLock::new(repo)))
    }

    pub fn put(&self, rule: Rule) -> Result<()> {
        self.0.write().expect("rule repository lock poisoned").put(rule)
    }

    /// Runs `f` under a read lock.
    pub fn read<T>(&self, f: impl FnOnce(&RuleRepository) -> T) -> T {
        f(&self.0.read().expect("rule repository lock poisoned"))
    }

    pub fn query_owned(&self, kind: Option<RuleKind>, task: Option<&str>) -> Vec<Rule> {
        self.read(|repo| repo.query(kind, task).into_iter().cloned().collect())
    }
}
