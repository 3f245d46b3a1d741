//! Hierarchical business goals and the task catalog they map onto.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::xml::{parse_document, split_list, Element, XmlWriter};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub name: String,
    pub operation: String,
    pub participant: String,
    #[serde(default)]
    pub inputs: Vec<String>,
    #[serde(default)]
    pub outputs: Vec<String>,
    /// Service family the participant's partner link must be bound to.
    /// Defaults to the participant name.
    #[serde(default)]
    pub family: Option<String>,
}

impl Task {
    pub fn new(
        id: impl Into<String>,
        operation: impl Into<String>,
        participant: impl Into<String>,
    ) -> Self {
        let id = id.into();
        Task {
            name: id.clone(),
            id,
            operation: operation.into(),
            participant: participant.into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            family: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidGoal {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.id.is_empty() {
            return Err(invalid("task id is empty"));
        }
        if self.operation.is_empty() {
            return Err(invalid("task operation is empty"));
        }
        if self.participant.is_empty() {
            return Err(invalid("task participant is empty"));
        }
        let bad_var = |v: &String| v.is_empty() || v.contains(',') || v.trim() != v;
        if self.inputs.iter().chain(&self.outputs).any(bad_var) {
            return Err(invalid("variable names must be non-empty and comma-free"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub id: String,
    pub name: String,
    /// Children (or task refs) form a sequence rather than an unordered set.
    pub ordered: bool,
    #[serde(default)]
    pub children: Vec<Goal>,
    #[serde(default)]
    pub task_refs: Vec<String>,
}

impl Goal {
    pub fn leaf(id: impl Into<String>, ordered: bool, tasks: &[&str]) -> Self {
        let id = id.into();
        Goal {
            name: id.clone(),
            id,
            ordered,
            children: Vec::new(),
            task_refs: tasks.iter().map(|t| t.to_string()).collect(),
        }
    }

    pub fn node(id: impl Into<String>, ordered: bool, children: Vec<Goal>) -> Self {
        let id = id.into();
        Goal {
            name: id.clone(),
            id,
            ordered,
            children,
            task_refs: Vec::new(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Task refs of every leaf below (and including) this goal, in document order.
    pub fn leaf_tasks(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_tasks(&mut out);
        out
    }

    fn collect_tasks<'a>(&'a self, out: &mut Vec<&'a str>) {
        out.extend(self.task_refs.iter().map(String::as_str));
        for child in &self.children {
            child.collect_tasks(out);
        }
    }

    pub fn find(&self, id: &str) -> Option<&Goal> {
        if self.id == id {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalModel {
    /// Actor whose request starts the process, if any.
    #[serde(default)]
    pub requester: Option<String>,
    pub tasks: Vec<Task>,
    pub root: Goal,
}

/// Tasks reached by a goal selection plus the precedence pairs implied by
/// ordered goals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub tasks: Vec<Task>,
    pub implied: Vec<(String, String)>,
}

impl GoalModel {
    pub fn new(tasks: Vec<Task>, root: Goal) -> Result<Self> {
        let model = GoalModel {
            requester: None,
            tasks,
            root,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// Validates catalog and tree, reporting the first problem in document order.
    pub fn validate(&self) -> Result<()> {
        let mut task_ids = BTreeSet::new();
        for task in &self.tasks {
            task.validate()?;
            if !task_ids.insert(task.id.as_str()) {
                return Err(Error::DuplicateTaskId(task.id.clone()));
            }
        }
        let mut goal_ids = BTreeSet::new();
        validate_goal(&self.root, &task_ids, &mut goal_ids)
    }

    pub fn select(&self, ids: &[&str]) -> Result<Selection> {
        select_goals(self, ids)
    }
}

fn validate_goal<'a>(
    goal: &'a Goal,
    task_ids: &BTreeSet<&str>,
    goal_ids: &mut BTreeSet<&'a str>,
) -> Result<()> {
    if goal.id.is_empty() {
        return Err(Error::InvalidGoal {
            id: goal.id.clone(),
            reason: "empty goal id".into(),
        });
    }
    if !goal_ids.insert(goal.id.as_str()) {
        return Err(Error::DuplicateGoalId(goal.id.clone()));
    }
    match (goal.children.is_empty(), goal.task_refs.is_empty()) {
        (true, true) => {
            return Err(Error::InvalidGoal {
                id: goal.id.clone(),
                reason: "a goal needs sub-goals or task references".into(),
            })
        }
        (false, false) => {
            return Err(Error::InvalidGoal {
                id: goal.id.clone(),
                reason: "a goal cannot mix sub-goals and task references".into(),
            })
        }
        _ => {}
    }
    for task in &goal.task_refs {
        if !task_ids.contains(task.as_str()) {
            return Err(Error::DanglingTaskRef(task.clone()));
        }
    }
    goal.children
        .iter()
        .try_for_each(|child| validate_goal(child, task_ids, goal_ids))
}

/// Resolves a goal selection into tasks and implied precedence pairs.
///
/// Selecting a goal selects its whole subtree. For every ordered goal on a
/// path to a selected task, consecutive children that contain selected
/// tasks yield the pair (last selected task of child i, first selected task
/// of child i+1). Task refs of an ordered leaf are its children.
pub fn select_goals(model: &GoalModel, ids: &[&str]) -> Result<Selection> {
    if ids.is_empty() {
        return Err(Error::EmptySelection);
    }
    for id in ids {
        if model.root.find(id).is_none() {
            return Err(Error::UnknownGoal(id.to_string()));
        }
    }
    let selected: BTreeSet<&str> = ids.iter().copied().collect();

    let mut order: Vec<&str> = Vec::new();
    let mut implied: Vec<(String, String)> = Vec::new();
    walk(&model.root, false, &selected, &mut order, &mut implied);

    let mut seen = BTreeSet::new();
    let tasks: Vec<Task> = order
        .iter()
        .filter(|id| seen.insert(**id))
        .map(|id| {
            model
                .task(id)
                .cloned()
                .ok_or_else(|| Error::DanglingTaskRef(id.to_string()))
        })
        .collect::<Result<_>>()?;

    let position: BTreeMap<&str, usize> = tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.as_str(), i))
        .collect();
    let mut unique = BTreeSet::new();
    implied.retain(|(a, b)| a != b && unique.insert((a.clone(), b.clone())));
    implied.sort_by_key(|(a, b)| (position[a.as_str()], position[b.as_str()]));

    Ok(Selection { tasks, implied })
}

/// Returns the (first, last) selected task under `goal`, emitting pairs on the way.
fn walk<'a>(
    goal: &'a Goal,
    covered: bool,
    selected: &BTreeSet<&str>,
    order: &mut Vec<&'a str>,
    implied: &mut Vec<(String, String)>,
) -> Option<(&'a str, &'a str)> {
    let covered = covered || selected.contains(goal.id.as_str());
    let spans: Vec<(&str, &str)> = if goal.is_leaf() {
        if !covered {
            return None;
        }
        goal.task_refs
            .iter()
            .map(|t| {
                order.push(t);
                (t.as_str(), t.as_str())
            })
            .collect()
    } else {
        goal.children
            .iter()
            .filter_map(|child| walk(child, covered, selected, order, implied))
            .collect()
    };
    if goal.ordered {
        for pair in spans.windows(2) {
            implied.push((pair[0].1.to_string(), pair[1].0.to_string()));
        }
    }
    Some((spans.first()?.0, spans.last()?.1))
}

fn read_task(element: &Element) -> Result<Task> {
    if element.name != "task" {
        return Err(Error::UnknownElement(element.name.clone()));
    }
    element.expect_no_text()?;
    if let Some(child) = element.children.first() {
        return Err(Error::UnknownElement(child.name.clone()));
    }
    let id = element.required("id")?.to_string();
    Ok(Task {
        name: element.attr("name").unwrap_or(&id).to_string(),
        operation: element.required("operation")?.to_string(),
        participant: element.required("participant")?.to_string(),
        inputs: split_list(element.attr("inputs")),
        outputs: split_list(element.attr("outputs")),
        family: element.attr("family").map(str::to_string),
        id,
    })
}

fn read_goal(element: &Element) -> Result<Goal> {
    element.expect_no_text()?;
    let id = element.required("id")?.to_string();
    let ordered = match element.attr("ordered").unwrap_or("false") {
        "true" => true,
        "false" => false,
        other => {
            return Err(Error::InvalidGoal {
                id,
                reason: format!("ordered must be true or false, got `{other}`"),
            })
        }
    };
    let mut goal = Goal {
        name: element.attr("name").unwrap_or(&id).to_string(),
        id,
        ordered,
        children: Vec::new(),
        task_refs: Vec::new(),
    };
    for child in &element.children {
        match child.name.as_str() {
            "goal" => goal.children.push(read_goal(child)?),
            "taskRef" => goal.task_refs.push(child.required("id")?.to_string()),
            other => return Err(Error::UnknownElement(other.to_string())),
        }
    }
    Ok(goal)
}

/// Parses and validates a `<goalModel>` document.
pub fn load_goal_model(text: &str) -> Result<GoalModel> {
    let root = parse_document(text)?;
    if root.name != "goalModel" {
        return Err(Error::UnknownElement(root.name));
    }
    root.expect_no_text()?;
    let mut tasks = Vec::new();
    let mut goals = Vec::new();
    for child in &root.children {
        match child.name.as_str() {
            "tasks" => {
                child.expect_no_text()?;
                for task in &child.children {
                    tasks.push(read_task(task)?);
                }
            }
            "goal" => goals.push(read_goal(child)?),
            other => return Err(Error::UnknownElement(other.to_string())),
        }
    }
    // a forest has no single root: the hierarchy is not a strict tree
    if goals.len() != 1 {
        return Err(Error::CyclicGoal);
    }
    let model = GoalModel {
        requester: root.attr("requester").map(str::to_string),
        tasks,
        root: goals.remove(0),
    };
    model.validate()?;
    Ok(model)
}

/// Canonical `<goalModel>` document.
pub fn serialize_goal_model(model: &GoalModel) -> String {
    let mut w = XmlWriter::new();
    match &model.requester {
        Some(requester) => w.open("goalModel", &[("requester", requester)]),
        None => w.open("goalModel", &[]),
    }
    if model.tasks.is_empty() {
        w.empty("tasks", &[]);
    } else {
        w.open("tasks", &[]);
        for task in &model.tasks {
            let inputs = task.inputs.join(",");
            let outputs = task.outputs.join(",");
            let mut attrs = vec![
                ("id", task.id.as_str()),
                ("name", task.name.as_str()),
                ("operation", task.operation.as_str()),
                ("participant", task.participant.as_str()),
            ];
            if !inputs.is_empty() {
                attrs.push(("inputs", &inputs));
            }
            if !outputs.is_empty() {
                attrs.push(("outputs", &outputs));
            }
            if let Some(family) = &task.family {
                attrs.push(("family", family));
            }
            w.empty("task", &attrs);
        }
        w.close("tasks");
    }
    write_goal(&mut w, &model.root);
    w.close("goalModel");
    w.finish()
}

fn write_goal(w: &mut XmlWriter, goal: &Goal) {
    let ordered = if goal.ordered { "true" } else { "false" };
    let attrs = [("id", goal.id.as_str()), ("name", &goal.name), ("ordered", ordered)];
    if goal.children.is_empty() && goal.task_refs.is_empty() {
        w.empty("goal", &attrs);
        return;
    }
    w.open("goal", &attrs);
    for task in &goal.task_refs {
        w.empty("taskRef", &[("id", task)]);
    }
    for child in &goal.children {
        write_goal(w, child);
    }
    w.close("goal");
}
