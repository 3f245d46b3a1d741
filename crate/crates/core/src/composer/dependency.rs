use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{BehaviorRule, Relation};

/// Ordering and exclusion constraints among the selected tasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub vertices: Vec<String>,
    pub precedence: BTreeSet<(String, String)>,
    pub response: BTreeSet<(String, String)>,
    /// Unordered pairs, stored with the smaller id first.
    pub exclusive: BTreeSet<(String, String)>,
}

impl DependencyGraph {
    pub fn index_of(&self, task: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == task)
    }

    /// Precedence and response edges as index pairs, deduplicated.
    pub fn ordering_edges(&self) -> BTreeSet<(usize, usize)> {
        self.precedence
            .iter()
            .chain(&self.response)
            .filter_map(|(a, b)| Some((self.index_of(a)?, self.index_of(b)?)))
            .collect()
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let mut succ = vec![Vec::new(); self.vertices.len()];
        for (a, b) in self.ordering_edges() {
            succ[a].push(b);
        }
        succ
    }

    /// Exclusive components: groups of tasks linked by exclusive pairs,
    /// as a component id per vertex.
    pub fn exclusive_components(&self) -> Vec<usize> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut root = x;
            while parent[root] != root {
                root = parent[root];
            }
            let mut cur = x;
            while parent[cur] != root {
                let next = parent[cur];
                parent[cur] = root;
                cur = next;
            }
            root
        }
        for (a, b) in &self.exclusive {
            if let (Some(a), Some(b)) = (self.index_of(a), self.index_of(b)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                // the smaller index is the representative: deterministic labels
                let (lo, hi) = (ra.min(rb), ra.max(rb));
                parent[hi] = lo;
            }
        }
        (0..n).map(|v| find(&mut parent, v)).collect()
    }

    /// Longest-path depth of every vertex over ordering edges, with all
    /// members of an exclusive component sharing one depth.
    pub fn depths(&self) -> Vec<usize> {
        let component = self.exclusive_components();
        let n = self.vertices.len();
        let mut comp_preds: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for (a, b) in self.ordering_edges() {
            comp_preds
                .entry(component[b])
                .or_default()
                .insert(component[a]);
        }
        let mut memo: BTreeMap<usize, usize> = BTreeMap::new();
        fn depth_of(
            c: usize,
            preds: &BTreeMap<usize, BTreeSet<usize>>,
            memo: &mut BTreeMap<usize, usize>,
        ) -> usize {
            if let Some(d) = memo.get(&c) {
                return *d;
            }
            let d = preds
                .get(&c)
                .map(|ps| {
                    ps.iter()
                        .map(|p| depth_of(*p, preds, memo) + 1)
                        .max()
                        .unwrap_or(0)
                })
                .unwrap_or(0);
            memo.insert(c, d);
            d
        }
        (0..n)
            .map(|v| depth_of(component[v], &comp_preds, &mut memo))
            .collect()
    }

    /// Tasks grouped by depth, each level in vertex order.
    pub fn levels(&self) -> Vec<Vec<String>> {
        let depths = self.depths();
        let height = depths.iter().copied().max().map_or(0, |d| d + 1);
        let mut levels = vec![Vec::new(); height];
        for (v, d) in depths.iter().enumerate() {
            levels[*d].push(self.vertices[v].clone());
        }
        levels
    }
}

/// Builds the dependency graph from the selected tasks, the ordering pairs
/// implied by the goal model and the behavior rules.
///
/// Besides acyclicity, every exclusive pair must be realizable as the
/// branches of one exclusive choice: its tasks may not be ordered relative
/// to each other (directly or transitively), a task that may be skipped
/// cannot be required by a later task (antecedent of a precedence edge) or
/// demanded by an earlier one (consequent of a response edge), and the
/// exclusive groups must admit a common layering.
pub fn build_dependency_graph(
    tasks: &[&str],
    implied: &[(String, String)],
    rules: &[BehaviorRule],
) -> Result<DependencyGraph> {
    let known: BTreeSet<&str> = tasks.iter().copied().collect();
    let check = |t: &str| {
        if known.contains(t) {
            Ok(())
        } else {
            Err(Error::DanglingRuleRef(t.to_string()))
        }
    };

    let mut dep = DependencyGraph {
        vertices: Vec::new(),
        precedence: BTreeSet::new(),
        response: BTreeSet::new(),
        exclusive: BTreeSet::new(),
    };
    let mut seen = BTreeSet::new();
    for t in tasks {
        if seen.insert(*t) {
            dep.vertices.push(t.to_string());
        }
    }
    for (a, b) in implied {
        check(a)?;
        check(b)?;
        if a != b {
            dep.precedence.insert((a.clone(), b.clone()));
        }
    }
    for rule in rules {
        check(&rule.antecedent)?;
        check(&rule.consequent)?;
        let pair = (rule.antecedent.clone(), rule.consequent.clone());
        match rule.relation {
            Relation::Precedence => {
                dep.precedence.insert(pair);
            }
            Relation::Response => {
                dep.response.insert(pair);
            }
            Relation::Exclusive => {
                let (a, b) = pair;
                dep.exclusive
                    .insert(if a <= b { (a, b) } else { (b, a) });
            }
        }
    }

    if let Some(cycle) = find_cycle(&dep) {
        return Err(Error::CyclicRules(cycle));
    }
    check_exclusive(&dep)?;
    Ok(dep)
}

/// First cycle found by a DFS in vertex order, closed (first == last).
fn find_cycle(dep: &DependencyGraph) -> Option<Vec<String>> {
    let succ = dep.successors();
    let n = dep.vertices.len();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack: Vec<usize> = Vec::new();

    fn dfs(
        v: usize,
        succ: &[Vec<usize>],
        state: &mut [u8],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        state[v] = 1;
        stack.push(v);
        for &w in &succ[v] {
            match state[w] {
                1 => {
                    let start = stack.iter().position(|x| *x == w).expect("on stack");
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(w);
                    return Some(cycle);
                }
                0 => {
                    if let Some(cycle) = dfs(w, succ, state, stack) {
                        return Some(cycle);
                    }
                }
                _ => {}
            }
        }
        stack.pop();
        state[v] = 2;
        None
    }

    (0..n).find_map(|v| {
        if state[v] != 0 {
            return None;
        }
        dfs(v, &succ, &mut state, &mut stack)
            .map(|cycle| cycle.iter().map(|i| dep.vertices[*i].clone()).collect())
    })
}

fn reachable(succ: &[Vec<usize>], from: usize) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut todo = vec![from];
    while let Some(v) = todo.pop() {
        for &w in &succ[v] {
            if !seen[w] {
                seen[w] = true;
                todo.push(w);
            }
        }
    }
    seen
}

fn check_exclusive(dep: &DependencyGraph) -> Result<()> {
    if dep.exclusive.is_empty() {
        return Ok(());
    }
    let succ = dep.successors();
    let conflict = |a: &str, b: &str| Error::ExclusiveConflict(a.to_string(), b.to_string());

    for (a, b) in &dep.exclusive {
        let (ia, ib) = (
            dep.index_of(a).expect("checked"),
            dep.index_of(b).expect("checked"),
        );
        if reachable(&succ, ia)[ib] || reachable(&succ, ib)[ia] {
            return Err(conflict(a, b));
        }
        for t in [a, b] {
            let required_later = dep.precedence.iter().any(|(x, _)| x == t);
            let demanded = dep.response.iter().any(|(_, y)| y == t);
            if required_later || demanded {
                return Err(conflict(a, b));
            }
        }
    }

    // the condensation over exclusive groups must stay acyclic
    let component = dep.exclusive_components();
    let mut comp_succ: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (x, y) in dep.ordering_edges() {
        let (cx, cy) = (component[x], component[y]);
        comp_succ.entry(cx).or_default().insert(cy);
    }
    let comps: BTreeSet<usize> = component.iter().copied().collect();
    for &c in &comps {
        let mut seen = BTreeSet::new();
        let mut todo: Vec<usize> = comp_succ.get(&c).into_iter().flatten().copied().collect();
        while let Some(d) = todo.pop() {
            if d == c {
                let (a, b) = dep
                    .exclusive
                    .iter()
                    .find(|(a, _)| component[dep.index_of(a).expect("checked")] == c)
                    .expect("a cyclic component has an exclusive pair");
                return Err(conflict(a, b));
            }
            if seen.insert(d) {
                todo.extend(comp_succ.get(&d).into_iter().flatten().copied());
            }
        }
    }
    Ok(())
}
