//! Well-formulated tasks, blueprints and decomposition steps.
//!
//! A [`Blueprint`] pairs a set of [`TaskSpec`]s with a [`Protocol`]: a
//! directed graph whose nodes are the entry and exit points, task
//! invocations, controller actions and bounded loops, and whose edges carry
//! either control flow or a named field from one payload to another.
//! Blueprints are plain values; [`embed_sub_blueprint`] returns a new one and
//! leaves its input untouched.

pub mod catalog;
mod schema;
mod tractability;
mod validate;

pub use schema::{FieldType, SchemaDef, SchemaRegistry};
pub use tractability::{TractabilityMark, TractabilityTable};
pub use validate::{validate_blueprint, Finding, ValidationReport};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlueprintError {
    #[error("task `{task}` has an empty {which} schema")]
    EmptySchema { task: String, which: &'static str },
    #[error("task `{task}` refers to unregistered schema `{schema}`")]
    UnknownSchema { task: String, schema: String },
    #[error("task id must not be empty")]
    EmptyTaskId,
    #[error("no task `{0}` in blueprint")]
    UnknownTask(String),
    #[error("sub-blueprint has no unique {0} node")]
    MissingBoundary(&'static str),
    #[error("splice of `{task}` changes its {which} schema from `{expected}` to `{found}`")]
    InterfaceMismatch {
        task: String,
        which: &'static str,
        expected: String,
        found: String,
    },
    #[error("id `{0}` already used in the parent blueprint")]
    DuplicateId(String),
    #[error("task `{0}` has a self-loop edge, which cannot be spliced")]
    SelfLoop(String),
    #[error("accuracy {0} outside [0, 1]")]
    InvalidAccuracy(f64),
    #[error("tractability threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("sample count must be at least 1")]
    NoSamples,
}

/// A well-formulated task: input domain, output co-domain and the name of
/// the correctness relation between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub input_schema: String,
    pub output_schema: String,
    /// Identifier of the requirement predicate, resolved by the evaluator.
    pub requirement: String,
    /// Free-form annotation, e.g. why a subtask is simpler than its parent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TaskSpec {
    pub fn new(
        id: impl Into<String>,
        input_schema: impl Into<String>,
        output_schema: impl Into<String>,
        requirement: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            input_schema: input_schema.into(),
            output_schema: output_schema.into(),
            requirement: requirement.into(),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn check(&self, registry: &SchemaRegistry) -> Result<(), BlueprintError> {
        if self.id.is_empty() {
            return Err(BlueprintError::EmptyTaskId);
        }
        for (which, schema) in [("input", &self.input_schema), ("output", &self.output_schema)] {
            if schema.is_empty() {
                return Err(BlueprintError::EmptySchema {
                    task: self.id.clone(),
                    which,
                });
            }
            if !registry.contains(schema) {
                return Err(BlueprintError::UnknownSchema {
                    task: self.id.clone(),
                    schema: schema.clone(),
                });
            }
        }
        Ok(())
    }
}

/// How many times a loop may run, in terms of the instance size N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum IterationBound {
    /// N iterations.
    ItemCount,
    /// N² iterations.
    SquaredSize,
    Fixed(u64),
}

impl IterationBound {
    pub fn resolve(self, size: usize) -> u64 {
        match self {
            IterationBound::ItemCount => size as u64,
            IterationBound::SquaredSize => (size as u64).saturating_mul(size as u64),
            IterationBound::Fixed(k) => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NodeKind {
    Entry {
        schema: String,
    },
    Exit {
        schema: String,
    },
    /// Invocation of the task whose id equals the node id.
    Task,
    /// Bookkeeping done by the controller itself (union, item selection).
    Controller {
        action: String,
        input_schema: String,
        output_schema: String,
    },
    Loop {
        exit_predicate: String,
        #[serde(default)]
        bound: Option<IterationBound>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    #[serde(flatten)]
    pub kind: NodeKind,
}

impl Node {
    pub fn task(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            kind: NodeKind::Task,
        }
    }

    pub fn entry(schema: impl Into<String>) -> Self {
        Self {
            id: "entry".into(),
            kind: NodeKind::Entry {
                schema: schema.into(),
            },
        }
    }

    pub fn exit(schema: impl Into<String>) -> Self {
        Self {
            id: "exit".into(),
            kind: NodeKind::Exit {
                schema: schema.into(),
            },
        }
    }

    pub fn controller(
        id: impl Into<String>,
        action: impl Into<String>,
        input_schema: impl Into<String>,
        output_schema: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            kind: NodeKind::Controller {
                action: action.into(),
                input_schema: input_schema.into(),
                output_schema: output_schema.into(),
            },
        }
    }

    pub fn looping(
        id: impl Into<String>,
        exit_predicate: impl Into<String>,
        bound: Option<IterationBound>,
    ) -> Self {
        Self {
            id: id.into(),
            kind: NodeKind::Loop {
                exit_predicate: exit_predicate.into(),
                bound,
            },
        }
    }

    fn is_boundary(&self) -> bool {
        matches!(self.kind, NodeKind::Entry { .. } | NodeKind::Exit { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EdgeKind {
    Control,
    /// Field `from_field` of the source's output feeds field `to_field` of the
    /// target's input.
    Data { from_field: String, to_field: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
    #[serde(flatten)]
    pub kind: EdgeKind,
}

impl Edge {
    pub fn control(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            kind: EdgeKind::Control,
        }
    }

    pub fn data(
        from: impl Into<String>,
        to: impl Into<String>,
        from_field: impl Into<String>,
        to_field: impl Into<String>,
    ) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            kind: EdgeKind::Data {
                from_field: from_field.into(),
                to_field: to_field.into(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl Protocol {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    fn unique<F: Fn(&NodeKind) -> bool>(&self, pred: F) -> Option<&Node> {
        let mut it = self.nodes.iter().filter(|n| pred(&n.kind));
        match (it.next(), it.next()) {
            (Some(n), None) => Some(n),
            _ => None,
        }
    }

    pub fn entry(&self) -> Option<&Node> {
        self.unique(|k| matches!(k, NodeKind::Entry { .. }))
    }

    pub fn exit(&self) -> Option<&Node> {
        self.unique(|k| matches!(k, NodeKind::Exit { .. }))
    }
}

/// Task set plus orchestration protocol. Serializes as
/// `{"tasks": [...], "protocol": {"nodes": [...], "edges": [...]}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Blueprint {
    tasks: Vec<TaskSpec>,
    protocol: Protocol,
}

impl Blueprint {
    /// Assembles a blueprint without checking it; see [`validate_blueprint`].
    pub fn from_parts(tasks: Vec<TaskSpec>, protocol: Protocol) -> Self {
        Self { tasks, protocol }
    }

    pub fn tasks(&self) -> &[TaskSpec] {
        &self.tasks
    }

    pub fn task(&self, id: &str) -> Option<&TaskSpec> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn task_ids(&self) -> BTreeSet<&str> {
        self.tasks.iter().map(|t| t.id.as_str()).collect()
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    pub fn entry_schema(&self) -> Option<&str> {
        match &self.protocol.entry()?.kind {
            NodeKind::Entry { schema } => Some(schema),
            _ => None,
        }
    }

    pub fn exit_schema(&self) -> Option<&str> {
        match &self.protocol.exit()?.kind {
            NodeKind::Exit { schema } => Some(schema),
            _ => None,
        }
    }

    /// Returns a copy with one more edge.
    pub fn with_edge(&self, edge: Edge) -> Blueprint {
        let mut next = self.clone();
        next.protocol.edges.push(edge);
        next
    }
}

/// Replaces one task of a blueprint by a sub-blueprint with the same
/// external interface.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionStep {
    pub replaced_task: String,
    pub sub_blueprint: Blueprint,
    /// Human justification that each subtask is simpler; not machine-checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<String>,
}

/// A one-task blueprint: `entry -> task -> exit`, every input field fed from
/// the entry and every output field delivered to the exit.
pub fn create_blueprint(
    task: TaskSpec,
    registry: &SchemaRegistry,
) -> Result<Blueprint, BlueprintError> {
    task.check(registry)?;
    let input = registry.get(&task.input_schema).expect("checked");
    let output = registry.get(&task.output_schema).expect("checked");
    let mut edges = vec![
        Edge::control("entry", &task.id),
        Edge::control(&task.id, "exit"),
    ];
    edges.extend(input.fields.keys().map(|f| Edge::data("entry", &task.id, f, f)));
    edges.extend(output.fields.keys().map(|f| Edge::data(&task.id, "exit", f, f)));
    let protocol = Protocol {
        nodes: vec![
            Node::entry(&task.input_schema),
            Node::task(&task.id),
            Node::exit(&task.output_schema),
        ],
        edges,
    };
    Ok(Blueprint {
        tasks: vec![task],
        protocol,
    })
}

fn compose(a: &EdgeKind, b: &EdgeKind) -> Option<EdgeKind> {
    match (a, b) {
        (EdgeKind::Control, EdgeKind::Control) => Some(EdgeKind::Control),
        (
            EdgeKind::Data {
                from_field,
                to_field: mid_in,
            },
            EdgeKind::Data {
                from_field: mid_out,
                to_field,
            },
        ) if mid_in == mid_out => Some(EdgeKind::Data {
            from_field: from_field.clone(),
            to_field: to_field.clone(),
        }),
        _ => None,
    }
}

/// Splices `step.sub_blueprint` in place of `step.replaced_task`.
///
/// The new task set is `(T \ {t}) ∪ T_sub`. Every edge that entered the
/// replaced task is composed with the sub-blueprint's outgoing entry edges,
/// and every edge that left it with the sub-blueprint's incoming exit edges.
/// Control composes with control; a data edge composes with another when
/// the intermediate field names agree.
pub fn embed_sub_blueprint(
    parent: &Blueprint,
    step: &DecompositionStep,
) -> Result<Blueprint, BlueprintError> {
    let name = &step.replaced_task;
    let replaced = parent
        .task(name)
        .ok_or_else(|| BlueprintError::UnknownTask(name.clone()))?;
    let sub = &step.sub_blueprint;
    let sub_entry = sub.protocol.entry().ok_or(BlueprintError::MissingBoundary("entry"))?;
    let sub_exit = sub.protocol.exit().ok_or(BlueprintError::MissingBoundary("exit"))?;
    let (entry_schema, exit_schema) = (sub.entry_schema().unwrap(), sub.exit_schema().unwrap());
    for (which, expected, found) in [
        ("input", &replaced.input_schema, entry_schema),
        ("output", &replaced.output_schema, exit_schema),
    ] {
        if expected != found {
            return Err(BlueprintError::InterfaceMismatch {
                task: name.clone(),
                which,
                expected: expected.clone(),
                found: found.to_string(),
            });
        }
    }

    let parent_nodes: BTreeSet<&str> = parent
        .protocol
        .nodes
        .iter()
        .map(|n| n.id.as_str())
        .filter(|id| id != name)
        .collect();
    let parent_tasks: BTreeSet<&str> =
        parent.task_ids().into_iter().filter(|id| id != name).collect();
    for t in &sub.tasks {
        if parent_tasks.contains(t.id.as_str()) {
            return Err(BlueprintError::DuplicateId(t.id.clone()));
        }
    }
    let inner: Vec<&Node> = sub.protocol.nodes.iter().filter(|n| !n.is_boundary()).collect();
    for n in &inner {
        if parent_nodes.contains(n.id.as_str()) {
            return Err(BlueprintError::DuplicateId(n.id.clone()));
        }
    }
    if parent.protocol.edges.iter().any(|e| &e.from == name && &e.to == name) {
        return Err(BlueprintError::SelfLoop(name.clone()));
    }

    let mut tasks = Vec::with_capacity(parent.tasks.len() + sub.tasks.len());
    for t in &parent.tasks {
        if &t.id == name {
            tasks.extend(sub.tasks.iter().cloned());
        } else {
            tasks.push(t.clone());
        }
    }

    let mut nodes = Vec::new();
    for n in &parent.protocol.nodes {
        if &n.id == name {
            nodes.extend(inner.iter().map(|&n| n.clone()));
        } else {
            nodes.push(n.clone());
        }
    }

    let incoming: Vec<&Edge> = parent.protocol.edges.iter().filter(|e| &e.to == name).collect();
    let outgoing: Vec<&Edge> = parent.protocol.edges.iter().filter(|e| &e.from == name).collect();
    let (entry_id, exit_id) = (&sub_entry.id, &sub_exit.id);

    let mut edges: Vec<Edge> = Vec::new();
    let mut push = |e: Edge| {
        if !edges.contains(&e) {
            edges.push(e);
        }
    };
    for e in parent.protocol.edges.iter() {
        if &e.from != name && &e.to != name {
            push(e.clone());
        }
    }
    for s in &sub.protocol.edges {
        match (&s.from == entry_id, &s.to == exit_id) {
            (false, false) => push(s.clone()),
            (true, false) => {
                for i in &incoming {
                    if let Some(kind) = compose(&i.kind, &s.kind) {
                        push(Edge { from: i.from.clone(), to: s.to.clone(), kind });
                    }
                }
            }
            (false, true) => {
                for o in &outgoing {
                    if let Some(kind) = compose(&s.kind, &o.kind) {
                        push(Edge { from: s.from.clone(), to: o.to.clone(), kind });
                    }
                }
            }
            (true, true) => {
                for i in &incoming {
                    for o in &outgoing {
                        let kind = compose(&i.kind, &s.kind).and_then(|k| compose(&k, &o.kind));
                        if let Some(kind) = kind {
                            push(Edge { from: i.from.clone(), to: o.to.clone(), kind });
                        }
                    }
                }
            }
        }
    }

    Ok(Blueprint {
        tasks,
        protocol: Protocol { nodes, edges },
    })
}
