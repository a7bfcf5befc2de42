use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{Blueprint, EdgeKind, FieldType, NodeKind, SchemaDef, SchemaRegistry};

/// One violated blueprint invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "finding")]
pub enum Finding {
    DuplicateTaskId { id: String },
    DuplicateNodeId { id: String },
    EmptySchema { owner: String },
    UnresolvedSchema { owner: String, schema: String },
    EntryCount { found: usize },
    ExitCount { found: usize },
    TaskWithoutNode { task: String },
    NodeWithoutTask { node: String },
    DanglingEdge { from: String, to: String },
    IncompatibleDataEdge { from: String, to: String, detail: String },
    DataEdgeOnLoop { from: String, to: String },
    UnreachableTask { task: String },
    UnboundedLoop { node: String },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::DuplicateTaskId { id } => write!(f, "task id `{id}` is not unique"),
            Finding::DuplicateNodeId { id } => write!(f, "node id `{id}` is not unique"),
            Finding::EmptySchema { owner } => write!(f, "`{owner}` has an empty schema"),
            Finding::UnresolvedSchema { owner, schema } => {
                write!(f, "`{owner}` refers to unknown schema `{schema}`")
            }
            Finding::EntryCount { found } => write!(f, "expected one entry node, found {found}"),
            Finding::ExitCount { found } => write!(f, "expected one exit node, found {found}"),
            Finding::TaskWithoutNode { task } => write!(f, "task `{task}` has no protocol node"),
            Finding::NodeWithoutTask { node } => {
                write!(f, "task node `{node}` names no task in the blueprint")
            }
            Finding::DanglingEdge { from, to } => {
                write!(f, "edge {from} -> {to} touches a missing node")
            }
            Finding::IncompatibleDataEdge { from, to, detail } => {
                write!(f, "data edge {from} -> {to}: {detail}")
            }
            Finding::DataEdgeOnLoop { from, to } => {
                write!(f, "data edge {from} -> {to} touches a loop node")
            }
            Finding::UnreachableTask { task } => {
                write!(f, "task `{task}` is unreachable from the entry")
            }
            Finding::UnboundedLoop { node } => {
                write!(f, "loop `{node}` has no iteration bound")
            }
        }
    }
}

/// All findings for a blueprint; empty iff the blueprint is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.findings.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter()
    }

    /// Whether any finding mentions `name` as a task, node or edge endpoint.
    pub fn names(&self, name: &str) -> bool {
        self.findings.iter().any(|f| f.to_string().contains(&format!("`{name}`")))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.findings.is_empty() {
            return write!(f, "valid");
        }
        for (i, finding) in self.findings.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{finding}")?;
        }
        Ok(())
    }
}

/// Input and output schemas of a node as seen by data edges.
struct Ports<'a> {
    input: Option<&'a str>,
    output: Option<&'a str>,
    is_loop: bool,
}

fn ports<'a>(b: &'a Blueprint) -> BTreeMap<&'a str, Ports<'a>> {
    let mut out = BTreeMap::new();
    for n in &b.protocol().nodes {
        let p = match &n.kind {
            NodeKind::Entry { schema } => Ports { input: None, output: Some(schema), is_loop: false },
            NodeKind::Exit { schema } => Ports { input: Some(schema), output: None, is_loop: false },
            NodeKind::Task => match b.task(&n.id) {
                Some(t) => Ports {
                    input: Some(&t.input_schema),
                    output: Some(&t.output_schema),
                    is_loop: false,
                },
                None => Ports { input: None, output: None, is_loop: false },
            },
            NodeKind::Controller { input_schema, output_schema, .. } => Ports {
                input: Some(input_schema),
                output: Some(output_schema),
                is_loop: false,
            },
            NodeKind::Loop { .. } => Ports { input: None, output: None, is_loop: true },
        };
        out.entry(n.id.as_str()).or_insert(p);
    }
    out
}

fn field(
    registry: &SchemaRegistry,
    schema: Option<&str>,
    name: &str,
) -> Result<FieldType, String> {
    let schema = schema.ok_or_else(|| "endpoint carries no payload".to_string())?;
    let def: &SchemaDef = registry
        .get(schema)
        .ok_or_else(|| format!("schema `{schema}` is not registered"))?;
    def.field(name)
        .ok_or_else(|| format!("schema `{schema}` has no field `{name}`"))
}

/// Checks every blueprint invariant and reports each violation.
pub fn validate_blueprint(b: &Blueprint, registry: &SchemaRegistry) -> ValidationReport {
    let mut findings = Vec::new();
    let proto = b.protocol();

    let mut seen = BTreeSet::new();
    for t in b.tasks() {
        if !seen.insert(t.id.as_str()) {
            findings.push(Finding::DuplicateTaskId { id: t.id.clone() });
        }
        for schema in [&t.input_schema, &t.output_schema] {
            check_schema(registry, &t.id, schema, &mut findings);
        }
    }

    let mut node_ids = BTreeSet::new();
    let (mut entries, mut exits) = (0, 0);
    for n in &proto.nodes {
        if !node_ids.insert(n.id.as_str()) {
            findings.push(Finding::DuplicateNodeId { id: n.id.clone() });
        }
        match &n.kind {
            NodeKind::Entry { schema } => {
                entries += 1;
                check_schema(registry, &n.id, schema, &mut findings);
            }
            NodeKind::Exit { schema } => {
                exits += 1;
                check_schema(registry, &n.id, schema, &mut findings);
            }
            NodeKind::Task => {
                if b.task(&n.id).is_none() {
                    findings.push(Finding::NodeWithoutTask { node: n.id.clone() });
                }
            }
            NodeKind::Controller { input_schema, output_schema, .. } => {
                check_schema(registry, &n.id, input_schema, &mut findings);
                check_schema(registry, &n.id, output_schema, &mut findings);
            }
            NodeKind::Loop { bound, .. } => {
                if bound.is_none() {
                    findings.push(Finding::UnboundedLoop { node: n.id.clone() });
                }
            }
        }
    }
    if entries != 1 {
        findings.push(Finding::EntryCount { found: entries });
    }
    if exits != 1 {
        findings.push(Finding::ExitCount { found: exits });
    }
    let task_nodes: BTreeSet<&str> = proto
        .nodes
        .iter()
        .filter(|n| n.kind == NodeKind::Task)
        .map(|n| n.id.as_str())
        .collect();
    for t in b.tasks() {
        if !task_nodes.contains(t.id.as_str()) {
            findings.push(Finding::TaskWithoutNode { task: t.id.clone() });
        }
    }

    let ports = ports(b);
    for e in &proto.edges {
        let (Some(src), Some(dst)) = (ports.get(e.from.as_str()), ports.get(e.to.as_str())) else {
            findings.push(Finding::DanglingEdge { from: e.from.clone(), to: e.to.clone() });
            continue;
        };
        let EdgeKind::Data { from_field, to_field } = &e.kind else {
            continue;
        };
        if src.is_loop || dst.is_loop {
            findings.push(Finding::DataEdgeOnLoop { from: e.from.clone(), to: e.to.clone() });
            continue;
        }
        let check = field(registry, src.output, from_field).and_then(|a| {
            let b = field(registry, dst.input, to_field)?;
            if a == b {
                Ok(())
            } else {
                Err(format!("`{from_field}` is {a:?} but `{to_field}` is {b:?}"))
            }
        });
        if let Err(detail) = check {
            findings.push(Finding::IncompatibleDataEdge {
                from: e.from.clone(),
                to: e.to.clone(),
                detail,
            });
        }
    }

    if let Some(entry) = proto.entry() {
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &proto.edges {
            adj.entry(e.from.as_str()).or_default().push(e.to.as_str());
        }
        let mut reached = BTreeSet::from([entry.id.as_str()]);
        let mut queue = VecDeque::from([entry.id.as_str()]);
        while let Some(n) = queue.pop_front() {
            for &m in adj.get(n).into_iter().flatten() {
                if reached.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        for t in b.tasks() {
            if task_nodes.contains(t.id.as_str()) && !reached.contains(t.id.as_str()) {
                findings.push(Finding::UnreachableTask { task: t.id.clone() });
            }
        }
    }

    ValidationReport { findings }
}

fn check_schema(registry: &SchemaRegistry, owner: &str, schema: &str, out: &mut Vec<Finding>) {
    if schema.is_empty() {
        out.push(Finding::EmptySchema { owner: owner.to_string() });
    } else if !registry.contains(schema) {
        out.push(Finding::UnresolvedSchema {
            owner: owner.to_string(),
            schema: schema.to_string(),
        });
    }
}
