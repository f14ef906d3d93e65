use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ast::{CircuitAst, DeclKind, Endpoint};
use crate::gates::Library;
use crate::primitives::{NodeKind, Port};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: Option<usize>,
}

impl Diagnostic {
    pub fn error(message: impl Into<String>, line: Option<usize>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            line,
        }
    }

    pub fn warning(message: impl Into<String>, line: Option<usize>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message: message.into(),
            line,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match self.line {
            Some(l) => write!(f, "{sev}: line {l}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

/// What sits behind a name in the AST.
enum Entity<'a> {
    Input,
    Output,
    Prim(NodeKind),
    Gate {
        inputs: &'a [String],
        outputs: &'a [String],
    },
    UnknownGate,
}

/// Checks arities, connectivity and acyclicity. An empty result means the
/// AST can be elaborated.
pub fn validate(ast: &CircuitAst, library: &Library) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut entities: BTreeMap<&str, (Entity<'_>, Option<usize>)> = BTreeMap::new();
    for i in &ast.inputs {
        entities.insert(i, (Entity::Input, None));
    }
    for o in &ast.outputs {
        entities.insert(o, (Entity::Output, None));
    }
    for n in &ast.nodes {
        let ent = match &n.kind {
            DeclKind::Prim(k) => Entity::Prim(*k),
            DeclKind::Gate(m) => match library.get(m) {
                Some(mac) => Entity::Gate {
                    inputs: &mac.inputs,
                    outputs: &mac.outputs,
                },
                None => {
                    diags.push(Diagnostic::error(
                        format!("unknown macro `{m}` for gate `{}`", n.name),
                        Some(n.line),
                    ));
                    Entity::UnknownGate
                }
            },
        };
        entities.insert(&n.name, (ent, Some(n.line)));
    }

    // (entity, port) -> channel count; port "" stands for a bare pin.
    let mut outgoing: BTreeMap<(&str, String), usize> = BTreeMap::new();
    let mut incoming: BTreeMap<(&str, String), usize> = BTreeMap::new();
    let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();

    for c in &ast.connects {
        let line = Some(c.line).filter(|&l| l > 0);
        let src_ok = match &c.from {
            Endpoint::Pin(n) => matches!(entities.get(n.as_str()), Some((Entity::Input, _))),
            Endpoint::Port { node, port } => match entities.get(node.as_str()) {
                Some((Entity::Prim(k), _)) => {
                    port.parse().map(|p| k.has_output(p)).unwrap_or(false)
                }
                Some((Entity::Gate { outputs, .. }, _)) => outputs.contains(port),
                Some((Entity::UnknownGate, _)) => true,
                _ => false,
            },
        };
        let dst_ok = match &c.to {
            Endpoint::Pin(n) => matches!(entities.get(n.as_str()), Some((Entity::Output, _))),
            Endpoint::Port { node, port } => match entities.get(node.as_str()) {
                Some((Entity::Prim(k), _)) => {
                    port.parse().map(|p| k.accepts_input(p)).unwrap_or(false)
                }
                Some((Entity::Gate { inputs, .. }, _)) => inputs.contains(port),
                Some((Entity::UnknownGate, _)) => true,
                _ => false,
            },
        };
        if !src_ok {
            diags.push(Diagnostic::error(
                format!("`{}` cannot drive a channel", c.from),
                line,
            ));
        }
        if !dst_ok {
            diags.push(Diagnostic::error(
                format!("`{}` cannot receive a channel", c.to),
                line,
            ));
        }
        if src_ok && dst_ok {
            *outgoing.entry(split(&c.from)).or_default() += 1;
            *incoming.entry(split(&c.to)).or_default() += 1;
            edges
                .entry(c.from.target())
                .or_default()
                .insert(c.to.target());
        }
    }

    let count = |map: &BTreeMap<(&str, String), usize>, name: &str, port: &str| {
        map.get(&(name, port.to_string())).copied().unwrap_or(0)
    };
    let exactly_one = |diags: &mut Vec<Diagnostic>, n: usize, what: String, line, dir: &str| {
        if n == 0 {
            diags.push(Diagnostic::error(format!("unconnected port {what}"), line));
        } else if n > 1 {
            diags.push(Diagnostic::error(
                format!("port {what} has {n} {dir} channels"),
                line,
            ));
        }
    };

    for (&name, (ent, line)) in &entities {
        let line = *line;
        match ent {
            Entity::Input => exactly_one(
                &mut diags,
                count(&outgoing, name, ""),
                name.into(),
                line,
                "outgoing",
            ),
            Entity::Output => exactly_one(
                &mut diags,
                count(&incoming, name, ""),
                name.into(),
                line,
                "incoming",
            ),
            Entity::Prim(kind) => {
                for p in kind.output_ports() {
                    let n = count(&outgoing, name, &p.to_string());
                    exactly_one(&mut diags, n, format!("{name}.{p}"), line, "outgoing");
                }
                if *kind == NodeKind::Join {
                    let used: Vec<u16> = incoming
                        .iter()
                        .filter(|((n, _), _)| *n == name)
                        .filter_map(|((_, p), _)| match p.parse() {
                            Ok(Port::InN(k)) => Some(k),
                            _ => None,
                        })
                        .collect();
                    let max = used.iter().copied().max().unwrap_or(0);
                    if max < 2 {
                        diags.push(Diagnostic::error(
                            format!("join `{name}` needs at least 2 inputs"),
                            line,
                        ));
                    }
                    for k in 1..=max {
                        let n = count(&incoming, name, &format!("in{k}"));
                        exactly_one(&mut diags, n, format!("{name}.in{k}"), line, "incoming");
                    }
                } else if kind.fan_in_allowed() {
                    if count(&incoming, name, "in") == 0 {
                        diags.push(Diagnostic::warning(
                            format!("unconnected port {name}.in"),
                            line,
                        ));
                    }
                } else {
                    for p in kind.input_ports() {
                        let n = count(&incoming, name, &p.to_string());
                        exactly_one(&mut diags, n, format!("{name}.{p}"), line, "incoming");
                    }
                }
            }
            Entity::Gate { inputs, outputs } => {
                for p in inputs.iter() {
                    let n = count(&incoming, name, p);
                    exactly_one(&mut diags, n, format!("{name}.{p}"), line, "incoming");
                }
                for p in outputs.iter() {
                    let n = count(&outgoing, name, p);
                    exactly_one(&mut diags, n, format!("{name}.{p}"), line, "outgoing");
                }
            }
            Entity::UnknownGate => {}
        }
    }

    if let Some(cycle) = find_cycle(&edges) {
        diags.push(Diagnostic::error(
            format!("cycle detected: {}", cycle.join(" -> ")),
            None,
        ));
    }
    diags
}

fn split(ep: &Endpoint) -> (&str, String) {
    match ep {
        Endpoint::Pin(n) => (n, String::new()),
        Endpoint::Port { node, port } => (node, port.clone()),
    }
}

/// Returns one cycle as a closed path, if the graph has any.
fn find_cycle<'a>(edges: &BTreeMap<&'a str, BTreeSet<&'a str>>) -> Option<Vec<&'a str>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit<'a>(
        n: &'a str,
        edges: &BTreeMap<&'a str, BTreeSet<&'a str>>,
        marks: &mut BTreeMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
    ) -> Option<Vec<&'a str>> {
        match marks.get(n) {
            Some(Mark::Done) => return None,
            Some(Mark::Open) => {
                let start = stack.iter().position(|&s| s == n).unwrap();
                let mut cycle = stack[start..].to_vec();
                cycle.push(n);
                return Some(cycle);
            }
            None => {}
        }
        marks.insert(n, Mark::Open);
        stack.push(n);
        for &m in edges.get(n).into_iter().flatten() {
            if let Some(c) = visit(m, edges, marks, stack) {
                return Some(c);
            }
        }
        stack.pop();
        marks.insert(n, Mark::Done);
        None
    }
    let mut marks = BTreeMap::new();
    for &n in edges.keys() {
        let mut stack = Vec::new();
        if let Some(c) = visit(n, edges, &mut marks, &mut stack) {
            return Some(c);
        }
    }
    None
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}
