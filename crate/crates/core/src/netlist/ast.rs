use std::fmt;

use crate::primitives::NodeKind;

/// Syntactic form of a netlist.
///
/// Equality is structural: source lines are ignored and `connect`
/// statements compare as a multiset.
#[derive(Debug, Clone, Default)]
pub struct CircuitAst {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub nodes: Vec<NodeDecl>,
    pub connects: Vec<Connect>,
}

#[derive(Debug, Clone)]
pub struct NodeDecl {
    pub name: String,
    pub kind: DeclKind,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeclKind {
    Prim(NodeKind),
    /// Instance of a library macro.
    Gate(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    /// A circuit input or output, written as a bare identifier.
    Pin(String),
    /// `node.port`
    Port { node: String, port: String },
}

#[derive(Debug, Clone)]
pub struct Connect {
    pub from: Endpoint,
    pub to: Endpoint,
    pub line: usize,
}

impl Endpoint {
    pub fn port(node: impl Into<String>, port: impl Into<String>) -> Self {
        Endpoint::Port {
            node: node.into(),
            port: port.into(),
        }
    }

    pub fn pin(name: impl Into<String>) -> Self {
        Endpoint::Pin(name.into())
    }

    /// Name of the node or pin this endpoint refers to.
    pub fn target(&self) -> &str {
        match self {
            Endpoint::Pin(n) => n,
            Endpoint::Port { node, .. } => node,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Pin(n) => f.write_str(n),
            Endpoint::Port { node, port } => write!(f, "{node}.{port}"),
        }
    }
}

impl fmt::Display for DeclKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeclKind::Gate(m) => f.write_str(m),
            DeclKind::Prim(NodeKind::EmHold { phases }) => write!(f, "hold({phases})"),
            DeclKind::Prim(k) => f.write_str(k.name()),
        }
    }
}

impl Connect {
    pub fn new(from: Endpoint, to: Endpoint) -> Self {
        Connect { from, to, line: 0 }
    }

    fn key(&self) -> (&Endpoint, &Endpoint) {
        (&self.from, &self.to)
    }
}

impl fmt::Display for Connect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "connect {} -> {}", self.from, self.to)
    }
}

impl PartialEq for NodeDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.kind == other.kind
    }
}

impl PartialEq for Connect {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl PartialEq for CircuitAst {
    fn eq(&self, other: &Self) -> bool {
        if self.name != other.name
            || self.inputs != other.inputs
            || self.outputs != other.outputs
            || self.nodes != other.nodes
            || self.connects.len() != other.connects.len()
        {
            return false;
        }
        let mut a: Vec<_> = self.connects.iter().map(Connect::key).collect();
        let mut b: Vec<_> = other.connects.iter().map(Connect::key).collect();
        a.sort();
        b.sort();
        a == b
    }
}

impl CircuitAst {
    pub fn new(name: impl Into<String>) -> Self {
        CircuitAst {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn node(&self, name: &str) -> Option<&NodeDecl> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub fn add_node(&mut self, name: impl Into<String>, kind: DeclKind) {
        self.nodes.push(NodeDecl {
            name: name.into(),
            kind,
            line: 0,
        });
    }

    pub fn connect(&mut self, from: Endpoint, to: Endpoint) {
        self.connects.push(Connect::new(from, to));
    }

    pub fn gate_instances(&self) -> impl Iterator<Item = (&str, &str)> {
        self.nodes.iter().filter_map(|n| match &n.kind {
            DeclKind::Gate(m) => Some((n.name.as_str(), m.as_str())),
            DeclKind::Prim(_) => None,
        })
    }

    pub fn is_primitive(&self) -> bool {
        self.gate_instances().next().is_none()
    }
}
