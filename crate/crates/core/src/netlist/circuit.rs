use std::collections::{BTreeSet, HashMap};

use super::ast::{CircuitAst, DeclKind, Endpoint};
use crate::primitives::{NodeId, NodeKind, Port};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
    /// Firing phase assigned by levelization.
    pub phase: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel {
    pub from: NodeId,
    pub from_port: Port,
    pub to: NodeId,
    pub to_port: Port,
}

/// An elaborated circuit: primitive nodes only, wired by unit-delay channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub name: String,
    pub nodes: Vec<Node>,
    /// Sorted by source node and port.
    pub channels: Vec<Channel>,
    pub inputs: Vec<NodeId>,
    pub outputs: Vec<NodeId>,
    consumers: HashMap<(NodeId, Port), usize>,
    incoming: Vec<Vec<usize>>,
}

impl Circuit {
    pub fn new(
        name: String,
        nodes: Vec<Node>,
        mut channels: Vec<Channel>,
        inputs: Vec<NodeId>,
        outputs: Vec<NodeId>,
    ) -> Self {
        channels.sort();
        let mut consumers = HashMap::new();
        let mut incoming = vec![Vec::new(); nodes.len()];
        for (i, c) in channels.iter().enumerate() {
            consumers.insert((c.from, c.from_port), i);
            incoming[c.to.index()].push(i);
        }
        Circuit {
            name,
            nodes,
            channels,
            inputs,
            outputs,
            consumers,
            incoming,
        }
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn find(&self, name: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .map(|i| NodeId(i as u32))
    }

    /// The channel leaving `port` of `id`, if wired.
    pub fn consumer(&self, id: NodeId, port: Port) -> Option<&Channel> {
        self.consumers.get(&(id, port)).map(|&i| &self.channels[i])
    }

    pub fn incoming(&self, id: NodeId) -> impl Iterator<Item = &Channel> {
        self.incoming[id.index()].iter().map(|&i| &self.channels[i])
    }

    pub fn count(&self, pred: impl Fn(&NodeKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.kind)).count()
    }

    pub fn max_phase(&self) -> u32 {
        self.nodes.iter().map(|n| n.phase).max().unwrap_or(0)
    }

    pub fn input_names(&self) -> Vec<&str> {
        self.inputs
            .iter()
            .map(|&i| self.node(i).name.as_str())
            .collect()
    }

    pub fn output_names(&self) -> Vec<&str> {
        self.outputs
            .iter()
            .map(|&i| self.node(i).name.as_str())
            .collect()
    }

    /// Deterministic topological order, or the nodes left on a cycle.
    pub fn topo_order(&self) -> Result<Vec<NodeId>, Vec<NodeId>> {
        let mut indeg: Vec<usize> = (0..self.nodes.len())
            .map(|i| self.incoming[i].len())
            .collect();
        let mut ready: BTreeSet<NodeId> = self.ids().filter(|id| indeg[id.index()] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(id) = ready.pop_first() {
            order.push(id);
            for c in self.channels.iter().filter(|c| c.from == id) {
                let d = &mut indeg[c.to.index()];
                *d -= 1;
                if *d == 0 {
                    ready.insert(c.to);
                }
            }
        }
        if order.len() == self.nodes.len() {
            Ok(order)
        } else {
            Err(self.ids().filter(|id| indeg[id.index()] > 0).collect())
        }
    }

    /// Longest-path levelization. Sources sit at phase 0, a hold of `k`
    /// phases fires `k` after its producer, every other node one after its
    /// latest producer.
    pub fn assign_phases(&mut self) -> Result<(), Vec<NodeId>> {
        let order = self.topo_order()?;
        for id in order {
            let pred_max = self.incoming(id).map(|c| self.node(c.from).phase).max();
            let phase = match (self.node(id).kind, pred_max) {
                (_, None) => 0,
                (NodeKind::EmHold { phases }, Some(p)) => p + phases,
                (_, Some(p)) => p + 1,
            };
            self.nodes[id.index()].phase = phase;
        }
        Ok(())
    }

    /// Netlist form of this circuit, using its flattened names.
    pub fn to_ast(&self) -> CircuitAst {
        let mut ast = CircuitAst::new(self.name.clone());
        ast.inputs = self.input_names().into_iter().map(String::from).collect();
        ast.outputs = self.output_names().into_iter().map(String::from).collect();
        for n in &self.nodes {
            if !matches!(n.kind, NodeKind::InputPort | NodeKind::OutputSink) {
                ast.add_node(n.name.clone(), DeclKind::Prim(n.kind));
            }
        }
        let endpoint = |id: NodeId, port: Port| {
            let n = self.node(id);
            match n.kind {
                NodeKind::InputPort | NodeKind::OutputSink => Endpoint::pin(n.name.clone()),
                _ => Endpoint::port(n.name.clone(), port.to_string()),
            }
        };
        for c in &self.channels {
            ast.connect(endpoint(c.from, c.from_port), endpoint(c.to, c.to_port));
        }
        ast
    }
}
