//! Macro expansion, levelization and synchronization-hold insertion.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::ast::{CircuitAst, DeclKind, Endpoint};
use super::circuit::{Channel, Circuit, Node};
use super::validate::{has_errors, validate, Diagnostic};
use crate::gates::Library;
use crate::primitives::{NodeId, NodeKind, Port};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SyncPolicy {
    /// Insert holds on the shallower inputs of junctions and joins.
    #[default]
    Repair,
    /// Treat any phase imbalance as an error.
    Strict,
    /// Leave imbalances in place (for linting).
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ElaborateOptions {
    pub sync: SyncPolicy,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElaborateError {
    #[error("netlist is invalid:\n{}", render(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("unknown macro `{0}`")]
    UnknownMacro(String),
    #[error("macro `{0}` expands into itself")]
    RecursiveMacro(String),
    #[error("elaboration produced a cycle through {}", .0.join(", "))]
    Cycle(Vec<String>),
    #[error("unbalanced inputs at {node}.{port}: arrives {mismatch} phase(s) early")]
    Unbalanced {
        node: String,
        port: Port,
        mismatch: u32,
    },
}

fn render(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("  {d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Clone, Copy, PartialEq)]
enum FlatKind {
    Prim(NodeKind),
    /// Boundary of a macro instance; removed once the graph is flat.
    Wire,
}

#[derive(Default)]
struct Flat {
    nodes: Vec<(String, FlatKind)>,
    edges: Vec<(usize, Port, usize, Port)>,
}

impl Flat {
    fn add(&mut self, name: String, kind: FlatKind) -> usize {
        self.nodes.push((name, kind));
        self.nodes.len() - 1
    }
}

/// Expands `ast` into primitive nodes and levelizes it.
pub fn elaborate(
    ast: &CircuitAst,
    library: &Library,
    opts: ElaborateOptions,
) -> Result<Circuit, ElaborateError> {
    let diags = validate(ast, library);
    if has_errors(&diags) {
        return Err(ElaborateError::Invalid(diags));
    }

    let mut flat = Flat::default();
    let mut pins = HashMap::new();
    for i in &ast.inputs {
        pins.insert(
            i.clone(),
            flat.add(i.clone(), FlatKind::Prim(NodeKind::InputPort)),
        );
    }
    for o in &ast.outputs {
        pins.insert(
            o.clone(),
            flat.add(o.clone(), FlatKind::Prim(NodeKind::OutputSink)),
        );
    }
    let mut stack = Vec::new();
    flatten_body(&mut flat, ast, "", &pins, library, &mut stack)?;

    let mut circuit = collapse(ast.name.clone(), flat, ast.inputs.len(), ast.outputs.len());
    if let Err(stuck) = circuit.assign_phases() {
        let names = stuck
            .iter()
            .map(|&id| circuit.node(id).name.clone())
            .collect();
        return Err(ElaborateError::Cycle(names));
    }
    synchronize(circuit, opts.sync)
}

fn flatten_body(
    flat: &mut Flat,
    ast: &CircuitAst,
    prefix: &str,
    pins: &HashMap<String, usize>,
    library: &Library,
    stack: &mut Vec<String>,
) -> Result<(), ElaborateError> {
    let mut locals: HashMap<&str, usize> = HashMap::new();
    let mut gate_ports: HashMap<(&str, &str), usize> = HashMap::new();

    for decl in &ast.nodes {
        let qualified = format!("{prefix}{}", decl.name);
        match &decl.kind {
            DeclKind::Prim(kind) => {
                locals.insert(&decl.name, flat.add(qualified, FlatKind::Prim(*kind)));
            }
            DeclKind::Gate(macro_name) => {
                let mac = library
                    .get(macro_name)
                    .ok_or_else(|| ElaborateError::UnknownMacro(macro_name.clone()))?;
                if stack.contains(macro_name) {
                    return Err(ElaborateError::RecursiveMacro(macro_name.clone()));
                }
                let inner_prefix = format!("{qualified}.");
                let mut inner_pins = HashMap::new();
                for port in mac.inputs.iter().chain(&mac.outputs) {
                    let w = flat.add(format!("{inner_prefix}{port}"), FlatKind::Wire);
                    inner_pins.insert(port.clone(), w);
                    gate_ports.insert((&decl.name, port), w);
                }
                stack.push(macro_name.clone());
                flatten_body(
                    flat,
                    &mac.expansion,
                    &inner_prefix,
                    &inner_pins,
                    library,
                    stack,
                )?;
                stack.pop();
            }
        }
    }

    let resolve = |ep: &Endpoint, as_source: bool| -> (usize, Port) {
        let dir = if as_source { Port::Out } else { Port::In };
        match ep {
            Endpoint::Pin(name) => (pins[name], dir),
            Endpoint::Port { node, port } => {
                if let Some(&idx) = locals.get(node.as_str()) {
                    // Validated already, so the port name parses.
                    (idx, port.parse().expect("validated port"))
                } else {
                    (gate_ports[&(node.as_str(), port.as_str())], dir)
                }
            }
        }
    };
    for c in &ast.connects {
        let (f, fp) = resolve(&c.from, true);
        let (t, tp) = resolve(&c.to, false);
        flat.edges.push((f, fp, t, tp));
    }
    Ok(())
}

/// Splices out wire nodes and renumbers the remaining ones.
fn collapse(name: String, flat: Flat, n_inputs: usize, n_outputs: usize) -> Circuit {
    let is_wire = |i: usize| flat.nodes[i].1 == FlatKind::Wire;
    let wire_src: HashMap<usize, (usize, Port)> = flat
        .edges
        .iter()
        .filter(|e| is_wire(e.2))
        .map(|&(f, fp, t, _)| (t, (f, fp)))
        .collect();

    let mut ids = vec![None; flat.nodes.len()];
    let mut nodes = Vec::new();
    for (i, (n, kind)) in flat.nodes.iter().enumerate() {
        if let FlatKind::Prim(k) = kind {
            ids[i] = Some(NodeId(nodes.len() as u32));
            nodes.push(Node {
                name: n.clone(),
                kind: *k,
                phase: 0,
            });
        }
    }

    let mut channels = Vec::new();
    for &(mut f, mut fp, t, tp) in &flat.edges {
        if is_wire(t) {
            continue;
        }
        while is_wire(f) {
            (f, fp) = wire_src[&f];
        }
        channels.push(Channel {
            from: ids[f].unwrap(),
            from_port: fp,
            to: ids[t].unwrap(),
            to_port: tp,
        });
    }
    // Pins were added first, in declaration order.
    let inputs = (0..n_inputs as u32).map(NodeId).collect();
    let outputs = (n_inputs as u32..(n_inputs + n_outputs) as u32)
        .map(NodeId)
        .collect();
    Circuit::new(name, nodes, channels, inputs, outputs)
}

/// Balances the producer phases feeding every junction and join.
fn synchronize(circuit: Circuit, policy: SyncPolicy) -> Result<Circuit, ElaborateError> {
    let mut needed = Vec::new();
    for id in circuit.ids() {
        let node = circuit.node(id);
        if !matches!(node.kind, NodeKind::Junction | NodeKind::Join) {
            continue;
        }
        let latest = circuit
            .incoming(id)
            .map(|c| circuit.node(c.from).phase)
            .max()
            .unwrap_or(0);
        for c in circuit.incoming(id) {
            let lag = latest - circuit.node(c.from).phase;
            if lag > 0 {
                needed.push((*c, lag));
            }
        }
    }
    if needed.is_empty() || policy == SyncPolicy::Off {
        return Ok(circuit);
    }
    if policy == SyncPolicy::Strict {
        let (c, lag) = needed[0];
        return Err(ElaborateError::Unbalanced {
            node: circuit.node(c.to).name.clone(),
            port: c.to_port,
            mismatch: lag,
        });
    }

    let Circuit {
        name,
        mut nodes,
        channels,
        inputs,
        outputs,
        ..
    } = circuit;
    let mut taken: HashSet<String> = nodes.iter().map(|n| n.name.clone()).collect();
    let mut rewired: HashMap<Channel, Channel> = HashMap::new();
    let mut extra = Vec::new();
    for (c, lag) in needed {
        let base = format!("{}.{}.hold", nodes[c.to.index()].name, c.to_port);
        let mut hold_name = base.clone();
        let mut k = 1;
        while !taken.insert(hold_name.clone()) {
            k += 1;
            hold_name = format!("{base}{k}");
        }
        let hold = NodeId(nodes.len() as u32);
        nodes.push(Node {
            name: hold_name,
            kind: NodeKind::EmHold { phases: lag },
            phase: nodes[c.from.index()].phase + lag,
        });
        rewired.insert(
            c,
            Channel {
                from: c.from,
                from_port: c.from_port,
                to: hold,
                to_port: Port::In,
            },
        );
        extra.push(Channel {
            from: hold,
            from_port: Port::Out,
            to: c.to,
            to_port: c.to_port,
        });
    }
    let channels = channels
        .into_iter()
        .map(|c| rewired.get(&c).copied().unwrap_or(c))
        .chain(extra)
        .collect();
    Ok(Circuit::new(name, nodes, channels, inputs, outputs))
}
