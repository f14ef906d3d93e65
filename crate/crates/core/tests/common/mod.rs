//! Random compositions of library macros, plus a Boolean oracle that
//! evaluates the same composition through the reference functions.

#![allow(dead_code)]

use marble_core::gates::{boolean_spec, library};
use marble_core::netlist::{CircuitAst, DeclKind, Endpoint};
use rand::seq::SliceRandom;
use rand::Rng;

/// Where a signal comes from in the oracle.
#[derive(Debug, Clone, Copy)]
enum Source {
    Input(usize),
    Gate { inst: usize, out: usize },
    Tap { tap: usize, copy: bool },
}

#[derive(Debug, Clone)]
struct Signal {
    source: Source,
    endpoint: Endpoint,
    depth: usize,
}

#[derive(Debug, Clone)]
struct Instance {
    gate: String,
    args: Vec<Source>,
}

#[derive(Debug, Clone)]
pub struct Composition {
    pub ast: CircuitAst,
    instances: Vec<Instance>,
    taps: Vec<Source>,
    outputs: Vec<Source>,
    pub inputs: usize,
}

pub const MAX_DEPTH: usize = 4;

/// Builds a composition of `1..=MAX_DEPTH` macro levels over 2 or 3 inputs.
/// Each signal feeds exactly one consumer; taps provide the fan-out.
pub fn random_composition(rng: &mut impl Rng, id: usize) -> Composition {
    let lib = library();
    let names: Vec<&str> = lib.names().collect();
    let n_inputs = rng.gen_range(2..=3);
    let mut ast = CircuitAst::new(format!("RAND{id}"));
    let mut pool: Vec<Signal> = (0..n_inputs)
        .map(|i| {
            let name = format!("i{i}");
            ast.inputs.push(name.clone());
            Signal {
                source: Source::Input(i),
                endpoint: Endpoint::pin(name),
                depth: 0,
            }
        })
        .collect();
    let mut instances = Vec::new();
    let mut taps = Vec::new();
    let target_gates = rng.gen_range(1..=MAX_DEPTH);

    for _ in 0..target_gates {
        // Occasionally duplicate a signal so gates can share it.
        if rng.gen_bool(0.3) {
            let k = rng.gen_range(0..pool.len());
            let s = pool.swap_remove(k);
            let tap = taps.len();
            let name = format!("t{tap}");
            ast.add_node(name.clone(), DeclKind::Prim(marble_core::NodeKind::Tap));
            ast.connect(s.endpoint, Endpoint::port(name.clone(), "in"));
            taps.push(s.source);
            for (port, copy) in [("out", false), ("copy", true)] {
                pool.push(Signal {
                    source: Source::Tap { tap, copy },
                    endpoint: Endpoint::port(name.clone(), port),
                    depth: s.depth,
                });
            }
        }
        let usable: Vec<&str> = names
            .iter()
            .copied()
            .filter(|n| lib.get(n).unwrap().inputs.len() <= pool.len())
            .collect();
        let gate = *usable.choose(rng).unwrap();
        let mac = lib.get(gate).unwrap();
        pool.shuffle(rng);
        let args: Vec<Signal> = pool.drain(..mac.inputs.len()).collect();
        let inst = instances.len();
        let iname = format!("g{inst}");
        ast.add_node(iname.clone(), DeclKind::Gate(gate.to_string()));
        let depth = args.iter().map(|s| s.depth).max().unwrap() + 1;
        for (s, port) in args.iter().zip(&mac.inputs) {
            ast.connect(
                s.endpoint.clone(),
                Endpoint::port(iname.clone(), port.clone()),
            );
        }
        instances.push(Instance {
            gate: gate.to_string(),
            args: args.iter().map(|s| s.source).collect(),
        });
        for (out, port) in mac.outputs.iter().enumerate() {
            pool.push(Signal {
                source: Source::Gate { inst, out },
                endpoint: Endpoint::port(iname.clone(), port.clone()),
                depth,
            });
        }
        debug_assert!(depth <= MAX_DEPTH);
    }

    let mut outputs = Vec::new();
    for (k, s) in pool.into_iter().enumerate() {
        let name = format!("o{k}");
        ast.outputs.push(name.clone());
        ast.connect(s.endpoint, Endpoint::pin(name));
        outputs.push(s.source);
    }
    Composition {
        ast,
        instances,
        taps,
        outputs,
        inputs: n_inputs,
    }
}

impl Composition {
    /// Evaluates the composition with the reference Boolean functions.
    pub fn oracle(&self, input: &[bool]) -> Vec<bool> {
        let mut gate_out: Vec<Vec<bool>> = Vec::with_capacity(self.instances.len());
        // Instances are created in dependency order, so one pass suffices
        // once tap values can be resolved lazily.
        fn value(src: Source, input: &[bool], gate_out: &[Vec<bool>], taps: &[Source]) -> bool {
            match src {
                Source::Input(i) => input[i],
                Source::Gate { inst, out } => gate_out[inst][out],
                Source::Tap { tap, .. } => value(taps[tap], input, gate_out, taps),
            }
        }
        for inst in &self.instances {
            let args: Vec<bool> = inst
                .args
                .iter()
                .map(|&s| value(s, input, &gate_out, &self.taps))
                .collect();
            gate_out.push(boolean_spec(&inst.gate, &args).unwrap());
        }
        self.outputs
            .iter()
            .map(|&s| value(s, input, &gate_out, &self.taps))
            .collect()
    }
}
