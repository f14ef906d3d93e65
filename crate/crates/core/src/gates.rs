//! The gate macro library.
//!
//! Every macro carries a netlist expansion over primitives (or other
//! macros) and a reference Boolean function used to verify it. Inputs and
//! outputs are ordered as in the usual truth-table columns, control first.

use std::sync::OnceLock;

use thiserror::Error;

use crate::netlist::{elaborate, parse, Circuit, CircuitAst, ElaborateError, ElaborateOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GateError {
    #[error("unknown gate `{0}`")]
    Unknown(String),
    #[error("gate `{name}` takes {expected} input(s), got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
}

pub type BoolFn = fn(&[bool]) -> Vec<bool>;

#[derive(Debug, Clone)]
pub struct GateMacro {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub expansion: CircuitAst,
    pub spec: BoolFn,
    /// The gate preserves the number of 1-bits.
    pub conservative_claim: bool,
    /// The gate's truth table is a bijection.
    pub reversible_claim: bool,
}

impl GateMacro {
    pub fn eval(&self, input: &[bool]) -> Result<Vec<bool>, GateError> {
        if input.len() != self.inputs.len() {
            return Err(GateError::Arity {
                name: self.name.clone(),
                expected: self.inputs.len(),
                got: input.len(),
            });
        }
        Ok((self.spec)(input))
    }
}

#[derive(Debug)]
pub struct Library {
    macros: Vec<GateMacro>,
}

struct Entry {
    source: &'static str,
    spec: BoolFn,
    conservative: bool,
    reversible: bool,
}

const ENTRIES: &[Entry] = &[
    Entry {
        source: include_str!("../netlists/and.net"),
        spec: |x| vec![x[0] & x[1]],
        conservative: false,
        reversible: false,
    },
    Entry {
        source: include_str!("../netlists/xor.net"),
        spec: |x| vec![x[0] ^ x[1]],
        conservative: false,
        reversible: false,
    },
    Entry {
        source: include_str!("../netlists/or.net"),
        spec: |x| vec![x[0] | x[1]],
        conservative: false,
        reversible: false,
    },
    Entry {
        source: include_str!("../netlists/not_syringe.net"),
        spec: |x| vec![!x[0]],
        conservative: false,
        reversible: true,
    },
    Entry {
        source: include_str!("../netlists/not_interaction.net"),
        spec: |x| vec![!x[0]],
        conservative: false,
        reversible: true,
    },
    Entry {
        source: include_str!("../netlists/nand.net"),
        spec: |x| vec![!(x[0] & x[1])],
        conservative: false,
        reversible: false,
    },
    Entry {
        source: include_str!("../netlists/nor_chained.net"),
        spec: |x| vec![!(x[0] | x[1])],
        conservative: false,
        reversible: false,
    },
    Entry {
        source: include_str!("../netlists/nor_alt.net"),
        spec: |x| vec![!(x[0] | x[1])],
        conservative: false,
        reversible: false,
    },
    Entry {
        source: include_str!("../netlists/toffoli.net"),
        spec: toffoli,
        conservative: false,
        reversible: true,
    },
    Entry {
        source: include_str!("../netlists/fredkin_chained.net"),
        spec: fredkin,
        conservative: true,
        reversible: true,
    },
    Entry {
        source: include_str!("../netlists/fredkin_direct.net"),
        spec: fredkin,
        conservative: true,
        reversible: true,
    },
    Entry {
        source: include_str!("../netlists/half_adder.net"),
        spec: |x| vec![x[0] ^ x[1], x[0] & x[1]],
        conservative: false,
        reversible: false,
    },
    Entry {
        source: include_str!("../netlists/full_adder.net"),
        spec: |x| {
            let n = x.iter().filter(|&&b| b).count();
            vec![n & 1 == 1, n >= 2]
        },
        conservative: false,
        reversible: false,
    },
];

/// (c, x1, x2) -> (c, x1, x2 XOR (c AND x1))
fn toffoli(x: &[bool]) -> Vec<bool> {
    vec![x[0], x[1], x[2] ^ (x[0] & x[1])]
}

/// (u, x1, x2) -> (u, y1, y2): data passes straight when u = 1, crosses when u = 0.
fn fredkin(x: &[bool]) -> Vec<bool> {
    if x[0] {
        vec![true, x[1], x[2]]
    } else {
        vec![false, x[2], x[1]]
    }
}

/// The shared, immutable macro library.
pub fn library() -> &'static Library {
    static LIB: OnceLock<Library> = OnceLock::new();
    LIB.get_or_init(Library::build)
}

impl Library {
    fn build() -> Library {
        let macros = ENTRIES
            .iter()
            .map(|e| {
                let expansion =
                    parse(e.source).unwrap_or_else(|err| panic!("built-in netlist: {err}"));
                GateMacro {
                    name: expansion.name.clone(),
                    inputs: expansion.inputs.clone(),
                    outputs: expansion.outputs.clone(),
                    expansion,
                    spec: e.spec,
                    conservative_claim: e.conservative,
                    reversible_claim: e.reversible,
                }
            })
            .collect();
        Library { macros }
    }

    pub fn get(&self, name: &str) -> Option<&GateMacro> {
        self.macros.iter().find(|m| m.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GateMacro> {
        self.macros.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.macros.iter().map(|m| m.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.macros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.macros.is_empty()
    }

    /// The elaborated circuit of one macro, with its own ports as circuit pins.
    pub fn circuit(&self, name: &str) -> Result<Circuit, ElaborateError> {
        let mac = self
            .get(name)
            .ok_or_else(|| ElaborateError::UnknownMacro(name.to_string()))?;
        elaborate(&mac.expansion, self, ElaborateOptions::default())
    }
}

/// Reference Boolean value of a library gate.
pub fn boolean_spec(name: &str, input: &[bool]) -> Result<Vec<bool>, GateError> {
    library()
        .get(name)
        .ok_or_else(|| GateError::Unknown(name.to_string()))?
        .eval(input)
}
