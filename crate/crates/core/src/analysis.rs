//! Exhaustive verification over all input vectors.

use std::collections::HashSet;
use std::fmt::{self, Write};

use thiserror::Error;

use crate::gates::{library, GateError};
use crate::netlist::{Circuit, Diagnostic, ElaborateError};
use crate::physics::CollisionMode;
use crate::primitives::{NodeKind, Port};
use crate::sim::{simulate, Ledger, SimConfig, SimError};

pub const DEFAULT_ARITY_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("circuit has {inputs} inputs; enumeration is capped at {cap}")]
    ArityCap { inputs: usize, cap: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Elaborate(#[from] ElaborateError),
}

/// Row `i` holds the outputs for the input whose bits, most significant
/// first, spell `i` in binary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub inputs: usize,
    pub outputs: usize,
    pub rows: Vec<Vec<bool>>,
}

/// Input vector of row `row` in an `n`-input table, most significant bit first.
pub fn row_bits(row: usize, n: usize) -> Vec<bool> {
    (0..n).map(|b| row >> (n - 1 - b) & 1 == 1).collect()
}

fn popcount(bits: &[bool]) -> usize {
    bits.iter().filter(|&&b| b).count()
}

impl TruthTable {
    pub fn from_fn(inputs: usize, outputs: usize, f: impl Fn(&[bool]) -> Vec<bool>) -> Self {
        let rows = (0..1usize << inputs)
            .map(|i| f(&row_bits(i, inputs)))
            .collect();
        TruthTable {
            inputs,
            outputs,
            rows,
        }
    }

    pub fn identity(n: usize) -> Self {
        TruthTable::from_fn(n, n, <[bool]>::to_vec)
    }

    pub fn input(&self, row: usize) -> Vec<bool> {
        row_bits(row, self.inputs)
    }

    /// The inverse map of a reversible table.
    pub fn inverse(&self) -> Option<TruthTable> {
        if !check_reversible(self) {
            return None;
        }
        let mut rows = vec![Vec::new(); self.rows.len()];
        for (i, out) in self.rows.iter().enumerate() {
            let j = out.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
            rows[j] = self.input(i);
        }
        Some(TruthTable {
            inputs: self.outputs,
            outputs: self.inputs,
            rows,
        })
    }

    pub fn render(&self, input_names: &[&str], output_names: &[&str]) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{} | {}",
            input_names.join(" "),
            output_names.join(" ")
        )
        .unwrap();
        for (i, row) in self.rows.iter().enumerate() {
            let ins: Vec<&str> = self.input(i).iter().map(|&b| bit(b)).collect();
            let outs: Vec<&str> = row.iter().map(|&b| bit(b)).collect();
            writeln!(out, "{} | {}", ins.join(" "), outs.join(" ")).unwrap();
        }
        out
    }
}

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn bits_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| bit(b)).collect()
}

/// Simulated truth table plus the ledger of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub table: TruthTable,
    pub ledgers: Vec<Ledger>,
}

pub fn enumerate(
    circuit: &Circuit,
    mode: CollisionMode,
    cap: usize,
) -> Result<Enumeration, AnalysisError> {
    let n = circuit.inputs.len();
    if n > cap {
        return Err(AnalysisError::ArityCap { inputs: n, cap });
    }
    let cfg = SimConfig {
        trace_enabled: false,
        ..SimConfig::new(mode)
    };
    let mut rows = Vec::with_capacity(1 << n);
    let mut ledgers = Vec::with_capacity(1 << n);
    for i in 0..1usize << n {
        let r = simulate(circuit, &row_bits(i, n), cfg)?;
        rows.push(r.outputs);
        ledgers.push(r.ledger);
    }
    Ok(Enumeration {
        table: TruthTable {
            inputs: n,
            outputs: circuit.outputs.len(),
            rows,
        },
        ledgers,
    })
}

pub fn truth_table(circuit: &Circuit, mode: CollisionMode) -> Result<TruthTable, AnalysisError> {
    Ok(enumerate(circuit, mode, DEFAULT_ARITY_CAP)?.table)
}

/// Square and injective, hence a bijection.
pub fn check_reversible(t: &TruthTable) -> bool {
    if t.inputs != t.outputs {
        return false;
    }
    let distinct: HashSet<&Vec<bool>> = t.rows.iter().collect();
    distinct.len() == t.rows.len()
}

/// Every row keeps its number of 1-bits.
pub fn check_conservative(t: &TruthTable) -> bool {
    t.rows
        .iter()
        .enumerate()
        .all(|(i, out)| popcount(&t.input(i)) == popcount(out))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub mode: CollisionMode,
    pub table: TruthTable,
    /// Input rows whose simulated outputs differ from the reference.
    pub mismatches: Vec<usize>,
    pub reversible: bool,
    pub conservative: bool,
    /// Zero injections and zero waste arrivals over all inputs.
    pub physically_conservative: bool,
    pub balanced: bool,
    pub totals: Ledger,
    pub ledgers: Vec<Ledger>,
}

impl ModeReport {
    pub fn matches_spec(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub reference: TruthTable,
    pub modes: Vec<ModeReport>,
}

impl GateReport {
    /// Simulated tables match the reference in both modes.
    pub fn pass(&self) -> bool {
        self.modes.iter().all(ModeReport::matches_spec)
    }

    pub fn physically_conservative(&self) -> bool {
        self.modes.iter().all(|m| m.physically_conservative)
    }

    pub fn mode(&self, mode: CollisionMode) -> &ModeReport {
        self.modes.iter().find(|m| m.mode == mode).unwrap()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let verdict = if self.pass() { "PASS" } else { "FAIL" };
        writeln!(out, "gate {}: {verdict}", self.name).unwrap();
        let ins: Vec<&str> = self.inputs.iter().map(String::as_str).collect();
        let outs: Vec<&str> = self.outputs.iter().map(String::as_str).collect();
        for m in &self.modes {
            writeln!(out, "  mode {}:", m.mode).unwrap();
            for line in m.table.render(&ins, &outs).lines() {
                writeln!(out, "    {line}").unwrap();
            }
            let yes_no = |b: bool| if b { "yes" } else { "no" };
            writeln!(out, "    matches reference: {}", yes_no(m.matches_spec())).unwrap();
            writeln!(out, "    reversible: {}", yes_no(m.reversible)).unwrap();
            writeln!(out, "    conservative: {}", yes_no(m.conservative)).unwrap();
            writeln!(
                out,
                "    {}",
                if m.physically_conservative {
                    "physically conservative"
                } else {
                    "not physically conservative"
                }
            )
            .unwrap();
            writeln!(out, "    ledger: {}", m.totals).unwrap();
        }
        out
    }

    /// One record per mode and input row.
    pub fn render_records(&self) -> String {
        let mut out = String::new();
        for m in &self.modes {
            for (i, row) in m.table.rows.iter().enumerate() {
                let l = &m.ledgers[i];
                writeln!(
                    out,
                    "gate={} mode={} in={} out={} expected={} match={} injected={} waste={} marbles_in={} marbles_out={}",
                    self.name,
                    m.mode,
                    bits_string(&m.table.input(i)),
                    bits_string(row),
                    bits_string(&self.reference.rows[i]),
                    !m.mismatches.contains(&i),
                    l.injected,
                    l.waste_marbles,
                    l.input_marbles,
                    l.output_marbles
                )
                .unwrap();
            }
        }
        out
    }
}

/// Checks a library gate exhaustively in both collision modes.
pub fn verify_gate(name: &str) -> Result<GateReport, AnalysisError> {
    let lib = library();
    let mac = lib
        .get(name)
        .ok_or_else(|| GateError::Unknown(name.to_string()))?;
    let circuit = lib.circuit(name)?;
    let reference = TruthTable::from_fn(mac.inputs.len(), mac.outputs.len(), mac.spec);
    let mut modes = Vec::new();
    for mode in CollisionMode::ALL {
        let e = enumerate(&circuit, mode, DEFAULT_ARITY_CAP)?;
        let mismatches = (0..e.table.rows.len())
            .filter(|&i| e.table.rows[i] != reference.rows[i])
            .collect();
        let mut totals = Ledger::default();
        for l in &e.ledgers {
            totals.absorb(l);
        }
        modes.push(ModeReport {
            mode,
            reversible: check_reversible(&e.table),
            conservative: check_conservative(&e.table),
            physically_conservative: totals.physically_conservative(),
            balanced: e.ledgers.iter().all(Ledger::is_balanced),
            mismatches,
            table: e.table,
            totals,
            ledgers: e.ledgers,
        });
    }
    Ok(GateReport {
        name: mac.name.clone(),
        inputs: mac.inputs.clone(),
        outputs: mac.outputs.clone(),
        reference,
        modes,
    })
}

/// A channel delivering its marble to a junction or join off the node's phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimingViolation {
    pub node: String,
    pub port: Port,
    pub producer: String,
    pub fires_at: u32,
    pub arrives_at: u32,
}

impl TimingViolation {
    pub fn mismatch(&self) -> u32 {
        self.fires_at.abs_diff(self.arrives_at)
    }

    pub fn diagnostic(&self) -> Diagnostic {
        Diagnostic::error(self.to_string(), None)
    }
}

impl fmt::Display for TimingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "timing: {}.{} fires at phase {} but the marble from {} arrives at phase {} (mismatch {})",
            self.node,
            self.port,
            self.fires_at,
            self.producer,
            self.arrives_at,
            self.mismatch()
        )
    }
}

/// One violation per channel reaching a junction or join off its phase.
pub fn timing_lint(circuit: &Circuit) -> Vec<TimingViolation> {
    let mut found = Vec::new();
    for id in circuit.ids() {
        let node = circuit.node(id);
        if !matches!(node.kind, NodeKind::Junction | NodeKind::Join) {
            continue;
        }
        for c in circuit.incoming(id) {
            let arrival = circuit.node(c.from).phase + 1;
            if arrival != node.phase {
                found.push(TimingViolation {
                    node: node.name.clone(),
                    port: c.to_port,
                    producer: format!("{}.{}", circuit.node(c.from).name, c.from_port),
                    fires_at: node.phase,
                    arrives_at: arrival,
                });
            }
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{elaborate, parse, ElaborateOptions, SyncPolicy};

    fn table(rows: &[&str], inputs: usize) -> TruthTable {
        let rows: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| r.chars().map(|c| c == '1').collect())
            .collect();
        TruthTable {
            inputs,
            outputs: rows[0].len(),
            rows,
        }
    }

    #[test]
    fn reversibility_and_conservation() {
        let toffoli = table(&["000", "001", "010", "011", "100", "101", "111", "110"], 3);
        let fredkin = table(&["000", "010", "001", "011", "100", "101", "110", "111"], 3);
        let and = table(&["0", "0", "0", "1"], 2);
        assert!(check_reversible(&toffoli));
        assert!(check_reversible(&fredkin));
        assert!(!check_reversible(&and));
        assert!(check_conservative(&fredkin));
        assert!(!check_conservative(&toffoli));
        assert!(check_conservative(&TruthTable::identity(3)));
        assert!(!check_conservative(&and));
        assert_eq!(toffoli.inverse().unwrap(), toffoli);
        assert!(and.inverse().is_none());
    }

    #[test]
    fn xor_and_passthrough_tables() {
        let xor = library().circuit("XOR").unwrap();
        for mode in CollisionMode::ALL {
            assert_eq!(
                truth_table(&xor, mode).unwrap(),
                table(&["0", "1", "1", "0"], 2)
            );
        }
        let id = elaborate(
            &parse("circuit id\ninput a\noutput y\nconnect a -> y").unwrap(),
            library(),
            ElaborateOptions::default(),
        )
        .unwrap();
        assert_eq!(
            truth_table(&id, CollisionMode::Bounce).unwrap(),
            TruthTable::identity(1)
        );
    }

    #[test]
    fn arity_cap() {
        let c = library().circuit("FULL_ADDER").unwrap();
        assert_eq!(
            enumerate(&c, CollisionMode::Bounce, 2).unwrap_err(),
            AnalysisError::ArityCap { inputs: 3, cap: 2 }
        );
    }

    #[test]
    fn verify_reports() {
        let f = verify_gate("FREDKIN_DIRECT").unwrap();
        assert!(f.pass());
        assert!(f.physically_conservative());
        assert!(f.render_text().contains("physically conservative"));

        let t = verify_gate("TOFFOLI").unwrap();
        assert!(t.pass());
        assert!(t.mode(CollisionMode::Bounce).reversible);
        assert!(!t.physically_conservative());

        let a = verify_gate("AND").unwrap();
        assert!(a.pass());
        assert!(!a.mode(CollisionMode::Merge).reversible);
        assert!(!a.mode(CollisionMode::Merge).conservative);
        assert!(!a.physically_conservative());

        assert!(matches!(
            verify_gate("bogus_gate"),
            Err(AnalysisError::Gate(GateError::Unknown(_)))
        ));
    }

    #[test]
    fn lint_clean_and_skewed() {
        for name in library().names() {
            assert!(
                timing_lint(&library().circuit(name).unwrap()).is_empty(),
                "{name}"
            );
        }
        let skew = "circuit s\ninput a, b\noutput y\nnode T1 : tap\nnode T2 : tap\nnode K : junction\nnode W : waste\n\
connect a -> K.A\nconnect b -> T1.in\nconnect T1.out -> T2.in\nconnect T2.out -> K.B\n\
connect T1.copy -> W.in\nconnect T2.copy -> W.in\nconnect K.O1 -> y\nconnect K.O2 -> W.in\n\
connect K.O3 -> W.in\nconnect K.O4 -> W.in\nconnect K.O5 -> W.in\n";
        let c = elaborate(
            &parse(skew).unwrap(),
            library(),
            ElaborateOptions {
                sync: SyncPolicy::Off,
            },
        )
        .unwrap();
        let d = timing_lint(&c);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].mismatch(), 2);
        assert_eq!(d[0].node, "K");
        assert_eq!(d[0].port, Port::A);
    }
}
