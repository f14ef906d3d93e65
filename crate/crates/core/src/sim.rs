//! Phase-synchronous execution of an elaborated circuit.
//!
//! Every channel delays a marble by one phase; a hold of `k` phases delays
//! it by `k`. Junctions and syringes act on the marbles present at their
//! ports in a given phase. Simultaneous work is ordered by
//! `(phase, node id, port)`, so a run is a pure function of circuit, input
//! and configuration.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write};

use thiserror::Error;

use crate::netlist::Circuit;
use crate::physics::CollisionMode;
use crate::primitives::{
    junction_route, scalpel_split, sensor_syringe_fire, tap_copy, Marble, MarbleFactory, MarbleId,
    Mass, NodeId, NodeKind, Port,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub mode: CollisionMode,
    /// Reject marbles reaching a junction or syringe off its firing phase.
    pub strict_timing: bool,
    pub trace_enabled: bool,
}

impl SimConfig {
    pub fn new(mode: CollisionMode) -> Self {
        SimConfig {
            mode,
            strict_timing: false,
            trace_enabled: true,
        }
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::new(CollisionMode::Bounce)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("circuit has {expected} input(s), got {got} bit(s)")]
    InputArity { expected: usize, got: usize },
    #[error("timing violation: marble reached {node}.{port} at phase {actual}, node fires at phase {expected}")]
    Timing {
        node: String,
        port: Port,
        expected: u32,
        actual: u32,
    },
    #[error("{0} marble(s) still in flight after the last phase")]
    NotQuiescent(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    /// Marble presented on a circuit input.
    Input,
    /// Marble supplied by a constant source.
    Constant,
    /// Marble formed inside the circuit by a syringe or tap.
    Injected,
    Arrive,
    Output,
    Waste,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Input => "input",
            EventKind::Constant => "const",
            EventKind::Injected => "inject",
            EventKind::Arrive => "arrive",
            EventKind::Output => "output",
            EventKind::Waste => "waste",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub phase: u32,
    pub node: NodeId,
    pub port: Port,
    pub marble: Marble,
    pub kind: EventKind,
}

impl Event {
    fn order_key(&self) -> (u32, NodeId, Port, MarbleId, EventKind) {
        (self.phase, self.node, self.port, self.marble.id, self.kind)
    }
}

/// Two marbles met at a junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Collision {
    pub phase: u32,
    pub node: NodeId,
    pub mode: CollisionMode,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    /// Sorted by `(phase, node, port)`.
    pub events: Vec<Event>,
    pub collisions: Vec<Collision>,
    /// Where each marble came to rest.
    pub final_locations: BTreeMap<MarbleId, NodeId>,
}

impl Trace {
    pub fn collisions_at(&self, node: NodeId) -> impl Iterator<Item = &Collision> {
        self.collisions.iter().filter(move |c| c.node == node)
    }

    /// One record per line: `phase node port marble mass kind`.
    pub fn render(&self, circuit: &Circuit) -> String {
        let mut out = String::new();
        for e in &self.events {
            writeln!(
                out,
                "{} {} {} {} {} {}",
                e.phase,
                circuit.node(e.node).name,
                e.port,
                e.marble.id,
                e.marble.mass,
                e.kind.as_str()
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Injection {
    pub phase: u32,
    pub node: NodeId,
    pub mass: Mass,
}

/// Marble and mass accounting for one run.
///
/// Constant sources count as inputs (`const_marbles` is the subset they
/// supplied); `injected` counts only marbles formed by syringes and taps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ledger {
    pub input_marbles: u32,
    pub const_marbles: u32,
    pub injected: u32,
    pub output_marbles: u32,
    pub waste_marbles: u32,
    pub input_mass: Mass,
    pub injected_mass: Mass,
    pub output_mass: Mass,
    pub waste_mass: Mass,
    pub injections: Vec<Injection>,
}

impl Ledger {
    pub fn record(&mut self, e: &Event) {
        let m = e.marble.mass;
        match e.kind {
            EventKind::Input => {
                self.input_marbles += 1;
                self.input_mass += m;
            }
            EventKind::Constant => {
                self.input_marbles += 1;
                self.const_marbles += 1;
                self.input_mass += m;
            }
            EventKind::Injected => {
                self.injected += 1;
                self.injected_mass += m;
                self.injections.push(Injection {
                    phase: e.phase,
                    node: e.node,
                    mass: m,
                });
            }
            EventKind::Output => {
                self.output_marbles += 1;
                self.output_mass += m;
            }
            EventKind::Waste => {
                self.waste_marbles += 1;
                self.waste_mass += m;
            }
            EventKind::Arrive => {}
        }
    }

    /// `input + injected = output + waste`, in exact arithmetic.
    pub fn is_balanced(&self) -> bool {
        self.input_mass + self.injected_mass == self.output_mass + self.waste_mass
    }

    /// No marble was formed inside the circuit and none was discarded.
    pub fn physically_conservative(&self) -> bool {
        self.injected == 0 && self.waste_marbles == 0
    }

    pub fn absorb(&mut self, other: &Ledger) {
        self.input_marbles += other.input_marbles;
        self.const_marbles += other.const_marbles;
        self.injected += other.injected;
        self.output_marbles += other.output_marbles;
        self.waste_marbles += other.waste_marbles;
        self.input_mass += other.input_mass;
        self.injected_mass += other.injected_mass;
        self.output_mass += other.output_mass;
        self.waste_mass += other.waste_mass;
        self.injections.extend_from_slice(&other.injections);
    }
}

impl fmt::Display for Ledger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "in={} (const={}) injected={} out={} waste={} mass_in={} mass_injected={} mass_out={} mass_waste={}",
            self.input_marbles,
            self.const_marbles,
            self.injected,
            self.output_marbles,
            self.waste_marbles,
            self.input_mass,
            self.injected_mass,
            self.output_mass,
            self.waste_mass
        )
    }
}

/// Rebuilds the ledger from a recorded trace.
pub fn run_ledger(trace: &Trace) -> Ledger {
    let mut l = Ledger::default();
    for e in &trace.events {
        l.record(e);
    }
    l
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HazardKind {
    /// Marble reached a timing-sensitive node outside its firing phase.
    OffPhase { expected: u32 },
    /// Several marbles reached a join together and coalesced.
    JoinCoalescence { marbles: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hazard {
    pub phase: u32,
    pub node: NodeId,
    pub kind: HazardKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub outputs: Vec<bool>,
    pub trace: Trace,
    pub ledger: Ledger,
    pub hazards: Vec<Hazard>,
}

struct Run<'c> {
    circuit: &'c Circuit,
    cfg: SimConfig,
    factory: MarbleFactory,
    queue: BTreeMap<(u32, NodeId, Port), Vec<Marble>>,
    trace: Trace,
    ledger: Ledger,
    hazards: Vec<Hazard>,
    live: HashSet<MarbleId>,
    output_hits: Vec<bool>,
}

impl<'c> Run<'c> {
    fn record(&mut self, phase: u32, node: NodeId, port: Port, marble: Marble, kind: EventKind) {
        let e = Event {
            phase,
            node,
            port,
            marble,
            kind,
        };
        self.ledger.record(&e);
        if self.cfg.trace_enabled {
            self.trace.events.push(e);
        }
    }

    fn create(&mut self, mass: Mass, at: NodeId) -> Marble {
        let m = self.factory.create(mass, at);
        self.live.insert(m.id);
        m
    }

    fn consume(&mut self, m: &Marble) {
        self.live.remove(&m.id);
    }

    fn rest(&mut self, m: &Marble, at: NodeId) {
        self.live.remove(&m.id);
        if self.cfg.trace_enabled {
            self.trace.final_locations.insert(m.id, at);
        }
    }

    /// Sends `marble` out of `from.port` at phase `depart`.
    fn emit(&mut self, from: NodeId, port: Port, marble: Marble, depart: u32) {
        let ch = *self
            .circuit
            .consumer(from, port)
            .unwrap_or_else(|| panic!("unwired port {}.{port}", self.circuit.node(from).name));
        let arrival = depart + 1;
        match self.circuit.node(ch.to).kind {
            NodeKind::OutputSink => {
                self.record(arrival, ch.to, ch.to_port, marble, EventKind::Output);
                self.rest(&marble, ch.to);
                let slot = self
                    .circuit
                    .outputs
                    .iter()
                    .position(|&o| o == ch.to)
                    .unwrap();
                self.output_hits[slot] = true;
            }
            NodeKind::WasteSink => {
                self.record(arrival, ch.to, ch.to_port, marble, EventKind::Waste);
                self.rest(&marble, ch.to);
            }
            _ => {
                self.record(arrival, ch.to, ch.to_port, marble, EventKind::Arrive);
                self.queue
                    .entry((arrival, ch.to, ch.to_port))
                    .or_default()
                    .push(marble);
            }
        }
    }

    fn check_phase(&mut self, node: NodeId, port: Port, phase: u32) -> Result<bool, SimError> {
        let expected = self.circuit.node(node).phase;
        if phase == expected {
            return Ok(true);
        }
        if self.cfg.strict_timing {
            return Err(SimError::Timing {
                node: self.circuit.node(node).name.clone(),
                port,
                expected,
                actual: phase,
            });
        }
        self.hazards.push(Hazard {
            phase,
            node,
            kind: HazardKind::OffPhase { expected },
        });
        Ok(false)
    }

    fn fire(&mut self, id: NodeId, t: u32, arrivals: Vec<(Port, Marble)>) -> Result<(), SimError> {
        let kind = self.circuit.node(id).kind;
        if kind.is_timing_sensitive() {
            for (port, _) in &arrivals {
                self.check_phase(id, *port, t)?;
            }
        }
        match kind {
            NodeKind::Junction => {
                let a = arrivals
                    .iter()
                    .find(|(p, _)| *p == Port::A)
                    .map(|(_, m)| *m);
                let b = arrivals
                    .iter()
                    .find(|(p, _)| *p == Port::B)
                    .map(|(_, m)| *m);
                let occ = junction_route(a.map(|m| m.mass), b.map(|m| m.mass), self.cfg.mode);
                match (a, b) {
                    (None, None) => {}
                    (Some(ma), None) => self.emit(id, Port::O(5), ma, t),
                    (None, Some(mb)) => self.emit(id, Port::O(1), mb, t),
                    (Some(ma), Some(mb)) => {
                        self.trace.collisions.push(Collision {
                            phase: t,
                            node: id,
                            mode: self.cfg.mode,
                        });
                        match self.cfg.mode {
                            CollisionMode::Bounce => {
                                self.emit(id, Port::O(2), ma, t);
                                self.emit(id, Port::O(4), mb, t);
                            }
                            CollisionMode::Merge => {
                                self.consume(&ma);
                                self.consume(&mb);
                                let merged = self.create(occ.get(3).unwrap(), id);
                                self.emit(id, Port::O(3), merged, t);
                            }
                        }
                    }
                }
            }
            NodeKind::Scalpel => {
                for (_, m) in arrivals {
                    self.consume(&m);
                    let (l, r) = scalpel_split(&m, &mut self.factory, id);
                    self.live.insert(l.id);
                    self.live.insert(r.id);
                    self.emit(id, Port::Out1, l, t);
                    self.emit(id, Port::Out2, r, t);
                }
            }
            NodeKind::EmHold { phases } => {
                for (_, m) in arrivals {
                    self.emit(id, Port::Out, m, t + phases - 1);
                }
            }
            NodeKind::SensorSyringe => {
                let on_phase = t == self.circuit.node(id).phase;
                let sensed = on_phase && !arrivals.is_empty();
                for (port, m) in arrivals {
                    self.record(t, id, port, m, EventKind::Waste);
                    self.rest(&m, id);
                }
                if on_phase {
                    let firing = sensor_syringe_fire(sensed);
                    if firing.injected {
                        let fresh = self.create(Mass::UNIT, id);
                        self.record(t, id, Port::Out, fresh, EventKind::Injected);
                        self.emit(id, Port::Out, fresh, t);
                    }
                }
            }
            NodeKind::Tap => {
                for (_, m) in arrivals {
                    let firing = tap_copy(true);
                    self.emit(id, Port::Out, m, t);
                    if firing.injected {
                        let copy = self.create(Mass::UNIT, id);
                        self.record(t, id, Port::Copy, copy, EventKind::Injected);
                        self.emit(id, Port::Copy, copy, t);
                    }
                }
            }
            NodeKind::Join => match arrivals.len() {
                0 => {}
                1 => self.emit(id, Port::Out, arrivals[0].1, t),
                n => {
                    self.hazards.push(Hazard {
                        phase: t,
                        node: id,
                        kind: HazardKind::JoinCoalescence { marbles: n },
                    });
                    let mut mass = Mass::ZERO;
                    for (_, m) in &arrivals {
                        mass += m.mass;
                        self.consume(m);
                    }
                    let merged = self.create(mass, id);
                    self.emit(id, Port::Out, merged, t);
                }
            },
            NodeKind::InputPort
            | NodeKind::ConstSource
            | NodeKind::OutputSink
            | NodeKind::WasteSink => {}
        }
        Ok(())
    }
}

/// Runs `circuit` on one input vector (most significant input first).
pub fn simulate(circuit: &Circuit, input: &[bool], cfg: SimConfig) -> Result<SimOutcome, SimError> {
    if input.len() != circuit.inputs.len() {
        return Err(SimError::InputArity {
            expected: circuit.inputs.len(),
            got: input.len(),
        });
    }
    let mut run = Run {
        circuit,
        cfg,
        factory: MarbleFactory::new(),
        queue: BTreeMap::new(),
        trace: Trace::default(),
        ledger: Ledger::default(),
        hazards: Vec::new(),
        live: HashSet::new(),
        output_hits: vec![false; circuit.outputs.len()],
    };

    for (&id, &bit) in circuit.inputs.iter().zip(input) {
        if bit {
            let m = run.create(Mass::UNIT, id);
            run.record(0, id, Port::Out, m, EventKind::Input);
            run.emit(id, Port::Out, m, 0);
        }
    }
    let mut syringes = BTreeSet::new();
    for id in circuit.ids() {
        let node = circuit.node(id);
        match node.kind {
            NodeKind::ConstSource => {
                let m = run.create(Mass::UNIT, id);
                run.record(node.phase, id, Port::Out, m, EventKind::Constant);
                run.emit(id, Port::Out, m, node.phase);
            }
            NodeKind::SensorSyringe => {
                syringes.insert((node.phase, id));
            }
            _ => {}
        }
    }

    loop {
        let next_arrival = run.queue.keys().next().map(|k| k.0);
        let next_syringe = syringes.first().map(|s| s.0);
        let t = match (next_arrival, next_syringe) {
            (None, None) => break,
            (a, s) => a.into_iter().chain(s).min().unwrap(),
        };
        let mut batch: BTreeMap<NodeId, Vec<(Port, Marble)>> = BTreeMap::new();
        while let Some(entry) = run.queue.first_entry() {
            if entry.key().0 != t {
                break;
            }
            let ((_, node, port), marbles) = entry.remove_entry();
            batch
                .entry(node)
                .or_default()
                .extend(marbles.into_iter().map(|m| (port, m)));
        }
        while let Some(&(phase, id)) = syringes.first() {
            if phase != t {
                break;
            }
            syringes.pop_first();
            batch.entry(id).or_default();
        }
        for (id, arrivals) in batch {
            run.fire(id, t, arrivals)?;
        }
    }

    if !run.live.is_empty() {
        return Err(SimError::NotQuiescent(run.live.len()));
    }
    let mut trace = run.trace;
    trace.events.sort_by_key(Event::order_key);
    Ok(SimOutcome {
        outputs: run.output_hits,
        trace,
        ledger: run.ledger,
        hazards: run.hazards,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::library;
    use crate::netlist::{elaborate, parse, ElaborateOptions, SyncPolicy};
    use CollisionMode::*;

    fn run(gate: &str, bits: &[bool], mode: CollisionMode) -> SimOutcome {
        let c = library().circuit(gate).unwrap();
        simulate(&c, bits, SimConfig::new(mode)).unwrap()
    }

    #[test]
    fn and_collision_both_modes() {
        let b = run("AND", &[true, true], Bounce);
        assert_eq!(b.outputs, vec![true]);
        assert_eq!(b.ledger.waste_marbles, 1);
        assert_eq!(b.ledger.output_mass, Mass::UNIT);
        assert!(b.ledger.is_balanced());

        let m = run("AND", &[true, true], Merge);
        assert_eq!(m.outputs, vec![true]);
        assert_eq!(m.ledger.output_mass, Mass::UNIT);
        assert_eq!(m.ledger.waste_mass, Mass::UNIT);
        assert_eq!(m.ledger.waste_marbles, 1);
        assert!(m.ledger.is_balanced());
    }

    #[test]
    fn xor_merge_wastes_double_marble() {
        let m = run("XOR", &[true, true], Merge);
        assert_eq!(m.outputs, vec![false]);
        assert_eq!(m.ledger.waste_mass, Mass::from_int(2));
        assert_eq!(m.ledger.waste_marbles, 1);
        assert_eq!(run_ledger(&m.trace), m.ledger);
    }

    #[test]
    fn fredkin_direct_walkthroughs() {
        let c = library().circuit("FREDKIN_DIRECT").unwrap();
        let j1 = c.find("J1").unwrap();
        let j2 = c.find("J2").unwrap();
        for mode in CollisionMode::ALL {
            let r = simulate(&c, &[false, true, false], SimConfig::new(mode)).unwrap();
            assert_eq!(r.outputs, vec![false, false, true]);
            assert!(r.trace.collisions.is_empty());
            assert!(r.ledger.physically_conservative());

            let r = simulate(&c, &[true, false, true], SimConfig::new(mode)).unwrap();
            assert_eq!(r.outputs, vec![true, false, true]);
            assert_eq!(r.trace.collisions_at(j1).count(), 0);
            assert_eq!(r.trace.collisions_at(j2).count(), 1);
        }
    }

    #[test]
    fn all_zero_input_is_silent() {
        for name in [
            "AND",
            "XOR",
            "OR",
            "HALF_ADDER",
            "FREDKIN_DIRECT",
            "TOFFOLI",
        ] {
            let c = library().circuit(name).unwrap();
            let r = simulate(&c, &vec![false; c.inputs.len()], SimConfig::default()).unwrap();
            assert!(r.outputs.iter().all(|&b| !b));
            assert!(r.trace.events.is_empty(), "{name}");
            assert_eq!(r.ledger, Ledger::default());
        }
    }

    #[test]
    fn empty_trace_gives_empty_ledger() {
        assert_eq!(run_ledger(&Trace::default()), Ledger::default());
    }

    #[test]
    fn syringe_and_constants() {
        let r = run("NOT_SYRINGE", &[false], Bounce);
        assert_eq!(r.outputs, vec![true]);
        assert_eq!(r.ledger.injected, 1);
        let r = run("NOT_SYRINGE", &[true], Bounce);
        assert_eq!(r.outputs, vec![false]);
        assert_eq!(r.ledger.waste_marbles, 1);
        assert_eq!(r.ledger.injected, 0);

        let r = run("NOT_INTERACTION", &[false], Merge);
        assert_eq!(r.outputs, vec![true]);
        assert_eq!(r.ledger.const_marbles, 1);
        assert_eq!(r.ledger.injected, 0);
    }

    #[test]
    fn arity_checked() {
        let c = library().circuit("AND").unwrap();
        assert_eq!(
            simulate(&c, &[true], SimConfig::default()),
            Err(SimError::InputArity {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn deterministic_and_sorted() {
        let c = library().circuit("FREDKIN_CHAINED").unwrap();
        for i in 0..8u8 {
            let bits: Vec<bool> = (0..3).map(|b| i >> (2 - b) & 1 == 1).collect();
            let a = simulate(&c, &bits, SimConfig::new(Merge)).unwrap();
            let b = simulate(&c, &bits, SimConfig::new(Merge)).unwrap();
            assert_eq!(a, b);
            let keys: Vec<_> = a.trace.events.iter().map(Event::order_key).collect();
            let mut sorted = keys.clone();
            sorted.sort();
            assert_eq!(keys, sorted);
            let mut seen = HashSet::new();
            for e in &a.trace.events {
                if e.kind != EventKind::Waste {
                    assert!(seen.insert((e.phase, e.marble.id, e.node)));
                }
            }
            let mut places = HashSet::new();
            for e in &a.trace.events {
                assert!(
                    places.insert((e.phase, e.marble.id, e.node, e.kind))
                        || e.kind == EventKind::Waste
                );
            }
        }
    }

    const SKEW: &str = "\
circuit skew
input a, b
output y
node T1 : tap
node T2 : tap
node T3 : tap
node K : junction
node W : waste
connect a -> K.A
connect b -> T1.in
connect T1.out -> T2.in
connect T2.out -> K.B
connect T1.copy -> W.in
connect T2.copy -> T3.in
connect T3.out -> W.in
connect T3.copy -> W.in
connect K.O1 -> y
connect K.O2 -> W.in
connect K.O3 -> W.in
connect K.O4 -> W.in
connect K.O5 -> W.in
";

    #[test]
    fn timing_hazard_misreads_late_marble() {
        let ast = parse(SKEW).unwrap();
        let off = elaborate(
            &ast,
            library(),
            ElaborateOptions {
                sync: SyncPolicy::Off,
            },
        )
        .unwrap();
        let r = simulate(&off, &[true, true], SimConfig::new(Bounce)).unwrap();
        // a arrives early and is read as a lone marble; b then passes alone to y.
        assert_eq!(r.outputs, vec![true]);
        assert!(r
            .hazards
            .iter()
            .any(|h| matches!(h.kind, HazardKind::OffPhase { expected: 3 })));
        let strict = SimConfig {
            strict_timing: true,
            ..SimConfig::new(Bounce)
        };
        assert!(matches!(
            simulate(&off, &[true, true], strict),
            Err(SimError::Timing { .. })
        ));

        let fixed = elaborate(&ast, library(), ElaborateOptions::default()).unwrap();
        let r = simulate(&fixed, &[true, true], strict).unwrap();
        assert_eq!(r.outputs, vec![false]);
        assert!(r.hazards.is_empty());
    }

    #[test]
    fn trace_render_format() {
        let c = library().circuit("XOR").unwrap();
        let r = simulate(&c, &[true, false], SimConfig::new(Bounce)).unwrap();
        let text = r.trace.render(&c);
        let first = text.lines().next().unwrap();
        assert_eq!(first, "0 a out m0 1/1 input");
        assert!(text.lines().last().unwrap().ends_with("output"));
    }
}
