//! Marbles and the semantics of the primitive nodes.
//!
//! The interaction junction has two inputs, `A` (left ramp) and `B` (right
//! ramp), and five output paths `O1`..`O5` numbered left to right. Lone
//! marbles cross over: `A` alone exits `O5`, `B` alone exits `O1`. Two
//! marbles either bounce onto `O2`/`O4` or coalesce onto `O3`.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::physics::CollisionMode;

/// Marble mass as an exact multiple of the reference mass m₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mass(Ratio<u64>);

impl Mass {
    pub const ZERO: Mass = Mass(Ratio::new_raw(0, 1));
    pub const UNIT: Mass = Mass(Ratio::new_raw(1, 1));

    pub fn new(numer: u64, denom: u64) -> Mass {
        Mass(Ratio::new(numer, denom))
    }

    pub fn from_int(n: u64) -> Mass {
        Mass(Ratio::from_integer(n))
    }

    pub fn half(self) -> Mass {
        Mass(self.0 / 2)
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_unit(self) -> bool {
        self.0.is_one()
    }

    pub fn numer(self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(self) -> u64 {
        *self.0.denom()
    }
}

impl Default for Mass {
    fn default() -> Self {
        Mass::ZERO
    }
}

impl Add for Mass {
    type Output = Mass;
    fn add(self, rhs: Mass) -> Mass {
        Mass(self.0 + rhs.0)
    }
}

impl AddAssign for Mass {
    fn add_assign(&mut self, rhs: Mass) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Mass {
    fn sum<I: Iterator<Item = Mass>>(iter: I) -> Mass {
        iter.fold(Mass::ZERO, Add::add)
    }
}

/// Always rendered as `p/q`, including integers (`2/1`).
impl fmt::Display for Mass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MarbleId(pub u32);

impl fmt::Display for MarbleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Marble {
    pub id: MarbleId,
    pub mass: Mass,
    pub origin: NodeId,
}

/// Hands out marble ids in creation order.
#[derive(Debug, Default)]
pub struct MarbleFactory {
    next: u32,
}

impl MarbleFactory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&mut self, mass: Mass, origin: NodeId) -> Marble {
        let id = MarbleId(self.next);
        self.next += 1;
        Marble { id, mass, origin }
    }

    pub fn issued(&self) -> u32 {
        self.next
    }
}

/// A node port. Ordering follows declaration order and is part of the
/// simulator's deterministic tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Port {
    A,
    B,
    In,
    /// Join input `inN`, 1-based.
    InN(u16),
    /// Junction output `O1`..`O5`.
    O(u8),
    Out,
    Out1,
    Out2,
    Copy,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Port::A => f.write_str("A"),
            Port::B => f.write_str("B"),
            Port::In => f.write_str("in"),
            Port::InN(n) => write!(f, "in{n}"),
            Port::O(n) => write!(f, "O{n}"),
            Port::Out => f.write_str("out"),
            Port::Out1 => f.write_str("out1"),
            Port::Out2 => f.write_str("out2"),
            Port::Copy => f.write_str("copy"),
        }
    }
}

impl FromStr for Port {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "A" => Port::A,
            "B" => Port::B,
            "in" => Port::In,
            "out" => Port::Out,
            "out1" => Port::Out1,
            "out2" => Port::Out2,
            "copy" => Port::Copy,
            _ => {
                if let Some(n) = s.strip_prefix('O') {
                    match n.parse::<u8>() {
                        Ok(k @ 1..=5) if !n.starts_with('0') => Port::O(k),
                        _ => return Err(()),
                    }
                } else if let Some(n) = s.strip_prefix("in") {
                    match n.parse::<u16>() {
                        Ok(k) if k >= 1 && !n.starts_with('0') => Port::InN(k),
                        _ => return Err(()),
                    }
                } else {
                    return Err(());
                }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    InputPort,
    ConstSource,
    /// Electromagnet capture point releasing its marble `phases` phases later.
    EmHold {
        phases: u32,
    },
    Junction,
    Scalpel,
    SensorSyringe,
    Tap,
    Join,
    OutputSink,
    WasteSink,
}

impl NodeKind {
    pub fn name(&self) -> &'static str {
        match self {
            NodeKind::InputPort => "input",
            NodeKind::ConstSource => "const1",
            NodeKind::EmHold { .. } => "hold",
            NodeKind::Junction => "junction",
            NodeKind::Scalpel => "scalpel",
            NodeKind::SensorSyringe => "sensor_syringe",
            NodeKind::Tap => "tap",
            NodeKind::Join => "join",
            NodeKind::OutputSink => "output",
            NodeKind::WasteSink => "waste",
        }
    }

    pub fn is_sink(&self) -> bool {
        matches!(self, NodeKind::OutputSink | NodeKind::WasteSink)
    }

    pub fn is_source(&self) -> bool {
        matches!(self, NodeKind::InputPort | NodeKind::ConstSource)
    }

    /// Nodes whose result depends on marbles arriving exactly at their phase.
    pub fn is_timing_sensitive(&self) -> bool {
        matches!(self, NodeKind::Junction | NodeKind::SensorSyringe)
    }

    /// Fixed input ports. Joins accept `in1..inN` and report an empty list.
    pub fn input_ports(&self) -> &'static [Port] {
        match self {
            NodeKind::InputPort | NodeKind::ConstSource | NodeKind::Join => &[],
            NodeKind::Junction => &[Port::A, Port::B],
            NodeKind::EmHold { .. }
            | NodeKind::Scalpel
            | NodeKind::SensorSyringe
            | NodeKind::Tap
            | NodeKind::OutputSink
            | NodeKind::WasteSink => &[Port::In],
        }
    }

    pub fn output_ports(&self) -> &'static [Port] {
        match self {
            NodeKind::InputPort
            | NodeKind::ConstSource
            | NodeKind::EmHold { .. }
            | NodeKind::SensorSyringe
            | NodeKind::Join => &[Port::Out],
            NodeKind::Junction => &[Port::O(1), Port::O(2), Port::O(3), Port::O(4), Port::O(5)],
            NodeKind::Scalpel => &[Port::Out1, Port::Out2],
            NodeKind::Tap => &[Port::Out, Port::Copy],
            NodeKind::OutputSink | NodeKind::WasteSink => &[],
        }
    }

    pub fn accepts_input(&self, port: Port) -> bool {
        match self {
            NodeKind::Join => matches!(port, Port::InN(_)),
            _ => self.input_ports().contains(&port),
        }
    }

    pub fn has_output(&self, port: Port) -> bool {
        self.output_ports().contains(&port)
    }

    /// Whether one input port may be fed by several channels.
    pub fn fan_in_allowed(&self) -> bool {
        matches!(self, NodeKind::WasteSink)
    }
}

/// Masses present on the five junction outputs after one firing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PortOccupancy(pub [Option<Mass>; 5]);

impl PortOccupancy {
    /// Occupancy of output `O{n}`, `n` in 1..=5.
    pub fn get(&self, n: u8) -> Option<Mass> {
        self.0[usize::from(n - 1)]
    }

    pub fn occupied(&self) -> Vec<u8> {
        (1..=5).filter(|&n| self.get(n).is_some()).collect()
    }

    pub fn total_mass(&self) -> Mass {
        self.0.iter().flatten().copied().sum()
    }

    pub fn count(&self) -> usize {
        self.0.iter().flatten().count()
    }
}

/// Routes the junction inputs `a` (left) and `b` (right) to `O1`..`O5`.
pub fn junction_route(a: Option<Mass>, b: Option<Mass>, mode: CollisionMode) -> PortOccupancy {
    let mut out = [None; 5];
    match (a, b) {
        (None, None) => {}
        (None, Some(mb)) => out[0] = Some(mb),
        (Some(ma), None) => out[4] = Some(ma),
        (Some(ma), Some(mb)) => match mode {
            CollisionMode::Bounce => {
                out[1] = Some(ma);
                out[3] = Some(mb);
            }
            CollisionMode::Merge => out[2] = Some(ma + mb),
        },
    }
    PortOccupancy(out)
}

/// Splits a marble into two halves with fresh ids.
pub fn scalpel_split(m: &Marble, factory: &mut MarbleFactory, at: NodeId) -> (Marble, Marble) {
    let half = m.mass.half();
    (factory.create(half, at), factory.create(half, at))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyringeFiring {
    pub output_present: bool,
    /// The sensed marble was sent to waste.
    pub wasted_input: bool,
    /// A fresh marble was formed by the syringe.
    pub injected: bool,
}

/// Motion sensor plus syringe: a passing marble is discarded, an absent
/// one triggers formation of a fresh marble.
pub fn sensor_syringe_fire(input_present: bool) -> SyringeFiring {
    SyringeFiring {
        output_present: !input_present,
        wasted_input: input_present,
        injected: !input_present,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TapFiring {
    pub passthrough: bool,
    pub copy: bool,
    pub injected: bool,
}

/// Duplicates a signal: the sensed marble passes through and a synchronized
/// syringe forms the copy.
pub fn tap_copy(input_present: bool) -> TapFiring {
    TapFiring {
        passthrough: input_present,
        copy: input_present,
        injected: input_present,
    }
}
