//! Physical parameters of the marbles and the bounce/merge decision.
//!
//! All quantities are SI. Physics is evaluated once per circuit run: the
//! chosen [`CollisionMode`] applies to every junction of that run.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("ambiguous regime: velocity {velocity} m/s lies between {v_bounce} and {v_merge} m/s")]
    AmbiguousRegime {
        velocity: f64,
        v_bounce: f64,
        v_merge: f64,
    },
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
}

/// Outcome of two marbles meeting at a junction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CollisionMode {
    /// Elastic rebound onto the two inner diagonal paths.
    Bounce,
    /// Coalescence into a single marble of double mass on the central path.
    Merge,
}

impl CollisionMode {
    pub const ALL: [CollisionMode; 2] = [CollisionMode::Bounce, CollisionMode::Merge];

    pub fn as_str(self) -> &'static str {
        match self {
            CollisionMode::Bounce => "bounce",
            CollisionMode::Merge => "merge",
        }
    }
}

impl fmt::Display for CollisionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CollisionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bounce" => Ok(CollisionMode::Bounce),
            "merge" => Ok(CollisionMode::Merge),
            other => Err(format!("unknown collision mode `{other}`")),
        }
    }
}

/// What the threshold policy does for velocities strictly between the
/// bounce and merge speeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MidbandRule {
    #[default]
    ForceBounce,
    ForceMerge,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionPolicy {
    /// Empirical speeds: at or below `v_bounce` bounce, at or above `v_merge` merge.
    Threshold { midband: MidbandRule },
    /// Merge iff kinetic energy reaches `energy_ratio` of the surface energy.
    Energy,
}

impl Default for CollisionPolicy {
    fn default() -> Self {
        CollisionPolicy::Threshold {
            midband: MidbandRule::ForceBounce,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsParams {
    /// kg/m³
    pub density: f64,
    /// m
    pub diameter: f64,
    /// N/m
    pub surface_tension: f64,
    /// Fraction of the surface energy the kinetic energy must reach to coalesce.
    pub energy_ratio: f64,
    /// m/s
    pub v_bounce: f64,
    /// m/s
    pub v_merge: f64,
    /// Operating speed of marbles in the circuit, m/s.
    pub velocity: f64,
}

impl Default for PhysicsParams {
    /// Water-like marble of 2 mm diameter running at the bounce speed.
    fn default() -> Self {
        PhysicsParams {
            density: 1000.0,
            diameter: 0.002,
            surface_tension: 0.072,
            energy_ratio: 0.6,
            v_bounce: 0.21,
            v_merge: 0.29,
            velocity: 0.21,
        }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        let positive = [
            ("density", self.density),
            ("diameter", self.diameter),
            ("surface_tension", self.surface_tension),
            ("v_bounce", self.v_bounce),
            ("v_merge", self.v_merge),
            ("velocity", self.velocity),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(PhysicsError::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        if !self.energy_ratio.is_finite() || self.energy_ratio <= 0.0 || self.energy_ratio > 1.0 {
            return Err(PhysicsError::InvalidParam {
                name: "energy_ratio",
                reason: format!("must lie in (0, 1], got {}", self.energy_ratio),
            });
        }
        if self.v_bounce >= self.v_merge {
            return Err(PhysicsError::InvalidParam {
                name: "v_bounce",
                reason: format!(
                    "must be below v_merge ({} >= {})",
                    self.v_bounce, self.v_merge
                ),
            });
        }
        Ok(())
    }

    /// Mass of one marble, kg.
    pub fn marble_mass(&self) -> f64 {
        self.density * PI / 6.0 * self.diameter.powi(3)
    }
}

fn check_finite(values: &[(&str, f64)]) -> Result<(), PhysicsError> {
    for (name, v) in values {
        if !v.is_finite() {
            return Err(PhysicsError::Domain(format!("{name} is not finite")));
        }
        if *v < 0.0 {
            return Err(PhysicsError::Domain(format!("{name} is negative ({v})")));
        }
    }
    Ok(())
}

/// Weber number `ρ·D·v²/σ`.
pub fn weber_number(
    density: f64,
    diameter: f64,
    velocity: f64,
    surface_tension: f64,
) -> Result<f64, PhysicsError> {
    check_finite(&[
        ("density", density),
        ("diameter", diameter),
        ("velocity", velocity),
        ("surface_tension", surface_tension),
    ])?;
    if surface_tension == 0.0 {
        return Err(PhysicsError::Domain("surface_tension must be > 0".into()));
    }
    Ok(density * diameter * velocity * velocity / surface_tension)
}

/// Surface energy of a spherical marble, `σ·π·D²`.
pub fn surface_energy(surface_tension: f64, diameter: f64) -> Result<f64, PhysicsError> {
    check_finite(&[("surface_tension", surface_tension), ("diameter", diameter)])?;
    Ok(surface_tension * PI * diameter * diameter)
}

/// Kinetic energy `½·m·v²` of a marble at the operating velocity.
pub fn kinetic_energy(params: &PhysicsParams) -> f64 {
    0.5 * params.marble_mass() * params.velocity * params.velocity
}

/// Velocity at which the energy criterion switches from bounce to merge.
pub fn energy_switch_velocity(params: &PhysicsParams) -> f64 {
    let es = params.surface_tension * PI * params.diameter * params.diameter;
    (2.0 * params.energy_ratio * es / params.marble_mass()).sqrt()
}

/// A collision decision plus any warning raised while making it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecision {
    pub mode: CollisionMode,
    pub diagnostic: Option<String>,
}

/// Decides bounce vs merge for the run's operating velocity.
pub fn collision_mode(
    policy: CollisionPolicy,
    params: &PhysicsParams,
) -> Result<ModeDecision, PhysicsError> {
    params.validate()?;
    match policy {
        CollisionPolicy::Threshold { midband } => {
            let v = params.velocity;
            if v <= params.v_bounce {
                return Ok(ModeDecision {
                    mode: CollisionMode::Bounce,
                    diagnostic: None,
                });
            }
            if v >= params.v_merge {
                return Ok(ModeDecision {
                    mode: CollisionMode::Merge,
                    diagnostic: None,
                });
            }
            let forced = match midband {
                MidbandRule::ForceBounce => CollisionMode::Bounce,
                MidbandRule::ForceMerge => CollisionMode::Merge,
                MidbandRule::Reject => {
                    return Err(PhysicsError::AmbiguousRegime {
                        velocity: v,
                        v_bounce: params.v_bounce,
                        v_merge: params.v_merge,
                    })
                }
            };
            Ok(ModeDecision {
                mode: forced,
                diagnostic: Some(format!(
                    "warning: velocity {v} m/s is in the unobserved band ({}, {}); assuming {forced}",
                    params.v_bounce, params.v_merge
                )),
            })
        }
        CollisionPolicy::Energy => {
            let ke = kinetic_energy(params);
            let es = surface_energy(params.surface_tension, params.diameter)?;
            let mode = if ke >= params.energy_ratio * es {
                CollisionMode::Merge
            } else {
                CollisionMode::Bounce
            };
            Ok(ModeDecision {
                mode,
                diagnostic: None,
            })
        }
    }
}

/// Physics configuration as read from a `key=value` file.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhysicsConfig {
    pub params: PhysicsParams,
    pub policy: CollisionPolicy,
}

impl PhysicsConfig {
    pub fn decide(&self) -> Result<ModeDecision, PhysicsError> {
        collision_mode(self.policy, &self.params)
    }
}

/// Parses `key=value` lines. `#` starts a comment; unknown keys are errors.
pub fn parse_physics_config(text: &str) -> Result<PhysicsConfig, PhysicsError> {
    let mut params = PhysicsParams::default();
    let mut energy = false;
    let mut midband = MidbandRule::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| PhysicsError::Config { line: line_no, msg };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let number = || {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("`{key}` expects a number, got `{value}`")))
        };
        match key {
            "density" => params.density = number()?,
            "diameter" => params.diameter = number()?,
            "surface_tension" => params.surface_tension = number()?,
            "energy_ratio" => params.energy_ratio = number()?,
            "v_bounce" => params.v_bounce = number()?,
            "v_merge" => params.v_merge = number()?,
            "velocity" => params.velocity = number()?,
            "policy" => {
                energy = match value {
                    "threshold" => false,
                    "energy" => true,
                    _ => return Err(err(format!("unknown policy `{value}`"))),
                }
            }
            "midband" => {
                midband = match value {
                    "bounce" => MidbandRule::ForceBounce,
                    "merge" => MidbandRule::ForceMerge,
                    "reject" => MidbandRule::Reject,
                    _ => return Err(err(format!("unknown midband rule `{value}`"))),
                }
            }
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
    }
    params.validate()?;
    let policy = if energy {
        CollisionPolicy::Energy
    } else {
        CollisionPolicy::Threshold { midband }
    };
    Ok(PhysicsConfig { params, policy })
}
