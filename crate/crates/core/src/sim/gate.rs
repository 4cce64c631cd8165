use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Base operation of a gate. Controls are carried separately by [`GateSpec`],
/// so `X` with one control is a CNOT, with several an MCX, and so on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Z,
    /// `exp(-i angle Y / 2)`; `Ry(2pi) = -I`.
    Ry(f64),
    /// `diag(1, e^{i angle})`.
    Phase(f64),
    Swap,
}

impl GateKind {
    fn base_name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Ry(_) => "RY",
            GateKind::Phase(_) => "PHASE",
            GateKind::Swap => "SWAP",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Ry(a) | GateKind::Phase(a) => Some(a),
            _ => None,
        }
    }
}

/// A (possibly controlled, possibly classically conditioned) gate.
///
/// Several targets mean the same single-qubit operation on each target, all
/// sharing the controls; `Swap` takes exactly two targets. A gate whose
/// `condition` is `Some(false)` is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
    pub condition: Option<bool>,
}

impl GateSpec {
    pub fn new(kind: GateKind, targets: Vec<usize>, controls: Vec<usize>) -> Self {
        GateSpec {
            kind,
            targets,
            controls,
            condition: None,
        }
    }

    pub fn h(t: usize) -> Self {
        Self::new(GateKind::H, vec![t], vec![])
    }

    pub fn x(t: usize) -> Self {
        Self::new(GateKind::X, vec![t], vec![])
    }

    pub fn z(t: usize) -> Self {
        Self::new(GateKind::Z, vec![t], vec![])
    }

    pub fn cx(c: usize, t: usize) -> Self {
        Self::new(GateKind::X, vec![t], vec![c])
    }

    pub fn cz(c: usize, t: usize) -> Self {
        Self::new(GateKind::Z, vec![t], vec![c])
    }

    pub fn mcx(controls: Vec<usize>, t: usize) -> Self {
        Self::new(GateKind::X, vec![t], controls)
    }

    pub fn ry(t: usize, angle: f64) -> Self {
        Self::new(GateKind::Ry(angle), vec![t], vec![])
    }

    pub fn cry(c: usize, t: usize, angle: f64) -> Self {
        Self::new(GateKind::Ry(angle), vec![t], vec![c])
    }

    pub fn phase(t: usize, angle: f64) -> Self {
        Self::new(GateKind::Phase(angle), vec![t], vec![])
    }

    pub fn cphase(c: usize, t: usize, angle: f64) -> Self {
        Self::new(GateKind::Phase(angle), vec![t], vec![c])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![a, b], vec![])
    }

    pub fn with_condition(mut self, condition: bool) -> Self {
        self.condition = Some(condition);
        self
    }

    /// False only for a classically disabled gate.
    pub fn is_active(&self) -> bool {
        self.condition != Some(false)
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls.iter().chain(self.targets.iter()).copied()
    }

    pub fn inverse(&self) -> Self {
        let kind = match self.kind {
            GateKind::Ry(a) => GateKind::Ry(-a),
            GateKind::Phase(a) => GateKind::Phase(-a),
            k => k,
        };
        GateSpec {
            kind,
            ..self.clone()
        }
    }

    /// Check indices are in range and control/target sets are disjoint.
    pub fn validate(&self, qubits: usize) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::BadShape(format!("{self}: no targets")));
        }
        if self.kind == GateKind::Swap && self.targets.len() != 2 {
            return Err(Error::BadShape(format!("{self}: swap needs two targets")));
        }
        let mut seen = 0u128;
        let mut seen_big = Vec::new();
        for q in self.qubits() {
            if q >= qubits {
                return Err(Error::BadIndex { index: q, qubits });
            }
            let dup = if q < 128 {
                let hit = seen & (1 << q) != 0;
                seen |= 1 << q;
                hit
            } else {
                let hit = seen_big.contains(&q);
                seen_big.push(q);
                hit
            };
            if dup {
                return Err(Error::OverlappingQubits(q));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match (self.kind, self.controls.len()) {
            (k, 0) => k.base_name().to_string(),
            (GateKind::X, 1) => "CX".to_string(),
            (GateKind::X, _) => "MCX".to_string(),
            (k, _) => format!("C-{}", k.base_name()),
        }
    }
}

fn join(qs: &[usize]) -> String {
    qs.iter()
        .map(|q| q.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// One line of the circuit dump:
/// `KIND targets=... controls=... angle=...` with angles in radians at 17
/// significant digits, plus `if=0|1` for classically conditioned gates.
impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} targets={} controls={}",
            self.name(),
            join(&self.targets),
            join(&self.controls)
        )?;
        if let Some(a) = self.kind.angle() {
            write!(f, " angle={a:.16e}")?;
        }
        if let Some(c) = self.condition {
            write!(f, " if={}", u8::from(c))?;
        }
        Ok(())
    }
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| {
            x.parse()
                .map_err(|_| Error::Invalid(format!("bad qubit index {x:?}")))
        })
        .collect()
}

impl FromStr for GateSpec {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut fields = line.split_whitespace();
        let name = fields
            .next()
            .ok_or_else(|| Error::Invalid("empty gate line".into()))?;
        let (mut targets, mut controls, mut angle, mut condition) = (None, Vec::new(), None, None);
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("bad field {field:?}")))?;
            match key {
                "targets" => targets = Some(parse_list(value)?),
                "controls" => controls = parse_list(value)?,
                "angle" => {
                    angle = Some(
                        value
                            .parse::<f64>()
                            .map_err(|_| Error::Invalid(format!("bad angle {value:?}")))?,
                    )
                }
                "if" => condition = Some(value == "1"),
                _ => return Err(Error::Invalid(format!("unknown field {key:?}"))),
            }
        }
        let base = name.strip_prefix("C-").unwrap_or(match name {
            "CX" | "MCX" => "X",
            other => other,
        });
        let need_angle = || angle.ok_or_else(|| Error::Invalid(format!("{name} needs angle")));
        let kind = match base {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "Z" => GateKind::Z,
            "SWAP" => GateKind::Swap,
            "RY" => GateKind::Ry(need_angle()?),
            "PHASE" => GateKind::Phase(need_angle()?),
            other => return Err(Error::Invalid(format!("unknown gate kind {other:?}"))),
        };
        Ok(GateSpec {
            kind,
            targets: targets.ok_or_else(|| Error::Invalid("missing targets".into()))?,
            controls,
            condition,
        })
    }
}

/// Render a gate list in the dump format, one gate per line.
pub fn dump_circuit(gates: &[GateSpec]) -> String {
    let mut out = String::new();
    for g in gates {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}

pub fn parse_circuit(text: &str) -> Result<Vec<GateSpec>> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

/// Gates in reverse order, each inverted.
pub fn inverse_circuit(gates: &[GateSpec]) -> Vec<GateSpec> {
    gates.iter().rev().map(GateSpec::inverse).collect()
}

/// ASAP layer count: each active gate goes one layer after the latest gate
/// touching any of its qubits.
pub fn greedy_depth(gates: &[GateSpec]) -> usize {
    let mut frontier: Vec<usize> = Vec::new();
    let mut depth = 0;
    for g in gates.iter().filter(|g| g.is_active()) {
        let top = g
            .qubits()
            .map(|q| frontier.get(q).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let layer = top + 1;
        for q in g.qubits() {
            if q >= frontier.len() {
                frontier.resize(q + 1, 0);
            }
            frontier[q] = layer;
        }
        depth = depth.max(layer);
    }
    depth
}
