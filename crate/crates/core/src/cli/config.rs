//! Run configuration: a JSON document checked field by field so that every
//! violation is reported with its path before anything runs.

use std::fmt;

use serde_json::{Map, Value};

use crate::dirac::Branch;
use crate::grid::{Boundary, Grid1D};
use crate::model::{ModelParams, Variant};
use crate::potential::{validate_segments, Potential, Segment};
use crate::scattering::Incidence;
use crate::wkb::DEFAULT_VALIDITY_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Density,
    Evolve,
    Scatter,
    Wkb,
    Dispersion,
    Klein,
    DiracCompare,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Spectrum,
        Command::Density,
        Command::Evolve,
        Command::Scatter,
        Command::Wkb,
        Command::Dispersion,
        Command::Klein,
        Command::DiracCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Density => "density",
            Command::Evolve => "evolve",
            Command::Scatter => "scatter",
            Command::Wkb => "wkb",
            Command::Dispersion => "dispersion",
            Command::Klein => "klein",
            Command::DiracCompare => "dirac-compare",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    fn needs_model(self) -> bool {
        !matches!(self, Command::Klein | Command::DiracCompare)
    }

    fn needs_grid(self) -> bool {
        matches!(self, Command::Spectrum | Command::Density | Command::Evolve | Command::Wkb)
    }

    fn needs_potential(self) -> bool {
        matches!(
            self,
            Command::Spectrum | Command::Density | Command::Evolve | Command::Wkb | Command::Scatter
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub x0: f64,
    pub sigma: f64,
    pub k0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CommandParams {
    Spectrum {
        count: usize,
    },
    Density {
        states: Vec<usize>,
        a_values: Vec<f64>,
    },
    Evolve {
        packet: Packet,
        dt: f64,
        steps: usize,
        stride: usize,
        margin: Option<f64>,
    },
    Scatter {
        energies: Vec<f64>,
        incidence: Incidence,
    },
    Wkb {
        energy: f64,
        reference: f64,
        threshold: f64,
    },
    Dispersion {
        ks: Vec<f64>,
    },
    Klein {
        energy: f64,
        mass: f64,
        v0: Vec<f64>,
        branches: Vec<Branch>,
    },
    DiracCompare {
        mass: f64,
        ks: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: Option<ModelParams>,
    pub grid: Option<Grid1D>,
    pub potential: Option<Potential>,
    pub params: CommandParams,
}

/// Parses and checks `text` for `command`. With `command = None` the
/// document's own `command` field decides; when both are given they must agree.
pub fn parse(text: &str, command: Option<Command>) -> Result<RunConfig, Vec<Violation>> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        vec![Violation {
            path: "$".into(),
            message: format!("not valid JSON: {e}"),
        }]
    })?;
    let mut w = Walker::default();
    let cfg = w.run_config(&value, command);
    match cfg {
        Some(cfg) if w.violations.is_empty() => Ok(cfg),
        _ => Err(w.violations),
    }
}

#[derive(Default)]
struct Walker {
    violations: Vec<Violation>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl Walker {
    fn err(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        match v.as_object() {
            Some(o) => Some(o),
            None => {
                self.err(path, "expected an object");
                None
            }
        }
    }

    fn allow_keys(&mut self, obj: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                self.err(join(path, key), "unknown key");
            }
        }
    }

    fn field<'v>(&mut self, obj: &'v Map<String, Value>, path: &str, key: &str, required: bool) -> Option<&'v Value> {
        match obj.get(key) {
            Some(v) => Some(v),
            None => {
                if required {
                    self.err(join(path, key), "missing required field");
                }
                None
            }
        }
    }

    fn number_value(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.err(path, "expected a finite number");
                None
            }
        }
    }

    fn number(&mut self, obj: &Map<String, Value>, path: &str, key: &str, required: bool) -> Option<f64> {
        let v = self.field(obj, path, key, required)?;
        self.number_value(v, &join(path, key))
    }

    fn positive(&mut self, obj: &Map<String, Value>, path: &str, key: &str, required: bool) -> Option<f64> {
        let x = self.number(obj, path, key, required)?;
        if x <= 0.0 {
            self.err(join(path, key), format!("must be positive, got {x}"));
            return None;
        }
        Some(x)
    }

    fn integer(&mut self, obj: &Map<String, Value>, path: &str, key: &str, required: bool) -> Option<usize> {
        let v = self.field(obj, path, key, required)?;
        match v.as_u64() {
            Some(i) => Some(i as usize),
            None => {
                self.err(join(path, key), "expected a non-negative integer");
                None
            }
        }
    }

    fn string<'v>(&mut self, obj: &'v Map<String, Value>, path: &str, key: &str, required: bool) -> Option<&'v str> {
        let v = self.field(obj, path, key, required)?;
        match v.as_str() {
            Some(s) => Some(s),
            None => {
                self.err(join(path, key), "expected a string");
                None
            }
        }
    }

    /// A list of numbers, or `{start, stop, count, scale}` with scale `linear` (default) or `log`.
    fn range(&mut self, obj: &Map<String, Value>, path: &str, key: &str) -> Option<Vec<f64>> {
        let v = self.field(obj, path, key, true)?;
        let p = join(path, key);
        if let Some(items) = v.as_array() {
            if items.is_empty() {
                self.err(&p, "list must not be empty");
                return None;
            }
            let vals: Vec<Option<f64>> = items
                .iter()
                .enumerate()
                .map(|(i, x)| self.number_value(x, &format!("{p}[{i}]")))
                .collect();
            return vals.into_iter().collect();
        }
        let o = self.object(v, &p)?;
        self.allow_keys(o, &p, &["start", "stop", "count", "scale"]);
        let start = self.number(o, &p, "start", true);
        let stop = self.number(o, &p, "stop", true);
        let count = self.integer(o, &p, "count", true);
        let scale = self.string(o, &p, "scale", false).unwrap_or("linear");
        let log = match scale {
            "linear" => false,
            "log" => true,
            other => {
                self.err(join(&p, "scale"), format!("expected \"linear\" or \"log\", got \"{other}\""));
                return None;
            }
        };
        let (start, stop, count) = (start?, stop?, count?);
        if count == 0 {
            self.err(join(&p, "count"), "must be at least 1");
            return None;
        }
        if log && (start <= 0.0 || stop <= 0.0) {
            self.err(&p, "log scale needs positive start and stop");
            return None;
        }
        let at = |i: usize| {
            let f = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            if log {
                (start.ln() + f * (stop.ln() - start.ln())).exp()
            } else {
                start + f * (stop - start)
            }
        };
        Some((0..count).map(at).collect())
    }

    fn run_config(&mut self, v: &Value, requested: Option<Command>) -> Option<RunConfig> {
        let root = self.object(v, "$")?;
        let mut allowed = vec!["command", "description", "model", "grid", "potential"];
        allowed.extend(Command::ALL.iter().map(|c| c.name()));
        self.allow_keys(root, "", &allowed);
        if let Some(d) = root.get("description") {
            if !d.is_string() {
                self.err("description", "expected a string");
            }
        }

        let declared = match self.string(root, "", "command", requested.is_none()) {
            Some(name) => match Command::from_name(name) {
                Some(c) => Some(c),
                None => {
                    self.err("command", format!("unknown command \"{name}\""));
                    None
                }
            },
            None => None,
        };
        if let (Some(d), Some(r)) = (declared, requested) {
            if d != r {
                self.err("command", format!("config is for \"{}\" but \"{}\" was requested", d.name(), r.name()));
            }
        }
        let command = requested.or(declared)?;

        for c in Command::ALL {
            if c != command && root.contains_key(c.name()) {
                self.err(c.name(), format!("block is not used by command \"{}\"", command.name()));
            }
        }
        let blocks = [
            ("model", command.needs_model()),
            ("grid", command.needs_grid()),
            ("potential", command.needs_potential()),
        ];
        for (key, needed) in blocks {
            if !needed && root.contains_key(key) {
                self.err(key, format!("block is not used by command \"{}\"", command.name()));
            }
        }

        let model = if command.needs_model() {
            self.field(root, "", "model", true).and_then(|v| self.model(v, command))
        } else {
            None
        };
        let grid = if command.needs_grid() {
            self.field(root, "", "grid", true).and_then(|v| self.grid(v, command))
        } else {
            None
        };
        let potential = if command.needs_potential() {
            self.field(root, "", "potential", true).and_then(|v| self.potential(v))
        } else {
            None
        };
        if let (Some(Potential::Piecewise(segs)), Some(g)) = (&potential, &grid) {
            let (lo, hi) = (segs[0].start, segs[segs.len() - 1].end);
            if lo > g.x_min() || hi < g.x_max() {
                self.err("potential.segments", format!("segments cover [{lo}, {hi}) but the grid spans [{}, {}]", g.x_min(), g.x_max()));
            }
        }
        if command == Command::Scatter {
            if let Some(p) = &potential {
                match p.segments() {
                    Some(segs) if segs[0].start.is_infinite() && segs[segs.len() - 1].end.is_infinite() => {}
                    Some(_) => self.err("potential.segments", "first and last segments must be semi-infinite (null bounds)"),
                    None => self.err("potential.type", "scatter needs a piecewise, step or barrier potential"),
                }
            }
        }
        if command == Command::Wkb {
            if let Some(m) = &model {
                if m.variant() == Variant::Gradient && m.a() != 0.0 {
                    self.err("model.variant", "the semiclassical solution is defined for the gauge variant");
                }
            }
        }

        let block = match root.get(command.name()) {
            Some(b) => self.object(b, command.name()),
            None => {
                self.err(command.name(), "missing required field");
                None
            }
        }?;
        let params = self.command_params(command, block, grid.as_ref(), model.as_ref())?;
        Some(RunConfig {
            command,
            model,
            grid,
            potential,
            params,
        })
    }

    fn model(&mut self, v: &Value, command: Command) -> Option<ModelParams> {
        let o = self.object(v, "model")?;
        self.allow_keys(o, "model", &["m", "a", "variant"]);
        let m = self.positive(o, "model", "m", true);
        if command == Command::Density && o.contains_key("a") {
            self.err("model.a", "the density command takes its couplings from density.a_values");
        }
        let a = self.number(o, "model", "a", false).unwrap_or(0.0);
        let variant = match self.string(o, "model", "variant", true)? {
            "standard" => Variant::Standard,
            "gradient" => Variant::Gradient,
            "gauge" => Variant::Gauge,
            other => {
                self.err("model.variant", format!("expected standard, gradient or gauge, got \"{other}\""));
                return None;
            }
        };
        if a < 0.0 {
            self.err("model.a", format!("a = {a} is negative; the corrected norm would not be positive"));
            return None;
        }
        if variant == Variant::Standard && a != 0.0 {
            self.err("model.a", "the standard variant requires a = 0");
            return None;
        }
        ModelParams::new(m?, a, variant).ok()
    }

    fn grid(&mut self, v: &Value, command: Command) -> Option<Grid1D> {
        let o = self.object(v, "grid")?;
        self.allow_keys(o, "grid", &["x_min", "x_max", "n", "boundary"]);
        let x_min = self.number(o, "grid", "x_min", true);
        let x_max = self.number(o, "grid", "x_max", true);
        let n = self.integer(o, "grid", "n", true);
        let boundary = match self.string(o, "grid", "boundary", false).unwrap_or("dirichlet") {
            "dirichlet" => Boundary::Dirichlet,
            "periodic" => Boundary::Periodic,
            other => {
                self.err("grid.boundary", format!("expected dirichlet or periodic, got \"{other}\""));
                return None;
            }
        };
        if let Some(n) = n {
            if n < 3 {
                self.err("grid.n", format!("need at least 3 points, got {n}"));
            }
        }
        if let (Some(lo), Some(hi)) = (x_min, x_max) {
            if hi <= lo {
                self.err("grid.x_max", format!("must exceed x_min = {lo}"));
            }
        }
        if boundary == Boundary::Periodic && command != Command::Wkb {
            self.err("grid.boundary", format!("command \"{}\" needs a dirichlet grid", command.name()));
        }
        Grid1D::new(x_min?, x_max?, n?, boundary).ok()
    }

    fn potential(&mut self, v: &Value) -> Option<Potential> {
        let o = self.object(v, "potential")?;
        let p = "potential";
        let kind = self.string(o, p, "type", true)?;
        match kind {
            "constant" => {
                self.allow_keys(o, p, &["type", "value"]);
                Some(Potential::Constant(self.number(o, p, "value", true)?))
            }
            "harmonic" => {
                self.allow_keys(o, p, &["type", "spring", "center"]);
                let spring = self.number(o, p, "spring", true);
                let center = self.number(o, p, "center", false).unwrap_or(0.0);
                Some(Potential::harmonic(spring?, center))
            }
            "step" => {
                self.allow_keys(o, p, &["type", "at", "left", "right"]);
                let at = self.number(o, p, "at", false).unwrap_or(0.0);
                let left = self.number(o, p, "left", true);
                let right = self.number(o, p, "right", true);
                Some(Potential::step(at, left?, right?))
            }
            "barrier" => {
                self.allow_keys(o, p, &["type", "from", "to", "outside", "inside"]);
                let from = self.number(o, p, "from", true);
                let to = self.number(o, p, "to", true);
                let outside = self.number(o, p, "outside", false).unwrap_or(0.0);
                let inside = self.number(o, p, "inside", true);
                let (from, to) = (from?, to?);
                if to <= from {
                    self.err("potential.to", format!("must exceed from = {from}"));
                    return None;
                }
                Some(Potential::barrier(from, to, outside, inside?))
            }
            "piecewise" => {
                self.allow_keys(o, p, &["type", "segments"]);
                let arr = self.field(o, p, "segments", true)?;
                let Some(items) = arr.as_array() else {
                    self.err("potential.segments", "expected a list of segments");
                    return None;
                };
                let mut segs = Vec::new();
                let mut ok = true;
                for (i, item) in items.iter().enumerate() {
                    let sp = format!("potential.segments[{i}]");
                    match self.segment(item, &sp) {
                        Some(s) => segs.push(s),
                        None => ok = false,
                    }
                }
                if !ok {
                    return None;
                }
                if let Err(msg) = validate_segments(&segs) {
                    self.err("potential.segments", msg);
                    return None;
                }
                Some(Potential::Piecewise(segs))
            }
            other => {
                self.err(
                    "potential.type",
                    format!("expected constant, harmonic, step, barrier or piecewise, got \"{other}\""),
                );
                None
            }
        }
    }

    /// `{from, to, value}`; a null bound is infinite.
    fn segment(&mut self, v: &Value, path: &str) -> Option<Segment> {
        let o = self.object(v, path)?;
        self.allow_keys(o, path, &["from", "to", "value"]);
        let mut bound = |key: &str, inf: f64| -> Option<f64> {
            match o.get(key) {
                None => {
                    self.err(join(path, key), "missing required field (use null for an infinite bound)");
                    None
                }
                Some(Value::Null) => Some(inf),
                Some(x) => self.number_value(x, &join(path, key)),
            }
        };
        let from = bound("from", f64::NEG_INFINITY);
        let to = bound("to", f64::INFINITY);
        let value = self.number(o, path, "value", true);
        Some(Segment::new(from?, to?, value?))
    }

    fn command_params(
        &mut self,
        command: Command,
        o: &Map<String, Value>,
        grid: Option<&Grid1D>,
        model: Option<&ModelParams>,
    ) -> Option<CommandParams> {
        let p = command.name();
        match command {
            Command::Spectrum => {
                self.allow_keys(o, p, &["count"]);
                let count = self.integer(o, p, "count", true)?;
                if count == 0 {
                    self.err("spectrum.count", "must be at least 1");
                    return None;
                }
                if let Some(g) = grid {
                    if count > g.n() - 2 {
                        self.err("spectrum.count", format!("at most n - 2 = {} states exist", g.n() - 2));
                        return None;
                    }
                }
                Some(CommandParams::Spectrum { count })
            }
            Command::Density => {
                self.allow_keys(o, p, &["states", "a_values"]);
                let states = self.index_list(o, p, "states");
                let a_values = self.range(o, p, "a_values");
                if let Some(a) = &a_values {
                    for (i, x) in a.iter().enumerate() {
                        if *x < 0.0 {
                            self.err(format!("density.a_values[{i}]"), format!("a = {x} is negative"));
                        }
                    }
                    let standard = model.is_some_and(|m| m.variant() == Variant::Standard);
                    if standard && a.iter().any(|x| *x > 0.0) {
                        self.err("model.variant", "a > 0 needs the gradient or gauge variant");
                    }
                }
                let states = states?;
                if let Some(g) = grid {
                    if let Some(top) = states.iter().max() {
                        if *top + 1 > g.n() - 2 {
                            self.err("density.states", format!("state {top} needs more than n - 2 = {} unknowns", g.n() - 2));
                            return None;
                        }
                    }
                }
                Some(CommandParams::Density {
                    states,
                    a_values: a_values?,
                })
            }
            Command::Evolve => {
                self.allow_keys(o, p, &["packet", "dt", "steps", "stride", "margin"]);
                let packet = self.field(o, p, "packet", true).and_then(|v| {
                    let po = self.object(v, "evolve.packet")?;
                    let pp = "evolve.packet";
                    self.allow_keys(po, pp, &["x0", "sigma", "k0"]);
                    let x0 = self.number(po, pp, "x0", true);
                    let sigma = self.positive(po, pp, "sigma", true);
                    let k0 = self.number(po, pp, "k0", false).unwrap_or(0.0);
                    Some(Packet { x0: x0?, sigma: sigma?, k0 })
                });
                let dt = self.positive(o, p, "dt", true);
                let steps = self.integer(o, p, "steps", true);
                let stride = self.integer(o, p, "stride", false).unwrap_or(1);
                let margin = self.positive(o, p, "margin", false);
                if stride == 0 {
                    self.err("evolve.stride", "must be at least 1");
                    return None;
                }
                if let Some(s) = steps {
                    if s / stride < 2 {
                        self.err("evolve.steps", "need at least two strides so that three frames are stored");
                        return None;
                    }
                }
                Some(CommandParams::Evolve {
                    packet: packet?,
                    dt: dt?,
                    steps: steps?,
                    stride,
                    margin,
                })
            }
            Command::Scatter => {
                self.allow_keys(o, p, &["energies", "incidence"]);
                let energies = self.range(o, p, "energies");
                let incidence = match self.string(o, p, "incidence", false).unwrap_or("left") {
                    "left" => Incidence::Left,
                    "right" => Incidence::Right,
                    other => {
                        self.err("scatter.incidence", format!("expected left or right, got \"{other}\""));
                        return None;
                    }
                };
                Some(CommandParams::Scatter {
                    energies: energies?,
                    incidence,
                })
            }
            Command::Wkb => {
                self.allow_keys(o, p, &["energy", "reference", "threshold"]);
                let energy = self.number(o, p, "energy", true);
                let reference = self
                    .number(o, p, "reference", false)
                    .or_else(|| grid.map(|g| 0.5 * (g.x_min() + g.x_max())));
                let threshold = self.positive(o, p, "threshold", false).unwrap_or(DEFAULT_VALIDITY_THRESHOLD);
                Some(CommandParams::Wkb {
                    energy: energy?,
                    reference: reference?,
                    threshold,
                })
            }
            Command::Dispersion => {
                self.allow_keys(o, p, &["k"]);
                Some(CommandParams::Dispersion { ks: self.range(o, p, "k")? })
            }
            Command::Klein => {
                self.allow_keys(o, p, &["energy", "mass", "v0", "branches"]);
                let mass = self.positive(o, p, "mass", false).unwrap_or(1.0);
                let energy = self.number(o, p, "energy", true);
                let v0 = self.range(o, p, "v0");
                let branches = match o.get("branches") {
                    None => Some(vec![Branch::Naive, Branch::KleinPauli]),
                    Some(v) => self.branches(v),
                };
                let energy = energy?;
                if energy <= mass {
                    self.err("klein.energy", format!("total energy must exceed the mass {mass}"));
                    return None;
                }
                Some(CommandParams::Klein {
                    energy,
                    mass,
                    v0: v0?,
                    branches: branches?,
                })
            }
            Command::DiracCompare => {
                self.allow_keys(o, p, &["mass", "k"]);
                let mass = self.positive(o, p, "mass", false).unwrap_or(1.0);
                let ks = self.range(o, p, "k")?;
                for (i, k) in ks.iter().enumerate() {
                    if *k < 0.0 {
                        self.err(format!("dirac-compare.k[{i}]"), "wavenumbers must be non-negative");
                    }
                }
                Some(CommandParams::DiracCompare { mass, ks })
            }
        }
    }

    fn index_list(&mut self, o: &Map<String, Value>, path: &str, key: &str) -> Option<Vec<usize>> {
        let v = self.field(o, path, key, true)?;
        let p = join(path, key);
        let Some(items) = v.as_array() else {
            self.err(&p, "expected a list of state indices");
            return None;
        };
        if items.is_empty() {
            self.err(&p, "list must not be empty");
            return None;
        }
        let out: Vec<Option<usize>> = items
            .iter()
            .enumerate()
            .map(|(i, x)| match x.as_u64() {
                Some(u) => Some(u as usize),
                None => {
                    self.err(format!("{p}[{i}]"), "expected a non-negative integer");
                    None
                }
            })
            .collect();
        out.into_iter().collect()
    }

    fn branches(&mut self, v: &Value) -> Option<Vec<Branch>> {
        let Some(items) = v.as_array() else {
            self.err("klein.branches", "expected a list");
            return None;
        };
        let out: Vec<Option<Branch>> = items
            .iter()
            .enumerate()
            .map(|(i, x)| match x.as_str() {
                Some("naive") => Some(Branch::Naive),
                Some("klein-pauli") => Some(Branch::KleinPauli),
                _ => {
                    self.err(format!("klein.branches[{i}]"), "expected \"naive\" or \"klein-pauli\"");
                    None
                }
            })
            .collect();
        out.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paths(text: &str) -> Vec<String> {
        parse(text, None).unwrap_err().into_iter().map(|v| v.path).collect()
    }

    const SPECTRUM: &str = r#"{
        "command": "spectrum",
        "model": {"m": 1, "a": 0.1, "variant": "gradient"},
        "grid": {"x_min": -10, "x_max": 10, "n": 2000},
        "potential": {"type": "harmonic", "spring": 1},
        "spectrum": {"count": 6}
    }"#;

    #[test]
    fn accepts_valid_config() {
        let cfg = parse(SPECTRUM, None).unwrap();
        assert_eq!(cfg.command, Command::Spectrum);
        assert_eq!(cfg.params, CommandParams::Spectrum { count: 6 });
        assert_eq!(cfg.grid.unwrap().n(), 2000);
        assert!(parse(SPECTRUM, Some(Command::Spectrum)).is_ok());
    }

    #[test]
    fn negative_coupling_reported_at_model_a() {
        assert_eq!(paths(&SPECTRUM.replace("\"a\": 0.1", "\"a\": -0.1")), vec!["model.a"]);
    }

    #[test]
    fn missing_grid_n_reported() {
        assert_eq!(paths(&SPECTRUM.replace(", \"n\": 2000", "")), vec!["grid.n"]);
    }

    #[test]
    fn unknown_keys_and_mismatched_command() {
        let p = paths(&SPECTRUM.replace("\"count\": 6", "\"count\": 6, \"colour\": 1"));
        assert_eq!(p, vec!["spectrum.colour"]);
        let err = parse(SPECTRUM, Some(Command::Evolve)).unwrap_err();
        assert!(err.iter().any(|v| v.path == "command"));
    }

    #[test]
    fn overlapping_segments_reported() {
        let text = r#"{
            "command": "scatter",
            "model": {"m": 1, "a": 0.5, "variant": "gauge"},
            "potential": {"type": "piecewise", "segments": [
                {"from": null, "to": 1, "value": 0},
                {"from": 0.5, "to": null, "value": 1}
            ]},
            "scatter": {"energies": [0.5]}
        }"#;
        assert_eq!(paths(text), vec!["potential.segments"]);
    }

    #[test]
    fn collects_every_violation() {
        let text = r#"{
            "command": "evolve",
            "model": {"m": -1, "a": 0.1, "variant": "weird"},
            "grid": {"x_min": 1, "x_max": 0, "n": 2},
            "potential": {"type": "harmonic"},
            "evolve": {"packet": {"x0": 0}, "dt": 0, "steps": 10}
        }"#;
        let p = paths(text);
        for want in ["model.m", "model.variant", "grid.n", "grid.x_max", "potential.spring", "evolve.packet.sigma", "evolve.dt"] {
            assert!(p.iter().any(|x| x == want), "{want} missing from {p:?}");
        }
    }

    #[test]
    fn ranges() {
        let text = r#"{"command": "dirac-compare", "dirac-compare": {"k": {"start": 0.01, "stop": 0.1, "count": 3, "scale": "log"}}}"#;
        let cfg = parse(text, None).unwrap();
        let CommandParams::DiracCompare { ks, mass } = cfg.params else { panic!() };
        assert_eq!(mass, 1.0);
        assert!((ks[0] - 0.01).abs() < 1e-15 && (ks[2] - 0.1).abs() < 1e-15);
        assert!((ks[1] - (0.001f64).sqrt()).abs() < 1e-15);
    }
}
