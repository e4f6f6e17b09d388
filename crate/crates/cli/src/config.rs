//! Run configuration: strict JSON schema, defaults and invariant checks.
//!
//! Every error carries the JSON pointer of the offending value.

use nonholo::dynamics::IntegratorConfig;
use nonholo::momenta::validate_grid;
use nonholo::particle::ParticleState;
use nonholo::phase::{BodyParams, StateGM};
use nonholo::profile::ProfileSpec;
use nonholo::smallalg::Vec3;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Routh,
    Ellipsoid,
    Particle,
}

impl SystemKind {
    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Routh => "routh",
            SystemKind::Ellipsoid => "ellipsoid",
            SystemKind::Particle => "particle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum System {
    Routh { body: BodyParams<f64>, r: f64, l: f64 },
    Ellipsoid { body: BodyParams<f64>, b: f64, c: f64 },
    Particle,
}

impl System {
    pub fn kind(&self) -> SystemKind {
        match self {
            System::Routh { .. } => SystemKind::Routh,
            System::Ellipsoid { .. } => SystemKind::Ellipsoid,
            System::Particle => SystemKind::Particle,
        }
    }

    /// Body constants and profile, or `None` for the particle.
    pub fn solid(&self) -> Option<(BodyParams<f64>, ProfileSpec<f64>)> {
        match *self {
            System::Routh { body, r, l } => Some((body, ProfileSpec::Routh { r, l })),
            System::Ellipsoid { body, b, c } => Some((body, ProfileSpec::Ellipsoid { b, c })),
            System::Particle => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Initial {
    Solid(StateGM<f64>),
    Particle(ParticleState<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_true")]
    pub renormalize_gamma: bool,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        Self {
            dt: default_dt(),
            t_final: default_t_final(),
            renormalize_gamma: true,
        }
    }
}

impl IntegratorSection {
    pub fn to_config(&self) -> IntegratorConfig<f64> {
        IntegratorConfig {
            dt: self.dt,
            t_final: self.t_final,
            method: Default::default(),
            renormalize_gamma: self.renormalize_gamma,
        }
    }
}

/// Grid for the tabulated momenta.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentaSection {
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_h")]
    pub h: f64,
}

impl Default for MomentaSection {
    fn default() -> Self {
        Self {
            delta: default_delta(),
            h: default_h(),
        }
    }
}

fn default_dt() -> f64 {
    1e-3
}
fn default_t_final() -> f64 {
    10.0
}
fn default_true() -> bool {
    true
}
fn default_delta() -> f64 {
    1e-3
}
fn default_h() -> f64 {
    1e-4
}
fn default_samples() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub system: System,
    pub initial: Initial,
    pub integrator: IntegratorSection,
    pub seed: u64,
    pub samples: usize,
    pub momenta: MomentaSection,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("config error at {}: {message}", display_pointer(pointer))]
pub struct ConfigError {
    /// JSON pointer; empty for the document root.
    pub pointer: String,
    pub message: String,
}

fn display_pointer(p: &str) -> &str {
    if p.is_empty() {
        "document root"
    } else {
        p
    }
}

impl ConfigError {
    fn at(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

// on-disk layout; `params` and `initial` depend on `system` and are decoded
// in a second pass
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    system: SystemKind,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    params: Value,
    initial: Value,
    #[serde(default)]
    integrator: IntegratorSection,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_samples")]
    samples: usize,
    #[serde(default)]
    momenta: MomentaSection,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouthParams {
    m: f64,
    #[serde(rename = "I1")]
    i1: f64,
    #[serde(rename = "I3")]
    i3: f64,
    grav: f64,
    r: f64,
    l: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EllipsoidParams {
    m: f64,
    #[serde(rename = "I1")]
    i1: f64,
    #[serde(rename = "I3")]
    i3: f64,
    grav: f64,
    b: f64,
    c: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParticleParams {}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolidInitial {
    gamma: [f64; 3],
    #[serde(rename = "M")]
    m: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParticleInitial {
    x: f64,
    y: f64,
    z: f64,
    px: f64,
    py: f64,
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        let part = match seg {
            Segment::Seq { index } => index.to_string(),
            Segment::Map { key } => escape(key),
            Segment::Enum { variant } => escape(variant),
            // e.g. a syntax error: report the deepest known ancestor
            Segment::Unknown => break,
        };
        out.push('/');
        out.push_str(&part);
    }
    out
}

/// serde reports a missing field at its parent; point at the field itself.
fn schema_error(prefix: &str, path: &serde_path_to_error::Path, message: String) -> ConfigError {
    let mut pointer = format!("{prefix}{}", pointer_of(path));
    if let Some(rest) = message.strip_prefix("missing field `") {
        if let Some(end) = rest.find('`') {
            pointer.push('/');
            pointer.push_str(&escape(&rest[..end]));
        }
    }
    ConfigError::at(pointer, message)
}

fn decode<T: DeserializeOwned>(prefix: &str, value: Value) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().clone();
        schema_error(prefix, &path, e.into_inner().to_string())
    })
}

fn body(m: f64, i1: f64, i3: f64, grav: f64) -> Result<BodyParams<f64>, ConfigError> {
    BodyParams::new(m, i1, i3, grav).map_err(|e| {
        let field = [("m", m > 0.0), ("I1", i1 > 0.0), ("I3", i3 > 0.0), ("grav", grav >= 0.0)]
            .iter()
            .find(|(_, ok)| !ok)
            .map_or("", |(k, _)| *k);
        ConfigError::at(format!("/params/{field}").trim_end_matches('/'), e.to_string())
    })
}

fn finite(pointer: &str, values: &[f64]) -> Result<(), ConfigError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ConfigError::at(pointer, "values must be finite"))
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().clone();
        schema_error("", &path, e.into_inner().to_string())
    })?;

    let system = match doc.system {
        SystemKind::Routh => {
            if doc.params.is_null() {
                return Err(ConfigError::at("/params", "missing field `params`"));
            }
            let p: RouthParams = decode("/params", doc.params)?;
            let body = body(p.m, p.i1, p.i3, p.grav)?;
            ProfileSpec::routh(p.r, p.l).map_err(|e| {
                let field = if p.r > 0.0 && p.r.is_finite() { "/params/l" } else { "/params/r" };
                ConfigError::at(field, e.to_string())
            })?;
            System::Routh { body, r: p.r, l: p.l }
        }
        SystemKind::Ellipsoid => {
            if doc.params.is_null() {
                return Err(ConfigError::at("/params", "missing field `params`"));
            }
            let p: EllipsoidParams = decode("/params", doc.params)?;
            let body = body(p.m, p.i1, p.i3, p.grav)?;
            ProfileSpec::ellipsoid(p.b, p.c).map_err(|e| {
                let field = if p.b > 0.0 && p.b.is_finite() { "/params/c" } else { "/params/b" };
                ConfigError::at(field, e.to_string())
            })?;
            System::Ellipsoid { body, b: p.b, c: p.c }
        }
        SystemKind::Particle => {
            if !doc.params.is_null() {
                let _: ParticleParams = decode("/params", doc.params)?;
            }
            System::Particle
        }
    };

    let initial = match system {
        System::Particle => {
            let p: ParticleInitial = decode("/initial", doc.initial)?;
            finite("/initial", &[p.x, p.y, p.z, p.px, p.py])?;
            Initial::Particle(ParticleState::new(p.x, p.y, p.z, p.px, p.py))
        }
        _ => {
            let s: SolidInitial = decode("/initial", doc.initial)?;
            finite("/initial/gamma", &s.gamma)?;
            finite("/initial/M", &s.m)?;
            let st = StateGM::new(Vec3::from_array(s.gamma), Vec3::from_array(s.m))
                .map_err(|e| ConfigError::at("/initial/gamma", e.to_string()))?;
            Initial::Solid(st)
        }
    };

    let it = doc.integrator;
    IntegratorConfig::new(it.dt, it.t_final).map_err(|e| {
        let field = if it.dt > 0.0 && it.dt.is_finite() { "/integrator/t_final" } else { "/integrator/dt" };
        ConfigError::at(field, e.to_string())
    })?;
    if doc.samples == 0 {
        return Err(ConfigError::at("/samples", "at least one sample is required"));
    }
    let mo = doc.momenta;
    validate_grid(mo.delta, mo.h).map_err(|e| {
        let field = if (1e-6..=0.1).contains(&mo.delta) { "/momenta/h" } else { "/momenta/delta" };
        ConfigError::at(field, e.to_string())
    })?;

    Ok(RunConfig {
        system,
        initial,
        integrator: it,
        seed: doc.seed,
        samples: doc.samples,
        momenta: mo,
    })
}

fn to_value<T: Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("plain data serialises")
}

impl RunConfig {
    fn document(&self) -> Document {
        let params = match self.system {
            System::Routh { body, r, l } => to_value(RouthParams {
                m: body.m,
                i1: body.i1,
                i3: body.i3,
                grav: body.grav,
                r,
                l,
            }),
            System::Ellipsoid { body, b, c } => to_value(EllipsoidParams {
                m: body.m,
                i1: body.i1,
                i3: body.i3,
                grav: body.grav,
                b,
                c,
            }),
            System::Particle => Value::Null,
        };
        let initial = match self.initial {
            Initial::Solid(st) => to_value(SolidInitial {
                gamma: st.gamma.to_array(),
                m: st.momentum.to_array(),
            }),
            Initial::Particle(p) => to_value(ParticleInitial {
                x: p.x,
                y: p.y,
                z: p.z,
                px: p.px,
                py: p.py,
            }),
        };
        Document {
            system: self.system.kind(),
            params,
            initial,
            integrator: self.integrator,
            seed: self.seed,
            samples: self.samples,
            momenta: self.momenta,
        }
    }

    /// Pretty JSON that [`parse_config`] reads back to an equal config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.document()).expect("config is always serialisable")
    }

    /// Replaces the seed with the value of `NONHOLO_SEED`, if given.
    pub fn with_seed_override(mut self, env: Option<&str>) -> Result<Self, ConfigError> {
        if let Some(raw) = env {
            self.seed = raw
                .trim()
                .parse()
                .map_err(|_| ConfigError::at("/seed", format!("NONHOLO_SEED must be an unsigned integer, got {raw:?}")))?;
        }
        Ok(self)
    }
}
