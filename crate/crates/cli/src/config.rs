//! Experiment configuration: TOML on disk, `--set` overrides, and the
//! content hash stamped into every artifact.

use std::collections::BTreeMap;
use std::path::Path;

use anomalykit::cascade::{BoundaryKind, DataFamily, DEFAULT_LADDER};
use anomalykit::expr::Expr;
use anomalykit::forward::{ModelParams, NewtonOptions, State};
use anomalykit::geometry::{corner_from_polygon, Grid, Inclusion, Rect, TruncatedCorner};
use anomalykit::inversion::{Candidate, NoiseSpec};
use anomalykit::reaction::{CoefficientField, PiecewiseReaction, TaylorReaction, TimeProfile};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_output")]
    pub output_dir: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub reaction: ReactionConfig,
    pub inclusion: Inclusion,
    #[serde(default)]
    pub solver: NewtonOptions,
    pub forward: Option<ForwardConfig>,
    pub linearize: Option<LinearizeConfig>,
    pub probe: Option<ProbeConfig>,
    pub invert: Option<InvertConfig>,
}

fn default_output() -> String {
    "anomalykit-out".into()
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    /// `[x0, x1, y0, y1]`.
    #[serde(default = "unit_bounds")]
    pub bounds: [f64; 4],
}

fn unit_bounds() -> [f64; 4] {
    [0.0, 1.0, 0.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub d: Vec<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
    /// `cross[i][j]`; zero when absent.
    pub cross: Option<Vec<Vec<f64>>>,
    /// `chi[i][j]` in `{0, 1}`; zero when absent.
    pub chi: Option<Vec<Vec<u8>>>,
    pub t_final: f64,
}

/// A coefficient given as a number, an expression in `x1, x2`, or an
/// expression with a piecewise-linear time profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientValue {
    Number(f64),
    Expression(String),
    Field {
        spatial: String,
        #[serde(default)]
        time: Vec<(f64, f64)>,
    },
}

/// `component name → multi-index → value`, e.g. `u1 → u1u1 → 0.5`.
pub type CoefficientTable = BTreeMap<String, BTreeMap<String, CoefficientValue>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionConfig {
    pub base: Vec<f64>,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub interior: CoefficientTable,
    #[serde(default)]
    pub exterior: CoefficientTable,
}

fn default_order() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardMode {
    Parabolic,
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardConfig {
    pub mode: ForwardMode,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_store")]
    pub store_every: usize,
    /// Initial fields (stationary: Dirichlet data), one expression per species.
    pub initial_u: Vec<String>,
    #[serde(default)]
    pub initial_v: Vec<String>,
}

fn default_dt() -> f64 {
    0.01
}

fn default_store() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearizeConfig {
    pub mode: ForwardMode,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub boundary: BoundaryKind,
    #[serde(default = "default_ladder")]
    pub eps: Vec<f64>,
    pub f1: Vec<String>,
    #[serde(default)]
    pub f2: Vec<String>,
    #[serde(default)]
    pub g1: Vec<String>,
    #[serde(default)]
    pub g2: Vec<String>,
}

fn default_ladder() -> Vec<f64> {
    DEFAULT_LADDER.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CornerConfig {
    Sector {
        apex: [f64; 2],
        axis_angle: f64,
        half_angle: f64,
        radius: f64,
    },
    Edges {
        apex: Vec<f64>,
        edges: Vec<Vec<f64>>,
        radius: f64,
    },
    /// Vertex of the configured polygon inclusion.
    PolygonVertex { vertex: usize, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub taus: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub corners: Vec<CornerConfig>,
}

fn default_alpha() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertConfig {
    pub candidate: Candidate,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_solves")]
    pub max_solves: usize,
    #[serde(default = "default_step")]
    pub step: f64,
    pub initial: Option<Vec<f64>>,
    pub noise: Option<NoiseSpec>,
    pub coefficient: Option<CoefficientRecoveryConfig>,
}

fn default_restarts() -> usize {
    3
}

fn default_solves() -> usize {
    300
}

fn default_step() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientRecoveryConfig {
    /// Chemical name such as `u1`.
    pub component: String,
    pub multi_index: String,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Time step of the cascade; defaults to `4h²`.
    pub dt: Option<f64>,
}

fn default_samples() -> usize {
    32
}

/// Reads `path`, applies `key=value` overrides and validates the result.
pub fn load(path: &Path, sets: &[String]) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, sets)
}

pub fn parse(text: &str, sets: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut value: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(format!("bad TOML: {}", e.message())))?;
    for s in sets {
        apply_set(&mut value, s)?;
    }
    let cfg: ExperimentConfig = toml::Value::Table(value)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    Ok(cfg)
}

/// `a.b.c=value`: the value is read as TOML when it parses, as a string
/// otherwise. Missing tables are created.
pub fn apply_set(root: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got {assignment:?}")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("bad --set key {key:?}")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("nonempty key");
    let mut table = root;
    for p in parents {
        let entry = table
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set {key}: {p} is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

impl ExperimentConfig {
    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        crate::artifacts::hex_digest(json.as_bytes())
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let [x0, x1, y0, y1] = self.grid.bounds;
        Ok(Grid::new(self.grid.nx, self.grid.ny, Rect::new(x0, x1, y0, y1))?)
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let m = &self.model;
        let mut p = ModelParams::uncoupled(m.d.clone(), m.delta.clone(), m.t_final);
        if let Some(c) = &m.cross {
            p.cross = c.clone();
        }
        if let Some(c) = &m.chi {
            p.chi = c.clone();
        }
        p.validate()?;
        Ok(p)
    }

    pub fn reaction(&self) -> Result<PiecewiseReaction, CliError> {
        let r = &self.reaction;
        let n_prey = self.model.delta.len();
        let branch = |table: &CoefficientTable, side: &str| -> Result<TaylorReaction, CliError> {
            let mut t = TaylorReaction::new(r.base.clone(), n_prey, r.order)?;
            for (comp, terms) in table {
                let i = chemical_index(comp, r.base.len())
                    .map_err(|m| CliError::Config(format!("reaction.{side}.{comp}: {m}")))?;
                for (mi, v) in terms {
                    let key = format!("reaction.{side}.{comp}.{mi}");
                    let field = v.to_field().map_err(|e| CliError::Config(format!("{key}: {e}")))?;
                    let mi = mi.parse().map_err(|e| CliError::Config(format!("{key}: {e}")))?;
                    t.set(i, mi, field).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
                }
            }
            Ok(t)
        };
        let interior = branch(&r.interior, "interior")?;
        let exterior = branch(&r.exterior, "exterior")?;
        Ok(PiecewiseReaction::new(interior, exterior, self.inclusion.clone())?)
    }

    pub fn forward(&self) -> Result<&ForwardConfig, CliError> {
        self.forward.as_ref().ok_or_else(|| missing("forward"))
    }

    pub fn linearize(&self) -> Result<&LinearizeConfig, CliError> {
        self.linearize.as_ref().ok_or_else(|| missing("linearize"))
    }

    pub fn probe(&self) -> Result<&ProbeConfig, CliError> {
        self.probe.as_ref().ok_or_else(|| missing("probe"))
    }

    pub fn invert(&self) -> Result<&InvertConfig, CliError> {
        self.invert.as_ref().ok_or_else(|| missing("invert"))
    }

    pub fn initial_state(&self, grid: &Grid) -> Result<State, CliError> {
        let f = self.forward()?;
        let nc = self.model.d.len();
        let np = self.model.delta.len();
        Ok(State {
            u: sample_all(grid, &f.initial_u, nc, "forward.initial_u", false)?,
            v: sample_all(grid, &f.initial_v, np, "forward.initial_v", true)?,
            t: 0.0,
        })
    }

    pub fn data_family(&self, grid: &Grid) -> Result<DataFamily, CliError> {
        let l = self.linearize()?;
        let nc = self.model.d.len();
        let np = self.model.delta.len();
        Ok(DataFamily {
            base: self.reaction.base.clone(),
            f1: sample_all(grid, &l.f1, nc, "linearize.f1", false)?,
            f2: sample_all(grid, &l.f2, nc, "linearize.f2", true)?,
            g1: sample_all(grid, &l.g1, np, "linearize.g1", true)?,
            g2: sample_all(grid, &l.g2, np, "linearize.g2", true)?,
            eps: l.eps.clone(),
        })
    }

    pub fn corners(&self) -> Result<Vec<TruncatedCorner>, CliError> {
        self.probe()?
            .corners
            .iter()
            .map(|c| {
                Ok(match c {
                    CornerConfig::Sector {
                        apex,
                        axis_angle,
                        half_angle,
                        radius,
                    } => TruncatedCorner::sector(*apex, *axis_angle, *half_angle, *radius)?,
                    CornerConfig::Edges { apex, edges, radius } => {
                        TruncatedCorner::from_edges(apex.clone(), edges.clone(), *radius)?
                    }
                    CornerConfig::PolygonVertex { vertex, radius } => {
                        corner_from_polygon(&self.inclusion, *vertex, *radius)?
                    }
                })
            })
            .collect()
    }
}

fn missing(section: &str) -> CliError {
    CliError::Config(format!("missing section `{section}`"))
}

/// `u3` → 2.
pub fn chemical_index(name: &str, n_chem: usize) -> Result<usize, String> {
    let i: usize = name
        .strip_prefix('u')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("expected a chemical name like u1, got {name:?}"))?;
    if i == 0 || i > n_chem {
        return Err(format!("{name} outside u1..u{n_chem}"));
    }
    Ok(i - 1)
}

impl CoefficientValue {
    fn to_field(&self) -> anomalykit::Result<CoefficientField> {
        Ok(match self {
            CoefficientValue::Number(c) => CoefficientField::constant(*c),
            CoefficientValue::Expression(s) => CoefficientField::new(Expr::parse(s)?, TimeProfile::constant()),
            CoefficientValue::Field { spatial, time } => {
                CoefficientField::new(Expr::parse(spatial)?, TimeProfile::new(time.clone())?)
            }
        })
    }
}

/// One grid field per expression; an empty list gives zeros when allowed.
fn sample_all(grid: &Grid, exprs: &[String], count: usize, key: &str, zero_ok: bool) -> Result<Vec<Vec<f64>>, CliError> {
    if exprs.is_empty() && zero_ok {
        return Ok(vec![vec![0.0; grid.len()]; count]);
    }
    if exprs.len() != count {
        return Err(CliError::Config(format!("{key}: expected {count} expressions, got {}", exprs.len())));
    }
    exprs
        .iter()
        .map(|s| {
            let e = Expr::parse(s).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
            Ok(grid.sample(|x| e.eval(x)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [grid]
        nx = 16
        ny = 16
        [model]
        d = [0.1]
        t_final = 0.1
        [reaction]
        base = [0.0]
        [reaction.interior.u1]
        u1u1 = 1.0
        [reaction.exterior.u1]
        u1u1 = "0.5 + 0*x1"
        [inclusion]
        kind = "circle"
        center = [0.5, 0.5]
        radius = 0.2
    "#;

    #[test]
    fn parses_and_builds() {
        let c = parse(MINIMAL, &[]).unwrap();
        assert_eq!(c.output_dir, "anomalykit-out");
        let r = c.reaction().unwrap();
        assert_eq!(r.n_chem(), 1);
        assert!(c.forward().is_err());
    }

    #[test]
    fn overrides() {
        let c = parse(
            MINIMAL,
            &[
                "grid.nx=20".into(),
                "reaction.interior.u1.u1u1=0.25".into(),
                "inclusion.radius = 0.1".into(),
                "output_dir=some/where".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.grid.nx, 20);
        assert_eq!(c.reaction.interior["u1"]["u1u1"], CoefficientValue::Number(0.25));
        assert_eq!(c.output_dir, "some/where");
        assert!(matches!(c.inclusion, Inclusion::Circle { radius, .. } if radius == 0.1));
        assert!(parse(MINIMAL, &["grid.nx".into()]).is_err());
        assert!(parse(MINIMAL, &["grid.nx.deep=1".into()]).is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse(MINIMAL, &[]).unwrap();
        let b = parse(MINIMAL, &[]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = parse(MINIMAL, &["seed=2".into()]).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn round_trips_through_toml() {
        let a = parse(MINIMAL, &[]).unwrap();
        let text = toml::to_string(&a).unwrap();
        assert_eq!(parse(&text, &[]).unwrap(), a);
    }

    #[test]
    fn missing_reaction_names_the_key() {
        let text = MINIMAL.replace("[reaction]\n        base = [0.0]", "");
        let err = parse(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("base"), "{err}");
        let text = MINIMAL.split("[reaction]").next().unwrap().to_string()
            + "[inclusion]\nkind = \"circle\"\ncenter = [0.5, 0.5]\nradius = 0.2\n";
        let err = parse(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("reaction"), "{err}");
    }

    #[test]
    fn bad_component_names() {
        assert_eq!(chemical_index("u2", 2), Ok(1));
        assert!(chemical_index("u3", 2).is_err());
        assert!(chemical_index("v1", 2).is_err());
        let c = parse(MINIMAL, &["reaction.interior.u2.u1u1=1".into()]).unwrap();
        assert!(c.reaction().unwrap_err().to_string().contains("reaction.interior.u2"));
    }
}
