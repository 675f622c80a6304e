//! The TOML run configuration.
//!
//! ```toml
//! [map]
//! preset = "doubling"            # or a list of [[map.branches]]
//!
//! [potential]
//! kind = "bernoulli"
//! probs = [0.25, 0.75]
//!
//! [command]
//! name = "spectrum"
//! tol = 1e-10
//! a_range = [-6.0, 6.0]
//! alpha_range = [0.45, 1.95]
//! alpha_count = 50
//!
//! [output]
//! dir = "out/bernoulli"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::induced::BaseChoice;
use crate::maps::{build_map, presets, BranchSpec, Family, MapSpec, MarkovMap};
use crate::pressure::normalize_potential;
use crate::symbolic::Potential;
use crate::weak_gibbs::KnLaw;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapConfig,
    pub potential: PotentialConfig,
    pub command: CommandConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    /// One of `doubling`, `slopes_2_4`, `golden_mean`, `manneville_pomeau`,
    /// `farey`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Exponent of the `manneville_pomeau` preset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches: Option<Vec<BranchConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<Vec<u8>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_period: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    Linear,
    MannevillePomeau,
    FareyLeft,
    FareyRight,
    PowerInterpolated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchConfig {
    pub family: FamilyName,
    pub domain: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKindName {
    /// `log p_i` on first-level cylinders.
    Bernoulli,
    /// The same value on every first-level cylinder.
    Constant,
    /// Locally constant with a table indexed by the base-`p` word code.
    Table,
    /// `coefficient * log|T'|`.
    Geometric,
    /// `intercept + slope * x` per branch.
    Affine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub kind: PotentialKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficient: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<Vec<[f64; 2]>>,
    /// Subtract the pressure before use. Defaults to `true`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kn: Option<KnLaw>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Pressure,
    Bcurve,
    Spectrum,
    Endpoints,
    Blockopt,
    Localdim,
    Induce,
    Validate,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Pressure => "pressure",
            CommandName::Bcurve => "bcurve",
            CommandName::Spectrum => "spectrum",
            CommandName::Endpoints => "endpoints",
            CommandName::Blockopt => "blockopt",
            CommandName::Localdim => "localdim",
            CommandName::Induce => "induce",
            CommandName::Validate => "validate",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let all = [
            CommandName::Pressure,
            CommandName::Bcurve,
            CommandName::Spectrum,
            CommandName::Endpoints,
            CommandName::Blockopt,
            CommandName::Localdim,
            CommandName::Induce,
            CommandName::Validate,
        ];
        all.into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// Parameters of the command. Each command reads the fields it needs and
/// falls back to the defaults listed on the accessors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandConfig {
    pub name: CommandName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub execution: Option<Execution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    /// File stem of the CSV artifact; defaults to the command name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
    /// Digits after the decimal point in scientific notation.
    #[serde(default = "default_precision")]
    pub precision: usize,
}

fn default_dir() -> String {
    "out".into()
}

fn default_precision() -> usize {
    16
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_dir(), stem: None, precision: default_precision() }
    }
}

fn need<T: Clone>(v: &Option<T>, what: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("missing `{what}`")))
}

fn check(ok: bool, msg: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg.into()))
    }
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Range checks that need no map. Structural problems with the map
    /// itself are reported when it is built.
    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        self.potential.validate()?;
        self.command.validate()?;
        check(self.output.precision >= 1 && self.output.precision <= 16, "output.precision must be in 1..=16")?;
        check(!self.output.dir.is_empty(), "output.dir must not be empty")?;
        if let Some(stem) = &self.output.stem {
            check(
                !stem.is_empty() && stem.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.'),
                "output.stem may only use letters, digits, `_`, `-` and `.`",
            )?;
        }
        Ok(())
    }

    pub fn stem(&self) -> String {
        self.output.stem.clone().unwrap_or_else(|| self.command.name.as_str().to_string())
    }
}

impl MapConfig {
    fn validate(&self) -> Result<()> {
        check(self.preset.is_some() != self.branches.is_some(), "map needs exactly one of `preset` or `branches`")?;
        if let Some(s) = self.s {
            check(s.is_finite() && s > 0.0 && s < 1.0, "map.s must be in (0, 1)")?;
        }
        if let Some(p) = &self.preset {
            const NAMES: [&str; 5] = ["doubling", "slopes_2_4", "golden_mean", "manneville_pomeau", "farey"];
            check(NAMES.contains(&p.as_str()), format!("unknown map preset `{p}`"))?;
            check((p == "manneville_pomeau") == self.s.is_some(), "map.s is required by, and only by, the manneville_pomeau preset")?;
        }
        if let Some(bs) = &self.branches {
            check(!bs.is_empty() && bs.len() <= 64, "map.branches must have between 1 and 64 entries")?;
            check(self.s.is_none(), "map.s only applies to presets; set `s` on the branches")?;
            for b in bs {
                b.validate()?;
            }
        }
        if let Some(m) = self.max_period {
            check((1..=12).contains(&m), "map.max_period must be in 1..=12")?;
        }
        if let Some(t) = &self.transition {
            check(t.iter().flatten().all(|&x| x <= 1), "map.transition entries must be 0 or 1")?;
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<MapSpec> {
        let mut spec = match (&self.preset, &self.branches) {
            (Some(p), None) => match p.as_str() {
                "doubling" => presets::doubling(),
                "slopes_2_4" => presets::slopes_2_4(),
                "golden_mean" => presets::golden_mean(),
                "manneville_pomeau" => presets::manneville_pomeau(need(&self.s, "map.s")?),
                "farey" => presets::farey(),
                other => return Err(Error::Config(format!("unknown map preset `{other}`"))),
            },
            (None, Some(bs)) => MapSpec::new(bs.iter().map(BranchConfig::spec).collect::<Result<_>>()?),
            _ => return Err(Error::Config("map needs exactly one of `preset` or `branches`".into())),
        };
        if let Some(t) = &self.transition {
            spec.transition = Some(t.clone());
        }
        if let Some(m) = self.max_period {
            spec.max_period = m;
        }
        Ok(spec)
    }

    pub fn build(&self) -> Result<MarkovMap> {
        build_map(&self.spec()?)
    }
}

impl BranchConfig {
    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.domain;
        check(finite(&[lo, hi]) && 0.0 <= lo && lo < hi && hi <= 1.0, "branch domain must satisfy 0 <= lo < hi <= 1")?;
        let allowed: &[&str] = match self.family {
            FamilyName::Linear => &["slope", "offset"],
            FamilyName::MannevillePomeau => &["s"],
            FamilyName::PowerInterpolated => &["s", "c"],
            FamilyName::FareyLeft | FamilyName::FareyRight => &[],
        };
        let given = [("slope", self.slope), ("offset", self.offset), ("s", self.s), ("c", self.c)];
        for (name, v) in given {
            match v {
                Some(x) => {
                    check(allowed.contains(&name), format!("`{name}` does not apply to the {:?} family", self.family))?;
                    check(x.is_finite(), format!("branch `{name}` must be finite"))?;
                }
                None => check(!allowed.contains(&name), format!("the {:?} family needs `{name}`", self.family))?,
            }
        }
        if let Some(s) = self.s {
            check(s > 0.0 && s < 1.0, "branch `s` must be in (0, 1)")?;
        }
        if let Some(c) = self.c {
            check(c > 0.0, "branch `c` must be positive")?;
        }
        if let Some(slope) = self.slope {
            check(slope != 0.0, "branch slope must be nonzero")?;
        }
        Ok(())
    }

    fn spec(&self) -> Result<BranchSpec> {
        let family = match self.family {
            FamilyName::Linear => Family::Linear { slope: need(&self.slope, "slope")?, offset: need(&self.offset, "offset")? },
            FamilyName::MannevillePomeau => Family::MannevillePomeau { s: need(&self.s, "s")? },
            FamilyName::FareyLeft => Family::FareyLeft,
            FamilyName::FareyRight => Family::FareyRight,
            FamilyName::PowerInterpolated => Family::PowerInterpolated { c: need(&self.c, "c")?, s: need(&self.s, "s")? },
        };
        Ok(BranchSpec::new(family, self.domain[0], self.domain[1]))
    }
}

impl PotentialConfig {
    fn validate(&self) -> Result<()> {
        use PotentialKindName::*;
        let fields = [
            ("probs", self.probs.is_some(), self.kind == Bernoulli),
            ("value", self.value.is_some(), self.kind == Constant),
            ("depth", self.depth.is_some(), self.kind == Table),
            ("table", self.table.is_some(), self.kind == Table),
            ("coefficient", self.coefficient.is_some(), self.kind == Geometric),
            ("pieces", self.pieces.is_some(), self.kind == Affine),
        ];
        for (name, given, wanted) in fields {
            check(given == wanted, format!("potential kind {:?} {} `{name}`", self.kind, if wanted { "needs" } else { "does not take" }))?;
        }
        if let Some(p) = &self.probs {
            check(!p.is_empty() && p.iter().all(|x| x.is_finite() && *x > 0.0 && *x <= 1.0), "potential.probs must lie in (0, 1]")?;
        }
        if let Some(v) = self.value {
            check(v.is_finite(), "potential.value must be finite")?;
        }
        if let Some(d) = self.depth {
            check((1..=12).contains(&d), "potential.depth must be in 1..=12")?;
        }
        if let Some(t) = &self.table {
            check(!t.is_empty() && finite(t), "potential.table must be nonempty and finite")?;
        }
        if let Some(c) = self.coefficient {
            check(c.is_finite(), "potential.coefficient must be finite")?;
        }
        if let Some(p) = &self.pieces {
            check(!p.is_empty() && p.iter().all(|q| finite(q)), "potential.pieces must be nonempty and finite")?;
        }
        if let Some(KnLaw::Declared { c, gamma }) = self.kn {
            check(c.is_finite() && c >= 0.0, "potential.kn.c must be >= 0")?;
            check(gamma.is_finite() && gamma > 0.0, "potential.kn.gamma must be > 0")?;
        }
        Ok(())
    }

    pub fn raw(&self, map: &MarkovMap) -> Result<Potential> {
        let p = match self.kind {
            PotentialKindName::Bernoulli => Potential::bernoulli(&need(&self.probs, "potential.probs")?),
            PotentialKindName::Constant => Potential::constant(map.num_symbols(), need(&self.value, "potential.value")?),
            PotentialKindName::Table => Potential::locally_constant(need(&self.depth, "potential.depth")?, need(&self.table, "potential.table")?),
            PotentialKindName::Geometric => Potential::geometric(need(&self.coefficient, "potential.coefficient")?),
            PotentialKindName::Affine => Potential::affine(need(&self.pieces, "potential.pieces")?),
        };
        p.validate(map)?;
        Ok(p)
    }

    pub fn normalize(&self) -> bool {
        self.normalize.unwrap_or(true)
    }

    /// The potential used by the command: normalized unless disabled.
    pub fn build(&self, map: &MarkovMap, tol: f64) -> Result<Potential> {
        let raw = self.raw(map)?;
        if self.normalize() {
            normalize_potential(map, &raw, tol)
        } else {
            Ok(raw)
        }
    }

    pub fn kn_law(&self) -> KnLaw {
        self.kn.unwrap_or(KnLaw::Exact)
    }
}

impl CommandConfig {
    fn validate(&self) -> Result<()> {
        if let Some(l) = self.level {
            check((1..=40).contains(&l), "command.level must be in 1..=40")?;
        }
        if let Some(ls) = &self.levels {
            check(!ls.is_empty() && ls.iter().all(|l| (1..=40).contains(l)), "command.levels must be nonempty with entries in 1..=40")?;
        }
        if let Some(t) = self.tol {
            check(t.is_finite() && t > 0.0 && t < 1.0, "command.tol must be in (0, 1)")?;
        }
        if let Some([lo, hi]) = self.a_range {
            check(finite(&[lo, hi]) && lo < hi, "command.a_range must be finite with lo < hi")?;
        }
        if let Some(g) = self.grid_points {
            check((3..=10_001).contains(&g), "command.grid_points must be in 3..=10001")?;
        }
        if let Some(a) = &self.a_grid {
            check(!a.is_empty() && a.len() <= 100_000 && finite(a), "command.a_grid must be nonempty and finite")?;
        }
        if let Some(al) = &self.alphas {
            check(!al.is_empty() && al.iter().all(|x| x.is_finite() && *x > 0.0), "command.alphas must be positive and finite")?;
        }
        check(
            !(self.alphas.is_some() && (self.alpha_range.is_some() || self.alpha_count.is_some())),
            "give either command.alphas or command.alpha_range with alpha_count",
        )?;
        check(self.alpha_range.is_some() == self.alpha_count.is_some(), "command.alpha_range and alpha_count go together")?;
        if let Some([lo, hi]) = self.alpha_range {
            check(finite(&[lo, hi]) && 0.0 < lo && lo <= hi, "command.alpha_range must satisfy 0 < lo <= hi")?;
        }
        if let Some(c) = self.alpha_count {
            check((1..=100_000).contains(&c), "command.alpha_count must be in 1..=100000")?;
        }
        if let Some(e) = self.eps {
            check(e.is_finite() && e > 0.0 && e < 10.0, "command.eps must be in (0, 10)")?;
        }
        if let Some(c) = self.count {
            check((1..=10_000_000).contains(&c), "command.count must be in 1..=10000000")?;
        }
        if let Some(d) = self.depth {
            check((4..=60).contains(&d), "command.depth must be in 4..=60")?;
        }
        if let Some(n) = self.truncation {
            check((1..=10_000).contains(&n), "command.truncation must be in 1..=10000")?;
        }
        if let Some(b) = &self.base {
            check(!b.is_empty(), "command.base must be nonempty")?;
        }
        Ok(())
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-10)
    }

    pub fn execution(&self) -> Execution {
        self.execution.unwrap_or_default()
    }

    /// `alphas`, or `alpha_count` evenly spaced points of `alpha_range`.
    pub fn alpha_grid(&self) -> Option<Vec<f64>> {
        if let Some(a) = &self.alphas {
            return Some(a.clone());
        }
        let ([lo, hi], n) = (self.alpha_range?, self.alpha_count?);
        if n == 1 {
            return Some(vec![lo]);
        }
        Some((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
    }

    /// `a_grid`, or `grid_points` evenly spaced points of `a_range`.
    pub fn a_values(&self) -> Option<Vec<f64>> {
        if let Some(a) = &self.a_grid {
            return Some(a.clone());
        }
        let [lo, hi] = self.a_range?;
        let n = self.grid_points.unwrap_or(33);
        Some((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
    }

    pub fn base_choice(&self) -> BaseChoice {
        self.base.clone().map_or(BaseChoice::NonParabolic, BaseChoice::Symbols)
    }
}
