//! Experiment configuration: parsing and validation.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use psido_core::gohberg::SandwichConfig;
use psido_core::symbols::gallery::{self, SymbolSpec};
use psido_core::{CoronaFilter, DualPoint, FilterKind, Group, GroupSpec, Symbol};
use serde::{Deserialize, Serialize};

/// A config problem, anchored at a line and column of the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.path.display(), self.line, self.column, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// A symbol, either a gallery entry with default parameters or an inline spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolEntry {
    Gallery {
        gallery: String,
        #[serde(default)]
        label: Option<String>,
    },
    Inline {
        #[serde(default)]
        label: Option<String>,
        #[serde(flatten)]
        spec: SymbolSpec,
    },
}

impl SymbolEntry {
    pub fn label(&self) -> String {
        match self {
            Self::Gallery { gallery, label } => label.clone().unwrap_or_else(|| gallery.clone()),
            Self::Inline { label, spec } => label.clone().unwrap_or_else(|| spec.name().to_string()),
        }
    }

    pub fn build(&self, group: &Group) -> psido_core::Result<Symbol> {
        let sym = match self {
            Self::Gallery { gallery, .. } => gallery::by_name(gallery, group)?,
            Self::Inline { spec, .. } => gallery::build(spec, group)?,
        };
        Ok(sym.with_label(self.label()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterEntry {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(flatten)]
    pub kind: FilterKind,
    /// Translation generators as full dual coordinates; defaults to the unit vectors.
    #[serde(default)]
    pub generators: Option<Vec<Vec<i64>>>,
}

impl FilterEntry {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            match self.kind {
                FilterKind::FullCorona => "full_corona",
                FilterKind::Cone { .. } => "cone",
                FilterKind::Union { .. } => "union",
                FilterKind::Intersection { .. } => "intersection",
            }
            .to_string()
        })
    }

    pub fn build(&self, group: &Group) -> psido_core::Result<CoronaFilter> {
        let generators = match &self.generators {
            Some(gs) => gs.iter().map(|c| group.dual_point(c)).collect::<psido_core::Result<Vec<DualPoint>>>()?,
            None => group.default_generators(),
        };
        let filter = CoronaFilter::builtin(self.label(), self.kind.clone(), generators);
        filter.validate(group)?;
        Ok(filter)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Final-level bound on `OSC` for the vanishing-oscillation diagnostic.
    pub vo: f64,
    /// Allowed shortfall of the final lower bound below the `D` estimate.
    pub lower: f64,
    /// Allowed excess of a lower bound over the matching upper bound.
    pub numeric: f64,
    /// Relative stopping tolerance of power iteration.
    pub norm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = SandwichConfig::default();
        Self { vo: d.vo_tol, lower: d.tol_lower, numeric: d.tol_num, norm: d.norm_tol }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Result directory; relative paths are taken from the working directory.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Group template; every torus window radius is replaced by each schedule entry.
    pub group: GroupSpec,
    pub symbols: Vec<SymbolEntry>,
    pub filters: Vec<FilterEntry>,
    /// Torus window radii, strictly increasing.
    pub schedule: Vec<i64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Fraction of the window radius used as the deepest level.
    #[serde(default = "default_level_fraction")]
    pub level_fraction: f64,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

fn default_level_fraction() -> f64 {
    SandwichConfig::default().level_fraction
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: 0,
            column: 0,
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(&text, path)
    }

    /// Parses and validates `text`; `path` is only used in messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|(key, message)| {
            let (line, column) = locate_key(text, key);
            ConfigError { path: path.to_path_buf(), line, column, message }
        })?;
        Ok(cfg)
    }

    /// Semantic checks; errors name the offending top-level key.
    fn validate(&self) -> Result<(), (&'static str, String)> {
        self.group.validate().map_err(|e| ("group", e.to_string()))?;
        if self.group.factors.iter().all(|f| !f.is_torus()) {
            return Err(("group", "window escalation needs at least one torus factor".into()));
        }
        if self.schedule.is_empty() {
            return Err(("schedule", "schedule must not be empty".into()));
        }
        if let Some(&m) = self.schedule.iter().find(|&&m| m < 1) {
            return Err(("schedule", format!("window radius must be positive, got {m}")));
        }
        if let Some(w) = self.schedule.windows(2).find(|w| w[1] <= w[0]) {
            return Err(("schedule", format!("schedule must be strictly increasing, got {} then {}", w[0], w[1])));
        }
        let t = &self.tolerances;
        for (name, v) in [("vo", t.vo), ("lower", t.lower), ("numeric", t.numeric), ("norm", t.norm)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(("tolerances", format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        if !(self.level_fraction > 0.0 && self.level_fraction <= 1.0) {
            return Err(("level_fraction", format!("level_fraction must lie in (0, 1], got {}", self.level_fraction)));
        }
        if self.symbols.is_empty() {
            return Err(("symbols", "at least one symbol is required".into()));
        }
        if self.filters.is_empty() {
            return Err(("filters", "at least one filter is required".into()));
        }
        unique("symbols", self.symbols.iter().map(SymbolEntry::label))?;
        unique("filters", self.filters.iter().map(FilterEntry::label))?;
        let group = self.group_at(self.schedule[0]).map_err(|e| ("group", e.to_string()))?;
        for s in &self.symbols {
            s.build(&group).map_err(|e| ("symbols", format!("symbol `{}`: {e}", s.label())))?;
        }
        for f in &self.filters {
            f.build(&group).map_err(|e| ("filters", format!("filter `{}`: {e}", f.label())))?;
        }
        Ok(())
    }

    pub fn group_at(&self, radius: i64) -> psido_core::Result<Group> {
        Group::new(self.group.clone())?.with_window(radius)
    }

    pub fn sandwich_config(&self, seed: u64) -> SandwichConfig {
        let t = &self.tolerances;
        SandwichConfig {
            level_fraction: self.level_fraction,
            tol_lower: t.lower,
            tol_num: t.numeric,
            vo_tol: t.vo,
            norm_tol: t.norm,
            seed,
            ..SandwichConfig::default()
        }
    }
}

fn unique(key: &'static str, labels: impl Iterator<Item = String>) -> Result<(), (&'static str, String)> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l.clone()) {
            return Err((key, format!("duplicate label `{l}`; give entries distinct `label` fields")));
        }
        if l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err((key, format!("label `{l}` must be nonempty and use only [A-Za-z0-9_-]")));
        }
    }
    Ok(())
}

/// 1-based line and column of the first `"key"` in `text`, or (1, 1).
fn locate_key(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    for (i, line) in text.lines().enumerate() {
        if let Some(c) = line.find(&needle) {
            return (i + 1, c + 1);
        }
    }
    (1, 1)
}
