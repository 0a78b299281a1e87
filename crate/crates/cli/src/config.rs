//! Versioned TOML experiment configuration.

use serde::Deserialize;
use signlab::{DomainGrid, Method};

use crate::expr::{self, Expr};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub grid: GridSpec,
    pub matrix: MatrixSpec,
    /// One expression per component.
    pub sources: Vec<String>,
    #[serde(default)]
    pub solve: SolveSpec,
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub amp: AmpSpec,
    #[serde(default)]
    pub annex: AnnexSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dimension: usize,
    pub extents: Vec<f64>,
    pub resolution: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MethodSpec {
    #[default]
    Jordan,
    Direct,
}

impl From<MethodSpec> for Method {
    fn from(m: MethodSpec) -> Method {
        match m {
            MethodSpec::Jordan => Method::Jordan,
            MethodSpec::Direct => Method::Direct,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSpec {
    pub mu: Option<f64>,
    #[serde(default)]
    pub method: MethodSpec,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Evenly spaced over `μ₁₁ ± cap/2`.
    Auto,
    Range,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmpSpec {
    /// Lebesgue exponent for `‖h^⊥‖_q`; defaults to `2·dimension + 1`.
    pub q: Option<f64>,
    /// 1-based source component used as `h`; required when `n > 1`.
    pub component: Option<usize>,
    /// Amplitudes `s` for the sequence `h¹φ₁ + s·h^⊥`.
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
}

fn default_scales() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0, 8.0]
}

impl Default for AmpSpec {
    fn default() -> Self {
        AmpSpec { q: None, component: None, scales: default_scales() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnexSpec {
    /// Shifts `μ − μ₁⁻` at which each 2×2 result is checked.
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
}

fn default_offsets() -> Vec<f64> {
    vec![0.01, -1.0]
}

impl Default for AnnexSpec {
    fn default() -> Self {
        AnnexSpec { offsets: default_offsets() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_matrix_tol")]
    pub matrix: f64,
}

fn default_matrix_tol() -> f64 {
    signlab::DEFAULT_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { matrix: default_matrix_tol() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: String,
}

/// A parsed and structurally validated configuration.
#[derive(Debug, Clone)]
pub struct Checked {
    pub config: ExperimentConfig,
    pub grid: DomainGrid,
    pub sources: Vec<Expr>,
}

#[cfg(test)]
impl Checked {
    pub fn n(&self) -> usize {
        self.config.matrix.rows.len()
    }
}

pub fn parse(text: &str) -> Result<Checked, String> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| e.to_string())?;
    if config.version != CONFIG_VERSION {
        return Err(format!("unsupported config version {} (expected {CONFIG_VERSION})", config.version));
    }
    let g = &config.grid;
    let grid = DomainGrid::new(g.dimension, &g.extents, &g.resolution).map_err(|e| e.to_string())?;
    let n = config.matrix.rows.len();
    if n == 0 || config.matrix.rows.iter().any(|r| r.len() != n) {
        return Err("matrix.rows must describe a non-empty square matrix".into());
    }
    if config.sources.len() != n {
        return Err(format!("{} sources for a {n}×{n} matrix", config.sources.len()));
    }
    let sources = config
        .sources
        .iter()
        .enumerate()
        .map(|(i, s)| expr::parse(s).map_err(|e| format!("sources[{i}] {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(sw) = &config.sweep {
        if sw.count == 0 {
            return Err("sweep.count must be positive".into());
        }
        if sw.mode == SweepMode::Range {
            match (sw.min, sw.max) {
                (Some(lo), Some(hi)) if lo.is_finite() && hi.is_finite() && lo <= hi => {}
                _ => return Err("sweep.mode = \"range\" needs finite min ≤ max".into()),
            }
        }
    }
    if let Some(c) = config.amp.component {
        if c == 0 || c > n {
            return Err(format!("amp.component must be in 1..={n}"));
        }
    }
    if !(config.tolerances.matrix > 0.0) {
        return Err("tolerances.matrix must be positive".into());
    }
    Ok(Checked { config, grid, sources })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
version = 1
sources = ["1"]
[grid]
dimension = 1
extents = [1.0]
resolution = [31]
[matrix]
rows = [[1.0]]
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.n(), 1);
        assert_eq!(c.config.solve.method, MethodSpec::Jordan);
        assert_eq!(c.config.tolerances.matrix, 1e-8);
        assert_eq!(c.config.amp.scales, default_scales());
    }

    #[test]
    fn structural_errors() {
        assert!(parse(&MINIMAL.replace("version = 1", "version = 2")).unwrap_err().contains("version"));
        assert!(parse(&MINIMAL.replace("[[1.0]]", "[[1.0, 2.0]]")).unwrap_err().contains("square"));
        assert!(parse(&MINIMAL.replace("[\"1\"]", "[\"1\", \"x\"]")).unwrap_err().contains("2 sources"));
        assert!(parse(&MINIMAL.replace("[\"1\"]", "[\"1 +\"]")).unwrap_err().contains("sources[0]"));
        assert!(parse(&MINIMAL.replace("[31]", "[2]")).is_err());
        assert!(parse(&format!("{MINIMAL}\nbogus = 3")).is_err());
        assert!(parse(&format!("{MINIMAL}\n[sweep]\nmode = \"range\"\ncount = 3")).unwrap_err().contains("min"));
    }
}
