use std::fs;
use std::path::{Path, PathBuf};

use planar_cocycles::linalg::{LinalgError, Mat2};
use planar_cocycles::semigroup::{MatrixTuple, DEFAULT_CAP, MAX_SYMBOLS};
use planar_cocycles::domination::OPEN_EPS;
use serde::{Deserialize, Serialize};

use crate::{Stage, WorkbenchError};

pub const DEFAULT_ENUM_DEPTH: usize = 12;
pub const DEFAULT_CYLINDER_DEPTH: usize = 8;
pub const DEFAULT_TRANSFER_DEPTH: usize = 8;
pub const DEFAULT_HORIZON: usize = 20;
/// Most windows the transfer potential may have.
pub const TRANSFER_CAP: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Depths {
    /// Longest words enumerated for domination, κ and pressure.
    pub enum_depth: usize,
    /// Depth of the cylinder measures that are reported.
    pub cylinder_depth: usize,
    /// Window length of the discretized transfer potential.
    pub transfer_depth: usize,
    /// Longest words tested by the shadowing check.
    pub horizon: usize,
}

impl Default for Depths {
    fn default() -> Self {
        Depths {
            enum_depth: DEFAULT_ENUM_DEPTH,
            cylinder_depth: DEFAULT_CYLINDER_DEPTH,
            transfer_depth: DEFAULT_TRANSFER_DEPTH,
            horizon: DEFAULT_HORIZON,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Budgets {
    /// Most products enumerated at one length.
    pub cap: usize,
    /// Slack in radians for the open conditions of unstable multicones.
    pub eps_open: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            cap: DEFAULT_CAP,
            eps_open: OPEN_EPS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputPaths {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    matrices: Vec<[f64; 4]>,
    #[serde(default = "default_s")]
    s: f64,
    #[serde(default)]
    depths: Depths,
    #[serde(default)]
    budgets: Budgets,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    output: OutputPaths,
}

fn default_s() -> f64 {
    1.0
}

/// A validated job: an invertible tuple plus run parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobConfig {
    pub tuple: MatrixTuple,
    pub s: f64,
    pub depths: Depths,
    pub budgets: Budgets,
    pub seed: u64,
    #[serde(skip)]
    pub output: OutputPaths,
}

impl JobConfig {
    /// Validates the fields shared by every constructor.
    pub fn new(matrices: &[[f64; 4]], s: f64) -> Result<JobConfig, WorkbenchError> {
        if matrices.is_empty() || matrices.len() > MAX_SYMBOLS {
            return Err(WorkbenchError::Parse(format!(
                "matrices: need between 1 and {MAX_SYMBOLS} matrices, got {}",
                matrices.len()
            )));
        }
        let mut ms = Vec::with_capacity(matrices.len());
        for (i, &[a, b, c, d]) in matrices.iter().enumerate() {
            match Mat2::new(a, b, c, d) {
                Ok(m) => ms.push(m),
                Err(LinalgError::Singular { .. }) => return Err(WorkbenchError::SingularMatrix(i)),
                Err(e) => return Err(WorkbenchError::Parse(format!("matrices[{i}]: {e}"))),
            }
        }
        let cfg = JobConfig {
            tuple: MatrixTuple::new(ms).map_err(|e| WorkbenchError::Parse(e.to_string()))?,
            s,
            depths: Depths::default(),
            budgets: Budgets::default(),
            seed: 0,
            output: OutputPaths::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Re-checks the scalar fields, for use after command-line overrides.
    pub fn validate(&self) -> Result<(), WorkbenchError> {
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(WorkbenchError::Parse("s must be > 0".into()));
        }
        let d = &self.depths;
        if d.enum_depth == 0 || d.cylinder_depth == 0 || d.horizon == 0 {
            return Err(WorkbenchError::Parse("depths must be at least 1".into()));
        }
        if d.transfer_depth < 2 {
            return Err(WorkbenchError::Parse("depths.transfer_depth must be at least 2".into()));
        }
        if !(self.budgets.eps_open > 0.0) {
            return Err(WorkbenchError::Parse("budgets.eps_open must be > 0".into()));
        }
        let cap = self.budgets.cap;
        for (field, depth, limit) in [
            ("depths.enum_depth", d.enum_depth, cap),
            ("depths.cylinder_depth", d.cylinder_depth, cap),
            ("depths.transfer_depth", d.transfer_depth, TRANSFER_CAP),
        ] {
            if self.n().checked_pow(depth as u32).is_none_or(|c| c > limit) {
                return Err(WorkbenchError::CapExceeded {
                    stage: Stage::Config,
                    message: format!("{field} = {depth}: {}^{depth} words exceed the cap of {limit}", self.n()),
                });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.tuple.len()
    }
}

/// Parses and validates a JSON job description.
pub fn parse_config(text: &str) -> Result<JobConfig, WorkbenchError> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| WorkbenchError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    let mut cfg = JobConfig::new(&raw.matrices, raw.s)?;
    cfg.depths = raw.depths;
    cfg.budgets = raw.budgets;
    cfg.seed = raw.seed;
    cfg.output = raw.output;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<JobConfig, WorkbenchError> {
    let text = fs::read_to_string(path).map_err(|e| WorkbenchError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_pair_loads() {
        let cfg = parse_config(r#"{"matrices": [[2,1,1,1],[2,1,1,2]]}"#).unwrap();
        assert_eq!(cfg.n(), 2);
        assert_eq!(cfg.s, 1.0);
        assert_eq!(cfg.depths, Depths::default());
    }

    #[test]
    fn singular_matrix_is_reported_by_index() {
        let e = parse_config(r#"{"matrices": [[1,2,2,4]]}"#).unwrap_err();
        assert_eq!(e, WorkbenchError::SingularMatrix(0));
        let e = parse_config(r#"{"matrices": [[1,0,0,1],[3,1,6,2]]}"#).unwrap_err();
        assert_eq!(e, WorkbenchError::SingularMatrix(1));
    }

    #[test]
    fn nonpositive_s_is_rejected() {
        let e = parse_config(r#"{"matrices": [[1,0,0,1]], "s": -1}"#).unwrap_err();
        assert_eq!(e, WorkbenchError::Parse("s must be > 0".into()));
        assert!(parse_config(r#"{"matrices": [[1,0,0,1]], "s": 0}"#).is_err());
    }

    #[test]
    fn parse_errors_carry_a_location() {
        let e = parse_config("{\n  \"matrices\": [[1,0,0]]\n}").unwrap_err();
        match e {
            WorkbenchError::Parse(m) => assert!(m.starts_with("line 2"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_config(r#"{"matrices": [[1,0,0,1]], "colour": 1}"#), Err(WorkbenchError::Parse(_))));
        assert!(matches!(parse_config(r#"{"matrices": []}"#), Err(WorkbenchError::Parse(_))));
    }

    #[test]
    fn nested_sections_override_defaults() {
        let cfg = parse_config(
            r#"{"matrices": [[2,0,0,1]], "s": 0.5, "depths": {"enum_depth": 6}, "seed": 7,
                "output": {"json": "out.json"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.depths.enum_depth, 6);
        assert_eq!(cfg.depths.cylinder_depth, DEFAULT_CYLINDER_DEPTH);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.output.json, Some(PathBuf::from("out.json")));
    }

    #[test]
    fn depths_beyond_the_cap_are_rejected() {
        let e = parse_config(r#"{"matrices": [[2,0,0,1],[1,0,0,2],[1,1,0,1]], "depths": {"enum_depth": 20}}"#).unwrap_err();
        assert_eq!(e.exit_code(), 4);
    }
}
