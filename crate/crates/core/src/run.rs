//! Run configuration for searches: one JSON file naming the space, the
//! objective, the budget and every optimizer override.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bo::{run_search, BoSettings, SearchState, SearchSummary};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::harness::{ExternalObjective, Objective, Surface, SyntheticObjective};
use crate::space::{PriorOverride, SearchSpace};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "GROUPAUG_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObjectiveSpec {
    Synthetic {
        synthetic: Surface,
        #[serde(default)]
        noise_std: f64,
    },
    External(ExternalObjective),
}

impl ObjectiveSpec {
    pub fn build(&self, space: &SearchSpace) -> Box<dyn Objective> {
        match self {
            ObjectiveSpec::Synthetic { synthetic, noise_std } => {
                Box::new(SyntheticObjective::new(*synthetic, space.clone()).with_noise(*noise_std))
            }
            ObjectiveSpec::External(e) => Box::new(e.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Builtin space name or path to a space JSON file.
    pub space: String,
    pub objective: ObjectiveSpec,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub prior_overrides: BTreeMap<String, PriorOverride>,
    #[serde(default)]
    pub bo: BoSettings,
}

fn default_budget() -> usize {
    50
}

fn default_parallelism() -> usize {
    1
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::param("budget", "must be at least 1"));
        }
        if self.parallelism == 0 {
            return Err(Error::param("parallelism", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.bo.random_interleave) {
            return Err(Error::param("bo.random_interleave", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn resolve_space(&self) -> Result<SearchSpace> {
        SearchSpace::resolve(&self.space)?.with_overrides(&self.prior_overrides)
    }

    /// Explicit setting, else the environment variable, else
    /// `runs/<space>-<seed>`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| {
                let stem = Path::new(&self.space)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| self.space.clone());
                PathBuf::from("runs").join(format!("{stem}-{}", self.seed))
            })
    }

    /// Runs (or resumes) the search in the resolved output directory.
    pub fn execute(&self, exec: Execution) -> Result<(SearchState, SearchSummary, PathBuf)> {
        self.validate()?;
        let space = self.resolve_space()?;
        let objective = self.objective.build(&space);
        let dir = self.resolved_output_dir();
        let mut state = SearchState::new(space, self.budget, self.seed, self.bo.clone())?.with_execution(exec);
        run_search(&mut state, objective.as_ref(), self.parallelism, Some(&dir))?;
        let summary = SearchSummary::of(&state, &objective.describe(), 5);
        Ok((state, summary, dir))
    }
}
