//! Subprocess adapter: writes the model as an LP file, runs a shell command
//! template and reads back a solution file.
//!
//! The template must contain `{lp}` and `{sol}`; `{time}` is replaced by the
//! time limit in seconds (or `0` when there is none).

use std::process::Command;

use super::lp::{parse_solution, write_lp};
use super::{Backend, BackendCapabilities, SolveLimits, SolveOutcome, SolveStatus};
use crate::error::{Error, Result};
use crate::model::IlpModel;
use crate::subtours::IntegerSolution;

#[derive(Debug, Clone)]
pub struct CommandBackend {
    template: String,
}

impl CommandBackend {
    pub fn new(template: impl Into<String>) -> Result<Self> {
        let template = template.into();
        if !template.contains("{lp}") || !template.contains("{sol}") {
            return Err(Error::domain(
                "command template needs both {lp} and {sol} placeholders",
            ));
        }
        Ok(CommandBackend { template })
    }

    pub fn template(&self) -> &str {
        &self.template
    }
}

fn shell_quote(path: &str) -> String {
    format!("'{}'", path.replace('\'', "'\\''"))
}

impl Backend for CommandBackend {
    fn name(&self) -> String {
        format!("cmd:{}", self.template)
    }

    fn capabilities(&self) -> BackendCapabilities {
        BackendCapabilities {
            reports_incumbents: false,
            accepts_warm_start: false,
            deterministic: false,
        }
    }

    fn solve(
        &self,
        model: &IlpModel,
        _warm_start: Option<&[usize]>,
        limits: &SolveLimits,
    ) -> Result<SolveOutcome> {
        let dir = tempfile::tempdir()?;
        let lp_path = dir.path().join("model.lp");
        let sol_path = dir.path().join("model.sol");
        std::fs::write(&lp_path, write_lp(model))?;

        let time = limits.time_limit.map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let command = self
            .template
            .replace("{lp}", &shell_quote(&lp_path.to_string_lossy()))
            .replace("{sol}", &shell_quote(&sol_path.to_string_lossy()))
            .replace("{time}", &format!("{time}"));
        let output = Command::new("sh").arg("-c").arg(&command).output()?;
        if !output.status.success() {
            return Err(Error::Backend(format!(
                "solver command exited with {}: {}{}",
                output.status,
                String::from_utf8_lossy(&output.stderr).trim(),
                String::from_utf8_lossy(&output.stdout).trim()
            )));
        }
        let text = std::fs::read_to_string(&sol_path).map_err(|e| {
            Error::Backend(format!(
                "solver wrote no solution file ({e}); stderr: {}",
                String::from_utf8_lossy(&output.stderr).trim()
            ))
        })?;
        let parsed = parse_solution(&text, model.m())?;
        let status = parsed.status.unwrap_or(SolveStatus::Optimal);
        if status == SolveStatus::Infeasible {
            return Ok(SolveOutcome {
                status,
                best_solution: None,
                objective: None,
                incumbents: Vec::new(),
            });
        }
        if parsed.chosen.is_empty() {
            if status == SolveStatus::LimitReached {
                return Ok(SolveOutcome {
                    status,
                    best_solution: None,
                    objective: None,
                    incumbents: Vec::new(),
                });
            }
            return Err(Error::Backend("solution file lists no chosen variables".into()));
        }
        if !model.is_feasible(&parsed.chosen) {
            return Err(Error::Backend(
                "solver returned a point violating the model".into(),
            ));
        }
        let objective = model.objective_value(&parsed.chosen);
        if let Some(reported) = parsed.objective {
            if (reported - objective as f64).abs() > 0.5 {
                return Err(Error::Backend(format!(
                    "reported objective {reported} differs from recomputed {objective}"
                )));
            }
        }
        Ok(SolveOutcome {
            status,
            best_solution: Some(IntegerSolution {
                chosen: parsed.chosen,
            }),
            objective: Some(objective),
            incumbents: Vec::new(),
        })
    }
}
