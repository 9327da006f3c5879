use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{SearchState, Trial, TrialStatus};
use crate::error::{Error, Result};
use crate::harness::{Objective, ObjectiveRequest, ObjectiveResponse};

pub const HISTORY_FILE: &str = "history.ndjson";
pub const TIMINGS_FILE: &str = "timings.ndjson";
pub const SUMMARY_FILE: &str = "summary.json";

/// Reads a history file. A malformed final line (a write cut short) is
/// dropped; malformed lines elsewhere are errors. Trials come back sorted
/// by id and renumbered from 0 if a crash left gaps.
pub fn load_history(path: &Path) -> Result<Vec<Trial>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut trials = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Trial>(line) {
            Ok(t) => trials.push(t),
            Err(_) if Some(i) == last => break,
            Err(e) => {
                return Err(Error::InvalidConfiguration(format!(
                    "{}: line {}: {e}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    trials.retain(|t| t.status != TrialStatus::Pending);
    trials.sort_by_key(|t| t.id);
    for (i, t) in trials.iter_mut().enumerate() {
        t.id = i as u64;
    }
    Ok(trials)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Appends finished trials to `history.ndjson` and their wall times to
/// `timings.ndjson`.
pub struct HistoryWriter {
    history: BufWriter<File>,
    timings: BufWriter<File>,
    path: PathBuf,
}

#[derive(Serialize)]
struct Timing {
    id: u64,
    wall_time_secs: f64,
}

impl HistoryWriter {
    pub fn open(dir: &Path) -> Result<Self> {
        let open = |name: &str| {
            let p = dir.join(name);
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(&p)
                .map(BufWriter::new)
                .map_err(|e| Error::io(p, e))
        };
        Ok(Self {
            history: open(HISTORY_FILE)?,
            timings: open(TIMINGS_FILE)?,
            path: dir.join(HISTORY_FILE),
        })
    }

    pub fn append(&mut self, trial: &Trial, wall: Duration) -> Result<()> {
        let line = serde_json::to_string(trial)?;
        writeln!(self.history, "{line}")
            .and_then(|_| self.history.flush())
            .map_err(|e| Error::io(&self.path, e))?;
        let timing = serde_json::to_string(&Timing {
            id: trial.id,
            wall_time_secs: wall.as_secs_f64(),
        })?;
        writeln!(self.timings, "{timing}")
            .and_then(|_| self.timings.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub space: String,
    pub objective: String,
    pub budget: usize,
    pub seed: u64,
    pub completed: usize,
    pub failed: usize,
    pub collapsed: usize,
    pub best_score: Option<f64>,
    pub incumbent_trajectory: Vec<Option<f64>>,
    pub best: Vec<Trial>,
}

impl SearchSummary {
    pub fn of(state: &SearchState, objective: &str, k: usize) -> Self {
        let h = state.history();
        let best: Vec<Trial> = state
            .best_trials(k)
            .map(|v| v.into_iter().cloned().collect())
            .unwrap_or_default();
        Self {
            space: state.space().name.clone(),
            objective: objective.to_string(),
            budget: state.budget(),
            seed: state.seed(),
            completed: state.completed(),
            failed: h.iter().filter(|t| t.status == TrialStatus::Failed).count(),
            collapsed: h.iter().filter(|t| t.collapsed).count(),
            best_score: best.first().and_then(|t| t.score),
            incumbent_trajectory: state.incumbent_trajectory(),
            best,
        }
    }
}

/// Drives suggest / evaluate / report until the budget is spent, keeping
/// up to `parallelism` evaluations in flight (one evaluator per worker).
///
/// With `output_dir`, an existing history there is replayed first, each
/// finished trial is appended as it arrives, and `space.json` and
/// `summary.json` are written.
pub fn run_search(
    state: &mut SearchState,
    objective: &dyn Objective,
    parallelism: usize,
    output_dir: Option<&Path>,
) -> Result<()> {
    if parallelism == 0 {
        return Err(Error::param("parallelism", "must be at least 1"));
    }
    let mut writer = match output_dir {
        None => None,
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let hist = dir.join(HISTORY_FILE);
            if state.history().is_empty() && hist.exists() {
                let trials = load_history(&hist)?;
                let mut text = String::new();
                for t in &trials {
                    text.push_str(&serde_json::to_string(t)?);
                    text.push('\n');
                }
                write_atomic(&hist, text.as_bytes())?;
                state.restore(trials)?;
            }
            write_atomic(
                &dir.join("space.json"),
                serde_json::to_string_pretty(state.space())?.as_bytes(),
            )?;
            Some(HistoryWriter::open(dir)?)
        }
    };

    let workers = parallelism.min(state.budget().saturating_sub(state.finished())).max(1);
    let (job_tx, job_rx) = mpsc::channel::<ObjectiveRequest>();
    let job_rx = Arc::new(Mutex::new(job_rx));
    let (res_tx, res_rx) = mpsc::channel::<(ObjectiveResponse, Duration)>();

    let outcome = thread::scope(|scope| -> Result<()> {
        for _ in 0..workers {
            let job_rx = Arc::clone(&job_rx);
            let res_tx = res_tx.clone();
            scope.spawn(move || {
                let mut evaluator = objective.spawn();
                loop {
                    let job = job_rx.lock().expect("job queue").recv();
                    let Ok(req) = job else { break };
                    let start = Instant::now();
                    let resp = match evaluator.as_mut() {
                        Ok(ev) => ev.evaluate(&req),
                        Err(e) => ObjectiveResponse::failure(req.trial_id, e.to_string()),
                    };
                    if res_tx.send((resp, start.elapsed())).is_err() {
                        break;
                    }
                }
            });
        }
        drop(res_tx);

        let mut in_flight = 0usize;
        let result = loop {
            while in_flight < workers && state.can_suggest() {
                let (id, cfg) = match state.suggest() {
                    Ok(s) => s,
                    Err(e) => return Err(e),
                };
                let req = ObjectiveRequest::new(id, &state.space().name, cfg, state.eval_seed(id));
                job_tx.send(req).expect("workers alive");
                in_flight += 1;
            }
            if in_flight == 0 {
                break Ok(());
            }
            let Ok((resp, wall)) = res_rx.recv() else {
                break Err(Error::Protocol("all workers exited".into()));
            };
            in_flight -= 1;
            if let Err(e) = state.report_response(&resp) {
                break Err(e);
            }
            if let Some(w) = writer.as_mut() {
                if let Err(e) = w.append(&state.history()[resp.trial_id as usize], wall) {
                    break Err(e);
                }
            }
        };
        drop(job_tx);
        result
    });
    outcome?;

    if let Some(dir) = output_dir {
        let summary = SearchSummary::of(state, &objective.describe(), 5);
        write_atomic(
            &dir.join(SUMMARY_FILE),
            serde_json::to_string_pretty(&summary)?.as_bytes(),
        )?;
    }
    Ok(())
}
