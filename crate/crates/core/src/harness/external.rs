use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{shutdown_line, Evaluator, Objective, ObjectiveRequest, ObjectiveResponse, DEFAULT_CHANCE_LEVEL};
use crate::error::{Error, Result};

/// A resident evaluator process launched from `command`. `timeout_secs`
/// bounds each request; absent means wait indefinitely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalObjective {
    pub command: Vec<String>,
    #[serde(default)]
    pub timeout_secs: Option<f64>,
    #[serde(default = "default_chance")]
    pub chance_level: f64,
}

fn default_chance() -> f64 {
    DEFAULT_CHANCE_LEVEL
}

impl ExternalObjective {
    pub fn new(command: Vec<String>) -> Self {
        Self {
            command,
            timeout_secs: None,
            chance_level: DEFAULT_CHANCE_LEVEL,
        }
    }

    pub fn with_timeout(mut self, secs: f64) -> Self {
        self.timeout_secs = Some(secs);
        self
    }
}

impl Objective for ExternalObjective {
    fn spawn(&self) -> Result<Box<dyn Evaluator + '_>> {
        if self.command.is_empty() {
            return Err(Error::InvalidConfiguration("empty evaluator command".into()));
        }
        Ok(Box::new(ExternalEvaluator::new(self.clone())))
    }

    fn describe(&self) -> String {
        self.command.join(" ")
    }
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Process {
    fn start(command: &[String]) -> std::io::Result<Self> {
        let mut child = Command::new(&command[0])
            .args(&command[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Self { child, stdin, lines })
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    /// Sends the shutdown message and waits briefly for a clean exit.
    fn shutdown(mut self) {
        let _ = writeln!(self.stdin, "{}", shutdown_line());
        let _ = self.stdin.flush();
        let deadline = Instant::now() + Duration::from_secs(2);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(10));
        }
        self.kill();
    }
}

/// One connection to an external evaluator. The process is started on
/// first use and restarted after any failure that may have left the
/// stream out of step.
pub struct ExternalEvaluator {
    spec: ExternalObjective,
    process: Option<Process>,
}

impl ExternalEvaluator {
    pub fn new(spec: ExternalObjective) -> Self {
        Self { spec, process: None }
    }

    fn exchange(&mut self, request: &ObjectiveRequest) -> std::result::Result<ObjectiveResponse, String> {
        if self.process.is_none() {
            let p = Process::start(&self.spec.command)
                .map_err(|e| format!("failed to launch `{}`: {e}", self.spec.command.join(" ")))?;
            self.process = Some(p);
        }
        let p = self.process.as_mut().unwrap();
        let line = serde_json::to_string(request).map_err(|e| e.to_string())?;
        writeln!(p.stdin, "{line}")
            .and_then(|_| p.stdin.flush())
            .map_err(|e| format!("evaluator stdin closed: {e}"))?;
        let deadline = self.spec.timeout_secs.map(|s| Instant::now() + Duration::from_secs_f64(s));
        loop {
            let got = match deadline {
                None => p.lines.recv().map_err(|_| RecvTimeoutError::Disconnected),
                Some(d) => p.lines.recv_timeout(d.saturating_duration_since(Instant::now())),
            };
            match got {
                Ok(Ok(text)) if text.trim().is_empty() => continue,
                Ok(Ok(text)) => {
                    return ObjectiveResponse::parse_line(&text, request.trial_id, self.spec.chance_level)
                        .map_err(|e| e.to_string())
                }
                Ok(Err(e)) => return Err(format!("reading evaluator output: {e}")),
                Err(RecvTimeoutError::Timeout) => {
                    return Err(format!(
                        "evaluator timed out after {} s",
                        self.spec.timeout_secs.unwrap_or_default()
                    ))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    let status = p.child.wait().map(|s| s.to_string()).unwrap_or_else(|e| e.to_string());
                    return Err(format!("evaluator exited without answering ({status})"));
                }
            }
        }
    }
}

impl Evaluator for ExternalEvaluator {
    fn evaluate(&mut self, request: &ObjectiveRequest) -> ObjectiveResponse {
        match self.exchange(request) {
            Ok(r) => r,
            Err(msg) => {
                if let Some(p) = self.process.take() {
                    p.kill();
                }
                ObjectiveResponse::failure(request.trial_id, msg)
            }
        }
    }
}

impl Drop for ExternalEvaluator {
    fn drop(&mut self) {
        if let Some(p) = self.process.take() {
            p.shutdown();
        }
    }
}
