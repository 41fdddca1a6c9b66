use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "CONELAB_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    pub residuals: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, String>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl CheckRecord {
    pub fn new(name: &str, seed: u64) -> CheckRecord {
        CheckRecord {
            name: name.to_string(),
            status: Status::Pass,
            residuals: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            details: BTreeMap::new(),
            seed,
            wall_time_ms: None,
        }
    }

    /// Records `value` against `tol` under `key`; any failing bound fails the check.
    pub fn bound(&mut self, key: &str, value: f64, tol: f64) -> bool {
        self.residuals.insert(key.to_string(), value);
        self.tolerances.insert(key.to_string(), tol);
        let ok = value <= tol;
        if !ok {
            self.status = Status::Fail;
        }
        ok
    }

    pub fn residual(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.to_string(), value);
    }

    pub fn detail(&mut self, key: &str, value: impl ToString) {
        self.details.insert(key.to_string(), value.to_string());
    }

    pub fn fail(&mut self, reason: impl ToString) {
        self.status = Status::Fail;
        self.detail("error", reason);
    }

    /// Marks the check inconclusive; a failure already recorded stands.
    pub fn undetermined(&mut self, reason: impl ToString) {
        if self.status != Status::Fail {
            self.status = Status::Undetermined;
        }
        self.detail("reason", reason);
    }
}

/// Runs `body` on a fresh record and stamps the wall time when `timing` is on.
pub fn timed(name: &str, seed: u64, timing: bool, body: impl FnOnce(&mut CheckRecord)) -> CheckRecord {
    let start = Instant::now();
    let mut rec = CheckRecord::new(name, seed);
    body(&mut rec);
    if timing {
        rec.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    rec
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq, Default)]
pub struct Summary {
    pub passed: usize,
    pub failed: usize,
    pub undetermined: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<String>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(command: &str, seed: u64) -> Report {
        Report {
            tool: "conelab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            source: None,
            table: Vec::new(),
            checks: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn push(&mut self, rec: CheckRecord) {
        match rec.status {
            Status::Pass => self.summary.passed += 1,
            Status::Fail => self.summary.failed += 1,
            Status::Undetermined => self.summary.undetermined += 1,
        }
        self.checks.push(rec);
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.failed == 0 && self.summary.undetermined == 0 {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// `--seed` first, then the manifest's `seed`, then `CONELAB_SEED`, then 42.
pub fn resolve_seed(cli: Option<u64>, manifest: Option<u64>) -> u64 {
    cli.or(manifest)
        .or_else(|| std::env::var(SEED_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .unwrap_or(DEFAULT_SEED)
}
