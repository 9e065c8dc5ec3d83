//! Text cache for stage tables.
//!
//! ```text
//! beaverlab-stage-v1 L=<L> t=<t> machine=tinyvm-v1
//! m <k> <num>/2^<exp>
//! ks <k> <len>
//! kp <k> <len>
//! maxout <n> <value>
//! maxsteps <n> <steps>
//! ```
//!
//! Each record kind is sorted by its key; absent `maxout`/`maxsteps`
//! entries are omitted. Rendering is deterministic, so a recomputed table
//! produces byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::stage::{compute_stage_with, Stage, StageOptions, StageTable};
use super::BeaverError;
use crate::dyadic::Dyadic;
use crate::tinyvm::MACHINE_VERSION;
use crate::weight::WeightMap;

pub const CACHE_FORMAT: &str = "beaverlab-stage-v1";

pub fn render_stage_table(t: &StageTable) -> String {
    let mut s = format!(
        "{CACHE_FORMAT} L={} t={} machine={MACHINE_VERSION}\n",
        t.stage.max_len, t.stage.budget
    );
    for (k, v) in t.m.iter() {
        writeln!(s, "m {k} {v}").unwrap();
    }
    for (k, len) in &t.ks {
        writeln!(s, "ks {k} {len}").unwrap();
    }
    for (k, len) in &t.kp {
        writeln!(s, "kp {k} {len}").unwrap();
    }
    for (n, v) in t.maxout.iter().enumerate() {
        if let Some(v) = v {
            writeln!(s, "maxout {n} {v}").unwrap();
        }
    }
    for (n, v) in t.maxsteps.iter().enumerate() {
        if let Some(v) = v {
            writeln!(s, "maxsteps {n} {v}").unwrap();
        }
    }
    s
}

fn bad(msg: impl Into<String>) -> BeaverError {
    BeaverError::Cache(msg.into())
}

fn parse_header(line: &str) -> Result<Stage, BeaverError> {
    let mut parts = line.split(' ');
    if parts.next() != Some(CACHE_FORMAT) {
        return Err(bad("unknown format tag"));
    }
    let mut field = |name: &str| {
        parts
            .next()
            .and_then(|p| p.strip_prefix(name))
            .ok_or_else(|| bad(format!("missing {name}")))
    };
    let max_len = field("L=")?.parse().map_err(|_| bad("bad L"))?;
    let budget = field("t=")?.parse().map_err(|_| bad("bad t"))?;
    if field("machine=")? != MACHINE_VERSION {
        return Err(bad("machine version mismatch"));
    }
    Ok(Stage::new(max_len, budget))
}

pub fn parse_stage_table(text: &str) -> Result<StageTable, BeaverError> {
    let mut lines = text.lines();
    let stage = parse_header(lines.next().ok_or_else(|| bad("empty file"))?)?;
    let mut m = WeightMap::new();
    let mut ks = BTreeMap::new();
    let mut kp = BTreeMap::new();
    let mut maxout = vec![None; stage.max_len + 1];
    let mut maxsteps = vec![None; stage.max_len + 1];
    for line in lines {
        let fields: Vec<&str> = line.split(' ').collect();
        let [kind, key, value] = fields[..] else {
            return Err(bad(format!("malformed line {line:?}")));
        };
        let key: u64 = key.parse().map_err(|_| bad(format!("bad key in {line:?}")))?;
        let int = || value.parse::<u64>().map_err(|_| bad(format!("bad value in {line:?}")));
        let slot = |n: u64| -> Result<usize, BeaverError> {
            (n as usize <= stage.max_len)
                .then_some(n as usize)
                .ok_or_else(|| bad(format!("length {n} beyond L")))
        };
        match kind {
            "m" => {
                let v: Dyadic = value.parse().map_err(|e| bad(format!("{e}")))?;
                m.add(key, &v);
            }
            "ks" => {
                ks.insert(key, int()? as usize);
            }
            "kp" => {
                kp.insert(key, int()? as usize);
            }
            "maxout" => maxout[slot(key)?] = Some(int()?),
            "maxsteps" => maxsteps[slot(key)?] = Some(int()?),
            other => return Err(bad(format!("unknown record {other:?}"))),
        }
    }
    Ok(StageTable {
        stage,
        m,
        ks,
        kp,
        maxout,
        maxsteps,
    })
}

/// On-disk cache keyed by machine version and stage.
#[derive(Debug, Clone)]
pub struct StageCache {
    dir: PathBuf,
}

impl StageCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        StageCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, stage: Stage) -> PathBuf {
        self.dir.join(format!(
            "stage-{MACHINE_VERSION}-L{}-t{}.txt",
            stage.max_len, stage.budget
        ))
    }

    pub fn load(&self, stage: Stage) -> Result<Option<StageTable>, BeaverError> {
        let path = self.path_for(stage);
        match fs::read_to_string(&path) {
            Ok(text) => {
                let t = parse_stage_table(&text)?;
                if t.stage != stage {
                    return Err(bad(format!("{} holds a different stage", path.display())));
                }
                Ok(Some(t))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(BeaverError::Io(e.to_string())),
        }
    }

    pub fn store(&self, t: &StageTable) -> Result<(), BeaverError> {
        fs::create_dir_all(&self.dir).map_err(|e| BeaverError::Io(e.to_string()))?;
        fs::write(self.path_for(t.stage), render_stage_table(t))
            .map_err(|e| BeaverError::Io(e.to_string()))
    }

    pub fn get_or_compute(&self, stage: Stage, opts: &StageOptions) -> Result<StageTable, BeaverError> {
        if let Some(t) = self.load(stage)? {
            return Ok(t);
        }
        let t = compute_stage_with(stage, opts)?;
        self.store(&t)?;
        Ok(t)
    }

    /// Removes every cached table; returns how many files were deleted.
    pub fn clear(&self) -> Result<usize, BeaverError> {
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
            Err(e) => return Err(BeaverError::Io(e.to_string())),
        };
        let mut removed = 0;
        for entry in entries {
            let path = entry.map_err(|e| BeaverError::Io(e.to_string()))?.path();
            let is_table = path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("stage-") && n.ends_with(".txt"));
            if is_table {
                fs::remove_file(&path).map_err(|e| BeaverError::Io(e.to_string()))?;
                removed += 1;
            }
        }
        Ok(removed)
    }
}
