//! `key=value` config files merged under command-line flags.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::Fail;

/// Values from an optional config file plus a record of every resolved
/// setting, so a run can log exactly what it used.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: RefCell<BTreeSet<String>>,
    resolved: RefCell<Vec<(String, String)>>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        out.insert(normalize(k), v.trim().to_string());
    }
    Ok(out)
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self, Fail> {
        let file = match path {
            None => BTreeMap::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Fail::Usage(format!("config {}: {e}", p.display())))?;
                parse_config(&text).map_err(|e| Fail::Usage(format!("config {}: {e}", p.display())))?
            }
        };
        Ok(Resolver { file, ..Default::default() })
    }

    /// Flag if given, else the config file entry, else `default`.
    pub fn get<T>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, Fail>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match (flag, self.from_file(key)) {
            (Some(v), _) => v,
            (None, Some(text)) => text
                .parse()
                .map_err(|e| Fail::Usage(format!("config key {key}: {e}")))?,
            (None, None) => default,
        };
        self.note(key, &v);
        Ok(v)
    }

    /// Like [`get`](Self::get) for settings without a default.
    pub fn require<T>(&self, key: &str, flag: Option<T>) -> Result<T, Fail>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = match (flag, self.from_file(key)) {
            (Some(v), _) => v,
            (None, Some(text)) => text
                .parse()
                .map_err(|e| Fail::Usage(format!("config key {key}: {e}")))?,
            (None, None) => return Err(Fail::Usage(format!("missing --{key}"))),
        };
        self.note(key, &v);
        Ok(v)
    }

    pub fn optional(&self, key: &str, flag: Option<String>) -> Option<String> {
        let v = flag.or_else(|| self.from_file(key));
        if let Some(v) = &v {
            self.note(key, v);
        }
        v
    }

    fn from_file(&self, key: &str) -> Option<String> {
        self.used.borrow_mut().insert(key.to_string());
        self.file.get(key).cloned()
    }

    pub fn note(&self, key: &str, v: &dyn Display) {
        self.resolved.borrow_mut().push((key.to_string(), v.to_string()));
    }

    /// Config file keys nothing asked for.
    pub fn unused(&self) -> Vec<String> {
        let used = self.used.borrow();
        self.file.keys().filter(|k| !used.contains(*k)).cloned().collect()
    }

    pub fn summary(&self) -> String {
        self.resolved
            .borrow()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}
