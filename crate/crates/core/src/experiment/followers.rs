//! Follower graph for the follower-aware tweet baseline.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `user -> followers`. Users absent from the file have no known followers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowerGraph {
    pub followers: BTreeMap<String, BTreeSet<String>>,
}

static NO_FOLLOWERS: BTreeSet<String> = BTreeSet::new();

impl FollowerGraph {
    pub fn followers_of(&self, user: &str) -> &BTreeSet<String> {
        self.followers.get(user).unwrap_or(&NO_FOLLOWERS)
    }

    pub fn len(&self) -> usize {
        self.followers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.followers.is_empty()
    }

    /// Reads `user<TAB>follower1,follower2,...` lines; repeated users merge.
    pub fn from_reader<R: BufRead>(input: R) -> Result<Self> {
        let mut graph = FollowerGraph::default();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (user, rest) = line.split_once('\t').unwrap_or((line.as_str(), ""));
            let user = user.trim();
            if user.is_empty() {
                return Err(Error::invalid(format!("follower graph line {}: empty user", i + 1)));
            }
            graph
                .followers
                .entry(user.to_string())
                .or_default()
                .extend(rest.split(',').map(str::trim).filter(|f| !f.is_empty()).map(String::from));
        }
        Ok(graph)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (user, fs) in &self.followers {
            let list: Vec<&str> = fs.iter().map(String::as_str).collect();
            writeln!(out, "{user}\t{}", list.join(","))?;
        }
        Ok(())
    }
}
