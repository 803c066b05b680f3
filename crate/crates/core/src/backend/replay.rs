use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{request_key, Backend, CompletionResult, RequestKind, SamplingParams, ScoreResult};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FixtureResponse {
    Complete { completions: Vec<CompletionResult> },
    Score { result: ScoreResult },
}

/// One recorded request/response pair, stored as `<key>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub key: String,
    pub backend_id: String,
    pub chars_per_token: f64,
    pub kind: RequestKind,
    pub prompt: String,
    pub continuation: String,
    pub params: SamplingParams,
    pub response: FixtureResponse,
}

impl Fixture {
    pub fn path_in(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.json", self.key))
    }
}

/// Serves responses from a directory of fixtures.
pub struct ReplayBackend {
    fixtures: HashMap<String, Fixture>,
    chars_per_token: f64,
    used: Mutex<BTreeSet<String>>,
}

impl ReplayBackend {
    pub fn load(dir: &Path) -> Result<Self> {
        let mut fixtures = HashMap::new();
        let mut entries: Vec<_> = fs::read_dir(dir)?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        entries.sort();
        for path in entries {
            let text = fs::read_to_string(&path)?;
            let fx: Fixture = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let expected = request_key(fx.kind, &fx.prompt, &fx.continuation, &fx.params);
            if expected != fx.key {
                return Err(Error::Parse {
                    path,
                    message: format!("fixture key {} does not match its request", fx.key),
                });
            }
            fixtures.insert(fx.key.clone(), fx);
        }
        let chars_per_token = fixtures
            .values()
            .next()
            .map_or(1.0, |f| f.chars_per_token);
        Ok(Self {
            fixtures,
            chars_per_token,
            used: Mutex::new(BTreeSet::new()),
        })
    }

    pub fn len(&self) -> usize {
        self.fixtures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixtures.is_empty()
    }

    fn lookup(&self, kind: RequestKind, prompt: &str, continuation: &str, params: &SamplingParams) -> Result<&Fixture> {
        let key = request_key(kind, prompt, continuation, params);
        let fx = self
            .fixtures
            .get(&key)
            .ok_or_else(|| Error::FixtureMissing(key.clone()))?;
        self.used.lock().expect("used lock").insert(key);
        Ok(fx)
    }
}

impl Backend for ReplayBackend {
    fn id(&self) -> String {
        let ids: BTreeSet<&str> = self.fixtures.values().map(|f| f.backend_id.as_str()).collect();
        format!("replay({})", ids.into_iter().collect::<Vec<_>>().join("|"))
    }

    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<CompletionResult>> {
        match &self.lookup(RequestKind::Complete, prompt, "", params)?.response {
            FixtureResponse::Complete { completions } => Ok(completions.clone()),
            FixtureResponse::Score { .. } => Err(Error::MalformedResponse(
                "completion fixture holds a score response".into(),
            )),
        }
    }

    fn score(&self, prompt: &str, continuation: &str, params: &SamplingParams) -> Result<ScoreResult> {
        match &self.lookup(RequestKind::Score, prompt, continuation, params)?.response {
            FixtureResponse::Score { result } => Ok(result.clone()),
            FixtureResponse::Complete { .. } => Err(Error::MalformedResponse(
                "score fixture holds a completion response".into(),
            )),
        }
    }

    fn chars_per_token(&self) -> f64 {
        self.chars_per_token
    }

    fn fixture_keys(&self) -> Vec<String> {
        self.used.lock().expect("used lock").iter().cloned().collect()
    }
}

/// Forwards to an inner backend and writes every exchange as a fixture.
pub struct RecordingBackend<B> {
    inner: B,
    dir: PathBuf,
    written: Mutex<BTreeSet<String>>,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            inner,
            dir,
            written: Mutex::new(BTreeSet::new()),
        })
    }

    pub fn into_inner(self) -> B {
        self.inner
    }

    fn write(
        &self,
        kind: RequestKind,
        prompt: &str,
        continuation: &str,
        params: &SamplingParams,
        response: FixtureResponse,
    ) -> Result<()> {
        let fx = Fixture {
            key: request_key(kind, prompt, continuation, params),
            backend_id: self.inner.id(),
            chars_per_token: self.inner.chars_per_token(),
            kind,
            prompt: prompt.to_string(),
            continuation: continuation.to_string(),
            params: params.clone(),
            response,
        };
        let mut text = serde_json::to_string_pretty(&fx)?;
        text.push('\n');
        fs::write(fx.path_in(&self.dir), text)?;
        self.written.lock().expect("written lock").insert(fx.key);
        Ok(())
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn complete(&self, prompt: &str, params: &SamplingParams) -> Result<Vec<CompletionResult>> {
        let completions = self.inner.complete(prompt, params)?;
        self.write(
            RequestKind::Complete,
            prompt,
            "",
            params,
            FixtureResponse::Complete {
                completions: completions.clone(),
            },
        )?;
        Ok(completions)
    }

    fn score(&self, prompt: &str, continuation: &str, params: &SamplingParams) -> Result<ScoreResult> {
        let result = self.inner.score(prompt, continuation, params)?;
        self.write(
            RequestKind::Score,
            prompt,
            continuation,
            params,
            FixtureResponse::Score {
                result: result.clone(),
            },
        )?;
        Ok(result)
    }

    fn chars_per_token(&self) -> f64 {
        self.inner.chars_per_token()
    }

    fn fixture_keys(&self) -> Vec<String> {
        self.written.lock().expect("written lock").iter().cloned().collect()
    }
}
