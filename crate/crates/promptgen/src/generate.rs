use std::fs;
use std::path::{Path, PathBuf};

use locavqg_core::{RetryPolicy, TokenBucket};
use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use crate::error::PromptError;
use crate::llm::{LlmClient, LlmConfig, LlmRequest, LlmResponse};
use crate::prompts::PromptPair;

/// On-disk response cache: one JSON file per request hash. Writes are
/// serialized and atomic (temp file + rename); reads are lock-free.
#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, PromptError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| PromptError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Self {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<LlmResponse> {
        let bytes = fs::read(self.path(key)).ok()?;
        serde_json::from_slice(&bytes).ok()
    }

    pub fn put(&self, key: &str, response: &LlmResponse) -> Result<(), PromptError> {
        let _guard = self.write_lock.lock();
        let path = self.path(key);
        let tmp = path.with_extension("json.tmp");
        let io = |source| PromptError::Io {
            path: path.clone(),
            source,
        };
        fs::write(&tmp, serde_json::to_vec(response).expect("response serializes")).map_err(io)?;
        fs::rename(&tmp, &path).map_err(io)
    }
}

/// Result of one generation call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub response: LlmResponse,
    pub attempts: u32,
    pub cached: bool,
}

#[derive(Serialize)]
struct RequestLogEntry<'a> {
    task_id: &'a str,
    backend: String,
    request: &'a LlmRequest,
    response: Option<&'a LlmResponse>,
    attempts: u32,
    cached: bool,
    error: Option<String>,
}

/// Bundles a backend with its sampling config, retry policy, rate limiter,
/// optional response cache and optional per-task request log directory.
pub struct LlmRunner {
    pub client: Box<dyn LlmClient>,
    pub config: LlmConfig,
    pub retry: RetryPolicy,
    pub limiter: TokenBucket,
    pub cache: Option<ResponseCache>,
    pub log_dir: Option<PathBuf>,
}

fn log_file_name(task_id: &str) -> String {
    let safe: String = task_id
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{safe}.json")
}

impl LlmRunner {
    pub fn new(client: Box<dyn LlmClient>, config: LlmConfig) -> Self {
        Self {
            client,
            config,
            retry: RetryPolicy::default(),
            limiter: TokenBucket::unlimited(),
            cache: None,
            log_dir: None,
        }
    }

    fn write_log(&self, entry: &RequestLogEntry<'_>) {
        let Some(dir) = &self.log_dir else { return };
        let write = || -> std::io::Result<()> {
            fs::create_dir_all(dir)?;
            let body = serde_json::to_vec_pretty(entry).map_err(std::io::Error::other)?;
            fs::write(Path::new(dir).join(log_file_name(entry.task_id)), body)
        };
        if let Err(e) = write() {
            log::warn!("could not write request log for {}: {e}", entry.task_id);
        }
    }

    /// Calls the backend (or the cache) for one task.
    pub fn generate_raw(&self, task_id: &str, prompts: &PromptPair) -> Result<Generation, PromptError> {
        self.config.validate()?;
        let request = self.config.request(prompts);
        let backend = self.client.id();
        let key = request.cache_key(&backend);

        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key)) {
            self.write_log(&RequestLogEntry {
                task_id,
                backend,
                request: &request,
                response: Some(&hit),
                attempts: 0,
                cached: true,
                error: None,
            });
            return Ok(Generation {
                response: hit,
                attempts: 0,
                cached: true,
            });
        }

        let mut attempts = 0;
        let outcome = self.retry.run(|n| {
            attempts = n;
            self.limiter.acquire();
            self.client.complete(&request)
        });
        match outcome {
            Ok(response) => {
                if let Some(cache) = &self.cache {
                    cache.put(&key, &response)?;
                }
                self.write_log(&RequestLogEntry {
                    task_id,
                    backend,
                    request: &request,
                    response: Some(&response),
                    attempts,
                    cached: false,
                    error: None,
                });
                Ok(Generation {
                    response,
                    attempts,
                    cached: false,
                })
            }
            Err(e) => {
                self.write_log(&RequestLogEntry {
                    task_id,
                    backend,
                    request: &request,
                    response: None,
                    attempts,
                    cached: false,
                    error: Some(e.to_string()),
                });
                Err(PromptError::Ungenerated {
                    task_id: task_id.to_string(),
                    attempts: e.attempts,
                    reason: e.last.to_string(),
                })
            }
        }
    }
}

/// One-shot generation without cache or log.
pub fn generate_raw(
    prompts: &PromptPair,
    config: &LlmConfig,
    client: &dyn LlmClient,
    retry: &RetryPolicy,
) -> Result<LlmResponse, PromptError> {
    config.validate()?;
    let request = config.request(prompts);
    retry
        .run(|_| client.complete(&request))
        .map_err(|e| PromptError::Ungenerated {
            task_id: String::new(),
            attempts: e.attempts,
            reason: e.last.to_string(),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::LlmError;
    use std::sync::atomic::{AtomicU32, Ordering};

    /// Records every request; fails the first `fail_first` calls.
    struct Instrumented {
        calls: AtomicU32,
        fail_first: u32,
        seen: Mutex<Vec<LlmRequest>>,
    }

    impl Instrumented {
        fn new(fail_first: u32) -> Self {
            Self {
                calls: AtomicU32::new(0),
                fail_first,
                seen: Mutex::new(Vec::new()),
            }
        }
    }

    impl LlmClient for Instrumented {
        fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst) + 1;
            self.seen.lock().push(request.clone());
            if n <= self.fail_first {
                return Err(LlmError::Other(format!("transient {n}")));
            }
            Ok(LlmResponse {
                text: "1. A?\n2. B?".into(),
                usage: None,
            })
        }

        fn id(&self) -> String {
            "instrumented".into()
        }
    }

    impl LlmClient for std::sync::Arc<Instrumented> {
        fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
            (**self).complete(request)
        }

        fn id(&self) -> String {
            (**self).id()
        }
    }

    fn prompts() -> PromptPair {
        PromptPair {
            system_prompt: "sys".into(),
            chat_prompt: "chat".into(),
        }
    }

    #[test]
    fn default_config_reaches_the_backend() {
        let client = Instrumented::new(0);
        let out = generate_raw(&prompts(), &LlmConfig::default(), &client, &RetryPolicy::immediate(3)).unwrap();
        assert_eq!(out.text, "1. A?\n2. B?");
        let seen = client.seen.lock();
        assert_eq!(seen[0].temperature, 0.7);
        assert_eq!(seen[0].presence_penalty, 0.1);
    }

    #[test]
    fn two_failures_then_success_takes_three_calls() {
        let client = Instrumented::new(2);
        let out = generate_raw(&prompts(), &LlmConfig::default(), &client, &RetryPolicy::immediate(3));
        assert!(out.is_ok());
        assert_eq!(client.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn exhausted_retries_flag_task_ungenerated() {
        let client = Instrumented::new(10);
        let err = generate_raw(&prompts(), &LlmConfig::default(), &client, &RetryPolicy::immediate(3))
            .unwrap_err();
        assert!(matches!(err, PromptError::Ungenerated { attempts: 3, .. }));
    }

    #[test]
    fn cache_makes_reruns_free_and_log_is_written() {
        let dir = tempfile::tempdir().unwrap();
        let client = std::sync::Arc::new(Instrumented::new(0));
        let mut runner = LlmRunner::new(Box::new(client.clone()), LlmConfig::default());
        runner.retry = RetryPolicy::immediate(3);
        runner.cache = Some(ResponseCache::open(dir.path().join("cache")).unwrap());
        runner.log_dir = Some(dir.path().join("log"));

        let first = runner.generate_raw("task/1", &prompts()).unwrap();
        assert!(!first.cached);
        let second = runner.generate_raw("task/1", &prompts()).unwrap();
        assert!(second.cached);
        assert_eq!(first.response, second.response);
        assert_eq!(client.calls.load(Ordering::SeqCst), 1);

        let log = fs::read_to_string(dir.path().join("log").join("task_1.json")).unwrap();
        assert!(log.contains("\"cached\": true"));
    }
}
