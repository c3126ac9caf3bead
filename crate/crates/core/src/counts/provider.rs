use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use percent_encoding::{utf8_percent_encode, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};

use super::cache::CountCache;
use super::index::LocalIndex;
use super::phrase::{conjunctive_syntax, PhraseQuery};
use super::snapshot::{estimate_index_size, load_function_word_rates, FunctionWordRate};
use crate::error::{Error, Result};

/// A source of document counts.
///
/// Implementations answer concurrent read queries.
pub trait CountProvider: Send + Sync {
    fn name(&self) -> &'static str;

    /// Documents containing the exact phrase.
    fn doc_count(&self, phrase: &PhraseQuery) -> Result<u64>;

    /// Documents containing both exact phrases.
    fn co_doc_count(&self, a: &PhraseQuery, b: &PhraseQuery) -> Result<u64>;

    /// Total occurrences of the phrase. Only meaningful for local corpora.
    fn occurrence_count(&self, _phrase: &PhraseQuery) -> Result<u64> {
        Err(Error::Unsupported {
            provider: self.name(),
            operation: "occurrence_count",
        })
    }

    /// Size of the sample space `N`.
    fn sample_space(&self) -> Result<u64>;
}

pub struct LocalProvider {
    index: LocalIndex,
    fixed_n: Option<u64>,
}

impl LocalProvider {
    pub fn new(index: LocalIndex) -> Self {
        LocalProvider {
            index,
            fixed_n: None,
        }
    }

    pub fn with_fixed_n(mut self, n: Option<u64>) -> Self {
        self.fixed_n = n;
        self
    }

    pub fn index(&self) -> &LocalIndex {
        &self.index
    }
}

impl CountProvider for LocalProvider {
    fn name(&self) -> &'static str {
        "local"
    }

    fn doc_count(&self, phrase: &PhraseQuery) -> Result<u64> {
        Ok(self.index.doc_count(phrase))
    }

    fn co_doc_count(&self, a: &PhraseQuery, b: &PhraseQuery) -> Result<u64> {
        Ok(self.index.co_doc_count(a, b))
    }

    fn occurrence_count(&self, phrase: &PhraseQuery) -> Result<u64> {
        Ok(self.index.occurrence_count(phrase))
    }

    fn sample_space(&self) -> Result<u64> {
        Ok(self.fixed_n.unwrap_or_else(|| self.index.doc_count_total()))
    }
}

/// Spaces requests at least `1 / rate` seconds apart.
#[derive(Debug)]
struct RateLimiter {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl RateLimiter {
    fn new(per_second: f64) -> Self {
        RateLimiter {
            interval: Duration::from_secs_f64(1.0 / per_second),
            next: Mutex::new(None),
        }
    }

    fn wait(&self) {
        let mut next = self.next.lock().unwrap();
        let now = Instant::now();
        let at = match *next {
            Some(t) if t > now => {
                std::thread::sleep(t - now);
                t
            }
            _ => now,
        };
        *next = Some(at + self.interval);
    }
}

/// How the HTTP provider obtains `N`.
#[derive(Debug, Clone)]
pub enum SampleSpace {
    Fixed(u64),
    /// Estimated on first use from function-word document counts.
    Estimated(Vec<FunctionWordRate>),
}

/// Counts from a web search endpoint, answered from a persistent cache when
/// possible.
pub struct HttpProvider {
    endpoint_template: String,
    count_path: Vec<String>,
    cache: CountCache,
    limiter: RateLimiter,
    agent: ureq::Agent,
    sample_space: SampleSpace,
    estimated_n: OnceLock<u64>,
    requests: AtomicU64,
}

impl HttpProvider {
    pub fn new(
        endpoint_template: impl Into<String>,
        count_field_path: &str,
        rate_limit: f64,
        cache: CountCache,
        sample_space: SampleSpace,
    ) -> Result<Self> {
        let endpoint_template = endpoint_template.into();
        if !endpoint_template.contains("{query}") {
            return Err(Error::InvalidArgument(
                "endpoint template must contain a {query} placeholder".into(),
            ));
        }
        if !(rate_limit > 0.0 && rate_limit.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rate limit must be positive, got {rate_limit}"
            )));
        }
        let count_path: Vec<String> = count_field_path.split('.').map(str::to_string).collect();
        if count_path.iter().any(String::is_empty) {
            return Err(Error::InvalidArgument(format!(
                "bad count field path {count_field_path:?}"
            )));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Ok(HttpProvider {
            endpoint_template,
            count_path,
            cache,
            limiter: RateLimiter::new(rate_limit),
            agent,
            sample_space,
            estimated_n: OnceLock::new(),
            requests: AtomicU64::new(0),
        })
    }

    /// Number of network requests issued so far.
    pub fn requests_made(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    pub fn cache(&self) -> &CountCache {
        &self.cache
    }

    fn count_for_key(&self, key: &str) -> Result<u64> {
        if let Some(c) = self.cache.get(key) {
            return Ok(c);
        }
        self.limiter.wait();
        let encoded = utf8_percent_encode(key, NON_ALPHANUMERIC).to_string();
        let url = self.endpoint_template.replace("{query}", &encoded);
        self.requests.fetch_add(1, Ordering::Relaxed);

        let transport = |message: String| Error::Transport {
            query: key.to_string(),
            message,
        };
        let mut response = self
            .agent
            .get(&url)
            .call()
            .map_err(|e| transport(e.to_string()))?;
        let body = response
            .body_mut()
            .read_to_string()
            .map_err(|e| transport(e.to_string()))?;
        let doc: serde_json::Value =
            serde_json::from_str(&body).map_err(|e| transport(format!("invalid JSON: {e}")))?;
        let count = extract_count(&doc, &self.count_path).map_err(|message| Error::CountFormat {
            query: key.to_string(),
            message,
        })?;
        self.cache.insert(key, count)?;
        Ok(count)
    }
}

/// Follows a dot-separated path into a JSON document and reads a count.
/// Numeric segments index into arrays. Counts may be JSON integers or
/// strings of decimal digits (several search APIs report counts as strings).
pub(crate) fn extract_count(doc: &serde_json::Value, path: &[String]) -> Result<u64, String> {
    let mut cur = doc;
    for seg in path {
        cur = match cur {
            serde_json::Value::Object(map) => map.get(seg),
            serde_json::Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get(i)),
            _ => None,
        }
        .ok_or_else(|| format!("path segment {seg:?} not found"))?;
    }
    match cur {
        serde_json::Value::Number(n) => n
            .as_u64()
            .ok_or_else(|| format!("{n} is not a non-negative integer")),
        serde_json::Value::String(s) if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) => {
            s.parse::<u64>().map_err(|e| e.to_string())
        }
        other => Err(format!("{other} is not an integer count")),
    }
}

impl CountProvider for HttpProvider {
    fn name(&self) -> &'static str {
        "http"
    }

    fn doc_count(&self, phrase: &PhraseQuery) -> Result<u64> {
        self.count_for_key(&phrase.search_syntax())
    }

    fn co_doc_count(&self, a: &PhraseQuery, b: &PhraseQuery) -> Result<u64> {
        self.count_for_key(&conjunctive_syntax(a, b))
    }

    fn sample_space(&self) -> Result<u64> {
        match &self.sample_space {
            SampleSpace::Fixed(n) => Ok(*n),
            SampleSpace::Estimated(rates) => {
                if let Some(n) = self.estimated_n.get() {
                    return Ok(*n);
                }
                let n = estimate_index_size(self, rates)?;
                Ok(*self.estimated_n.get_or_init(|| n))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Local,
    Http,
}

fn default_rate_limit() -> f64 {
    1.0
}

/// Declarative provider settings, as read from a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    #[serde(default)]
    pub kind: ProviderKind,
    /// Local index directory (local provider).
    pub index: Option<PathBuf>,
    /// URL with a `{query}` placeholder (http provider).
    pub endpoint_template: Option<String>,
    /// Dot-separated path to the count in the response JSON (http provider).
    pub count_field_path: Option<String>,
    pub cache_path: Option<PathBuf>,
    #[serde(default = "default_rate_limit")]
    pub rate_limit: f64,
    /// Overrides the sample-space size.
    pub fixed_n: Option<u64>,
    /// Function-word rate file used to estimate `N` when `fixed_n` is unset
    /// (http provider).
    pub function_words: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            kind: ProviderKind::Local,
            index: None,
            endpoint_template: None,
            count_field_path: None,
            cache_path: None,
            rate_limit: default_rate_limit(),
            fixed_n: None,
            function_words: None,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate_limit > 0.0 && self.rate_limit.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rate_limit must be > 0, got {}",
                self.rate_limit
            )));
        }
        match self.kind {
            ProviderKind::Local => {
                if self.index.is_none() {
                    return Err(Error::InvalidArgument("local provider requires an index path".into()));
                }
            }
            ProviderKind::Http => {
                if self.endpoint_template.is_none() || self.count_field_path.is_none() {
                    return Err(Error::InvalidArgument(
                        "http provider requires endpoint_template and count_field_path".into(),
                    ));
                }
                if self.fixed_n.is_none() && self.function_words.is_none() {
                    return Err(Error::InvalidArgument(
                        "http provider requires fixed_n or a function-word rate file".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Box<dyn CountProvider>> {
        self.validate()?;
        match self.kind {
            ProviderKind::Local => {
                let index = LocalIndex::load(self.index.as_deref().unwrap())?;
                Ok(Box::new(LocalProvider::new(index).with_fixed_n(self.fixed_n)))
            }
            ProviderKind::Http => {
                let cache = match &self.cache_path {
                    Some(p) => CountCache::open(p)?,
                    None => CountCache::in_memory(),
                };
                let sample_space = match (self.fixed_n, &self.function_words) {
                    (Some(n), _) => SampleSpace::Fixed(n),
                    (None, Some(path)) => SampleSpace::Estimated(load_function_word_rates(path)?),
                    (None, None) => unreachable!("validated above"),
                };
                Ok(Box::new(HttpProvider::new(
                    self.endpoint_template.clone().unwrap(),
                    self.count_field_path.as_deref().unwrap(),
                    self.rate_limit,
                    cache,
                    sample_space,
                )?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn path(p: &str) -> Vec<String> {
        p.split('.').map(str::to_string).collect()
    }

    #[test]
    fn extract_count_follows_objects_and_arrays() {
        let doc = json!({"a": {"items": [{"n": 7}, {"n": "12"}]}});
        assert_eq!(extract_count(&doc, &path("a.items.0.n")), Ok(7));
        assert_eq!(extract_count(&doc, &path("a.items.1.n")), Ok(12));
        assert!(extract_count(&doc, &path("a.missing")).is_err());
    }

    #[test]
    fn extract_count_rejects_non_integers() {
        for bad in [json!({"n": 1.5}), json!({"n": -3}), json!({"n": "12k"}), json!({"n": null})] {
            assert!(extract_count(&bad, &path("n")).is_err(), "{bad}");
        }
    }

    #[test]
    fn http_config_requires_endpoint_and_count_path() {
        let cfg = ProviderConfig {
            kind: ProviderKind::Http,
            fixed_n: Some(10),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ProviderConfig {
            endpoint_template: Some("http://x/?q={query}".into()),
            count_field_path: Some("n".into()),
            ..cfg
        };
        assert!(cfg.validate().is_ok());
        assert!(ProviderConfig { rate_limit: 0.0, ..cfg }.validate().is_err());
    }

    #[test]
    fn template_without_placeholder_is_rejected() {
        let err = HttpProvider::new("http://x/", "n", 1.0, CountCache::in_memory(), SampleSpace::Fixed(1));
        assert!(err.is_err());
    }

    #[test]
    fn http_provider_has_no_occurrence_counts() {
        let p = HttpProvider::new("http://x/{query}", "n", 1.0, CountCache::in_memory(), SampleSpace::Fixed(1))
            .unwrap();
        let err = p.occurrence_count(&PhraseQuery::parse("a").unwrap()).unwrap_err();
        assert!(matches!(err, Error::Unsupported { provider: "http", .. }));
    }

    #[test]
    fn rate_limiter_spaces_calls() {
        let limiter = RateLimiter::new(50.0);
        let start = Instant::now();
        for _ in 0..4 {
            limiter.wait();
        }
        assert!(start.elapsed() >= Duration::from_millis(55));
    }
}
