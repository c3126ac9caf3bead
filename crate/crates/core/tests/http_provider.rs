//! HttpProvider against a throwaway local server.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use unithood::counts::{
    snapshot_phrases, CountCache, CountProvider, FunctionWordRate, HttpProvider, PhraseQuery,
    ProviderConfig, ProviderKind, SampleSpace,
};
use unithood::Error;

struct Server {
    base: String,
    hits: Arc<AtomicUsize>,
    paths: Arc<Mutex<Vec<String>>>,
}

/// Serves `respond(decoded_query) -> (status, body)` until the test ends.
fn serve(respond: impl Fn(&str) -> (u16, String) + Send + 'static) -> Server {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let paths = Arc::new(Mutex::new(Vec::new()));
    let (h, p) = (hits.clone(), paths.clone());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            loop {
                let mut header = String::new();
                if reader.read_line(&mut header).unwrap() == 0 || header == "\r\n" {
                    break;
                }
            }
            h.fetch_add(1, Ordering::SeqCst);
            let path = request_line.split_whitespace().nth(1).unwrap_or("").to_string();
            let raw_query = path.split("q=").nth(1).unwrap_or("");
            let decoded = percent_encoding::percent_decode_str(raw_query).decode_utf8_lossy().into_owned();
            p.lock().unwrap().push(path.clone());
            let (status, body) = respond(&decoded);
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(reply.as_bytes());
        }
    });
    Server { base, hits, paths }
}

fn web_counts(query: &str) -> (u16, String) {
    let n = match query {
        "+\"e coli\"" => 900,
        "+\"food poisoning\"" => 700,
        "+\"e coli food poisoning\"" => 55,
        "+\"e coli\" +\"food poisoning\"" => 40,
        "+\"the\"" => 800,
        "+\"is\"" => 450,
        "+\"with\"" => 0,
        _ => 0,
    };
    (200, format!(r#"{{"searchInformation":{{"totalResults":"{n}"}}}}"#))
}

fn provider(server: &Server, cache: CountCache, n: SampleSpace) -> HttpProvider {
    HttpProvider::new(format!("{}/search?q={{query}}", server.base), "searchInformation.totalResults", 1000.0, cache, n)
        .unwrap()
}

#[test]
fn snapshot_from_web_counts_is_clamped() {
    let server = serve(web_counts);
    let p = provider(&server, CountCache::in_memory(), SampleSpace::Fixed(1_000_000));
    let snap = snapshot_phrases(&p, "E. coli", "food poisoning", "E. coli food poisoning").unwrap();
    assert_eq!((snap.n_x, snap.n_y, snap.n_s, snap.n_xy, snap.n), (900, 700, 55, 55, 1_000_000));
    assert!(snap.clamped);
    // phrase and required operators are sent percent-encoded
    let paths = server.paths.lock().unwrap();
    assert!(paths.iter().any(|p| p.ends_with("q=%2B%22e%20coli%22")), "{paths:?}");
}

#[test]
fn warm_cache_avoids_network() {
    let server = serve(web_counts);
    let dir = tempfile::tempdir().unwrap();
    let cache_path = dir.path().join("cache.jsonl");
    let q = PhraseQuery::parse("food poisoning").unwrap();

    let p = provider(&server, CountCache::open(&cache_path).unwrap(), SampleSpace::Fixed(10));
    let first = p.doc_count(&q).unwrap();
    let second = p.doc_count(&q).unwrap();
    assert_eq!((first, second), (700, 700));
    assert_eq!(p.requests_made(), 1);
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);

    // a fresh provider over the same cache file never touches the network
    let reopened = provider(&server, CountCache::open(&cache_path).unwrap(), SampleSpace::Fixed(10));
    assert_eq!(reopened.doc_count(&q).unwrap(), 700);
    assert_eq!(reopened.requests_made(), 0);
    assert_eq!(server.hits.load(Ordering::SeqCst), 1);

    let line = std::fs::read_to_string(&cache_path).unwrap();
    let entry: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    assert_eq!(entry["q"], "+\"food poisoning\"");
    assert_eq!(entry["c"], 700);
}

#[test]
fn sample_space_is_estimated_once_from_function_words() {
    let server = serve(web_counts);
    let rates = vec![
        FunctionWordRate::new("the", 0.8),
        FunctionWordRate::new("is", 0.5),
        FunctionWordRate::new("with", 0.6),
    ];
    let p = provider(&server, CountCache::in_memory(), SampleSpace::Estimated(rates));
    // ratios 1000 and 900; "with" has no hits and is dropped
    assert_eq!(p.sample_space().unwrap(), 950);
    let hits = server.hits.load(Ordering::SeqCst);
    assert_eq!(p.sample_space().unwrap(), 950);
    assert_eq!(server.hits.load(Ordering::SeqCst), hits);
}

#[test]
fn non_integer_count_is_a_format_error() {
    let server = serve(|_| (200, r#"{"searchInformation":{"totalResults":"about 12"}}"#.to_string()));
    let p = provider(&server, CountCache::in_memory(), SampleSpace::Fixed(10));
    let err = p.doc_count(&PhraseQuery::parse("x").unwrap()).unwrap_err();
    assert!(matches!(err, Error::CountFormat { .. }), "{err}");
    assert!(!err.is_retryable());
}

#[test]
fn server_errors_are_retryable_and_carry_the_query() {
    let server = serve(|_| (503, "{}".to_string()));
    let p = provider(&server, CountCache::in_memory(), SampleSpace::Fixed(10));
    let err = p.doc_count(&PhraseQuery::parse("food").unwrap()).unwrap_err();
    assert!(err.is_retryable());
    match err {
        Error::Transport { query, .. } => assert_eq!(query, "+\"food\""),
        other => panic!("{other}"),
    }
    // failures are not cached
    assert!(p.cache().is_empty());
}

#[test]
fn concurrent_reads_share_one_provider() {
    let server = serve(web_counts);
    let p = provider(&server, CountCache::in_memory(), SampleSpace::Fixed(10));
    let q = PhraseQuery::parse("e coli").unwrap();
    thread::scope(|s| {
        for _ in 0..4 {
            s.spawn(|| assert_eq!(p.doc_count(&q).unwrap(), 900));
        }
    });
}

#[test]
fn config_builds_http_provider() {
    let server = serve(web_counts);
    let cfg = ProviderConfig {
        kind: ProviderKind::Http,
        endpoint_template: Some(format!("{}/?q={{query}}", server.base)),
        count_field_path: Some("searchInformation.totalResults".into()),
        fixed_n: Some(5_000),
        rate_limit: 100.0,
        ..Default::default()
    };
    let p = cfg.build().unwrap();
    assert_eq!(p.name(), "http");
    assert_eq!(p.sample_space().unwrap(), 5_000);
    assert_eq!(p.doc_count(&PhraseQuery::parse("e coli").unwrap()).unwrap(), 900);
}
