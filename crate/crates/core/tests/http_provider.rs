use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;

use rac_forge::provider::{complete_with_retry, Backoff, ChatProvider, ChatRequest, HttpProvider};
use rac_forge::ProviderError;

struct Captured {
    request_line: String,
    authorization: Option<String>,
    body: serde_json::Value,
}

/// Serve the given (status, body) responses in order, one per connection.
fn stub(responses: Vec<(u16, String)>) -> (String, mpsc::Receiver<Captured>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut len = 0;
            let mut authorization = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (k, v) = line.split_once(':').unwrap();
                match k.to_ascii_lowercase().as_str() {
                    "content-length" => len = v.trim().parse().unwrap(),
                    "authorization" => authorization = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let _ = tx.send(Captured {
                request_line: request_line.trim_end().to_string(),
                authorization,
                body: serde_json::from_slice(&buf).unwrap(),
            });
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (format!("http://{addr}/v1"), rx)
}

fn ok_body(text: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

fn request() -> ChatRequest {
    let mut r = ChatRequest::user("gpt-4", "hello");
    r.temperature = 0.5;
    r
}

#[test]
fn posts_openai_shape_with_bearer_token() {
    let (base, rx) = stub(vec![(200, ok_body("Answer: C"))]);
    let p = HttpProvider::new(base, Some("sekrit".into()));
    assert_eq!(p.complete(&request()).unwrap(), "Answer: C");
    let c = rx.recv().unwrap();
    assert_eq!(c.request_line, "POST /v1/chat/completions HTTP/1.1");
    assert_eq!(c.authorization.as_deref(), Some("Bearer sekrit"));
    assert_eq!(c.body["model"], "gpt-4");
    assert_eq!(c.body["messages"][0]["role"], "user");
    assert_eq!(c.body["messages"][0]["content"], "hello");
    assert_eq!(c.body["temperature"], 0.5);
    assert_eq!(c.body["top_p"], 1.0);
}

#[test]
fn auth_failure_is_not_retried() {
    let (base, _rx) = stub(vec![(401, "{}".into())]);
    let p = HttpProvider::new(base, None);
    let (res, attempts) = complete_with_retry(&p, &request(), 3, &Backoff::none());
    assert!(matches!(res, Err(ProviderError::Auth { status: 401 })));
    assert_eq!(attempts, 1);
}

#[test]
fn server_errors_are_retried() {
    let (base, _rx) = stub(vec![
        (503, "busy".into()),
        (429, "slow down".into()),
        (200, ok_body("B")),
    ]);
    let p = HttpProvider::new(base, None);
    let (res, attempts) = complete_with_retry(&p, &request(), 3, &Backoff::none());
    assert_eq!(res.unwrap(), "B");
    assert_eq!(attempts, 3);
}

#[test]
fn malformed_body() {
    let (base, _rx) = stub(vec![(200, "{\"choices\": []}".into())]);
    let p = HttpProvider::new(base, None);
    assert!(matches!(p.complete(&request()), Err(ProviderError::Malformed(_))));
}

#[test]
fn connection_refused_is_transport() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let p = HttpProvider::new(format!("http://127.0.0.1:{port}"), None);
    let err = p.complete(&request()).unwrap_err();
    assert!(matches!(err, ProviderError::Transport(_)));
    assert!(err.is_retryable());
}
