//! Minimal scripted HTTP server implementing the adapter wire contract.
//!
//! Serves fixed responses keyed by path prefix on an ephemeral local port.
//! Used by adapter tests and the offline demo; no external dependencies.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

/// One scripted route: the first route whose `path_prefix` matches the
/// request path is served.
#[derive(Debug, Clone)]
pub struct StubRoute {
    pub path_prefix: String,
    pub status: u16,
    pub body: String,
}

impl StubRoute {
    pub fn new(path_prefix: impl Into<String>, status: u16, body: impl Into<String>) -> Self {
        Self {
            path_prefix: path_prefix.into(),
            status,
            body: body.into(),
        }
    }
}

/// Scripted HTTP server on 127.0.0.1 with an ephemeral port. Shuts down on
/// drop. Request lines are logged for assertions.
pub struct StubServer {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
    requests: Arc<Mutex<Vec<String>>>,
}

impl StubServer {
    pub fn start(routes: Vec<StubRoute>) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let shutdown = Arc::new(AtomicBool::new(false));
        let requests = Arc::new(Mutex::new(Vec::new()));

        let worker_shutdown = Arc::clone(&shutdown);
        let worker_requests = Arc::clone(&requests);
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if worker_shutdown.load(Ordering::SeqCst) {
                    break;
                }
                if let Ok(stream) = stream {
                    let _ = serve_one(stream, &routes, &worker_requests);
                }
            }
        });

        Ok(Self {
            addr,
            shutdown,
            handle: Some(handle),
            requests,
        })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Request lines seen so far ("GET /search?q=x&k=3").
    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().expect("request log lock").clone()
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock the accept loop with one last connection.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve_one(
    stream: TcpStream,
    routes: &[StubRoute],
    requests: &Mutex<Vec<String>>,
) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let request_line = request_line.trim().to_string();
    if request_line.is_empty() {
        return Ok(());
    }
    // Drain headers; GET requests carry no body we care about.
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header)? == 0 || header.trim().is_empty() {
            break;
        }
    }
    requests
        .lock()
        .expect("request log lock")
        .push(request_line.clone());

    let path = request_line
        .split_whitespace()
        .nth(1)
        .unwrap_or("/")
        .to_string();
    let route = routes.iter().find(|r| path.starts_with(&r.path_prefix));
    let (status, body) = match route {
        Some(r) => (r.status, r.body.clone()),
        None => (404, "{\"error\":\"no such route\"}".to_string()),
    };
    let reason = match status {
        200 => "OK",
        404 => "Not Found",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        _ => "Status",
    };
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    stream.flush()
}
