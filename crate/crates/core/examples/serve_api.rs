// Start the HTTP query service on an ephemeral port and call it.
//
// cargo run --example serve_api

use std::error::Error;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;

use starforge::project::ProjectConfig;
use starforge::server::{router, AppState};

fn request(port: u16, method: &str, path: &str, body: &str) -> std::io::Result<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port))?;
    write!(
        stream,
        "{method} {path} HTTP/1.1\r\nHost: localhost\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    let mut response = String::new();
    stream.read_to_string(&mut response)?;
    Ok(response)
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let config = ProjectConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/retail/starforge.toml"))?;
    let cube = starforge::cube::Cube::load(&config.build()?.built);
    let app = router(AppState::new(cube, None), None);

    let listener = TcpListener::bind("127.0.0.1:0")?;
    let port = listener.local_addr()?.port();
    listener.set_nonblocking(true)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.spawn(async move {
        let listener = tokio::net::TcpListener::from_std(listener).expect("listener");
        axum::serve(listener, app).await.expect("serve");
    });

    let meta = request(port, "GET", "/api/meta", "")?;
    println!("{}", meta.lines().last().unwrap_or_default());
    let body = r#"{"group_by":[{"dim":"store","level":"city"}],"measures":["quantity_sum"]}"#;
    let answer = request(port, "POST", "/api/query", body)?;
    println!("{}", answer.lines().last().unwrap_or_default());
    assert!(answer.starts_with("HTTP/1.1 200"));
    let bad = request(port, "POST", "/api/query", r#"{"measures":["nope"]}"#)?;
    println!("{}", bad.lines().last().unwrap_or_default());
    assert!(bad.starts_with("HTTP/1.1 400"));
    runtime.shutdown_background();
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
