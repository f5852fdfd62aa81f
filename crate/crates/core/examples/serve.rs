//! Starts the session service on 127.0.0.1:8080.
//!
//! ```text
//! curl -s --data-binary @fixtures/counter.fodot localhost:8080/sessions
//! curl -s -d '[{"time":1,"elements":[{"key":"button","type":"click"}]}]' localhost:8080/sessions/ID/events
//! ```
use logiviz::service::{serve, ServiceConfig};

#[tokio::main]
async fn main() -> std::io::Result<()> {
    env_logger::init();
    serve("127.0.0.1:8080".parse().unwrap(), ServiceConfig::default()).await
}
