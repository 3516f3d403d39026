//! Engine around `cogspeech-core`: corpus and model files, batch scoring,
//! reports, training, the WebSocket server and its replay client.

pub mod batch;
pub mod config;
pub mod corpus;
pub mod features_csv;
pub mod model_io;
pub mod replay;
pub mod report;
pub mod resources;
pub mod responder;
pub mod server;
pub mod session_log;
pub mod synth;
pub mod train;
pub mod wav;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
