use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::sync::Arc;
use std::thread;

use tungstenite::{Message, WebSocket};

use crate::error::{Error, Result};

use super::{Extractor, GestureModel, ServerMessage, Session};

/// WebSocket recognition service: one thread and one [`Session`] per
/// connection, sharing the model and extractor.
#[derive(Debug, Clone)]
pub struct Server {
    model: Arc<GestureModel>,
    extractor: Arc<Extractor>,
}

impl Server {
    pub fn new(model: Arc<GestureModel>) -> Result<Self> {
        let extractor = Arc::new(Extractor::new(&model.config)?);
        Ok(Self { model, extractor })
    }

    pub fn bind(addr: impl ToSocketAddrs) -> Result<TcpListener> {
        Ok(TcpListener::bind(addr)?)
    }

    /// Accepts connections forever, or until `max_connections` have been
    /// accepted and served.
    pub fn run(&self, listener: TcpListener, max_connections: Option<usize>) -> Result<()> {
        let mut handles = Vec::new();
        for (n, stream) in listener.incoming().enumerate() {
            let stream = stream?;
            let server = self.clone();
            handles.push(thread::spawn(move || {
                if let Err(e) = server.serve_connection(stream) {
                    eprintln!("session ended with error: {e}");
                }
            }));
            if max_connections.is_some_and(|m| n + 1 >= m) {
                break;
            }
        }
        for h in handles {
            let _ = h.join();
        }
        Ok(())
    }

    pub fn serve_connection(&self, stream: TcpStream) -> Result<()> {
        let ws = tungstenite::accept(stream).map_err(|e| Error::Stream(e.to_string()))?;
        self.serve_socket(ws)
    }

    fn serve_socket(&self, mut ws: WebSocket<TcpStream>) -> Result<()> {
        let mut session = Session::new(self.model.clone(), self.extractor.clone());
        loop {
            let msg = match ws.read() {
                Ok(m) => m,
                Err(tungstenite::Error::ConnectionClosed | tungstenite::Error::AlreadyClosed) => {
                    return Ok(())
                }
                Err(e) => return Err(Error::Stream(e.to_string())),
            };
            let replies = match msg {
                Message::Text(t) => session.handle_text(t.as_str()),
                Message::Binary(_) => vec![ServerMessage::error("binary messages are not supported")],
                Message::Close(_) => {
                    let _ = ws.flush();
                    continue;
                }
                _ => continue,
            };
            for r in replies {
                ws.send(Message::text(r.to_json()))
                    .map_err(|e| Error::Stream(e.to_string()))?;
            }
        }
    }
}
