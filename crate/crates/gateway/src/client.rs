//! A small async client for the gateway, used by tests and examples.

use futures::{SinkExt, StreamExt};
use interact_core::replay::{ReplayError, ReplayLog};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{MaybeTlsStream, WebSocketStream};

use crate::wire::{CatalogEntry, ClientCommand, Created, CreateSession, ErrorBody, ServerMessage, SessionState};

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error(transparent)]
    Http(#[from] reqwest::Error),
    #[error(transparent)]
    Ws(#[from] tokio_tungstenite::tungstenite::Error),
    #[error("HTTP {status}: {}", body.error)]
    Status { status: u16, body: ErrorBody },
    #[error("bad message: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Replay(#[from] ReplayError),
}

pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Client {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    async fn checked(res: reqwest::Response) -> Result<reqwest::Response, ClientError> {
        let status = res.status();
        if status.is_success() {
            return Ok(res);
        }
        let text = res.text().await?;
        let body = serde_json::from_str(&text).unwrap_or(ErrorBody {
            error: text,
            available: Vec::new(),
        });
        Err(ClientError::Status {
            status: status.as_u16(),
            body,
        })
    }

    pub async fn scenarios(&self) -> Result<Vec<CatalogEntry>, ClientError> {
        let res = self.http.get(format!("{}/scenarios", self.base)).send().await?;
        Ok(Self::checked(res).await?.json().await?)
    }

    pub async fn create(&self, scenario_id: &str, difficulty: &str) -> Result<String, ClientError> {
        let body = CreateSession {
            scenario_id: scenario_id.into(),
            difficulty: difficulty.into(),
        };
        let res = self.http.post(format!("{}/sessions", self.base)).json(&body).send().await?;
        let created: Created = Self::checked(res).await?.json().await?;
        Ok(created.id)
    }

    pub async fn state(&self, id: &str) -> Result<SessionState, ClientError> {
        let res = self.http.get(format!("{}/sessions/{id}/state", self.base)).send().await?;
        Ok(Self::checked(res).await?.json().await?)
    }

    pub async fn replay_text(&self, id: &str) -> Result<String, ClientError> {
        let res = self.http.get(format!("{}/sessions/{id}/replay", self.base)).send().await?;
        Ok(Self::checked(res).await?.text().await?)
    }

    pub async fn replay(&self, id: &str) -> Result<ReplayLog, ClientError> {
        Ok(ReplayLog::from_jsonl(&self.replay_text(id).await?)?)
    }

    pub async fn stream(&self, id: &str) -> Result<Stream, ClientError> {
        let url = format!("{}/sessions/{id}/stream", self.base.replacen("http", "ws", 1));
        let (ws, _) = tokio_tungstenite::connect_async(url).await?;
        Ok(Stream { ws })
    }
}

/// What arrives on a stream.
#[derive(Clone, Debug, PartialEq)]
pub enum Incoming {
    Message(ServerMessage),
    Closed { code: u16, reason: String },
}

pub struct Stream {
    ws: WebSocketStream<MaybeTlsStream<TcpStream>>,
}

impl Stream {
    pub async fn send(&mut self, cmd: impl Into<ClientCommand>) -> Result<(), ClientError> {
        self.send_raw(&cmd.into().to_json()).await
    }

    pub async fn send_raw(&mut self, text: &str) -> Result<(), ClientError> {
        Ok(self.ws.send(Message::text(text)).await?)
    }

    /// The next message, or `None` once the connection is gone.
    pub async fn next(&mut self) -> Option<Result<Incoming, ClientError>> {
        loop {
            return match self.ws.next().await? {
                Ok(Message::Text(t)) => Some(serde_json::from_str(t.as_str()).map(Incoming::Message).map_err(Into::into)),
                Ok(Message::Close(frame)) => Some(Ok(match frame {
                    Some(f) => Incoming::Closed {
                        code: f.code.into(),
                        reason: f.reason.to_string(),
                    },
                    None => Incoming::Closed {
                        code: 1005,
                        reason: String::new(),
                    },
                })),
                Ok(_) => continue,
                Err(e) => Some(Err(e.into())),
            };
        }
    }

    pub async fn close(mut self) -> Result<(), ClientError> {
        Ok(self.ws.close(None).await?)
    }
}
