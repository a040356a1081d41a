//! Loopback HTTP front for the site service.

use std::net::{SocketAddr, TcpListener};
use std::thread::JoinHandle;
use std::time::Duration;

use axum::extract::State;
use axum::http::{StatusCode, Uri};
use axum::response::Html;
use axum::routing::get;
use axum::Router;
use tokio::sync::oneshot;

use super::pages::SiteService;

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: std::io::Error },
    #[error("server runtime failed: {0}")]
    Runtime(std::io::Error),
}

/// Routes `/site/{id}` and `/site/{id}/search`, delaying every answer by
/// the site's `collect_latency_ms`.
pub fn site_router(service: SiteService) -> Router {
    Router::new()
        .route("/site/{id}", get(site_handler))
        .route("/site/{id}/search", get(site_handler))
        .with_state(service)
}

async fn site_handler(State(service): State<SiteService>, uri: Uri) -> (StatusCode, Html<String>) {
    let path = uri.path_and_query().map_or(uri.path(), |p| p.as_str());
    let resp = service.respond(path);
    if resp.latency_ms > 0 {
        tokio::time::sleep(Duration::from_millis(resp.latency_ms)).await;
    }
    (
        StatusCode::from_u16(resp.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
        Html(resp.body),
    )
}

/// A server running on its own thread until dropped or shut down.
pub struct RunningServer {
    addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<Result<(), ServeError>>>,
}

impl RunningServer {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(mut self) -> Result<(), ServeError> {
        self.stop()
    }

    /// Blocks until the server exits on its own.
    pub fn wait(mut self) -> Result<(), ServeError> {
        match self.thread.take() {
            Some(t) => t.join().unwrap_or(Ok(())),
            None => Ok(()),
        }
    }

    fn stop(&mut self) -> Result<(), ServeError> {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().unwrap_or(Ok(())),
            None => Ok(()),
        }
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        let _ = self.stop();
    }
}

pub fn serve(service: SiteService, bind_address: &str) -> Result<RunningServer, ServeError> {
    serve_router(site_router(service), bind_address)
}

pub fn serve_router(router: Router, bind_address: &str) -> Result<RunningServer, ServeError> {
    let bind_err = |source| ServeError::Bind {
        addr: bind_address.to_string(),
        source,
    };
    let listener = TcpListener::bind(bind_address).map_err(bind_err)?;
    listener.set_nonblocking(true).map_err(bind_err)?;
    let addr = listener.local_addr().map_err(bind_err)?;
    let (tx, rx) = oneshot::channel::<()>();
    let thread = std::thread::Builder::new()
        .name("site-server".into())
        .spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(4)
                .enable_all()
                .build()
                .map_err(ServeError::Runtime)?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).map_err(ServeError::Runtime)?;
                axum::serve(listener, router)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
                    .map_err(ServeError::Runtime)
            })
        })
        .map_err(ServeError::Runtime)?;
    Ok(RunningServer {
        addr,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}
