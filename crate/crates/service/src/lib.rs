//! Read-only HTTP API over a prebuilt index and a trained classifier.
//!
//! Endpoints:
//! - `GET /search?q&band&k`
//! - `POST /classify` with `{title, abstract}`
//! - `POST /explain` with `{title, abstract, n_samples?, seed?, top_k?}`
//! - `GET /healthz`

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use loe_core::classifier::{explain, Classifier, ExplainParams, TextClassifier};
use loe_core::index::{load_index, FilterBand, Index, SearchHit};
use loe_core::{ClassScores, LoeLabel};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

mod config;

pub use config::ServiceConfig;

/// Largest perturbation count a single explain request may ask for.
pub const MAX_EXPLAIN_SAMPLES: usize = 20_000;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0}")]
    BadRequest(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] loe_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match self {
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.to_string() }))).into_response()
    }
}

fn bad(msg: impl Into<String>) -> ServiceError {
    ServiceError::BadRequest(msg.into())
}

/// Shared immutable state; every handler only reads it.
#[derive(Clone)]
pub struct AppState {
    pub index: Arc<Index>,
    pub model: Arc<dyn Classifier>,
    pub default_band: FilterBand,
    pub max_k: usize,
}

impl AppState {
    pub fn new(index: Index, model: Arc<dyn Classifier>) -> Self {
        AppState {
            index: Arc::new(index),
            model,
            default_band: FilterBand::All,
            max_k: 100,
        }
    }

    /// Loads the index and model named in `config`.
    pub fn load(config: &ServiceConfig) -> Result<Self, ServiceError> {
        config.validate()?;
        let index = load_index(&config.index)?;
        let model = TextClassifier::load(&config.model)?;
        log::info!(
            "loaded index ({} documents) and model {}",
            index.n_docs(),
            model.model_id()
        );
        Ok(AppState {
            index: Arc::new(index),
            model: Arc::new(model),
            default_band: config.default_band,
            max_k: config.max_k,
        })
    }
}

#[derive(Debug, Deserialize)]
pub struct SearchParams {
    pub q: Option<String>,
    pub band: Option<String>,
    pub k: Option<String>,
}

async fn search(
    State(state): State<AppState>,
    params: Result<Query<SearchParams>, QueryRejection>,
) -> Result<Json<Vec<SearchHit>>, ServiceError> {
    let Query(params) = params.map_err(|e| bad(e.body_text()))?;
    let q = params.q.unwrap_or_default();
    if q.trim().is_empty() {
        return Err(bad("query parameter q must not be empty"));
    }
    let band = match params.band.as_deref() {
        None | Some("") => state.default_band,
        Some(b) => b
            .parse()
            .map_err(|_| bad(format!("unknown band {b:?}; expected all, loe3, loe2 or loe1")))?,
    };
    let k = match params.k.as_deref() {
        None | Some("") => 10.min(state.max_k),
        Some(k) => k.parse::<usize>().map_err(|_| bad(format!("k must be a positive integer, got {k:?}")))?,
    };
    if k == 0 || k > state.max_k {
        return Err(bad(format!("k must be between 1 and {}", state.max_k)));
    }
    Ok(Json(state.index.search(&q, band, k)))
}

#[derive(Debug, Clone, Deserialize)]
pub struct DocumentBody {
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
}

impl DocumentBody {
    fn text(&self) -> Result<String, ServiceError> {
        if self.title.trim().is_empty() && self.abstract_text.trim().is_empty() {
            return Err(bad("title and abstract are both empty"));
        }
        Ok(format!("{} {}", self.title, self.abstract_text))
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ClassifyResponse {
    pub band: LoeLabel,
    pub ordinal: usize,
    pub confidences: ClassScores,
    pub model_id: String,
}

fn json_body<T>(body: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    body.map(|Json(b)| b).map_err(|e| bad(e.body_text()))
}

async fn classify(
    State(state): State<AppState>,
    body: Result<Json<DocumentBody>, JsonRejection>,
) -> Result<Json<ClassifyResponse>, ServiceError> {
    let doc = json_body(body)?;
    let text = doc.text()?;
    let p = state.model.classify_text("request", &text);
    Ok(Json(ClassifyResponse {
        band: p.chosen,
        ordinal: p.chosen.ordinal(),
        confidences: p.confidences,
        model_id: state.model.model_id().to_string(),
    }))
}

#[derive(Debug, Clone, Deserialize)]
pub struct ExplainBody {
    #[serde(flatten)]
    pub doc: DocumentBody,
    pub n_samples: Option<usize>,
    pub seed: Option<u64>,
    pub top_k: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct TermScore {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ExplainResponse {
    pub seed: u64,
    pub n_samples: usize,
    pub predicted: LoeLabel,
    pub confidences: ClassScores,
    pub model_id: String,
    /// Top terms per level, strongest first.
    pub terms: std::collections::BTreeMap<LoeLabel, Vec<TermScore>>,
}

async fn explain_handler(
    State(state): State<AppState>,
    body: Result<Json<ExplainBody>, JsonRejection>,
) -> Result<Json<ExplainResponse>, ServiceError> {
    let req = json_body(body)?;
    let text = req.doc.text()?;
    let n_samples = req.n_samples.unwrap_or(ExplainParams::default().n_samples);
    if !(2..=MAX_EXPLAIN_SAMPLES).contains(&n_samples) {
        return Err(bad(format!("n_samples must be between 2 and {MAX_EXPLAIN_SAMPLES}")));
    }
    let top_k = req.top_k.unwrap_or(10);
    if top_k == 0 {
        return Err(bad("top_k must be at least 1"));
    }
    // Kept below 2^53 so browsers can echo it back exactly.
    let seed = req.seed.unwrap_or_else(|| u64::from(rand::random::<u32>()));
    let params = ExplainParams {
        n_samples,
        seed,
        ..Default::default()
    };
    let model = Arc::clone(&state.model);
    let explanation = tokio::task::spawn_blocking(move || {
        let terms = model.tokenizer().tokenize(&text);
        if terms.is_empty() {
            return Err(bad("document has no indexable terms"));
        }
        explain(model.as_ref(), "request", &terms, &params).map_err(ServiceError::from)
    })
    .await
    .map_err(|e| ServiceError::Internal(e.to_string()))??;
    let terms = explanation
        .weights
        .iter()
        .map(|(label, list)| {
            let top = list
                .iter()
                .take(top_k)
                .map(|t| TermScore {
                    term: t.term.clone(),
                    weight: t.weight,
                })
                .collect();
            (*label, top)
        })
        .collect();
    Ok(Json(ExplainResponse {
        seed,
        n_samples,
        predicted: explanation.predicted,
        confidences: explanation.confidences,
        model_id: state.model.model_id().to_string(),
        terms,
    }))
}

async fn healthz(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(serde_json::json!({
        "status": "ok",
        "index_docs": state.index.n_docs(),
        "model_id": state.model.model_id(),
    }))
}

/// The API routes. `cors_origins` lists allowed origins; `"*"` allows any,
/// an empty list disables CORS headers.
pub fn router(state: AppState, cors_origins: &[String]) -> Result<Router, ServiceError> {
    let mut app = Router::new()
        .route("/search", get(search))
        .route("/classify", post(classify))
        .route("/explain", post(explain_handler))
        .route("/healthz", get(healthz))
        .with_state(state);
    if !cors_origins.is_empty() {
        let origin = if cors_origins.iter().any(|o| o == "*") {
            AllowOrigin::from(Any)
        } else {
            let values = cors_origins
                .iter()
                .map(|o| HeaderValue::from_str(o).map_err(|_| ServiceError::Config(format!("bad CORS origin {o:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            AllowOrigin::list(values)
        };
        app = app.layer(CorsLayer::new().allow_origin(origin).allow_methods(Any).allow_headers(Any));
    }
    Ok(app)
}

/// Loads the artifacts and serves until interrupted.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let state = AppState::load(&config)?;
    let app = router(state, &config.cors_origins)?;
    let addr: SocketAddr = config
        .listen
        .parse()
        .map_err(|_| ServiceError::Config(format!("bad listen address {:?}", config.listen)))?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

pub(crate) fn require_file(what: &str, path: &Path) -> Result<PathBuf, ServiceError> {
    if path.is_file() {
        Ok(path.to_path_buf())
    } else {
        Err(ServiceError::Config(format!("{what} {} does not exist", path.display())))
    }
}
