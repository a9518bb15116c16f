//! Drive the HTTP API in-process: list datasets, read frame metadata, and
//! sweep the speed of sound for one frame the way the tuning UI does.

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use base64::Engine as _;
use oatk::config::EngineConfig;
use oatk::service::{router, AppState};
use oatk_core::acoustic::ForwardOperator;
use oatk_core::io::{decode_image, write_sinogram};
use oatk_core::ArrayGeometry;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &axum::Router, req: Request<Body>) -> (StatusCode, Value) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = tempfile::tempdir()?;
    let mut cfg = EngineConfig::default();
    cfg.geometry = ArrayGeometry {
        n_detectors: 64,
        ..ArrayGeometry::default().with_time_window(512, 800)
    };
    cfg.image_size = 64;
    cfg.fov_m = 0.0064;
    cfg.dataset_root = root.path().to_path_buf();

    // One dataset with a single point-source frame recorded at 1500 m/s.
    let dir = root.path().join("point");
    std::fs::create_dir(&dir)?;
    let op = ForwardOperator::new(cfg.geometry.clone(), cfg.grid(), 1500.0, cfg.eir.clone())?;
    let mut p = cfg.grid().zeros();
    p.pixels[[28, 36]] = 1.0;
    write_sinogram(&op.forward(&p)?, dir.join("frame0.oasg"))?;

    let app = router(Arc::new(AppState::load(cfg)?));
    let (_, list) = call(&app, Request::get("/api/datasets").body(Body::empty())?).await;
    println!("datasets: {list}");
    let (_, meta) = call(&app, Request::get("/api/datasets/point/frames/0/meta").body(Body::empty())?).await;
    println!("frame meta: {meta}");

    for sos in [1490.0, 1500.0, 1503.0, 1510.0] {
        let body = json!({"dataset_id": "point", "frame_index": 0, "method": "bp", "sos_mps": sos});
        let req = Request::post("/api/recon")
            .header("content-type", "application/json")
            .body(Body::from(body.to_string()))?;
        let (status, v) = call(&app, req).await;
        if status != StatusCode::OK {
            println!("sos {sos}: {status} {}", v["error"]);
            continue;
        }
        let oaim = base64::engine::general_purpose::STANDARD.decode(v["image"]["oaim_base64"].as_str().unwrap())?;
        let img = decode_image(&oaim)?;
        println!(
            "sos {sos}: R = {:.4}, peak at {:?}, {:.1} ms",
            v["residual_norm"].as_f64().unwrap(),
            img.argmax(),
            v["elapsed_ms"].as_f64().unwrap()
        );
    }
    Ok(())
}
