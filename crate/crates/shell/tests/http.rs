use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::response::Response;
use gsign::config::ServiceConfig;
use gsign::server::{router, AppState};
use http_body_util::BodyExt;
use tower::ServiceExt;

async fn get(app: &axum::Router, uri: &str) -> Response {
    app.clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap()
}

async fn bytes(resp: Response) -> Vec<u8> {
    resp.into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec()
}

async fn json(resp: Response) -> serde_json::Value {
    serde_json::from_slice(&bytes(resp).await).unwrap()
}

fn app() -> axum::Router {
    router(AppState::new(ServiceConfig::default()))
}

#[tokio::test]
async fn health() {
    let resp = get(&app(), "/api/health").await;
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(bytes(resp).await, b"ok");
}

#[tokio::test]
async fn orbit_detects_period_51() {
    let resp = get(
        &app(),
        "/api/orbit?alpha=0.00702367&z=2.0176%2B4.8585i&n=5000",
    )
    .await;
    assert_eq!(resp.status(), StatusCode::OK);
    let v = json(resp).await;
    assert_eq!(v["period"]["p"], 51);
    assert_eq!(v["horizon"], 5000);
    assert_eq!(v["signs"].as_array().unwrap().len(), 5000);
}

#[tokio::test]
async fn regions_for_one_half() {
    let v = json(get(&app(), "/api/regions?alpha=0.5").await).await;
    assert_eq!(v["minus_disk"]["radius"], 0.5);
    assert_eq!(v["plus_disk"]["radius"], 0.5);
    let center = |key: &str| -> Vec<f64> {
        v[key]["center"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect()
    };
    assert_eq!(center("minus_disk"), [0.5, 0.0]);
    assert_eq!(center("plus_disk"), [-0.5, 0.0]);
}

#[tokio::test]
async fn tiles_are_cached_and_identical() {
    let app = app();
    let uri = "/api/tile?rect=-2,2,-2,2&res=16x8&alpha=sqrt(2)&steps=300";
    let first = get(&app, uri).await;
    assert_eq!(first.status(), StatusCode::OK);
    assert_eq!(first.headers()["x-cache"], "miss");
    assert_eq!(first.headers()["x-width"], "16");
    assert_eq!(first.headers()["x-height"], "8");
    assert_eq!(first.headers()["x-alpha-hex"], "0x3ff6a09e667f3bcd");
    let a = bytes(first).await;
    let second = get(&app, uri).await;
    assert_eq!(second.headers()["x-cache"], "hit");
    let b = bytes(second).await;
    assert_eq!(a.len(), 16 * 8 * 4);
    assert_eq!(a, b);
}

#[tokio::test]
async fn bad_expression_reports_position() {
    let resp = get(&app(), "/api/orbit?alpha=sqrt(2&z=0").await;
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    let v = json(resp).await;
    assert_eq!(v["field"], "alpha");
    assert_eq!(v["input"], "sqrt(2");
    assert!(v["position"].is_u64());
    let missing = get(&app(), "/api/orbit?alpha=0.3").await;
    assert_eq!(missing.status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn oversized_requests_are_refused() {
    let app = app();
    let resp = get(&app, "/api/orbit?alpha=0.3&z=0&n=100000000").await;
    assert_eq!(resp.status(), StatusCode::PAYLOAD_TOO_LARGE);
    let resp = get(&app, "/api/tile?rect=-2,2,-2,2&res=4096&alpha=0.3&steps=10").await;
    assert_eq!(resp.status(), StatusCode::PAYLOAD_TOO_LARGE);
    let resp = get(
        &app,
        "/api/tile?rect=-2,2,-2,2&res=4&alpha=0.3&steps=1000000000",
    )
    .await;
    assert_eq!(resp.status(), StatusCode::PAYLOAD_TOO_LARGE);
}
