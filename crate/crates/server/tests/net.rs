use std::time::Duration;

use swarmsafe::config::{ControllerConfig, ExperimentConfig};
use swarmsafe::controllers::CoverageMode;
use swarmsafe::geometry::{density_at, DensityField, DensityRef};
use swarmsafe::Vec2;
use swarmsafe_server::protocol::{Message, RunState, PROTOCOL_VERSION};
use swarmsafe_server::{start, Client, ServerOptions, Session};
use tokio::net::TcpListener;

fn coverage_config() -> ExperimentConfig {
    ExperimentConfig {
        robots: 6,
        controller: ControllerConfig::Coverage { kappa: 1.0, mode: CoverageMode::Lloyd, resolution: 32, sigma: 0.12, refs: vec![] },
        seed: 11,
        ..Default::default()
    }
}

async fn listener() -> TcpListener {
    TcpListener::bind("127.0.0.1:0").await.unwrap()
}

async fn recv(c: &mut Client) -> Option<Message> {
    tokio::time::timeout(Duration::from_secs(10), c.recv()).await.expect("server silent").map(|m| m.unwrap())
}

#[tokio::test(flavor = "multi_thread")]
async fn broadcasts_at_twenty_hertz() {
    let opts = ServerOptions { max_loops: Some(200), wait_for_clients: 1, ..Default::default() };
    let handle = start(listener().await, Session::new(coverage_config()).unwrap(), opts).unwrap();
    let mut client = Client::connect(handle.local_addr()).await.unwrap();
    let mut states = 0;
    while let Some(m) = recv(&mut client).await {
        if matches!(m, Message::State { .. }) {
            states += 1;
        }
    }
    let session = handle.finished().await;
    assert_eq!(session.world().tick(), 200);
    assert!((39..=41).contains(&states), "{states} state messages in 2 s");
}

#[tokio::test(flavor = "multi_thread")]
async fn runs_without_clients() {
    let opts = ServerOptions { max_loops: Some(300), speed: 50.0, ..Default::default() };
    let handle = start(listener().await, Session::new(coverage_config()).unwrap(), opts).unwrap();
    assert_eq!(handle.finished().await.world().tick(), 300);
}

#[tokio::test(flavor = "multi_thread")]
async fn paused_session_sends_heartbeats_only() {
    let opts = ServerOptions { speed: 5.0, wait_for_clients: 1, ..Default::default() };
    let handle = start(listener().await, Session::new(coverage_config()).unwrap(), opts).unwrap();
    let mut client = Client::connect(handle.local_addr()).await.unwrap();
    client.send(&Message::Pause { v: PROTOCOL_VERSION }).await.unwrap();
    // Skip states queued before the pause took effect.
    let mut heartbeats = Vec::new();
    while heartbeats.len() < 10 {
        match recv(&mut client).await.unwrap() {
            Message::Heartbeat { t, status, .. } => {
                assert_eq!(status, RunState::Paused);
                heartbeats.push(t);
            }
            Message::State { .. } => assert!(heartbeats.is_empty(), "state after heartbeat"),
            other => panic!("unexpected {other:?}"),
        }
    }
    assert!(heartbeats.windows(2).all(|w| w[0] == w[1]));
    client.send(&Message::Resume { v: PROTOCOL_VERSION }).await.unwrap();
    loop {
        if let Message::State { t, .. } = recv(&mut client).await.unwrap() {
            assert!(t > heartbeats[0]);
            break;
        }
    }
    handle.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn errors_are_replied_and_state_kept() {
    let opts = ServerOptions { speed: 5.0, wait_for_clients: 1, ..Default::default() };
    let handle = start(listener().await, Session::new(coverage_config()).unwrap(), opts).unwrap();
    let mut client = Client::connect(handle.local_addr()).await.unwrap();
    client.send_raw(b"{not json").await.unwrap();
    client.send_raw(br#"{"type": "warp", "v": 1}"#).await.unwrap();
    client.send(&Message::SetParam { v: PROTOCOL_VERSION, name: "d_s".into(), value: -1.0 }).await.unwrap();
    client.send(&Message::Hello { v: PROTOCOL_VERSION, role: "test".into() }).await.unwrap();
    let mut errors = Vec::new();
    let mut hello = false;
    while errors.len() < 3 || !hello {
        match recv(&mut client).await.unwrap() {
            Message::Error { reason, .. } => errors.push(reason),
            Message::Hello { role, .. } => {
                assert_eq!(role, "server");
                hello = true;
            }
            _ => {}
        }
    }
    assert!(errors[0].contains("malformed"));
    assert!(errors[1].contains("malformed"));
    assert!(errors[2].contains("out of range"));
    let session = handle.stop().await;
    assert_eq!(session.params().d_s, 0.08);
}

#[tokio::test(flavor = "multi_thread")]
async fn cursor_round_trip_attracts_robots() {
    let opts = ServerOptions { speed: 10.0, wait_for_clients: 1, ..Default::default() };
    let handle = start(listener().await, Session::new(coverage_config()).unwrap(), opts).unwrap();
    let mut client = Client::connect(handle.local_addr()).await.unwrap();
    let cursor = Vec2::new(0.35, 0.3);
    client.send(&Message::CursorAdd { v: PROTOCOL_VERSION, id: 4, x: cursor.x, y: cursor.y, w: 5.0 }).await.unwrap();

    let field = DensityField::with_refs(vec![DensityRef::fixed(4, cursor, 5.0)], 0.12);
    let mass = |robots: &[swarmsafe_server::protocol::RobotSnapshot]| -> f64 {
        robots.iter().map(|r| density_at(&field, Vec2::new(r.x, r.y), 0.0)).sum()
    };
    let mut first: Option<(f64, f64)> = None;
    loop {
        let Message::State { t, robots, density_refs, .. } = recv(&mut client).await.unwrap() else { continue };
        if !density_refs.iter().any(|c| c.id == 4 && c.x == cursor.x && c.y == cursor.y) {
            assert!(first.is_none(), "cursor vanished from a later broadcast");
            continue;
        }
        match first {
            None => first = Some((t, mass(&robots))),
            Some((t0, m0)) if t - t0 >= 1.0 => {
                assert!(mass(&robots) > m0, "mass near cursor did not increase");
                break;
            }
            _ => {}
        }
    }
    handle.stop().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn client_count_is_reported() {
    let opts = ServerOptions { speed: 5.0, wait_for_clients: 2, ..Default::default() };
    let handle = start(listener().await, Session::new(coverage_config()).unwrap(), opts).unwrap();
    let mut a = Client::connect(handle.local_addr()).await.unwrap();
    let _b = Client::connect(handle.local_addr()).await.unwrap();
    loop {
        if let Message::State { clients, .. } = recv(&mut a).await.unwrap() {
            assert_eq!(clients, 2);
            break;
        }
    }
    handle.stop().await;
}
