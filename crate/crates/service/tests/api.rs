use std::time::Duration;

use futures::StreamExt;
use ludeme::corpus::{self, TIC_TAC_TOE};
use ludeme::grammar::parse;
use ludeme::metrics::{run_analysis, AnalysisJob, MetricsReport};
use ludeme_service::wire::{MessageType, WireMessage};
use ludeme_service::{router, AppState, ServiceConfig};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

async fn spawn() -> (String, AppState) {
    let state = AppState::new(ServiceConfig::default());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = router(state.clone());
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}"), state)
}

async fn post(url: &str, body: Value) -> (u16, Value) {
    let r = reqwest::Client::new().post(url).json(&body).send().await.unwrap();
    let status = r.status().as_u16();
    (status, r.json().await.unwrap())
}

async fn get(url: &str) -> (u16, Value) {
    let r = reqwest::get(url).await.unwrap();
    let status = r.status().as_u16();
    (status, r.json().await.unwrap())
}

async fn create(base: &str, body: Value) -> Value {
    let (status, v) = post(&format!("{base}/sessions"), body).await;
    assert_eq!(status, 201, "{v}");
    v
}

fn messages(v: &Value) -> Vec<WireMessage> {
    serde_json::from_value(v["messages"].clone()).unwrap()
}

#[tokio::test]
async fn create_tic_tac_toe_session() {
    let (base, _) = spawn().await;
    let v = create(&base, json!({"ludText": TIC_TAC_TOE, "humanSeat": "P1", "ai": "uct:1000"})).await;
    assert_eq!(v["state"]["legalMoves"].as_array().unwrap().len(), 9);
    assert_eq!(v["layout"]["siteCount"], 9);
    assert_eq!((v["layout"]["rows"].clone(), v["layout"]["columns"].clone()), (json!(3), json!(3)));
    assert_eq!(v["name"], "Tic-Tac-Toe");
    assert_eq!(v["seq"], 0);
    let id = v["id"].as_str().unwrap();
    assert_eq!(id.len(), 32);

    let (status, again) = get(&format!("{base}/sessions/{id}")).await;
    assert_eq!(status, 200);
    assert_eq!(again["state"], v["state"]);
    let (status, moves) = get(&format!("{base}/sessions/{id}/moves")).await;
    assert_eq!(status, 200);
    assert_eq!(moves["type"], "legalMoves");
    assert_eq!(moves["payload"]["moves"].as_array().unwrap().len(), 9);
}

#[tokio::test]
async fn creation_errors() {
    let (base, _) = spawn().await;
    let partial = TIC_TAC_TOE.replace("(line length:3)", "?end{(line length:3)|(line length:4)}");
    let (status, v) = post(&format!("{base}/sessions"), json!({"ludText": partial})).await;
    assert_eq!(status, 422);
    assert_eq!(v["code"], "partial_game");
    assert_eq!(v["message"], "partial game; use /reconstruct");

    let (status, v) = post(&format!("{base}/sessions"), json!({"ludText": "(game \"x\" (players 2)"})).await;
    assert_eq!(status, 400);
    assert_eq!(v["code"], "parse_error");
    assert!(v["details"][0]["line"].as_u64().unwrap() >= 1);
    assert!(v["details"][0]["column"].as_u64().is_some());

    let (status, v) = post(&format!("{base}/sessions"), json!({"ludText": TIC_TAC_TOE, "ai": "uct:0"})).await;
    assert_eq!(status, 400, "{v}");

    let (status, v) = post(&format!("{base}/sessions"), json!({"text": TIC_TAC_TOE})).await;
    assert_eq!((status, v["code"].clone()), (400, json!("invalid_json")));

    let (status, v) = get(&format!("{base}/sessions/nope")).await;
    assert_eq!((status, v["code"].clone()), (404, json!("not_found")));
    let (status, _) = post(&format!("{base}/sessions/nope/moves"), json!({"to": 0})).await;
    assert_eq!(status, 404);
}

#[tokio::test]
async fn human_move_gets_an_ai_reply() {
    let (base, _) = spawn().await;
    let v = create(&base, json!({"ludText": TIC_TAC_TOE, "humanSeat": "P1", "ai": "uct:200", "seed": 5})).await;
    let id = v["id"].as_str().unwrap();
    let (status, r) = post(&format!("{base}/sessions/{id}/moves"), json!({"to": 4})).await;
    assert_eq!(status, 200, "{r}");
    let msgs = messages(&r);
    assert_eq!(msgs.len(), 2);
    assert!(msgs.iter().all(|m| m.kind == MessageType::MovePlayed && m.session_id == id));
    assert_eq!((msgs[0].seq, msgs[1].seq), (1, 2));
    assert_eq!(msgs[0].payload["actor"], "human");
    assert_eq!(msgs[1].payload["actor"], "ai");
    assert_eq!(msgs[1].payload["player"], "P2");
    assert_eq!(msgs[1].payload["state"]["legalMoves"].as_array().unwrap().len(), 7);

    // The centre is taken now.
    let (status, r) = post(&format!("{base}/sessions/{id}/moves"), json!({"to": 4})).await;
    assert_eq!((status, r["code"].clone()), (422, json!("illegal_move")));
    assert_eq!(r["details"]["legalMoves"].as_array().unwrap().len(), 7);
    let (_, s) = get(&format!("{base}/sessions/{id}")).await;
    assert_eq!(s["history"].as_array().unwrap().len(), 2);
    assert_eq!(s["seq"], 2);
}

#[tokio::test]
async fn occupied_site_lists_remaining_moves() {
    let (base, _) = spawn().await;
    let v = create(&base, json!({"ludText": TIC_TAC_TOE})).await;
    let id = v["id"].as_str().unwrap();
    let (status, _) = post(&format!("{base}/sessions/{id}/moves"), json!({"to": 4})).await;
    assert_eq!(status, 200);
    let (status, r) = post(&format!("{base}/sessions/{id}/moves"), json!({"to": 4})).await;
    assert_eq!(status, 422);
    assert_eq!(r["details"]["legalMoves"].as_array().unwrap().len(), 8);
    let (status, _) = post(&format!("{base}/sessions/{id}/moves"), json!({"index": 99})).await;
    assert_eq!(status, 422);
}

#[tokio::test]
async fn no_moves_after_the_end() {
    let (base, _) = spawn().await;
    // No human seat: the client enters moves for both sides.
    let v = create(&base, json!({"ludText": TIC_TAC_TOE})).await;
    let id = v["id"].as_str().unwrap();
    let mut last = Value::Null;
    for site in [0, 3, 1, 4, 2] {
        let (status, r) = post(&format!("{base}/sessions/{id}/moves"), json!({"to": site})).await;
        assert_eq!(status, 200);
        last = r;
    }
    let state = &messages(&last)[0].payload["state"];
    assert_eq!(state["statusText"], "P1 wins");
    let (status, r) = post(&format!("{base}/sessions/{id}/moves"), json!({"to": 8})).await;
    assert_eq!((status, r["code"].clone()), (409, json!("game_over")));
}

#[tokio::test]
async fn ai_opens_when_human_plays_second() {
    let (base, _) = spawn().await;
    let v = create(&base, json!({"ludText": TIC_TAC_TOE, "humanSeat": "P2", "ai": "uct:100", "seed": 1})).await;
    assert_eq!(v["history"].as_array().unwrap().len(), 1);
    assert_eq!(v["state"]["mover"], "P2");
    assert_eq!(v["seq"], 1);
}

#[tokio::test]
async fn dice_game_session() {
    let (base, _) = spawn().await;
    let ur = corpus::by_name("Royal Game of Ur").unwrap();
    let v = create(&base, json!({"ludText": ur.text, "humanSeat": "P1", "ai": "random", "seed": 9})).await;
    assert!(v["layout"]["tracks"][0]["sites"].as_array().unwrap().len() > 4);
    let id = v["id"].as_str().unwrap();
    for _ in 0..10 {
        let (_, s) = get(&format!("{base}/sessions/{id}")).await;
        if s["state"]["statusText"] != "ongoing" {
            break;
        }
        let (status, r) = post(&format!("{base}/sessions/{id}/moves"), json!({"index": 0})).await;
        assert_eq!(status, 200, "{r}");
        let msgs = messages(&r);
        for w in msgs.windows(2) {
            assert_eq!(w[1].seq, w[0].seq + 1);
        }
    }
}

#[tokio::test]
async fn events_are_pushed_in_order() {
    let (base, _) = spawn().await;
    let v = create(&base, json!({"ludText": TIC_TAC_TOE, "humanSeat": "P1", "ai": "uct:100", "seed": 2})).await;
    let id = v["id"].as_str().unwrap();
    let ws_url = format!("{}/sessions/{id}/events", base.replace("http", "ws"));
    let (mut ws, _) = tokio_tungstenite::connect_async(ws_url).await.unwrap();
    let snap = next(&mut ws).await;
    assert_eq!((snap.kind, snap.seq), (MessageType::State, 0));
    assert_eq!(snap.payload["legalMoves"].as_array().unwrap().len(), 9);

    let (status, _) = post(&format!("{base}/sessions/{id}/moves"), json!({"to": 0})).await;
    assert_eq!(status, 200);
    let a = next(&mut ws).await;
    let b = next(&mut ws).await;
    assert_eq!((a.kind, a.seq, b.kind, b.seq), (MessageType::MovePlayed, 1, MessageType::MovePlayed, 2));
    assert_eq!(b.payload["actor"], "ai");
}

async fn next<S>(ws: &mut S) -> WireMessage
where
    S: StreamExt<Item = Result<Message, tokio_tungstenite::tungstenite::Error>> + Unpin,
{
    loop {
        if let Message::Text(t) = ws.next().await.unwrap().unwrap() {
            return serde_json::from_str(&t).unwrap();
        }
    }
}

fn tic_tac_toe_job(games: usize, seed: u64) -> AnalysisJob {
    let mut job = AnalysisJob::new(TIC_TAC_TOE, ["random".parse().unwrap(), "random".parse().unwrap()], games, seed);
    job.depth_probe.games = 0;
    job
}

async fn wait_for(base: &str, job_id: &str) -> Value {
    for _ in 0..600 {
        let (status, v) = get(&format!("{base}/analysis/{job_id}")).await;
        assert_eq!(status, 200);
        if v["status"] != "running" {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
    panic!("analysis {job_id} did not finish");
}

#[tokio::test]
async fn analysis_matches_a_direct_run() {
    let (base, _) = spawn().await;
    let jobs = [tic_tac_toe_job(1000, 3), tic_tac_toe_job(300, 4)];
    let mut ids = Vec::new();
    for job in &jobs {
        let (status, v) = post(&format!("{base}/analysis"), serde_json::to_value(job).unwrap()).await;
        assert_eq!(status, 202, "{v}");
        assert_eq!(v["total"], job.games);
        ids.push(v["jobId"].as_str().unwrap().to_string());
    }
    let tree = parse(TIC_TAC_TOE).unwrap();
    for (job, id) in jobs.iter().zip(&ids) {
        let v = wait_for(&base, id).await;
        assert_eq!(v["status"], "done", "{v}");
        assert_eq!(v["done"], job.games);
        let report: MetricsReport = serde_json::from_value(v["report"].clone()).unwrap();
        assert_eq!(report, run_analysis(job, &tree, None).unwrap());
    }
}

#[tokio::test]
async fn analysis_errors() {
    let (base, _) = spawn().await;
    let (status, v) = get(&format!("{base}/analysis/unknown")).await;
    assert_eq!((status, v["code"].clone()), (404, json!("not_found")));

    let mut bad = serde_json::to_value(tic_tac_toe_job(10, 0)).unwrap();
    bad["games"] = json!(0);
    let (status, v) = post(&format!("{base}/analysis"), bad).await;
    assert_eq!((status, v["code"].clone()), (400, json!("invalid_config")));

    let mut by_path = serde_json::to_value(tic_tac_toe_job(10, 0)).unwrap();
    by_path.as_object_mut().unwrap().remove("lud");
    by_path["ludPath"] = json!("/etc/passwd");
    let (status, _) = post(&format!("{base}/analysis"), by_path).await;
    assert_eq!(status, 400);
}

#[tokio::test]
async fn analysis_progress_reaches_the_session_stream() {
    let (base, _) = spawn().await;
    let v = create(&base, json!({"ludText": TIC_TAC_TOE})).await;
    let id = v["id"].as_str().unwrap();
    let ws_url = format!("{}/sessions/{id}/events", base.replace("http", "ws"));
    let (mut ws, _) = tokio_tungstenite::connect_async(ws_url).await.unwrap();
    let (status, _) = post(
        &format!("{base}/analysis?sessionId={id}"),
        serde_json::to_value(tic_tac_toe_job(200, 1)).unwrap(),
    )
    .await;
    assert_eq!(status, 202);
    let mut seqs = Vec::new();
    let mut kinds = Vec::new();
    while let Some(Ok(m)) = ws.next().await {
        let Message::Text(t) = m else { continue };
        let m: WireMessage = serde_json::from_str(&t).unwrap();
        seqs.push(m.seq);
        kinds.push(m.kind);
        if m.kind == MessageType::AnalysisDone {
            assert_eq!(m.payload["status"], "done");
            break;
        }
    }
    ws.close(None).await.unwrap();
    assert_eq!(kinds[0], MessageType::State);
    assert!(kinds.contains(&MessageType::AnalysisProgress));
    // Snapshot first, then consecutive events.
    for w in seqs.windows(2) {
        assert_eq!(w[1], w[0] + 1);
    }
}

#[tokio::test]
async fn idle_sessions_are_evicted() {
    let (base, state) = spawn().await;
    let v = create(&base, json!({"ludText": TIC_TAC_TOE})).await;
    let id = v["id"].as_str().unwrap();
    assert_eq!(state.evict_idle(Duration::from_secs(3600)), 0);
    assert_eq!(state.session_count(), 1);
    tokio::time::sleep(Duration::from_millis(5)).await;
    assert_eq!(state.evict_idle(Duration::ZERO), 1);
    let (status, _) = get(&format!("{base}/sessions/{id}")).await;
    assert_eq!(status, 404);
}
