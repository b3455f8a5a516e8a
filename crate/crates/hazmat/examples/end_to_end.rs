//! Whole chain in one run: scenario file -> deterministic simulation ->
//! portal reads -> relay/aggregator delivery -> dispatch store -> queries.
//! A crash is injected at t = 200 s; GSM stays up.
//!
//! Run with: cargo run --example end_to_end

use hazmat::fixtures::write_demo;
use hazmat::sim::run_from_file;

fn main() {
    let dir = tempfile::tempdir().expect("tempdir");
    let scenario_path = write_demo(dir.path(), true, false).expect("write demo scenario");
    println!("scenario: {}", scenario_path.display());

    let out = run_from_file(&scenario_path).expect("simulation runs");

    println!("\n--- metrics ---\n{}", out.metrics.render());

    println!("--- truck 1001 track ---");
    for (portal, t) in out.store.track(1001) {
        println!("  t={t:8.1}  portal {portal}");
    }

    println!("\n--- alerts ---");
    for alert in out.store.active_alerts() {
        println!(
            "  t={:8.1}  {}  unit {} seq {}  pos {:?}  substance code {}",
            alert.t, alert.alarm_code, alert.unit_id, alert.seq_no, alert.position, alert.card.s_id
        );
    }

    let report = out.store.report(0.0, 250.0).unwrap();
    println!("\n--- report [0, 250) ---\n{}", report.render());

    println!("--- first sim log lines ---");
    for line in out.sim_log.lines().take(8) {
        println!("  {line}");
    }
    println!("  ... {} lines total", out.sim_log.lines().count());
}
