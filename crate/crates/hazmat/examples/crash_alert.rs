//! The onboard unit as a pure state machine: feed it a crash signature,
//! collect the effects it requests, compose the alert and retry sending it
//! over a flapping channel until the acknowledgment.
//!
//! Run with: cargo run --example crash_alert

use hazmat::fixtures::methane_card;
use hazmat::truck::{Effect, GpsFix, SensorSample, TruckUnit, UnitConfig};

fn main() {
    let mut unit = TruckUnit::new(1001, UnitConfig::default());

    unit.ingest_fix(GpsFix { t: 0.0, lat: 44.9301, lon: 26.0212, speed_kmh: 58.0 }).unwrap();
    let samples = [
        [0.0, 0.0, 9.81],  // cruise
        [48.0, 0.0, 9.81], // impact
        [-45.0, 2.0, 9.81],
    ];
    for (i, accel) in samples.iter().enumerate() {
        let t = 0.1 * (i + 1) as f64;
        let effects =
            unit.ingest_sample(SensorSample { t, accel: *accel, roll_angle_deg: 0.0 }).unwrap();
        for effect in &effects {
            println!("t={t:.1}  effect: {effect:?}");
        }
        if effects.iter().any(|e| matches!(e, Effect::ComposeAlert)) {
            let alert = unit.compose_alert(methane_card(), t);
            println!("t={t:.1}  composed '{}' seq={} pos={:?}", alert.alarm_code, alert.seq_no, alert.position);
        }
    }

    // channel down for a while: the unit keeps the alert and retries forever
    for (t, up) in [(0.4, false), (1.0, false), (2.0, true), (4.0, true), (7.5, true)] {
        for effect in unit.tick(t, up) {
            if let Effect::SendAlert(a) = effect {
                println!("t={t:.1}  send attempt (channel up), seq={}", a.seq_no);
            }
        }
    }
    unit.ack(1);
    println!("dispatch acked seq=1, mode back to {:?}", unit.mode());

    println!("--- blackbox ---\n{}", unit.blackbox_text());
}
