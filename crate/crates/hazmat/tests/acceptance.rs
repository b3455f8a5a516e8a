//! Acceptance gate: one test per criterion, each printing a single
//! `PASS criterion N` line (visible with `--nocapture`). Tolerances are
//! pinned inside each test; any failure is a hard assert.

mod common;

use common::{crc64_bitwise, random_card, RefInput, RefMode, RefUnit};
use hazmat::card::{decode_card, encode_card, CardError};
use hazmat::crc::crc64;
use hazmat::fixtures::{demo_scenario, methane_card, write_demo, write_registry};
use hazmat::portal::{assign_topology, PortalKind};
use hazmat::registry::load_registry;
use hazmat::sim::{run, run_from_file, Fault, FaultKind};
use hazmat::truck::{Mode, TruckUnit, UnitConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn criterion_01_card_blob_is_exactly_512_bytes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x01);
    for _ in 0..1000 {
        let card = random_card(&mut rng);
        let blob = encode_card(&card).expect("random card is valid");
        assert_eq!(blob.as_bytes().len(), 512);
    }
    println!("PASS criterion 1: 1000 random valid cards all encode to exactly 512 bytes");
}

#[test]
fn criterion_02_roundtrip_identity_both_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x02);
    for _ in 0..1000 {
        let card = random_card(&mut rng);
        // decode(encode(card)) == card
        let blob = encode_card(&card).unwrap();
        let back = decode_card(blob.as_bytes()).unwrap();
        assert_eq!(back, card);
        // encode(decode(blob)) == blob
        let blob2 = encode_card(&back).unwrap();
        assert_eq!(blob2.as_bytes(), blob.as_bytes());
    }
    println!("PASS criterion 2: decode(encode) and encode(decode) are identities on 1000 cards");
}

#[test]
fn criterion_03_every_protected_byte_flip_fails_ecc() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x03);
    let blob = encode_card(&random_card(&mut rng)).unwrap();
    for i in 0..504 {
        let mut mutated = blob.as_bytes().to_vec();
        mutated[i] ^= 0xFF;
        assert_eq!(
            decode_card(&mutated).unwrap_err(),
            CardError::EccMismatch,
            "flip of byte {i} was not detected"
        );
    }
    println!("PASS criterion 3: all 504 single-byte corruptions detected as EccMismatch");
}

#[test]
fn criterion_04_crc64_matches_bitwise_oracle() {
    assert_eq!(crc64_bitwise(b"123456789"), 0x6C40_DF5F_0B49_7347);
    assert_eq!(crc64(b"123456789"), crc64_bitwise(b"123456789"));
    let mut rng = ChaCha8Rng::seed_from_u64(0x04);
    for _ in 0..10_000 {
        let len = rng.gen_range(0..256);
        let data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        assert_eq!(crc64(&data), crc64_bitwise(&data));
    }
    println!("PASS criterion 4: table CRC-64 equals bitwise shift-register oracle on 10000 inputs");
}

#[test]
fn criterion_05_topology_ratio_and_chain_termination() {
    for n in 1..=100usize {
        let positions: Vec<f64> = (0..n).map(|i| i as f64 * 100.0).collect();
        let portals = assign_topology(&positions, 10).unwrap();
        // every aggregator serves at most 10 readers (itself included)
        for agg in portals.iter().filter(|p| p.kind == PortalKind::Aggregator) {
            let served =
                portals.iter().filter(|p| p.assigned_aggregator == agg.portal_id).count();
            assert!(served <= 10, "n={n}: aggregator {} serves {served}", agg.portal_id);
        }
        // every relay chain is acyclic and ends at the assigned aggregator
        for relay in portals.iter().filter(|p| p.kind == PortalKind::Relay) {
            let mut current = relay;
            let mut hops = 0;
            while current.kind == PortalKind::Relay {
                hops += 1;
                assert!(hops <= n, "n={n}: cycle from relay {}", relay.portal_id);
                let next = current.next_hop.expect("relay has a next hop");
                current = portals.iter().find(|p| p.portal_id == next).unwrap();
            }
            assert_eq!(current.portal_id, relay.assigned_aggregator);
        }
    }
    println!("PASS criterion 5: ratio<=10 and chain termination hold for 1..=100 portals");
}

#[test]
fn criterion_06_read_range_gate_with_inclusive_boundary() {
    let tags = vec![(17u32, methane_card())];
    let mut portals = assign_topology(&[1000.0], 10).unwrap();
    let portal = &mut portals[0];
    // default range: 12 m in, 12 m is the last included offset
    assert!(portal.observe(1000.0 - 12.0, &tags, 0.0).is_some());
    assert!(portal.observe(1000.0 + 12.1, &tags, 10.0).is_none());
    assert!(portal.observe(1000.0 + 12.0, &tags, 20.0).is_some());
    // boundary follows the configured range
    portal.read_range_m = 7.5;
    assert!(portal.observe(1000.0 + 7.5, &tags, 30.0).is_some());
    assert!(portal.observe(1000.0 - 7.6, &tags, 40.0).is_none());
    println!("PASS criterion 6: reads occur at offsets <= range (boundary inclusive), never beyond");
}

#[test]
fn criterion_07_crash_delivers_one_alert_resolving_to_methane() {
    let dir = tempfile::tempdir().unwrap();
    let scenario_path = write_demo(dir.path(), true, false).unwrap();
    let out = run_from_file(&scenario_path).unwrap();

    let alerts = out.store.active_alerts();
    assert_eq!(alerts.len(), 1, "expected exactly one alert");
    assert_eq!(alerts[0].alarm_code, "ALERT ACCIDENT");

    let reg_dir = tempfile::tempdir().unwrap();
    write_registry(reg_dir.path()).unwrap();
    let registry = load_registry(reg_dir.path()).unwrap();
    let sheet = registry.resolve_card(&alerts[0].card);
    assert_eq!(sheet.substance_name, "methane");

    assert_eq!(out.metrics.alert_latencies_s.len(), 1);
    assert!(
        out.metrics.alert_latencies_s[0] <= 2.0 * 0.1 + 1e-9,
        "latency {} s exceeds 2 ticks",
        out.metrics.alert_latencies_s[0]
    );
    println!("PASS criterion 7: one ALERT ACCIDENT delivered, s_id resolves to methane, latency <= 2 ticks");
}

#[test]
fn criterion_08_gsm_outage_zero_alerts_but_portable_path_works() {
    let dir = tempfile::tempdir().unwrap();
    let scenario_path = write_demo(dir.path(), true, true).unwrap();
    let out = run_from_file(&scenario_path).unwrap();
    assert_eq!(out.store.alerts_len(), 0, "no alert may reach dispatch with GSM down");

    let reg_dir = tempfile::tempdir().unwrap();
    write_registry(reg_dir.path()).unwrap();
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_hazmat"))
        .args(["portable", "--card"])
        .arg(dir.path().join("methane.hmc"))
        .arg("--registry")
        .arg(reg_dir.path())
        .output()
        .unwrap();
    assert!(output.status.success(), "portable exited with {:?}", output.status);
    let stdout = String::from_utf8(output.stdout).unwrap();
    for needle in
        ["methane", "dry chemical powder", "water spray", "flammable gas (class 2.1)", "1971"]
    {
        assert!(stdout.contains(needle), "portable output misses '{needle}':\n{stdout}");
    }
    println!("PASS criterion 8: GSM outage delivers zero alerts; portable reader prints full sheet");
}

#[test]
fn criterion_09_conservation_and_no_duplicates_under_random_faults() {
    let cards = vec![methane_card()];
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut scenario = demo_scenario("unused", false, false);
        scenario.seed = seed;
        // random link and GSM fault schedule
        for target in [1u64, 3] {
            if rng.gen_bool(0.6) {
                let a = rng.gen_range(0.0..scenario.duration);
                let b = rng.gen_range(a..=scenario.duration);
                scenario.faults.push(Fault {
                    kind: FaultKind::LinkDown,
                    target,
                    t_start: a,
                    t_end: b,
                });
            }
        }
        if rng.gen_bool(0.6) {
            let a = rng.gen_range(0.0..scenario.duration);
            let b = rng.gen_range(a..=scenario.duration);
            let target = if rng.gen_bool(0.5) { 0 } else { 2 };
            scenario.faults.push(Fault { kind: FaultKind::GsmDown, target, t_start: a, t_end: b });
        }

        let out = run(&scenario, &cards).unwrap();
        let m = &out.metrics;
        assert_eq!(
            m.events_created,
            m.events_delivered + m.events_queued + m.events_backup_only,
            "seed {seed}: conservation violated"
        );
        // no duplicate event id ever reaches the store
        let mut delivered: Vec<&str> = out
            .sim_log
            .lines()
            .filter(|l| l.contains("|DISPATCH_READ|"))
            .map(|l| l.rsplit('|').next().unwrap())
            .collect();
        let before = delivered.len();
        delivered.sort_unstable();
        delivered.dedup();
        assert_eq!(before, delivered.len(), "seed {seed}: duplicate event at dispatch");
    }
    println!("PASS criterion 9: conservation and dispatch uniqueness hold across 100 fault schedules");
}

#[test]
fn criterion_10_same_seed_runs_are_byte_identical() {
    let mut scenario = demo_scenario("unused", true, false);
    scenario.read_jitter = true;
    scenario.faults.push(Fault { kind: FaultKind::LinkDown, target: 1, t_start: 50.0, t_end: 90.0 });
    let cards = vec![methane_card()];
    let a = run(&scenario, &cards).unwrap();
    let b = run(&scenario, &cards).unwrap();
    assert_eq!(a.sim_log, b.sim_log);
    assert_eq!(a.backup_logs, b.backup_logs);
    assert_eq!(a.dispatch_log, b.dispatch_log);
    assert_eq!(a.blackbox_logs, b.blackbox_logs);
    println!("PASS criterion 10: identical seeds give byte-identical sim, backup and dispatch logs");
}

#[test]
fn criterion_11_state_machine_matches_reference_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11);
    for stream in 0..1000 {
        let mut unit = TruckUnit::new(1, UnitConfig::default());
        let mut reference = RefUnit::new();
        let mut t = 0.0;
        for step in 0..50 {
            t += rng.gen_range(0.05..0.5);
            let input = if rng.gen_bool(0.6) {
                let spike = rng.gen_bool(0.1);
                let accel = [
                    if spike { rng.gen_range(-60.0..60.0) } else { rng.gen_range(-5.0..5.0) },
                    rng.gen_range(-2.0..2.0),
                    9.81 + rng.gen_range(-1.0..1.0),
                ];
                let roll_deg =
                    if rng.gen_bool(0.1) { rng.gen_range(-90.0..90.0) } else { 0.0 };
                RefInput::Sample { t, accel, roll_deg }
            } else {
                RefInput::Fix { t, speed_kmh: rng.gen_range(0.0..120.0) }
            };

            let effects = match input {
                RefInput::Sample { t, accel, roll_deg } => unit
                    .ingest_sample(hazmat::truck::SensorSample { t, accel, roll_angle_deg: roll_deg })
                    .unwrap(),
                RefInput::Fix { t, speed_kmh } => unit
                    .ingest_fix(hazmat::truck::GpsFix { t, lat: 44.9, lon: 26.0, speed_kmh })
                    .unwrap(),
            };
            let got: Vec<&str> = effects.iter().map(|e| e.kind()).collect();
            let want = reference.step(input);
            assert_eq!(got, want, "stream {stream} step {step}: effect divergence");
            let want_mode = match reference.mode {
                RefMode::Normal => Mode::Normal,
                RefMode::Warning => Mode::Warning,
                RefMode::Alerting => Mode::Alerting,
            };
            assert_eq!(unit.mode(), want_mode, "stream {stream} step {step}: mode divergence");
        }
    }
    println!("PASS criterion 11: 1000 random streams, zero divergences from the reference table");
}
