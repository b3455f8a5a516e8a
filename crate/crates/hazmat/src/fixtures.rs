//! Shared demo data: a filled-in methane card, a small code registry and a
//! ready-to-run scenario. Used by unit tests, the acceptance suite and the
//! runnable examples.

use crate::card::{encode_card, CardError, HazmatCard, USER_DEF_LEN};
use crate::sim::{Fault, FaultKind, Road, Scenario, TruckSpec};
use std::io;
use std::path::{Path, PathBuf};

fn user_def(text: &str) -> [u8; USER_DEF_LEN] {
    let mut buf = [0u8; USER_DEF_LEN];
    buf[..text.len()].copy_from_slice(text.as_bytes());
    buf
}

/// Methane tanker card. Substance code 0000002C resolves to "methane" in the
/// registry written by [`write_registry`].
pub fn methane_card() -> HazmatCard {
    HazmatCard {
        c_id: 17,
        t_id: 1001,
        t_rn: "B-77-XYZ".to_string(),
        op_id: 42,
        op_name: "Acme Gas Logistics".to_string(),
        op_phone: "+40211234567".to_string(),
        s_id: "0000002C".to_string(),
        comp_ids: Vec::new(),
        ign_p: "-188".to_string(),
        sig_temp: "537".to_string(),
        exm_ids: vec!["0001".to_string(), "0002".to_string()],
        b_pnt: "-161".to_string(),
        m_pnt: "-182".to_string(),
        s_dens: "0.42".to_string(),
        tox_v: "00".to_string(),
        kemler_no: "23".to_string(),
        onu_no: "1971".to_string(),
        et_ids: vec!["0003".to_string()],
        user_def: user_def("route PL-04 / shift A"),
    }
}

pub fn write_registry(root: &Path) -> io::Result<()> {
    let write = |folder: &str, code: &str, info: &str| -> io::Result<()> {
        let dir = root.join(folder);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join(format!("{code}.txt")), format!("{info}\n"))
    };
    std::fs::create_dir_all(root.join("Comp_id"))?;
    write("S_id", "0000002C", "methane")?;
    write("Exm_id", "0001", "dry chemical powder")?;
    write("Exm_id", "0002", "water spray")?;
    write("Et_id", "0003", "flammable gas (class 2.1)")?;
    Ok(())
}

/// A single-truck scenario on a straight 10 km road with three portals.
/// `card_path` is stored verbatim in the truck spec (relative to wherever
/// the scenario file will live). The optional crash happens at t = 200 s,
/// after the truck has passed all three portals.
pub fn demo_scenario(card_path: &str, with_crash: bool, gsm_down: bool) -> Scenario {
    let duration = 250.0;
    let mut faults = Vec::new();
    if with_crash {
        faults.push(Fault { kind: FaultKind::Crash, target: 1001, t_start: 200.0, t_end: 201.0 });
    }
    if gsm_down {
        faults.push(Fault { kind: FaultKind::GsmDown, target: 0, t_start: 0.0, t_end: duration });
    }
    Scenario {
        seed: 7,
        road: Road { points: vec![(44.93, 26.02), (45.02, 26.11)], length_m: 10_000.0 },
        portals: vec![2_000.0, 2_500.0, 3_000.0],
        aggregator_ratio: 10,
        trucks: vec![TruckSpec {
            t_id: 1001,
            card: card_path.to_string(),
            departure_s: 0.0,
            speed_profile: vec![(0.0, 60.0)],
        }],
        faults,
        duration,
        tick_s: 0.1,
        read_range_m: 12.0,
        read_jitter: false,
    }
}

/// Writes `methane.hmc` plus `scenario.json` into `dir` and returns the
/// scenario path.
pub fn write_demo(dir: &Path, with_crash: bool, gsm_down: bool) -> Result<PathBuf, CardError> {
    let blob = encode_card(&methane_card())?;
    std::fs::write(dir.join("methane.hmc"), blob.as_bytes()).map_err(io_card)?;
    let scenario = demo_scenario("methane.hmc", with_crash, gsm_down);
    let path = dir.join("scenario.json");
    let json = serde_json::to_string_pretty(&scenario).expect("scenario serializes");
    std::fs::write(&path, json).map_err(io_card)?;
    Ok(path)
}

fn io_card(e: io::Error) -> CardError {
    CardError::DumpParse(format!("io: {e}"))
}
