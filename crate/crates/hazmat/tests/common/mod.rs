//! Shared test helpers: a seeded valid-card generator and independent
//! reference oracles (bitwise CRC-64, truck-unit state table) implemented
//! separately from the library code they check.

// each integration test binary uses a different subset of these helpers
#![allow(dead_code)]

use hazmat::card::{
    HazmatCard, COMP_IDS_MAX, ET_IDS_MAX, EXM_IDS_MAX, OP_NAME_MAX, T_RN_MAX, USER_DEF_LEN,
};
use rand::Rng;

pub fn printable(rng: &mut impl Rng, max: usize) -> String {
    let len = rng.gen_range(0..=max);
    (0..len).map(|_| rng.gen_range(0x20u8..=0x7E) as char).collect()
}

pub fn hex_code(rng: &mut impl Rng, width: usize) -> String {
    const HEX: &[u8] = b"0123456789ABCDEF";
    (0..width).map(|_| HEX[rng.gen_range(0..16)] as char).collect()
}

fn code_list(rng: &mut impl Rng, width: usize, max: usize) -> Vec<String> {
    let len = rng.gen_range(0..=max);
    (0..len).map(|_| hex_code(rng, width)).collect()
}

fn phone(rng: &mut impl Rng) -> String {
    if rng.gen_bool(0.2) {
        return String::new();
    }
    let digits = rng.gen_range(1..=11);
    let mut s = String::from("+");
    for _ in 0..digits {
        s.push(rng.gen_range(b'0'..=b'9') as char);
    }
    s
}

/// Uniformly-ish random card satisfying every validation invariant.
pub fn random_card(rng: &mut impl Rng) -> HazmatCard {
    let mut user_def = [0u8; USER_DEF_LEN];
    rng.fill(&mut user_def[..]);
    HazmatCard {
        c_id: rng.gen(),
        t_id: rng.gen(),
        t_rn: printable(rng, T_RN_MAX),
        op_id: rng.gen(),
        op_name: printable(rng, OP_NAME_MAX),
        op_phone: phone(rng),
        s_id: if rng.gen_bool(0.8) { hex_code(rng, 8) } else { String::new() },
        comp_ids: code_list(rng, 8, COMP_IDS_MAX),
        ign_p: printable(rng, 5),
        sig_temp: printable(rng, 5),
        exm_ids: code_list(rng, 4, EXM_IDS_MAX),
        b_pnt: printable(rng, 4),
        m_pnt: printable(rng, 4),
        s_dens: printable(rng, 8),
        tox_v: ["", "00", "01"][rng.gen_range(0..3)].to_string(),
        kemler_no: printable(rng, 8),
        onu_no: printable(rng, 8),
        et_ids: code_list(rng, 4, ET_IDS_MAX),
        user_def,
    }
}

/// Independent CRC-64/ECMA-182 oracle: plain bitwise shift register, no
/// lookup table. Poly 0x42F0E1EBA9EA3693, init 0, not reflected, no xorout.
pub fn crc64_bitwise(data: &[u8]) -> u64 {
    const POLY: u64 = 0x42F0_E1EB_A9EA_3693;
    let mut crc: u64 = 0;
    for &byte in data {
        crc ^= (byte as u64) << 56;
        for _ in 0..8 {
            if crc & (1u64 << 63) != 0 {
                crc = (crc << 1) ^ POLY;
            } else {
                crc <<= 1;
            }
        }
    }
    crc
}

// --- truck-unit reference state table --------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefMode {
    Normal,
    Warning,
    Alerting,
}

#[derive(Debug, Clone, Copy)]
pub enum RefInput {
    Sample { t: f64, accel: [f64; 3], roll_deg: f64 },
    Fix { t: f64, speed_kmh: f64 },
}

/// Hand-written reference for the onboard state machine, organized as an
/// explicit (mode, condition) -> (mode, effects) table. Thresholds follow
/// the defaults: 70 km/h speed limit sustained 2 s, 40 m/s^2 accel delta
/// twice in a row, 15 m/s^3 jerk, 60 deg roll sustained 0.5 s.
pub struct RefUnit {
    pub mode: RefMode,
    prev_accel: Option<(f64, [f64; 3])>,
    streak: u32,
    roll_since: Option<f64>,
    over_since: Option<f64>,
    speed_warned: bool,
    jerk_active: bool,
}

impl RefUnit {
    pub fn new() -> RefUnit {
        RefUnit {
            mode: RefMode::Normal,
            prev_accel: None,
            streak: 0,
            roll_since: None,
            over_since: None,
            speed_warned: false,
            jerk_active: false,
        }
    }

    /// Returns the effect kinds emitted for this input, in order.
    pub fn step(&mut self, input: RefInput) -> Vec<&'static str> {
        match input {
            RefInput::Sample { t, accel, roll_deg } => self.step_sample(t, accel, roll_deg),
            RefInput::Fix { t, speed_kmh } => self.step_fix(t, speed_kmh),
        }
    }

    fn step_sample(&mut self, t: f64, accel: [f64; 3], roll_deg: f64) -> Vec<&'static str> {
        let mut jerk = 0.0;
        let mut delta_hit = false;
        if let Some((pt, pa)) = self.prev_accel {
            let d = ((accel[0] - pa[0]).powi(2)
                + (accel[1] - pa[1]).powi(2)
                + (accel[2] - pa[2]).powi(2))
            .sqrt();
            jerk = d / (t - pt);
            delta_hit = d >= 40.0;
        }
        self.prev_accel = Some((t, accel));
        self.streak = if delta_hit { self.streak + 1 } else { 0 };

        let mut roll_hit = false;
        if roll_deg.abs() >= 60.0 {
            match self.roll_since {
                None => self.roll_since = Some(t),
                Some(since) => roll_hit = t - since >= 0.5,
            }
        } else {
            self.roll_since = None;
        }

        let crash = self.streak >= 2 || roll_hit;
        // state table: (mode, event) -> (mode', effects)
        match (self.mode, crash, jerk > 15.0) {
            (RefMode::Alerting, _, _) => vec![],
            (_, true, _) => {
                self.mode = RefMode::Alerting;
                self.streak = 0;
                self.roll_since = None;
                vec!["ReadLocalTag", "ComposeAlert", "DisplayText"]
            }
            (RefMode::Normal, false, true) => {
                self.mode = RefMode::Warning;
                self.jerk_active = true;
                vec!["PlayMessage", "DisplayText"]
            }
            (mode, false, high_jerk) => {
                if self.jerk_active && !high_jerk {
                    self.jerk_active = false;
                    if mode == RefMode::Warning && !self.speed_warned {
                        self.mode = RefMode::Normal;
                    }
                }
                vec![]
            }
        }
    }

    fn step_fix(&mut self, t: f64, speed_kmh: f64) -> Vec<&'static str> {
        if self.mode == RefMode::Alerting {
            return vec![];
        }
        if speed_kmh > 70.0 {
            let since = *self.over_since.get_or_insert(t);
            if !self.speed_warned && t - since >= 2.0 {
                self.speed_warned = true;
                if self.mode == RefMode::Normal {
                    self.mode = RefMode::Warning;
                }
                return vec!["PlayMessage", "DisplayText"];
            }
        } else {
            self.over_since = None;
            if self.speed_warned {
                self.speed_warned = false;
                if self.mode == RefMode::Warning && !self.jerk_active {
                    self.mode = RefMode::Normal;
                }
            }
        }
        vec![]
    }
}
