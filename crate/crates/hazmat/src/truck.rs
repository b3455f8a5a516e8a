//! Onboard "black-box" unit: ingests sensor and GPS streams, warns the
//! driver on inappropriate driving, detects crash/rollover and composes an
//! authority alert carrying position plus the full hazard card.
//!
//! The state machine is pure: effects are returned as values and the caller
//! (simulator or hardware shim) interprets them.

use crate::card::HazmatCard;

pub const ALARM_CODE: &str = "ALERT ACCIDENT";
pub const SPEED_WARNING_TEXT: &str = "SPEED LIMIT";
pub const JERK_WARNING_TEXT: &str = "HARSH DRIVING";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Normal,
    Warning,
    Alerting,
}

#[derive(Debug, Clone)]
pub struct UnitConfig {
    pub speed_limit_kmh: f64,
    pub crash_accel_ms2: f64,
    pub jerk_warn_ms3: f64,
    pub rollover_deg: f64,
    pub rollover_sustain_s: f64,
    pub speed_sustain_s: f64,
    pub retry_interval_s: f64,
}

impl Default for UnitConfig {
    fn default() -> Self {
        UnitConfig {
            speed_limit_kmh: 70.0,
            crash_accel_ms2: 40.0,
            jerk_warn_ms3: 15.0,
            rollover_deg: 60.0,
            rollover_sustain_s: 0.5,
            speed_sustain_s: 2.0,
            retry_interval_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSample {
    pub t: f64,
    /// 3-axis acceleration, m/s^2.
    pub accel: [f64; 3],
    pub roll_angle_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsFix {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    pub speed_kmh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlertMessage {
    pub alarm_code: String,
    pub t: f64,
    /// `None` marks a null-position alert (no GPS fix ever received).
    pub position: Option<(f64, f64)>,
    pub card: HazmatCard,
    pub unit_id: u64,
    pub seq_no: u32,
}

// SendAlert carries the whole message by value on purpose: effects are
// fire-and-forget values handed to the caller, not long-lived state.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    ReadLocalTag,
    ComposeAlert,
    PlayMessage(&'static str),
    DisplayText(&'static str),
    SendAlert(AlertMessage),
}

impl Effect {
    pub fn kind(&self) -> &'static str {
        match self {
            Effect::ReadLocalTag => "ReadLocalTag",
            Effect::ComposeAlert => "ComposeAlert",
            Effect::PlayMessage(_) => "PlayMessage",
            Effect::DisplayText(_) => "DisplayText",
            Effect::SendAlert(_) => "SendAlert",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TruckError {
    #[error("non-monotonic time")]
    NonMonotonicTime,
}

#[derive(Debug)]
pub struct TruckUnit {
    pub unit_id: u64,
    pub config: UnitConfig,
    mode: Mode,
    last_sample: Option<SensorSample>,
    accel_streak: u32,
    roll_since: Option<f64>,
    last_fix: Option<GpsFix>,
    over_speed_since: Option<f64>,
    speed_warned: bool,
    jerk_active: bool,
    pending_alert: Option<AlertMessage>,
    next_seq: u32,
    last_send_t: Option<f64>,
    retries: u32,
    blackbox: Vec<String>,
}

fn accel_delta(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

impl TruckUnit {
    pub fn new(unit_id: u64, config: UnitConfig) -> Self {
        TruckUnit {
            unit_id,
            config,
            mode: Mode::Normal,
            last_sample: None,
            accel_streak: 0,
            roll_since: None,
            last_fix: None,
            over_speed_since: None,
            speed_warned: false,
            jerk_active: false,
            pending_alert: None,
            next_seq: 1,
            last_send_t: None,
            retries: 0,
            blackbox: Vec::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn pending_alert(&self) -> Option<&AlertMessage> {
        self.pending_alert.as_ref()
    }

    pub fn blackbox(&self) -> &[String] {
        &self.blackbox
    }

    pub fn blackbox_text(&self) -> String {
        let mut s = self.blackbox.join("\n");
        if !s.is_empty() {
            s.push('\n');
        }
        s
    }

    fn log(&mut self, t: f64, kind: &str, payload: String) {
        self.blackbox.push(format!("{t:.3}|{kind}|{payload}"));
    }

    fn log_effects(&mut self, t: f64, effects: &[Effect]) {
        for e in effects {
            self.log(t, "EFFECT", e.kind().to_string());
        }
    }

    /// Feed one accelerometer/roll sample. Crash is declared on two
    /// consecutive accel deltas at or above the crash threshold, or a roll
    /// angle held past the sustain window.
    pub fn ingest_sample(&mut self, sample: SensorSample) -> Result<Vec<Effect>, TruckError> {
        if let Some(prev) = &self.last_sample {
            if sample.t <= prev.t {
                return Err(TruckError::NonMonotonicTime);
            }
        }
        let mut crash = false;
        let mut jerk = 0.0;
        if let Some(prev) = &self.last_sample {
            let d = accel_delta(&sample.accel, &prev.accel);
            let dt = sample.t - prev.t;
            jerk = d / dt;
            if d >= self.config.crash_accel_ms2 {
                self.accel_streak += 1;
            } else {
                self.accel_streak = 0;
            }
            if self.accel_streak >= 2 {
                crash = true;
            }
        }
        if sample.roll_angle_deg.abs() >= self.config.rollover_deg {
            match self.roll_since {
                None => self.roll_since = Some(sample.t),
                Some(since) if sample.t - since >= self.config.rollover_sustain_s => crash = true,
                _ => {}
            }
        } else {
            self.roll_since = None;
        }

        let mut effects = Vec::new();
        if crash && self.mode != Mode::Alerting {
            self.mode = Mode::Alerting;
            self.accel_streak = 0;
            self.roll_since = None;
            effects.push(Effect::ReadLocalTag);
            effects.push(Effect::ComposeAlert);
            effects.push(Effect::DisplayText(ALARM_CODE));
        } else if self.mode == Mode::Normal && jerk > self.config.jerk_warn_ms3 {
            self.mode = Mode::Warning;
            self.jerk_active = true;
            effects.push(Effect::PlayMessage(JERK_WARNING_TEXT));
            effects.push(Effect::DisplayText(JERK_WARNING_TEXT));
        } else if self.jerk_active && jerk <= self.config.jerk_warn_ms3 {
            self.jerk_active = false;
            if self.mode == Mode::Warning && !self.speed_warned {
                self.mode = Mode::Normal;
            }
        }

        self.log(
            sample.t,
            "SAMPLE_SUMMARY",
            format!(
                "ax={:.2},ay={:.2},az={:.2},roll={:.1}",
                sample.accel[0], sample.accel[1], sample.accel[2], sample.roll_angle_deg
            ),
        );
        self.log_effects(sample.t, &effects);
        self.last_sample = Some(sample);
        Ok(effects)
    }

    /// Feed one GPS fix. Speeding over the limit sustained past the window
    /// raises an edge-triggered warning; warnings are suppressed while
    /// alerting.
    pub fn ingest_fix(&mut self, fix: GpsFix) -> Result<Vec<Effect>, TruckError> {
        if let Some(prev) = &self.last_fix {
            if fix.t <= prev.t {
                return Err(TruckError::NonMonotonicTime);
            }
        }
        let mut effects = Vec::new();
        if self.mode != Mode::Alerting {
            if fix.speed_kmh > self.config.speed_limit_kmh {
                let since = *self.over_speed_since.get_or_insert(fix.t);
                if !self.speed_warned && fix.t - since >= self.config.speed_sustain_s {
                    self.speed_warned = true;
                    if self.mode == Mode::Normal {
                        self.mode = Mode::Warning;
                    }
                    effects.push(Effect::PlayMessage(SPEED_WARNING_TEXT));
                    effects.push(Effect::DisplayText(SPEED_WARNING_TEXT));
                }
            } else {
                self.over_speed_since = None;
                if self.speed_warned {
                    self.speed_warned = false;
                    if self.mode == Mode::Warning && !self.jerk_active {
                        self.mode = Mode::Normal;
                    }
                }
            }
        }
        self.log(
            fix.t,
            "FIX",
            format!("{:.6},{:.6},{:.1}", fix.lat, fix.lon, fix.speed_kmh),
        );
        self.log_effects(fix.t, &effects);
        self.last_fix = Some(fix);
        Ok(effects)
    }

    /// Compose the crash alert from the freshly read tag and the latest fix.
    /// Returns a null-position alert when no fix was ever received.
    pub fn compose_alert(&mut self, card: HazmatCard, t: f64) -> AlertMessage {
        let position = self.last_fix.as_ref().map(|f| (f.lat, f.lon));
        let alert = AlertMessage {
            alarm_code: ALARM_CODE.to_string(),
            t,
            position,
            card,
            unit_id: self.unit_id,
            seq_no: self.next_seq,
        };
        self.next_seq += 1;
        self.pending_alert = Some(alert.clone());
        self.last_send_t = None;
        self.retries = 0;
        self.log(
            t,
            "ALERT",
            format!(
                "seq={},pos={}",
                alert.seq_no,
                match position {
                    Some((lat, lon)) => format!("{lat:.6},{lon:.6}"),
                    None => "none".to_string(),
                }
            ),
        );
        alert
    }

    /// Periodic housekeeping: (re)send a pending alert whenever the channel
    /// is up and the retry interval elapsed. The unit never gives up on a
    /// pending alert.
    pub fn tick(&mut self, now: f64, channel_up: bool) -> Vec<Effect> {
        let mut effects = Vec::new();
        if let Some(alert) = &self.pending_alert {
            let due = match self.last_send_t {
                None => true,
                Some(last) => now - last >= self.config.retry_interval_s,
            };
            if channel_up && due {
                self.last_send_t = Some(now);
                self.retries += 1;
                effects.push(Effect::SendAlert(alert.clone()));
            }
        }
        self.log_effects(now, &effects);
        effects
    }

    /// Dispatch acknowledged the alert: clear pending state, back to NORMAL.
    pub fn ack(&mut self, seq_no: u32) {
        if self.pending_alert.as_ref().is_some_and(|a| a.seq_no == seq_no) {
            self.pending_alert = None;
            self.mode = Mode::Normal;
            self.accel_streak = 0;
            self.roll_since = None;
            self.over_speed_since = None;
            self.speed_warned = false;
            self.jerk_active = false;
        }
    }
}
