//! Deterministic fixed-step simulation: trucks moving along a road past
//! portals, six-tag visibility, crash and link-failure injection, and
//! end-to-end delivery of read events and alerts to dispatch.
//!
//! Identical (scenario, seed) inputs produce byte-identical logs.

use crate::card::{decode_card, CardError, HazmatCard};
use crate::dispatch::EventStore;
use crate::portal::{
    alert_frame, assign_topology, PortalKind, TopologyError, DEFAULT_AGGREGATOR_RATIO,
    DEFAULT_READ_RANGE_M,
};
use crate::truck::{Effect, GpsFix, SensorSample, TruckUnit, UnitConfig};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const GRAVITY_MS2: f64 = 9.81;
/// Longitudinal acceleration cap used when following the speed profile.
pub const MAX_ACCEL_MS2: f64 = 1.0;
/// Injected crash spike magnitude, applied for two consecutive samples.
pub const CRASH_SPIKE_MS2: f64 = 50.0;

fn default_ratio() -> usize {
    DEFAULT_AGGREGATOR_RATIO
}

fn default_tick() -> f64 {
    0.1
}

fn default_range() -> f64 {
    DEFAULT_READ_RANGE_M
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Road {
    /// Polyline of (lat, lon) vertices.
    pub points: Vec<(f64, f64)>,
    pub length_m: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruckSpec {
    pub t_id: u64,
    /// Path to the truck's `.hmc` card blob, relative to the scenario file.
    pub card: String,
    pub departure_s: f64,
    /// Piecewise-constant speed profile: (seconds since departure, km/h).
    pub speed_profile: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultKind {
    #[serde(rename = "CRASH")]
    Crash,
    #[serde(rename = "GSM_DOWN")]
    GsmDown,
    #[serde(rename = "LINK_DOWN")]
    LinkDown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fault {
    pub kind: FaultKind,
    /// CRASH: truck t_id. GSM_DOWN: aggregator portal_id, 0 for the whole
    /// GSM network (including truck modems). LINK_DOWN: relay portal_id.
    #[serde(default)]
    pub target: u64,
    pub t_start: f64,
    pub t_end: f64,
}

impl Fault {
    fn active(&self, t: f64) -> bool {
        t >= self.t_start && t < self.t_end
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub road: Road,
    /// Portal positions in meters along the road, ascending.
    pub portals: Vec<f64>,
    #[serde(default = "default_ratio")]
    pub aggregator_ratio: usize,
    pub trucks: Vec<TruckSpec>,
    #[serde(default)]
    pub faults: Vec<Fault>,
    pub duration: f64,
    #[serde(default = "default_tick")]
    pub tick_s: f64,
    #[serde(default = "default_range")]
    pub read_range_m: f64,
    /// Optional randomized read dropouts; off by default.
    #[serde(default)]
    pub read_jitter: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("topology error: {0}")]
    Topology(#[from] TopologyError),
    #[error("card error: {0}")]
    Card(#[from] CardError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Scenario {
    pub fn from_file(path: &Path) -> Result<Scenario, SimError> {
        let text = std::fs::read_to_string(path)?;
        let scenario: Scenario = serde_json::from_str(&text)?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let err = |m: String| Err(SimError::InvalidScenario(m));
        if self.tick_s <= 0.0 {
            return err("tick_s must be positive".into());
        }
        if self.duration <= 0.0 {
            return err("duration must be positive".into());
        }
        if self.road.points.len() < 2 {
            return err("road needs at least two vertices".into());
        }
        if self.road.length_m <= 0.0 {
            return err("road length must be positive".into());
        }
        if self.read_range_m <= 0.0 {
            return err("read_range_m must be positive".into());
        }
        if self.aggregator_ratio < 1 {
            return err("aggregator_ratio must be at least 1".into());
        }
        for &p in &self.portals {
            if !(0.0..=self.road.length_m).contains(&p) {
                return err(format!("portal at {p} m is outside the road"));
            }
        }
        for f in &self.faults {
            if f.t_start < 0.0 || f.t_end > self.duration || f.t_start > f.t_end {
                return err(format!(
                    "fault window [{}, {}] outside run duration",
                    f.t_start, f.t_end
                ));
            }
        }
        for truck in &self.trucks {
            if truck.speed_profile.is_empty() {
                return err(format!("truck {} has an empty speed profile", truck.t_id));
            }
        }
        Ok(())
    }
}

// --- tag placement and visibility ------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Front,
    LeftA,
    LeftB,
    RightA,
    RightB,
    Back,
}

impl Placement {
    pub const ALL: [Placement; 6] = [
        Placement::Front,
        Placement::LeftA,
        Placement::LeftB,
        Placement::RightA,
        Placement::RightB,
        Placement::Back,
    ];
}

/// Six tags per truck, same card payload, distinct c_id per placement.
#[derive(Debug, Clone)]
pub struct TagSet {
    pub tags: Vec<(Placement, u32, HazmatCard)>,
}

impl TagSet {
    pub fn new(card: &HazmatCard) -> TagSet {
        let base = card.c_id;
        let tags = Placement::ALL
            .iter()
            .enumerate()
            .map(|(i, &placement)| {
                let mut tag_card = card.clone();
                tag_card.c_id = base.wrapping_mul(8).wrapping_add(i as u32);
                (placement, tag_card.c_id, tag_card)
            })
            .collect();
        TagSet { tags }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Overhead,
}

#[derive(Debug, Clone, Copy)]
pub struct TruckPose {
    pub position_m: f64,
    /// Moving toward increasing positions.
    pub forward: bool,
    pub rolled_over: bool,
}

/// Distance gate first, then the orientation gate: a side reader sees its
/// side pair (swapped when the truck is rolled over), plus the front tag
/// while the truck approaches and the back tag while it recedes.
pub fn visible_tags(
    tags: &TagSet,
    pose: &TruckPose,
    reader_position_m: f64,
    reader_side: Side,
    range_m: f64,
) -> Vec<(u32, HazmatCard)> {
    let delta = pose.position_m - reader_position_m;
    if delta.abs() > range_m {
        return Vec::new();
    }
    let approaching = if pose.forward { delta < 0.0 } else { delta > 0.0 };
    let receding = if pose.forward { delta > 0.0 } else { delta < 0.0 };
    let visible = |placement: Placement| -> bool {
        match reader_side {
            Side::Overhead => true,
            Side::Left | Side::Right => {
                let same_side = match placement {
                    Placement::LeftA | Placement::LeftB => reader_side == Side::Left,
                    Placement::RightA | Placement::RightB => reader_side == Side::Right,
                    Placement::Front => return approaching,
                    Placement::Back => return receding,
                };
                // a roll-over turns the side tags toward the other shoulder
                if pose.rolled_over {
                    !same_side
                } else {
                    same_side
                }
            }
        }
    };
    tags.tags
        .iter()
        .filter(|(placement, _, _)| visible(*placement))
        .map(|(_, c_id, card)| (*c_id, card.clone()))
        .collect()
}

// --- run --------------------------------------------------------------------

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Metrics {
    pub events_created: u64,
    pub events_delivered: u64,
    pub events_queued: u64,
    pub events_backup_only: u64,
    pub frames_sent: u64,
    pub frames_dropped: u64,
    pub alerts_delivered: u64,
    pub alert_latencies_s: Vec<f64>,
    pub reads_per_portal: BTreeMap<u32, u64>,
}

impl Metrics {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("events_created: {}\n", self.events_created));
        out.push_str(&format!("events_delivered: {}\n", self.events_delivered));
        out.push_str(&format!("events_queued: {}\n", self.events_queued));
        out.push_str(&format!("events_backup_only: {}\n", self.events_backup_only));
        out.push_str(&format!("frames_sent: {}\n", self.frames_sent));
        out.push_str(&format!("frames_dropped: {}\n", self.frames_dropped));
        out.push_str(&format!("alerts_delivered: {}\n", self.alerts_delivered));
        let latencies: Vec<String> =
            self.alert_latencies_s.iter().map(|l| format!("{l:.3}")).collect();
        out.push_str(&format!("alert_latencies_s: [{}]\n", latencies.join(", ")));
        out.push_str("reads_per_portal:\n");
        for (portal, count) in &self.reads_per_portal {
            out.push_str(&format!("  portal {portal:>4}  {count}\n"));
        }
        out
    }
}

/// Everything a run produces. All text artifacts are deterministic.
pub struct RunOutput {
    pub sim_log: String,
    pub backup_logs: BTreeMap<u32, String>,
    pub dispatch_log: String,
    pub blackbox_logs: BTreeMap<u64, String>,
    pub metrics: Metrics,
    pub store: EventStore,
}

struct TruckState {
    spec: TruckSpec,
    unit: TruckUnit,
    card: HazmatCard,
    tags: TagSet,
    position_m: f64,
    speed_ms: f64,
    accel_long: f64,
    crashed: bool,
    crash_spikes_emitted: u8,
    crash_logged: bool,
}

impl TruckState {
    fn target_speed_ms(&self, t: f64) -> f64 {
        let rel = t - self.spec.departure_s;
        let mut speed_kmh = self.spec.speed_profile[0].1;
        for &(at, kmh) in &self.spec.speed_profile {
            if rel >= at {
                speed_kmh = kmh;
            } else {
                break;
            }
        }
        speed_kmh / 3.6
    }

    fn pose(&self) -> TruckPose {
        TruckPose { position_m: self.position_m, forward: true, rolled_over: self.crashed }
    }
}

/// Interpolates a point along the road polyline at `position_m` of the
/// declared total length. Segment shares are proportional to their length
/// in degree space.
pub fn road_point(road: &Road, position_m: f64) -> (f64, f64) {
    let frac = (position_m / road.length_m).clamp(0.0, 1.0);
    let seg_len = |a: (f64, f64), b: (f64, f64)| -> f64 {
        let d0 = b.0 - a.0;
        let d1 = b.1 - a.1;
        (d0 * d0 + d1 * d1).sqrt()
    };
    let total: f64 = road.points.windows(2).map(|w| seg_len(w[0], w[1])).sum();
    if total == 0.0 {
        return road.points[0];
    }
    let mut remaining = frac * total;
    for w in road.points.windows(2) {
        let len = seg_len(w[0], w[1]);
        if remaining <= len || len == 0.0 {
            if len == 0.0 {
                continue;
            }
            let s = remaining / len;
            return (w[0].0 + (w[1].0 - w[0].0) * s, w[0].1 + (w[1].1 - w[0].1) * s);
        }
        remaining -= len;
    }
    *road.points.last().unwrap()
}

struct SimLogger {
    lines: Vec<String>,
}

impl SimLogger {
    fn log(&mut self, t: f64, source: &str, kind: &str, detail: &str) {
        self.lines.push(format!("{t:.3}|{source}|{kind}|{detail}"));
    }
}

/// Runs a scenario with the truck cards already decoded (one per truck, in
/// scenario order).
pub fn run(scenario: &Scenario, cards: &[HazmatCard]) -> Result<RunOutput, SimError> {
    scenario.validate()?;
    if cards.len() != scenario.trucks.len() {
        return Err(SimError::InvalidScenario(format!(
            "{} cards supplied for {} trucks",
            cards.len(),
            scenario.trucks.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut portals = assign_topology(&scenario.portals, scenario.aggregator_ratio)?;
    for portal in &mut portals {
        portal.read_range_m = scenario.read_range_m;
    }
    // readers alternate road sides along the chain
    let sides: Vec<Side> = (0..portals.len())
        .map(|i| if i % 2 == 0 { Side::Left } else { Side::Right })
        .collect();

    let mut trucks: Vec<TruckState> = scenario
        .trucks
        .iter()
        .zip(cards)
        .map(|(spec, card)| TruckState {
            spec: spec.clone(),
            unit: TruckUnit::new(spec.t_id, UnitConfig::default()),
            card: card.clone(),
            tags: TagSet::new(card),
            position_m: 0.0,
            speed_ms: 0.0,
            accel_long: 0.0,
            crashed: false,
            crash_spikes_emitted: 0,
            crash_logged: false,
        })
        .collect();

    let mut store = EventStore::new();
    let mut logger = SimLogger { lines: Vec::new() };
    let mut frames_sent: u64 = 0;

    let n_ticks = (scenario.duration / scenario.tick_s).ceil() as u64;
    for tick_index in 0..n_ticks {
        let t = tick_index as f64 * scenario.tick_s;
        let gsm_all_down = scenario
            .faults
            .iter()
            .any(|f| f.kind == FaultKind::GsmDown && f.target == 0 && f.active(t));
        let gsm_portal_down = |portal_id: u32| {
            gsm_all_down
                || scenario.faults.iter().any(|f| {
                    f.kind == FaultKind::GsmDown && f.target == portal_id as u64 && f.active(t)
                })
        };
        let link_down = |portal_id: u32| {
            scenario.faults.iter().any(|f| {
                f.kind == FaultKind::LinkDown && f.target == portal_id as u64 && f.active(t)
            })
        };

        // trucks: motion, sensing, alerting
        for truck in &mut trucks {
            if t < truck.spec.departure_s {
                continue;
            }
            let crash_fault = scenario
                .faults
                .iter()
                .any(|f| f.kind == FaultKind::Crash && f.target == truck.spec.t_id && f.active(t));

            if truck.crashed {
                truck.speed_ms = 0.0;
                truck.accel_long = 0.0;
            } else {
                let target = truck.target_speed_ms(t);
                let dv = (target - truck.speed_ms)
                    .clamp(-MAX_ACCEL_MS2 * scenario.tick_s, MAX_ACCEL_MS2 * scenario.tick_s);
                truck.speed_ms += dv;
                truck.accel_long = dv / scenario.tick_s;
                truck.position_m =
                    (truck.position_m + truck.speed_ms * scenario.tick_s).min(scenario.road.length_m);
            }

            // synthesized sensor streams
            let (lat, lon) = road_point(&scenario.road, truck.position_m);
            let fix = GpsFix { t, lat, lon, speed_kmh: truck.speed_ms * 3.6 };
            // crash detection keys on the accel spikes; a synthesized
            // post-crash roll would re-trigger after the dispatch ACK
            let mut sample = SensorSample {
                t,
                accel: [truck.accel_long, 0.0, GRAVITY_MS2],
                roll_angle_deg: 0.0,
            };
            if crash_fault && truck.crash_spikes_emitted < 2 {
                let sign = if truck.crash_spikes_emitted == 0 { 1.0 } else { -1.0 };
                sample.accel[0] = sign * CRASH_SPIKE_MS2;
                if truck.crash_spikes_emitted == 0 {
                    logger.log(t, &format!("truck:{}", truck.spec.t_id), "CRASH", "injected");
                }
                truck.crash_spikes_emitted += 1;
                if truck.crash_spikes_emitted == 2 {
                    truck.crashed = true;
                    truck.crash_logged = true;
                }
            }

            let mut effects = truck.unit.ingest_fix(fix).expect("monotonic sim time");
            effects.extend(truck.unit.ingest_sample(sample).expect("monotonic sim time"));
            for effect in &effects {
                match effect {
                    Effect::ComposeAlert => {
                        // the unit reads its own tag at crash time
                        let alert = truck.unit.compose_alert(truck.card.clone(), t);
                        logger.log(
                            t,
                            &format!("truck:{}", truck.spec.t_id),
                            "ALERT_COMPOSED",
                            &format!("seq={}", alert.seq_no),
                        );
                    }
                    Effect::DisplayText(text) => {
                        logger.log(
                            t,
                            &format!("truck:{}", truck.spec.t_id),
                            "WARNING",
                            text,
                        );
                    }
                    _ => {}
                }
            }

            let truck_gsm_up = !gsm_all_down;
            for effect in truck.unit.tick(t, truck_gsm_up) {
                if let Effect::SendAlert(alert) = effect {
                    let frame = alert_frame(&alert)?;
                    frames_sent += 1;
                    logger.log(
                        t,
                        &format!("truck:{}", truck.spec.t_id),
                        "ALERT_SEND",
                        &format!("seq={}", alert.seq_no),
                    );
                    if let Ok(ack) = store.ingest(&frame.to_bytes()) {
                        for key in &ack.stored {
                            if let crate::dispatch::StoreKey::Alert(unit, seq) = key {
                                logger.log(
                                    t,
                                    "dispatch",
                                    "DISPATCH_ALERT",
                                    &format!("unit={unit},seq={seq}"),
                                );
                            }
                        }
                        if ack.accepted() > 0 {
                            truck.unit.ack(alert.seq_no);
                        }
                    }
                }
            }
        }

        // portals observe passing trucks
        for (portal_index, portal) in portals.iter_mut().enumerate() {
            for truck in &trucks {
                if t < truck.spec.departure_s {
                    continue;
                }
                let vis = visible_tags(
                    &truck.tags,
                    &truck.pose(),
                    portal.position_m,
                    sides[portal_index],
                    portal.read_range_m,
                );
                if scenario.read_jitter && !vis.is_empty() && rng.gen_bool(0.1) {
                    continue;
                }
                if let Some(event) = portal.observe(truck.position_m, &vis, t) {
                    logger.log(
                        t,
                        &format!("portal:{}", portal.portal_id),
                        "READ",
                        &format!(
                            "event={},t_id={},backup={}",
                            event.event_id,
                            event.t_id,
                            u8::from(portal.backup_enabled)
                        ),
                    );
                }
            }
        }

        // relay hop: one link traversal per tick, two-phase for determinism
        let mut deliveries: Vec<(u32, u32, Vec<Vec<u8>>)> = Vec::new();
        for portal in &mut portals {
            if portal.kind != PortalKind::Relay {
                continue;
            }
            let up = !link_down(portal.portal_id);
            let frames = portal.take_transmissions(up);
            if !frames.is_empty() {
                let to = portal.next_hop.expect("relay has next hop");
                deliveries.push((
                    portal.portal_id,
                    to,
                    frames.iter().map(|f| f.to_bytes()).collect(),
                ));
            }
        }
        for (from, to, frames) in deliveries {
            frames_sent += frames.len() as u64;
            logger.log(
                t,
                &format!("portal:{from}"),
                "FRAME_FWD",
                &format!("to={to},count={}", frames.len()),
            );
            let target = portals
                .iter_mut()
                .find(|p| p.portal_id == to)
                .expect("next hop exists");
            for bytes in frames {
                if target.receive(&bytes).is_err() {
                    logger.log(t, &format!("portal:{to}"), "FRAME_DROP", "crc");
                }
            }
        }

        // aggregator uplink to dispatch
        for portal in &mut portals {
            if portal.kind != PortalKind::Aggregator || portal.pending_events.is_empty() {
                continue;
            }
            if gsm_portal_down(portal.portal_id) {
                continue;
            }
            let pending = portal.pending_events.len();
            let frames = portal.uplink();
            let mut acked = 0usize;
            for frame in frames {
                frames_sent += 1;
                if let Ok(ack) = store.ingest(&frame.to_bytes()) {
                    for key in &ack.stored {
                        if let crate::dispatch::StoreKey::Read(event_id) = key {
                            logger.log(
                                t,
                                "dispatch",
                                "DISPATCH_READ",
                                &format!("event={event_id}"),
                            );
                        }
                    }
                    acked += ack.accepted();
                }
            }
            logger.log(
                t,
                &format!("portal:{}", portal.portal_id),
                "BATCH",
                &format!("events={pending}"),
            );
            portal.ack_uplink(acked);
        }
    }

    let mut sim_log = logger.lines.join("\n");
    if !sim_log.is_empty() {
        sim_log.push('\n');
    }
    let mut run_metrics = metrics(&sim_log);
    run_metrics.frames_sent = frames_sent;

    let backup_logs = portals
        .iter()
        .filter(|p| p.backup_enabled)
        .map(|p| (p.portal_id, p.backup_log_text()))
        .collect();
    let blackbox_logs = trucks
        .iter()
        .map(|truck| (truck.spec.t_id, truck.unit.blackbox_text()))
        .collect();

    Ok(RunOutput {
        sim_log,
        backup_logs,
        dispatch_log: store.persistence_log(),
        blackbox_logs,
        metrics: run_metrics,
        store,
    })
}

/// Loads the scenario file, resolves card paths relative to it, and runs.
pub fn run_from_file(path: &Path) -> Result<RunOutput, SimError> {
    let scenario = Scenario::from_file(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut cards = Vec::with_capacity(scenario.trucks.len());
    for truck in &scenario.trucks {
        let blob = std::fs::read(base.join(&truck.card))?;
        cards.push(decode_card(&blob)?);
    }
    run(&scenario, &cards)
}

/// Derives run metrics purely from the simulation log text.
pub fn metrics(sim_log: &str) -> Metrics {
    let mut m = Metrics::default();
    let mut created: Vec<(String, bool)> = Vec::new(); // (event key, backup flag)
    let mut delivered: std::collections::BTreeSet<String> = Default::default();
    let mut crash_t: BTreeMap<String, f64> = BTreeMap::new();
    let mut alert_t: BTreeMap<String, f64> = BTreeMap::new();
    for line in sim_log.lines() {
        let parts: Vec<&str> = line.splitn(4, '|').collect();
        if parts.len() != 4 {
            continue;
        }
        let t: f64 = parts[0].parse().unwrap_or(0.0);
        let (source, kind, detail) = (parts[1], parts[2], parts[3]);
        match kind {
            "READ" => {
                let event = detail
                    .split(',')
                    .find_map(|f| f.strip_prefix("event="))
                    .unwrap_or_default()
                    .to_string();
                let backup = detail.contains("backup=1");
                if let Some(portal_id) = event.split(':').next().and_then(|p| p.parse::<u32>().ok())
                {
                    *m.reads_per_portal.entry(portal_id).or_insert(0) += 1;
                }
                created.push((event, backup));
                m.events_created += 1;
            }
            "DISPATCH_READ" => {
                if let Some(event) = detail.strip_prefix("event=") {
                    delivered.insert(event.to_string());
                }
            }
            "DISPATCH_ALERT" => {
                m.alerts_delivered += 1;
                if let Some(unit) = detail
                    .split(',')
                    .find_map(|f| f.strip_prefix("unit="))
                {
                    alert_t.entry(format!("truck:{unit}")).or_insert(t);
                }
            }
            "CRASH" => {
                crash_t.entry(source.to_string()).or_insert(t);
            }
            "FRAME_DROP" => m.frames_dropped += 1,
            _ => {}
        }
    }
    m.events_delivered = delivered.len() as u64;
    for (event, backup) in &created {
        if !delivered.contains(event) {
            if *backup {
                m.events_backup_only += 1;
            } else {
                m.events_queued += 1;
            }
        }
    }
    for (truck, &t_crash) in &crash_t {
        if let Some(&t_alert) = alert_t.get(truck) {
            m.alert_latencies_s.push(t_alert - t_crash);
        }
    }
    m
}

/// Writes all run artifacts into a directory.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("simlog.txt"), &out.sim_log)?;
    std::fs::write(dir.join("dispatch.log"), &out.dispatch_log)?;
    std::fs::write(dir.join("metrics.txt"), out.metrics.render())?;
    for (portal_id, log) in &out.backup_logs {
        std::fs::write(dir.join(format!("portal_{portal_id}.log")), log)?;
    }
    for (t_id, log) in &out.blackbox_logs {
        std::fs::write(dir.join(format!("blackbox_{t_id}.log")), log)?;
    }
    Ok(())
}
