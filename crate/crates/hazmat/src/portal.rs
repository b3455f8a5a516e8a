//! Road infrastructure: relay and GSM aggregator portals, the wire frame
//! format, topology assignment and store-and-forward hop-by-hop delivery.
//!
//! Frame wire format (bit-exact):
//!
//! ```text
//! magic "HMT1" | msg_type u8 | payload_len u16 BE | payload | crc32 u32 BE
//! ```
//!
//! CRC-32 covers magic + type + length + payload.

use crate::card::{decode_card, encode_card, CardError, HazmatCard, BLOB_LEN};
use crate::crc::crc32;
use crate::truck::AlertMessage;
use std::collections::{HashMap, VecDeque};

pub const FRAME_MAGIC: [u8; 4] = *b"HMT1";
pub const DEFAULT_READ_RANGE_M: f64 = 12.0;
pub const DEFAULT_AGGREGATOR_RATIO: usize = 10;
/// One read event per (portal, truck) passage: repeat reads within this
/// window are suppressed.
pub const READ_COOLDOWN_S: f64 = 5.0;
/// Max read events packed into a single BATCH frame (bounded by the u16
/// payload length).
pub const MAX_BATCH_EVENTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MsgType {
    Alert = 0x01,
    ReadEvent = 0x02,
    Ack = 0x03,
    Batch = 0x04,
}

impl MsgType {
    fn from_u8(v: u8) -> Option<MsgType> {
        match v {
            0x01 => Some(MsgType::Alert),
            0x02 => Some(MsgType::ReadEvent),
            0x03 => Some(MsgType::Ack),
            0x04 => Some(MsgType::Batch),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameError {
    #[error("frame too short")]
    Truncated,
    #[error("bad magic")]
    BadMagic,
    #[error("unknown message type {0:#04x}")]
    BadType(u8),
    #[error("payload length mismatch")]
    LengthMismatch,
    #[error("frame crc mismatch")]
    CrcMismatch,
    #[error("malformed payload")]
    BadPayload,
    #[error("card decode failed: {0}")]
    Card(#[from] CardError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub msg_type: MsgType,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(msg_type: MsgType, payload: Vec<u8>) -> Frame {
        assert!(payload.len() <= u16::MAX as usize);
        Frame { msg_type, payload }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(11 + self.payload.len());
        out.extend_from_slice(&FRAME_MAGIC);
        out.push(self.msg_type as u8);
        out.extend_from_slice(&(self.payload.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.payload);
        let crc = crc32(&out);
        out.extend_from_slice(&crc.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Frame, FrameError> {
        if bytes.len() < 11 {
            return Err(FrameError::Truncated);
        }
        if bytes[..4] != FRAME_MAGIC {
            return Err(FrameError::BadMagic);
        }
        let msg_type = MsgType::from_u8(bytes[4]).ok_or(FrameError::BadType(bytes[4]))?;
        let len = u16::from_be_bytes([bytes[5], bytes[6]]) as usize;
        if bytes.len() != 11 + len {
            return Err(FrameError::LengthMismatch);
        }
        let body = &bytes[..7 + len];
        let stored = u32::from_be_bytes(bytes[7 + len..].try_into().unwrap());
        if crc32(body) != stored {
            return Err(FrameError::CrcMismatch);
        }
        Ok(Frame { msg_type, payload: bytes[7..7 + len].to_vec() })
    }
}

/// Unique identifier of a portal read observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId {
    pub portal_id: u32,
    pub c_id: u32,
    pub pass_no: u32,
}

impl std::fmt::Display for EventId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.portal_id, self.c_id, self.pass_no)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadEvent {
    pub event_id: EventId,
    pub t: f64,
    pub t_id: u64,
    pub card: HazmatCard,
}

// --- payload codecs ------------------------------------------------------

const READ_EVENT_PAYLOAD_LEN: usize = 4 + 4 + 4 + 8 + 8 + BLOB_LEN;

pub fn encode_read_event_payload(ev: &ReadEvent) -> Result<Vec<u8>, CardError> {
    let blob = encode_card(&ev.card)?;
    let mut out = Vec::with_capacity(READ_EVENT_PAYLOAD_LEN);
    out.extend_from_slice(&ev.event_id.portal_id.to_be_bytes());
    out.extend_from_slice(&ev.event_id.c_id.to_be_bytes());
    out.extend_from_slice(&ev.event_id.pass_no.to_be_bytes());
    out.extend_from_slice(&ev.t_id.to_be_bytes());
    out.extend_from_slice(&ev.t.to_be_bytes());
    out.extend_from_slice(blob.as_bytes());
    Ok(out)
}

/// Event identity and timestamp parse even when the embedded card is
/// corrupt, so the receiver can quarantine by key.
pub struct ReadEventHeader {
    pub event_id: EventId,
    pub t_id: u64,
    pub t: f64,
}

pub fn decode_read_event_header(payload: &[u8]) -> Result<ReadEventHeader, FrameError> {
    if payload.len() != READ_EVENT_PAYLOAD_LEN {
        return Err(FrameError::BadPayload);
    }
    Ok(ReadEventHeader {
        event_id: EventId {
            portal_id: u32::from_be_bytes(payload[0..4].try_into().unwrap()),
            c_id: u32::from_be_bytes(payload[4..8].try_into().unwrap()),
            pass_no: u32::from_be_bytes(payload[8..12].try_into().unwrap()),
        },
        t_id: u64::from_be_bytes(payload[12..20].try_into().unwrap()),
        t: f64::from_be_bytes(payload[20..28].try_into().unwrap()),
    })
}

pub fn decode_read_event_payload(payload: &[u8]) -> Result<ReadEvent, FrameError> {
    let header = decode_read_event_header(payload)?;
    let card = decode_card(&payload[28..])?;
    Ok(ReadEvent { event_id: header.event_id, t: header.t, t_id: header.t_id, card })
}

pub fn encode_batch_payload(events: &[ReadEvent]) -> Result<Vec<u8>, CardError> {
    assert!(events.len() <= MAX_BATCH_EVENTS);
    let mut out = Vec::with_capacity(2 + events.len() * READ_EVENT_PAYLOAD_LEN);
    out.extend_from_slice(&(events.len() as u16).to_be_bytes());
    for ev in events {
        out.extend_from_slice(&encode_read_event_payload(ev)?);
    }
    Ok(out)
}

/// Splits a BATCH payload into per-event payload slices (cards not yet
/// decoded, so a poison entry can be quarantined individually).
pub fn split_batch_payload(payload: &[u8]) -> Result<Vec<&[u8]>, FrameError> {
    if payload.len() < 2 {
        return Err(FrameError::BadPayload);
    }
    let count = u16::from_be_bytes([payload[0], payload[1]]) as usize;
    if payload.len() != 2 + count * READ_EVENT_PAYLOAD_LEN {
        return Err(FrameError::BadPayload);
    }
    Ok((0..count)
        .map(|i| &payload[2 + i * READ_EVENT_PAYLOAD_LEN..2 + (i + 1) * READ_EVENT_PAYLOAD_LEN])
        .collect())
}

const ALERT_FIXED_LEN: usize = 8 + 4 + 8 + 1 + 8 + 8 + BLOB_LEN;

pub fn encode_alert_payload(alert: &AlertMessage) -> Result<Vec<u8>, CardError> {
    let blob = encode_card(&alert.card)?;
    let mut out = Vec::with_capacity(1 + alert.alarm_code.len() + ALERT_FIXED_LEN);
    out.push(alert.alarm_code.len() as u8);
    out.extend_from_slice(alert.alarm_code.as_bytes());
    out.extend_from_slice(&alert.unit_id.to_be_bytes());
    out.extend_from_slice(&alert.seq_no.to_be_bytes());
    out.extend_from_slice(&alert.t.to_be_bytes());
    match alert.position {
        Some((lat, lon)) => {
            out.push(1);
            out.extend_from_slice(&lat.to_be_bytes());
            out.extend_from_slice(&lon.to_be_bytes());
        }
        None => {
            out.push(0);
            out.extend_from_slice(&[0u8; 16]);
        }
    }
    out.extend_from_slice(blob.as_bytes());
    Ok(out)
}

pub struct AlertHeader {
    pub alarm_code: String,
    pub unit_id: u64,
    pub seq_no: u32,
    pub t: f64,
    pub position: Option<(f64, f64)>,
}

pub fn decode_alert_header(payload: &[u8]) -> Result<AlertHeader, FrameError> {
    if payload.is_empty() {
        return Err(FrameError::BadPayload);
    }
    let code_len = payload[0] as usize;
    if payload.len() != 1 + code_len + ALERT_FIXED_LEN {
        return Err(FrameError::BadPayload);
    }
    let alarm_code = std::str::from_utf8(&payload[1..1 + code_len])
        .map_err(|_| FrameError::BadPayload)?
        .to_string();
    let p = &payload[1 + code_len..];
    let has_pos = p[20];
    let position = match has_pos {
        0 => None,
        1 => Some((
            f64::from_be_bytes(p[21..29].try_into().unwrap()),
            f64::from_be_bytes(p[29..37].try_into().unwrap()),
        )),
        _ => return Err(FrameError::BadPayload),
    };
    Ok(AlertHeader {
        alarm_code,
        unit_id: u64::from_be_bytes(p[0..8].try_into().unwrap()),
        seq_no: u32::from_be_bytes(p[8..12].try_into().unwrap()),
        t: f64::from_be_bytes(p[12..20].try_into().unwrap()),
        position,
    })
}

pub fn decode_alert_payload(payload: &[u8]) -> Result<AlertMessage, FrameError> {
    let header = decode_alert_header(payload)?;
    let code_len = payload[0] as usize;
    let card = decode_card(&payload[1 + code_len + 37..])?;
    Ok(AlertMessage {
        alarm_code: header.alarm_code,
        t: header.t,
        position: header.position,
        card,
        unit_id: header.unit_id,
        seq_no: header.seq_no,
    })
}

pub fn alert_frame(alert: &AlertMessage) -> Result<Frame, CardError> {
    Ok(Frame::new(MsgType::Alert, encode_alert_payload(alert)?))
}

pub fn read_event_frame(ev: &ReadEvent) -> Result<Frame, CardError> {
    Ok(Frame::new(MsgType::ReadEvent, encode_read_event_payload(ev)?))
}

// --- topology -------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortalKind {
    Relay,
    Aggregator,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TopologyError {
    #[error("empty topology")]
    EmptyTopology,
    #[error("portal positions must be sorted ascending")]
    Unsorted,
    #[error("ratio must be at least 1")]
    BadRatio,
}

#[derive(Debug)]
pub struct Portal {
    pub portal_id: u32,
    pub position_m: f64,
    pub kind: PortalKind,
    pub next_hop: Option<u32>,
    pub assigned_aggregator: u32,
    pub read_range_m: f64,
    pub backup_enabled: bool,
    pub backup_log: Vec<ReadEvent>,
    /// RELAY: frames awaiting forwarding. AGGREGATOR: unused.
    pub outbox: VecDeque<Frame>,
    /// AGGREGATOR: events awaiting dispatch ACK.
    pub pending_events: Vec<ReadEvent>,
    pub crc_drops: u64,
    last_read_t: HashMap<u64, f64>,
    pass_no: HashMap<u64, u32>,
}

impl Portal {
    fn new(portal_id: u32, position_m: f64, kind: PortalKind, assigned_aggregator: u32) -> Self {
        Portal {
            portal_id,
            position_m,
            kind,
            next_hop: None,
            assigned_aggregator,
            read_range_m: DEFAULT_READ_RANGE_M,
            backup_enabled: kind == PortalKind::Aggregator,
            backup_log: Vec::new(),
            outbox: VecDeque::new(),
            pending_events: Vec::new(),
            crc_drops: 0,
            last_read_t: HashMap::new(),
            pass_no: HashMap::new(),
        }
    }

    /// One observation attempt: emits a read event iff the truck is within
    /// read range, at least one tag is visible, and the passage cooldown for
    /// this truck elapsed. The event is queued toward dispatch.
    pub fn observe(
        &mut self,
        truck_position_m: f64,
        visible_tags: &[(u32, HazmatCard)],
        now: f64,
    ) -> Option<ReadEvent> {
        if (truck_position_m - self.position_m).abs() > self.read_range_m {
            return None;
        }
        let (c_id, card) = visible_tags.first()?;
        let t_id = card.t_id;
        if let Some(&last) = self.last_read_t.get(&t_id) {
            if now - last < READ_COOLDOWN_S {
                return None;
            }
        }
        self.last_read_t.insert(t_id, now);
        let pass = self.pass_no.entry(t_id).or_insert(0);
        *pass += 1;
        let event = ReadEvent {
            event_id: EventId { portal_id: self.portal_id, c_id: *c_id, pass_no: *pass },
            t: now,
            t_id,
            card: card.clone(),
        };
        if self.backup_enabled {
            self.backup_log.push(event.clone());
        }
        match self.kind {
            PortalKind::Relay => {
                if let Ok(frame) = read_event_frame(&event) {
                    self.outbox.push_back(frame);
                }
            }
            PortalKind::Aggregator => self.pending_events.push(event.clone()),
        }
        Some(event)
    }

    /// Relay side of store-and-forward: drains the outbox for transmission
    /// when the link is up. Frames stay queued otherwise.
    pub fn take_transmissions(&mut self, link_up: bool) -> Vec<Frame> {
        if !link_up {
            return Vec::new();
        }
        self.outbox.drain(..).collect()
    }

    /// Accepts an incoming frame (bytes on the wire). Corrupted frames are
    /// dropped and counted; the sender keeps its copy and retransmits.
    pub fn receive(&mut self, bytes: &[u8]) -> Result<(), FrameError> {
        let frame = match Frame::from_bytes(bytes) {
            Ok(f) => f,
            Err(e) => {
                self.crc_drops += 1;
                return Err(e);
            }
        };
        match self.kind {
            PortalKind::Relay => self.outbox.push_back(frame),
            PortalKind::Aggregator => match frame.msg_type {
                MsgType::ReadEvent => match decode_read_event_payload(&frame.payload) {
                    Ok(ev) => self.pending_events.push(ev),
                    Err(e) => {
                        self.crc_drops += 1;
                        return Err(e);
                    }
                },
                MsgType::Batch => {
                    for entry in split_batch_payload(&frame.payload)? {
                        match decode_read_event_payload(entry) {
                            Ok(ev) => self.pending_events.push(ev),
                            Err(_) => self.crc_drops += 1,
                        }
                    }
                }
                _ => return Err(FrameError::BadPayload),
            },
        }
        Ok(())
    }

    /// Aggregator uplink: packs pending events into BATCH frames. Events
    /// remain pending until `ack_uplink` confirms the dispatch ACK.
    pub fn uplink(&mut self) -> Vec<Frame> {
        self.pending_events
            .chunks(MAX_BATCH_EVENTS)
            .map(|chunk| Frame::new(MsgType::Batch, encode_batch_payload(chunk).expect("valid card")))
            .collect()
    }

    /// Dispatch acknowledged the first `count` pending events.
    pub fn ack_uplink(&mut self, count: usize) {
        self.pending_events.drain(..count.min(self.pending_events.len()));
    }

    pub fn queued_len(&self) -> usize {
        self.outbox.len() + self.pending_events.len()
    }

    /// Line-delimited backup log: `t|portal_id|c_id|pass_no|t_id`.
    pub fn backup_log_text(&self) -> String {
        let mut out = String::new();
        for ev in &self.backup_log {
            out.push_str(&format!(
                "{:.3}|{}|{}|{}|{}\n",
                ev.t, ev.event_id.portal_id, ev.event_id.c_id, ev.event_id.pass_no, ev.t_id
            ));
        }
        out
    }
}

/// Partitions portals into consecutive groups of at most `ratio`, puts the
/// aggregator at the center of each group and chains each relay one hop
/// toward it.
// the index doubles as the portal id, so a range loop reads better here
#[allow(clippy::needless_range_loop)]
pub fn assign_topology(positions: &[f64], ratio: usize) -> Result<Vec<Portal>, TopologyError> {
    if positions.is_empty() {
        return Err(TopologyError::EmptyTopology);
    }
    if ratio < 1 {
        return Err(TopologyError::BadRatio);
    }
    if positions.windows(2).any(|w| w[0] > w[1]) {
        return Err(TopologyError::Unsorted);
    }
    let mut portals = Vec::with_capacity(positions.len());
    for group_start in (0..positions.len()).step_by(ratio) {
        let group_end = (group_start + ratio).min(positions.len());
        let agg_idx = group_start + (group_end - group_start) / 2;
        let agg_id = agg_idx as u32 + 1;
        for idx in group_start..group_end {
            let id = idx as u32 + 1;
            let kind = if idx == agg_idx { PortalKind::Aggregator } else { PortalKind::Relay };
            let mut portal = Portal::new(id, positions[idx], kind, agg_id);
            if kind == PortalKind::Relay {
                portal.next_hop = Some(if idx < agg_idx { id + 1 } else { id - 1 });
            }
            portals.push(portal);
        }
    }
    Ok(portals)
}
