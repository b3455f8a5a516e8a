//! Authorities dispatch endpoint: idempotent ingestion of alert and read
//! frames, truck tracking queries and report generation, with a replayable
//! line-delimited persistence log.

use crate::portal::{
    decode_alert_header, decode_alert_payload, decode_read_event_header,
    decode_read_event_payload, split_batch_payload, EventId, Frame, FrameError, MsgType,
    ReadEvent,
};
use crate::truck::AlertMessage;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum StoreKey {
    Alert(u64, u32),
    Read(EventId),
}

/// Acknowledgement of a well-formed frame. Duplicates and quarantined
/// entries are still acknowledged so senders stop retransmitting.
#[derive(Debug, Clone, PartialEq)]
pub struct Ack {
    pub stored: Vec<StoreKey>,
    pub duplicates: u32,
    pub quarantined: u32,
}

impl Ack {
    pub fn accepted(&self) -> usize {
        self.stored.len() + self.duplicates as usize + self.quarantined as usize
    }

    pub fn to_frame(&self) -> Frame {
        let status = if self.quarantined > 0 { 1u8 } else { 0u8 };
        Frame::new(MsgType::Ack, vec![status])
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DispatchError {
    #[error("malformed frame: {0}")]
    MalformedFrame(#[from] FrameError),
    #[error("invalid range: from > to")]
    InvalidRange,
    #[error("malformed log line {0}: {1}")]
    MalformedLog(usize, String),
}

#[derive(Debug, Clone)]
pub struct QuarantineRecord {
    pub reason: String,
    pub payload_hex: String,
}

#[derive(Debug, Default)]
pub struct EventStore {
    alerts: BTreeMap<(u64, u32), AlertMessage>,
    reads: BTreeMap<EventId, ReadEvent>,
    ingest_order: Vec<StoreKey>,
    quarantine: Vec<QuarantineRecord>,
    log_lines: Vec<String>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn unhex(s: &str) -> Option<Vec<u8>> {
    if !s.len().is_multiple_of(2) {
        return None;
    }
    (0..s.len() / 2)
        .map(|i| u8::from_str_radix(&s[i * 2..i * 2 + 2], 16).ok())
        .collect()
}

impl EventStore {
    pub fn new() -> EventStore {
        EventStore::default()
    }

    pub fn alerts_len(&self) -> usize {
        self.alerts.len()
    }

    pub fn reads_len(&self) -> usize {
        self.reads.len()
    }

    pub fn quarantine(&self) -> &[QuarantineRecord] {
        &self.quarantine
    }

    pub fn ingest_order(&self) -> &[StoreKey] {
        &self.ingest_order
    }

    /// Ingest raw frame bytes. Idempotent: duplicates are acknowledged and
    /// ignored. A frame whose card fails decode is acknowledged and
    /// quarantined so a poison message cannot wedge a portal queue.
    pub fn ingest(&mut self, frame_bytes: &[u8]) -> Result<Ack, DispatchError> {
        let frame = Frame::from_bytes(frame_bytes)?;
        self.ingest_frame(&frame)
    }

    pub fn ingest_frame(&mut self, frame: &Frame) -> Result<Ack, DispatchError> {
        let mut ack = Ack { stored: Vec::new(), duplicates: 0, quarantined: 0 };
        match frame.msg_type {
            MsgType::Alert => self.ingest_alert(&frame.payload, &mut ack)?,
            MsgType::ReadEvent => self.ingest_read(&frame.payload, &mut ack)?,
            MsgType::Batch => {
                for entry in split_batch_payload(&frame.payload)? {
                    self.ingest_read(entry, &mut ack)?;
                }
            }
            MsgType::Ack => return Err(DispatchError::MalformedFrame(FrameError::BadPayload)),
        }
        Ok(ack)
    }

    fn ingest_alert(&mut self, payload: &[u8], ack: &mut Ack) -> Result<(), DispatchError> {
        let header = decode_alert_header(payload)?;
        let key = (header.unit_id, header.seq_no);
        if self.alerts.contains_key(&key) {
            ack.duplicates += 1;
            return Ok(());
        }
        match decode_alert_payload(payload) {
            Ok(alert) => {
                self.log_lines.push(format!(
                    "{:.3}|ALERT|{}:{}|{}",
                    alert.t,
                    alert.unit_id,
                    alert.seq_no,
                    hex(payload)
                ));
                self.alerts.insert(key, alert);
                self.ingest_order.push(StoreKey::Alert(key.0, key.1));
                ack.stored.push(StoreKey::Alert(key.0, key.1));
            }
            Err(e) => {
                ack.quarantined += 1;
                self.quarantine.push(QuarantineRecord {
                    reason: format!("CardDecodeFailure: {e}"),
                    payload_hex: hex(payload),
                });
                self.log_lines.push(format!(
                    "{:.3}|QUAR|{}:{}|{}",
                    header.t,
                    header.unit_id,
                    header.seq_no,
                    hex(payload)
                ));
            }
        }
        Ok(())
    }

    fn ingest_read(&mut self, payload: &[u8], ack: &mut Ack) -> Result<(), DispatchError> {
        let header = decode_read_event_header(payload)?;
        if self.reads.contains_key(&header.event_id) {
            ack.duplicates += 1;
            return Ok(());
        }
        match decode_read_event_payload(payload) {
            Ok(event) => {
                self.log_lines.push(format!(
                    "{:.3}|READ|{}|{}",
                    event.t,
                    event.event_id,
                    hex(payload)
                ));
                self.ingest_order.push(StoreKey::Read(event.event_id));
                self.reads.insert(event.event_id, event);
                ack.stored.push(StoreKey::Read(header.event_id));
            }
            Err(e) => {
                ack.quarantined += 1;
                self.quarantine.push(QuarantineRecord {
                    reason: format!("CardDecodeFailure: {e}"),
                    payload_hex: hex(payload),
                });
                self.log_lines.push(format!(
                    "{:.3}|QUAR|{}|{}",
                    header.t,
                    header.event_id,
                    hex(payload)
                ));
            }
        }
        Ok(())
    }

    /// All read events for a truck, time-ascending.
    pub fn track(&self, t_id: u64) -> Vec<(u32, f64)> {
        let mut rows: Vec<(u32, f64)> = self
            .reads
            .values()
            .filter(|e| e.t_id == t_id)
            .map(|e| (e.event_id.portal_id, e.t))
            .collect();
        rows.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        rows
    }

    /// All ingested alerts, newest first. Alerts never expire within a run.
    pub fn active_alerts(&self) -> Vec<&AlertMessage> {
        let mut alerts: Vec<&AlertMessage> = self.alerts.values().collect();
        alerts.sort_by(|a, b| {
            b.t.partial_cmp(&a.t).unwrap().then((b.unit_id, b.seq_no).cmp(&(a.unit_id, a.seq_no)))
        });
        alerts
    }

    /// Summary over the half-open time range `[t_from, t_to)`.
    pub fn report(&self, t_from: f64, t_to: f64) -> Result<ReportSummary, DispatchError> {
        if t_from > t_to {
            return Err(DispatchError::InvalidRange);
        }
        let mut summary = ReportSummary {
            t_from,
            t_to,
            ..ReportSummary::default()
        };
        for event in self.reads.values() {
            if event.t >= t_from && event.t < t_to {
                *summary.reads_per_portal.entry(event.event_id.portal_id).or_insert(0) += 1;
                summary.trucks_seen.insert(event.t_id);
                summary.read_count += 1;
            }
        }
        summary.alert_count =
            self.alerts.values().filter(|a| a.t >= t_from && a.t < t_to).count() as u64;
        Ok(summary)
    }

    /// Replayable persistence log: `t|kind|key|payload_hex` per record.
    pub fn persistence_log(&self) -> String {
        let mut out = self.log_lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }

    /// Rebuilds a store from its persistence log.
    pub fn replay(text: &str) -> Result<EventStore, DispatchError> {
        let mut store = EventStore::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.splitn(4, '|').collect();
            if parts.len() != 4 {
                return Err(DispatchError::MalformedLog(i + 1, "expected 4 fields".into()));
            }
            let payload = unhex(parts[3])
                .ok_or_else(|| DispatchError::MalformedLog(i + 1, "bad payload hex".into()))?;
            let mut ack = Ack { stored: Vec::new(), duplicates: 0, quarantined: 0 };
            match parts[1] {
                "ALERT" => store
                    .ingest_alert(&payload, &mut ack)
                    .map_err(|e| DispatchError::MalformedLog(i + 1, e.to_string()))?,
                "READ" => store
                    .ingest_read(&payload, &mut ack)
                    .map_err(|e| DispatchError::MalformedLog(i + 1, e.to_string()))?,
                "QUAR" => {
                    store.quarantine.push(QuarantineRecord {
                        reason: "CardDecodeFailure (replayed)".into(),
                        payload_hex: parts[3].to_string(),
                    });
                }
                other => {
                    return Err(DispatchError::MalformedLog(
                        i + 1,
                        format!("unknown record kind '{other}'"),
                    ))
                }
            }
        }
        Ok(store)
    }
}

/// Mergeable report over a time range. Merging reports of adjacent disjoint
/// ranges equals the report over the union.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportSummary {
    pub t_from: f64,
    pub t_to: f64,
    pub reads_per_portal: BTreeMap<u32, u64>,
    pub trucks_seen: BTreeSet<u64>,
    pub read_count: u64,
    pub alert_count: u64,
}

impl ReportSummary {
    pub fn merge(mut self, other: ReportSummary) -> ReportSummary {
        for (portal, count) in other.reads_per_portal {
            *self.reads_per_portal.entry(portal).or_insert(0) += count;
        }
        self.trucks_seen.extend(other.trucks_seen);
        self.read_count += other.read_count;
        self.alert_count += other.alert_count;
        self.t_from = self.t_from.min(other.t_from);
        self.t_to = self.t_to.max(other.t_to);
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("range: [{:.3}, {:.3})\n", self.t_from, self.t_to));
        out.push_str(&format!("read events: {}\n", self.read_count));
        out.push_str(&format!("distinct trucks: {}\n", self.trucks_seen.len()));
        out.push_str(&format!("alerts: {}\n", self.alert_count));
        out.push_str("reads per portal:\n");
        for (portal, count) in &self.reads_per_portal {
            out.push_str(&format!("  portal {portal:>4}  {count}\n"));
        }
        out
    }
}

/// Serves one loopback connection speaking the frame wire format: reads
/// frames, ingests them, answers each with an ACK frame. Malformed input
/// closes the connection.
pub fn handle_connection<S: Read + Write>(
    stream: &mut S,
    store: &std::sync::Mutex<EventStore>,
) -> std::io::Result<()> {
    loop {
        let mut header = [0u8; 7];
        match stream.read_exact(&mut header) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(()),
            Err(e) => return Err(e),
        }
        let len = u16::from_be_bytes([header[5], header[6]]) as usize;
        let mut rest = vec![0u8; len + 4];
        stream.read_exact(&mut rest)?;
        let mut bytes = header.to_vec();
        bytes.extend_from_slice(&rest);
        let ack = {
            let mut guard = store.lock().expect("store poisoned");
            match guard.ingest(&bytes) {
                Ok(ack) => ack,
                Err(_) => return Ok(()), // malformed: drop the connection
            }
        };
        stream.write_all(&ack.to_frame().to_bytes())?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card::encode_card;
    use crate::fixtures::methane_card;
    use crate::portal::{alert_frame, encode_batch_payload, read_event_frame};
    use crate::truck::AlertMessage;

    fn event(portal_id: u32, pass_no: u32, t: f64, t_id: u64) -> ReadEvent {
        ReadEvent {
            event_id: EventId { portal_id, c_id: 17, pass_no },
            t,
            t_id,
            card: methane_card(),
        }
    }

    fn alert(seq: u32, t: f64) -> AlertMessage {
        AlertMessage {
            alarm_code: "ALERT ACCIDENT".into(),
            t,
            position: Some((44.93, 26.02)),
            card: methane_card(),
            unit_id: 1001,
            seq_no: seq,
        }
    }

    #[test]
    fn batch_ingest_is_idempotent() {
        let mut store = EventStore::new();
        let events = vec![event(1, 1, 1.0, 42), event(2, 1, 2.0, 42)];
        let frame = Frame::new(MsgType::Batch, encode_batch_payload(&events).unwrap());
        let bytes = frame.to_bytes();
        let first = store.ingest(&bytes).unwrap();
        assert_eq!(first.stored.len(), 2);
        let second = store.ingest(&bytes).unwrap();
        assert_eq!(second.stored.len(), 0);
        assert_eq!(second.duplicates, 2);
        assert_eq!(store.reads_len(), 2);
    }

    #[test]
    fn alert_is_queryable_after_ingest() {
        let mut store = EventStore::new();
        let frame = alert_frame(&alert(1, 100.0)).unwrap();
        store.ingest(&frame.to_bytes()).unwrap();
        let alerts = store.active_alerts();
        assert_eq!(alerts.len(), 1);
        assert_eq!(alerts[0].alarm_code, "ALERT ACCIDENT");
        assert_eq!(alerts[0].card.s_id, "0000002C");
    }

    #[test]
    fn bad_crc_is_malformed_and_stores_nothing() {
        let mut store = EventStore::new();
        let mut bytes = read_event_frame(&event(1, 1, 1.0, 42)).unwrap().to_bytes();
        bytes[30] ^= 0xAA;
        assert!(matches!(
            store.ingest(&bytes),
            Err(DispatchError::MalformedFrame(FrameError::CrcMismatch))
        ));
        assert_eq!(store.reads_len(), 0);
    }

    #[test]
    fn poison_card_is_acked_and_quarantined() {
        let mut store = EventStore::new();
        let ev = event(1, 1, 1.0, 42);
        let mut payload = crate::portal::encode_read_event_payload(&ev).unwrap();
        // corrupt the embedded card but keep the frame CRC valid
        payload[100] ^= 0xFF;
        let frame = Frame::new(MsgType::ReadEvent, payload);
        let ack = store.ingest(&frame.to_bytes()).unwrap();
        assert_eq!(ack.quarantined, 1);
        assert!(ack.stored.is_empty());
        assert_eq!(store.reads_len(), 0);
        assert_eq!(store.quarantine().len(), 1);
        assert!(store.quarantine()[0].reason.contains("CardDecodeFailure"));
    }

    #[test]
    fn track_is_time_ordered_and_partitioned_per_truck() {
        let mut store = EventStore::new();
        for (portal, t, truck) in [(2u32, 5.0, 42u64), (1, 1.0, 42), (3, 9.0, 42), (1, 2.0, 7)] {
            let ev = event(portal, if truck == 7 { 2 } else { 1 }, t, truck);
            store.ingest(&read_event_frame(&ev).unwrap().to_bytes()).unwrap();
        }
        assert_eq!(store.track(42), vec![(1, 1.0), (2, 5.0), (3, 9.0)]);
        assert_eq!(store.track(7), vec![(1, 2.0)]);
        assert_eq!(store.track(9999), vec![]);
    }

    #[test]
    fn alerts_newest_first_and_deduped() {
        let mut store = EventStore::new();
        let a1 = alert_frame(&alert(1, 10.0)).unwrap();
        let a2 = alert_frame(&alert(2, 20.0)).unwrap();
        store.ingest(&a1.to_bytes()).unwrap();
        store.ingest(&a2.to_bytes()).unwrap();
        store.ingest(&a1.to_bytes()).unwrap(); // transport retry
        let alerts = store.active_alerts();
        assert_eq!(alerts.len(), 2);
        assert_eq!(alerts[0].seq_no, 2);
    }

    #[test]
    fn report_is_additive_over_adjacent_ranges() {
        let mut store = EventStore::new();
        for (portal, t) in [(1u32, 1.0), (1, 6.0), (2, 3.0), (2, 8.0)] {
            let ev = event(portal, (t * 10.0) as u32, t, 42);
            store.ingest(&read_event_frame(&ev).unwrap().to_bytes()).unwrap();
        }
        store.ingest(&alert_frame(&alert(1, 7.0)).unwrap().to_bytes()).unwrap();
        let full = store.report(0.0, 10.0).unwrap();
        let left = store.report(0.0, 5.0).unwrap();
        let right = store.report(5.0, 10.0).unwrap();
        assert_eq!(left.merge(right), full);
        assert_eq!(full.read_count, 4);
        assert_eq!(full.alert_count, 1);
    }

    #[test]
    fn empty_report_and_invalid_range() {
        let store = EventStore::new();
        let report = store.report(0.0, 100.0).unwrap();
        assert_eq!(report.read_count, 0);
        assert_eq!(report.alert_count, 0);
        assert!(matches!(store.report(5.0, 1.0), Err(DispatchError::InvalidRange)));
    }

    #[test]
    fn persistence_log_replays_to_identical_store() {
        let mut store = EventStore::new();
        store.ingest(&read_event_frame(&event(1, 1, 1.0, 42)).unwrap().to_bytes()).unwrap();
        store.ingest(&alert_frame(&alert(1, 5.0)).unwrap().to_bytes()).unwrap();
        let log = store.persistence_log();
        let replayed = EventStore::replay(&log).unwrap();
        assert_eq!(replayed.reads_len(), store.reads_len());
        assert_eq!(replayed.alerts_len(), store.alerts_len());
        assert_eq!(replayed.track(42), store.track(42));
        assert_eq!(replayed.persistence_log(), log);
    }

    #[test]
    fn concurrent_ingest_is_safe_behind_a_mutex() {
        use std::sync::{Arc, Mutex};
        let store = Arc::new(Mutex::new(EventStore::new()));
        let mut handles = Vec::new();
        for portal in 1..=4u32 {
            let store = Arc::clone(&store);
            handles.push(std::thread::spawn(move || {
                for pass in 1..=25u32 {
                    let ev = event(portal, pass, pass as f64, 42);
                    let bytes = read_event_frame(&ev).unwrap().to_bytes();
                    store.lock().unwrap().ingest(&bytes).unwrap();
                }
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(store.lock().unwrap().reads_len(), 100);
    }

    #[test]
    fn minimal_card_survives_the_wire() {
        // all-zero blob has zero ecc; make sure framing does not choke on it
        let card = crate::card::HazmatCard::default();
        let blob = encode_card(&card).unwrap();
        assert_eq!(blob.stored_ecc(), 0);
        let ev = ReadEvent {
            event_id: EventId { portal_id: 1, c_id: 0, pass_no: 1 },
            t: 0.0,
            t_id: 0,
            card,
        };
        let mut store = EventStore::new();
        let ack = store.ingest(&read_event_frame(&ev).unwrap().to_bytes()).unwrap();
        assert_eq!(ack.stored.len(), 1);
    }
}
