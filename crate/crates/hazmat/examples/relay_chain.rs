//! Store-and-forward along a relay chain: a read at the edge portal hops
//! toward the group's aggregator one link per step, survives a link outage,
//! and finally reaches dispatch as a batched uplink.
//!
//! Run with: cargo run --example relay_chain

use hazmat::dispatch::EventStore;
use hazmat::fixtures::methane_card;
use hazmat::portal::{assign_topology, PortalKind};

fn main() {
    let positions: Vec<f64> = (0..7).map(|i| 500.0 * i as f64).collect();
    let mut portals = assign_topology(&positions, 10).unwrap();
    for p in &portals {
        println!(
            "portal {} at {:>6.0} m  {:?}  next_hop={:?}  aggregator={}",
            p.portal_id, p.position_m, p.kind, p.next_hop, p.assigned_aggregator
        );
    }

    // the truck passes the first portal (a relay)
    let tags = vec![(17u32, methane_card())];
    let event = portals[0].observe(positions[0], &tags, 1.0).expect("in range");
    println!("\nread at portal 1: event {}", event.event_id);

    // hop the frame toward the aggregator; the second link starts down
    let mut store = EventStore::new();
    for step in 1.. {
        let link_up = step != 2; // one-step outage on the way
        let mut deliveries = Vec::new();
        for portal in &mut portals {
            if portal.kind != PortalKind::Relay {
                continue;
            }
            let frames = portal.take_transmissions(link_up);
            if !frames.is_empty() {
                deliveries.push((portal.portal_id, portal.next_hop.unwrap(), frames));
            }
        }
        if deliveries.is_empty() && portals.iter().all(|p| p.queued_len() == 0) {
            break;
        }
        for (from, to, frames) in deliveries {
            println!("step {step}: portal {from} -> portal {to} ({} frame)", frames.len());
            let target = portals.iter_mut().find(|p| p.portal_id == to).unwrap();
            for frame in frames {
                target.receive(&frame.to_bytes()).unwrap();
            }
        }
        if !link_up {
            println!("step {step}: link down, frame held in the outbox");
        }

        // aggregator uplinks whatever arrived
        for portal in &mut portals {
            if portal.kind == PortalKind::Aggregator && !portal.pending_events.is_empty() {
                let pending = portal.pending_events.len();
                let mut acked = 0;
                for frame in portal.uplink() {
                    acked += store.ingest(&frame.to_bytes()).unwrap().accepted();
                }
                portal.ack_uplink(acked);
                println!("step {step}: aggregator {} uplinked {pending} event(s)", portal.portal_id);
            }
        }
    }

    println!("\ndispatch track for truck 1001: {:?}", store.track(1001));
}
