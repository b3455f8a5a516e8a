//! The intervention-place workflow: read the truck's tag, resolve every
//! code against the offline registry and print the intervention sheet.
//! Works with no network at all.
//!
//! Run with: cargo run --example portable_reader

use hazmat::card::{decode_card, encode_card};
use hazmat::fixtures::{methane_card, write_registry};
use hazmat::registry::load_registry;

fn main() {
    // tag read: in the field this comes over RFID, here from the encoder
    let blob = encode_card(&methane_card()).expect("fixture card is valid");
    let card = decode_card(blob.as_bytes()).expect("tag image intact");

    let dir = tempfile::tempdir().expect("tempdir");
    write_registry(dir.path()).expect("write registry");
    let registry = load_registry(dir.path()).expect("load registry");
    println!("registry: {} entries", registry.len());

    let sheet = registry.resolve_card(&card);
    print!("{}", sheet.render());
}
