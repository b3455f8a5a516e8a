//! Encode a hazard card into its 512-byte tag image, corrupt one byte to
//! show the integrity check, then decode it back.
//!
//! Run with: cargo run --example card_roundtrip

use hazmat::card::{card_to_dump, decode_card, encode_card};
use hazmat::fixtures::methane_card;

fn main() {
    let card = methane_card();
    println!("--- card fields ---\n{}", card_to_dump(&card));

    let blob = encode_card(&card).expect("fixture card is valid");
    println!("encoded: {} bytes, ecc={:016X}", blob.as_bytes().len(), blob.stored_ecc());

    // any corruption of the 504 protected bytes trips the ECC
    let mut corrupt = blob.as_bytes().to_vec();
    corrupt[177] ^= 0x01; // first byte of the substance code
    println!("corrupted byte 177 -> {:?}", decode_card(&corrupt).unwrap_err());

    let back = decode_card(blob.as_bytes()).expect("clean blob decodes");
    assert_eq!(back, card);
    println!("clean blob decodes back to the identical card");
}
