//! Property-based coverage on top of the acceptance gate: proptest-driven
//! round trips for the card codec, the dump format and the wire frame.

mod common;

use hazmat::card::{card_from_dump, card_to_dump, decode_card, encode_card, HazmatCard};
use hazmat::portal::{Frame, FrameError, MsgType};
use proptest::prelude::*;

fn printable(max: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(0x20u8..=0x7E, 0..=max)
        .prop_map(|bytes| String::from_utf8(bytes).unwrap())
}

fn hex_code(width: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(proptest::sample::select(b"0123456789ABCDEF".to_vec()), width)
        .prop_map(|bytes| String::from_utf8(bytes).unwrap())
}

fn code_list(width: usize, max: usize) -> impl Strategy<Value = Vec<String>> {
    proptest::collection::vec(hex_code(width), 0..=max)
}

fn phone() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(String::new()),
        proptest::collection::vec(b'0'..=b'9', 1..=11)
            .prop_map(|d| format!("+{}", String::from_utf8(d).unwrap())),
    ]
}

prop_compose! {
    fn valid_card()(
        c_id in any::<u32>(),
        t_id in any::<u64>(),
        t_rn in printable(16),
        op_id in any::<u64>(),
        op_name in printable(128),
        op_phone in phone(),
        s_id in prop_oneof![Just(String::new()), hex_code(8)],
        comp_ids in code_list(8, 5),
        ign_p in printable(5),
        sig_temp in printable(5),
        exm_ids in code_list(4, 15),
        b_pnt in printable(4),
        m_pnt in printable(4),
        s_dens in printable(8),
        tox_v in proptest::sample::select(vec!["", "00", "01"]),
        kemler_no in printable(8),
        onu_no in printable(8),
        et_ids in code_list(4, 5),
        user_def in any::<[u8; 40]>(),
    ) -> HazmatCard {
        HazmatCard {
            c_id, t_id, t_rn, op_id, op_name, op_phone, s_id, comp_ids, ign_p, sig_temp,
            exm_ids, b_pnt, m_pnt, s_dens, tox_v: tox_v.to_string(), kemler_no, onu_no,
            et_ids, user_def,
        }
    }
}

proptest! {
    #[test]
    fn blob_roundtrip(card in valid_card()) {
        let blob = encode_card(&card).unwrap();
        prop_assert_eq!(blob.as_bytes().len(), 512);
        let back = decode_card(blob.as_bytes()).unwrap();
        prop_assert_eq!(back, card);
    }

    #[test]
    fn dump_roundtrip(card in valid_card()) {
        let dump = card_to_dump(&card);
        let back = card_from_dump(&dump).unwrap();
        prop_assert_eq!(back, card);
    }

    #[test]
    fn frame_roundtrip(payload in proptest::collection::vec(any::<u8>(), 0..2048)) {
        let frame = Frame::new(MsgType::ReadEvent, payload);
        let bytes = frame.to_bytes();
        let back = Frame::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back, frame);
    }

    #[test]
    fn frame_detects_any_single_byte_corruption(
        payload in proptest::collection::vec(any::<u8>(), 0..256),
        idx in any::<proptest::sample::Index>(),
        flip in 1u8..=255,
    ) {
        let bytes = Frame::new(MsgType::Batch, payload).to_bytes();
        let mut corrupt = bytes.clone();
        let i = idx.index(corrupt.len());
        corrupt[i] ^= flip;
        prop_assert!(Frame::from_bytes(&corrupt).is_err());
    }

    #[test]
    fn truncated_frames_are_rejected(
        payload in proptest::collection::vec(any::<u8>(), 0..256),
        cut in any::<proptest::sample::Index>(),
    ) {
        let bytes = Frame::new(MsgType::Alert, payload).to_bytes();
        let keep = cut.index(bytes.len()); // strictly shorter than the frame
        let err = Frame::from_bytes(&bytes[..keep]).unwrap_err();
        prop_assert!(matches!(
            err,
            FrameError::Truncated | FrameError::LengthMismatch | FrameError::BadMagic
        ));
    }
}
