//! The 512-byte hazard card: field layout, bit-exact encode/decode,
//! validation and the trailing CRC-64 integrity field.
//!
//! Layout (fixed offsets, integers big-endian, ASCII fields right-padded
//! with 0x00, list fields packed entry-by-entry):
//!
//! ```text
//! c_id[0..4] t_id[4..12] t_rn[12..28] op_id[28..36] op_name[36..164]
//! op_phone[164..177] s_id[177..185] comp_ids[185..225] ign_p[225..230]
//! sig_temp[230..235] exm_ids[235..295] b_pnt[295..299] m_pnt[299..303]
//! s_dens[303..311] tox_v[311..313] kemler_no[313..321] onu_no[321..329]
//! et_ids[329..349] user_def[349..389] reserved[389..504] ecc[504..512]
//! ```

use crate::crc::crc64;
use std::fmt;

pub const BLOB_LEN: usize = 512;
pub const ECC_OFFSET: usize = 504;

pub const T_RN_MAX: usize = 16;
pub const OP_NAME_MAX: usize = 128;
pub const OP_PHONE_MAX: usize = 13;
pub const S_ID_WIDTH: usize = 8;
pub const COMP_ID_WIDTH: usize = 8;
pub const COMP_IDS_MAX: usize = 5;
pub const EXM_ID_WIDTH: usize = 4;
pub const EXM_IDS_MAX: usize = 15;
pub const ET_ID_WIDTH: usize = 4;
pub const ET_IDS_MAX: usize = 5;
pub const USER_DEF_LEN: usize = 40;

const OFF_C_ID: usize = 0;
const OFF_T_ID: usize = 4;
const OFF_T_RN: usize = 12;
const OFF_OP_ID: usize = 28;
const OFF_OP_NAME: usize = 36;
const OFF_OP_PHONE: usize = 164;
const OFF_S_ID: usize = 177;
const OFF_COMP_IDS: usize = 185;
const OFF_IGN_P: usize = 225;
const OFF_SIG_TEMP: usize = 230;
const OFF_EXM_IDS: usize = 235;
const OFF_B_PNT: usize = 295;
const OFF_M_PNT: usize = 299;
const OFF_S_DENS: usize = 303;
const OFF_TOX_V: usize = 311;
const OFF_KEMLER: usize = 313;
const OFF_ONU: usize = 321;
const OFF_ET_IDS: usize = 329;
const OFF_USER_DEF: usize = 349;
const OFF_RESERVED: usize = 389;

/// Structured hazard card record. Numeric-looking fields (ignition point,
/// boiling point, ...) stay ASCII: the consumer is a human intervention sheet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HazmatCard {
    pub c_id: u32,
    pub t_id: u64,
    pub t_rn: String,
    pub op_id: u64,
    pub op_name: String,
    pub op_phone: String,
    /// Substance code: empty or exactly 8 uppercase hex chars.
    pub s_id: String,
    pub comp_ids: Vec<String>,
    pub ign_p: String,
    pub sig_temp: String,
    pub exm_ids: Vec<String>,
    pub b_pnt: String,
    pub m_pnt: String,
    pub s_dens: String,
    /// "00" non-toxic, "01" toxic, "" unset.
    pub tox_v: String,
    pub kemler_no: String,
    pub onu_no: String,
    pub et_ids: Vec<String>,
    pub user_def: [u8; USER_DEF_LEN],
}

impl Default for HazmatCard {
    fn default() -> Self {
        HazmatCard {
            c_id: 0,
            t_id: 0,
            t_rn: String::new(),
            op_id: 0,
            op_name: String::new(),
            op_phone: String::new(),
            s_id: String::new(),
            comp_ids: Vec::new(),
            ign_p: String::new(),
            sig_temp: String::new(),
            exm_ids: Vec::new(),
            b_pnt: String::new(),
            m_pnt: String::new(),
            s_dens: String::new(),
            tox_v: String::new(),
            kemler_no: String::new(),
            onu_no: String::new(),
            et_ids: Vec::new(),
            user_def: [0u8; USER_DEF_LEN],
        }
    }
}

impl HazmatCard {
    pub fn is_toxic(&self) -> bool {
        self.tox_v == "01"
    }
}

/// Raw 512-byte card image as written to a tag (`.hmc` file content).
#[derive(Clone, PartialEq, Eq)]
pub struct CardBlob(pub [u8; BLOB_LEN]);

impl CardBlob {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<CardBlob, CardError> {
        if bytes.len() != BLOB_LEN {
            return Err(CardError::WrongLength(bytes.len()));
        }
        let mut b = [0u8; BLOB_LEN];
        b.copy_from_slice(bytes);
        Ok(CardBlob(b))
    }

    /// Stored ECC value (big-endian u64 at the tail).
    pub fn stored_ecc(&self) -> u64 {
        u64::from_be_bytes(self.0[ECC_OFFSET..].try_into().unwrap())
    }
}

impl fmt::Debug for CardBlob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CardBlob(512 bytes, ecc={:016X})", self.stored_ecc())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    FieldOverflow { field: &'static str, max: usize, len: usize },
    InvalidAscii { field: &'static str },
    InvalidCode { field: &'static str },
    InvalidToxFlag,
    InvalidPhone,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FieldOverflow { field, max, len } => {
                write!(f, "FieldOverflow({field}): length {len} exceeds {max}")
            }
            Violation::InvalidAscii { field } => write!(f, "InvalidAscii({field})"),
            Violation::InvalidCode { field } => write!(f, "InvalidCode({field})"),
            Violation::InvalidToxFlag => write!(f, "InvalidToxFlag"),
            Violation::InvalidPhone => write!(f, "InvalidPhone"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CardError {
    #[error("wrong blob length {0}, expected 512")]
    WrongLength(usize),
    #[error("ecc mismatch")]
    EccMismatch,
    #[error("reserved region not zero")]
    NonZeroReserved,
    #[error("invalid card: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("dump parse error: {0}")]
    DumpParse(String),
}

fn is_printable_ascii(s: &str) -> bool {
    s.bytes().all(|b| (0x20..=0x7E).contains(&b))
}

fn is_hex_code(s: &str, width: usize) -> bool {
    s.len() == width && s.bytes().all(|b| b.is_ascii_digit() || (b'A'..=b'F').contains(&b))
}

fn check_text(field: &'static str, value: &str, max: usize, out: &mut Vec<Violation>) {
    if !is_printable_ascii(value) {
        out.push(Violation::InvalidAscii { field });
    }
    if value.len() > max {
        out.push(Violation::FieldOverflow { field, max, len: value.len() });
    }
}

fn check_codes(
    field: &'static str,
    codes: &[String],
    width: usize,
    max: usize,
    out: &mut Vec<Violation>,
) {
    if codes.len() > max {
        out.push(Violation::FieldOverflow { field, max, len: codes.len() });
    }
    if codes.iter().any(|c| !is_hex_code(c, width)) {
        out.push(Violation::InvalidCode { field });
    }
}

/// Returns every invariant violation; an empty list means the card is valid.
pub fn validate_card(card: &HazmatCard) -> Vec<Violation> {
    let mut v = Vec::new();
    check_text("t_rn", &card.t_rn, T_RN_MAX, &mut v);
    check_text("op_name", &card.op_name, OP_NAME_MAX, &mut v);
    check_text("op_phone", &card.op_phone, OP_PHONE_MAX, &mut v);
    check_text("ign_p", &card.ign_p, 5, &mut v);
    check_text("sig_temp", &card.sig_temp, 5, &mut v);
    check_text("b_pnt", &card.b_pnt, 4, &mut v);
    check_text("m_pnt", &card.m_pnt, 4, &mut v);
    check_text("s_dens", &card.s_dens, 8, &mut v);
    check_text("kemler_no", &card.kemler_no, 8, &mut v);
    check_text("onu_no", &card.onu_no, 8, &mut v);
    if !card.op_phone.is_empty() {
        let ok = card.op_phone.starts_with('+')
            && (2..=13).contains(&card.op_phone.len())
            && card.op_phone[1..].bytes().all(|b| b.is_ascii_digit());
        if !ok {
            v.push(Violation::InvalidPhone);
        }
    }
    if !card.s_id.is_empty() && !is_hex_code(&card.s_id, S_ID_WIDTH) {
        v.push(Violation::InvalidCode { field: "s_id" });
    }
    check_codes("comp_ids", &card.comp_ids, COMP_ID_WIDTH, COMP_IDS_MAX, &mut v);
    check_codes("exm_ids", &card.exm_ids, EXM_ID_WIDTH, EXM_IDS_MAX, &mut v);
    check_codes("et_ids", &card.et_ids, ET_ID_WIDTH, ET_IDS_MAX, &mut v);
    if !matches!(card.tox_v.as_str(), "" | "00" | "01") {
        v.push(Violation::InvalidToxFlag);
    }
    v
}

/// 8-byte card integrity checksum: CRC-64/ECMA-182 over the given bytes.
pub fn compute_ecc(data: &[u8]) -> [u8; 8] {
    crc64(data).to_be_bytes()
}

fn put_ascii(buf: &mut [u8], off: usize, width: usize, s: &str) {
    debug_assert!(s.len() <= width);
    // slot tail stays 0x00
    buf[off..off + s.len()].copy_from_slice(s.as_bytes());
}

fn put_codes(buf: &mut [u8], off: usize, entry_width: usize, codes: &[String]) {
    for (i, code) in codes.iter().enumerate() {
        let start = off + i * entry_width;
        buf[start..start + entry_width].copy_from_slice(code.as_bytes());
    }
}

/// Encodes a valid card into its 512-byte tag image.
pub fn encode_card(card: &HazmatCard) -> Result<CardBlob, CardError> {
    let violations = validate_card(card);
    if !violations.is_empty() {
        return Err(CardError::Invalid(violations));
    }
    let mut b = [0u8; BLOB_LEN];
    b[OFF_C_ID..OFF_C_ID + 4].copy_from_slice(&card.c_id.to_be_bytes());
    b[OFF_T_ID..OFF_T_ID + 8].copy_from_slice(&card.t_id.to_be_bytes());
    put_ascii(&mut b, OFF_T_RN, T_RN_MAX, &card.t_rn);
    b[OFF_OP_ID..OFF_OP_ID + 8].copy_from_slice(&card.op_id.to_be_bytes());
    put_ascii(&mut b, OFF_OP_NAME, OP_NAME_MAX, &card.op_name);
    put_ascii(&mut b, OFF_OP_PHONE, OP_PHONE_MAX, &card.op_phone);
    put_ascii(&mut b, OFF_S_ID, S_ID_WIDTH, &card.s_id);
    put_codes(&mut b, OFF_COMP_IDS, COMP_ID_WIDTH, &card.comp_ids);
    put_ascii(&mut b, OFF_IGN_P, 5, &card.ign_p);
    put_ascii(&mut b, OFF_SIG_TEMP, 5, &card.sig_temp);
    put_codes(&mut b, OFF_EXM_IDS, EXM_ID_WIDTH, &card.exm_ids);
    put_ascii(&mut b, OFF_B_PNT, 4, &card.b_pnt);
    put_ascii(&mut b, OFF_M_PNT, 4, &card.m_pnt);
    put_ascii(&mut b, OFF_S_DENS, 8, &card.s_dens);
    put_ascii(&mut b, OFF_TOX_V, 2, &card.tox_v);
    put_ascii(&mut b, OFF_KEMLER, 8, &card.kemler_no);
    put_ascii(&mut b, OFF_ONU, 8, &card.onu_no);
    put_codes(&mut b, OFF_ET_IDS, ET_ID_WIDTH, &card.et_ids);
    b[OFF_USER_DEF..OFF_USER_DEF + USER_DEF_LEN].copy_from_slice(&card.user_def);
    let ecc = compute_ecc(&b[..ECC_OFFSET]);
    b[ECC_OFFSET..].copy_from_slice(&ecc);
    Ok(CardBlob(b))
}

fn get_ascii(
    bytes: &[u8],
    off: usize,
    width: usize,
    field: &'static str,
    violations: &mut Vec<Violation>,
) -> String {
    let slot = &bytes[off..off + width];
    let end = slot.iter().rposition(|&b| b != 0).map_or(0, |p| p + 1);
    let content = &slot[..end];
    if content.iter().any(|&b| b == 0 || !(0x20..=0x7E).contains(&b)) {
        violations.push(Violation::InvalidAscii { field });
        return String::new();
    }
    String::from_utf8(content.to_vec()).unwrap()
}

fn get_codes(
    bytes: &[u8],
    off: usize,
    entry_width: usize,
    max: usize,
    field: &'static str,
    violations: &mut Vec<Violation>,
) -> Vec<String> {
    let mut codes = Vec::new();
    let mut gap_seen = false;
    for i in 0..max {
        let start = off + i * entry_width;
        let entry = &bytes[start..start + entry_width];
        if entry.iter().all(|&b| b == 0) {
            gap_seen = true;
            continue;
        }
        // entries must be packed from the front of the slot
        if gap_seen {
            violations.push(Violation::InvalidCode { field });
            continue;
        }
        match std::str::from_utf8(entry) {
            Ok(s) if is_hex_code(s, entry_width) => codes.push(s.to_string()),
            _ => violations.push(Violation::InvalidCode { field }),
        }
    }
    codes
}

/// Decodes a 512-byte tag image, verifying the ECC first.
pub fn decode_card(bytes: &[u8]) -> Result<HazmatCard, CardError> {
    if bytes.len() != BLOB_LEN {
        return Err(CardError::WrongLength(bytes.len()));
    }
    let stored = u64::from_be_bytes(bytes[ECC_OFFSET..].try_into().unwrap());
    if crc64(&bytes[..ECC_OFFSET]) != stored {
        return Err(CardError::EccMismatch);
    }
    if bytes[OFF_RESERVED..ECC_OFFSET].iter().any(|&b| b != 0) {
        return Err(CardError::NonZeroReserved);
    }
    let mut v = Vec::new();
    let card = HazmatCard {
        c_id: u32::from_be_bytes(bytes[OFF_C_ID..OFF_C_ID + 4].try_into().unwrap()),
        t_id: u64::from_be_bytes(bytes[OFF_T_ID..OFF_T_ID + 8].try_into().unwrap()),
        t_rn: get_ascii(bytes, OFF_T_RN, T_RN_MAX, "t_rn", &mut v),
        op_id: u64::from_be_bytes(bytes[OFF_OP_ID..OFF_OP_ID + 8].try_into().unwrap()),
        op_name: get_ascii(bytes, OFF_OP_NAME, OP_NAME_MAX, "op_name", &mut v),
        op_phone: get_ascii(bytes, OFF_OP_PHONE, OP_PHONE_MAX, "op_phone", &mut v),
        s_id: get_ascii(bytes, OFF_S_ID, S_ID_WIDTH, "s_id", &mut v),
        comp_ids: get_codes(bytes, OFF_COMP_IDS, COMP_ID_WIDTH, COMP_IDS_MAX, "comp_ids", &mut v),
        ign_p: get_ascii(bytes, OFF_IGN_P, 5, "ign_p", &mut v),
        sig_temp: get_ascii(bytes, OFF_SIG_TEMP, 5, "sig_temp", &mut v),
        exm_ids: get_codes(bytes, OFF_EXM_IDS, EXM_ID_WIDTH, EXM_IDS_MAX, "exm_ids", &mut v),
        b_pnt: get_ascii(bytes, OFF_B_PNT, 4, "b_pnt", &mut v),
        m_pnt: get_ascii(bytes, OFF_M_PNT, 4, "m_pnt", &mut v),
        s_dens: get_ascii(bytes, OFF_S_DENS, 8, "s_dens", &mut v),
        tox_v: get_ascii(bytes, OFF_TOX_V, 2, "tox_v", &mut v),
        kemler_no: get_ascii(bytes, OFF_KEMLER, 8, "kemler_no", &mut v),
        onu_no: get_ascii(bytes, OFF_ONU, 8, "onu_no", &mut v),
        et_ids: get_codes(bytes, OFF_ET_IDS, ET_ID_WIDTH, ET_IDS_MAX, "et_ids", &mut v),
        user_def: bytes[OFF_USER_DEF..OFF_USER_DEF + USER_DEF_LEN].try_into().unwrap(),
    };
    v.extend(validate_card(&card));
    v.dedup();
    if !v.is_empty() {
        return Err(CardError::Invalid(v));
    }
    Ok(card)
}

const DUMP_FIELDS: [&str; 19] = [
    "c_id", "t_id", "t_rn", "op_id", "op_name", "op_phone", "s_id", "comp_ids", "ign_p",
    "sig_temp", "exm_ids", "b_pnt", "m_pnt", "s_dens", "tox_v", "kemler_no", "onu_no", "et_ids",
    "user_def",
];

/// Human-readable dump: one `field_name: value` line per field in layout
/// order. Doubles as the `card encode` input format.
pub fn card_to_dump(card: &HazmatCard) -> String {
    let hex: String = card.user_def.iter().map(|b| format!("{b:02X}")).collect();
    let mut out = String::new();
    for field in DUMP_FIELDS {
        let value = match field {
            "c_id" => card.c_id.to_string(),
            "t_id" => card.t_id.to_string(),
            "t_rn" => card.t_rn.clone(),
            "op_id" => card.op_id.to_string(),
            "op_name" => card.op_name.clone(),
            "op_phone" => card.op_phone.clone(),
            "s_id" => card.s_id.clone(),
            "comp_ids" => card.comp_ids.join(","),
            "ign_p" => card.ign_p.clone(),
            "sig_temp" => card.sig_temp.clone(),
            "exm_ids" => card.exm_ids.join(","),
            "b_pnt" => card.b_pnt.clone(),
            "m_pnt" => card.m_pnt.clone(),
            "s_dens" => card.s_dens.clone(),
            "tox_v" => card.tox_v.clone(),
            "kemler_no" => card.kemler_no.clone(),
            "onu_no" => card.onu_no.clone(),
            "et_ids" => card.et_ids.join(","),
            "user_def" => hex.clone(),
            _ => unreachable!(),
        };
        out.push_str(field);
        out.push_str(": ");
        out.push_str(&value);
        out.push('\n');
    }
    out
}

fn parse_codes(value: &str) -> Vec<String> {
    if value.is_empty() {
        Vec::new()
    } else {
        value.split(',').map(str::to_string).collect()
    }
}

/// Parses the dump format back into a card. Missing lines default to
/// zero/empty; unknown field names are rejected.
pub fn card_from_dump(text: &str) -> Result<HazmatCard, CardError> {
    let mut card = HazmatCard::default();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (name, value) = line
            .split_once(": ")
            .or_else(|| line.strip_suffix(':').map(|n| (n, "")))
            .ok_or_else(|| CardError::DumpParse(format!("line {}: missing ':'", lineno + 1)))?;
        let bad_int =
            |e| CardError::DumpParse(format!("line {}: bad integer ({e})", lineno + 1));
        match name {
            "c_id" => card.c_id = value.parse().map_err(bad_int)?,
            "t_id" => card.t_id = value.parse().map_err(bad_int)?,
            "t_rn" => card.t_rn = value.to_string(),
            "op_id" => card.op_id = value.parse().map_err(bad_int)?,
            "op_name" => card.op_name = value.to_string(),
            "op_phone" => card.op_phone = value.to_string(),
            "s_id" => card.s_id = value.to_string(),
            "comp_ids" => card.comp_ids = parse_codes(value),
            "ign_p" => card.ign_p = value.to_string(),
            "sig_temp" => card.sig_temp = value.to_string(),
            "exm_ids" => card.exm_ids = parse_codes(value),
            "b_pnt" => card.b_pnt = value.to_string(),
            "m_pnt" => card.m_pnt = value.to_string(),
            "s_dens" => card.s_dens = value.to_string(),
            "tox_v" => card.tox_v = value.to_string(),
            "kemler_no" => card.kemler_no = value.to_string(),
            "onu_no" => card.onu_no = value.to_string(),
            "et_ids" => card.et_ids = parse_codes(value),
            "user_def" => {
                if value.len() != USER_DEF_LEN * 2 || !value.bytes().all(|b| b.is_ascii_hexdigit())
                {
                    return Err(CardError::DumpParse(format!(
                        "line {}: user_def must be {} hex chars",
                        lineno + 1,
                        USER_DEF_LEN * 2
                    )));
                }
                for i in 0..USER_DEF_LEN {
                    card.user_def[i] =
                        u8::from_str_radix(&value[i * 2..i * 2 + 2], 16).unwrap();
                }
            }
            other => {
                return Err(CardError::DumpParse(format!(
                    "line {}: unknown field '{other}'",
                    lineno + 1
                )))
            }
        }
    }
    Ok(card)
}
