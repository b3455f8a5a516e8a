//! Checksums used across the system: CRC-64/ECMA-182 for the card ECC field
//! and CRC-32 (IEEE) for wire frames.

/// CRC-64/ECMA-182 polynomial, MSB-first form.
pub const CRC64_POLY: u64 = 0x42F0_E1EB_A9EA_3693;

/// CRC-32 (IEEE 802.3) polynomial, reflected form of 0x04C11DB7.
pub const CRC32_POLY_REFLECTED: u32 = 0xEDB8_8320;

const fn build_crc64_table() -> [u64; 256] {
    let mut table = [0u64; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = (i as u64) << 56;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 0x8000_0000_0000_0000 != 0 {
                (crc << 1) ^ CRC64_POLY
            } else {
                crc << 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

const fn build_crc32_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u32;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ CRC32_POLY_REFLECTED
            } else {
                crc >> 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

static CRC64_TABLE: [u64; 256] = build_crc64_table();
static CRC32_TABLE: [u32; 256] = build_crc32_table();

/// CRC-64/ECMA-182: init 0, MSB-first, no reflection, no final xor.
pub fn crc64(data: &[u8]) -> u64 {
    let mut crc = 0u64;
    for &b in data {
        let idx = (((crc >> 56) as u8) ^ b) as usize;
        crc = CRC64_TABLE[idx] ^ (crc << 8);
    }
    crc
}

/// CRC-32 (IEEE): init 0xFFFFFFFF, reflected, final xor 0xFFFFFFFF.
pub fn crc32(data: &[u8]) -> u32 {
    let mut crc = !0u32;
    for &b in data {
        let idx = ((crc as u8) ^ b) as usize;
        crc = CRC32_TABLE[idx] ^ (crc >> 8);
    }
    !crc
}
