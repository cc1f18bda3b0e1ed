//! Wire format of the sleep and xsleep information elements.
//!
//! Both are header IEs: a 16-bit little-endian descriptor (bits 0-6 content
//! length, bits 7-14 element identifier, bit 15 type = 0) followed by the
//! content.
//!
//! ```text
//! sleep   content (1 octet):  bits 0-5  n_slp    bits 6-7  reserved
//! xsleep  content (3 octets): bits 0-11 n_slp    bits 12-17 n_snz   bits 18-23 reserved
//! ```
//!
//! Reserved bits are written as zero and ignored when decoding.

use crate::error::{CommandError, DecodeError};
use crate::model::SleepCommand;

pub const SLEEP_ELEMENT_ID: u8 = 0x2A;
pub const XSLEEP_ELEMENT_ID: u8 = 0x2B;

const HEADER_LEN: usize = 2;
const SLEEP_CONTENT_LEN: usize = 1;
const XSLEEP_CONTENT_LEN: usize = 3;

const LENGTH_MASK: u16 = 0x7F;
const ELEMENT_ID_SHIFT: u16 = 7;
const TYPE_BIT: u16 = 1 << 15;

const SLEEP_MASK: u8 = 0x3F;
const XSLEEP_SLEEP_MASK: u32 = 0xFFF;
const XSLEEP_SNOOZE_SHIFT: u32 = 12;
const XSLEEP_SNOOZE_MASK: u32 = 0x3F;

/// An encoded sleep IE: 3 bytes for sleep, 5 for xsleep.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EncodedIe(Vec<u8>);

impl EncodedIe {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[u8]> for EncodedIe {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

fn header(element_id: u8, content_len: usize) -> [u8; 2] {
    let descriptor =
        (content_len as u16 & LENGTH_MASK) | (u16::from(element_id) << ELEMENT_ID_SHIFT);
    descriptor.to_le_bytes()
}

/// Encodes a basic sleep command.
pub fn encode_sleep(n_slp: u16) -> Result<EncodedIe, CommandError> {
    SleepCommand::basic(n_slp)?;
    let mut out = Vec::with_capacity(HEADER_LEN + SLEEP_CONTENT_LEN);
    out.extend_from_slice(&header(SLEEP_ELEMENT_ID, SLEEP_CONTENT_LEN));
    out.push(n_slp as u8 & SLEEP_MASK);
    Ok(EncodedIe(out))
}

/// Encodes an xsleep command.
pub fn encode_xsleep(n_slp: u16, n_snz: u16) -> Result<EncodedIe, CommandError> {
    SleepCommand::extended(n_slp, n_snz)?;
    let content = (u32::from(n_slp) & XSLEEP_SLEEP_MASK)
        | ((u32::from(n_snz) & XSLEEP_SNOOZE_MASK) << XSLEEP_SNOOZE_SHIFT);
    let mut out = Vec::with_capacity(HEADER_LEN + XSLEEP_CONTENT_LEN);
    out.extend_from_slice(&header(XSLEEP_ELEMENT_ID, XSLEEP_CONTENT_LEN));
    out.extend_from_slice(&content.to_le_bytes()[..XSLEEP_CONTENT_LEN]);
    Ok(EncodedIe(out))
}

pub fn encode(cmd: &SleepCommand) -> Result<EncodedIe, CommandError> {
    match *cmd {
        SleepCommand::Basic { n_slp } => encode_sleep(n_slp),
        SleepCommand::Extended { n_slp, n_snz } => encode_xsleep(n_slp, n_snz),
    }
}

/// Decodes a single sleep or xsleep IE. The input must hold exactly one IE.
pub fn decode_ie(bytes: &[u8]) -> Result<SleepCommand, DecodeError> {
    if bytes.len() < HEADER_LEN {
        return Err(DecodeError::Truncated {
            needed: HEADER_LEN,
            got: bytes.len(),
        });
    }
    let descriptor = u16::from_le_bytes([bytes[0], bytes[1]]);
    if descriptor & TYPE_BIT != 0 {
        return Err(DecodeError::NotHeaderIe);
    }
    let element_id = (descriptor >> ELEMENT_ID_SHIFT) as u8;
    let declared = usize::from(descriptor & LENGTH_MASK);
    let expected = match element_id {
        SLEEP_ELEMENT_ID => SLEEP_CONTENT_LEN,
        XSLEEP_ELEMENT_ID => XSLEEP_CONTENT_LEN,
        other => return Err(DecodeError::UnknownElementId(other)),
    };
    if declared != expected {
        return Err(DecodeError::LengthMismatch {
            element_id,
            expected,
            found: declared,
        });
    }
    let content = &bytes[HEADER_LEN..];
    if content.len() < expected {
        return Err(DecodeError::Truncated {
            needed: HEADER_LEN + expected,
            got: bytes.len(),
        });
    }
    if content.len() > expected {
        return Err(DecodeError::LengthMismatch {
            element_id,
            expected,
            found: content.len(),
        });
    }

    let cmd = if element_id == SLEEP_ELEMENT_ID {
        SleepCommand::Basic {
            n_slp: u16::from(content[0] & SLEEP_MASK),
        }
    } else {
        let raw = u32::from_le_bytes([content[0], content[1], content[2], 0]);
        SleepCommand::Extended {
            n_slp: (raw & XSLEEP_SLEEP_MASK) as u16,
            n_snz: ((raw >> XSLEEP_SNOOZE_SHIFT) & XSLEEP_SNOOZE_MASK) as u16,
        }
    };
    cmd.validate()?;
    Ok(cmd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_sleep_vectors() {
        assert_eq!(encode_sleep(13).unwrap().as_bytes(), [0x01, 0x15, 0x0D]);
        assert_eq!(encode_sleep(0).unwrap().as_bytes(), [0x01, 0x15, 0x00]);
        assert_eq!(encode_sleep(63).unwrap().as_bytes(), [0x01, 0x15, 0x3F]);
    }

    #[test]
    fn golden_xsleep_vectors() {
        assert_eq!(
            encode_xsleep(296, 13).unwrap().as_bytes(),
            [0x83, 0x15, 0x28, 0xD1, 0x00]
        );
        assert_eq!(
            encode_xsleep(0, 0).unwrap().as_bytes(),
            [0x83, 0x15, 0x00, 0x00, 0x00]
        );
        assert_eq!(
            encode_xsleep(58, 3).unwrap().as_bytes(),
            [0x83, 0x15, 0x3A, 0x30, 0x00]
        );
    }

    #[test]
    fn decodes_golden_vectors() {
        assert_eq!(
            decode_ie(&[0x01, 0x15, 0x0D]),
            Ok(SleepCommand::Basic { n_slp: 13 })
        );
        assert_eq!(
            decode_ie(&[0x83, 0x15, 0x28, 0xD1, 0x00]),
            Ok(SleepCommand::Extended {
                n_slp: 296,
                n_snz: 13
            })
        );
    }

    #[test]
    fn encode_rejects_out_of_range() {
        assert!(encode_sleep(64).is_err());
        assert!(encode_xsleep(4096, 0).is_err());
        assert!(encode_xsleep(10, 64).is_err());
        assert_eq!(
            encode_xsleep(13, 13),
            Err(CommandError::SnoozeNotBelowSleep {
                n_slp: 13,
                n_snz: 13
            })
        );
    }

    #[test]
    fn decode_errors_are_distinct() {
        assert_eq!(
            decode_ie(&[0x01, 0x15]),
            Err(DecodeError::Truncated { needed: 3, got: 2 })
        );
        assert_eq!(
            decode_ie(&[0x01]),
            Err(DecodeError::Truncated { needed: 2, got: 1 })
        );
        assert_eq!(
            decode_ie(&[0x83, 0x15, 0x28, 0xD1]),
            Err(DecodeError::Truncated { needed: 5, got: 4 })
        );
        // element 0x2C
        assert_eq!(
            decode_ie(&[0x01, 0x16, 0x00]),
            Err(DecodeError::UnknownElementId(0x2C))
        );
        // xsleep id with a one-octet length
        assert!(matches!(
            decode_ie(&[0x81, 0x15, 0x00]),
            Err(DecodeError::LengthMismatch {
                element_id: 0x2B,
                ..
            })
        ));
        assert!(matches!(
            decode_ie(&[0x01, 0x15, 0x00, 0x00]),
            Err(DecodeError::LengthMismatch {
                element_id: 0x2A,
                ..
            })
        ));
        assert_eq!(
            decode_ie(&[0x01, 0x95, 0x00]),
            Err(DecodeError::NotHeaderIe)
        );
        // xsleep(13, 13)
        assert!(matches!(
            decode_ie(&[0x83, 0x15, 0x0D, 0xD0, 0x00]),
            Err(DecodeError::InvalidCommand(_))
        ));
    }

    #[test]
    fn reserved_bits_are_ignored() {
        for n in 0..=63u8 {
            let plain = decode_ie(&[0x01, 0x15, n]).unwrap();
            for reserved in 1..4u8 {
                assert_eq!(
                    decode_ie(&[0x01, 0x15, n | (reserved << 6)]).unwrap(),
                    plain
                );
            }
        }
        assert_eq!(
            decode_ie(&[0x83, 0x15, 0x28, 0xD1, 0xFC]).unwrap(),
            SleepCommand::Extended {
                n_slp: 296,
                n_snz: 13
            }
        );
    }

    #[test]
    fn exhaustive_basic_roundtrip() {
        for n in 0..=63u16 {
            let cmd = SleepCommand::basic(n).unwrap();
            let ie = encode(&cmd).unwrap();
            assert_eq!(ie.len(), 3);
            assert_eq!(decode_ie(ie.as_bytes()).unwrap(), cmd);
        }
    }
}
