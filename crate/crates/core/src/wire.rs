//! Bit-exact packet encoding, the packet-stream file format, and
//! sequence-number reordering.
//!
//! Frame layout: `seq (8, big-endian) ‖ flags (1) ‖ payload (PS/8) ‖ tag`.
//! The MAC gate precedes reordering: a packet that fails verification is
//! dropped and counted by the caller, never delivered; its gap eventually
//! surfaces as a missing-packet error.

use crate::codec::Emitted;
use crate::error::{Error, Result};
use crate::field::Block;
use crate::mac::{self, MacConfig};
use std::collections::BTreeMap;

/// Final block of an all-or-nothing group.
pub const FLAG_GROUP_FINAL: u8 = 1 << 0;
/// Last packet of a run emitted by an explicit flush.
pub const FLAG_FLUSH: u8 = 1 << 1;
/// Padding / marker-coded block: content is delimited by `1` markers
/// regardless of session mode. True padding carries an empty part; a
/// full-block session's unaligned tail carries real bits.
pub const FLAG_PADDING: u8 = 1 << 2;
/// Bits that must stay zero on the wire.
pub const FLAG_RESERVED: u8 = !(FLAG_GROUP_FINAL | FLAG_FLUSH | FLAG_PADDING);

pub const STREAM_MAGIC: [u8; 4] = *b"JPKT";
pub const STREAM_VERSION: u8 = 0x01;
/// Octets before the first packet in a stream file.
pub const STREAM_HEADER_LEN: usize = 4 + 1 + 4 + 2 + 1 + 8;

/// Default reorder window: packets further ahead than this abort the
/// session with a missing-packet error.
pub const DEFAULT_REORDER_WINDOW: usize = 64;

/// The wire unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packet {
    pub seq: u64,
    pub flags: u8,
    pub payload: Vec<u8>,
    pub tag: Vec<u8>,
}

/// Serializes a packet to its frame.
pub fn encode_packet(p: &Packet) -> Vec<u8> {
    let mut out = Vec::with_capacity(9 + p.payload.len() + p.tag.len());
    out.extend_from_slice(&p.seq.to_be_bytes());
    out.push(p.flags);
    out.extend_from_slice(&p.payload);
    out.extend_from_slice(&p.tag);
    out
}

/// Parses one frame of known geometry. Flags are not policed here; a
/// tampered flag octet fails MAC verification instead, so every bit flip is
/// counted as exactly one authentication rejection.
pub fn decode_packet(bytes: &[u8], payload_octets: usize, tag_len: usize) -> Result<Packet> {
    let want = 9 + payload_octets + tag_len;
    if bytes.len() != want {
        return Err(Error::Truncated {
            context: "packet frame",
        });
    }
    Ok(Packet {
        seq: u64::from_be_bytes(bytes[..8].try_into().unwrap()),
        flags: bytes[8],
        payload: bytes[9..9 + payload_octets].to_vec(),
        tag: bytes[9 + payload_octets..].to_vec(),
    })
}

/// Numbers and tags codec output in emission order.
pub struct PacketFramer {
    mac: MacConfig,
    next_seq: u64,
}

impl PacketFramer {
    pub fn new(mac: MacConfig, start_seq: u64) -> PacketFramer {
        PacketFramer { mac, next_seq: start_seq }
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn frame(&mut self, emitted: &[Emitted]) -> Vec<Packet> {
        emitted
            .iter()
            .map(|e| {
                let seq = self.next_seq;
                self.next_seq += 1;
                let payload = e.payload.as_bytes().to_vec();
                let tag = mac::tag_packet(&self.mac, seq, e.flags, &payload);
                Packet {
                    seq,
                    flags: e.flags,
                    payload,
                    tag,
                }
            })
            .collect()
    }
}

/// Verifies a packet's tag against the session MAC configuration.
pub fn verify(mac_cfg: &MacConfig, p: &Packet) -> bool {
    mac::verify_packet(mac_cfg, p.seq, p.flags, &p.payload, &p.tag)
}

/// Converts a verified packet payload into a codec block.
pub fn payload_block(p: &Packet, ps: usize) -> Result<Block> {
    Block::from_bytes(ps, &p.payload)
}

/// Delivers packets to the codec strictly in sequence order, buffering at
/// most `window` out-of-order arrivals. Duplicates are dropped silently.
pub struct ReorderBuffer {
    expected: u64,
    window: usize,
    pending: BTreeMap<u64, Packet>,
}

impl ReorderBuffer {
    pub fn new(start_seq: u64, window: usize) -> ReorderBuffer {
        ReorderBuffer {
            expected: start_seq,
            window: window.max(1),
            pending: BTreeMap::new(),
        }
    }

    pub fn expected(&self) -> u64 {
        self.expected
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    /// The earliest sequence number still owed, if arrivals are stalled
    /// behind a gap.
    pub fn missing(&self) -> Option<u64> {
        (!self.pending.is_empty()).then_some(self.expected)
    }

    /// Accepts an arrival and returns the maximal in-order prefix now ready.
    /// An arrival further than the window ahead of the next expected seq
    /// means the gap can never be buffered over: the absent seq is named.
    pub fn push(&mut self, p: Packet) -> Result<Vec<Packet>> {
        if p.seq < self.expected || self.pending.contains_key(&p.seq) {
            return Ok(Vec::new()); // duplicate
        }
        if p.seq - self.expected >= self.window as u64 {
            return Err(Error::MissingPacket(self.expected));
        }
        self.pending.insert(p.seq, p);
        let mut ready = Vec::new();
        while let Some(pkt) = self.pending.remove(&self.expected) {
            ready.push(pkt);
            self.expected += 1;
        }
        Ok(ready)
    }
}

/// Stream-file header fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamHeader {
    pub payload_octets: u32,
    pub k: u16,
    pub tag_len: u8,
    pub count: u64,
}

/// Serializes a capture file:
/// `"JPKT" ‖ version ‖ PS/8 (4) ‖ k (2) ‖ tag_len (1) ‖ count (8) ‖ packets`.
pub fn write_stream(header: &StreamHeader, packets: &[Packet]) -> Result<Vec<u8>> {
    if header.count != packets.len() as u64 {
        return Err(Error::Invariant(format!(
            "header count {} != {} packets",
            header.count,
            packets.len()
        )));
    }
    let mut out = Vec::with_capacity(
        STREAM_HEADER_LEN + packets.len() * (9 + header.payload_octets as usize + header.tag_len as usize),
    );
    out.extend_from_slice(&STREAM_MAGIC);
    out.push(STREAM_VERSION);
    out.extend_from_slice(&header.payload_octets.to_be_bytes());
    out.extend_from_slice(&header.k.to_be_bytes());
    out.push(header.tag_len);
    out.extend_from_slice(&header.count.to_be_bytes());
    for p in packets {
        if p.payload.len() != header.payload_octets as usize
            || p.tag.len() != header.tag_len as usize
        {
            return Err(Error::Invariant(
                "packet geometry disagrees with stream header".into(),
            ));
        }
        out.extend_from_slice(&encode_packet(p));
    }
    Ok(out)
}

/// Parses a capture file, validating magic, version, and the packet count.
pub fn read_stream(bytes: &[u8]) -> Result<(StreamHeader, Vec<Packet>)> {
    if bytes.len() < STREAM_HEADER_LEN {
        return Err(Error::Truncated {
            context: "stream header",
        });
    }
    if bytes[..4] != STREAM_MAGIC {
        return Err(Error::BadMagic {
            expected: STREAM_MAGIC,
        });
    }
    if bytes[4] != STREAM_VERSION {
        return Err(Error::BadVersion(bytes[4]));
    }
    let payload_octets = u32::from_be_bytes(bytes[5..9].try_into().unwrap());
    let k = u16::from_be_bytes(bytes[9..11].try_into().unwrap());
    let tag_len = bytes[11];
    let count = u64::from_be_bytes(bytes[12..20].try_into().unwrap());
    let header = StreamHeader {
        payload_octets,
        k,
        tag_len,
        count,
    };
    let frame_len = 9 + payload_octets as usize + tag_len as usize;
    let body = &bytes[STREAM_HEADER_LEN..];
    if (body.len() as u64) != count * frame_len as u64 {
        if (body.len() as u64) < count * frame_len as u64 {
            return Err(Error::Truncated {
                context: "packet stream body",
            });
        }
        return Err(Error::Invariant(
            "stream body longer than the declared packet count".into(),
        ));
    }
    let packets = body
        .chunks(frame_len)
        .map(|c| decode_packet(c, payload_octets as usize, tag_len as usize))
        .collect::<Result<Vec<_>>>()?;
    Ok((header, packets))
}
