//! Tearing data into parts, marker affixing, and block embedding.
//!
//! Plaintext is split into parts of arbitrary bounded bit length. Each part
//! is surrounded by `1` marker bits and written at a random bit offset into
//! an otherwise-zero PS-bit block, so the receiver can recover the part from
//! the first and last set bits without ever learning the offset. Bit 1 is
//! the most significant bit of octet 0 throughout.

use crate::error::{Error, Result};
use crate::field::Block;
use bitvec::prelude::*;
use rand::Rng;

/// A torn fragment of plaintext: a bit string of arbitrary length.
/// Empty parts occur only as flush padding.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Part {
    bits: BitVec<u8, Msb0>,
}

impl Part {
    pub fn new(bits: BitVec<u8, Msb0>) -> Part {
        Part { bits }
    }

    pub fn empty() -> Part {
        Part {
            bits: BitVec::new(),
        }
    }

    pub fn bits(&self) -> &BitSlice<u8, Msb0> {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Tears `data` into parts with lengths drawn uniformly from
/// `[min_bits, max_bits]`; the final part takes whatever remains and may be
/// shorter. Deterministic under a seeded rng.
pub fn tear(
    data: &[u8],
    min_bits: usize,
    max_bits: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Part>> {
    if min_bits < 1 || min_bits > max_bits {
        return Err(Error::Config(format!(
            "empty part-size window [{min_bits}, {max_bits}]"
        )));
    }
    let view = data.view_bits::<Msb0>();
    let mut parts = Vec::new();
    let mut pos = 0;
    while pos < view.len() {
        let want = rng.gen_range(min_bits..=max_bits);
        let take = want.min(view.len() - pos);
        parts.push(Part::new(view[pos..pos + take].to_bitvec()));
        pos += take;
    }
    Ok(parts)
}

/// Tears `data` into parts of exactly `ps` bits; the final part takes the
/// remainder. Used by full-block sessions, where whole parts travel without
/// markers.
pub fn tear_full_blocks(data: &[u8], ps: usize) -> Vec<Part> {
    let view = data.view_bits::<Msb0>();
    view.chunks(ps)
        .map(|c| Part::new(c.to_bitvec()))
        .collect()
}

/// Surrounds a part with `1` markers: returns `1 ‖ part ‖ 1`.
pub fn affix(part: &Part, ps: usize) -> Result<BitVec<u8, Msb0>> {
    if ps < 2 || part.len() > ps - 2 {
        return Err(Error::SizeMismatch {
            left: part.len(),
            right: ps.saturating_sub(2),
        });
    }
    let mut out = BitVec::with_capacity(part.len() + 2);
    out.push(true);
    out.extend_from_bitslice(part.bits());
    out.push(true);
    Ok(out)
}

/// Writes `marked` into an all-zero `ps`-bit block at 1-based bit position
/// `offset` (bit 1 = most significant).
pub fn embed(marked: &BitSlice<u8, Msb0>, offset: usize, ps: usize) -> Result<Block> {
    if ps % 8 != 0 {
        return Err(Error::Config(format!(
            "embedding requires an octet-aligned block size, got {ps}"
        )));
    }
    if marked.len() > ps {
        return Err(Error::SizeMismatch {
            left: marked.len(),
            right: ps,
        });
    }
    let max = ps - marked.len() + 1;
    if offset < 1 || offset > max {
        return Err(Error::OffsetOutOfRange { offset, max });
    }
    let mut bits = bitvec![u8, Msb0; 0; ps];
    bits[offset - 1..offset - 1 + marked.len()].copy_from_bitslice(marked);
    Block::from_bytes(ps, bits.as_raw_slice())
}

/// Draws a uniformly random legal embed offset for a marked string of
/// `marked_len` bits in a `ps`-bit block.
pub fn draw_offset(rng: &mut impl Rng, ps: usize, marked_len: usize) -> usize {
    rng.gen_range(1..=ps - marked_len + 1)
}

/// Recovers the part sandwiched strictly between the first and last set
/// bits of `block`. Fewer than two set bits signals corruption or a
/// desynchronized pad.
pub fn extract(block: &Block) -> Result<Part> {
    let ps = block.ps();
    if ps % 8 != 0 {
        return Err(Error::Config(format!(
            "extraction requires an octet-aligned block size, got {ps}"
        )));
    }
    let bytes = block.as_bytes();
    let first = bytes
        .iter()
        .position(|&b| b != 0)
        .map(|i| i * 8 + bytes[i].leading_zeros() as usize);
    let last = bytes
        .iter()
        .rposition(|&b| b != 0)
        .map(|i| i * 8 + 7 - bytes[i].trailing_zeros() as usize);
    match (first, last) {
        (Some(f), Some(l)) if f != l => {
            let view = &bytes.view_bits::<Msb0>()[..ps];
            Ok(Part::new(view[f + 1..l].to_bitvec()))
        }
        _ => Err(Error::MalformedBlock),
    }
}

/// Concatenates parts back into octets. The stream must end on an octet
/// boundary.
pub fn reassemble(parts: &[Part]) -> Result<Vec<u8>> {
    let total: usize = parts.iter().map(Part::len).sum();
    if total % 8 != 0 {
        return Err(Error::IncompleteStream(total % 8));
    }
    let mut bits: BitVec<u8, Msb0> = BitVec::with_capacity(total);
    for p in parts {
        bits.extend_from_bitslice(p.bits());
    }
    Ok(bits.into_vec())
}
