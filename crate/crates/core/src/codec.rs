//! Protocol core: sender and receiver session state machines.
//!
//! A *run* masks k−1 prepared blocks with P_1..P_{k−1}, conveys a fresh
//! nonzero random block R masked by P_k in the final slot, and then evolves
//! the pad. The part stream spans message boundaries: prepared blocks
//! buffer until k−1 slots fill, and [`SenderSession::flush`] force-completes
//! a partial run with empty marker-coded padding. Slot position within a
//! run is seq mod k, so no in-band slot markers are needed.
//!
//! Within a run every slot masking is an independent XOR — they may be
//! evaluated in any order or in parallel — while the transform between runs
//! is a sequential barrier.

use crate::aont;
use crate::counts::OpCounters;
use crate::error::{Error, Result};
use crate::field::Block;
use crate::keymat::{self, Mode, PadState, SharedSecret};
use crate::rng::{self, ProtocolRng};
use crate::tear::{self, Part};
use crate::wire::{FLAG_FLUSH, FLAG_GROUP_FINAL, FLAG_PADDING, FLAG_RESERVED};
use bitvec::prelude::*;
use std::collections::VecDeque;
use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether pure per-block work (masking, embedding) goes through the thread
/// pool. Payloads and operation counters are identical either way; without
/// the `parallel` feature, `Parallel` degrades to the sequential path.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum ExecMode {
    #[default]
    Sequential,
    Parallel,
}

/// One (flags, payload) pair ready for framing.
#[derive(Clone, Debug, PartialEq)]
pub struct Emitted {
    pub flags: u8,
    pub payload: Block,
}

/// Ground truth recorded per run when tracing is enabled: the pre-masking
/// slot blocks and the run's R. The white-box attack harness reads this.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub premask: Vec<Block>,
    pub flags: Vec<u8>,
    pub r: Block,
}

struct Slot {
    flags: u8,
    block: Block,
}

fn mask_blocks(
    blocks: Vec<Block>,
    pads: &[Block],
    exec: ExecMode,
    counters: &mut OpCounters,
) -> Vec<Block> {
    debug_assert_eq!(blocks.len(), pads.len());
    counters.add_xors(blocks.len() as u64);
    let apply = |(mut b, p): (Block, &Block)| {
        b.xor_in_place(p);
        b
    };
    match exec {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => blocks
            .into_par_iter()
            .zip_eq(pads.par_iter())
            .map(apply)
            .collect(),
        _ => blocks.into_iter().zip(pads.iter()).map(apply).collect(),
    }
}

fn build_embedded(
    marked: Vec<(BitVec<u8, Msb0>, usize)>,
    ps: usize,
    exec: ExecMode,
) -> Result<Vec<Block>> {
    let embed_one = |(m, o): &(BitVec<u8, Msb0>, usize)| tear::embed(m, *o, ps);
    match exec {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => marked.par_iter().map(embed_one).collect(),
        _ => marked.iter().map(embed_one).collect(),
    }
}

fn part_to_block(part: &Part, ps: usize) -> Result<Block> {
    let mut bv = part.bits().to_bitvec();
    bv.force_align();
    let bytes = bv.into_vec();
    Block::from_bytes(ps, &bytes[..ps / 8])
}

/// Sender half of a session. Single-owner; distinct sessions are
/// independent.
pub struct SenderSession {
    secret: Arc<SharedSecret>,
    pad: PadState,
    slots: VecDeque<Slot>,
    next_seq: u64,
    counters: OpCounters,
    rng: ProtocolRng,
    exec: ExecMode,
    trace: Option<Vec<RunTrace>>,
}

/// Suspended sender state for continuation across invocations.
#[derive(Clone, Debug)]
pub struct SenderCheckpoint {
    pub pad: PadState,
    pub next_seq: u64,
    pub pending: Vec<(u8, Block)>,
}

impl SenderSession {
    pub fn new(secret: Arc<SharedSecret>, rng: ProtocolRng, exec: ExecMode) -> SenderSession {
        let pad = secret.initial_pad();
        SenderSession {
            secret,
            pad,
            slots: VecDeque::new(),
            next_seq: 0,
            counters: OpCounters::default(),
            rng,
            exec,
            trace: None,
        }
    }

    /// Rebuilds a session from a checkpoint, revalidating its invariants.
    pub fn resume(
        secret: Arc<SharedSecret>,
        cp: SenderCheckpoint,
        rng: ProtocolRng,
        exec: ExecMode,
    ) -> Result<SenderSession> {
        let k = secret.k();
        validate_pad(&secret, &cp.pad)?;
        if cp.next_seq % k as u64 != 0 || cp.next_seq / k as u64 != cp.pad.run_index() {
            return Err(Error::Invariant(format!(
                "next_seq {} inconsistent with {} completed runs of {k} packets",
                cp.next_seq,
                cp.pad.run_index()
            )));
        }
        if cp.pending.len() >= k - 1 {
            return Err(Error::Invariant(format!(
                "{} buffered slots; a run would already have been emitted",
                cp.pending.len()
            )));
        }
        for (flags, b) in &cp.pending {
            if *flags & FLAG_RESERVED != 0 {
                return Err(Error::Invariant("reserved flag bits set".into()));
            }
            if b.ps() != secret.ps() {
                return Err(Error::SizeMismatch {
                    left: b.ps(),
                    right: secret.ps(),
                });
            }
        }
        Ok(SenderSession {
            secret,
            pad: cp.pad,
            slots: cp
                .pending
                .into_iter()
                .map(|(flags, block)| Slot { flags, block })
                .collect(),
            next_seq: cp.next_seq,
            counters: OpCounters::default(),
            rng,
            exec,
            trace: None,
        })
    }

    pub fn checkpoint(&self) -> SenderCheckpoint {
        SenderCheckpoint {
            pad: self.pad.clone(),
            next_seq: self.next_seq,
            pending: self
                .slots
                .iter()
                .map(|s| (s.flags, s.block.clone()))
                .collect(),
        }
    }

    /// Records pre-masking blocks and R per run from now on.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn trace(&self) -> &[RunTrace] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn counters(&self) -> OpCounters {
        self.counters
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn pad(&self) -> &PadState {
        &self.pad
    }

    pub fn runs_completed(&self) -> u64 {
        self.pad.run_index()
    }

    pub fn pending_slots(&self) -> usize {
        self.slots.len()
    }

    /// Tears `data`, prepares its blocks, and emits every run that fills.
    /// Parts left over stay buffered for the next push or flush.
    pub fn push(&mut self, data: &[u8]) -> Result<Vec<Emitted>> {
        match self.secret.mode() {
            Mode::Base => self.queue_base(data)?,
            Mode::FullBlock => self.queue_full_block(data)?,
            Mode::Aont => self.queue_aont(data)?,
        }
        self.emit_ready()
    }

    /// Completes a partial run with empty marker-coded padding. Idempotent
    /// when nothing is buffered.
    pub fn flush(&mut self) -> Result<Vec<Emitted>> {
        if self.slots.is_empty() {
            return Ok(Vec::new());
        }
        let ps = self.secret.ps();
        let k = self.secret.k();
        while self.slots.len() < k - 1 {
            let marked = tear::affix(&Part::empty(), ps)?;
            let offset = tear::draw_offset(self.rng.embed_offsets(), ps, marked.len());
            self.slots.push_back(Slot {
                flags: FLAG_PADDING,
                block: tear::embed(&marked, offset, ps)?,
            });
        }
        let run: Vec<Slot> = self.slots.drain(..).collect();
        self.emit_run(run, FLAG_FLUSH)
    }

    fn queue_base(&mut self, data: &[u8]) -> Result<()> {
        let ps = self.secret.ps();
        let parts = tear::tear(
            data,
            self.secret.min_part_bits(),
            ps - 2,
            self.rng.tear_sizes(),
        )?;
        for block in self.embed_parts(&parts)? {
            self.slots.push_back(Slot { flags: 0, block });
        }
        Ok(())
    }

    fn queue_full_block(&mut self, data: &[u8]) -> Result<()> {
        let ps = self.secret.ps();
        let mut parts = tear::tear_full_blocks(data, ps);
        let tail = match parts.last() {
            Some(p) if p.len() < ps => parts.pop(),
            _ => None,
        };
        for part in &parts {
            self.slots.push_back(Slot {
                flags: 0,
                block: part_to_block(part, ps)?,
            });
        }
        if let Some(tail) = tail {
            // the unaligned remainder travels marker-coded; the flag tells
            // the receiver to extract it instead of taking raw bits
            let block = self
                .embed_parts(std::slice::from_ref(&tail))?
                .pop()
                .unwrap();
            self.slots.push_back(Slot {
                flags: FLAG_PADDING,
                block,
            });
        }
        Ok(())
    }

    fn queue_aont(&mut self, data: &[u8]) -> Result<()> {
        let ps = self.secret.ps();
        let parts = tear::tear(
            data,
            self.secret.min_part_bits(),
            ps - 2,
            self.rng.tear_sizes(),
        )?;
        if parts.is_empty() {
            return Ok(());
        }
        let mut x = self.embed_parts(&parts)?;
        // input randomization: the group's final block is fresh randomness
        x.push(rng::nonzero_block(self.rng.aont_randomizer(), ps));
        let y = aont::aont_forward(
            &x,
            self.secret.lambda(),
            self.secret.poly(),
            &mut self.counters,
        )?;
        let s = y.len();
        for (i, block) in y.into_iter().enumerate() {
            let flags = if i == s - 1 { FLAG_GROUP_FINAL } else { 0 };
            self.slots.push_back(Slot { flags, block });
        }
        Ok(())
    }

    /// Affixes markers and embeds each part at a random offset. Offsets are
    /// drawn sequentially so seeded sessions reproduce; the embedding itself
    /// is pure and may run in parallel.
    fn embed_parts(&mut self, parts: &[Part]) -> Result<Vec<Block>> {
        let ps = self.secret.ps();
        let marked = parts
            .iter()
            .map(|p| {
                let m = tear::affix(p, ps)?;
                let o = tear::draw_offset(self.rng.embed_offsets(), ps, m.len());
                Ok((m, o))
            })
            .collect::<Result<Vec<_>>>()?;
        build_embedded(marked, ps, self.exec)
    }

    fn emit_ready(&mut self) -> Result<Vec<Emitted>> {
        let k = self.secret.k();
        let mut out = Vec::new();
        while self.slots.len() >= k - 1 {
            let run: Vec<Slot> = self.slots.drain(..k - 1).collect();
            out.extend(self.emit_run(run, 0)?);
        }
        Ok(out)
    }

    fn emit_run(&mut self, run: Vec<Slot>, r_flags: u8) -> Result<Vec<Emitted>> {
        let k = self.secret.k();
        debug_assert_eq!(run.len(), k - 1);
        let r = rng::nonzero_block(self.rng.run_values(), self.secret.ps());
        if let Some(trace) = &mut self.trace {
            trace.push(RunTrace {
                premask: run.iter().map(|s| s.block.clone()).collect(),
                flags: run.iter().map(|s| s.flags).collect(),
                r: r.clone(),
            });
        }
        let (flags, blocks): (Vec<u8>, Vec<Block>) =
            run.into_iter().map(|s| (s.flags, s.block)).unzip();
        let masked = mask_blocks(
            blocks,
            &self.pad.blocks()[..k - 1],
            self.exec,
            &mut self.counters,
        );
        let mut out: Vec<Emitted> = flags
            .into_iter()
            .zip(masked)
            .map(|(flags, payload)| Emitted { flags, payload })
            .collect();
        let mut r_payload = r.clone();
        r_payload.xor_in_place(&self.pad.blocks()[k - 1]);
        self.counters.add_xors(1);
        out.push(Emitted {
            flags: r_flags,
            payload: r_payload,
        });
        keymat::transform(&mut self.pad, &r, self.secret.poly(), &mut self.counters)?;
        self.next_seq += k as u64;
        Ok(out)
    }
}

/// Receiver half of a session; mirrors the sender's pad run for run.
pub struct ReceiverSession {
    secret: Arc<SharedSecret>,
    pad: PadState,
    expected_seq: u64,
    pending: Vec<(u8, Block)>,
    group: Vec<Block>,
    out_bits: BitVec<u8, Msb0>,
    counters: OpCounters,
    exec: ExecMode,
}

/// Suspended receiver state; only a quiescent session can checkpoint.
#[derive(Clone, Debug)]
pub struct ReceiverCheckpoint {
    pub pad: PadState,
    pub expected_seq: u64,
}

impl ReceiverSession {
    pub fn new(secret: Arc<SharedSecret>, exec: ExecMode) -> ReceiverSession {
        let pad = secret.initial_pad();
        ReceiverSession {
            secret,
            pad,
            expected_seq: 0,
            pending: Vec::new(),
            group: Vec::new(),
            out_bits: BitVec::new(),
            counters: OpCounters::default(),
            exec,
        }
    }

    pub fn resume(
        secret: Arc<SharedSecret>,
        cp: ReceiverCheckpoint,
        exec: ExecMode,
    ) -> Result<ReceiverSession> {
        let k = secret.k() as u64;
        validate_pad(&secret, &cp.pad)?;
        if cp.expected_seq % k != 0 || cp.expected_seq / k != cp.pad.run_index() {
            return Err(Error::Invariant(format!(
                "expected_seq {} inconsistent with {} completed runs",
                cp.expected_seq,
                cp.pad.run_index()
            )));
        }
        Ok(ReceiverSession {
            secret,
            pad: cp.pad,
            expected_seq: cp.expected_seq,
            pending: Vec::new(),
            group: Vec::new(),
            out_bits: BitVec::new(),
            counters: OpCounters::default(),
            exec,
        })
    }

    /// Only a quiescent session (no partial run, no open group, no dangling
    /// bits) can be suspended.
    pub fn checkpoint(&self) -> Result<ReceiverCheckpoint> {
        self.finish()?;
        Ok(ReceiverCheckpoint {
            pad: self.pad.clone(),
            expected_seq: self.expected_seq,
        })
    }

    pub fn counters(&self) -> OpCounters {
        self.counters
    }

    pub fn expected_seq(&self) -> u64 {
        self.expected_seq
    }

    pub fn pad(&self) -> &PadState {
        &self.pad
    }

    pub fn runs_completed(&self) -> u64 {
        self.pad.run_index()
    }

    /// Accepts the next payload in sequence order (ordering is the framing
    /// layer's job) and returns any newly completed octets of plaintext.
    pub fn push(&mut self, flags: u8, payload: Block) -> Result<Vec<u8>> {
        if flags & FLAG_RESERVED != 0 {
            return Err(Error::Protocol(format!(
                "reserved flag bits set: {flags:#010b}"
            )));
        }
        if payload.ps() != self.secret.ps() {
            return Err(Error::SizeMismatch {
                left: payload.ps(),
                right: self.secret.ps(),
            });
        }
        self.pending.push((flags, payload));
        self.expected_seq += 1;
        if self.pending.len() == self.secret.k() {
            self.complete_run()?;
        }
        Ok(self.drain_octets())
    }

    /// Verifies the stream ended cleanly: no partial run, no open
    /// all-or-nothing group, no dangling sub-octet bits.
    pub fn finish(&self) -> Result<()> {
        if !self.pending.is_empty() {
            return Err(Error::Protocol(format!(
                "stream ended mid-run: {} of {} blocks",
                self.pending.len(),
                self.secret.k()
            )));
        }
        if !self.group.is_empty() {
            return Err(Error::IncompleteMessage);
        }
        if !self.out_bits.is_empty() {
            return Err(Error::IncompleteStream(self.out_bits.len()));
        }
        Ok(())
    }

    fn complete_run(&mut self) -> Result<()> {
        let k = self.secret.k();
        let slots = std::mem::take(&mut self.pending);
        let mut r = slots[k - 1].1.clone();
        r.xor_in_place(&self.pad.blocks()[k - 1]);
        self.counters.add_xors(1);
        if r.is_zero() {
            return Err(Error::Protocol(
                "recovered a zero run randomizer; peer violated contract".into(),
            ));
        }
        let (flags, blocks): (Vec<u8>, Vec<Block>) = slots[..k - 1]
            .iter()
            .map(|(f, b)| (*f, b.clone()))
            .unzip();
        let unmasked = mask_blocks(
            blocks,
            &self.pad.blocks()[..k - 1],
            self.exec,
            &mut self.counters,
        );
        keymat::transform(&mut self.pad, &r, self.secret.poly(), &mut self.counters)?;
        for (f, b) in flags.into_iter().zip(unmasked) {
            self.dispatch(f, b)?;
        }
        Ok(())
    }

    fn dispatch(&mut self, flags: u8, block: Block) -> Result<()> {
        if flags & FLAG_PADDING != 0 {
            // marker-coded regardless of mode; true padding extracts empty
            let part = tear::extract(&block)?;
            self.out_bits.extend_from_bitslice(part.bits());
            return Ok(());
        }
        match self.secret.mode() {
            Mode::Base => {
                let part = tear::extract(&block)?;
                self.out_bits.extend_from_bitslice(part.bits());
            }
            Mode::FullBlock => {
                self.out_bits
                    .extend_from_bitslice(block.as_bytes().view_bits::<Msb0>());
            }
            Mode::Aont => {
                let group_final = flags & FLAG_GROUP_FINAL != 0;
                self.group.push(block);
                if group_final {
                    let y = std::mem::take(&mut self.group);
                    let x = aont::aont_inverse(
                        &y,
                        self.secret.lambda(),
                        self.secret.poly(),
                        &mut self.counters,
                    )?;
                    for xi in &x[..x.len() - 1] {
                        let part = tear::extract(xi)?;
                        self.out_bits.extend_from_bitslice(part.bits());
                    }
                }
            }
        }
        Ok(())
    }

    fn drain_octets(&mut self) -> Vec<u8> {
        let whole = self.out_bits.len() / 8 * 8;
        if whole == 0 {
            return Vec::new();
        }
        let tail = self.out_bits.split_off(whole);
        let head = std::mem::replace(&mut self.out_bits, tail);
        head.into_vec()
    }
}

fn validate_pad(secret: &SharedSecret, pad: &PadState) -> Result<()> {
    if pad.blocks().len() != secret.k() {
        return Err(Error::Invariant(format!(
            "pad has {} blocks, secret expects {}",
            pad.blocks().len(),
            secret.k()
        )));
    }
    for b in pad.blocks() {
        if b.ps() != secret.ps() {
            return Err(Error::SizeMismatch {
                left: b.ps(),
                right: secret.ps(),
            });
        }
    }
    if pad.blocks()[secret.k() - 1].is_zero() {
        return Err(Error::Invariant("pad block P_k is zero".into()));
    }
    Ok(())
}
