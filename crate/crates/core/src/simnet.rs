//! In-memory adversarial channel plus the executable two-round
//! differencing attack against the base scheme.
//!
//! The attack: ciphertext slot i of round r is C_i = X_i ⊕ P_i, and the pad
//! evolves by P_i ← P_i ⊕ R for every data slot. XORing corresponding slots
//! of consecutive rounds cancels the pad, leaving X_i^r ⊕ X_i^{r+1} ⊕ R^r;
//! XORing two such differences cancels R as well. An attacker who can guess
//! three of the four pre-masking blocks recovers the fourth exactly. The
//! final slot is immune — P_k evolves multiplicatively — and the
//! all-or-nothing mode defeats plaintext recovery because the pre-masking
//! blocks are transform outputs, not marked plaintext.

use crate::codec::{ExecMode, ReceiverSession, RunTrace, SenderSession};
use crate::error::{Error, Result};
use crate::field::{self, Block, ReductionPoly};
use crate::keymat::{self, KeygenParams, Mode, SharedSecret};
use crate::rng::ProtocolRng;
use crate::wire::{self, PacketFramer, ReorderBuffer, DEFAULT_REORDER_WINDOW};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

const STREAM_CHANNEL: u64 = 100;
const STREAM_KEYGEN: u64 = 50;
const STREAM_DEMO_DATA: u64 = 51;

/// Fault probabilities for the simulated channel.
#[derive(Clone, Copy, Debug)]
pub struct ChannelConfig {
    /// Probability a packet vanishes.
    pub drop: f64,
    /// Probability a packet is delivered twice.
    pub duplicate: f64,
    /// Probability two adjacent packets swap.
    pub reorder: f64,
    /// Probability one random bit of a frame flips.
    pub tamper: f64,
    pub seed: [u8; 32],
}

impl ChannelConfig {
    pub fn clean(seed: [u8; 32]) -> ChannelConfig {
        ChannelConfig {
            drop: 0.0,
            duplicate: 0.0,
            reorder: 0.0,
            tamper: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("drop", self.drop),
            ("duplicate", self.duplicate),
            ("reorder", self.reorder),
            ("tamper", self.tamper),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Everything observable about one simulated transfer.
#[derive(Clone, Debug)]
pub struct Transcript {
    pub delivered: Vec<u8>,
    pub packets_sent: usize,
    pub packets_accepted: usize,
    pub dropped: Vec<u64>,
    pub duplicated: usize,
    pub tampered: Vec<u64>,
    pub mac_rejections: usize,
    pub error: Option<Error>,
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "transfer: {} packets sent, {} accepted, {} MAC-rejected",
            self.packets_sent, self.packets_accepted, self.mac_rejections
        )?;
        writeln!(
            f,
            "channel: {} dropped, {} duplicated, {} tampered",
            self.dropped.len(),
            self.duplicated,
            self.tampered.len()
        )?;
        writeln!(f, "delivered: {} octets", self.delivered.len())?;
        match &self.error {
            Some(e) => writeln!(f, "error: {e}"),
            None => writeln!(f, "error: none"),
        }
    }
}

/// Runs sender → faulty channel → receiver, end to end, deterministically
/// under the config seed. With all probabilities zero the delivered bytes
/// equal the input.
pub fn run_transfer(
    secret: &SharedSecret,
    data: &[u8],
    config: &ChannelConfig,
) -> Result<Transcript> {
    config.validate()?;
    let secret = Arc::new(secret.clone());
    let mut tx = SenderSession::new(
        secret.clone(),
        ProtocolRng::from_seed(config.seed),
        ExecMode::default(),
    );
    let mut emitted = tx.push(data)?;
    emitted.extend(tx.flush()?);
    let mut framer = PacketFramer::new(secret.mac_config(), 0);
    let packets = framer.frame(&emitted);
    let packets_sent = packets.len();

    let mut channel_rng = ChaCha20Rng::from_seed(config.seed);
    channel_rng.set_stream(STREAM_CHANNEL);

    // drop and duplicate passes
    let mut in_flight: Vec<Vec<u8>> = Vec::new();
    let mut dropped = Vec::new();
    let mut duplicated = 0usize;
    for p in &packets {
        if config.drop > 0.0 && channel_rng.gen_bool(config.drop) {
            dropped.push(p.seq);
            continue;
        }
        let frame = wire::encode_packet(p);
        in_flight.push(frame.clone());
        if config.duplicate > 0.0 && channel_rng.gen_bool(config.duplicate) {
            in_flight.push(frame);
            duplicated += 1;
        }
    }
    // adjacent swaps
    if config.reorder > 0.0 {
        for i in 0..in_flight.len().saturating_sub(1) {
            if channel_rng.gen_bool(config.reorder) {
                in_flight.swap(i, i + 1);
            }
        }
    }
    // bit flips
    let mut tampered = Vec::new();
    if config.tamper > 0.0 {
        for frame in &mut in_flight {
            if channel_rng.gen_bool(config.tamper) {
                let seq = u64::from_be_bytes(frame[..8].try_into().unwrap());
                let bit = channel_rng.gen_range(0..frame.len() * 8);
                frame[bit / 8] ^= 1 << (bit % 8);
                tampered.push(seq);
            }
        }
    }

    // receive: decode, MAC gate, reorder, codec
    let mac_cfg = secret.mac_config();
    let payload_octets = secret.ps() / 8;
    let mut rx = ReceiverSession::new(secret.clone(), ExecMode::default());
    let mut reorder = ReorderBuffer::new(0, DEFAULT_REORDER_WINDOW);
    let mut delivered = Vec::new();
    let mut packets_accepted = 0usize;
    let mut mac_rejections = 0usize;
    let mut error = None;

    'receive: for frame in &in_flight {
        let packet = match wire::decode_packet(frame, payload_octets, mac_cfg.tag_len()) {
            Ok(p) => p,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        if !wire::verify(&mac_cfg, &packet) {
            mac_rejections += 1;
            continue;
        }
        let ready = match reorder.push(packet) {
            Ok(r) => r,
            Err(e) => {
                error = Some(e);
                break;
            }
        };
        for p in ready {
            packets_accepted += 1;
            let block = match wire::payload_block(&p, secret.ps()) {
                Ok(b) => b,
                Err(e) => {
                    error = Some(e);
                    break 'receive;
                }
            };
            match rx.push(p.flags, block) {
                Ok(bytes) => delivered.extend(bytes),
                Err(e) => {
                    error = Some(e);
                    break 'receive;
                }
            }
        }
    }
    if error.is_none() && reorder.expected() < packets_sent as u64 {
        error = Some(Error::MissingPacket(reorder.expected()));
    }
    if error.is_none() {
        error = rx.finish().err();
    }

    Ok(Transcript {
        delivered,
        packets_sent,
        packets_accepted,
        dropped,
        duplicated,
        tampered,
        mac_rejections,
        error,
    })
}

/// Passive capture of ciphertext payloads, grouped into rounds of k
/// consecutive sequence numbers. The adversary knows k and PS but not P, R,
/// or the MAC key.
pub struct AdversaryTap {
    k: usize,
    ps: usize,
    payloads: BTreeMap<u64, Block>,
}

impl AdversaryTap {
    pub fn new(k: usize, ps: usize) -> AdversaryTap {
        AdversaryTap {
            k,
            ps,
            payloads: BTreeMap::new(),
        }
    }

    pub fn observe(&mut self, seq: u64, payload: &[u8]) -> Result<()> {
        let block = Block::from_bytes(self.ps, payload)?;
        self.payloads.insert(seq, block);
        Ok(())
    }

    /// The k ciphertext blocks of round `r`, or an error if any is missing.
    pub fn round(&self, r: u64) -> Result<Vec<&Block>> {
        let base = r * self.k as u64;
        (base..base + self.k as u64)
            .map(|seq| self.payloads.get(&seq).ok_or(Error::InsufficientCapture(r)))
            .collect()
    }

    /// Number of complete rounds captured from sequence zero.
    pub fn complete_rounds(&self) -> u64 {
        let mut r = 0;
        while self.round(r).is_ok() {
            r += 1;
        }
        r
    }
}

/// Stage 1: XOR the data slots of round `r` with those of round `r+1`. The
/// pad cancels, leaving `X_i^r ⊕ X_i^{r+1} ⊕ R^r` per slot.
pub fn attack_round_difference(tap: &AdversaryTap, round: u64) -> Result<Vec<Block>> {
    let cur = tap.round(round)?;
    let next = tap.round(round + 1)?;
    (0..tap.k - 1)
        .map(|i| field::add(cur[i], next[i]))
        .collect()
}

/// A stage-2 combination: R eliminated by pairing two slot differences.
#[derive(Clone, Debug)]
pub struct SlotPairCombo {
    pub slot_a: usize,
    pub slot_b: usize,
    pub combo: Block,
}

/// Stage 2: XOR difference blocks pairwise to cancel R. With k = 2 there is
/// only one difference block and the attack degenerates.
pub fn attack_eliminate_r(deltas: &[Block]) -> Result<Vec<SlotPairCombo>> {
    if deltas.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 difference blocks to cancel R, got {}",
            deltas.len()
        )));
    }
    let mut out = Vec::new();
    for a in 0..deltas.len() {
        for b in a + 1..deltas.len() {
            out.push(SlotPairCombo {
                slot_a: a,
                slot_b: b,
                combo: field::add(&deltas[a], &deltas[b])?,
            });
        }
    }
    Ok(out)
}

/// Attack-demo parameters.
#[derive(Clone, Debug)]
pub struct AttackDemoConfig {
    pub ps: usize,
    pub k: usize,
    /// Required when no ready-made polynomial ships for `ps`.
    pub poly: Option<ReductionPoly>,
    pub seed: [u8; 32],
    /// Run the pipeline against the all-or-nothing mode instead of base.
    pub aont: bool,
}

/// Per-slot stage-1 verification against white-box ground truth.
#[derive(Clone, Copy, Debug)]
pub struct SlotIdentity {
    pub round: u64,
    pub slot: usize,
    pub holds: bool,
}

/// Per-pair stage-2 verification against white-box ground truth.
#[derive(Clone, Copy, Debug)]
pub struct PairIdentity {
    pub round: u64,
    pub slot_a: usize,
    pub slot_b: usize,
    pub holds: bool,
}

/// Outcome of the known-plaintext recovery of a fourth block from the other
/// three.
#[derive(Clone, Copy, Debug)]
pub struct Recovery {
    pub round: u64,
    pub slot_a: usize,
    pub slot_b: usize,
    /// Recovered block equals the actual pre-masking block (always true for
    /// slots below k: the differencing identity is exact).
    pub matches_ground_truth: bool,
    /// Recovered block equals the marked plaintext block at that position:
    /// true in base mode, false with the all-or-nothing stage.
    pub plaintext_recovered: bool,
}

/// Full report of the executable attack.
#[derive(Clone, Debug)]
pub struct AttackDemo {
    pub ps: usize,
    pub k: usize,
    pub aont: bool,
    pub rounds_checked: u64,
    pub slot_identities: Vec<SlotIdentity>,
    pub pair_identities: Vec<PairIdentity>,
    pub recovery: Option<Recovery>,
}

fn traced_transfer(
    secret: &SharedSecret,
    data: &[u8],
    seed: [u8; 32],
) -> Result<(Vec<RunTrace>, AdversaryTap)> {
    let secret = Arc::new(secret.clone());
    let mut tx = SenderSession::new(
        secret.clone(),
        ProtocolRng::from_seed(seed),
        ExecMode::default(),
    );
    tx.enable_trace();
    let mut emitted = tx.push(data)?;
    emitted.extend(tx.flush()?);
    let mut framer = PacketFramer::new(secret.mac_config(), 0);
    let mut tap = AdversaryTap::new(secret.k(), secret.ps());
    let mut rx = ReceiverSession::new(secret.clone(), ExecMode::default());
    let mut delivered = Vec::new();
    for p in framer.frame(&emitted) {
        tap.observe(p.seq, &p.payload)?;
        let block = wire::payload_block(&p, secret.ps())?;
        delivered.extend(rx.push(p.flags, block)?);
    }
    rx.finish()?;
    if delivered != data {
        return Err(Error::Protocol("clean transfer corrupted data".into()));
    }
    Ok((tx.trace().to_vec(), tap))
}

/// Runs a seeded clean transfer in base mode (and, when asked, again in
/// all-or-nothing mode with the same pad and draws), executes both attack
/// stages, verifies them against white-box ground truth, and attempts the
/// known-plaintext recovery of a fourth block.
pub fn attack_demo(cfg: &AttackDemoConfig) -> Result<AttackDemo> {
    let mut key_rng = ChaCha20Rng::from_seed(cfg.seed);
    key_rng.set_stream(STREAM_KEYGEN);
    let make_params = |mode: Mode| KeygenParams {
        ps: cfg.ps,
        k: cfg.k,
        mode,
        min_part_bits: (cfg.ps / 2).clamp(1, cfg.ps - 2),
        poly: cfg.poly.clone(),
        validate_poly: false,
    };
    // same rng seed twice: identical pad for both modes
    let base_secret = keymat::keygen(
        &make_params(Mode::Base),
        &mut {
            let mut r = ChaCha20Rng::from_seed(cfg.seed);
            r.set_stream(STREAM_KEYGEN);
            r
        },
    )?;
    let mut data_rng = ChaCha20Rng::from_seed(cfg.seed);
    data_rng.set_stream(STREAM_DEMO_DATA);
    // enough data for at least three full rounds even at maximal part sizes
    let data_len = 4 * cfg.k * cfg.ps / 8;
    let data: Vec<u8> = (0..data_len).map(|_| data_rng.gen()).collect();

    let (base_trace, base_tap) = traced_transfer(&base_secret, &data, cfg.seed)?;

    let (trace, tap) = if cfg.aont {
        let aont_secret = keymat::keygen(
            &make_params(Mode::Aont),
            &mut {
                let mut r = ChaCha20Rng::from_seed(cfg.seed);
                r.set_stream(STREAM_KEYGEN);
                r
            },
        )?;
        traced_transfer(&aont_secret, &data, cfg.seed)?
    } else {
        (base_trace.clone(), base_tap)
    };

    let rounds = tap.complete_rounds().min(base_trace.len() as u64);
    if rounds < 2 {
        return Err(Error::InsufficientCapture(rounds));
    }
    let pair_rounds = rounds - 1;

    let mut slot_identities = Vec::new();
    let mut pair_identities = Vec::new();
    for r in 0..pair_rounds {
        let deltas = attack_round_difference(&tap, r)?;
        // stage 1 vs ground truth: delta_i = X_i^r ⊕ X_i^{r+1} ⊕ R^r
        for (i, delta) in deltas.iter().enumerate() {
            let expect = field::add(
                &field::add(&trace[r as usize].premask[i], &trace[r as usize + 1].premask[i])?,
                &trace[r as usize].r,
            )?;
            slot_identities.push(SlotIdentity {
                round: r,
                slot: i,
                holds: *delta == expect,
            });
        }
        // stage 2 vs ground truth: R cancelled
        if deltas.len() >= 2 {
            for pair in attack_eliminate_r(&deltas)? {
                let x = |round: u64, slot: usize| &trace[round as usize].premask[slot];
                let expect = field::add(
                    &field::add(x(r, pair.slot_a), x(r + 1, pair.slot_a))?,
                    &field::add(x(r, pair.slot_b), x(r + 1, pair.slot_b))?,
                )?;
                pair_identities.push(PairIdentity {
                    round: r,
                    slot_a: pair.slot_a,
                    slot_b: pair.slot_b,
                    holds: pair.combo == expect,
                });
            }
        }
    }

    // known-plaintext recovery: guess three marked blocks, recover the
    // fourth from the stage-2 combination, compare against the marked
    // plaintext the attacker is after
    let recovery = if cfg.k >= 3 {
        let deltas = attack_round_difference(&tap, 0)?;
        let combo = &attack_eliminate_r(&deltas)?[0];
        let (a, b) = (combo.slot_a, combo.slot_b);
        let naive = |round: usize, slot: usize| &base_trace[round].premask[slot];
        let recovered = field::add(
            &field::add(&combo.combo, naive(0, a))?,
            &field::add(naive(1, a), naive(0, b))?,
        )?;
        let truth = field::add(
            &field::add(&combo.combo, &trace[0].premask[a])?,
            &field::add(&trace[1].premask[a], &trace[0].premask[b])?,
        )?;
        Some(Recovery {
            round: 0,
            slot_a: a,
            slot_b: b,
            matches_ground_truth: truth == trace[1].premask[b],
            plaintext_recovered: recovered == *naive(1, b),
        })
    } else {
        None
    };

    Ok(AttackDemo {
        ps: cfg.ps,
        k: cfg.k,
        aont: cfg.aont,
        rounds_checked: pair_rounds,
        slot_identities,
        pair_identities,
        recovery,
    })
}
