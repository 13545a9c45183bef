//! The shared secret bundle, live pad state, key evolution, and keyfile
//! serialization.
//!
//! The pad P is k blocks of PS bits exchanged ahead of time. After every
//! run the pad evolves: R is XORed into P_1..P_{k−1} and P_k is multiplied
//! by R in GF(2^PS), so pad values never repeat while both ends stay in
//! lockstep.

use crate::counts::OpCounters;
use crate::error::{Error, Result};
use crate::field::{self, Block, ReductionPoly};
use crate::mac::MacConfig;
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

pub const KEYFILE_MAGIC: [u8; 4] = *b"JSAW";
pub const KEYFILE_VERSION: u8 = 0x01;
pub const MAX_MAC_KEY_LEN: usize = 64;

/// Session operating mode.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// Parts of 1..=PS−2 bits, marker-affixed and embedded at random offsets.
    Base,
    /// Parts of exactly PS bits travelling as raw blocks (no markers).
    FullBlock,
    /// Base tearing plus the linear all-or-nothing transform per message.
    Aont,
}

impl Mode {
    pub fn to_octet(self) -> u8 {
        match self {
            Mode::Base => 0,
            Mode::FullBlock => 1,
            Mode::Aont => 2,
        }
    }

    pub fn from_octet(v: u8) -> Result<Mode> {
        match v {
            0 => Ok(Mode::Base),
            1 => Ok(Mode::FullBlock),
            2 => Ok(Mode::Aont),
            _ => Err(Error::Invariant(format!("unknown mode octet {v:#04x}"))),
        }
    }
}

/// Everything both ends must agree on before the first packet.
#[derive(Clone, Debug)]
pub struct SharedSecret {
    ps: usize,
    k: usize,
    p_initial: Vec<Block>,
    mac_key: Vec<u8>,
    poly: ReductionPoly,
    lambda: Block,
    min_part_bits: usize,
    mode: Mode,
}

impl SharedSecret {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ps: usize,
        k: usize,
        p_initial: Vec<Block>,
        mac_key: Vec<u8>,
        poly: ReductionPoly,
        lambda: Block,
        min_part_bits: usize,
        mode: Mode,
    ) -> Result<SharedSecret> {
        let secret = SharedSecret {
            ps,
            k,
            p_initial,
            mac_key,
            poly,
            lambda,
            min_part_bits,
            mode,
        };
        secret.validate(false)?;
        Ok(secret)
    }

    /// Checks every structural invariant; the irreducibility test is opt-in
    /// because it dominates load time at large PS.
    pub fn validate(&self, check_poly: bool) -> Result<()> {
        if self.ps < 8 || self.ps % 8 != 0 {
            return Err(Error::Config(format!(
                "block size must be a positive multiple of 8 bits, got {}",
                self.ps
            )));
        }
        if self.k < 2 {
            return Err(Error::Config(
                "k = 1 is not possible: runs would carry only random numbers".into(),
            ));
        }
        if self.p_initial.len() != self.k {
            return Err(Error::Invariant(format!(
                "expected {} pad blocks, found {}",
                self.k,
                self.p_initial.len()
            )));
        }
        for (i, b) in self.p_initial.iter().enumerate() {
            if b.ps() != self.ps {
                return Err(Error::SizeMismatch {
                    left: b.ps(),
                    right: self.ps,
                });
            }
            if b.is_zero() {
                return Err(Error::Invariant(format!("pad block P_{} is zero", i + 1)));
            }
        }
        if self.poly.ps() != self.ps {
            return Err(Error::SizeMismatch {
                left: self.poly.ps(),
                right: self.ps,
            });
        }
        if self.lambda.ps() != self.ps {
            return Err(Error::SizeMismatch {
                left: self.lambda.ps(),
                right: self.ps,
            });
        }
        if self.lambda.is_zero() || self.lambda == Block::one(self.ps) {
            return Err(Error::Invariant("lambda must lie outside {0, 1}".into()));
        }
        if self.mac_key.is_empty() || self.mac_key.len() > MAX_MAC_KEY_LEN {
            return Err(Error::Invariant(format!(
                "MAC key length {} outside 1..={MAX_MAC_KEY_LEN}",
                self.mac_key.len()
            )));
        }
        if self.mode != Mode::FullBlock
            && (self.min_part_bits < 1 || self.min_part_bits > self.ps - 2)
        {
            return Err(Error::Config(format!(
                "min part size {} outside 1..={}",
                self.min_part_bits,
                self.ps - 2
            )));
        }
        if check_poly && !field::is_irreducible(&self.poly) {
            return Err(Error::Invariant(
                "reduction polynomial is not irreducible".into(),
            ));
        }
        Ok(())
    }

    pub fn ps(&self) -> usize {
        self.ps
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn min_part_bits(&self) -> usize {
        self.min_part_bits
    }

    pub fn poly(&self) -> &ReductionPoly {
        &self.poly
    }

    pub fn lambda(&self) -> &Block {
        &self.lambda
    }

    pub fn mac_key(&self) -> &[u8] {
        &self.mac_key
    }

    pub fn p_initial(&self) -> &[Block] {
        &self.p_initial
    }

    /// Fresh pad state at run 0.
    pub fn initial_pad(&self) -> PadState {
        PadState {
            p: self.p_initial.clone(),
            run_index: 0,
        }
    }

    /// Untruncated HMAC-SHA-1 configuration over the bundled MAC key.
    pub fn mac_config(&self) -> MacConfig {
        MacConfig::sha1(self.mac_key.clone()).expect("validated key")
    }
}

/// The live pad: current P_1..P_k plus the number of completed runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadState {
    p: Vec<Block>,
    run_index: u64,
}

impl PadState {
    pub fn from_parts(p: Vec<Block>, run_index: u64) -> PadState {
        PadState { p, run_index }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.p
    }

    pub fn run_index(&self) -> u64 {
        self.run_index
    }
}

/// Evolves the pad in place: P_i ← P_i ⊕ R for i < k, P_k ← P_k · R.
///
/// R must be nonzero; R = 0 would zero P_k permanently. Since the field has
/// no zero divisors, P_k ≠ 0 is preserved.
pub fn transform(
    state: &mut PadState,
    r: &Block,
    poly: &ReductionPoly,
    counters: &mut OpCounters,
) -> Result<()> {
    if r.is_zero() {
        return Err(Error::InvalidRandom);
    }
    let k = state.p.len();
    if r.ps() != poly.ps() || state.p[0].ps() != r.ps() {
        return Err(Error::SizeMismatch {
            left: state.p[0].ps(),
            right: r.ps(),
        });
    }
    for b in &mut state.p[..k - 1] {
        b.xor_in_place(r);
    }
    counters.add_xors(k as u64 - 1);
    state.p[k - 1] = field::mul(&state.p[k - 1], r, poly)?;
    counters.add_mults(1);
    state.run_index += 1;
    Ok(())
}

/// Selects an octet slice of an initial pad block as a MAC key
/// (1-based `block_index`).
pub fn derive_mac_key(
    secret: &SharedSecret,
    block_index: usize,
    offset_octets: usize,
    len_octets: usize,
) -> Result<Vec<u8>> {
    if block_index < 1 || block_index > secret.k {
        return Err(Error::Config(format!(
            "block index {block_index} outside 1..={}",
            secret.k
        )));
    }
    let block_octets = secret.ps / 8;
    if len_octets == 0 {
        return Err(Error::Config("MAC key slice must be non-empty".into()));
    }
    if offset_octets + len_octets > block_octets {
        return Err(Error::SliceOutOfRange {
            offset: offset_octets,
            len: len_octets,
            block_octets,
        });
    }
    Ok(secret.p_initial[block_index - 1].as_bytes()[offset_octets..offset_octets + len_octets]
        .to_vec())
}

/// Parameters for [`keygen`].
#[derive(Clone, Debug)]
pub struct KeygenParams {
    pub ps: usize,
    pub k: usize,
    pub mode: Mode,
    pub min_part_bits: usize,
    /// Required when no ready-made polynomial ships for `ps`.
    pub poly: Option<ReductionPoly>,
    pub validate_poly: bool,
}

/// Draws a fresh shared secret. Pad blocks come from the supplied generator
/// with zero blocks re-drawn; λ defaults to the field element x; the MAC
/// key is frozen from the leading octets of the initial P_1 and never
/// evolves with the pad.
pub fn keygen(params: &KeygenParams, rng: &mut (impl RngCore + CryptoRng)) -> Result<SharedSecret> {
    let poly = match &params.poly {
        Some(p) => p.clone(),
        None => field::default_poly(params.ps).ok_or_else(|| {
            Error::Config(format!(
                "no shipped reduction polynomial for PS={}; supply one",
                params.ps
            ))
        })?,
    };
    if poly.ps() != params.ps {
        return Err(Error::SizeMismatch {
            left: poly.ps(),
            right: params.ps,
        });
    }
    if params.validate_poly && !field::is_irreducible(&poly) {
        return Err(Error::Invariant(
            "reduction polynomial is not irreducible".into(),
        ));
    }
    if params.ps < 8 || params.ps % 8 != 0 {
        return Err(Error::Config(format!(
            "block size must be a positive multiple of 8 bits, got {}",
            params.ps
        )));
    }
    if params.k < 2 {
        return Err(Error::Config(
            "k = 1 is not possible: runs would carry only random numbers".into(),
        ));
    }
    let p_initial: Vec<Block> = (0..params.k)
        .map(|_| crate::rng::nonzero_block(rng, params.ps))
        .collect();
    let mac_key = p_initial[0].as_bytes()[..(params.ps / 8).min(MAX_MAC_KEY_LEN)].to_vec();
    SharedSecret::new(
        params.ps,
        params.k,
        p_initial,
        mac_key,
        poly,
        Block::from_u64(params.ps, 2),
        params.min_part_bits,
        params.mode,
    )
}

/// Serializes a secret to the keyfile layout (all integers big-endian):
/// `"JSAW" ‖ version ‖ PS/8 (4) ‖ k (2) ‖ mode (1) ‖ min_part_bits (4) ‖
/// poly low bits ‖ lambda ‖ mac_key_len (2) ‖ mac_key ‖ P_1..P_k`.
pub fn save_keyfile(secret: &SharedSecret) -> Vec<u8> {
    let octets = secret.ps / 8;
    let mut out = Vec::with_capacity(18 + 2 * octets + secret.mac_key.len() + secret.k * octets);
    out.extend_from_slice(&KEYFILE_MAGIC);
    out.push(KEYFILE_VERSION);
    out.extend_from_slice(&(octets as u32).to_be_bytes());
    out.extend_from_slice(&(secret.k as u16).to_be_bytes());
    out.push(secret.mode.to_octet());
    out.extend_from_slice(&(secret.min_part_bits as u32).to_be_bytes());
    out.extend_from_slice(secret.poly.low_bits().as_bytes());
    out.extend_from_slice(secret.lambda.as_bytes());
    out.extend_from_slice(&(secret.mac_key.len() as u16).to_be_bytes());
    out.extend_from_slice(&secret.mac_key);
    for b in &secret.p_initial {
        out.extend_from_slice(b.as_bytes());
    }
    out
}

/// Loading behaviour toggles.
#[derive(Clone, Copy, Debug)]
pub struct LoadOptions {
    /// Run the irreducibility test on the stored polynomial. Disable for
    /// very large PS when load time matters.
    pub validate_poly: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            validate_poly: true,
        }
    }
}

/// Parses and fully validates a keyfile.
pub fn load_keyfile(bytes: &[u8]) -> Result<SharedSecret> {
    load_keyfile_with(bytes, LoadOptions::default())
}

pub fn load_keyfile_with(bytes: &[u8], opts: LoadOptions) -> Result<SharedSecret> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.take(4, "magic")?;
    if magic != KEYFILE_MAGIC {
        return Err(Error::BadMagic {
            expected: KEYFILE_MAGIC,
        });
    }
    let version = cur.u8("version")?;
    if version != KEYFILE_VERSION {
        return Err(Error::BadVersion(version));
    }
    let octets = cur.u32("block octets")? as usize;
    if octets == 0 {
        return Err(Error::Invariant("block size of zero octets".into()));
    }
    let ps = octets * 8;
    let k = cur.u16("k")? as usize;
    let mode = Mode::from_octet(cur.u8("mode")?)?;
    let min_part_bits = cur.u32("min part bits")? as usize;
    let poly = ReductionPoly::from_low_bytes(ps, cur.take(octets, "reduction polynomial")?)?;
    let lambda = Block::from_bytes(ps, cur.take(octets, "lambda")?)?;
    let mac_key_len = cur.u16("mac key length")? as usize;
    if mac_key_len == 0 || mac_key_len > MAX_MAC_KEY_LEN {
        return Err(Error::Invariant(format!(
            "MAC key length {mac_key_len} outside 1..={MAX_MAC_KEY_LEN}"
        )));
    }
    let mac_key = cur.take(mac_key_len, "mac key")?.to_vec();
    let mut p_initial = Vec::with_capacity(k);
    for _ in 0..k {
        p_initial.push(Block::from_bytes(ps, cur.take(octets, "pad block")?)?);
    }
    cur.finish("keyfile")?;
    let secret = SharedSecret {
        ps,
        k,
        p_initial,
        mac_key,
        poly,
        lambda,
        min_part_bits,
        mode,
    };
    secret.validate(opts.validate_poly)?;
    Ok(secret)
}

/// SHA-256 of the keyfile bytes; binds session state files to their key.
pub fn keyfile_fingerprint(keyfile_bytes: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(keyfile_bytes);
    h.finalize().into()
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Cursor<'a> {
        Cursor { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize, context: &'static str) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Truncated { context });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self, context: &'static str) -> Result<u8> {
        Ok(self.take(1, context)?[0])
    }

    fn u16(&mut self, context: &'static str) -> Result<u16> {
        Ok(u16::from_be_bytes(self.take(2, context)?.try_into().unwrap()))
    }

    fn u32(&mut self, context: &'static str) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4, context)?.try_into().unwrap()))
    }

    fn finish(&self, what: &str) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Invariant(format!(
                "{what} has {} trailing octets",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn poly1024() -> ReductionPoly {
        // x^1024 + x^19 + x^6 + x + 1
        ReductionPoly::new(Block::from_u64(1024, 0x8_0043))
    }

    fn params(ps: usize, k: usize) -> KeygenParams {
        KeygenParams {
            ps,
            k,
            mode: Mode::Base,
            min_part_bits: 1.max(ps / 2).min(ps - 2),
            poly: if ps == 1024 { Some(poly1024()) } else { None },
            validate_poly: false,
        }
    }

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn transform_identity_r() {
        let secret = keygen(&params(8, 4), &mut rng(1)).unwrap();
        let mut pad = secret.initial_pad();
        let before = pad.blocks().to_vec();
        let mut c = OpCounters::default();
        transform(&mut pad, &Block::one(8), secret.poly(), &mut c).unwrap();
        // P_k unchanged; each other block has only its least significant bit flipped
        assert_eq!(pad.blocks()[3], before[3]);
        for i in 0..3 {
            let diff = field::add(&pad.blocks()[i], &before[i]).unwrap();
            assert_eq!(diff, Block::one(8));
        }
        assert_eq!(pad.run_index(), 1);
        assert_eq!(c, OpCounters { block_xors: 3, block_mults: 1 });
    }

    #[test]
    fn transform_worked_example() {
        // PS=8, k=2, P=(0xFF, 0x02), r=0x80 -> P' = (0x7F, 0x1B)
        let poly = field::default_poly(8).unwrap();
        let mut pad = PadState::from_parts(
            vec![Block::from_u64(8, 0xFF), Block::from_u64(8, 0x02)],
            0,
        );
        let mut c = OpCounters::default();
        transform(&mut pad, &Block::from_u64(8, 0x80), &poly, &mut c).unwrap();
        assert_eq!(pad.blocks()[0], Block::from_u64(8, 0x7F));
        assert_eq!(pad.blocks()[1], Block::from_u64(8, 0x1B));
    }

    #[test]
    fn transform_twice_composes_by_xor() {
        let secret = keygen(&params(64, 5), &mut rng(2)).unwrap();
        let mut pad = secret.initial_pad();
        let before = pad.blocks().to_vec();
        let (r1, r2) = (Block::from_u64(64, 0xDEAD), Block::from_u64(64, 0xBEEF));
        let mut c = OpCounters::default();
        transform(&mut pad, &r1, secret.poly(), &mut c).unwrap();
        transform(&mut pad, &r2, secret.poly(), &mut c).unwrap();
        let r12 = field::add(&r1, &r2).unwrap();
        for i in 0..4 {
            assert_eq!(
                pad.blocks()[i],
                field::add(&before[i], &r12).unwrap(),
                "block {i}"
            );
        }
        assert_eq!(pad.run_index(), 2);
    }

    #[test]
    fn transform_rejects_zero_r() {
        let secret = keygen(&params(8, 2), &mut rng(3)).unwrap();
        let mut pad = secret.initial_pad();
        let mut c = OpCounters::default();
        assert!(matches!(
            transform(&mut pad, &Block::zero(8), secret.poly(), &mut c),
            Err(Error::InvalidRandom)
        ));
    }

    #[test]
    fn pad_survives_long_transform_chains() {
        let secret = keygen(&params(64, 3), &mut rng(4)).unwrap();
        let mut pad = secret.initial_pad();
        let mut c = OpCounters::default();
        let mut r = rng(5);
        for _ in 0..1000 {
            let rv = crate::rng::nonzero_block(&mut r, 64);
            transform(&mut pad, &rv, secret.poly(), &mut c).unwrap();
            assert!(!pad.blocks()[2].is_zero());
        }
        assert_eq!(pad.run_index(), 1000);
    }

    #[test]
    fn transform_injective_in_r() {
        let secret = keygen(&params(16, 2), &mut rng(6)).unwrap();
        let mut seen = std::collections::HashSet::new();
        for r in 1u64..2000.min(1 << 16) {
            let mut pad = secret.initial_pad();
            let mut c = OpCounters::default();
            transform(&mut pad, &Block::from_u64(16, r % 0xFFFF + 1), secret.poly(), &mut c)
                .unwrap();
            seen.insert(pad.blocks()[0].as_bytes().to_vec());
        }
        // distinct r values give distinct P_1'
        assert_eq!(seen.len(), 1999.min((1 << 16) - 1));
    }

    #[test]
    fn derive_mac_key_slices() {
        let secret = keygen(&params(64, 3), &mut rng(7)).unwrap();
        let whole = derive_mac_key(&secret, 1, 0, 8).unwrap();
        assert_eq!(whole, secret.p_initial()[0].as_bytes());
        let mid = derive_mac_key(&secret, 2, 3, 2).unwrap();
        assert_eq!(mid, &secret.p_initial()[1].as_bytes()[3..5]);

        assert!(matches!(
            derive_mac_key(&secret, 1, 0, 0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            derive_mac_key(&secret, 1, 7, 2),
            Err(Error::SliceOutOfRange { .. })
        ));
        assert!(derive_mac_key(&secret, 4, 0, 1).is_err());
    }

    #[test]
    fn derive_mac_key_single_octet_block() {
        let mut p1 = None;
        let secret = keygen(&params(8, 2), &mut rng(8)).unwrap();
        p1.replace(secret.p_initial()[0].clone());
        let key = derive_mac_key(&secret, 1, 0, 1).unwrap();
        assert_eq!(key, p1.unwrap().as_bytes());
    }

    #[test]
    fn keygen_rejects_k1() {
        assert!(matches!(
            keygen(&params(8, 1), &mut rng(9)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn keygen_is_deterministic_under_seed() {
        let a = keygen(&params(8, 2), &mut rng(10)).unwrap();
        let b = keygen(&params(8, 2), &mut rng(10)).unwrap();
        assert_eq!(save_keyfile(&a), save_keyfile(&b));
    }

    #[test]
    fn keygen_blocks_always_nonzero() {
        for seed in 0..50 {
            let secret = keygen(&params(8, 7), &mut rng(seed)).unwrap();
            assert!(secret.p_initial().iter().all(|b| !b.is_zero()));
        }
    }

    #[test]
    fn keygen_needs_poly_for_large_ps() {
        let mut p = params(256, 2);
        p.poly = None;
        assert!(matches!(keygen(&p, &mut rng(11)), Err(Error::Config(_))));
    }

    #[test]
    fn keyfile_roundtrip_bit_exact() {
        let mut r = rng(12);
        for (ps, count) in [(8usize, 40), (64, 40), (1024, 20)] {
            for i in 0..count {
                let mut p = params(ps, 2 + (i % 9));
                p.mode = match i % 3 {
                    0 => Mode::Base,
                    1 => Mode::FullBlock,
                    _ => Mode::Aont,
                };
                let secret = keygen(&p, &mut r).unwrap();
                let bytes = save_keyfile(&secret);
                let loaded = load_keyfile_with(
                    &bytes,
                    LoadOptions {
                        validate_poly: false,
                    },
                )
                .unwrap();
                assert_eq!(save_keyfile(&loaded), bytes);
            }
        }
    }

    #[test]
    fn keyfile_load_validates_poly_by_default() {
        let mut p = params(8, 2);
        p.poly = Some(ReductionPoly::new(Block::from_u64(8, 0x01))); // (x+1)^8
        let secret = keygen(&p, &mut rng(13)).unwrap();
        let bytes = save_keyfile(&secret);
        assert!(matches!(load_keyfile(&bytes), Err(Error::Invariant(_))));
        assert!(load_keyfile_with(&bytes, LoadOptions { validate_poly: false }).is_ok());
    }

    #[test]
    fn keyfile_bad_magic() {
        let secret = keygen(&params(8, 2), &mut rng(14)).unwrap();
        let mut bytes = save_keyfile(&secret);
        bytes[0] = b'X';
        assert!(matches!(
            load_keyfile(&bytes),
            Err(Error::BadMagic { .. })
        ));
    }

    #[test]
    fn keyfile_bad_version_and_truncation() {
        let secret = keygen(&params(8, 2), &mut rng(15)).unwrap();
        let mut bytes = save_keyfile(&secret);
        bytes[4] = 0x7F;
        assert!(matches!(load_keyfile(&bytes), Err(Error::BadVersion(0x7F))));

        let good = save_keyfile(&secret);
        for cut in [3, 10, good.len() - 1] {
            assert!(matches!(
                load_keyfile(&good[..cut]),
                Err(Error::Truncated { .. }) | Err(Error::BadMagic { .. })
            ));
        }
    }

    #[test]
    fn keyfile_patched_zero_pk_rejected() {
        let secret = keygen(&params(8, 3), &mut rng(16)).unwrap();
        let mut bytes = save_keyfile(&secret);
        let len = bytes.len();
        bytes[len - 1] = 0; // P_k is the final octet at PS=8
        assert!(matches!(load_keyfile(&bytes), Err(Error::Invariant(_))));
    }

    #[test]
    fn keyfile_trailing_bytes_rejected() {
        let secret = keygen(&params(8, 2), &mut rng(17)).unwrap();
        let mut bytes = save_keyfile(&secret);
        bytes.push(0);
        assert!(matches!(load_keyfile(&bytes), Err(Error::Invariant(_))));
    }

    #[test]
    fn fingerprint_changes_with_content() {
        let a = save_keyfile(&keygen(&params(8, 2), &mut rng(18)).unwrap());
        let b = save_keyfile(&keygen(&params(8, 2), &mut rng(19)).unwrap());
        assert_ne!(keyfile_fingerprint(&a), keyfile_fingerprint(&b));
        assert_eq!(keyfile_fingerprint(&a), keyfile_fingerprint(&a));
    }

    #[test]
    fn lambda_outside_zero_one_enforced() {
        let secret = keygen(&params(8, 2), &mut rng(20)).unwrap();
        let mut bytes = save_keyfile(&secret);
        // lambda sits after magic(4) version(1) octets(4) k(2) mode(1)
        // min_part(4) poly(1) at PS=8
        let lambda_at = 4 + 1 + 4 + 2 + 1 + 4 + 1;
        bytes[lambda_at] = 0;
        assert!(matches!(load_keyfile(&bytes), Err(Error::Invariant(_))));
        bytes[lambda_at] = 1;
        assert!(matches!(load_keyfile(&bytes), Err(Error::Invariant(_))));
    }
}
