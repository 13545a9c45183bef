//! Arithmetic in GF(2^PS).
//!
//! A [`Block`] is a PS-bit value stored big-endian; it doubles as a field
//! element (bit 0 of the last octet is the coefficient of x^0) and as a
//! packet payload. Addition is XOR. Multiplication is a carry-less product
//! reduced modulo a monic irreducible polynomial of degree PS, given by its
//! low coefficients as a [`ReductionPoly`].
//!
//! Protocol block sizes are multiples of 8; sub-octet sizes (PS = 4) are
//! accepted here so small fields can be tested exhaustively.

use crate::error::{Error, Result};
use std::fmt;

/// A PS-bit value; element of GF(2^PS).
///
/// Stored as `ceil(PS/8)` octets, big-endian, with unused high bits zero.
/// Bit 1 in protocol terms is the most significant bit of octet 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Block {
    ps: usize,
    bytes: Vec<u8>,
}

impl Block {
    /// The all-zero block.
    pub fn zero(ps: usize) -> Block {
        assert!(ps >= 1, "block size must be at least one bit");
        Block {
            ps,
            bytes: vec![0u8; ps.div_ceil(8)],
        }
    }

    /// The multiplicative identity.
    pub fn one(ps: usize) -> Block {
        let mut b = Block::zero(ps);
        let last = b.bytes.len() - 1;
        b.bytes[last] = 1;
        b
    }

    /// Builds a block from exactly `ceil(ps/8)` octets. High pad bits (when
    /// `ps` is not a multiple of 8) must be zero.
    pub fn from_bytes(ps: usize, bytes: &[u8]) -> Result<Block> {
        if ps == 0 {
            return Err(Error::Config("block size must be at least one bit".into()));
        }
        let want = ps.div_ceil(8);
        if bytes.len() != want {
            return Err(Error::SizeMismatch {
                left: ps,
                right: bytes.len() * 8,
            });
        }
        if ps % 8 != 0 && bytes[0] & !(0xFFu8 >> (8 - ps % 8)) != 0 {
            return Err(Error::Invariant(format!(
                "high pad bits set in a {ps}-bit block"
            )));
        }
        Ok(Block {
            ps,
            bytes: bytes.to_vec(),
        })
    }

    /// Convenience constructor for test values; `value` must fit in `ps` bits.
    pub fn from_u64(ps: usize, value: u64) -> Block {
        assert!(ps >= 64 || value < (1u64 << ps), "value does not fit");
        let mut b = Block::zero(ps);
        let n = b.bytes.len();
        let be = value.to_be_bytes();
        if n >= 8 {
            b.bytes[n - 8..].copy_from_slice(&be);
        } else {
            b.bytes.copy_from_slice(&be[8 - n..]);
        }
        b
    }

    pub fn ps(&self) -> usize {
        self.ps
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn is_zero(&self) -> bool {
        self.bytes.iter().all(|&b| b == 0)
    }

    /// Bit `i`, 1-based from the most significant end (protocol order).
    pub fn bit(&self, i: usize) -> bool {
        assert!(i >= 1 && i <= self.ps);
        self.bit_lsb(self.ps - i)
    }

    /// Bit at position `pos` counting from the least significant end
    /// (`pos` 0 is the coefficient of x^0).
    fn bit_lsb(&self, pos: usize) -> bool {
        let byte = self.bytes.len() - 1 - pos / 8;
        self.bytes[byte] >> (pos % 8) & 1 == 1
    }

    fn set_bit_lsb(&mut self, pos: usize) {
        let byte = self.bytes.len() - 1 - pos / 8;
        self.bytes[byte] |= 1 << (pos % 8);
    }

    /// In-place XOR. Both blocks must have the same size; masking paths
    /// guarantee this by construction.
    pub(crate) fn xor_in_place(&mut self, other: &Block) {
        debug_assert_eq!(self.ps, other.ps);
        for (a, b) in self.bytes.iter_mut().zip(other.bytes.iter()) {
            *a ^= b;
        }
    }

    fn msb(&self) -> bool {
        self.bit_lsb(self.ps - 1)
    }

    /// Shift left one bit, dropping the outgoing high bit.
    fn shl1(&mut self) {
        let n = self.bytes.len();
        for i in 0..n - 1 {
            self.bytes[i] = self.bytes[i] << 1 | self.bytes[i + 1] >> 7;
        }
        self.bytes[n - 1] <<= 1;
        if self.ps % 8 != 0 {
            self.bytes[0] &= 0xFFu8 >> (8 - self.ps % 8);
        }
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Block({}b, ", self.ps)?;
        for b in &self.bytes {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

/// Monic degree-PS reduction polynomial, stored as the PS coefficients below
/// the implicit leading term.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReductionPoly {
    low: Block,
}

impl ReductionPoly {
    pub fn new(low_bits: Block) -> ReductionPoly {
        ReductionPoly { low: low_bits }
    }

    pub fn from_low_bytes(ps: usize, bytes: &[u8]) -> Result<ReductionPoly> {
        Ok(ReductionPoly {
            low: Block::from_bytes(ps, bytes)?,
        })
    }

    /// Degree of the polynomial; equals the block size it reduces.
    pub fn ps(&self) -> usize {
        self.low.ps()
    }

    pub fn low_bits(&self) -> &Block {
        &self.low
    }
}

/// Well-known low-weight irreducible polynomials for the block sizes the
/// crate ships ready-made. Larger sizes must be supplied in the keyfile.
pub fn default_poly(ps: usize) -> Option<ReductionPoly> {
    let low = match ps {
        // x^8 + x^4 + x^3 + x + 1
        8 => Block::from_u64(8, 0x1B),
        // x^16 + x^5 + x^3 + x + 1
        16 => Block::from_u64(16, 0x2B),
        // x^64 + x^4 + x^3 + x + 1
        64 => Block::from_u64(64, 0x1B),
        // x^128 + x^7 + x^2 + x + 1
        128 => {
            let mut bytes = vec![0u8; 16];
            bytes[15] = 0x87;
            Block::from_bytes(128, &bytes).expect("constant")
        }
        _ => return None,
    };
    Some(ReductionPoly { low })
}

/// Field addition: bitwise XOR. Self-inverse.
pub fn add(a: &Block, b: &Block) -> Result<Block> {
    if a.ps != b.ps {
        return Err(Error::SizeMismatch {
            left: a.ps,
            right: b.ps,
        });
    }
    let mut out = a.clone();
    out.xor_in_place(b);
    Ok(out)
}

/// Field multiplication: carry-less product reduced modulo `f`, computed
/// shift-and-XOR with interleaved reduction.
pub fn mul(a: &Block, b: &Block, f: &ReductionPoly) -> Result<Block> {
    if a.ps != b.ps || a.ps != f.ps() {
        return Err(Error::SizeMismatch {
            left: a.ps,
            right: if a.ps != b.ps { b.ps } else { f.ps() },
        });
    }
    let ps = a.ps;
    let mut acc = Block::zero(ps);
    let mut shifted = a.clone();
    for i in 0..ps {
        if b.bit_lsb(i) {
            acc.xor_in_place(&shifted);
        }
        if i + 1 < ps {
            let carry = shifted.msb();
            shifted.shl1();
            if carry {
                shifted.xor_in_place(&f.low);
            }
        }
    }
    Ok(acc)
}

/// Multiplicative inverse via the extended Euclidean algorithm over
/// GF(2)[x].
pub fn inv(a: &Block, f: &ReductionPoly) -> Result<Block> {
    if a.ps != f.ps() {
        return Err(Error::SizeMismatch {
            left: a.ps,
            right: f.ps(),
        });
    }
    if a.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let ps = a.ps;
    let mut u = Poly::from_block(a);
    let mut v = Poly::modulus(f);
    let mut g1 = Poly::one(2 * ps + 64);
    let mut g2 = Poly::zero(2 * ps + 64);
    while u.degree() > 0 {
        let mut j = u.degree() - v.degree();
        if j < 0 {
            std::mem::swap(&mut u, &mut v);
            std::mem::swap(&mut g1, &mut g2);
            j = -j;
        }
        u.xor_shifted(&v, j as usize);
        g1.xor_shifted(&g2, j as usize);
    }
    if u.degree() < 0 {
        // gcd(a, f) != 1: only possible when f is not irreducible
        return Err(Error::Invariant(
            "no inverse: reduction polynomial is not irreducible".into(),
        ));
    }
    g1.to_block(ps)
}

/// Rabin's irreducibility test for the monic degree-PS polynomial `f`:
/// x^(2^PS) ≡ x (mod f), and gcd(x^(2^(PS/q)) − x, f) = 1 for every prime
/// q dividing PS.
pub fn is_irreducible(f: &ReductionPoly) -> bool {
    let n = f.ps();
    if n == 1 {
        return true;
    }
    let x = Block::from_u64(n, 2);
    let mut t = x.clone();
    for _ in 0..n {
        t = mul(&t, &t, f).expect("sizes match");
    }
    if t != x {
        return false;
    }
    let modulus = Poly::modulus(f);
    for q in prime_factors(n) {
        let mut t = x.clone();
        for _ in 0..n / q {
            t = mul(&t, &t, f).expect("sizes match");
        }
        let mut g = Poly::from_block(&t);
        g.xor_shifted(&Poly::one(8), 1); // subtract x
        if g.degree() < 0 {
            return false;
        }
        if Poly::gcd(g, modulus.clone()).degree() != 0 {
            return false;
        }
    }
    true
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Dense GF(2)[x] polynomial on u64 words, bit j of word i being the
/// coefficient of x^(64i+j). Internal helper for inversion and gcd.
#[derive(Clone)]
struct Poly {
    words: Vec<u64>,
}

impl Poly {
    fn zero(capacity_bits: usize) -> Poly {
        Poly {
            words: vec![0; capacity_bits.div_ceil(64).max(1)],
        }
    }

    fn one(capacity_bits: usize) -> Poly {
        let mut p = Poly::zero(capacity_bits);
        p.words[0] = 1;
        p
    }

    fn from_block(b: &Block) -> Poly {
        let ps = b.ps();
        let mut p = Poly::zero(ps + 64);
        for pos in 0..ps {
            if b.bit_lsb(pos) {
                p.words[pos / 64] |= 1u64 << (pos % 64);
            }
        }
        p
    }

    /// The full monic modulus x^PS + low_bits.
    fn modulus(f: &ReductionPoly) -> Poly {
        let ps = f.ps();
        let mut p = Poly::from_block(&f.low);
        p.ensure(ps + 1);
        p.words[ps / 64] |= 1u64 << (ps % 64);
        p
    }

    fn ensure(&mut self, bits: usize) {
        let want = bits.div_ceil(64);
        if self.words.len() < want {
            self.words.resize(want, 0);
        }
    }

    fn degree(&self) -> i64 {
        for (i, w) in self.words.iter().enumerate().rev() {
            if *w != 0 {
                return (i * 64 + 63 - w.leading_zeros() as usize) as i64;
            }
        }
        -1
    }

    /// self ^= other << shift
    fn xor_shifted(&mut self, other: &Poly, shift: usize) {
        let od = other.degree();
        if od < 0 {
            return;
        }
        self.ensure(od as usize + shift + 1);
        let (wshift, bshift) = (shift / 64, shift % 64);
        let top = (od as usize) / 64;
        for i in 0..=top {
            let w = other.words[i];
            self.words[i + wshift] ^= w << bshift;
            if bshift != 0 && i + wshift + 1 < self.words.len() {
                self.words[i + wshift + 1] ^= w >> (64 - bshift);
            }
        }
    }

    fn rem(mut self, m: &Poly) -> Poly {
        let dm = m.degree();
        assert!(dm >= 0);
        while self.degree() >= dm {
            let shift = (self.degree() - dm) as usize;
            self.xor_shifted(m, shift);
        }
        self
    }

    fn gcd(mut a: Poly, mut b: Poly) -> Poly {
        while b.degree() >= 0 {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    fn to_block(&self, ps: usize) -> Result<Block> {
        if self.degree() >= ps as i64 {
            return Err(Error::Invariant(format!(
                "polynomial degree {} does not fit {ps} bits",
                self.degree()
            )));
        }
        let mut b = Block::zero(ps);
        for pos in 0..ps {
            if pos / 64 < self.words.len() && self.words[pos / 64] >> (pos % 64) & 1 == 1 {
                b.set_bit_lsb(pos);
            }
        }
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    /// Test-only PS=4 field, x^4 + x + 1.
    fn poly4() -> ReductionPoly {
        ReductionPoly::new(Block::from_bytes(4, &[0x03]).unwrap())
    }

    fn rand_block(ps: usize, rng: &mut ChaCha20Rng) -> Block {
        let mut bytes = vec![0u8; ps.div_ceil(8)];
        rng.fill(&mut bytes[..]);
        if ps % 8 != 0 {
            bytes[0] &= 0xFF >> (8 - ps % 8);
        }
        Block::from_bytes(ps, &bytes).unwrap()
    }

    /// Independent multiplication oracle: schoolbook carry-less product on
    /// bool vectors followed by long-division reduction. Shares no code with
    /// `mul`.
    fn oracle_mul(a: &Block, b: &Block, f: &ReductionPoly) -> Block {
        let ps = a.ps();
        let bits = |x: &Block| -> Vec<bool> { (0..ps).map(|i| x.bit(i + 1)).collect() };
        let (av, bv) = (bits(a), bits(b));
        // product has degree up to 2ps-2; index 0 = highest order term
        let mut prod = vec![false; 2 * ps - 1];
        for (i, &abit) in av.iter().enumerate() {
            for (j, &bbit) in bv.iter().enumerate() {
                if abit && bbit {
                    prod[i + j] ^= true;
                }
            }
        }
        // modulus: 1 followed by the ps low coefficients
        let mut modulus = vec![true];
        modulus.extend((0..ps).map(|i| f.low_bits().bit(i + 1)));
        for start in 0..prod.len() {
            if prod.len() - start < modulus.len() {
                break;
            }
            if prod[start] {
                for (k, &mbit) in modulus.iter().enumerate() {
                    prod[start + k] ^= mbit;
                }
            }
        }
        let tail = &prod[prod.len() - ps..];
        let mut out = Block::zero(ps);
        for (i, &bit) in tail.iter().enumerate() {
            if bit {
                out.set_bit_lsb(ps - 1 - i);
            }
        }
        out
    }

    /// Trial-division irreducibility oracle for small degrees.
    fn oracle_irreducible(ps: usize, low: u64) -> bool {
        let f = (1u128 << ps) | low as u128;
        let deg = |p: u128| 127 - p.leading_zeros() as usize;
        for d in 2u128..(1 << (ps / 2 + 1)) {
            let mut r = f;
            while r != 0 && deg(r) >= deg(d) {
                r ^= d << (deg(r) - deg(d));
            }
            if r == 0 {
                return false;
            }
        }
        true
    }

    #[test]
    fn add_self_inverse_and_identity() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for ps in [8, 64, 128] {
            let x = rand_block(ps, &mut rng);
            let zero = Block::zero(ps);
            assert!(add(&x, &x).unwrap().is_zero());
            assert_eq!(add(&x, &zero).unwrap(), x);
        }
    }

    #[test]
    fn add_worked_example() {
        // 01011011 XOR 11000110 = 10011101
        let a = Block::from_u64(8, 0b0101_1011);
        let b = Block::from_u64(8, 0b1100_0110);
        assert_eq!(add(&a, &b).unwrap(), Block::from_u64(8, 0b1001_1101));
    }

    #[test]
    fn add_size_mismatch() {
        let a = Block::zero(8);
        let b = Block::zero(16);
        assert!(matches!(add(&a, &b), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn mul_identity_and_zero() {
        let f = default_poly(8).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        for _ in 0..32 {
            let a = rand_block(8, &mut rng);
            assert_eq!(mul(&a, &Block::one(8), &f).unwrap(), a);
            assert!(mul(&a, &Block::zero(8), &f).unwrap().is_zero());
        }
    }

    #[test]
    fn mul_single_reduction_step() {
        let f = default_poly(8).unwrap();
        let r = mul(&Block::from_u64(8, 0x02), &Block::from_u64(8, 0x80), &f).unwrap();
        assert_eq!(r, Block::from_u64(8, 0x1B));
        assert_eq!(
            r,
            oracle_mul(&Block::from_u64(8, 0x02), &Block::from_u64(8, 0x80), &f)
        );
    }

    #[test]
    fn mul_textbook_example() {
        let f = default_poly(8).unwrap();
        let (a, b) = (Block::from_u64(8, 0x57), Block::from_u64(8, 0x83));
        let r = mul(&a, &b, &f).unwrap();
        assert_eq!(r, Block::from_u64(8, 0xC1));
        assert_eq!(r, oracle_mul(&a, &b, &f));
    }

    #[test]
    fn mul_matches_oracle_randomized() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for ps in [8usize, 16, 64] {
            let f = default_poly(ps).unwrap();
            for _ in 0..200 {
                let a = rand_block(ps, &mut rng);
                let b = rand_block(ps, &mut rng);
                assert_eq!(mul(&a, &b, &f).unwrap(), oracle_mul(&a, &b, &f));
            }
        }
    }

    #[test]
    fn field_axioms_randomized() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for ps in [8usize, 16, 64] {
            let f = default_poly(ps).unwrap();
            for _ in 0..300 {
                let a = rand_block(ps, &mut rng);
                let b = rand_block(ps, &mut rng);
                let c = rand_block(ps, &mut rng);
                let ab = mul(&a, &b, &f).unwrap();
                let bc = mul(&b, &c, &f).unwrap();
                assert_eq!(mul(&a, &bc, &f).unwrap(), mul(&ab, &c, &f).unwrap());
                assert_eq!(ab, mul(&b, &a, &f).unwrap());
                let b_plus_c = add(&b, &c).unwrap();
                assert_eq!(
                    mul(&a, &b_plus_c, &f).unwrap(),
                    add(&ab.clone(), &mul(&a, &c, &f).unwrap()).unwrap()
                );
            }
        }
    }

    #[test]
    fn add_is_abelian_group_exhaustive_ps8() {
        for a in 0u64..256 {
            let ba = Block::from_u64(8, a);
            assert!(add(&ba, &ba).unwrap().is_zero());
            assert_eq!(add(&ba, &Block::zero(8)).unwrap(), ba);
            for b in 0u64..256 {
                let bb = Block::from_u64(8, b);
                assert_eq!(add(&ba, &bb).unwrap(), add(&bb, &ba).unwrap());
            }
        }
    }

    #[test]
    fn inv_trivial_and_known() {
        let f = default_poly(8).unwrap();
        assert_eq!(inv(&Block::one(8), &f).unwrap(), Block::one(8));
        let i2 = inv(&Block::from_u64(8, 0x02), &f).unwrap();
        assert_eq!(i2, Block::from_u64(8, 0x8D));
        assert_eq!(
            mul(&Block::from_u64(8, 0x02), &i2, &f).unwrap(),
            Block::one(8)
        );
    }

    #[test]
    fn inv_zero_errors() {
        let f = default_poly(8).unwrap();
        assert!(matches!(
            inv(&Block::zero(8), &f),
            Err(Error::DivisionByZero)
        ));
    }

    #[test]
    fn inv_ps4_exhaustive_search_agrees() {
        let f = poly4();
        // exhaustive oracle over the 16 elements
        let exhaustive_inv = |a: u64| -> u64 {
            (1..16)
                .find(|&y| {
                    mul(&Block::from_u64(4, a), &Block::from_u64(4, y), &f).unwrap()
                        == Block::one(4)
                })
                .unwrap()
        };
        assert_eq!(exhaustive_inv(0x2), 0x9);
        for a in 1u64..16 {
            assert_eq!(
                inv(&Block::from_u64(4, a), &f).unwrap(),
                Block::from_u64(4, exhaustive_inv(a))
            );
        }
    }

    #[test]
    fn inv_exhaustive_ps8() {
        let f = default_poly(8).unwrap();
        for a in 1u64..256 {
            let ba = Block::from_u64(8, a);
            let ia = inv(&ba, &f).unwrap();
            assert_eq!(mul(&ba, &ia, &f).unwrap(), Block::one(8));
        }
    }

    #[test]
    fn inv_randomized_large_ps() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for ps in [64usize, 128] {
            let f = default_poly(ps).unwrap();
            for _ in 0..50 {
                let mut a = rand_block(ps, &mut rng);
                if a.is_zero() {
                    a = Block::one(ps);
                }
                assert_eq!(mul(&a, &inv(&a, &f).unwrap(), &f).unwrap(), Block::one(ps));
            }
        }
    }

    #[test]
    fn irreducibility_known_cases() {
        assert!(is_irreducible(&default_poly(8).unwrap()));
        assert!(oracle_irreducible(8, 0x1B));
        // x^8 is divisible by x
        assert!(!is_irreducible(&ReductionPoly::new(Block::zero(8))));
        assert!(!oracle_irreducible(8, 0));
        // x^4 + x + 1
        assert!(is_irreducible(&poly4()));
        assert!(oracle_irreducible(4, 0x3));
        // x^8 + x^4 + x^3 + x^2 + 1 is also irreducible; x^8+1 = (x+1)^8 is not
        assert!(is_irreducible(&ReductionPoly::new(Block::from_u64(8, 0x1D))));
        assert!(!is_irreducible(&ReductionPoly::new(Block::from_u64(8, 0x01))));
    }

    #[test]
    fn irreducibility_agrees_with_trial_division_deg8() {
        for low in 0u64..256 {
            let f = ReductionPoly::new(Block::from_u64(8, low));
            assert_eq!(
                is_irreducible(&f),
                oracle_irreducible(8, low),
                "disagreement at low bits {low:#04x}"
            );
        }
    }

    #[test]
    fn shipped_defaults_are_irreducible() {
        for ps in [8usize, 16, 64, 128] {
            assert!(is_irreducible(&default_poly(ps).unwrap()), "ps={ps}");
        }
        assert!(default_poly(1024).is_none());
    }

    #[test]
    fn from_bytes_validates() {
        assert!(Block::from_bytes(8, &[0xAB]).is_ok());
        assert!(Block::from_bytes(8, &[0xAB, 0xCD]).is_err());
        // pad bits must be zero for sub-octet sizes
        assert!(Block::from_bytes(4, &[0x1F]).is_err());
        assert!(Block::from_bytes(4, &[0x0F]).is_ok());
    }
}
