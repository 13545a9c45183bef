//! Linear (s, q)-all-or-nothing transform over GF(2^PS).
//!
//! Forward: y_i = x_i ⊕ x_s for i < s, y_s = x_1 ⊕ … ⊕ x_{s−1} ⊕ λ·x_s.
//! Inverse: x_s = γ·(y_1 ⊕ … ⊕ y_s) with γ = ((s−1) mod 2 ⊕ λ)^{-1}, then
//! x_i = y_i ⊕ x_s. In characteristic 2 the excluded λ values are exactly
//! {0, 1}, so one λ serves every group size.
//!
//! Withholding any single output block leaves every input block uniformly
//! distributed; callers achieve input randomization by appending a fresh
//! random block as x_s.

use crate::counts::OpCounters;
use crate::error::{Error, Result};
use crate::field::{self, Block, ReductionPoly};

fn check_group(blocks: &[Block], lambda: &Block, poly: &ReductionPoly) -> Result<usize> {
    let s = blocks.len();
    if s < 2 {
        return Err(Error::Config(format!(
            "all-or-nothing group needs at least 2 blocks, got {s}"
        )));
    }
    let ps = poly.ps();
    for b in blocks.iter().chain(std::iter::once(lambda)) {
        if b.ps() != ps {
            return Err(Error::SizeMismatch {
                left: b.ps(),
                right: ps,
            });
        }
    }
    if lambda.is_zero() || *lambda == Block::one(ps) {
        return Err(Error::Invariant("lambda must lie outside {0, 1}".into()));
    }
    Ok(s)
}

/// γ = ((s−1) mod 2 ⊕ λ)^{-1}, the scalar that undoes the forward mix.
pub fn gamma(s: usize, lambda: &Block, poly: &ReductionPoly) -> Result<Block> {
    let mut arg = lambda.clone();
    if (s - 1) % 2 == 1 {
        arg = field::add(&arg, &Block::one(lambda.ps()))?;
    }
    field::inv(&arg, poly)
}

/// Forward transform; uses exactly 2(s−1) block XORs and one multiplication.
pub fn aont_forward(
    x: &[Block],
    lambda: &Block,
    poly: &ReductionPoly,
    counters: &mut OpCounters,
) -> Result<Vec<Block>> {
    let s = check_group(x, lambda, poly)?;
    let x_s = &x[s - 1];
    let mut y = Vec::with_capacity(s);
    for xi in &x[..s - 1] {
        let mut b = xi.clone();
        b.xor_in_place(x_s);
        y.push(b);
    }
    counters.add_xors(s as u64 - 1);
    let mut acc = field::mul(lambda, x_s, poly)?;
    counters.add_mults(1);
    for xi in &x[..s - 1] {
        acc.xor_in_place(xi);
    }
    counters.add_xors(s as u64 - 1);
    y.push(acc);
    Ok(y)
}

/// Exact inverse of [`aont_forward`]; the same operation count.
pub fn aont_inverse(
    y: &[Block],
    lambda: &Block,
    poly: &ReductionPoly,
    counters: &mut OpCounters,
) -> Result<Vec<Block>> {
    let s = check_group(y, lambda, poly)?;
    let g = gamma(s, lambda, poly)?;
    let mut tot = y[0].clone();
    for yi in &y[1..] {
        tot.xor_in_place(yi);
    }
    counters.add_xors(s as u64 - 1);
    let x_s = field::mul(&g, &tot, poly)?;
    counters.add_mults(1);
    let mut x = Vec::with_capacity(s);
    for yi in &y[..s - 1] {
        let mut b = yi.clone();
        b.xor_in_place(&x_s);
        x.push(b);
    }
    counters.add_xors(s as u64 - 1);
    x.push(x_s);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn poly4() -> ReductionPoly {
        ReductionPoly::new(Block::from_bytes(4, &[0x03]).unwrap())
    }

    fn b4(v: u64) -> Block {
        Block::from_u64(4, v)
    }

    fn lambda4() -> Block {
        b4(2)
    }

    #[test]
    fn worked_example_gf16() {
        let mut c = OpCounters::default();
        let x = vec![b4(0x1), b4(0x2), b4(0x3)];
        let y = aont_forward(&x, &lambda4(), &poly4(), &mut c).unwrap();
        assert_eq!(y, vec![b4(0x2), b4(0x1), b4(0x5)]);
        let back = aont_inverse(&y, &lambda4(), &poly4(), &mut c).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn zero_maps_to_zero() {
        let mut c = OpCounters::default();
        let x = vec![b4(0); 5];
        let y = aont_forward(&x, &lambda4(), &poly4(), &mut c).unwrap();
        assert!(y.iter().all(Block::is_zero));
        let back = aont_inverse(&y, &lambda4(), &poly4(), &mut c).unwrap();
        assert!(back.iter().all(Block::is_zero));
    }

    #[test]
    fn minimum_group_formulas() {
        // s=2: y_1 = x_1 ⊕ x_2, y_2 = x_1 ⊕ λ·x_2
        let poly = field::default_poly(8).unwrap();
        let lambda = Block::from_u64(8, 2);
        let (x1, x2) = (Block::from_u64(8, 0x5A), Block::from_u64(8, 0x99));
        let mut c = OpCounters::default();
        let y = aont_forward(&[x1.clone(), x2.clone()], &lambda, &poly, &mut c).unwrap();
        assert_eq!(y[0], field::add(&x1, &x2).unwrap());
        let lx2 = field::mul(&lambda, &x2, &poly).unwrap();
        assert_eq!(y[1], field::add(&x1, &lx2).unwrap());
    }

    #[test]
    fn roundtrip_randomized() {
        let poly = field::default_poly(64).unwrap();
        let lambda = Block::from_u64(64, 2);
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        for &s in &[2usize, 3, 8, 32] {
            for _ in 0..250 {
                let x: Vec<Block> = (0..s)
                    .map(|_| crate::rng::random_block(&mut rng, 64))
                    .collect();
                let mut c = OpCounters::default();
                let y = aont_forward(&x, &lambda, &poly, &mut c).unwrap();
                let back = aont_inverse(&y, &lambda, &poly, &mut c).unwrap();
                assert_eq!(back, x, "s={s}");
            }
        }
    }

    #[test]
    fn op_counts_exact() {
        let poly = field::default_poly(64).unwrap();
        let lambda = Block::from_u64(64, 2);
        let mut rng = ChaCha20Rng::seed_from_u64(32);
        for &s in &[2usize, 3, 7, 33] {
            let x: Vec<Block> = (0..s)
                .map(|_| crate::rng::random_block(&mut rng, 64))
                .collect();
            let mut c = OpCounters::default();
            aont_forward(&x, &lambda, &poly, &mut c).unwrap();
            assert_eq!(c.block_xors, 2 * (s as u64 - 1), "s={s}");
            assert_eq!(c.block_mults, 1);

            let mut c = OpCounters::default();
            aont_inverse(&x, &lambda, &poly, &mut c).unwrap();
            assert_eq!(c.block_xors, 2 * (s as u64 - 1));
            assert_eq!(c.block_mults, 1);
        }
    }

    #[test]
    fn all_or_nothing_property_exhaustive_gf16() {
        // For every withheld output index j and every input index i, letting
        // y_j range over the field while the other outputs stay fixed makes
        // x_i take every field value exactly once.
        let (poly, lambda) = (poly4(), lambda4());
        let s = 3;
        let mut c = OpCounters::default();
        for fixed_a in 0..16u64 {
            for fixed_b in 0..16u64 {
                for withheld in 0..s {
                    let mut hits = vec![[false; 16]; s];
                    for guess in 0..16u64 {
                        let mut y = vec![b4(fixed_a), b4(fixed_b)];
                        y.insert(withheld, b4(guess));
                        let x = aont_inverse(&y, &lambda, &poly, &mut c).unwrap();
                        for (i, xi) in x.iter().enumerate() {
                            let v = xi.as_bytes()[0] as usize;
                            assert!(!hits[i][v], "value repeated");
                            hits[i][v] = true;
                        }
                    }
                    for i in 0..s {
                        assert!(hits[i].iter().all(|&h| h));
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_small_groups_and_bad_lambda() {
        let mut c = OpCounters::default();
        assert!(matches!(
            aont_forward(&[b4(1)], &lambda4(), &poly4(), &mut c),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            aont_forward(&[b4(1), b4(2)], &b4(0), &poly4(), &mut c),
            Err(Error::Invariant(_))
        ));
        assert!(matches!(
            aont_forward(&[b4(1), b4(2)], &b4(1), &poly4(), &mut c),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn gamma_inverts_the_mix_scalar() {
        let (poly, lambda) = (poly4(), lambda4());
        for s in 2..6 {
            let g = gamma(s, &lambda, &poly).unwrap();
            let mut arg = lambda.clone();
            if (s - 1) % 2 == 1 {
                arg = field::add(&arg, &Block::one(4)).unwrap();
            }
            assert_eq!(field::mul(&g, &arg, &poly).unwrap(), Block::one(4));
        }
    }
}
