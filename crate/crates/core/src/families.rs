//! Seeded families of bundles isomorphic to split ones: a split model whose
//! transitions are conjugated by chart automorphisms `h_i = 1 + ν_i` with
//! `ν_i` nilpotent (θ-content at least one).

use rand::Rng;

use crate::error::Result;
use crate::sheaf::{make_split, TransitionBundle};
use crate::supermodule::{FreeSupermodule, Parity, SuperMatrix};
use crate::superring::{q, Monomial, SuperPoly, SuperSpaceSig};

/// Random degree-0 element regular on `D(x_chart)`, of the given parity,
/// with every term divisible by some θ. Zero when `m` allows no such term.
pub fn random_nilpotent<R: Rng>(
    rng: &mut R,
    space: SuperSpaceSig,
    chart: usize,
    parity: u8,
    terms: usize,
) -> SuperPoly {
    let nv = space.nvars();
    let masks: Vec<u32> = (1u32..(1 << space.m))
        .filter(|mk| (mk.count_ones() % 2) as u8 == parity)
        .collect();
    let mut out = SuperPoly::zero();
    if masks.is_empty() {
        return out;
    }
    for _ in 0..terms {
        let mask = masks[rng.gen_range(0..masks.len())];
        let mut e = vec![0i32; nv];
        let extra = rng.gen_range(0..=1);
        for _ in 0..extra {
            let v = rng.gen_range(0..nv);
            e[v] += 1;
        }
        e[chart] -= mask.count_ones() as i32 + extra;
        let c = loop {
            let c = rng.gen_range(-3i64..=3);
            if c != 0 {
                break c;
            }
        };
        out.add_term(Monomial::from_parts(&e, mask), q(c));
    }
    out
}

/// `1 + ν` on the frame, regular and invertible on `D(x_chart)`.
pub fn random_unipotent<R: Rng>(
    rng: &mut R,
    space: SuperSpaceSig,
    frame: &FreeSupermodule,
    chart: usize,
) -> Result<SuperMatrix> {
    let n = frame.len();
    let nv = space.nvars();
    let entries = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let parity = (frame.parity(r) + frame.parity(c)) % 2;
                    let mut e = if rng.gen_bool(0.7) {
                        random_nilpotent(rng, space, chart, parity, 2)
                    } else {
                        SuperPoly::zero()
                    };
                    if r == c {
                        e = &e + &SuperPoly::one(nv);
                    }
                    e
                })
                .collect()
        })
        .collect();
    SuperMatrix::new(frame.clone(), frame.clone(), entries, Parity::Even)
}

/// `make_split(even; odd)` dressed by random chart automorphisms; returns
/// the bundle and the automorphisms used.
pub fn dressed_split<R: Rng>(
    rng: &mut R,
    space: SuperSpaceSig,
    even: &[i64],
    odd: &[i64],
) -> Result<(TransitionBundle, Vec<SuperMatrix>)> {
    let split = make_split(space, even, odd);
    let charts = (0..space.nvars())
        .map(|i| random_unipotent(rng, space, split.frame(), i))
        .collect::<Result<Vec<_>>>()?;
    Ok((split.gauge_transform(&charts)?, charts))
}

/// Random twist lists with `even.len() ≤ max_even`, `odd.len() ≤ max_odd`
/// and twists in `[-bound, bound]`.
pub fn random_type<R: Rng>(
    rng: &mut R,
    max_even: usize,
    max_odd: usize,
    bound: i64,
) -> (Vec<i64>, Vec<i64>) {
    let pe = rng.gen_range(0..=max_even);
    let po = rng.gen_range(0..=max_odd);
    let even = (0..pe).map(|_| rng.gen_range(-bound..=bound)).collect();
    let odd = (0..po).map(|_| rng.gen_range(-bound..=bound)).collect();
    (even, odd)
}
