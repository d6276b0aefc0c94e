//! Deciding whether a bundle on `P^{n|m}` is a sum of line bundles.
//!
//! For `n ≥ 2` a bundle splits exactly when its intermediate Rao modules
//! vanish. The pipeline checks that, reads the splitting type off the h⁰
//! tables of the reduced bundle, and then produces an explicit isomorphism
//! to the split model by lifting a reduced isomorphism to a global section
//! of `Hom(F, E)`.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cohomology::{cech_cohomology, exponent_vectors, split_cohomology, RaoTable};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::sheaf::{binomial, Bundle, SplitBundle, TransitionBundle};
use crate::supermodule::{FreeSupermodule, MatrixJson, Parity, SuperDim, SuperMatrix};
use crate::superring::{q, Monomial, SuperPoly};

/// Fixed seed for the reduced-isomorphism search.
pub const DEFAULT_SEED: u64 = 0x5eed;
/// Random combinations tried before giving up on a lift.
pub const LIFT_RETRIES: usize = 32;

/// Twist window used for the Horrocks check and the h⁰ tables:
/// `M + n + m + 2` with `M` the largest exponent or frame twist.
pub fn horrocks_radius(bundle: &Bundle) -> i64 {
    let s = bundle.space();
    let m = match bundle {
        Bundle::Split(sb) => sb.module.twists().map(i64::abs).max().unwrap_or(0),
        Bundle::Transition(t) => t.complexity(),
    };
    m + (s.n + s.m) as i64 + 2
}

/// Outcome of the Horrocks check.
#[derive(Clone, Debug, PartialEq)]
pub struct HorrocksReport {
    /// `n = 1`: the range `1 ≤ i ≤ n-1` is empty.
    pub vacuous: bool,
    pub tables: Vec<RaoTable>,
    /// First nonzero entry `(i, t, h^i(E(t)))`.
    pub witness: Option<(usize, i64, SuperDim)>,
}

impl HorrocksReport {
    pub fn vanishes(&self) -> bool {
        self.witness.is_none()
    }
}

/// `H^i_*(E)` for `1 ≤ i ≤ n-1` over `window` (default `±horrocks_radius`).
pub fn horrocks_check(bundle: &Bundle, window: Option<(i64, i64)>) -> Result<HorrocksReport> {
    let n = bundle.space().n;
    let r = horrocks_radius(bundle);
    let (lo, hi) = window.unwrap_or((-r, r));
    let mut tables = Vec::new();
    let mut witness = None;
    for i in 1..n {
        let tab = crate::cohomology::rao_table(bundle, i, lo, hi)?;
        if witness.is_none() {
            witness = tab
                .entries
                .iter()
                .find(|(_, d)| !d.is_zero())
                .map(|(&t, &d)| (i, t, d));
        }
        tables.push(tab);
    }
    Ok(HorrocksReport {
        vacuous: n < 2,
        tables,
        witness,
    })
}

/// Line-bundle twists reproducing a table of one parity:
/// `h(t) = Σ_i C(n + t + a_i, n)`.
fn peel_one(table: &BTreeMap<i64, u64>, n: usize) -> Result<Vec<i64>> {
    let mut residual: BTreeMap<i64, i64> = table.iter().map(|(&t, &h)| (t, h as i64)).collect();
    let mut twists = Vec::new();
    loop {
        if let Some((&t, &h)) = residual.iter().find(|(_, &h)| h < 0) {
            return Err(Error::NegativeResidual { twist: t, residual: h });
        }
        let Some((&t0, &k)) = residual.iter().find(|(_, &h)| h > 0) else {
            break;
        };
        twists.extend(std::iter::repeat_n(-t0, k as usize));
        for (&t, h) in residual.iter_mut() {
            if t >= t0 {
                *h -= k * binomial((n as i64 + t - t0) as u64, n as u64) as i64;
            }
        }
    }
    twists.sort_unstable_by(|a, b| b.cmp(a));
    Ok(twists)
}

/// Splitting type `(even twists; odd twists)`, each sorted decreasingly,
/// from the h⁰ table of a sum of line bundles on `P^n`.
pub fn peel_splitting_type(
    h0: &BTreeMap<i64, SuperDim>,
    n: usize,
) -> Result<(Vec<i64>, Vec<i64>)> {
    let even = h0.iter().map(|(&t, d)| (t, d.even)).collect();
    let odd = h0.iter().map(|(&t, d)| (t, d.odd)).collect();
    Ok((peel_one(&even, n)?, peel_one(&odd, n)?))
}

/// h⁰ table of a reduced bundle given as a transition bundle on `P^n`.
pub fn reduced_h0_table(
    bundle: &TransitionBundle,
    lo: i64,
    hi: i64,
) -> Result<BTreeMap<i64, SuperDim>> {
    let red = bundle.reduce();
    (lo..=hi)
        .map(|t| Ok((t, crate::cohomology::global_sections(&red, t)?.dim())))
        .collect()
}

/// Transport of a chart-0 morphism `ψ_0 : F → E` to chart `i`:
/// `ψ_i = g_i0 ψ_0 ĝ_0i`.
fn transport(
    e: &TransitionBundle,
    f: &TransitionBundle,
    psi0: &SuperMatrix,
    i: usize,
) -> Result<SuperMatrix> {
    e.transition(i, 0)?.compose(psi0)?.compose(&f.transition(0, i)?)
}

/// Basis of the even, degree-0 global morphisms `F → E`, as chart-0
/// matrices.
pub fn global_homs(e: &TransitionBundle, f: &TransitionBundle) -> Result<Vec<SuperMatrix>> {
    if e.space() != f.space() {
        return Err(Error::Shape(format!("bundles on {} and {}", e.space(), f.space())));
    }
    let space = e.space();
    let nv = space.nvars();
    let (ef, ff) = (e.frame().clone(), f.frame().clone());
    let bound = (1..nv)
        .map(|i| {
            Ok(e.transitions()[&(0, i)].pole_in(0) + f.transition(i, 0)?.pole_in(0))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0)
        .max(0);
    let mut lower = vec![0i32; nv];
    lower[0] = -bound;
    let left: Vec<SuperMatrix> = (1..nv).map(|i| e.transition(i, 0)).collect::<Result<_>>()?;
    let right: Vec<SuperMatrix> = (1..nv).map(|i| f.transition(0, i)).collect::<Result<_>>()?;

    let mut unknowns: Vec<(usize, usize, Monomial)> = Vec::new();
    for r in 0..ef.len() {
        for c in 0..ff.len() {
            let parity = (ef.parity(r) + ff.parity(c)) % 2;
            let degree = ef.twist(r) - ff.twist(c);
            for mask in 0u32..(1 << space.m) {
                let odd = mask.count_ones();
                if (odd % 2) as u8 != parity {
                    continue;
                }
                for x in exponent_vectors(&lower, degree - odd as i64) {
                    unknowns.push((r, c, Monomial::from_parts(&x, mask)));
                }
            }
        }
    }
    let mut rows: HashMap<(usize, usize, usize, Monomial), usize> = HashMap::new();
    let mut cols = Vec::with_capacity(unknowns.len());
    for (r, c, mono) in &unknowns {
        let mut col = Vec::new();
        for (k, (g, h)) in left.iter().zip(&right).enumerate() {
            let chart = k + 1;
            for rr in 0..g.rows() {
                let gu = g.entry(rr, *r).mul_monomial(mono, &q(1));
                if gu.is_zero() {
                    continue;
                }
                for cc in 0..h.cols() {
                    let prod = gu.mul(h.entry(*c, cc));
                    for (mm, v) in prod.terms() {
                        if mm.xexp().iter().enumerate().any(|(x, &p)| x != chart && p < 0) {
                            let next = rows.len();
                            let idx = *rows.entry((chart, rr, cc, mm.clone())).or_insert(next);
                            col.push((idx, v.clone()));
                        }
                    }
                }
            }
        }
        cols.push(col);
    }
    let mut m = SparseMatrix::new(rows.len());
    for c in cols {
        m.push_col(c);
    }
    m.kernel()
        .into_iter()
        .map(|v| {
            let mut entries = vec![vec![SuperPoly::zero(); ff.len()]; ef.len()];
            for (idx, val) in v {
                let (r, c, mono) = &unknowns[idx];
                entries[*r][*c].add_term(mono.clone(), val);
            }
            SuperMatrix::new(ff.clone(), ef.clone(), entries, Parity::Even)
        })
        .collect()
}

/// Why a lift could not be produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    /// Even degree-0 part of `H^0(Hom(F, E))`, and its full superdimension.
    pub even_homs: usize,
    pub hom: SuperDim,
    /// `H^0(Hom(F_red, E_red))` on `P^n`.
    pub reduced_hom: SuperDim,
    /// `H^1(Hom(F, E))`, which contains the obstruction classes.
    pub h1_hom: SuperDim,
    pub attempts: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LiftOutcome {
    /// Chart isomorphisms `φ_i : E → F` with `φ_i g_ij = ĝ_ij φ_j`.
    Lifted(Vec<SuperMatrix>),
    Obstructed(ObstructionReport),
}

/// Checks `φ_i g_ij = ĝ_ij φ_j` on every overlap and invertibility on every
/// chart.
pub fn verify_isomorphism(
    e: &TransitionBundle,
    f: &TransitionBundle,
    phi: &[SuperMatrix],
) -> Result<bool> {
    let nv = e.space().nvars();
    if phi.len() != nv {
        return Ok(false);
    }
    for (i, p) in phi.iter().enumerate() {
        if p.source() != e.frame() || p.target() != f.frame() {
            return Ok(false);
        }
        if !p.is_invertible_localized(&[i])? {
            return Ok(false);
        }
        let regular = p.entries().iter().flatten().all(|x| {
            x.terms()
                .all(|(m, _)| m.xexp().iter().enumerate().all(|(v, &k)| k >= 0 || v == i))
        });
        if !regular {
            return Ok(false);
        }
    }
    for (&(i, j), g) in e.transitions() {
        let lhs = phi[i].compose(g)?;
        let rhs = f.transitions()[&(i, j)].compose(&phi[j])?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lifts an isomorphism `F_red ≅ E_red` to `F ≅ E`.
pub fn lift_isomorphism(e: &TransitionBundle, f: &SplitBundle, seed: u64) -> Result<LiftOutcome> {
    let space = e.space();
    if f.space != space {
        return Err(Error::Shape(format!("bundles on {space} and {}", f.space)));
    }
    let r = horrocks_radius(&Bundle::Transition(e.clone()))
        .max(horrocks_radius(&Bundle::Split(f.clone())));
    let table = reduced_h0_table(e, -r, r)?;
    let split_table: BTreeMap<i64, SuperDim> = (-r..=r)
        .map(|t| (t, split_cohomology(space.reduced(), &f.module, t, 0)))
        .collect();
    if table != split_table || e.rank() != f.rank() {
        return Err(Error::ReducedMismatch(format!(
            "reduced bundle does not have splitting type {}",
            f.module
        )));
    }
    let fm = f.to_transition();
    let homs = global_homs(e, &fm)?;
    let nv = space.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if !homs.is_empty() || e.frame().is_empty() {
        for _ in 0..LIFT_RETRIES {
            let mut psi0 = SuperMatrix::zero(fm.frame(), e.frame(), Parity::Even);
            for h in &homs {
                let c = rng.gen_range(-50i64..=50);
                if c != 0 {
                    psi0 = psi0.add(&h.scale(&q(c)))?;
                }
            }
            let psi = (0..nv)
                .map(|i| transport(e, &fm, &psi0, i))
                .collect::<Result<Vec<_>>>()?;
            let mut ok = true;
            for (i, p) in psi.iter().enumerate() {
                if !p.is_invertible_localized(&[i])? {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let phi = psi
                .iter()
                .map(SuperMatrix::invert)
                .collect::<Result<Vec<_>>>()?;
            if verify_isomorphism(e, &fm, &phi)? {
                return Ok(LiftOutcome::Lifted(phi));
            }
        }
    }
    let fb = Bundle::Split(f.clone());
    let eb = Bundle::Transition(e.clone());
    Ok(LiftOutcome::Obstructed(ObstructionReport {
        even_homs: homs.len(),
        hom: crate::cohomology::hom_superdim(&fb, &eb, 0)?,
        reduced_hom: crate::cohomology::hom_superdim(&fb.reduce(), &eb.reduce(), 0)?,
        h1_hom: crate::cohomology::hom_superdim(&fb, &eb, 1)?,
        attempts: LIFT_RETRIES,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Splits,
    NotSplit,
    Inconclusive,
}

/// Independently recheckable reason for a `NOT_SPLIT` verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `h^i(E(t)) ≠ 0` for some `1 ≤ i ≤ n-1`.
    Rao { i: usize, t: i64, dim: SuperDim },
    /// `Hom(E, E)` differs from `Hom(F, F)` of the only possible split model.
    HomDimension {
        bundle: SuperDim,
        split_model: SuperDim,
        even: Vec<i64>,
        odd: Vec<i64>,
    },
}

impl std::fmt::Display for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Witness::Rao { i, t, dim } => write!(f, "h^{i}(E({t})) = {dim} ≠ 0"),
            Witness::HomDimension {
                bundle,
                split_model,
                even,
                odd,
            } => write!(
                f,
                "Hom dims {bundle} ≠ {split_model} of the split model {}",
                FreeSupermodule::new(even.clone(), odd.clone())
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitCertificate {
    pub verdict: Verdict,
    pub even: Vec<i64>,
    pub odd: Vec<i64>,
    /// Chart isomorphisms `E → F` when the bundle splits.
    pub iso: Option<Vec<SuperMatrix>>,
    pub witness: Option<Witness>,
    pub obstruction: Option<ObstructionReport>,
}

#[derive(Serialize)]
struct CertificateJson {
    verdict: Verdict,
    even: Vec<i64>,
    odd: Vec<i64>,
    iso: Option<BTreeMap<String, MatrixJson>>,
    witness: Option<Witness>,
}

impl SplitCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CertificateJson {
            verdict: self.verdict,
            even: self.even.clone(),
            odd: self.odd.clone(),
            iso: self.iso.as_ref().map(|phi| {
                phi.iter()
                    .enumerate()
                    .map(|(i, m)| (i.to_string(), m.to_json()))
                    .collect()
            }),
            witness: self.witness.clone(),
        })
        .expect("certificate serializes")
    }
}

/// Full splitting pipeline for a transition bundle.
pub fn split_certify(e: &TransitionBundle, seed: u64) -> Result<SplitCertificate> {
    let space = e.space();
    if e.frame().is_empty() {
        return Ok(SplitCertificate {
            verdict: Verdict::Splits,
            even: Vec::new(),
            odd: Vec::new(),
            iso: Some(vec![
                SuperMatrix::zero(e.frame(), e.frame(), Parity::Even);
                space.nvars()
            ]),
            witness: None,
            obstruction: None,
        });
    }
    let eb = Bundle::Transition(e.clone());
    if space.n >= 2 {
        let report = horrocks_check(&eb, None)?;
        if let Some((i, t, dim)) = report.witness {
            return Ok(SplitCertificate {
                verdict: Verdict::NotSplit,
                even: Vec::new(),
                odd: Vec::new(),
                iso: None,
                witness: Some(Witness::Rao { i, t, dim }),
                obstruction: None,
            });
        }
    }
    let r = horrocks_radius(&eb);
    let (even, odd) = peel_splitting_type(&reduced_h0_table(e, -r, r)?, space.n)?;
    let f = SplitBundle::new(space, even.clone(), odd.clone());
    if f.rank() != e.rank() {
        return Err(Error::ReducedMismatch(format!(
            "peeled type {} has rank {} but the bundle has rank {}",
            f.module,
            f.rank(),
            e.rank()
        )));
    }
    match lift_isomorphism(e, &f, seed)? {
        LiftOutcome::Lifted(phi) => Ok(SplitCertificate {
            verdict: Verdict::Splits,
            even,
            odd,
            iso: Some(phi),
            witness: None,
            obstruction: None,
        }),
        LiftOutcome::Obstructed(report) => {
            let hom_e = crate::cohomology::hom_superdim(&eb, &eb, 0)?;
            let fb = Bundle::Split(f.clone());
            let hom_f = crate::cohomology::hom_superdim(&fb, &fb, 0)?;
            let (verdict, witness) = if hom_e != hom_f {
                (
                    Verdict::NotSplit,
                    Some(Witness::HomDimension {
                        bundle: hom_e,
                        split_model: hom_f,
                        even: even.clone(),
                        odd: odd.clone(),
                    }),
                )
            } else {
                (Verdict::Inconclusive, None)
            };
            Ok(SplitCertificate {
                verdict,
                even,
                odd,
                iso: None,
                witness,
                obstruction: Some(report),
            })
        }
    }
}

/// Recomputes a witness through an independent path: Rao entries via
/// [`cech_cohomology`], Hom dimensions via the closed form of the split
/// model and the Čech path for the bundle.
pub fn recheck_witness(e: &TransitionBundle, w: &Witness) -> Result<bool> {
    Ok(match w {
        Witness::Rao { i, t, dim } => {
            let d = cech_cohomology(e, *t, *i, None)?;
            d == *dim && !d.is_zero()
        }
        Witness::HomDimension {
            bundle,
            split_model,
            even,
            odd,
        } => {
            let space = e.space();
            let model = FreeSupermodule::new(even.clone(), odd.clone());
            let mut closed = SuperDim::default();
            for (k, a) in model.twists().enumerate() {
                let d = split_cohomology(space, &model, -a, 0);
                closed = closed + if model.parity(k) == 1 { d.swap() } else { d };
            }
            let eb = Bundle::Transition(e.clone());
            let direct = crate::cohomology::hom_superdim(&eb, &eb, 0)?;
            closed == *split_model && direct == *bundle && closed != direct
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::dressed_split;
    use crate::sheaf::{euler_tangent, make_split};
    use crate::superring::SuperSpaceSig;

    fn sig(n: usize, m: usize) -> SuperSpaceSig {
        SuperSpaceSig::new(n, m).unwrap()
    }

    fn table(n: usize, twists: &[i64], lo: i64, hi: i64) -> BTreeMap<i64, SuperDim> {
        (lo..=hi)
            .map(|t| {
                let h: u64 = twists
                    .iter()
                    .map(|a| {
                        let top = n as i64 + t + a;
                        if top < 0 { 0 } else { binomial(top as u64, n as u64) }
                    })
                    .sum();
                (t, SuperDim::new(h, 0))
            })
            .collect()
    }

    #[test]
    fn peel_recovers_line_bundle_sums() {
        let t = table(2, &[0, -2], -6, 6);
        assert_eq!(peel_splitting_type(&t, 2).unwrap(), (vec![0, -2], vec![]));
        let zero: BTreeMap<i64, SuperDim> = (-3..=3).map(|t| (t, SuperDim::default())).collect();
        assert_eq!(peel_splitting_type(&zero, 2).unwrap(), (vec![], vec![]));
    }

    #[test]
    fn peel_rejects_impossible_tables() {
        let mut t = table(2, &[1], -4, 4);
        t.insert(1, SuperDim::new(2, 0));
        assert!(matches!(
            peel_splitting_type(&t, 2),
            Err(Error::NegativeResidual { .. })
        ));
    }

    #[test]
    fn split_model_lifts_to_identity_up_to_scale() {
        let s = sig(1, 1);
        let e = make_split(s, &[1], &[0]);
        let f = SplitBundle::new(s, vec![1], vec![0]);
        match lift_isomorphism(&e, &f, DEFAULT_SEED).unwrap() {
            LiftOutcome::Lifted(phi) => {
                assert!(verify_isomorphism(&e, &f.to_transition(), &phi).unwrap())
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dressed_bundle_on_p21_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = sig(2, 1);
        let (e, _) = dressed_split(&mut rng, s, &[1, 0], &[-1]).unwrap();
        let cert = split_certify(&e, DEFAULT_SEED).unwrap();
        assert_eq!(cert.verdict, Verdict::Splits);
        assert_eq!((cert.even.clone(), cert.odd.clone()), (vec![1, 0], vec![-1]));
        let f = make_split(s, &cert.even, &cert.odd);
        assert!(verify_isomorphism(&e, &f, cert.iso.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn tangent_of_p11_does_not_split() {
        let t = euler_tangent(sig(1, 1)).unwrap();
        let cert = split_certify(&t, DEFAULT_SEED).unwrap();
        assert_eq!(cert.verdict, Verdict::NotSplit);
        assert_eq!((cert.even.clone(), cert.odd.clone()), (vec![2], vec![1]));
        let w = cert.witness.unwrap();
        assert!(recheck_witness(&t, &w).unwrap());
    }

    #[test]
    fn tangent_of_p21_fails_horrocks() {
        let t = euler_tangent(sig(2, 1)).unwrap();
        // Euler sequence: H^1(T(-2)) = ker(H^2(O(-2)) → H^2(O(-1))^{3|1}) = 0|1
        let rep = horrocks_check(&Bundle::Transition(t), Some((-4, 0))).unwrap();
        assert_eq!(rep.witness, Some((1, -2, SuperDim::new(0, 1))));
    }

    #[test]
    fn zero_rank_splits_trivially() {
        let e = make_split(sig(2, 1), &[], &[]);
        let cert = split_certify(&e, DEFAULT_SEED).unwrap();
        assert_eq!(cert.verdict, Verdict::Splits);
        assert!(cert.even.is_empty() && cert.odd.is_empty());
        let js = cert.to_json();
        assert_eq!(js["verdict"], "SPLITS");
    }

    #[test]
    fn horrocks_on_p1_is_vacuous() {
        let t = euler_tangent(sig(1, 1)).unwrap();
        let rep = horrocks_check(&Bundle::Transition(t), None).unwrap();
        assert!(rep.vacuous && rep.tables.is_empty() && rep.vanishes());
    }
}
