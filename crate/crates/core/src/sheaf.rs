//! Supervector bundles on `P^{n|m}`.
//!
//! A [`TransitionBundle`] is a Čech presentation on the standard cover
//! `D(x_0), …, D(x_n)`: one local frame `F` shared by every chart and even,
//! degree-0 transition matrices `g_ij : F → F` for `i < j`, regular on
//! `D(x_i x_j)`. Coordinates of a section over chart `j` are turned into
//! coordinates over chart `i` by `s_i = g_ij s_j`, so the cocycle condition
//! reads `g_ij g_jk = g_ik`.
//!
//! Sections of `E(t)` over a chart are frame coordinates whose `r`-th entry
//! is homogeneous of degree `twist_F(r) + t`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::supermodule::{FreeSupermodule, MatrixJson, Parity, SuperDim, SuperMatrix};
use crate::superring::{q, Monomial, SuperPoly, SuperSpaceSig};

/// `⊕O(a_i) ⊕ Π⊕O(b_j)` on `P^{n|m}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitBundle {
    pub space: SuperSpaceSig,
    pub module: FreeSupermodule,
}

impl SplitBundle {
    pub fn new(space: SuperSpaceSig, even: Vec<i64>, odd: Vec<i64>) -> Self {
        Self {
            space,
            module: FreeSupermodule::new(even, odd),
        }
    }

    pub fn rank(&self) -> SuperDim {
        self.module.rank()
    }

    pub fn twisted(&self, t: i64) -> Self {
        Self {
            space: self.space,
            module: self.module.twisted(t),
        }
    }

    pub fn pi(&self) -> Self {
        Self {
            space: self.space,
            module: self.module.pi(),
        }
    }

    pub fn dual(&self) -> Self {
        Self {
            space: self.space,
            module: self.module.dual(),
        }
    }

    pub fn reduced(&self) -> Self {
        Self {
            space: self.space.reduced(),
            module: self.module.clone(),
        }
    }

    pub fn to_transition(&self) -> TransitionBundle {
        make_split(self.space, &self.module.even, &self.module.odd)
    }
}

/// Čech presentation of a locally free sheaf.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionBundle {
    space: SuperSpaceSig,
    frame: FreeSupermodule,
    transitions: BTreeMap<(usize, usize), SuperMatrix>,
}

/// First failing cocycle triple.
#[derive(Clone, Debug, PartialEq)]
pub struct CocycleFailure {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// `g_ij g_jk - g_ik`
    pub residual: SuperMatrix,
}

impl From<CocycleFailure> for Error {
    fn from(f: CocycleFailure) -> Self {
        Error::Cocycle {
            i: f.i,
            j: f.j,
            k: f.k,
        }
    }
}

impl TransitionBundle {
    /// Checks the shape, grading and support of every transition. The cocycle
    /// condition is checked separately by [`TransitionBundle::cocycle_check`].
    pub fn new(
        space: SuperSpaceSig,
        frame: FreeSupermodule,
        transitions: BTreeMap<(usize, usize), SuperMatrix>,
    ) -> Result<Self> {
        let nvars = space.nvars();
        for i in 0..nvars {
            for j in (i + 1)..nvars {
                let g = transitions.get(&(i, j)).ok_or_else(|| {
                    Error::Invalid(format!("missing transition ({i},{j})"))
                })?;
                if g.source() != &frame || g.target() != &frame {
                    return Err(Error::Shape(format!(
                        "transition ({i},{j}) is not an endomorphism of the frame {frame}"
                    )));
                }
                if g.parity() != Parity::Even {
                    return Err(Error::Invalid(format!("transition ({i},{j}) is odd")));
                }
                for e in g.entries().iter().flatten() {
                    for (m, _) in e.terms() {
                        if m.nvars() != nvars {
                            return Err(Error::Invalid(format!(
                                "transition ({i},{j}) uses {} even variables on {space}",
                                m.nvars()
                            )));
                        }
                        if m.odd_indices().iter().any(|&k| k > space.m) {
                            return Err(Error::Invalid(format!(
                                "transition ({i},{j}) uses an odd variable beyond θ_{}",
                                space.m
                            )));
                        }
                        if m
                            .xexp()
                            .iter()
                            .enumerate()
                            .any(|(v, &e)| e < 0 && v != i && v != j)
                        {
                            return Err(Error::Invalid(format!(
                                "transition ({i},{j}) is not regular on D(x{i} x{j})"
                            )));
                        }
                    }
                }
                if !g.is_invertible_localized(&[i, j])? {
                    return Err(Error::Invalid(format!(
                        "transition ({i},{j}) is not invertible on D(x{i} x{j})"
                    )));
                }
            }
        }
        if transitions.keys().any(|&(i, j)| i >= j || j >= nvars) {
            return Err(Error::Invalid("transition keys must be (i,j) with i<j≤n".into()));
        }
        Ok(Self {
            space,
            frame,
            transitions,
        })
    }

    pub(crate) fn from_raw(
        space: SuperSpaceSig,
        frame: FreeSupermodule,
        transitions: BTreeMap<(usize, usize), SuperMatrix>,
    ) -> Self {
        Self {
            space,
            frame,
            transitions,
        }
    }

    pub fn space(&self) -> SuperSpaceSig {
        self.space
    }

    pub fn frame(&self) -> &FreeSupermodule {
        &self.frame
    }

    pub fn rank(&self) -> SuperDim {
        self.frame.rank()
    }

    pub fn transitions(&self) -> &BTreeMap<(usize, usize), SuperMatrix> {
        &self.transitions
    }

    /// `g_ij` for any pair of charts; `g_ii = 1`, `g_ji = g_ij⁻¹`.
    pub fn transition(&self, i: usize, j: usize) -> Result<SuperMatrix> {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => Ok(SuperMatrix::identity(&self.frame, self.space.nvars())),
            Less => Ok(self.transitions[&(i, j)].clone()),
            Greater => self.transitions[&(j, i)].invert(),
        }
    }

    fn map_transitions(
        &self,
        frame: FreeSupermodule,
        space: SuperSpaceSig,
        f: impl Fn(&SuperMatrix) -> Result<SuperMatrix>,
    ) -> Result<Self> {
        let transitions = self
            .transitions
            .iter()
            .map(|(k, g)| Ok((*k, f(g)?)))
            .collect::<Result<_>>()?;
        Ok(Self::from_raw(space, frame, transitions))
    }

    /// Verifies `g_ij g_jk = g_ik` on every triple overlap.
    pub fn cocycle_check(&self) -> std::result::Result<(), CocycleFailure> {
        let n = self.space.nvars();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let gij = &self.transitions[&(i, j)];
                    let gjk = &self.transitions[&(j, k)];
                    let gik = &self.transitions[&(i, k)];
                    let prod = gij.compose(gjk).expect("frame endomorphisms compose");
                    let residual = prod
                        .add(&gik.scale(&q(-1)))
                        .expect("frame endomorphisms add");
                    if !residual.is_zero() {
                        return Err(CocycleFailure { i, j, k, residual });
                    }
                }
            }
        }
        Ok(())
    }

    /// `E_red` on `P^{n|0}`: every θ set to zero.
    pub fn reduce(&self) -> Self {
        self.map_transitions(self.frame.clone(), self.space.reduced(), |g| {
            Ok(g.bosonic_reduce())
        })
        .expect("reduction cannot fail")
    }

    /// `E^∨` with transitions `st(g_ij⁻¹)`.
    pub fn dual(&self) -> Result<Self> {
        self.map_transitions(self.frame.dual(), self.space, |g| g.invert()?.dual())
    }

    pub fn tensor(&self, other: &TransitionBundle) -> Result<Self> {
        self.same_space(other)?;
        let frame = self.frame.tensor(&other.frame);
        let transitions = self
            .transitions
            .iter()
            .map(|(k, g)| Ok((*k, g.tensor(&other.transitions[k])?)))
            .collect::<Result<_>>()?;
        Ok(Self::from_raw(self.space, frame, transitions))
    }

    pub fn direct_sum(&self, other: &TransitionBundle) -> Result<Self> {
        self.same_space(other)?;
        let frame = self.frame.direct_sum(&other.frame);
        let transitions = self
            .transitions
            .iter()
            .map(|(k, g)| Ok((*k, g.direct_sum(&other.transitions[k])?)))
            .collect::<Result<_>>()?;
        Ok(Self::from_raw(self.space, frame, transitions))
    }

    /// `E(t)`: same transitions over the shifted frame.
    pub fn twist(&self, t: i64) -> Self {
        self.map_transitions(self.frame.twisted(t), self.space, |g| Ok(g.twist(t)))
            .expect("twisting cannot fail")
    }

    /// `ΠE`.
    pub fn pi(&self) -> Self {
        self.map_transitions(self.frame.pi(), self.space, |g| Ok(g.parity_shift()))
            .expect("parity shift cannot fail")
    }

    /// Bundle with transitions `h_i g_ij h_j⁻¹`, isomorphic to `self` through
    /// the chart automorphisms `h_i` (each regular and invertible on `D(x_i)`).
    pub fn gauge_transform(&self, charts: &[SuperMatrix]) -> Result<Self> {
        let n = self.space.nvars();
        if charts.len() != n {
            return Err(Error::Shape(format!(
                "{} chart automorphisms for {n} charts",
                charts.len()
            )));
        }
        for (i, h) in charts.iter().enumerate() {
            if h.source() != &self.frame || h.target() != &self.frame {
                return Err(Error::Shape(format!("chart map {i} is not a frame endomorphism")));
            }
            if !h.is_invertible_localized(&[i])? {
                return Err(Error::NotInvertible);
            }
        }
        let inverses = charts
            .iter()
            .map(SuperMatrix::invert)
            .collect::<Result<Vec<_>>>()?;
        let transitions = self
            .transitions
            .iter()
            .map(|(&(i, j), g)| Ok(((i, j), charts[i].compose(g)?.compose(&inverses[j])?)))
            .collect::<Result<_>>()?;
        Ok(Self::from_raw(self.space, self.frame.clone(), transitions))
    }

    fn same_space(&self, other: &TransitionBundle) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Shape(format!(
                "bundles live on {} and {}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    /// Largest pole order of any transition entry.
    pub fn max_pole(&self) -> i32 {
        self.transitions
            .values()
            .map(SuperMatrix::max_pole)
            .max()
            .unwrap_or(0)
    }

    /// `max |exponent|` over transition entries together with `max |twist|`
    /// of the frame.
    pub fn complexity(&self) -> i64 {
        let ent = self
            .transitions
            .values()
            .map(|g| g.max_abs_exponent() as i64)
            .max()
            .unwrap_or(0);
        let fr = self.frame.twists().map(i64::abs).max().unwrap_or(0);
        ent.max(fr)
    }

    pub fn to_json(&self) -> BundleJson {
        BundleJson {
            space: self.space,
            kind: BundleKind::Transition,
            even: None,
            odd: None,
            frame: Some(self.frame.clone()),
            transitions: Some(
                self.transitions
                    .iter()
                    .map(|(&(i, j), g)| (format!("{i},{j}"), g.to_json()))
                    .collect(),
            ),
        }
    }
}

/// `⊕O(a_i) ⊕ Π⊕O(b_j)` as a transition bundle over the zero frame with
/// `g_ij = diag((x_j/x_i)^{twist})`.
pub fn make_split(space: SuperSpaceSig, even: &[i64], odd: &[i64]) -> TransitionBundle {
    let nv = space.nvars();
    let frame = FreeSupermodule::new(vec![0; even.len()], vec![0; odd.len()]);
    let mut transitions = BTreeMap::new();
    for i in 0..nv {
        for j in (i + 1)..nv {
            let diag = even
                .iter()
                .chain(odd)
                .map(|&a| {
                    let mut e = vec![0i32; nv];
                    e[j] += a as i32;
                    e[i] -= a as i32;
                    SuperPoly::laurent(q(1), &e)
                })
                .collect();
            transitions.insert(
                (i, j),
                SuperMatrix::diagonal(&frame, diag).expect("diagonal is homogeneous"),
            );
        }
    }
    TransitionBundle::from_raw(space, frame, transitions)
}

/// Signatures with a built-in tangent bundle.
pub const EULER_SUPPORTED: &[(usize, usize)] = &[(1, 1), (2, 1)];

/// Tangent bundle from the Euler sequence
/// `0 → O → K^{n+1|m} ⊗ O(1) → T → 0`, presented in the quotient frame.
///
/// On chart `i` the frame generators are the images of `∂_{x_k}` (`k ≠ i`)
/// and `∂_{θ_l}`, all of twist 1; `∂_{x_i}` is eliminated through the Euler
/// relation `Σ ∂_{x_k} x_k + Σ ∂_{θ_l} θ_l = 0`.
pub fn euler_tangent(space: SuperSpaceSig) -> Result<TransitionBundle> {
    if !EULER_SUPPORTED.contains(&(space.n, space.m)) {
        return Err(Error::Unsupported(format!("tangent bundle of {space}")));
    }
    let (n, m) = (space.n, space.m);
    let nv = space.nvars();
    let frame = FreeSupermodule::new(vec![1; n], vec![1; m]);
    // even frame slot l on chart i stands for ∂_{x_k}, k = l or l+1
    let slot_to_var = |chart: usize, l: usize| if l < chart { l } else { l + 1 };
    let var_to_slot = |chart: usize, k: usize| if k < chart { k } else { k - 1 };
    let ratio = |num: usize, den: usize| {
        let mut e = vec![0i32; nv];
        e[num] += 1;
        e[den] -= 1;
        SuperPoly::laurent(q(-1), &e)
    };
    let mut transitions = BTreeMap::new();
    for i in 0..nv {
        for j in (i + 1)..nv {
            // chart j coordinates → chart i coordinates
            let size = n + m;
            let mut entries = vec![vec![SuperPoly::zero(); size]; size];
            let col_i = var_to_slot(j, i);
            for col in 0..n {
                let k = slot_to_var(j, col);
                if k == i {
                    continue;
                }
                entries[var_to_slot(i, k)][col] = SuperPoly::one(nv);
            }
            for k in (0..nv).filter(|&k| k != i) {
                entries[var_to_slot(i, k)][col_i] = ratio(k, i);
            }
            for l in 0..m {
                entries[n + l][n + l] = SuperPoly::one(nv);
                let mut e = vec![0i32; nv];
                e[i] = -1;
                entries[n + l][col_i] = SuperPoly::term(
                    q(-1),
                    Monomial::from_parts(&e, 1 << l),
                );
            }
            transitions.insert(
                (i, j),
                SuperMatrix::new(frame.clone(), frame.clone(), entries, Parity::Even)?,
            );
        }
    }
    TransitionBundle::new(space, frame, transitions)
}

/// Cotangent bundle, the dual of [`euler_tangent`].
pub fn euler_cotangent(space: SuperSpaceSig) -> Result<TransitionBundle> {
    euler_tangent(space)?.dual()
}

/// Either presentation of a bundle.
#[derive(Clone, Debug, PartialEq)]
pub enum Bundle {
    Split(SplitBundle),
    Transition(TransitionBundle),
}

impl Bundle {
    pub fn space(&self) -> SuperSpaceSig {
        match self {
            Bundle::Split(s) => s.space,
            Bundle::Transition(t) => t.space(),
        }
    }

    pub fn rank(&self) -> SuperDim {
        match self {
            Bundle::Split(s) => s.rank(),
            Bundle::Transition(t) => t.rank(),
        }
    }

    pub fn to_transition(&self) -> TransitionBundle {
        match self {
            Bundle::Split(s) => s.to_transition(),
            Bundle::Transition(t) => t.clone(),
        }
    }

    pub fn reduce(&self) -> Bundle {
        match self {
            Bundle::Split(s) => Bundle::Split(s.reduced()),
            Bundle::Transition(t) => Bundle::Transition(t.reduce()),
        }
    }

    pub fn twist(&self, t: i64) -> Bundle {
        match self {
            Bundle::Split(s) => Bundle::Split(s.twisted(t)),
            Bundle::Transition(b) => Bundle::Transition(b.twist(t)),
        }
    }

    pub fn pi(&self) -> Bundle {
        match self {
            Bundle::Split(s) => Bundle::Split(s.pi()),
            Bundle::Transition(b) => Bundle::Transition(b.pi()),
        }
    }

    pub fn dual(&self) -> Result<Bundle> {
        Ok(match self {
            Bundle::Split(s) => Bundle::Split(s.dual()),
            Bundle::Transition(b) => Bundle::Transition(b.dual()?),
        })
    }

    pub fn to_json(&self) -> BundleJson {
        match self {
            Bundle::Split(s) => BundleJson {
                space: s.space,
                kind: BundleKind::Split,
                even: Some(s.module.even.clone()),
                odd: Some(s.module.odd.clone()),
                frame: None,
                transitions: None,
            },
            Bundle::Transition(t) => t.to_json(),
        }
    }

    pub fn from_json(js: &BundleJson) -> Result<Bundle> {
        let space = SuperSpaceSig::new(js.space.n, js.space.m)?;
        match js.kind {
            BundleKind::Split => Ok(Bundle::Split(SplitBundle::new(
                space,
                js.even.clone().unwrap_or_default(),
                js.odd.clone().unwrap_or_default(),
            ))),
            BundleKind::Transition => {
                let frame = js
                    .frame
                    .clone()
                    .ok_or_else(|| Error::Invalid("transition bundle without frame".into()))?;
                let mut transitions = BTreeMap::new();
                for (key, mj) in js.transitions.iter().flatten() {
                    let (a, b) = key
                        .split_once(',')
                        .ok_or_else(|| Error::Invalid(format!("bad chart pair {key:?}")))?;
                    let parse = |s: &str| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::Invalid(format!("bad chart pair {key:?}")))
                    };
                    transitions.insert(
                        (parse(a)?, parse(b)?),
                        SuperMatrix::from_json(mj, space.nvars())?,
                    );
                }
                let bundle = TransitionBundle::new(space, frame, transitions)?;
                bundle.cocycle_check()?;
                Ok(Bundle::Transition(bundle))
            }
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("bundle JSON serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Bundle> {
        let js: BundleJson =
            serde_json::from_str(s).map_err(|e| Error::Invalid(format!("bundle JSON: {e}")))?;
        Bundle::from_json(&js)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundleKind {
    Split,
    Transition,
}

/// File form of a bundle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleJson {
    pub space: SuperSpaceSig,
    pub kind: BundleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub even: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub odd: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FreeSupermodule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transitions: Option<BTreeMap<String, MatrixJson>>,
}

/// One graded piece `(E_red ⊗ O(shift))^{⊕multiplicity}`, parity-shifted by
/// `parity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrPiece {
    pub shift: i64,
    pub multiplicity: u64,
    pub parity: u8,
}

/// `p_*(E) = ⊕_k (E_red ⊗ O(-k))^{⊕C(m,k)}` with parity `k mod 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrDecomposition {
    pub pieces: Vec<GrPiece>,
    pub reduced: Bundle,
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Graded pieces of the pushforward to `P^n`, one per exterior power of
/// `J/J² = O(-1)^{⊕m}`.
pub fn gr_pushforward(bundle: &Bundle) -> GrDecomposition {
    let m = bundle.space().m as u64;
    let pieces = (0..=m)
        .map(|k| GrPiece {
            shift: -(k as i64),
            multiplicity: binomial(m, k),
            parity: (k % 2) as u8,
        })
        .collect();
    GrDecomposition {
        pieces,
        reduced: bundle.reduce(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(n: usize, m: usize) -> SuperSpaceSig {
        SuperSpaceSig::new(n, m).unwrap()
    }

    #[test]
    fn trivial_line_bundle_has_unit_transition() {
        let b = make_split(sig(1, 1), &[0], &[]);
        assert!(b.transitions()[&(0, 1)].is_identity());
        assert!(b.cocycle_check().is_ok());
    }

    #[test]
    fn split_transitions_are_monomial_ratios() {
        let b = make_split(sig(2, 1), &[1], &[-1]);
        let g = &b.transitions()[&(0, 1)];
        assert_eq!(g.entry(0, 0), &SuperPoly::laurent(q(1), &[-1, 1, 0]));
        assert_eq!(g.entry(1, 1), &SuperPoly::laurent(q(1), &[1, -1, 0]));
        assert!(b.cocycle_check().is_ok());
        assert_eq!(b.reduce(), make_split(sig(2, 0), &[1], &[-1]));
    }

    #[test]
    fn flipped_sign_breaks_the_cocycle() {
        let b = make_split(sig(2, 0), &[2, -1], &[]);
        let mut tr = b.transitions().clone();
        let g = tr[&(1, 2)].clone();
        let mut entries = g.entries().clone();
        entries[0][0] = -&entries[0][0];
        tr.insert(
            (1, 2),
            SuperMatrix::new(g.source().clone(), g.target().clone(), entries, Parity::Even)
                .unwrap(),
        );
        let bad = TransitionBundle::new(b.space(), b.frame().clone(), tr).unwrap();
        let fail = bad.cocycle_check().unwrap_err();
        assert_eq!((fail.i, fail.j, fail.k), (0, 1, 2));
        assert!(!fail.residual.is_zero());
    }

    #[test]
    fn tangent_bundles_are_cocycles() {
        for &(n, m) in EULER_SUPPORTED {
            let t = euler_tangent(sig(n, m)).unwrap();
            assert!(t.cocycle_check().is_ok(), "P^{n}|{m}");
            assert!(euler_cotangent(sig(n, m)).unwrap().cocycle_check().is_ok());
        }
        assert!(euler_tangent(sig(3, 3)).is_err());
    }

    #[test]
    fn tangent_of_p11_reduces_to_diagonal() {
        let t = euler_tangent(sig(1, 1)).unwrap();
        let red = t.reduce();
        let g = &red.transitions()[&(0, 1)];
        assert!(g.entry(0, 1).is_zero() && g.entry(1, 0).is_zero());
        assert_eq!(g.entry(0, 0), &SuperPoly::laurent(q(-1), &[-1, 1]));
        assert!(g.entry(1, 1).is_one());
        // the odd row carries the non-split part
        assert!(!t.transitions()[&(0, 1)].entry(1, 0).is_zero());
    }

    #[test]
    fn constructions_preserve_cocycles() {
        let s = sig(2, 1);
        let a = make_split(s, &[1, 0], &[-1]);
        let t = euler_tangent(s).unwrap();
        let built = [
            a.dual().unwrap(),
            a.tensor(&t).unwrap(),
            a.direct_sum(&t).unwrap(),
            t.twist(3),
            t.pi(),
            t.dual().unwrap().tensor(&t).unwrap(),
        ];
        for b in built {
            assert!(b.cocycle_check().is_ok());
        }
    }

    #[test]
    fn twist_and_pi_on_line_bundles() {
        let s = sig(1, 1);
        let o = make_split(s, &[2], &[]);
        assert_eq!(o.twist(3).frame(), &FreeSupermodule::new(vec![3], vec![]));
        assert_eq!(o.pi().pi(), o);
    }

    #[test]
    fn pushforward_pieces_follow_binomials() {
        let o = Bundle::Split(SplitBundle::new(sig(1, 1), vec![0], vec![]));
        let gr = gr_pushforward(&o);
        assert_eq!(
            gr.pieces,
            vec![
                GrPiece { shift: 0, multiplicity: 1, parity: 0 },
                GrPiece { shift: -1, multiplicity: 1, parity: 1 },
            ]
        );
        let gr = gr_pushforward(&Bundle::Split(SplitBundle::new(sig(1, 2), vec![0], vec![])));
        let got: Vec<_> = gr.pieces.iter().map(|p| (p.shift, p.multiplicity, p.parity)).collect();
        assert_eq!(got, vec![(0, 1, 0), (-1, 2, 1), (-2, 1, 0)]);
        for m in 0..6 {
            let gr = gr_pushforward(&Bundle::Split(SplitBundle::new(sig(2, m), vec![0], vec![])));
            let total: u64 = gr.pieces.iter().map(|p| p.multiplicity).sum();
            assert_eq!(total, 1 << m);
            if m >= 1 {
                let even: u64 = gr.pieces.iter().filter(|p| p.parity == 0).map(|p| p.multiplicity).sum();
                assert_eq!(even, 1 << (m - 1));
            }
        }
    }

    #[test]
    fn bundle_json_round_trip_is_byte_stable() {
        let t = Bundle::Transition(euler_tangent(sig(1, 1)).unwrap());
        let s = t.to_json_string();
        let back = Bundle::from_json_str(&s).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json_string(), s);
        let sp = Bundle::Split(SplitBundle::new(sig(2, 1), vec![1, 0], vec![-3]));
        let s = sp.to_json_string();
        assert_eq!(Bundle::from_json_str(&s).unwrap().to_json_string(), s);
        assert!(Bundle::from_json_str("{not json").is_err());
    }
}
