//! Free graded supermodules `⊕O(a_i) ⊕ Π⊕O(b_j)` and homogeneous
//! supermatrices between them.
//!
//! Modules are right modules: an element is `Σ e_r v_r` and a morphism acts
//! on coordinate columns from the left, so composition is the plain matrix
//! product of superring entries. Generators are ordered even-first.
//!
//! Entry `(r, c)` of a morphism `F → G` is homogeneous of degree
//! `twist_G(r) - twist_F(c)` and, for an even morphism, of parity
//! `parity_G(r) + parity_F(c)`. In block form `[A B; C D]` the blocks `A`, `D`
//! are even and `B`, `C` are odd.

use std::fmt;
use std::ops::Add;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::superring::{q, Monomial, SuperPoly, TermJson, Q};

/// Pair `p|q` of natural numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SuperDim {
    pub even: u64,
    pub odd: u64,
}

impl SuperDim {
    pub const ZERO: SuperDim = SuperDim { even: 0, odd: 0 };

    pub fn new(even: u64, odd: u64) -> Self {
        Self { even, odd }
    }

    /// Parity shift.
    pub fn swap(self) -> Self {
        Self {
            even: self.odd,
            odd: self.even,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.even == 0 && self.odd == 0
    }

    pub fn total(&self) -> u64 {
        self.even + self.odd
    }

    pub fn scale(self, k: u64) -> Self {
        Self {
            even: self.even * k,
            odd: self.odd * k,
        }
    }

    /// Add `k` copies, shifted by parity `parity`.
    pub fn add_shifted(&mut self, other: SuperDim, parity: u8) {
        let o = if parity % 2 == 1 { other.swap() } else { other };
        self.even += o.even;
        self.odd += o.odd;
    }
}

impl Add for SuperDim {
    type Output = SuperDim;
    fn add(self, rhs: SuperDim) -> SuperDim {
        SuperDim {
            even: self.even + rhs.even,
            odd: self.odd + rhs.odd,
        }
    }
}

impl fmt::Display for SuperDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.even, self.odd)
    }
}

impl std::str::FromStr for SuperDim {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once('|')
            .ok_or_else(|| Error::Invalid(format!("expected p|q, got {s:?}")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Invalid(format!("bad superdimension {s:?}")))
        };
        Ok(SuperDim::new(parse(a)?, parse(b)?))
    }
}

/// `⊕O(even[i]) ⊕ Π⊕O(odd[j])`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FreeSupermodule {
    pub even: Vec<i64>,
    pub odd: Vec<i64>,
}

impl FreeSupermodule {
    pub fn new(even: Vec<i64>, odd: Vec<i64>) -> Self {
        Self { even, odd }
    }

    pub fn rank(&self) -> SuperDim {
        SuperDim::new(self.even.len() as u64, self.odd.len() as u64)
    }

    pub fn len(&self) -> usize {
        self.even.len() + self.odd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn parity(&self, idx: usize) -> u8 {
        u8::from(idx >= self.even.len())
    }

    pub fn twist(&self, idx: usize) -> i64 {
        if idx < self.even.len() {
            self.even[idx]
        } else {
            self.odd[idx - self.even.len()]
        }
    }

    pub fn twists(&self) -> impl Iterator<Item = i64> + '_ {
        self.even.iter().chain(self.odd.iter()).copied()
    }

    pub fn pi(&self) -> Self {
        Self {
            even: self.odd.clone(),
            odd: self.even.clone(),
        }
    }

    pub fn twisted(&self, t: i64) -> Self {
        Self {
            even: self.even.iter().map(|a| a + t).collect(),
            odd: self.odd.iter().map(|a| a + t).collect(),
        }
    }

    pub fn dual(&self) -> Self {
        Self {
            even: self.even.iter().map(|a| -a).collect(),
            odd: self.odd.iter().map(|a| -a).collect(),
        }
    }

    /// Generator index in `self ⊕ other` of generator `idx` of the left
    /// (`left = true`) or right summand.
    fn sum_index(&self, other: &Self, idx: usize, left: bool) -> usize {
        let (pe, qe) = (self.even.len(), other.even.len());
        let m = if left { self } else { other };
        let par = m.parity(idx);
        match (left, par) {
            (true, 0) => idx,
            (false, 0) => pe + idx,
            (true, _) => pe + qe + (idx - pe),
            (false, _) => pe + qe + self.odd.len() + (idx - qe),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Self {
            even: self.even.iter().chain(&other.even).copied().collect(),
            odd: self.odd.iter().chain(&other.odd).copied().collect(),
        }
    }

    /// Tensor product; generator `(a, b)` sits at `tensor_index(a, b)`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for a in 0..self.len() {
            for b in 0..other.len() {
                let t = self.twist(a) + other.twist(b);
                if (self.parity(a) + other.parity(b)).is_multiple_of(2) {
                    out.even.push(t);
                } else {
                    out.odd.push(t);
                }
            }
        }
        out
    }

    pub fn tensor_index(&self, other: &Self, a: usize, b: usize) -> usize {
        let target = (self.parity(a) + other.parity(b)) % 2;
        let mut even_seen = 0;
        let mut odd_seen = 0;
        for i in 0..self.len() {
            for j in 0..other.len() {
                let p = (self.parity(i) + other.parity(j)) % 2;
                if i == a && j == b {
                    return if target == 0 {
                        even_seen
                    } else {
                        self.tensor_even_count(other) + odd_seen
                    };
                }
                if p == 0 {
                    even_seen += 1;
                } else {
                    odd_seen += 1;
                }
            }
        }
        unreachable!("generator out of range")
    }

    fn tensor_even_count(&self, other: &Self) -> usize {
        self.even.len() * other.even.len() + self.odd.len() * other.odd.len()
    }

    pub fn same_twist_multisets(&self, other: &Self) -> bool {
        let sorted = |v: &[i64]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v
        };
        sorted(&self.even) == sorted(&other.even) && sorted(&self.odd) == sorted(&other.odd)
    }

    /// Position of each generator after `Π`: the odd block moves to the front.
    fn pi_index(&self, idx: usize) -> usize {
        let pe = self.even.len();
        if idx < pe {
            self.odd.len() + idx
        } else {
            idx - pe
        }
    }
}

impl fmt::Display for FreeSupermodule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.even.iter().map(|a| format!("O({a})")).collect();
        parts.extend(self.odd.iter().map(|b| format!("ΠO({b})")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" ⊕ "))
        }
    }
}

/// Parity of a morphism.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    #[default]
    Even,
    Odd,
}

impl Parity {
    pub fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    fn from_bit(b: u8) -> Self {
        if b.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

pub type Entries = Vec<Vec<SuperPoly>>;

/// A graded homogeneous morphism between free supermodules.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SuperMatrix {
    source: FreeSupermodule,
    target: FreeSupermodule,
    entries: Entries,
    parity: Parity,
}

impl SuperMatrix {
    /// Validates shape, degrees and parities of every entry.
    pub fn new(
        source: FreeSupermodule,
        target: FreeSupermodule,
        entries: Entries,
        parity: Parity,
    ) -> Result<Self> {
        let m = Self {
            source,
            target,
            entries,
            parity,
        };
        m.validate()?;
        Ok(m)
    }

    /// Skips validation; used internally where the invariants hold by
    /// construction.
    pub(crate) fn from_raw(
        source: FreeSupermodule,
        target: FreeSupermodule,
        entries: Entries,
        parity: Parity,
    ) -> Self {
        let m = Self {
            source,
            target,
            entries,
            parity,
        };
        debug_assert!(m.validate().is_ok(), "{:?}", m.validate());
        m
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.len() != self.target.len() {
            return Err(Error::Shape(format!(
                "{} rows for a target of rank {}",
                self.entries.len(),
                self.target.rank()
            )));
        }
        for (r, row) in self.entries.iter().enumerate() {
            if row.len() != self.source.len() {
                return Err(Error::Shape(format!(
                    "row {r} has {} entries for a source of rank {}",
                    row.len(),
                    self.source.rank()
                )));
            }
            for (c, e) in row.iter().enumerate() {
                let (deg, par) = self.entry_grading(r, c);
                if !e.is_homogeneous_of(deg, par) {
                    return Err(Error::Invalid(format!(
                        "entry ({r},{c}) = {e} is not homogeneous of degree {deg} and parity {par}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Required (degree, parity) of entry `(r, c)`.
    pub fn entry_grading(&self, r: usize, c: usize) -> (i64, u8) {
        (
            self.target.twist(r) - self.source.twist(c),
            (self.target.parity(r) + self.source.parity(c) + self.parity.bit()) % 2,
        )
    }

    pub fn identity(module: &FreeSupermodule, nvars: usize) -> Self {
        let n = module.len();
        let entries = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        if r == c {
                            SuperPoly::one(nvars)
                        } else {
                            SuperPoly::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::from_raw(module.clone(), module.clone(), entries, Parity::Even)
    }

    pub fn zero(source: &FreeSupermodule, target: &FreeSupermodule, parity: Parity) -> Self {
        let entries = vec![vec![SuperPoly::zero(); source.len()]; target.len()];
        Self::from_raw(source.clone(), target.clone(), entries, parity)
    }

    /// Diagonal morphism with the given entries.
    pub fn diagonal(module: &FreeSupermodule, diag: Vec<SuperPoly>) -> Result<Self> {
        let n = module.len();
        if diag.len() != n {
            return Err(Error::Shape("diagonal length".into()));
        }
        let mut entries = vec![vec![SuperPoly::zero(); n]; n];
        for (i, d) in diag.into_iter().enumerate() {
            entries[i][i] = d;
        }
        Self::new(module.clone(), module.clone(), entries, Parity::Even)
    }

    pub fn source(&self) -> &FreeSupermodule {
        &self.source
    }

    pub fn target(&self) -> &FreeSupermodule {
        &self.target
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn entry(&self, r: usize, c: usize) -> &SuperPoly {
        &self.entries[r][c]
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn rows(&self) -> usize {
        self.target.len()
    }

    pub fn cols(&self) -> usize {
        self.source.len()
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self.entries.iter().enumerate().all(|(r, row)| {
                row.iter().enumerate().all(|(c, e)| {
                    if r == c {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }

    /// `self ∘ f`.
    pub fn compose(&self, f: &SuperMatrix) -> Result<SuperMatrix> {
        if self.source != f.target {
            return Err(Error::Shape(format!(
                "cannot compose: source {} differs from target {}",
                self.source, f.target
            )));
        }
        Ok(Self::from_raw(
            f.source.clone(),
            self.target.clone(),
            mat_mul(&self.entries, &f.entries),
            Parity::from_bit(self.parity.bit() + f.parity.bit()),
        ))
    }

    pub fn add(&self, other: &SuperMatrix) -> Result<SuperMatrix> {
        if self.source != other.source || self.target != other.target || self.parity != other.parity
        {
            return Err(Error::Shape("cannot add morphisms of different type".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(Self::from_raw(
            self.source.clone(),
            self.target.clone(),
            entries,
            self.parity,
        ))
    }

    pub fn scale(&self, c: &Q) -> SuperMatrix {
        let entries = self
            .entries
            .iter()
            .map(|row| row.iter().map(|e| e.scale(c)).collect())
            .collect();
        Self::from_raw(self.source.clone(), self.target.clone(), entries, self.parity)
    }

    fn map_entries(&self, f: impl Fn(&SuperPoly) -> SuperPoly) -> SuperMatrix {
        let entries = self
            .entries
            .iter()
            .map(|row| row.iter().map(&f).collect())
            .collect();
        Self::from_raw(self.source.clone(), self.target.clone(), entries, self.parity)
    }

    /// Entrywise `θ → 0`. For an even morphism the off-diagonal blocks are odd
    /// and vanish, leaving `[Ã 0; 0 D̃]`.
    pub fn bosonic_reduce(&self) -> SuperMatrix {
        self.map_entries(SuperPoly::bosonic_reduce)
    }

    /// Part of the matrix lying in `J`.
    pub fn nilpotent_part(&self) -> SuperMatrix {
        self.map_entries(SuperPoly::nilpotent_part)
    }

    /// Block of rows `rows_odd` and columns `cols_odd` as plain entries.
    pub fn block(&self, rows_odd: bool, cols_odd: bool) -> Entries {
        let (r0, r1) = if rows_odd {
            (self.target.even.len(), self.target.len())
        } else {
            (0, self.target.even.len())
        };
        let (c0, c1) = if cols_odd {
            (self.source.even.len(), self.source.len())
        } else {
            (0, self.source.even.len())
        };
        self.entries[r0..r1]
            .iter()
            .map(|row| row[c0..c1].to_vec())
            .collect()
    }

    /// Shift all twists by `t`; entries are unchanged.
    pub fn twist(&self, t: i64) -> SuperMatrix {
        Self::from_raw(
            self.source.twisted(t),
            self.target.twisted(t),
            self.entries.clone(),
            self.parity,
        )
    }

    /// `Π f : ΠF → ΠG`.
    pub fn parity_shift(&self) -> SuperMatrix {
        let (src, tgt) = (self.source.pi(), self.target.pi());
        let mut entries = vec![vec![SuperPoly::zero(); src.len()]; tgt.len()];
        for r in 0..self.rows() {
            for c in 0..self.cols() {
                entries[self.target.pi_index(r)][self.source.pi_index(c)] =
                    self.entries[r][c].clone();
            }
        }
        Self::from_raw(src, tgt, entries, self.parity)
    }

    /// Block-diagonal `f ⊕ g`.
    pub fn direct_sum(&self, g: &SuperMatrix) -> Result<SuperMatrix> {
        if self.parity != g.parity {
            return Err(Error::Shape("direct sum of morphisms of different parity".into()));
        }
        let src = self.source.direct_sum(&g.source);
        let tgt = self.target.direct_sum(&g.target);
        let mut entries = vec![vec![SuperPoly::zero(); src.len()]; tgt.len()];
        for (left, m) in [(true, self), (false, g)] {
            for r in 0..m.rows() {
                let rr = self.target.sum_index(&g.target, r, left);
                for c in 0..m.cols() {
                    let cc = self.source.sum_index(&g.source, c, left);
                    entries[rr][cc] = m.entries[r][c].clone();
                }
            }
        }
        Ok(Self::from_raw(src, tgt, entries, self.parity))
    }

    /// `f ⊗ g` for even morphisms: entry `((a,b),(c,d))` is
    /// `(-1)^{|f_ac|·|b|} f_ac g_bd`.
    pub fn tensor(&self, g: &SuperMatrix) -> Result<SuperMatrix> {
        if self.parity != Parity::Even || g.parity != Parity::Even {
            return Err(Error::Unsupported("tensor of odd morphisms".into()));
        }
        let src = self.source.tensor(&g.source);
        let tgt = self.target.tensor(&g.target);
        let mut entries = vec![vec![SuperPoly::zero(); src.len()]; tgt.len()];
        for a in 0..self.rows() {
            for b in 0..g.rows() {
                let row = self.target.tensor_index(&g.target, a, b);
                for c in 0..self.cols() {
                    let fac = &self.entries[a][c];
                    if fac.is_zero() {
                        continue;
                    }
                    let sign_f = (self.target.parity(a) + self.source.parity(c)) % 2;
                    let negate = sign_f * g.target.parity(b) % 2 == 1;
                    for d in 0..g.cols() {
                        let gbd = &g.entries[b][d];
                        if gbd.is_zero() {
                            continue;
                        }
                        let col = self.source.tensor_index(&g.source, c, d);
                        let mut p = fac.mul(gbd);
                        if negate {
                            p = -&p;
                        }
                        entries[row][col] = p;
                    }
                }
            }
        }
        Ok(Self::from_raw(src, tgt, entries, Parity::Even))
    }

    /// Supertranspose `f^∨ : G^∨ → F^∨`, `h_cr = (-1)^{|c|(|r|+1)} f_rc`.
    pub fn dual(&self) -> Result<SuperMatrix> {
        if self.parity != Parity::Even {
            return Err(Error::Unsupported("dual of an odd morphism".into()));
        }
        let src = self.target.dual();
        let tgt = self.source.dual();
        let mut entries = vec![vec![SuperPoly::zero(); src.len()]; tgt.len()];
        for (c, row) in entries.iter_mut().enumerate() {
            for (r, e) in row.iter_mut().enumerate() {
                let v = &self.entries[r][c];
                let negate = self.source.parity(c) == 1 && self.target.parity(r) == 0;
                *e = if negate { -v } else { v.clone() };
            }
        }
        Ok(Self::from_raw(src, tgt, entries, Parity::Even))
    }

    fn square_check(&self) -> Result<()> {
        if self.parity != Parity::Even {
            return Err(Error::NotSquare("odd morphism".into()));
        }
        if self.source.rank() != self.target.rank() {
            return Err(Error::NotSquare(format!(
                "rank {} → {}",
                self.source.rank(),
                self.target.rank()
            )));
        }
        Ok(())
    }

    /// Determinants of the reduced diagonal blocks `Ã` and `D̃`.
    pub fn reduced_block_dets(&self) -> Result<(SuperPoly, SuperPoly)> {
        self.square_check()?;
        let red = self.bosonic_reduce();
        let nv = self.nvars_hint();
        Ok((
            det(&red.block(false, false), nv),
            det(&red.block(true, true), nv),
        ))
    }

    /// Invertibility as a morphism of graded modules over the polynomial
    /// superring: the reduced blocks must have nonzero constant determinants.
    /// Differing twist multisets give `false`.
    pub fn is_invertible(&self) -> Result<bool> {
        self.square_check()?;
        if !self.source.same_twist_multisets(&self.target) {
            return Ok(false);
        }
        self.is_invertible_localized(&[])
    }

    /// Invertibility over the ring with the even variables `inverted`
    /// localized: both reduced block determinants must be units
    /// `c · x^e` with `e` supported on `inverted`.
    pub fn is_invertible_localized(&self, inverted: &[usize]) -> Result<bool> {
        let (da, dd) = self.reduced_block_dets()?;
        Ok(is_unit(&da, inverted) && is_unit(&dd, inverted))
    }

    /// Exact inverse via `f⁻¹ = Σ_k (−f₀⁻¹ν)^k f₀⁻¹`, where `f₀` is the θ-free
    /// part and `ν = f − f₀` is nilpotent. Accepts any unit determinant
    /// `c · x^e`, so chart matrices with Laurent entries invert too.
    pub fn invert(&self) -> Result<SuperMatrix> {
        self.square_check()?;
        let nv = self.nvars_hint();
        let red = self.bosonic_reduce();
        let a_inv = invert_commutative(&red.block(false, false), nv)?;
        let d_inv = invert_commutative(&red.block(true, true), nv)?;
        let p = self.source.even.len();
        let n = self.source.len();
        // f0^{-1} maps target → source
        let mut f0_inv = vec![vec![SuperPoly::zero(); n]; n];
        for (i, row) in a_inv.into_iter().enumerate() {
            for (j, e) in row.into_iter().enumerate() {
                f0_inv[i][j] = e;
            }
        }
        for (i, row) in d_inv.into_iter().enumerate() {
            for (j, e) in row.into_iter().enumerate() {
                f0_inv[p + i][p + j] = e;
            }
        }
        let nu = self.nilpotent_part();
        let step: Entries = mat_mul(&f0_inv, &nu.entries)
            .into_iter()
            .map(|row| row.into_iter().map(|e| -&e).collect())
            .collect();
        let mut total = f0_inv.clone();
        let mut power = f0_inv;
        for _ in 0..=crate::superring::MAX_ODD {
            power = mat_mul(&step, &power);
            if power.iter().flatten().all(|e| e.is_zero()) {
                break;
            }
            mat_add_assign(&mut total, &power);
        }
        Ok(Self::from_raw(
            self.target.clone(),
            self.source.clone(),
            total,
            Parity::Even,
        ))
    }

    pub(crate) fn nvars_hint(&self) -> usize {
        self.entries
            .iter()
            .flatten()
            .find_map(|e| e.nvars())
            .unwrap_or(1)
    }

    /// Largest pole order of any entry in even variable `var`.
    pub fn pole_in(&self, var: usize) -> i32 {
        self.entries
            .iter()
            .flatten()
            .map(|e| e.pole_in(var))
            .max()
            .unwrap_or(0)
    }

    pub fn max_pole(&self) -> i32 {
        self.entries
            .iter()
            .flatten()
            .flat_map(|e| e.terms().map(|(m, _)| m.pole_order()))
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_exponent(&self) -> i32 {
        self.entries
            .iter()
            .flatten()
            .map(SuperPoly::max_abs_exponent)
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            source: self.source.clone(),
            target: self.target.clone(),
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(SuperPoly::to_json).collect())
                .collect(),
            parity: self.parity,
        }
    }

    pub fn from_json(js: &MatrixJson, nvars: usize) -> Result<Self> {
        let entries = js
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| SuperPoly::from_json(p, nvars))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(js.source.clone(), js.target.clone(), entries, js.parity)
    }
}

impl fmt::Debug for SuperMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SuperMatrix({} → {}, {:?})", self.source, self.target, self.parity)?;
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|e| e.to_string()).collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

fn is_even(p: &Parity) -> bool {
    *p == Parity::Even
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub source: FreeSupermodule,
    pub target: FreeSupermodule,
    pub entries: Vec<Vec<Vec<TermJson>>>,
    #[serde(default, skip_serializing_if = "is_even")]
    pub parity: Parity,
}

pub fn mat_mul(a: &Entries, b: &Entries) -> Entries {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            debug_assert_eq!(row.len(), inner);
            (0..cols)
                .map(|j| {
                    let mut acc = SuperPoly::zero();
                    for (k, x) in row.iter().enumerate() {
                        if x.is_zero() || b[k][j].is_zero() {
                            continue;
                        }
                        acc = &acc + &x.mul(&b[k][j]);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn mat_add_assign(a: &mut Entries, b: &Entries) {
    for (ra, rb) in a.iter_mut().zip(b) {
        for (x, y) in ra.iter_mut().zip(rb) {
            *x = &*x + y;
        }
    }
}

/// `c · x^e` with no odd part and `e` supported on `inverted`.
pub fn is_unit(p: &SuperPoly, inverted: &[usize]) -> bool {
    match p.as_single_term() {
        Some((m, c)) => {
            !c.is_zero()
                && m.is_bosonic()
                && m
                    .xexp()
                    .iter()
                    .enumerate()
                    .all(|(i, &e)| e == 0 || inverted.contains(&i))
        }
        None => false,
    }
}

/// Characteristic-polynomial data by Faddeev–LeVerrier: returns
/// `(det, adj)`. Only ring operations and division by the integers `1..n`
/// occur, so the computation stays exact over any commutative `Q`-algebra.
fn det_and_adjugate(a: &Entries, nvars: usize) -> (SuperPoly, Entries) {
    let n = a.len();
    if n == 0 {
        return (SuperPoly::one(nvars), Vec::new());
    }
    // M_k = A M_{k-1} + c_{n-k+1} I,  c_{n-k} = -tr(A M_k) / k
    let mut m: Entries = vec![vec![SuperPoly::zero(); n]; n];
    let mut coeff = SuperPoly::one(nvars);
    for k in 1..=n {
        m = if k == 1 { m } else { mat_mul(a, &m) };
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = &row[i] + &coeff;
        }
        let am = mat_mul(a, &m);
        coeff = (-&trace(&am)).scale(&Q::new(1.into(), (k as i64).into()));
    }
    let sign = if n.is_multiple_of(2) { q(1) } else { q(-1) };
    let det = coeff.scale(&sign);
    let adj_sign = -sign;
    let adj = m
        .iter()
        .map(|row| row.iter().map(|e| e.scale(&adj_sign)).collect())
        .collect();
    (det, adj)
}

fn trace(a: &Entries) -> SuperPoly {
    let mut t = SuperPoly::zero();
    for (i, row) in a.iter().enumerate() {
        t = &t + &row[i];
    }
    t
}

/// Determinant of a matrix over the commutative even subring.
pub fn det(a: &Entries, nvars: usize) -> SuperPoly {
    det_and_adjugate(a, nvars).0
}

/// Inverse of a matrix over the commutative even subring whose determinant
/// is a Laurent unit.
pub fn invert_commutative(a: &Entries, nvars: usize) -> Result<Entries> {
    let (d, adj) = det_and_adjugate(a, nvars);
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let (mono, c) = d.as_single_term().ok_or(Error::NotInvertible)?;
    if !mono.is_bosonic() {
        return Err(Error::NotInvertible);
    }
    let inv_exp: Vec<i32> = mono.xexp().iter().map(|e| -e).collect();
    let inv_mono = Monomial::from_parts(&inv_exp, 0);
    let inv_c = c.recip();
    Ok(adj
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|e| e.mul_monomial(&inv_mono, &inv_c))
                .collect()
        })
        .collect())
}
