//! Graded cohomology of bundles on `P^{n|m}`.
//!
//! Split bundles go through closed forms: `P^{n|m}` is split with
//! `J/J² = O(-1)^{⊕m}`, so `H^i(O(a)) = ⊕_k H^i(P^n, O(a-k))^{⊕C(m,k)}` with
//! parity `k mod 2`.
//!
//! Transition bundles go through the Čech complex of the standard cover. A
//! cochain on `U_I` is written in the frame of chart `min(I)`, with
//! coordinates in `K[x, x_I^{-1}, θ]`. Global sections are computed exactly
//! from chart 0 (their `x_0`-pole is bounded by the transitions). Higher
//! groups use pole-filtered cochains `C^k_L` (exponents `≥ -L`) and
//!
//! ```text
//! h^k_L = dim C^k_L - rank δ_k|C^k_L - dim(δ(C^{k-1}_{L'}) ∩ C^k_L)
//! ```
//!
//! with `L' = L + D`, `D` the largest pole of a transition or its inverse.
//! This counts classes with a representative in `C^k_L`, so it only grows
//! towards the true value; results are accepted once windows `W` and `W+1`
//! agree.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::sheaf::{binomial, Bundle, TransitionBundle};
use crate::supermodule::{FreeSupermodule, SuperDim, SuperMatrix};
use crate::superring::{q, Monomial, SuperPoly, SuperSpaceSig};

/// `h^i(P^n, O(a))`.
pub fn bott_line(n: usize, a: i64, i: usize) -> Result<u64> {
    if i > n {
        return Err(Error::Invalid(format!("H^{i} on P^{n}")));
    }
    let n64 = n as i64;
    Ok(if i == 0 && a >= 0 {
        binomial((n64 + a) as u64, n as u64)
    } else if i == n && a < -n64 {
        binomial((-a - 1) as u64, n as u64)
    } else {
        0
    })
}

/// `H^i(P^{n|m}, O(a))` through the pushforward to `P^n`.
pub fn super_line_cohomology(space: SuperSpaceSig, a: i64, i: usize) -> SuperDim {
    let mut out = SuperDim::default();
    if i > space.n {
        return out;
    }
    for k in 0..=space.m {
        let h = binomial(space.m as u64, k as u64)
            * bott_line(space.n, a - k as i64, i).expect("degree checked");
        if k % 2 == 0 {
            out.even += h;
        } else {
            out.odd += h;
        }
    }
    out
}

/// `H^i` of `⊕O(a_r + t) ⊕ Π⊕O(b_s + t)`.
pub fn split_cohomology(space: SuperSpaceSig, module: &FreeSupermodule, t: i64, i: usize) -> SuperDim {
    let even = module
        .even
        .iter()
        .map(|&a| super_line_cohomology(space, a + t, i))
        .fold(SuperDim::default(), |acc, d| acc + d);
    let odd = module
        .odd
        .iter()
        .map(|&b| super_line_cohomology(space, b + t, i).swap())
        .fold(SuperDim::default(), |acc, d| acc + d);
    even + odd
}

/// Default pole window for `H^i(E(t))`. Classes of `O(a)(t)` need exponents
/// up to `|a + t|`, so the twist and the bundle's complexity add.
pub fn default_window(bundle: &TransitionBundle, t: i64) -> i64 {
    let s = bundle.space();
    t.abs() + bundle.complexity() + (s.n + s.m) as i64 + 2
}

/// Worker pool sized by `SUPERSPLIT_THREADS` when set.
pub fn pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = std::env::var("SUPERSPLIT_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .filter(|&v| v > 0)
            .unwrap_or(0);
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
    })
}

/// All exponent vectors with `e_v ≥ lower[v]` summing to `total`.
pub(crate) fn exponent_vectors(lower: &[i32], total: i64) -> Vec<Vec<i32>> {
    fn go(lower: &[i32], v: usize, left: i64, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if v + 1 == lower.len() {
            if left >= lower[v] as i64 {
                cur.push(left as i32);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        let rest: i64 = lower[v + 1..].iter().map(|&l| l as i64).sum();
        for e in lower[v] as i64..=(left - rest) {
            cur.push(e as i32);
            go(lower, v + 1, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if !lower.is_empty() {
        go(lower, 0, total, &mut Vec::with_capacity(lower.len()), &mut out);
    }
    out
}

/// Basis element of a Čech cochain group: monomial `mono` in frame slot
/// `gen` over `U_I`, `I = subsets[level][set]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CechKey {
    pub set: usize,
    pub gen: usize,
    pub mono: Monomial,
}

/// Shared data for the Čech computations of one bundle.
struct Cech<'a> {
    bundle: &'a TransitionBundle,
    /// `subsets[k]`: sorted `(k+1)`-subsets of the charts, lexicographic.
    subsets: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    parities: Vec<u8>,
    twists: Vec<i64>,
    pole: i32,
}

impl<'a> Cech<'a> {
    fn new(bundle: &'a TransitionBundle) -> Result<Self> {
        let nv = bundle.space().nvars();
        let mut subsets: Vec<Vec<Vec<usize>>> = vec![Vec::new(); nv];
        for mask in 1u32..(1 << nv) {
            let s: Vec<usize> = (0..nv).filter(|&v| mask >> v & 1 == 1).collect();
            subsets[s.len() - 1].push(s);
        }
        for level in &mut subsets {
            level.sort();
        }
        let index = subsets
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        let frame = bundle.frame();
        let mut pole = 0;
        for g in bundle.transitions().values() {
            pole = pole.max(g.max_pole()).max(g.invert()?.max_pole());
        }
        Ok(Self {
            bundle,
            subsets,
            index,
            parities: (0..frame.len()).map(|r| frame.parity(r)).collect(),
            twists: frame.twists().collect(),
            pole,
        })
    }

    fn space(&self) -> SuperSpaceSig {
        self.bundle.space()
    }

    /// Basis of `C^k_L` restricted to total parity `parity`.
    fn basis(&self, k: usize, t: i64, bound: i32, parity: u8) -> Vec<CechKey> {
        let nv = self.space().nvars();
        let m = self.space().m;
        let mut out = Vec::new();
        for (set, s) in self.subsets[k].iter().enumerate() {
            let mut lower = vec![0i32; nv];
            for &v in s {
                lower[v] = -bound;
            }
            for (gen, (&f, &p)) in self.twists.iter().zip(&self.parities).enumerate() {
                for mask in 0u32..(1 << m) {
                    let odd = mask.count_ones() as i64;
                    if ((odd as u8) + p) % 2 != parity {
                        continue;
                    }
                    for e in exponent_vectors(&lower, f + t - odd) {
                        out.push(CechKey {
                            set,
                            gen,
                            mono: Monomial::from_parts(&e, mask),
                        });
                    }
                }
            }
        }
        out
    }

    /// `δ` of a level-`k` basis element, as level-`(k+1)` terms.
    fn delta(&self, k: usize, key: &CechKey) -> Vec<(CechKey, crate::superring::Q)> {
        let j = &self.subsets[k][key.set];
        let mut out = Vec::new();
        for v in 0..self.space().nvars() {
            if j.contains(&v) {
                continue;
            }
            let pos = j.iter().filter(|&&w| w < v).count();
            let mut i = j.clone();
            i.insert(pos, v);
            let set = self.index[k + 1][&i];
            let sign = q(if pos % 2 == 0 { 1 } else { -1 });
            if pos == 0 {
                // rewrite from the frame of chart j[0] into that of chart v
                let g = &self.bundle.transitions()[&(v, j[0])];
                for r in 0..g.rows() {
                    let image = g.entry(r, key.gen).mul_monomial(&key.mono, &sign);
                    for (mono, c) in image.terms() {
                        out.push((
                            CechKey {
                                set,
                                gen: r,
                                mono: mono.clone(),
                            },
                            c.clone(),
                        ));
                    }
                }
            } else {
                out.push((
                    CechKey {
                        set,
                        gen: key.gen,
                        mono: key.mono.clone(),
                    },
                    sign,
                ));
            }
        }
        out
    }

    fn inside(&self, k: usize, key: &CechKey, bound: i32) -> bool {
        self.subsets[k][key.set]
            .iter()
            .all(|&v| key.mono.xexp()[v] >= -bound)
    }

    /// `δ_k` on the given basis; rows indexed on the fly. With `keep`, only
    /// target coordinates accepted by it are kept.
    fn delta_matrix(
        &self,
        k: usize,
        basis: &[CechKey],
        keep: impl Fn(&CechKey) -> bool,
    ) -> SparseMatrix {
        let mut rows: HashMap<CechKey, usize> = HashMap::new();
        let mut cols = Vec::with_capacity(basis.len());
        for b in basis {
            let col: Vec<_> = self
                .delta(k, b)
                .into_iter()
                .filter(|(key, _)| keep(key))
                .map(|(key, c)| {
                    let next = rows.len();
                    (*rows.entry(key).or_insert(next), c)
                })
                .collect();
            cols.push(col);
        }
        let mut m = SparseMatrix::new(rows.len());
        for c in cols {
            m.push_col(c);
        }
        m
    }

    /// `h^k_L` for one parity, `k ≥ 1`.
    fn truncated(&self, k: usize, t: i64, bound: i32, parity: u8) -> u64 {
        let n = self.space().n;
        let ck = self.basis(k, t, bound, parity);
        let rank_out = if k < n {
            self.delta_matrix(k, &ck, |_| true).rank()
        } else {
            0
        };
        let prev = self.basis(k - 1, t, bound + self.pole, parity);
        let full = self.delta_matrix(k - 1, &prev, |_| true).rank();
        let outside = self
            .delta_matrix(k - 1, &prev, |key| !self.inside(k, key, bound))
            .rank();
        (ck.len() - rank_out - (full - outside)) as u64
    }

    fn truncated_dim(&self, k: usize, t: i64, bound: i32) -> SuperDim {
        SuperDim::new(
            self.truncated(k, t, bound, 0),
            self.truncated(k, t, bound, 1),
        )
    }
}

/// Basis of `H^0(E(t))`, as chart-0 frame coordinates, one parity at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalSections {
    pub twist: i64,
    pub even: Vec<Vec<SuperPoly>>,
    pub odd: Vec<Vec<SuperPoly>>,
}

impl GlobalSections {
    pub fn dim(&self) -> SuperDim {
        SuperDim::new(self.even.len() as u64, self.odd.len() as u64)
    }
}

/// `H^0(E(t))` exactly: chart-0 sections `s` such that `g_i0 s` is regular
/// on every other chart.
pub fn global_sections(bundle: &TransitionBundle, t: i64) -> Result<GlobalSections> {
    let space = bundle.space();
    let nv = space.nvars();
    let frame = bundle.frame();
    let to_chart: Vec<SuperMatrix> = (1..nv)
        .map(|i| bundle.transition(i, 0))
        .collect::<Result<_>>()?;
    let bound = (1..nv)
        .map(|i| bundle.transitions()[&(0, i)].pole_in(0))
        .max()
        .unwrap_or(0)
        .max(0);
    let mut lower = vec![0i32; nv];
    lower[0] = -bound;
    let mut result = GlobalSections {
        twist: t,
        even: Vec::new(),
        odd: Vec::new(),
    };
    for parity in 0..2u8 {
        let mut unknowns: Vec<(usize, Monomial)> = Vec::new();
        for r in 0..frame.len() {
            let p = frame.parity(r);
            for mask in 0u32..(1 << space.m) {
                let odd = mask.count_ones() as i64;
                if (odd as u8 + p) % 2 != parity {
                    continue;
                }
                for e in exponent_vectors(&lower, frame.twist(r) + t - odd) {
                    unknowns.push((r, Monomial::from_parts(&e, mask)));
                }
            }
        }
        let mut rows: HashMap<(usize, usize, Monomial), usize> = HashMap::new();
        let mut m = SparseMatrix::new(0);
        let mut cols = Vec::with_capacity(unknowns.len());
        for (r, mono) in &unknowns {
            let mut col = Vec::new();
            for (ci, g) in to_chart.iter().enumerate() {
                let chart = ci + 1;
                for row in 0..g.rows() {
                    let image = g.entry(row, *r).mul_monomial(mono, &q(1));
                    for (mm, c) in image.terms() {
                        let bad = mm
                            .xexp()
                            .iter()
                            .enumerate()
                            .any(|(v, &e)| v != chart && e < 0);
                        if bad {
                            let next = rows.len();
                            let idx = *rows.entry((chart, row, mm.clone())).or_insert(next);
                            col.push((idx, c.clone()));
                        }
                    }
                }
            }
            cols.push(col);
        }
        m.nrows = rows.len();
        for c in cols {
            m.push_col(c);
        }
        let sections = m
            .kernel()
            .into_iter()
            .map(|v| {
                let mut coords = vec![SuperPoly::zero(); frame.len()];
                for (idx, c) in v {
                    let (r, mono) = &unknowns[idx];
                    coords[*r].add_term(mono.clone(), c);
                }
                coords
            })
            .collect();
        if parity == 0 {
            result.even = sections;
        } else {
            result.odd = sections;
        }
    }
    Ok(result)
}

/// Truncated `h^i(E(t))` at pole window `bound`, without the stability check.
pub fn cech_truncated(bundle: &TransitionBundle, t: i64, i: usize, bound: i64) -> Result<SuperDim> {
    if i == 0 {
        return Ok(global_sections(bundle, t)?.dim());
    }
    if i > bundle.space().n {
        return Ok(SuperDim::default());
    }
    let cech = Cech::new(bundle)?;
    Ok(cech.truncated_dim(i, t, bound as i32))
}

/// `H^i(E(t))` through the Čech complex. `window` defaults to
/// [`default_window`]; the value must agree at `window` and `window + 1`.
pub fn cech_cohomology(
    bundle: &TransitionBundle,
    t: i64,
    i: usize,
    window: Option<i64>,
) -> Result<SuperDim> {
    if i == 0 {
        return Ok(global_sections(bundle, t)?.dim());
    }
    if i > bundle.space().n {
        return Ok(SuperDim::default());
    }
    let w = window.unwrap_or_else(|| default_window(bundle, t));
    let cech = Cech::new(bundle)?;
    let low = cech.truncated_dim(i, t, w as i32);
    let high = cech.truncated_dim(i, t, w as i32 + 1);
    if low != high {
        return Err(Error::NotStabilized {
            degree: i,
            twist: t,
            window: w,
            next: w + 1,
            low: low.to_string(),
            high: high.to_string(),
        });
    }
    Ok(low)
}

/// One Čech complex of `E(t)` whose level `k` allows poles up to
/// `window + k·D`, so that `δ` maps each level into the next.
#[derive(Clone, Debug)]
pub struct CechComplexSlice {
    pub twist: i64,
    pub window: i64,
    pub subsets: Vec<Vec<Vec<usize>>>,
    pub bases: Vec<Vec<CechKey>>,
    /// `boundaries[k] : C^k → C^{k+1}`.
    pub boundaries: Vec<SparseMatrix>,
}

impl CechComplexSlice {
    pub fn build(bundle: &TransitionBundle, t: i64, window: i64) -> Result<Self> {
        let cech = Cech::new(bundle)?;
        let nv = bundle.space().nvars();
        let bases: Vec<Vec<CechKey>> = (0..nv)
            .map(|k| {
                let bound = window as i32 + k as i32 * cech.pole;
                let mut b = cech.basis(k, t, bound, 0);
                b.extend(cech.basis(k, t, bound, 1));
                b
            })
            .collect();
        let mut boundaries = Vec::new();
        for k in 0..nv.saturating_sub(1) {
            let index: HashMap<&CechKey, usize> =
                bases[k + 1].iter().enumerate().map(|(i, b)| (b, i)).collect();
            let mut m = SparseMatrix::new(bases[k + 1].len());
            for b in &bases[k] {
                let col = cech
                    .delta(k, b)
                    .into_iter()
                    .map(|(key, c)| {
                        let row = *index.get(&key).ok_or_else(|| {
                            Error::Invalid(format!("boundary leaves the slice at level {}", k + 1))
                        })?;
                        Ok((row, c))
                    })
                    .collect::<Result<Vec<_>>>()?;
                m.push_col(col);
            }
            boundaries.push(m);
        }
        Ok(Self {
            twist: t,
            window,
            subsets: cech.subsets.clone(),
            bases,
            boundaries,
        })
    }
}

/// `H^i(E(t))` for either presentation.
pub fn bundle_cohomology(bundle: &Bundle, t: i64, i: usize) -> Result<SuperDim> {
    match bundle {
        Bundle::Split(s) => Ok(split_cohomology(s.space, &s.module, t, i)),
        Bundle::Transition(b) => cech_cohomology(b, t, i, None),
    }
}

/// `t ↦ H^i(E(t))` over a window of twists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RaoTable {
    pub degree: usize,
    pub t_min: i64,
    pub t_max: i64,
    pub entries: BTreeMap<i64, SuperDim>,
}

#[derive(Serialize)]
struct RaoRow {
    t: i64,
    even: u64,
    odd: u64,
}

#[derive(Serialize)]
struct RaoJson {
    i: usize,
    rows: Vec<RaoRow>,
}

impl RaoTable {
    pub fn is_zero(&self) -> bool {
        self.entries.values().all(SuperDim::is_zero)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(RaoJson {
            i: self.degree,
            rows: self
                .entries
                .iter()
                .map(|(&t, d)| RaoRow {
                    t,
                    even: d.even,
                    odd: d.odd,
                })
                .collect(),
        })
        .expect("table serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>6}  H^{}", "t", self.degree);
        for (t, d) in &self.entries {
            let _ = writeln!(s, "{t:>6}  {d}");
        }
        s
    }
}

/// Rao table of `E` for degree `i` over `[t_min, t_max]`.
pub fn rao_table(bundle: &Bundle, i: usize, t_min: i64, t_max: i64) -> Result<RaoTable> {
    rao_table_windowed(bundle, i, t_min, t_max, None)
}

/// [`rao_table`] with the Čech pole window pinned instead of the default;
/// a pinned window sends split bundles through the Čech path too.
pub fn rao_table_windowed(
    bundle: &Bundle,
    i: usize,
    t_min: i64,
    t_max: i64,
    pole_window: Option<i64>,
) -> Result<RaoTable> {
    if t_min > t_max {
        return Err(Error::Invalid(format!("empty twist window [{t_min}, {t_max}]")));
    }
    let twists: Vec<i64> = (t_min..=t_max).collect();
    let dims: Vec<Result<SuperDim>> = pool().install(|| {
        twists
            .par_iter()
            .map(|&t| match pole_window {
                None => bundle_cohomology(bundle, t, i),
                Some(w) => cech_cohomology(&bundle.to_transition(), t, i, Some(w)),
            })
            .collect()
    });
    let mut entries = BTreeMap::new();
    for (t, d) in twists.into_iter().zip(dims) {
        entries.insert(t, d?);
    }
    Ok(RaoTable {
        degree: i,
        t_min,
        t_max,
        entries,
    })
}

/// `H^i(Hom(F, E)) = H^i(E ⊗ F^∨)`.
pub fn hom_superdim(f: &Bundle, e: &Bundle, i: usize) -> Result<SuperDim> {
    if f.space() != e.space() {
        return Err(Error::Shape(format!("bundles on {} and {}", f.space(), e.space())));
    }
    match f {
        Bundle::Split(fs) => {
            let mut total = SuperDim::default();
            for &a in &fs.module.even {
                total = total + bundle_cohomology(e, -a, i)?;
            }
            for &b in &fs.module.odd {
                total = total + bundle_cohomology(e, -b, i)?.swap();
            }
            Ok(total)
        }
        Bundle::Transition(ft) => {
            let hom = e.to_transition().tensor(&ft.dual()?)?;
            cech_cohomology(&hom, 0, i, None)
        }
    }
}

/// Outcome of [`les_solve`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LesSolution {
    Solved(Vec<SuperDim>),
    /// Values that are forced; `None` where dimension counting cannot decide.
    Ambiguous(Vec<Option<SuperDim>>),
}

/// Fills in an exact sequence `0 → V_0 → … → V_{N-1} → 0` of even maps.
///
/// `ranks[i]`, if given, is the rank of the map into `V_i`
/// (`ranks.len() == N - 1`, one per inner map `V_{i-1} → V_i`, `i ≥ 1`).
/// Only forced values are filled in.
pub fn les_solve(dims: &[Option<SuperDim>], ranks: &[Option<SuperDim>]) -> Result<LesSolution> {
    let len = dims.len();
    if !ranks.is_empty() && ranks.len() + 1 != len {
        return Err(Error::Shape(format!(
            "{} ranks for a sequence of {len} terms",
            ranks.len()
        )));
    }
    let pick = |d: &SuperDim, p: usize| if p == 0 { d.even } else { d.odd };
    let mut solved: Vec<[Option<u64>; 2]> = vec![[None, None]; len];
    for p in 0..2 {
        let mut d: Vec<Option<i64>> = dims.iter().map(|x| x.map(|v| pick(&v, p) as i64)).collect();
        // r[i] = rank of the map into V_i; r[0] = r[len] = 0
        let mut r: Vec<Option<i64>> = vec![None; len + 1];
        r[0] = Some(0);
        r[len] = Some(0);
        for (i, x) in ranks.iter().enumerate() {
            if let Some(v) = x {
                r[i + 1] = Some(pick(v, p) as i64);
            }
        }
        loop {
            let mut changed = false;
            for i in 0..len {
                if d[i] == Some(0) {
                    for slot in [i, i + 1] {
                        match r[slot] {
                            None => {
                                r[slot] = Some(0);
                                changed = true;
                            }
                            Some(0) => {}
                            Some(v) => {
                                return Err(Error::Inconsistent(format!(
                                    "map of rank {v} touches a zero term at position {i}"
                                )))
                            }
                        }
                    }
                }
                match (d[i], r[i], r[i + 1]) {
                    (None, Some(a), Some(b)) => {
                        d[i] = Some(a + b);
                        changed = true;
                    }
                    (Some(x), None, Some(b)) => {
                        r[i] = Some(x - b);
                        changed = true;
                    }
                    (Some(x), Some(a), None) => {
                        r[i + 1] = Some(x - a);
                        changed = true;
                    }
                    (Some(x), Some(a), Some(b)) if x != a + b => {
                        return Err(Error::Inconsistent(format!(
                            "term {i} has dimension {x} but its maps have ranks {a} and {b}"
                        )))
                    }
                    _ => {}
                }
            }
            if let Some(v) = r.iter().flatten().find(|&&v| v < 0) {
                return Err(Error::Inconsistent(format!("negative rank {v}")));
            }
            if !changed {
                break;
            }
        }
        for i in 0..len {
            solved[i][p] = d[i].map(|v| v as u64);
        }
    }
    let values: Vec<Option<SuperDim>> = solved
        .iter()
        .map(|s| match s {
            [Some(e), Some(o)] => Some(SuperDim::new(*e, *o)),
            _ => None,
        })
        .collect();
    if values.iter().all(Option::is_some) {
        Ok(LesSolution::Solved(values.into_iter().flatten().collect()))
    } else {
        Ok(LesSolution::Ambiguous(values))
    }
}
