//! Exact sparse linear algebra over `Q`.
//!
//! Matrices are stored by columns. Elimination runs separately on every
//! connected component of the row/column incidence graph, sparsest columns
//! first.
//!
//! Each component is first eliminated with word-sized fractions; if any
//! intermediate value leaves `i64` the component is redone with big
//! rationals, so results are exact either way.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::superring::Q;

/// Sparse vector as `(index, value)` pairs sorted by index, no explicit zeros.
pub type SparseVec = Vec<(usize, Q)>;

/// Field elements the eliminator can work with. Operations return `None`
/// on overflow.
trait Scalar: Clone + Sized {
    fn from_q(q: &Q) -> Option<Self>;
    fn to_q(&self) -> Q;
    fn unit() -> Self;
    fn nil(&self) -> bool;
    fn add(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn neg(&self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
}

impl Scalar for Q {
    fn from_q(q: &Q) -> Option<Self> {
        Some(q.clone())
    }
    fn to_q(&self) -> Q {
        self.clone()
    }
    fn unit() -> Self {
        One::one()
    }
    fn nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
}

/// `num / den` in lowest terms with `den > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Small {
    num: i64,
    den: i64,
}

impl Small {
    fn reduce(num: i128, den: i128) -> Option<Self> {
        let g = num.gcd(&den);
        let (mut n, mut d) = if g > 1 { (num / g, den / g) } else { (num, den) };
        if d < 0 {
            n = -n;
            d = -d;
        }
        Some(Self {
            num: i64::try_from(n).ok()?,
            den: i64::try_from(d).ok()?,
        })
    }
}

impl Scalar for Small {
    fn from_q(q: &Q) -> Option<Self> {
        Some(Self {
            num: q.numer().to_i64()?,
            den: q.denom().to_i64()?,
        })
    }
    fn to_q(&self) -> Q {
        Q::new(BigInt::from(self.num), BigInt::from(self.den))
    }
    fn unit() -> Self {
        Self { num: 1, den: 1 }
    }
    fn nil(&self) -> bool {
        self.num == 0
    }
    fn add(&self, o: &Self) -> Option<Self> {
        if self.den == 1 && o.den == 1 {
            return Some(Self {
                num: self.num.checked_add(o.num)?,
                den: 1,
            });
        }
        let (a, b, c, d) = (self.num as i128, self.den as i128, o.num as i128, o.den as i128);
        Self::reduce(a * d + c * b, b * d)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        if self.den == 1 && o.den == 1 {
            return Some(Self {
                num: self.num.checked_mul(o.num)?,
                den: 1,
            });
        }
        Self::reduce(self.num as i128 * o.num as i128, self.den as i128 * o.den as i128)
    }
    fn neg(&self) -> Option<Self> {
        Some(Self {
            num: self.num.checked_neg()?,
            den: self.den,
        })
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if o.num == 0 {
            return None;
        }
        Self::reduce(self.num as i128 * o.den as i128, self.den as i128 * o.num as i128)
    }
}

type Vector<S> = Vec<(usize, S)>;

fn axpy_generic<S: Scalar>(y: &Vector<S>, c: &S, x: &Vector<S>) -> Option<Vector<S>> {
    let mut out = Vec::with_capacity(y.len() + x.len());
    let (mut a, mut b) = (0, 0);
    while a < y.len() || b < x.len() {
        let next = match (y.get(a), x.get(b)) {
            (Some(p), Some(r)) if p.0 == r.0 => {
                a += 1;
                b += 1;
                (p.0, p.1.add(&c.mul(&r.1)?)?)
            }
            (Some(p), Some(r)) if p.0 < r.0 => {
                a += 1;
                p.clone()
            }
            (Some(p), None) => {
                a += 1;
                p.clone()
            }
            (_, Some(r)) => {
                b += 1;
                (r.0, c.mul(&r.1)?)
            }
            (None, None) => unreachable!(),
        };
        if !next.1.nil() {
            out.push(next);
        }
    }
    Some(out)
}

/// `y + c x`.
pub fn axpy(y: &SparseVec, c: &Q, x: &SparseVec) -> SparseVec {
    axpy_generic(y, c, x).expect("rational arithmetic does not overflow")
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub cols: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn new(nrows: usize) -> Self {
        Self {
            nrows,
            cols: Vec::new(),
        }
    }

    /// Appends a column given as unsorted `(row, value)` pairs; repeated rows
    /// are summed.
    pub fn push_col(&mut self, mut entries: Vec<(usize, Q)>) {
        entries.sort_by_key(|e| e.0);
        let mut col: SparseVec = Vec::with_capacity(entries.len());
        for (r, v) in entries {
            debug_assert!(r < self.nrows);
            match col.last_mut() {
                Some(last) if last.0 == r => last.1 += v,
                _ => col.push((r, v)),
            }
        }
        col.retain(|e| !Zero::is_zero(&e.1));
        self.cols.push(col);
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn from_dense(rows: &[Vec<Q>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::new(nrows);
        for c in 0..ncols {
            m.push_col(
                (0..nrows)
                    .filter(|&r| !Zero::is_zero(&rows[r][c]))
                    .map(|r| (r, rows[r][c].clone()))
                    .collect(),
            );
        }
        m
    }

    /// Groups of column indices that share no row with other groups.
    fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.nrows).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for col in &self.cols {
            if let Some(&(first, _)) = col.first() {
                let a = find(&mut parent, first);
                for &(r, _) in &col[1..] {
                    let b = find(&mut parent, r);
                    if a != b {
                        parent[b] = a;
                    }
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for (c, col) in self.cols.iter().enumerate() {
            if let Some(&(first, _)) = col.first() {
                groups.entry(find(&mut parent, first)).or_default().push(c);
            }
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    /// Runs `f` on a component with word-sized fractions, falling back to
    /// big rationals on overflow.
    fn on_component<T>(
        &self,
        cols: &[usize],
        small: impl Fn(&[Vector<Small>]) -> Option<T>,
        big: impl Fn(&[Vector<Q>]) -> Option<T>,
    ) -> T {
        let converted: Option<Vec<Vector<Small>>> = cols
            .iter()
            .map(|&c| {
                self.cols[c]
                    .iter()
                    .map(|(r, v)| Some((*r, Small::from_q(v)?)))
                    .collect()
            })
            .collect();
        if let Some(res) = converted.and_then(|v| small(&v)) {
            return res;
        }
        let exact: Vec<Vector<Q>> = cols.iter().map(|&c| self.cols[c].clone()).collect();
        big(&exact).expect("rational elimination cannot overflow")
    }

    pub fn rank(&self) -> usize {
        fn count<S: Scalar>(cols: &[Vector<S>]) -> Option<usize> {
            let mut order: Vec<&Vector<S>> = cols.iter().collect();
            order.sort_by_key(|c| c.len());
            let mut red = Reducer::<S>::with_weights(cols);
            let mut rank = 0;
            for c in order {
                if red.insert(c.clone(), None)?.is_none() {
                    rank += 1;
                }
            }
            Some(rank)
        }
        self.components()
            .into_iter()
            .map(|cols| self.on_component(&cols, count::<Small>, count::<Q>))
            .sum()
    }

    /// Basis of `{v : M v = 0}` as sparse vectors over column indices.
    pub fn kernel(&self) -> Vec<SparseVec> {
        fn null<S: Scalar>(cols: &[Vector<S>]) -> Option<Vec<SparseVec>> {
            let mut red = Reducer::<S>::with_weights(cols);
            let mut out = Vec::new();
            for (k, c) in cols.iter().enumerate() {
                if let Some(combo) = red.insert(c.clone(), Some(vec![(k, S::unit())]))? {
                    out.push(combo.iter().map(|(i, v)| (*i, v.to_q())).collect());
                }
            }
            Some(out)
        }
        let mut out = Vec::new();
        for (c, col) in self.cols.iter().enumerate() {
            if col.is_empty() {
                out.push(vec![(c, Q::one())]);
            }
        }
        for cols in self.components() {
            let local: Vec<SparseVec> = self.on_component(&cols, null::<Small>, null::<Q>);
            for v in local {
                out.push(v.into_iter().map(|(k, x)| (cols[k], x)).collect());
            }
        }
        for v in &mut out {
            v.sort_by_key(|e| e.0);
        }
        out.sort_by_key(|v| v.last().map(|e| e.0));
        out
    }

    /// Some `x` with `M x = b`, or `None` when `b` is outside the image.
    pub fn solve(&self, b: &SparseVec) -> Option<SparseVec> {
        let mut red = Reducer::<Q>::with_weights(&self.cols);
        for (c, col) in self.cols.iter().enumerate() {
            red.insert(col.clone(), Some(vec![(c, Q::one())]))?;
        }
        let (rest, combo) = red.reduce(b.clone(), Some(Vec::new()))?;
        if rest.is_empty() {
            // b - M combo = 0
            combo.map(|x| x.into_iter().map(|(i, v)| (i, -v)).collect())
        } else {
            None
        }
    }
}

/// Incremental elimination, optionally tracking the combination of inserted
/// columns that produced each reduced vector.
///
/// Pivot `k` owns row `rows[k]` and has no entry in the rows of earlier
/// pivots, so eliminating pivots in creation order terminates. New pivot
/// rows are chosen by the smallest weight (nonzero count in the input).
struct Reducer<S> {
    owner: HashMap<usize, usize>,
    rows: Vec<usize>,
    vecs: Vec<(Vector<S>, Option<Vector<S>>)>,
    weight: HashMap<usize, u32>,
}

impl<S> Default for Reducer<S> {
    fn default() -> Self {
        Self {
            owner: HashMap::new(),
            rows: Vec::new(),
            vecs: Vec::new(),
            weight: HashMap::new(),
        }
    }
}

type Reduced<S> = (Vector<S>, Option<Vector<S>>);

impl<S: Scalar> Reducer<S> {
    fn with_weights<'a>(cols: impl IntoIterator<Item = &'a Vector<S>>) -> Self
    where
        S: 'a,
    {
        let mut weight: HashMap<usize, u32> = HashMap::new();
        for c in cols {
            for (r, _) in c {
                *weight.entry(*r).or_default() += 1;
            }
        }
        Self {
            weight,
            ..Self::default()
        }
    }

    fn reduce(&self, mut v: Vector<S>, mut track: Option<Vector<S>>) -> Option<Reduced<S>> {
        let mut queue: BinaryHeap<Reverse<usize>> = v
            .iter()
            .filter_map(|(r, _)| self.owner.get(r).map(|&k| Reverse(k)))
            .collect();
        let mut last = None;
        while let Some(Reverse(k)) = queue.pop() {
            if last == Some(k) {
                continue;
            }
            last = Some(k);
            let row = self.rows[k];
            let Ok(pos) = v.binary_search_by_key(&row, |e| e.0) else {
                continue;
            };
            let (p, ptrack) = &self.vecs[k];
            let pv = &p[p.binary_search_by_key(&row, |e| e.0).expect("pivot owns its row")].1;
            let c = v[pos].1.div(pv)?.neg()?;
            v = axpy_generic(&v, &c, p)?;
            if let (Some(t), Some(pt)) = (track.as_mut(), ptrack) {
                *t = axpy_generic(t, &c, pt)?;
            }
            for (r, _) in p {
                if let Some(&j) = self.owner.get(r) {
                    if j > k {
                        queue.push(Reverse(j));
                    }
                }
            }
        }
        Some((v, track))
    }

    /// Inserts a vector; returns the tracked combination if it reduced to 0.
    /// The outer `None` signals overflow.
    fn insert(&mut self, v: Vector<S>, track: Option<Vector<S>>) -> Option<Option<Vector<S>>> {
        let (v, track) = self.reduce(v, track)?;
        if v.is_empty() {
            return Some(Some(track.unwrap_or_default()));
        }
        let row = v
            .iter()
            .map(|(r, _)| *r)
            .min_by_key(|r| (self.weight.get(r).copied().unwrap_or(0), *r))
            .expect("nonempty");
        self.owner.insert(row, self.vecs.len());
        self.rows.push(row);
        self.vecs.push((v, track));
        Some(None)
    }
}
