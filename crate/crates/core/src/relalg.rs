//! Finite binary relations over small event universes.
//!
//! Rows are `u64` bitsets, so a universe holds at most [`MAX_EVENTS`] ids.
//! Every model axiom in the crate is phrased with these operations.

use std::fmt;

use thiserror::Error;

/// Largest universe a [`Relation`] can carry.
pub const MAX_EVENTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelError {
    #[error("universe mismatch: {0} vs {1}")]
    UniverseMismatch(usize, usize),
    #[error("event {0} is a fence and has no location")]
    FenceHasNoLocation(usize),
}

/// A set of event ids, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct EventSet(pub u64);

impl EventSet {
    pub const EMPTY: EventSet = EventSet(0);

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            EventSet(u64::MAX)
        } else {
            EventSet((1u64 << n) - 1)
        }
    }
    pub fn single(i: usize) -> Self {
        EventSet(1u64 << i)
    }
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }
    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }
    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn union(self, o: EventSet) -> Self {
        EventSet(self.0 | o.0)
    }
    pub fn inter(self, o: EventSet) -> Self {
        EventSet(self.0 & o.0)
    }
    pub fn minus(self, o: EventSet) -> Self {
        EventSet(self.0 & !o.0)
    }
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl FromIterator<usize> for EventSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = EventSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Binary relation over `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    n: usize,
    rows: Vec<u64>,
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_EVENTS, "universe of {n} exceeds {MAX_EVENTS}");
        Relation { n, rows: vec![0; n] }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Relation::empty(n);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    /// `[s]`: identity restricted to `s`.
    pub fn identity(n: usize, s: EventSet) -> Self {
        let mut r = Relation::empty(n);
        for i in s.iter().filter(|&i| i < n) {
            r.rows[i] |= 1u64 << i;
        }
        r
    }

    /// `a × b`.
    pub fn cross(n: usize, a: EventSet, b: EventSet) -> Self {
        let mut r = Relation::empty(n);
        let b = b.inter(EventSet::full(n)).0;
        for i in a.iter().filter(|&i| i < n) {
            r.rows[i] = b;
        }
        r
    }

    pub fn universe(&self) -> usize {
        self.n
    }
    pub fn contains(&self, a: usize, b: usize) -> bool {
        a < self.n && self.rows[a] >> b & 1 == 1
    }
    pub fn insert(&mut self, a: usize, b: usize) {
        assert!(a < self.n && b < self.n, "pair ({a},{b}) outside universe {}", self.n);
        self.rows[a] |= 1u64 << b;
    }
    pub fn remove(&mut self, a: usize, b: usize) {
        if a < self.n {
            self.rows[a] &= !(1u64 << b);
        }
    }
    pub fn row(&self, a: usize) -> EventSet {
        EventSet(self.rows[a])
    }
    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }
    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(a, &r)| EventSet(r).iter().map(move |b| (a, b)))
    }
    pub fn domain(&self) -> EventSet {
        EventSet(
            self.rows
                .iter()
                .enumerate()
                .filter(|(_, &r)| r != 0)
                .fold(0, |acc, (i, _)| acc | 1u64 << i),
        )
    }
    pub fn codomain(&self) -> EventSet {
        EventSet(self.rows.iter().fold(0, |acc, &r| acc | r))
    }

    fn check(&self, o: &Relation) -> Result<(), RelError> {
        if self.n == o.n {
            Ok(())
        } else {
            Err(RelError::UniverseMismatch(self.n, o.n))
        }
    }

    pub fn union(&self, o: &Relation) -> Relation {
        debug_assert_eq!(self.n, o.n);
        Relation {
            n: self.n,
            rows: self.rows.iter().zip(&o.rows).map(|(a, b)| a | b).collect(),
        }
    }
    pub fn union_with(&mut self, o: &Relation) {
        debug_assert_eq!(self.n, o.n);
        for (a, b) in self.rows.iter_mut().zip(&o.rows) {
            *a |= b;
        }
    }
    pub fn inter(&self, o: &Relation) -> Relation {
        debug_assert_eq!(self.n, o.n);
        Relation {
            n: self.n,
            rows: self.rows.iter().zip(&o.rows).map(|(a, b)| a & b).collect(),
        }
    }
    pub fn minus(&self, o: &Relation) -> Relation {
        debug_assert_eq!(self.n, o.n);
        Relation {
            n: self.n,
            rows: self.rows.iter().zip(&o.rows).map(|(a, b)| a & !b).collect(),
        }
    }

    /// Checked composition `self;o`.
    pub fn compose(&self, o: &Relation) -> Result<Relation, RelError> {
        self.check(o)?;
        Ok(self.seq(o))
    }

    /// Composition `self;o`; universes must agree.
    pub fn seq(&self, o: &Relation) -> Relation {
        debug_assert_eq!(self.n, o.n);
        let mut out = vec![0u64; self.n];
        for (a, &row) in self.rows.iter().enumerate() {
            let mut acc = 0;
            let mut bits = row;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                acc |= o.rows[b];
            }
            out[a] = acc;
        }
        Relation { n: self.n, rows: out }
    }

    pub fn inverse(&self) -> Relation {
        let mut r = Relation::empty(self.n);
        for (a, b) in self.pairs() {
            r.rows[b] |= 1u64 << a;
        }
        r
    }

    /// `r?` over the whole universe.
    pub fn refl(&self) -> Relation {
        let mut r = self.clone();
        for i in 0..self.n {
            r.rows[i] |= 1u64 << i;
        }
        r
    }

    /// `r⁺`.
    pub fn tclosure(&self) -> Relation {
        let mut rows = self.rows.clone();
        for k in 0..self.n {
            let rk = rows[k];
            let bit = 1u64 << k;
            for row in rows.iter_mut() {
                if *row & bit != 0 {
                    *row |= rk;
                }
            }
        }
        Relation { n: self.n, rows }
    }

    /// `r*`.
    pub fn rtclosure(&self) -> Relation {
        self.tclosure().refl()
    }

    /// `[a];r;[b]`.
    pub fn restrict(&self, a: EventSet, b: EventSet) -> Relation {
        let mut r = Relation::empty(self.n);
        for i in a.iter().filter(|&i| i < self.n) {
            r.rows[i] = self.rows[i] & b.0;
        }
        r
    }
    pub fn restrict_dom(&self, a: EventSet) -> Relation {
        self.restrict(a, EventSet::full(self.n))
    }
    pub fn restrict_cod(&self, b: EventSet) -> Relation {
        self.restrict(EventSet::full(self.n), b)
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.n).all(|i| self.rows[i] >> i & 1 == 0)
    }

    pub fn is_acyclic(&self) -> bool {
        // peel off sinks until nothing changes
        let mut live = EventSet::full(self.n).0;
        loop {
            let mut changed = false;
            let mut bits = live;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if self.rows[i] & live == 0 {
                    live &= !(1u64 << i);
                    changed = true;
                }
            }
            if live == 0 {
                return true;
            }
            if !changed {
                return false;
            }
        }
    }

    /// Some cycle as a node list `[v0, v1, .., vk]` with `(vk, v0)` in the relation.
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        for i in 0..self.n {
            if self.rows[i] >> i & 1 == 1 {
                return Some(vec![i]);
            }
        }
        let mut color = vec![0u8; self.n];
        let mut stack: Vec<usize> = Vec::new();
        fn dfs(r: &Relation, v: usize, color: &mut [u8], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
            color[v] = 1;
            stack.push(v);
            for w in r.row(v).iter() {
                if color[w] == 1 {
                    let pos = stack.iter().position(|&x| x == w).unwrap();
                    return Some(stack[pos..].to_vec());
                }
                if color[w] == 0 {
                    if let Some(c) = dfs(r, w, color, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            color[v] = 2;
            None
        }
        for i in 0..self.n {
            if color[i] == 0 {
                if let Some(c) = dfs(self, i, &mut color, &mut stack) {
                    return Some(c);
                }
            }
        }
        None
    }

    /// Pairs whose endpoints share a location.
    pub fn sameloc(&self, loc_of: &[Option<u32>]) -> Result<Relation, RelError> {
        self.split_loc(loc_of, true)
    }

    /// Pairs whose endpoints have different locations.
    pub fn diffloc(&self, loc_of: &[Option<u32>]) -> Result<Relation, RelError> {
        self.split_loc(loc_of, false)
    }

    fn split_loc(&self, loc_of: &[Option<u32>], same: bool) -> Result<Relation, RelError> {
        let mut r = Relation::empty(self.n);
        for (a, b) in self.pairs() {
            let la = loc_of.get(a).copied().flatten().ok_or(RelError::FenceHasNoLocation(a))?;
            let lb = loc_of.get(b).copied().flatten().ok_or(RelError::FenceHasNoLocation(b))?;
            if (la == lb) == same {
                r.insert(a, b);
            }
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(n: usize, p: &[(usize, usize)]) -> Relation {
        Relation::from_pairs(n, p.iter().copied())
    }

    fn arb_rel(n: usize) -> impl Strategy<Value = Relation> {
        proptest::collection::vec((0..n, 0..n), 0..(n * 2)).prop_map(move |v| Relation::from_pairs(n, v))
    }

    fn naive_compose(r: &Relation, s: &Relation) -> Relation {
        let n = r.universe();
        let mut o = Relation::empty(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if r.contains(a, b) && s.contains(b, c) {
                        o.insert(a, c);
                    }
                }
            }
        }
        o
    }

    fn floyd(r: &Relation) -> Relation {
        let n = r.universe();
        let mut m = vec![vec![false; n]; n];
        for (a, b) in r.pairs() {
            m[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if m[i][k] && m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
        let mut o = Relation::empty(n);
        for i in 0..n {
            for j in 0..n {
                if m[i][j] {
                    o.insert(i, j);
                }
            }
        }
        o
    }

    fn dfs_has_cycle(r: &Relation) -> bool {
        let n = r.universe();
        (0..n).any(|s| {
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = r.row(s).iter().collect();
            while let Some(v) = stack.pop() {
                if v == s {
                    return true;
                }
                if !seen[v] {
                    seen[v] = true;
                    stack.extend(r.row(v).iter());
                }
            }
            false
        })
    }

    #[test]
    fn compose_basic() {
        assert_eq!(rel(3, &[(0, 1)]).compose(&rel(3, &[(1, 2)])).unwrap(), rel(3, &[(0, 2)]));
        assert!(rel(3, &[(0, 1)]).seq(&Relation::empty(3)).is_empty());
        assert_eq!(
            rel(3, &[]).compose(&rel(4, &[])),
            Err(RelError::UniverseMismatch(3, 4))
        );
    }

    #[test]
    fn closure_basic() {
        let r = rel(3, &[(0, 1), (1, 2)]);
        assert!(r.tclosure().contains(0, 2));
        let t = r.tclosure();
        assert_eq!(t.tclosure(), t);
        assert!(r.rtclosure().contains(1, 1));
        assert_eq!(r.inverse(), rel(3, &[(1, 0), (2, 1)]));
    }

    #[test]
    fn restrict_basic() {
        let r = rel(2, &[(0, 1)]);
        let w = EventSet::single(0);
        let rd = EventSet::single(1);
        assert_eq!(r.restrict(w, rd), r);
        assert!(r.restrict(rd, rd).is_empty());
    }

    #[test]
    fn acyclic_basic() {
        assert!(rel(3, &[(0, 1), (1, 2)]).is_acyclic());
        assert!(!rel(3, &[(0, 1), (1, 0)]).is_acyclic());
        assert_eq!(rel(3, &[(0, 1), (1, 0)]).find_cycle().map(|c| c.len()), Some(2));
        assert!(!rel(2, &[(1, 1)]).is_irreflexive());
    }

    #[test]
    fn loc_split() {
        let locs = vec![Some(0), Some(0), Some(1), None];
        let rf = rel(4, &[(0, 1)]);
        assert_eq!(rf.sameloc(&locs).unwrap(), rf);
        assert!(rf.diffloc(&locs).unwrap().is_empty());
        let mixed = rel(4, &[(0, 1), (0, 2), (2, 1)]);
        assert_eq!(mixed.diffloc(&locs).unwrap(), rel(4, &[(0, 2), (2, 1)]));
        assert_eq!(rel(4, &[(0, 3)]).sameloc(&locs), Err(RelError::FenceHasNoLocation(3)));
    }

    proptest! {
        #[test]
        fn compose_matches_triple_loop(r in arb_rel(6), s in arb_rel(6)) {
            prop_assert_eq!(r.seq(&s), naive_compose(&r, &s));
        }

        #[test]
        fn compose_associative(r in arb_rel(8), s in arb_rel(8), t in arb_rel(8)) {
            prop_assert_eq!(r.seq(&s).seq(&t), r.seq(&s.seq(&t)));
        }

        #[test]
        fn closure_matches_floyd(r in arb_rel(10)) {
            let t = r.tclosure();
            prop_assert_eq!(&t, &floyd(&r));
            prop_assert_eq!(t.tclosure(), t);
        }

        #[test]
        fn acyclic_matches_dfs(r in arb_rel(10)) {
            prop_assert_eq!(r.is_acyclic(), !dfs_has_cycle(&r));
            prop_assert_eq!(r.is_acyclic(), r.tclosure().is_irreflexive());
            if let Some(c) = r.find_cycle() {
                for k in 0..c.len() {
                    prop_assert!(r.contains(c[k], c[(k + 1) % c.len()]));
                }
            } else {
                prop_assert!(r.is_acyclic());
            }
        }

        #[test]
        fn restrict_matches_filter(r in arb_rel(10), a in 0u64..1024, b in 0u64..1024) {
            let (a, b) = (EventSet(a), EventSet(b));
            let want = Relation::from_pairs(10, r.pairs().filter(|&(x, y)| a.contains(x) && b.contains(y)));
            prop_assert_eq!(r.restrict(a, b), want.clone());
            prop_assert_eq!(Relation::identity(10, a).seq(&r).seq(&Relation::identity(10, b)), want);
        }

        #[test]
        fn restrict_distributes_over_union(r in arb_rel(10), s in arb_rel(10), a in 0u64..1024, b in 0u64..1024) {
            let (a, b) = (EventSet(a), EventSet(b));
            prop_assert_eq!(r.union(&s).restrict(a, b), r.restrict(a, b).union(&s.restrict(a, b)));
        }
    }
}
