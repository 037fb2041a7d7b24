//! Exact minimum set cover by branch-and-bound over fixed-width bitsets.

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet { words: vec![0; len.div_ceil(64)] }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Self::new(len);
        for i in 0..len {
            b.insert(i);
        }
        b
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersection_count(&self, other: &BitSet) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn difference_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

/// Indices of a minimum-size subfamily of `sets` whose union is `0..universe`.
///
/// Returns `None` when the family does not cover the universe.
pub(crate) fn min_set_cover(universe: usize, sets: &[BitSet]) -> Option<Vec<usize>> {
    let all = BitSet::full(universe);
    let mut reach = BitSet::new(universe);
    for s in sets {
        reach.union_with(s);
    }
    if !all.is_subset(&reach) {
        return None;
    }
    let containing: Vec<Vec<usize>> = (0..universe)
        .map(|e| (0..sets.len()).filter(|&k| sets[k].contains(e)).collect())
        .collect();
    // union of all sets through each element
    let neighbourhood: Vec<BitSet> = containing
        .iter()
        .map(|ks| {
            let mut b = BitSet::new(universe);
            for &k in ks {
                b.union_with(&sets[k]);
            }
            b
        })
        .collect();

    let mut solver = Solver {
        sets,
        containing: &containing,
        neighbourhood: &neighbourhood,
        best: greedy_cover(&all, sets),
        chosen: Vec::new(),
    };
    solver.search(all);
    let mut best = solver.best;
    best.sort_unstable();
    Some(best)
}

fn greedy_cover(all: &BitSet, sets: &[BitSet]) -> Vec<usize> {
    let mut uncovered = all.clone();
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let (k, _) = sets
            .iter()
            .enumerate()
            .map(|(k, s)| (k, s.intersection_count(&uncovered)))
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .expect("family covers the universe");
        chosen.push(k);
        uncovered.difference_with(&sets[k]);
    }
    chosen
}

struct Solver<'a> {
    sets: &'a [BitSet],
    containing: &'a [Vec<usize>],
    neighbourhood: &'a [BitSet],
    best: Vec<usize>,
    chosen: Vec<usize>,
}

impl Solver<'_> {
    fn search(&mut self, uncovered: BitSet) {
        if uncovered.is_empty() {
            if self.chosen.len() < self.best.len() {
                self.best = self.chosen.clone();
            }
            return;
        }
        if self.chosen.len() + self.lower_bound(&uncovered) >= self.best.len() {
            return;
        }
        let pivot = uncovered
            .iter()
            .min_by_key(|&e| (self.containing[e].len(), e))
            .expect("nonempty");
        let mut options: Vec<(usize, usize)> = self.containing[pivot]
            .iter()
            .map(|&k| (k, self.sets[k].intersection_count(&uncovered)))
            .collect();
        options.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (k, _) in options {
            let mut rest = uncovered.clone();
            rest.difference_with(&self.sets[k]);
            self.chosen.push(k);
            self.search(rest);
            self.chosen.pop();
            if self.chosen.len() + 1 >= self.best.len() {
                return;
            }
        }
    }

    /// Max of a counting bound and a greedy packing of elements no two of
    /// which share a set.
    fn lower_bound(&self, uncovered: &BitSet) -> usize {
        let remaining = uncovered.count();
        let widest = self
            .sets
            .iter()
            .map(|s| s.intersection_count(uncovered))
            .max()
            .unwrap_or(0)
            .max(1);
        let counting = remaining.div_ceil(widest);
        let mut blocked = BitSet::new(self.containing.len());
        let mut elements: Vec<usize> = uncovered.iter().collect();
        elements.sort_by_key(|&e| (self.containing[e].len(), e));
        let mut packing = 0;
        for e in elements {
            if !blocked.contains(e) {
                packing += 1;
                blocked.union_with(&self.neighbourhood[e]);
            }
        }
        counting.max(packing)
    }
}
