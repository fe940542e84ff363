use crate::group::{Elem, Group};
use indexmap::IndexSet;
use rustc_hash::{FxBuildHasher, FxHashSet};
use serde_json::Value;

/// Finite set of elements in canonical (lexicographic) order with O(1) lookup.
#[derive(Clone, Debug, Default)]
pub struct ElementSet {
    items: IndexSet<Elem, FxBuildHasher>,
}

impl PartialEq for ElementSet {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().zip(other.iter()).all(|(a, b)| a == b)
    }
}

impl Eq for ElementSet {}

impl FromIterator<Elem> for ElementSet {
    fn from_iter<I: IntoIterator<Item = Elem>>(iter: I) -> Self {
        let mut v: Vec<Elem> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self::from_sorted(v)
    }
}

impl ElementSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Caller guarantees `v` is strictly increasing.
    pub fn from_sorted(v: Vec<Elem>) -> Self {
        let mut items = IndexSet::with_capacity_and_hasher(v.len(), FxBuildHasher);
        items.extend(v);
        Self { items }
    }

    pub fn from_hashset(s: FxHashSet<Elem>) -> Self {
        let mut v: Vec<Elem> = s.into_iter().collect();
        v.sort_unstable();
        Self::from_sorted(v)
    }

    pub fn singleton(e: Elem) -> Self {
        Self::from_sorted(vec![e])
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, e: &[i64]) -> bool {
        self.items.contains(e)
    }

    pub fn index_of(&self, e: &[i64]) -> Option<usize> {
        self.items.get_index_of(e)
    }

    pub fn get(&self, i: usize) -> &Elem {
        &self.items[i]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &Elem> + '_ {
        self.items.iter()
    }

    pub fn to_vec(&self) -> Vec<Elem> {
        self.items.iter().cloned().collect()
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.len() <= other.len() && self.iter().all(|e| other.contains(e))
    }

    /// First element of `self` missing from `other`.
    pub fn first_missing(&self, other: &ElementSet) -> Option<&Elem> {
        self.iter().find(|e| !other.contains(e))
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        self.iter().chain(other.iter()).cloned().collect()
    }

    pub fn intersection(&self, other: &ElementSet) -> ElementSet {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        ElementSet::from_sorted(small.iter().filter(|e| big.contains(e)).cloned().collect())
    }

    pub fn difference(&self, other: &ElementSet) -> ElementSet {
        ElementSet::from_sorted(self.iter().filter(|e| !other.contains(e)).cloned().collect())
    }

    pub fn filter(&self, mut keep: impl FnMut(&Elem) -> bool) -> ElementSet {
        ElementSet::from_sorted(self.iter().filter(|e| keep(e)).cloned().collect())
    }

    pub fn to_json(&self, g: &Group) -> Value {
        Value::Array(self.iter().map(|e| g.elem_to_json(e)).collect())
    }
}
