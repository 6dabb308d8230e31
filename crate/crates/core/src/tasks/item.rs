//! Atomic item recommendation: the object is a single item and
//! `φ(x, j) = m_j`. Items leave the candidate pool once they have been
//! presented or returned as feedback.

use crate::error::{Error, Result};
use crate::vector::{dot, FeatureVector, Task};

/// The candidate pool for one simulated user.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemContext {
    ids: Vec<u64>,
    items: Vec<FeatureVector>,
    available: Vec<bool>,
    n_available: usize,
}

impl ItemContext {
    pub fn new(ids: Vec<u64>, items: Vec<FeatureVector>) -> Result<Self> {
        if ids.len() != items.len() {
            return Err(Error::config(format!("{} ids for {} items", ids.len(), items.len())));
        }
        if let Some(first) = items.first() {
            if let Some(bad) = items.iter().find(|m| m.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    left: first.dim(),
                    right: bad.dim(),
                });
            }
        }
        let n = items.len();
        Ok(ItemContext {
            ids,
            items,
            available: vec![true; n],
            n_available: n,
        })
    }

    /// Items identified by their position.
    pub fn from_features(items: Vec<FeatureVector>) -> Result<Self> {
        let ids = (0..items.len() as u64).collect();
        Self::new(ids, items)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn id(&self, index: usize) -> u64 {
        self.ids[index]
    }

    pub fn item(&self, index: usize) -> &FeatureVector {
        &self.items[index]
    }

    pub fn is_available(&self, index: usize) -> bool {
        self.available.get(index).copied().unwrap_or(false)
    }

    pub fn available_count(&self) -> usize {
        self.n_available
    }

    /// Indices of available items in canonical (ascending) order.
    pub fn available_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.available
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
    }

    /// Takes an item out of the pool. Removing an absent item is a no-op.
    pub fn remove(&mut self, index: usize) {
        if let Some(slot) = self.available.get_mut(index) {
            if std::mem::replace(slot, false) {
                self.n_available -= 1;
            }
        }
    }

    pub fn max_item_norm(&self) -> f64 {
        self.items.iter().map(FeatureVector::norm).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct ItemTask {
    dim: usize,
    norm_bound: f64,
}

impl ItemTask {
    /// `R` is the largest item feature norm in the pool.
    pub fn new(ctx: &ItemContext) -> Result<Self> {
        let dim = ctx.items.first().map(FeatureVector::dim).ok_or(Error::EmptyCandidates)?;
        Ok(ItemTask {
            dim,
            norm_bound: ctx.max_item_norm(),
        })
    }
}

impl Task for ItemTask {
    type Context = ItemContext;
    type Object = usize;

    fn dimension(&self) -> usize {
        self.dim
    }

    fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    fn features(&self, ctx: &ItemContext, y: &usize) -> Result<FeatureVector> {
        if !ctx.is_available(*y) {
            return Err(Error::Inadmissible(format!("item {y} is not available")));
        }
        Ok(ctx.items[*y].clone())
    }

    fn argmax(&self, w: &FeatureVector, ctx: &ItemContext) -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in ctx.available_indices() {
            let s = dot(w, &ctx.items[j])?;
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((j, s));
            }
        }
        best.map(|(j, _)| j).ok_or(Error::EmptyCandidates)
    }
}
