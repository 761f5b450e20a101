//! Lazy enumeration of `ℕ₀^d` in non-increasing weight order.
//!
//! The stream is a best-first search over the lattice. Each coordinate's
//! one-dimensional factors `1, w s_1, w s_2, ...` are visited in rank order
//! (descending factor value), so a node's children never outrank it even
//! when `w s_1 > 1`. A child `k + e_l` is only pushed by the parent whose
//! last nonzero rank coordinate is `≤ l`, which gives every node exactly one
//! parent and keeps the frontier free of duplicates.
//!
//! Ties in `λ` are broken by ascending lexicographic order on `k`. Every
//! `λ` is computed by [`WeightModel::lambda`], so equal weights are bitwise
//! equal and tie detection is exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::weights::WeightModel;

/// One emitted wavenumber with its weight.
pub type Entry = (Vec<u32>, f64);

#[derive(Debug, Clone)]
struct Node {
    lambda: f64,
    k: Vec<u32>,
    rank: Vec<u32>,
    // last coordinate with nonzero rank, 0 at the root
    last: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // max-heap: larger λ first, then lexicographically smaller k
    fn cmp(&self, other: &Self) -> Ordering {
        self.lambda
            .total_cmp(&other.lambda)
            .then_with(|| other.k.cmp(&self.k))
    }
}

/// Deterministic stream `k_1, k_2, ...` with `λ_{k_1} ≥ λ_{k_2} ≥ ... > 0`.
///
/// Emitted entries are kept, so positions can be revisited with
/// [`get`](Self::get) without re-running the search.
#[derive(Debug, Clone)]
pub struct WavenumberStream {
    model: WeightModel,
    // per coordinate, number of degrees whose factor exceeds one
    lead: Vec<u32>,
    heap: BinaryHeap<Node>,
    ks: Vec<u32>,
    lambdas: Vec<f64>,
}

impl WavenumberStream {
    /// Fails when some `w_ℓ s_1 > 1` while the order weights are not all
    /// one; the product then loses the monotone structure the search needs.
    pub fn new(model: &WeightModel) -> Result<Self> {
        let d = model.dim();
        let mut lead = vec![0u32; d];
        for (l, slot) in lead.iter_mut().enumerate() {
            let mut j = 0u32;
            while model.factor(l, j + 1) > 1.0 {
                j += 1;
            }
            *slot = j;
        }
        if !model.has_unit_order_weights() && lead.iter().any(|&j| j > 0) {
            return Err(Error::Precondition(
                "w_l s_1 > 1 is only supported with unit order weights".into(),
            ));
        }
        let mut stream = WavenumberStream {
            model: model.clone(),
            lead,
            heap: BinaryHeap::new(),
            ks: Vec::new(),
            lambdas: Vec::new(),
        };
        let root = vec![0u32; d];
        stream.push(root, 0);
        Ok(stream)
    }

    pub fn model(&self) -> &WeightModel {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    fn degree(&self, l: usize, rank: u32) -> u32 {
        let j = self.lead[l];
        match rank.cmp(&j) {
            Ordering::Less => rank + 1,
            Ordering::Equal => 0,
            Ordering::Greater => rank,
        }
    }

    fn push(&mut self, rank: Vec<u32>, last: usize) {
        let k: Vec<u32> = rank
            .iter()
            .enumerate()
            .map(|(l, &r)| self.degree(l, r))
            .collect();
        let lambda = self.model.lambda_unchecked(&k);
        if lambda > 0.0 {
            self.heap.push(Node { lambda, k, rank, last });
        }
    }

    fn advance(&mut self) -> bool {
        let Some(node) = self.heap.pop() else {
            return false;
        };
        for l in node.last..self.dim() {
            let mut rank = node.rank.clone();
            rank[l] += 1;
            self.push(rank, l);
        }
        self.ks.extend_from_slice(&node.k);
        self.lambdas.push(node.lambda);
        true
    }

    /// Makes sure the first `n` entries exist; returns how many do (less
    /// than `n` only when the stream ran out of positive weights).
    pub fn ensure(&mut self, n: usize) -> usize {
        while self.lambdas.len() < n {
            if !self.advance() {
                break;
            }
        }
        self.lambdas.len().min(n)
    }

    /// Number of entries generated so far.
    pub fn emitted(&self) -> usize {
        self.lambdas.len()
    }

    /// Entry at 0-based position `i`, generating as needed.
    pub fn get(&mut self, i: usize) -> Result<(&[u32], f64)> {
        if self.ensure(i + 1) <= i {
            return Err(Error::Exhausted { emitted: self.emitted() });
        }
        let d = self.dim();
        Ok((&self.ks[i * d..(i + 1) * d], self.lambdas[i]))
    }

    /// `λ_{k_{i+1}}`, or 0 past the end of a finite stream.
    pub fn lambda_or_zero(&mut self, i: usize) -> f64 {
        if self.ensure(i + 1) > i {
            self.lambdas[i]
        } else {
            0.0
        }
    }

    /// Weights generated so far, in order.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Wavenumber at a position that has already been generated.
    pub fn wavenumber(&self, i: usize) -> &[u32] {
        let d = self.dim();
        &self.ks[i * d..(i + 1) * d]
    }

    /// Next entry after everything generated so far.
    pub fn next_entry(&mut self) -> Result<Entry> {
        let i = self.emitted();
        let (k, lambda) = self.get(i)?;
        Ok((k.to_vec(), lambda))
    }

    /// The first `n` entries as owned pairs.
    pub fn prefix(&mut self, n: usize) -> Vec<Entry> {
        let m = self.ensure(n);
        (0..m)
            .map(|i| (self.wavenumber(i).to_vec(), self.lambdas[i]))
            .collect()
    }

    /// Writes the first `n` entries as CSV with header `k_1..k_d,lambda`.
    pub fn write_csv<W: Write>(&mut self, n: usize, out: W) -> csv::Result<()> {
        let d = self.dim();
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=d).map(|l| format!("k_{l}")).collect();
        header.push("lambda".into());
        w.write_record(&header)?;
        let m = self.ensure(n);
        for i in 0..m {
            let mut row: Vec<String> = self.wavenumber(i).iter().map(u32::to_string).collect();
            row.push(self.lambdas[i].to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

impl Iterator for WavenumberStream {
    type Item = Entry;

    fn next(&mut self) -> Option<Entry> {
        self.next_entry().ok()
    }
}

/// The `idx`-th point of `{0..=caps[0]} × … × {0..=caps[d-1]}` in
/// lexicographic order.
fn box_point(caps: &[u32], mut idx: usize) -> Vec<u32> {
    let mut k = vec![0u32; caps.len()];
    for (slot, &c) in k.iter_mut().zip(caps).rev() {
        let side = c as usize + 1;
        *slot = (idx % side) as u32;
        idx /= side;
    }
    k
}

fn box_size(caps: &[u32]) -> f64 {
    caps.iter().map(|&c| c as f64 + 1.0).product()
}

/// Sorts the whole box `{0..box_cap}^d` by `(λ desc, k lex asc)` and keeps
/// the first `count` positive entries.
///
/// The prefix is only returned if it is certified: the `count`-th weight
/// must be strictly larger than every weight outside the box, which is
/// bounded by the shell `{0..box_cap+1}^d \ {0..box_cap}^d`.
pub fn brute_force_order(model: &WeightModel, box_cap: u32, count: usize) -> Result<Vec<Entry>> {
    brute_force_order_with(Execution::default(), model, box_cap, count)
}

pub fn brute_force_order_with(
    exec: Execution,
    model: &WeightModel,
    box_cap: u32,
    count: usize,
) -> Result<Vec<Entry>> {
    brute_force_order_in(exec, model, &vec![box_cap; model.dim()], count)
}

/// As [`brute_force_order`] over the box with side `caps[ℓ]` along
/// coordinate `ℓ`. Outside weights are bounded by the faces `k_ℓ = caps[ℓ] + 1`.
pub fn brute_force_order_in(exec: Execution, model: &WeightModel, caps: &[u32], count: usize) -> Result<Vec<Entry>> {
    let d = model.dim();
    if caps.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: caps.len() });
    }
    if caps.contains(&0) {
        return Err(Error::InvalidParameter("box caps must be at least 1".into()));
    }
    if d > 64 {
        return Err(Error::InvalidParameter("brute force supports d ≤ 64".into()));
    }
    let box_cap = caps.iter().copied().max().unwrap_or(1);
    let size = box_size(caps);
    if size > 1e9 {
        return Err(Error::InvalidParameter(format!("box of {size} points is too large")));
    }
    if count as f64 > size {
        return Err(Error::BoxTooSmall { box_cap, count });
    }

    let mut outside = 0.0f64;
    for l in 0..d {
        let mut face = caps.to_vec();
        face[l] = 0;
        let n = box_size(&face) as usize;
        outside = outside.max(exec::max_range(exec, n, |i| {
            let mut k = box_point(&face, i);
            k[l] = caps[l] + 1;
            model.lambda_unchecked(&k)
        }));
    }

    // same factors in the same order as `lambda_unchecked`, so weights agree bitwise
    let tables: Vec<Vec<f64>> = caps
        .iter()
        .enumerate()
        .map(|(l, &c)| (0..=c).map(|k| if k == 0 { 1.0 } else { model.factor(l, k) }).collect())
        .collect();
    // points at or below the outside bound cannot belong to a certified prefix
    let mut entries: Vec<Entry> = exec::filter_map_range(exec, size as usize, |i| {
        let mut idx = i;
        let mut digits = [0u32; 64];
        for (slot, &c) in digits[..d].iter_mut().zip(caps).rev() {
            let side = c as usize + 1;
            *slot = (idx % side) as u32;
            idx /= side;
        }
        let mut acc = 1.0;
        let mut order = 0;
        for (l, &kl) in digits[..d].iter().enumerate() {
            if kl > 0 {
                acc *= tables[l][kl as usize];
                order += 1;
            }
        }
        let lam = model.order_weight(order) * acc;
        (lam > outside).then(|| (digits[..d].to_vec(), lam))
    });
    exec::sort_unstable_by(exec, &mut entries, |a, b| {
        b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
    });

    if entries.len() < count {
        if outside > 0.0 {
            return Err(Error::BoxTooSmall { box_cap, count });
        }
        return Err(Error::Exhausted { emitted: entries.len() });
    }
    entries.truncate(count);
    if let Some(last) = entries.last() {
        if last.1 <= outside {
            return Err(Error::BoxTooSmall { box_cap, count });
        }
    }
    Ok(entries)
}
