//! Truncated signatures of piecewise-linear paths.
//!
//! A [`GradedSignature`] over an alphabet of `d` letters truncated at order
//! `p` stores one dense block per level `k = 0..=p`. Level `k` has `d^k`
//! entries; the entry for the word `(i_1, ..., i_k)` sits at offset
//! `i_1 d^{k-1} + ... + i_k` inside its block (lexicographic order, first
//! letter most significant). Blocks are laid out contiguously, so the
//! flattened vector of an order-`p` signature is a prefix of the flattened
//! vector of any higher order signature of the same path.
//!
//! A linear segment with displacement `Δ` has signature `exp(Δ)`, whose
//! level-`k` block is `Δ^{⊗k}/k!`. The signature of a whole path is the
//! ordered tensor product of its segment signatures (Chen's identity).

use serde::{Deserialize, Serialize};

use super::path::{AugmentedPath, PiecewiseLinearPath};
use crate::error::{Error, Result};

/// Default upper bound on `sig_dim(d, p)` accepted by [`signature`].
pub const DEFAULT_FEATURE_BUDGET: usize = 200_000;

/// Number of words of length at most `order` over `alphabet` letters.
///
/// Overflow is reported rather than wrapped.
pub fn sig_dim(alphabet: usize, order: usize) -> Result<usize> {
    if alphabet == 0 {
        return Err(Error::invalid("alphabet size must be at least 1"));
    }
    let overflow = || Error::Overflow { alphabet, order };
    let mut total: usize = 1;
    let mut level: usize = 1;
    for _ in 0..order {
        level = level.checked_mul(alphabet).ok_or_else(overflow)?;
        total = total.checked_add(level).ok_or_else(overflow)?;
    }
    Ok(total)
}

fn check_budget(alphabet: usize, order: usize, budget: usize) -> Result<usize> {
    let required = sig_dim(alphabet, order)?;
    if required > budget {
        return Err(Error::BudgetExceeded {
            alphabet,
            order,
            required,
            budget,
        });
    }
    Ok(required)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedSignature {
    alphabet: usize,
    order: usize,
    data: Vec<f64>,
}

impl GradedSignature {
    /// Signature of a constant path: `[1], 0, 0, ...`.
    pub fn identity(alphabet: usize, order: usize) -> Result<Self> {
        let len = sig_dim(alphabet, order)?;
        let mut data = vec![0.0; len];
        data[0] = 1.0;
        Ok(Self {
            alphabet,
            order,
            data,
        })
    }

    /// Rebuild from a flattened vector of length `sig_dim(alphabet, order)`.
    pub fn from_flat(alphabet: usize, order: usize, data: Vec<f64>) -> Result<Self> {
        let len = sig_dim(alphabet, order)?;
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: data.len(),
            });
        }
        Ok(Self {
            alphabet,
            order,
            data,
        })
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn level_offset(&self, k: usize) -> usize {
        // sum_{j<k} d^j; cannot overflow because k <= order was validated
        let mut offset = 0;
        let mut size = 1;
        for _ in 0..k {
            offset += size;
            size *= self.alphabet;
        }
        offset
    }

    fn level_size(&self, k: usize) -> usize {
        self.alphabet.pow(k as u32)
    }

    /// Level-`k` block, `d^k` entries.
    pub fn level(&self, k: usize) -> &[f64] {
        assert!(k <= self.order, "level {k} beyond order {}", self.order);
        let start = self.level_offset(k);
        &self.data[start..start + self.level_size(k)]
    }

    fn level_mut(&mut self, k: usize) -> &mut [f64] {
        let start = self.level_offset(k);
        let size = self.level_size(k);
        &mut self.data[start..start + size]
    }

    /// Coefficient of a word of 0-based letters; the empty word gives 1.
    pub fn coefficient(&self, word: &[usize]) -> f64 {
        assert!(word.len() <= self.order);
        let idx = word.iter().fold(0usize, |acc, &i| {
            assert!(i < self.alphabet, "letter {i} outside alphabet");
            acc * self.alphabet + i
        });
        self.level(word.len())[idx]
    }

    /// Flattened coefficients, levels `0..=order` in order.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Euclidean norm of the flattened coefficients.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Drop levels above `order`.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order {
            return Err(Error::invalid(format!(
                "cannot truncate order {} signature to order {order}",
                self.order
            )));
        }
        let len = sig_dim(self.alphabet, order)?;
        Ok(Self {
            alphabet: self.alphabet,
            order,
            data: self.data[..len].to_vec(),
        })
    }

    /// Right-multiply in place by the signature of a linear segment,
    /// `self <- self ⊗ exp(delta)`.
    ///
    /// Level `k` of the product is `Σ_j S_j ⊗ Δ^{⊗(k-j)}/(k-j)!`, evaluated
    /// Horner-style from the top level down so that lower levels are still
    /// the old values when they are read.
    fn extend_by_segment(&mut self, delta: &[f64], scratch: &mut (Vec<f64>, Vec<f64>)) {
        let d = self.alphabet;
        debug_assert_eq!(delta.len(), d);
        for k in (1..=self.order).rev() {
            let (acc, next) = scratch;
            acc.clear();
            acc.extend(delta.iter().map(|x| x / k as f64));
            for m in 1..k {
                for (a, s) in acc.iter_mut().zip(self.level(m)) {
                    *a += s;
                }
                let scale = 1.0 / (k - m) as f64;
                next.clear();
                for &a in acc.iter() {
                    let a = a * scale;
                    next.extend(delta.iter().map(|x| a * x));
                }
                std::mem::swap(acc, next);
            }
            for (s, a) in self.level_mut(k).iter_mut().zip(acc.iter()) {
                *s += a;
            }
        }
    }
}

/// Truncated tensor exponential of a displacement: level `k` is `Δ^{⊗k}/k!`.
pub fn segment_signature(displacement: &[f64], order: usize) -> Result<GradedSignature> {
    let d = displacement.len();
    if d == 0 {
        return Err(Error::invalid("displacement must have at least one coordinate"));
    }
    if displacement.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("displacement contains non-finite entries"));
    }
    let mut data = Vec::with_capacity(sig_dim(d, order)?);
    data.push(1.0);
    let mut prev = vec![1.0];
    for k in 1..=order {
        let inv = 1.0 / k as f64;
        let mut cur = Vec::with_capacity(prev.len() * d);
        for &p in &prev {
            cur.extend(displacement.iter().map(|x| p * x * inv));
        }
        data.extend_from_slice(&cur);
        prev = cur;
    }
    Ok(GradedSignature {
        alphabet: d,
        order,
        data,
    })
}

/// Truncated tensor product `a ⊗ b` (signature of `a`'s path followed by `b`'s).
pub fn chen_concat(a: &GradedSignature, b: &GradedSignature) -> Result<GradedSignature> {
    if a.alphabet != b.alphabet {
        return Err(Error::DimensionMismatch {
            expected: a.alphabet,
            found: b.alphabet,
        });
    }
    if a.order != b.order {
        return Err(Error::invalid(format!(
            "cannot concatenate signatures of orders {} and {}",
            a.order, b.order
        )));
    }
    let mut out = GradedSignature::identity(a.alphabet, a.order)?;
    for k in 1..=a.order {
        let block = out.level_mut(k);
        for j in 0..=k {
            let left = a.level(j);
            let right = b.level(k - j);
            let width = right.len();
            for (i, &l) in left.iter().enumerate() {
                if l == 0.0 {
                    continue;
                }
                let dst = &mut block[i * width..(i + 1) * width];
                for (o, &r) in dst.iter_mut().zip(right) {
                    *o += l * r;
                }
            }
        }
    }
    Ok(out)
}

/// Signature of any piecewise-linear path, refusing orders whose feature
/// count exceeds `budget`.
pub fn path_signature(
    path: &PiecewiseLinearPath,
    order: usize,
    budget: usize,
) -> Result<GradedSignature> {
    check_budget(path.dim(), order, budget)?;
    let mut sig = GradedSignature::identity(path.dim(), order)?;
    let cap = path.dim().pow(order.saturating_sub(1) as u32) * path.dim();
    let mut scratch = (Vec::with_capacity(cap), Vec::with_capacity(cap));
    for delta in path.increments() {
        sig.extend_by_segment(&delta, &mut scratch);
    }
    Ok(sig)
}

/// Signature of a time-augmented path under [`DEFAULT_FEATURE_BUDGET`].
pub fn signature(path: &AugmentedPath, order: usize) -> Result<GradedSignature> {
    path_signature(path.as_path(), order, DEFAULT_FEATURE_BUDGET)
}

/// Signature of a time-augmented path with an explicit feature budget.
pub fn signature_with_budget(
    path: &AugmentedPath,
    order: usize,
    budget: usize,
) -> Result<GradedSignature> {
    path_signature(path.as_path(), order, budget)
}

/// Render a word of 0-based letters in 1-based notation, e.g. `S(3,4)`.
pub fn word_name(word: &[usize]) -> String {
    let letters: Vec<String> = word.iter().map(|i| (i + 1).to_string()).collect();
    format!("S({})", letters.join(","))
}

/// The word stored at a flat index of an order-`order` signature.
pub fn word_at(alphabet: usize, flat_index: usize) -> Vec<usize> {
    let mut level = 0;
    let mut start = 0;
    let mut size = 1;
    while flat_index >= start + size {
        start += size;
        size *= alphabet;
        level += 1;
    }
    let mut rem = flat_index - start;
    let mut word = vec![0; level];
    for slot in word.iter_mut().rev() {
        *slot = rem % alphabet;
        rem /= alphabet;
    }
    word
}
