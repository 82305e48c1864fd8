//! Set partitions of `{1, …, d}`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest dimension for which exact partition sums are evaluated.
pub const D_MAX: usize = 8;

/// A set partition; blocks hold 0-based coordinates, are sorted internally and
/// ordered by their minimum element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Canonicalizes and checks that `blocks` is a disjoint cover of `0..d`.
    pub fn new(d: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; d];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::Structure("empty block".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i >= d || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Structure(format!("index {} repeated or out of range", i + 1)));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Structure("blocks do not cover every coordinate".into()));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Each block as a bitmask over coordinates.
    pub fn masks(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.iter().fold(0, |m, &i| m | (1 << i))).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, b) in self.blocks.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            let inner: Vec<String> = b.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "{{{}}}", inner.join(","))?;
        }
        write!(f, "}}")
    }
}

/// Bitmask of a 0-based index set.
pub fn subset_mask(indices: &[usize]) -> usize {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

pub fn bell_number(d: usize) -> u64 {
    // Bell triangle
    let mut row = vec![1u64];
    for _ in 1..=d {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last + x);
        }
        row = next;
    }
    row[0]
}

fn generate(d: usize) -> Vec<Partition> {
    // restricted growth strings, emitted in reverse lexicographic order so
    // that the partition into singletons comes first
    let mut out = Vec::new();
    let mut rgs = vec![0usize; d];
    fn rec(i: usize, max: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == rgs.len() {
            out.push(rgs.clone());
            return;
        }
        for v in (0..=max + 1).rev() {
            rgs[i] = v;
            rec(i + 1, max.max(v), rgs, out);
        }
    }
    let mut strings = Vec::new();
    if d > 0 {
        rgs[0] = 0;
        rec(1, 0, &mut rgs, &mut strings);
    }
    for s in strings {
        let nblocks = s.iter().max().unwrap() + 1;
        let mut blocks = vec![Vec::new(); nblocks];
        for (i, &b) in s.iter().enumerate() {
            blocks[b].push(i);
        }
        out.push(Partition { blocks });
    }
    out
}

/// All `Bell(d)` partitions of `{1..d}` in canonical order, computed once per
/// dimension and shared.
pub fn enumerate_partitions(d: usize) -> Result<Arc<Vec<Partition>>> {
    if d < 2 {
        return Err(Error::Structure(format!("dimension must be at least 2, got {d}")));
    }
    if d > D_MAX {
        return Err(Error::Capability(format!(
            "exact partition sums are limited to d <= {D_MAX} (Bell({d}) = {} terms)",
            bell_number(d)
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Partition>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("partition cache poisoned");
    Ok(guard.entry(d).or_insert_with(|| Arc::new(generate(d))).clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_dimensions() {
        let p2 = enumerate_partitions(2).unwrap();
        assert_eq!(p2.len(), 2);
        assert_eq!(p2[0].to_string(), "{{1},{2}}");
        assert_eq!(p2[1].to_string(), "{{1,2}}");
        assert_eq!(enumerate_partitions(3).unwrap().len(), 5);
        assert_eq!(enumerate_partitions(5).unwrap().len(), 52);
    }

    #[test]
    fn counts_match_bell_recurrence() {
        // B(n+1) = Σ C(n, j) B(j)
        let mut bell = vec![1u64];
        for n in 0..8 {
            let next = (0..=n).map(|j| crate::angular::binomial(n, j) as u64 * bell[j]).sum();
            bell.push(next);
        }
        for d in 2..=D_MAX {
            assert_eq!(enumerate_partitions(d).unwrap().len() as u64, bell[d]);
            assert_eq!(bell_number(d), bell[d]);
        }
    }

    #[test]
    fn partitions_are_distinct_canonical_covers() {
        let ps = enumerate_partitions(5).unwrap();
        let set: std::collections::HashSet<_> = ps.iter().collect();
        assert_eq!(set.len(), ps.len());
        for p in ps.iter() {
            let re = Partition::new(5, p.blocks().to_vec()).unwrap();
            assert_eq!(&re, p);
            assert_eq!(p.masks().iter().fold(0, |a, m| a | m), 0b11111);
        }
    }

    #[test]
    fn capability_limit() {
        assert!(matches!(enumerate_partitions(9), Err(Error::Capability(_))));
        assert!(Partition::new(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(Partition::new(3, vec![vec![0, 1]]).is_err());
    }
}
