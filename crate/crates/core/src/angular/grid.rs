use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// The multi-indices `α ∈ {1, …, k-d+1}^d` with `|α| = k`, stored
/// lexicographically on `(α_1, …, α_{d-1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIndexGrid {
    d: usize,
    k: usize,
    indices: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
}

impl MultiIndexGrid {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Structure(format!("dimension must be at least 2, got {d}")));
        }
        if k < d {
            return Err(Error::Structure(format!("degree parameter k={k} must be at least d={d}")));
        }
        let mut indices = Vec::new();
        let mut prefix = Vec::with_capacity(d);
        fill(d, k, &mut prefix, &mut indices);
        let lookup = indices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
        Ok(Self { d, k, indices, lookup })
    }

    /// Shared, cached grid for `(d, k)`.
    pub fn shared(d: usize, k: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<MultiIndexGrid>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(g) = cache.lock().expect("grid cache poisoned").get(&(d, k)) {
            return Ok(g.clone());
        }
        let g = Arc::new(Self::new(d, k)?);
        cache.lock().expect("grid cache poisoned").insert((d, k), g.clone());
        Ok(g)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn get(&self, i: usize) -> &[usize] {
        &self.indices[i]
    }

    pub fn position(&self, alpha: &[usize]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

fn fill(d: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let used: usize = prefix.iter().sum();
    if prefix.len() == d - 1 {
        let mut a = prefix.clone();
        a.push(k - used);
        out.push(a);
        return;
    }
    // leave at least one unit for each remaining coordinate
    let remaining = d - 1 - prefix.len();
    let max = k - used - remaining;
    for v in 1..=max {
        prefix.push(v);
        fill(d, k, prefix, out);
        prefix.pop();
    }
}

/// `C(n, r)` as an integer.
pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinality_is_binomial() {
        for d in 2..6 {
            for k in d..(d + 9) {
                let g = MultiIndexGrid::new(d, k).unwrap();
                assert_eq!(g.len(), binomial(k - 1, d - 1), "d={d} k={k}");
                for a in g.indices() {
                    assert_eq!(a.iter().sum::<usize>(), k);
                    assert!(a.iter().all(|&v| v >= 1));
                }
            }
        }
    }

    #[test]
    fn lexicographic_order() {
        let g = MultiIndexGrid::new(3, 5).unwrap();
        let heads: Vec<_> = g.indices().iter().map(|a| (a[0], a[1])).collect();
        let mut sorted = heads.clone();
        sorted.sort();
        assert_eq!(heads, sorted);
        assert_eq!(g.get(0), &[1, 1, 3]);
        assert_eq!(g.position(&[2, 2, 1]), Some(4));
    }

    #[test]
    fn rejects_small_degree() {
        assert!(MultiIndexGrid::new(3, 2).is_err());
        assert!(MultiIndexGrid::new(1, 4).is_err());
        assert_eq!(MultiIndexGrid::new(2, 2).unwrap().len(), 1);
    }
}
