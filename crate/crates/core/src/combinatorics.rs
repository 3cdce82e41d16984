//! Set partitions and subsets of the index set `{1, …, n}`.
//!
//! [`partitions`] builds Π_{n} from Π_{n-1} by inserting the new element
//! either as a singleton block or into each existing block in turn, the same
//! recursion that relates Stirling numbers of the second kind to Bell numbers.

use std::fmt;

use thiserror::Error;

/// Largest `n` accepted by [`partitions`] (Bell(12) = 4 213 597).
pub const MAX_PARTITION_SIZE: usize = 12;

/// Largest `n` for which [`bell`] and [`stirling2`] fit in a `u64`.
pub const MAX_COUNT_ARGUMENT: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CombinatoricsError {
    #[error("partitions of {n} elements exceed the configured maximum of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
}

/// A subset of `{1, …, ground_size}` with sorted, distinct elements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSubset {
    elements: Vec<usize>,
    ground_size: usize,
}

impl IndexSubset {
    /// Builds a subset, sorting and checking the elements.
    pub fn new(mut elements: Vec<usize>, ground_size: usize) -> Result<Self, CombinatoricsError> {
        elements.sort_unstable();
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(CombinatoricsError::OutOfRange("duplicate element".into()));
        }
        if let Some(&e) = elements.iter().find(|&&e| e == 0 || e > ground_size) {
            return Err(CombinatoricsError::OutOfRange(format!(
                "element {e} not in 1..={ground_size}"
            )));
        }
        Ok(IndexSubset {
            elements,
            ground_size,
        })
    }

    pub fn empty(ground_size: usize) -> Self {
        IndexSubset {
            elements: Vec::new(),
            ground_size,
        }
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.elements.binary_search(&i).is_ok()
    }
}

impl fmt::Display for IndexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// `{1..n} \ s`.
pub fn complement(s: &IndexSubset) -> IndexSubset {
    IndexSubset {
        elements: (1..=s.ground_size).filter(|&i| !s.contains(i)).collect(),
        ground_size: s.ground_size,
    }
}

/// A partition of `{1, …, n}` in canonical form: blocks ordered by their
/// smallest element, elements sorted within each block.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Partition {
    blocks: Vec<IndexSubset>,
    ground_size: usize,
}

impl Partition {
    /// Builds a partition from arbitrary blocks, validating and canonicalizing.
    pub fn from_blocks(blocks: Vec<Vec<usize>>, ground_size: usize) -> Result<Self, CombinatoricsError> {
        let mut subsets = blocks
            .into_iter()
            .map(|b| {
                if b.is_empty() {
                    Err(CombinatoricsError::OutOfRange("empty block".into()))
                } else {
                    IndexSubset::new(b, ground_size)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        subsets.sort_by_key(|b| b.elements[0]);
        let mut all: Vec<usize> = subsets.iter().flat_map(|b| b.elements.iter().copied()).collect();
        all.sort_unstable();
        if all != (1..=ground_size).collect::<Vec<_>>() {
            return Err(CombinatoricsError::OutOfRange(
                "blocks must be disjoint and cover the index set".into(),
            ));
        }
        Ok(Partition {
            blocks: subsets,
            ground_size,
        })
    }

    pub fn blocks(&self) -> &[IndexSubset] {
        &self.blocks
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    /// Number of blocks, `|π|`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Sizes of the blocks in canonical order.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(IndexSubset::len).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("}")
    }
}

/// All partitions of `{1, …, n}`, at most [`MAX_PARTITION_SIZE`] elements.
pub fn partitions(n: usize) -> Result<Vec<Partition>, CombinatoricsError> {
    partitions_with_limit(n, MAX_PARTITION_SIZE)
}

/// As [`partitions`] with an explicit size cap.
pub fn partitions_with_limit(n: usize, max: usize) -> Result<Vec<Partition>, CombinatoricsError> {
    if n > max {
        return Err(CombinatoricsError::TooLarge { n, max });
    }
    let mut current = vec![Partition {
        blocks: Vec::new(),
        ground_size: 0,
    }];
    for next in 1..=n {
        let mut grown = Vec::with_capacity(current.len() * (current.len().min(next) + 1));
        for pi in &current {
            // ν ∪ {next} for each block ν; `next` is the new maximum so blocks stay sorted
            for k in 0..pi.blocks.len() {
                let mut blocks = pi.blocks.clone();
                blocks[k].elements.push(next);
                grown.push(blocks);
            }
            // π ∪ {{next}}; its minimum exceeds every other block's minimum
            let mut blocks = pi.blocks.clone();
            blocks.push(IndexSubset {
                elements: vec![next],
                ground_size: next,
            });
            grown.push(blocks);
        }
        current = grown
            .into_iter()
            .map(|mut blocks| {
                for b in &mut blocks {
                    b.ground_size = next;
                }
                Partition {
                    blocks,
                    ground_size: next,
                }
            })
            .collect();
    }
    Ok(current)
}

/// All 2^n subsets of `{1, …, n}`, ordered by size and then lexicographically.
pub fn subsets(n: usize) -> Vec<IndexSubset> {
    let mut out = Vec::with_capacity(1usize << n.min(63));
    for size in 0..=n {
        let mut combo: Vec<usize> = (1..=size).collect();
        loop {
            out.push(IndexSubset {
                elements: combo.clone(),
                ground_size: n,
            });
            // advance to the next size-combination in lexicographic order
            let Some(i) = (0..size).rev().find(|&i| combo[i] < n - (size - 1 - i)) else {
                break;
            };
            combo[i] += 1;
            for j in i + 1..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    out
}

/// Stirling number of the second kind `S(n, k)`, `0 <= k <= n <= 25`.
pub fn stirling2(n: usize, k: usize) -> Result<u64, CombinatoricsError> {
    if n > MAX_COUNT_ARGUMENT || k > n {
        return Err(CombinatoricsError::OutOfRange(format!(
            "stirling2({n}, {k}) requires 0 <= k <= n <= {MAX_COUNT_ARGUMENT}"
        )));
    }
    Ok(stirling_row(n)[k])
}

/// Bell number `B(n) = Σ_k S(n, k)`, `n <= 25`.
pub fn bell(n: usize) -> Result<u64, CombinatoricsError> {
    if n > MAX_COUNT_ARGUMENT {
        return Err(CombinatoricsError::OutOfRange(format!(
            "bell({n}) requires n <= {MAX_COUNT_ARGUMENT}"
        )));
    }
    Ok(stirling_row(n).iter().sum())
}

// S(n, k) = k S(n-1, k) + S(n-1, k-1)
fn stirling_row(n: usize) -> Vec<u64> {
    let mut row = vec![1u64];
    for m in 1..=n {
        let mut next = vec![0u64; m + 1];
        for k in 1..=m {
            let carry = if k < row.len() { k as u64 * row[k] } else { 0 };
            next[k] = carry + row[k - 1];
        }
        row = next;
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// Independent oracle: assign every element a block label in `0..n` and
    /// keep each distinct induced partition.
    fn brute_force(n: usize) -> BTreeSet<Vec<Vec<usize>>> {
        let mut out = BTreeSet::new();
        if n == 0 {
            out.insert(Vec::new());
            return out;
        }
        let total = n.pow(n as u32);
        for code in 0..total {
            let mut c = code;
            let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n];
            for elem in 1..=n {
                blocks[c % n].push(elem);
                c /= n;
            }
            let mut blocks: Vec<Vec<usize>> = blocks.into_iter().filter(|b| !b.is_empty()).collect();
            blocks.sort();
            out.insert(blocks);
        }
        out
    }

    fn as_sets(ps: &[Partition]) -> BTreeSet<Vec<Vec<usize>>> {
        ps.iter()
            .map(|p| p.blocks().iter().map(|b| b.elements().to_vec()).collect())
            .collect()
    }

    #[test]
    fn partitions_of_small_sets() {
        let p1 = partitions(1).unwrap();
        assert_eq!(p1.len(), 1);
        assert_eq!(p1[0].to_string(), "{{1}}");
        let p3: Vec<String> = partitions(3).unwrap().iter().map(|p| p.to_string()).collect();
        assert_eq!(
            p3,
            ["{{1,2,3}}", "{{1,2},{3}}", "{{1,3},{2}}", "{{1},{2,3}}", "{{1},{2},{3}}"]
        );
        assert_eq!(partitions(4).unwrap().len(), 15);
        let p0 = partitions(0).unwrap();
        assert_eq!(p0.len(), 1);
        assert!(p0[0].is_empty());
    }

    #[test]
    fn recursion_matches_brute_force() {
        for n in 0..=7 {
            let ps = partitions(n).unwrap();
            let set = as_sets(&ps);
            assert_eq!(set.len(), ps.len(), "duplicates for n = {n}");
            assert_eq!(set, brute_force(n), "n = {n}");
        }
    }

    #[test]
    fn partitions_satisfy_invariants() {
        for n in 0..=8 {
            for p in partitions(n).unwrap() {
                let blocks: Vec<Vec<usize>> = p.blocks().iter().map(|b| b.elements().to_vec()).collect();
                let rebuilt = Partition::from_blocks(blocks, n).unwrap();
                assert_eq!(rebuilt, p);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            partitions(13),
            Err(CombinatoricsError::TooLarge { n: 13, max: 12 })
        );
        assert!(partitions_with_limit(3, 2).is_err());
    }

    #[test]
    fn subsets_in_canonical_order() {
        let s0 = subsets(0);
        assert_eq!(s0.len(), 1);
        assert!(s0[0].is_empty());
        let s2: Vec<String> = subsets(2).iter().map(|s| s.to_string()).collect();
        assert_eq!(s2, ["{}", "{1}", "{2}", "{1,2}"]);
        assert_eq!(subsets(5).len(), 32);
        let s3: Vec<String> = subsets(3).iter().map(|s| s.to_string()).collect();
        assert_eq!(s3, ["{}", "{1}", "{2}", "{3}", "{1,2}", "{1,3}", "{2,3}", "{1,2,3}"]);
    }

    #[test]
    fn complements() {
        let s = IndexSubset::new(vec![3, 1], 4).unwrap();
        assert_eq!(complement(&s).elements(), [2, 4]);
        assert_eq!(complement(&IndexSubset::empty(3)).elements(), [1, 2, 3]);
        let full = IndexSubset::new(vec![1, 2], 2).unwrap();
        assert!(complement(&full).is_empty());
        for s in subsets(4) {
            assert_eq!(complement(&complement(&s)), s);
        }
    }

    #[test]
    fn bell_and_stirling_values() {
        assert_eq!(bell(0).unwrap(), 1);
        assert_eq!(bell(3).unwrap(), brute_force(3).len() as u64);
        let two_blocks = brute_force(4).iter().filter(|p| p.len() == 2).count() as u64;
        assert_eq!(stirling2(4, 2).unwrap(), two_blocks);
        assert_eq!(stirling2(4, 2).unwrap(), 7);
        assert_eq!(bell(25).unwrap(), 4_638_590_332_229_999_353);
        assert!(bell(26).is_err());
        assert!(stirling2(3, 4).is_err());
        for n in 0..=10 {
            assert_eq!(partitions(n).unwrap().len() as u64, bell(n).unwrap());
        }
    }
}
