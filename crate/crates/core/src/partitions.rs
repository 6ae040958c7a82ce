//! Non-crossing partitions `NC(n)` and non-crossing linked partitions
//! `NCL(n)`.
//!
//! Blocks are sorted lists of 1-based indices and a partition keeps its
//! blocks sorted by their minima. Enumerations return partitions in
//! lexicographic order of that block list.
//!
//! Linked partitions may let two blocks share a single element `j`. The
//! element must be the minimum of exactly one of the two blocks, and that
//! block must contain at least one more element.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_NC: usize = 12;
pub const MAX_NCL: usize = 10;

pub type Block = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Block>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkedPartition {
    n: usize,
    blocks: Vec<Block>,
}

fn canonicalize(mut blocks: Vec<Block>) -> Vec<Block> {
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort();
    blocks
}

fn check_blocks(n: usize, blocks: &[Block]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("ground set must be nonempty".into()));
    }
    let mut seen = vec![false; n + 1];
    for b in blocks {
        if b.is_empty() {
            return Err(Error::InvalidInput("empty block".into()));
        }
        if b.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "block {b:?} is not strictly increasing"
            )));
        }
        for &e in b {
            if e == 0 || e > n {
                return Err(Error::InvalidInput(format!("element {e} outside [1, {n}]")));
            }
            seen[e] = true;
        }
    }
    if let Some(miss) = (1..=n).find(|&e| !seen[e]) {
        return Err(Error::InvalidInput(format!(
            "element {miss} is not covered"
        )));
    }
    Ok(())
}

/// True iff no `i < j < k < l` has `i, k` in one block and `j, l` in another.
pub fn is_noncrossing(blocks: &[Block]) -> bool {
    for (a, v) in blocks.iter().enumerate() {
        for (b, w) in blocks.iter().enumerate() {
            if a != b && crosses(v, w) {
                return false;
            }
        }
    }
    true
}

// Some i < j < k < l with i, k in `v` and j, l in `w`. Shared elements
// count, so `{{1,2,3},{2,4}}` crosses.
fn crosses(v: &[usize], w: &[usize]) -> bool {
    let Some(&vmin) = v.first() else { return false };
    w.iter().enumerate().any(|(a, &j)| {
        vmin < j
            && w[a + 1..]
                .iter()
                .any(|&l| v.iter().any(|&k| j < k && k < l))
    })
}

impl SetPartition {
    pub fn new(n: usize, blocks: Vec<Block>) -> Result<Self> {
        check_blocks(n, &blocks)?;
        let total: usize = blocks.iter().map(Vec::len).sum();
        if total != n {
            return Err(Error::InvalidInput(
                "blocks are not pairwise disjoint".into(),
            ));
        }
        Ok(SetPartition {
            n,
            blocks: canonicalize(blocks),
        })
    }

    /// The one-block partition `1_n`.
    pub fn full(n: usize) -> Self {
        SetPartition {
            n,
            blocks: vec![(1..=n).collect()],
        }
    }

    /// The all-singletons partition `0_n`.
    pub fn singletons(n: usize) -> Self {
        SetPartition {
            n,
            blocks: (1..=n).map(|e| vec![e]).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_noncrossing(&self) -> bool {
        is_noncrossing(&self.blocks)
    }

    /// Every non-crossing partition is a linked partition without shared
    /// elements.
    pub fn to_linked(&self) -> LinkedPartition {
        LinkedPartition {
            n: self.n,
            blocks: self.blocks.clone(),
        }
    }
}

impl LinkedPartition {
    pub fn new(n: usize, blocks: Vec<Block>) -> Result<Self> {
        check_blocks(n, &blocks)?;
        let blocks = canonicalize(blocks);
        for (a, v) in blocks.iter().enumerate() {
            for w in &blocks[a + 1..] {
                let shared: Vec<usize> = v.iter().copied().filter(|e| w.contains(e)).collect();
                match shared.as_slice() {
                    [] => {}
                    [j] => {
                        let min_of_v = v[0] == *j;
                        let min_of_w = w[0] == *j;
                        if min_of_v == min_of_w {
                            return Err(Error::InvalidInput(format!(
                                "shared element {j} must be the minimum of exactly one block"
                            )));
                        }
                        let owner = if min_of_v { v } else { w };
                        if owner.len() < 2 {
                            return Err(Error::InvalidInput(format!(
                                "block {owner:?} links at {j} but has no other element"
                            )));
                        }
                    }
                    _ => {
                        return Err(Error::InvalidInput(format!(
                            "blocks {v:?} and {w:?} share more than one element"
                        )))
                    }
                }
            }
        }
        if !is_noncrossing(&blocks) {
            return Err(Error::InvalidInput("blocks cross".into()));
        }
        Ok(LinkedPartition { n, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// True when no element is shared, i.e. the partition lies in `NC(n)`.
    pub fn is_plain(&self) -> bool {
        self.blocks.iter().map(Vec::len).sum::<usize>() == self.n
    }

    /// `s(π)`: elements that are not the minimum of any block.
    pub fn non_minimal_elements(&self) -> BTreeSet<usize> {
        let mins: BTreeSet<usize> = self.blocks.iter().map(|b| b[0]).collect();
        (1..=self.n).filter(|e| !mins.contains(e)).collect()
    }

    /// Classes of the connectivity relation `~_π` (transitive closure of
    /// block overlap).
    pub fn connected_classes(&self) -> SetPartition {
        let mut parent: Vec<usize> = (0..=self.n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        for b in &self.blocks {
            for &e in &b[1..] {
                let (ra, rb) = (find(&mut parent, b[0]), find(&mut parent, e));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut classes: Vec<Block> = Vec::new();
        let mut slot = vec![usize::MAX; self.n + 1];
        for e in 1..=self.n {
            let r = find(&mut parent, e);
            if slot[r] == usize::MAX {
                slot[r] = classes.len();
                classes.push(Vec::new());
            }
            classes[slot[r]].push(e);
        }
        SetPartition {
            n: self.n,
            blocks: canonicalize(classes),
        }
    }
}

pub fn non_minimal_elements(pi: &LinkedPartition) -> BTreeSet<usize> {
    pi.non_minimal_elements()
}

pub fn connected_classes(pi: &LinkedPartition) -> SetPartition {
    pi.connected_classes()
}

fn check_range(what: &'static str, n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::size(what, n, 1, max));
    }
    Ok(())
}

/// All of `NC(n)`, `1 ≤ n ≤ 12`.
pub fn enumerate_nc(n: usize) -> Result<Vec<SetPartition>> {
    check_range("n (NC)", n, MAX_NC)?;
    let mut out: Vec<SetPartition> = nc_interval(1, n)
        .into_iter()
        .map(|blocks| SetPartition {
            n,
            blocks: canonicalize(blocks),
        })
        .collect();
    out.sort();
    Ok(out)
}

// Non-crossing partitions of the interval lo..=hi. The block of `lo` splits
// the rest into independent intervals.
fn nc_interval(lo: usize, hi: usize) -> Vec<Vec<Block>> {
    if lo > hi {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    extend_block(vec![lo], hi, vec![Vec::new()], &mut out);
    out
}

fn extend_block(block: Block, hi: usize, inner: Vec<Vec<Block>>, out: &mut Vec<Vec<Block>>) {
    let last = *block.last().expect("block is nonempty");
    for rest in nc_interval(last + 1, hi) {
        for acc in &inner {
            let mut p = Vec::with_capacity(1 + acc.len() + rest.len());
            p.push(block.clone());
            p.extend(acc.iter().cloned());
            p.extend(rest.iter().cloned());
            out.push(p);
        }
    }
    for next in last + 1..=hi {
        let gaps = nc_interval(last + 1, next - 1);
        let mut merged = Vec::with_capacity(inner.len() * gaps.len());
        for acc in &inner {
            for g in &gaps {
                let mut p = acc.clone();
                p.extend(g.iter().cloned());
                merged.push(p);
            }
        }
        let mut b = block.clone();
        b.push(next);
        extend_block(b, hi, merged, out);
    }
}

/// All of `NCL(n)`, `1 ≤ n ≤ 10`.
pub fn enumerate_ncl(n: usize) -> Result<Vec<LinkedPartition>> {
    check_range("n (NCL)", n, MAX_NCL)?;
    let mut out = Vec::new();
    let mut blocks: Vec<Block> = Vec::new();
    // linked[b] = the element at which block b was opened as a link.
    let mut linked: Vec<bool> = Vec::new();
    ncl_dfs(1, n, &mut blocks, &mut linked, &mut out);
    out.sort();
    Ok(out)
}

fn ncl_dfs(
    e: usize,
    n: usize,
    blocks: &mut Vec<Block>,
    linked: &mut Vec<bool>,
    out: &mut Vec<LinkedPartition>,
) {
    if e > n {
        if blocks
            .iter()
            .zip(linked.iter())
            .any(|(b, &l)| l && b.len() < 2)
        {
            return;
        }
        out.push(LinkedPartition {
            n,
            blocks: canonicalize(blocks.clone()),
        });
        return;
    }
    // `e` opens a new block (alone or as a link of an existing block) and/or
    // joins one existing block as a non-minimal element.
    for join in std::iter::once(None).chain((0..blocks.len()).map(Some)) {
        if let Some(v) = join {
            if joins_crossing(blocks, v, e) {
                continue;
            }
        }
        for open in [false, true] {
            if join.is_none() && !open {
                continue;
            }
            if let Some(v) = join {
                blocks[v].push(e);
            }
            if open {
                blocks.push(vec![e]);
                linked.push(join.is_some());
            }
            ncl_dfs(e + 1, n, blocks, linked, out);
            if open {
                blocks.pop();
                linked.pop();
            }
            if let Some(v) = join {
                blocks[v].pop();
            }
        }
    }
}

// Appending `e` (larger than everything placed so far) to block `v` creates
// a crossing iff some other block has elements i < u < k with u in `v`.
// Taking i and k as that block's extremes is enough.
fn joins_crossing(blocks: &[Block], v: usize, e: usize) -> bool {
    let vb = &blocks[v];
    blocks.iter().enumerate().any(|(w, wb)| {
        let (lo, hi) = (wb[0], wb[wb.len() - 1]);
        w != v && hi < e && vb.iter().any(|&u| lo < u && u < hi)
    })
}

/// `⟨σ⟩`: the linked partitions whose connectivity classes are exactly `σ`.
pub fn linked_class(sigma: &SetPartition) -> Result<Vec<LinkedPartition>> {
    if !sigma.is_noncrossing() {
        return Err(Error::InvalidInput(format!("{sigma} is not non-crossing")));
    }
    Ok(enumerate_ncl(sigma.n())?
        .into_iter()
        .filter(|p| p.connected_classes() == *sigma)
        .collect())
}

fn write_blocks(f: &mut fmt::Formatter<'_>, blocks: &[Block]) -> fmt::Result {
    f.write_str("{")?;
    for (i, b) in blocks.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        f.write_str("{")?;
        for (j, e) in b.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")?;
    }
    f.write_str("}")
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_blocks(f, &self.blocks)
    }
}

impl fmt::Display for LinkedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_blocks(f, &self.blocks)
    }
}

fn parse_blocks(s: &str) -> Result<(usize, Vec<Block>)> {
    let bad = || Error::InvalidInput(format!("cannot parse partition {s:?}"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = t
        .strip_prefix("{{")
        .and_then(|r| r.strip_suffix("}}"))
        .ok_or_else(bad)?;
    let mut blocks = Vec::new();
    for body in inner.split("},{") {
        let block: Block = body
            .split(',')
            .map(|x| x.parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        blocks.push(block);
    }
    let n = blocks.iter().flatten().copied().max().ok_or_else(bad)?;
    Ok((n, blocks))
}

impl FromStr for SetPartition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (n, blocks) = parse_blocks(s)?;
        SetPartition::new(n, blocks)
    }
}

impl FromStr for LinkedPartition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (n, blocks) = parse_blocks(s)?;
        LinkedPartition::new(n, blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(s: &str) -> LinkedPartition {
        s.parse().unwrap()
    }

    fn strings<T: ToString>(v: &[T]) -> Vec<String> {
        v.iter().map(ToString::to_string).collect()
    }

    #[test]
    fn nc_small_cases() {
        assert_eq!(strings(&enumerate_nc(1).unwrap()), ["{{1}}"]);
        assert_eq!(enumerate_nc(3).unwrap().len(), 5);
        assert_eq!(enumerate_nc(4).unwrap().len(), 14);
        assert_eq!(
            strings(&enumerate_nc(3).unwrap()),
            [
                "{{1},{2},{3}}",
                "{{1},{2,3}}",
                "{{1,2},{3}}",
                "{{1,2,3}}",
                "{{1,3},{2}}"
            ]
        );
    }

    #[test]
    fn ncl_small_cases() {
        assert_eq!(strings(&enumerate_ncl(1).unwrap()), ["{{1}}"]);
        assert_eq!(
            strings(&enumerate_ncl(2).unwrap()),
            ["{{1},{2}}", "{{1,2}}"]
        );
        let n3 = enumerate_ncl(3).unwrap();
        assert_eq!(n3.len(), 6);
        assert!(n3.contains(&lp("{{1,2},{2,3}}")));
        // The rejected alternative convention would admit a linked singleton.
        assert!(!strings(&enumerate_ncl(2).unwrap()).contains(&"{{1,2},{2}}".to_string()));
    }

    #[test]
    fn counts_follow_catalan_and_schroder() {
        let catalan = [1, 2, 5, 14, 42, 132, 429];
        let schroder = [1, 2, 6, 22, 90, 394, 1806];
        for n in 1..=7 {
            assert_eq!(enumerate_nc(n).unwrap().len(), catalan[n - 1]);
            assert_eq!(enumerate_ncl(n).unwrap().len(), schroder[n - 1]);
        }
    }

    #[test]
    fn size_limits() {
        assert!(matches!(enumerate_nc(0), Err(Error::SizeLimit { .. })));
        assert!(matches!(enumerate_nc(13), Err(Error::SizeLimit { .. })));
        assert!(matches!(enumerate_ncl(11), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn crossing_examples() {
        assert!(!is_noncrossing(&[vec![1, 3], vec![2, 4]]));
        assert!(is_noncrossing(&[vec![1, 4], vec![2, 3]]));
        assert!(is_noncrossing(&[vec![1, 2], vec![2, 3]]));
        assert!(!is_noncrossing(&[vec![1, 2, 3], vec![2, 4]]));
    }

    #[test]
    fn singleton_sets() {
        assert!(lp("{{1}}").non_minimal_elements().is_empty());
        assert_eq!(
            lp("{{1,2}}")
                .non_minimal_elements()
                .into_iter()
                .collect::<Vec<_>>(),
            [2]
        );
        assert_eq!(
            lp("{{1,2},{2,3}}")
                .non_minimal_elements()
                .into_iter()
                .collect::<Vec<_>>(),
            [3]
        );
    }

    #[test]
    fn connectivity() {
        assert_eq!(lp("{{1},{2}}").connected_classes().to_string(), "{{1},{2}}");
        assert_eq!(
            lp("{{1,2},{2,3}}").connected_classes().to_string(),
            "{{1,2,3}}"
        );
        assert_eq!(
            lp("{{1,4},{2,3}}").connected_classes().to_string(),
            "{{1,4},{2,3}}"
        );
    }

    #[test]
    fn linked_classes_of_full_partition() {
        let one = |n| SetPartition::full(n);
        assert_eq!(strings(&linked_class(&one(1)).unwrap()), ["{{1}}"]);
        assert_eq!(strings(&linked_class(&one(2)).unwrap()), ["{{1,2}}"]);
        assert_eq!(
            strings(&linked_class(&one(3)).unwrap()),
            ["{{1,2},{2,3}}", "{{1,2,3}}"]
        );
        let crossing = SetPartition::new(4, vec![vec![1, 3], vec![2, 4]]).unwrap();
        assert!(matches!(
            linked_class(&crossing),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn validation_rejects_bad_links() {
        assert!(LinkedPartition::new(2, vec![vec![1, 2], vec![2]]).is_err());
        assert!(LinkedPartition::new(3, vec![vec![1, 3], vec![2, 3]]).is_err());
        assert!(LinkedPartition::new(3, vec![vec![1, 2, 3], vec![1, 3]]).is_err());
        assert!(SetPartition::new(3, vec![vec![1, 2], vec![2, 3]]).is_err());
        assert!(SetPartition::new(3, vec![vec![1, 2]]).is_err());
    }

    #[test]
    fn text_form_roundtrip() {
        for p in enumerate_ncl(4).unwrap() {
            assert_eq!(p.to_string().parse::<LinkedPartition>().unwrap(), p);
        }
        assert!("{{1,2}".parse::<SetPartition>().is_err());
        assert!("1,2".parse::<SetPartition>().is_err());
    }
}
