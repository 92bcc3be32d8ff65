use std::cmp::Ordering;

/// Frontier entry ordered by ascending f, then descending g, then ascending
/// insertion sequence.
///
/// `Ord` is arranged so that the *preferred* entry compares greatest, which
/// is what `BinaryHeap` pops first. `BTreeSet` users pop from the front, so
/// they wrap the key in [`Reverse`](std::cmp::Reverse).
#[derive(Debug, Clone, Copy)]
pub(crate) struct FrontierKey {
    pub f: f64,
    pub g: f64,
    pub seq: u64,
    pub cell: u32,
}

impl PartialEq for FrontierKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FrontierKey {}

impl PartialOrd for FrontierKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FrontierKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}
