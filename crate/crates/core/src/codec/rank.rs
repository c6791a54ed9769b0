use super::{Bits, CodecError};

/// Sorted fixed-width keys packed as `1 ∘ a_1 ∘ 1 ∘ a_2 ∘ …` into 64-bit
/// blocks, answering "how many keys are below x" with word arithmetic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankDict {
    k: usize,
    width: u32,
    per_block: usize,
    blocks: Vec<Block>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Block {
    packed: u64,
    count: usize,
    /// `(0^{w} ∘ 1)^count`.
    ones: u64,
}

/// Result of a query with its cost in word operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankAnswer {
    pub rank: usize,
    pub ops: u32,
}

impl RankDict {
    pub fn build(keys: &[u64], width: u32) -> Result<RankDict, CodecError> {
        if width > 62 {
            return Err(CodecError::TooWide(width as usize));
        }
        if keys.windows(2).any(|w| w[0] > w[1]) {
            return Err(CodecError::NotMonotone);
        }
        if let Some(&bad) = keys.iter().find(|&&a| width < 64 && a >> width != 0) {
            return Err(CodecError::OutOfRange { value: bad, bound: (1u64 << width) - 1 });
        }
        let f = width as usize + 1;
        // The popcount multiply sums into one field, so a block holds fewer than 2^f keys.
        let cap = if f >= 7 { usize::MAX } else { (1usize << f) - 1 };
        let per_block = (64 / f).min(cap).max(1);
        let blocks = keys
            .chunks(per_block)
            .map(|chunk| {
                let count = chunk.len();
                let mut packed = 0u64;
                let mut ones = 0u64;
                for (i, &a) in chunk.iter().enumerate() {
                    let shift = (count - 1 - i) * f;
                    packed |= ((1u64 << width) | a) << shift;
                    ones |= 1u64 << shift;
                }
                Block { packed, count, ones }
            })
            .collect();
        Ok(RankDict { k: keys.len(), width, per_block, blocks })
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn keys_per_block(&self) -> usize {
        self.per_block
    }

    /// The packed string `1 ∘ a_1 ∘ … ∘ 1 ∘ a_k`.
    pub fn packed_bits(&self) -> Bits {
        let f = self.width + 1;
        let mut out = Bits::new();
        for b in &self.blocks {
            let total = b.count as u32 * f;
            out.push_u64(b.packed, total);
        }
        out
    }

    pub fn rank(&self, x: u64) -> usize {
        self.rank_counted(x).rank
    }

    pub fn rank_counted(&self, x: u64) -> RankAnswer {
        let mut ops = 1;
        if 64 - x.leading_zeros() > self.width {
            return RankAnswer { rank: self.k, ops };
        }
        let w = self.width;
        let f = w + 1;
        let mut at_least = 0usize;
        for b in &self.blocks {
            let diff = b.packed - x * b.ones;
            let top = (diff >> w) & b.ones;
            let summed = (top as u128) * (b.ones as u128);
            let field = (summed >> ((b.count as u32 - 1) * f)) as u64 & ((1u64 << f) - 1);
            at_least += field as usize;
            ops += 6;
        }
        RankAnswer { rank: self.k - at_least, ops: ops + 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let d = RankDict::build(&[], 3).unwrap();
        assert_eq!(d.rank(17), 0);
        let d = RankDict::build(&[2, 5, 7], 3).unwrap();
        assert_eq!(d.packed_bits().to_string(), "101011011111");
        assert_eq!(d.rank(5), 1);
        assert_eq!(d.rank(9), 3);
        assert_eq!(d.rank(0), 0);
        assert_eq!(d.rank(8), 3);
        let d = RankDict::build(&[0, 0], 2).unwrap();
        assert_eq!(d.rank(1), 2);
        assert_eq!(RankDict::build(&[3, 1], 3), Err(CodecError::NotMonotone));
        assert!(RankDict::build(&[9], 3).is_err());
    }

    #[test]
    fn narrow_keys_split_into_blocks() {
        let keys = vec![0u64; 40];
        let d = RankDict::build(&keys, 0).unwrap();
        assert_eq!(d.keys_per_block(), 1);
        assert_eq!(d.rank(0), 0);
        assert_eq!(d.rank(1), 40);
        let keys: Vec<u64> = (0..30).map(|i| i / 8).collect();
        let d = RankDict::build(&keys, 2).unwrap();
        for x in 0..5 {
            assert_eq!(d.rank(x), keys.iter().filter(|&&a| a < x).count());
        }
    }
}
