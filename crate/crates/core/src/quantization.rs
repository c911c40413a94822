//! Resolution bins over the cost grid.

use crate::instance::{CostVector, Instance, Level};

/// Bin index vector, one resolution level per dimension.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BinIndex(pub Vec<u32>);

/// Per-dimension map from grid index to bin level.
///
/// Only the rank quantization is constructed today; the map is kept general
/// so coarser schemes fit behind the same type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quantization {
    maps: Vec<Vec<u32>>,
    levels: Vec<Vec<Level>>,
}

impl Quantization {
    pub fn dims(&self) -> usize {
        self.maps.len()
    }

    /// Highest bin level `m_i` of each dimension.
    pub fn max_levels(&self) -> Vec<u32> {
        self.maps.iter().map(|m| *m.last().unwrap()).collect()
    }

    pub fn bin_index(&self, cost: &CostVector) -> BinIndex {
        BinIndex(
            cost.indices()
                .iter()
                .zip(&self.maps)
                .map(|(&idx, map)| map[idx as usize])
                .collect(),
        )
    }

    /// Total number of bin index vectors, `prod(m_i + 1)`.
    pub fn bin_count(&self) -> u64 {
        self.max_levels().iter().map(|&m| m as u64 + 1).product()
    }

    /// `active_signatures * B*`.
    pub fn skyline_width_bound(&self, active_signatures: u64) -> u64 {
        active_signatures * self.bin_count()
    }

    /// Bin of an arbitrary value in `[0, budget]`: the bin of the largest
    /// grid level not above it.
    pub fn bin_of_value(&self, dim: usize, value: Level) -> u32 {
        let levels = &self.levels[dim];
        let idx = match levels.binary_search(&value) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        self.maps[dim][idx]
    }
}

/// Each grid level is binned by its ordinal position.
pub fn rank_quantization(instance: &Instance) -> Quantization {
    let maps = (0..instance.dims())
        .map(|d| (0..instance.grid(d).len() as u32).collect())
        .collect();
    let levels = (0..instance.dims())
        .map(|d| instance.grid(d).levels().to_vec())
        .collect();
    Quantization { maps, levels }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;
    use crate::instance::Level;

    #[test]
    fn running_example_geometry() {
        let q = rank_quantization(&running_example());
        assert_eq!(q.max_levels(), vec![2, 4, 1]);
        assert_eq!(q.bin_count(), 30);
        assert_eq!(q.skyline_width_bound(2), 60);
        assert_eq!(q.skyline_width_bound(0), 0);
        assert_eq!(q.skyline_width_bound(5), 150);
    }

    #[test]
    fn bins_follow_grid_indices() {
        let q = rank_quantization(&running_example());
        for c in [[1, 2, 0], [0, 0, 0], [2, 4, 1]] {
            assert_eq!(q.bin_index(&CostVector::new(c.to_vec())), BinIndex(c.to_vec()));
        }
    }

    #[test]
    fn two_level_grid_and_product_rule() {
        let q = Quantization {
            maps: vec![vec![0, 1]],
            levels: vec![vec![Level::ZERO, Level::ONE]],
        };
        assert_eq!(q.bin_count(), 2);
        let q = Quantization {
            maps: vec![vec![0, 1, 2], vec![0, 1, 2]],
            levels: vec![vec![Level::ZERO; 3]; 2],
        };
        assert_eq!(q.bin_count(), 9);
    }

    #[test]
    fn extension_is_non_decreasing_between_levels() {
        let inst = running_example();
        let q = rank_quantization(&inst);
        for dim in 0..inst.dims() {
            let levels = inst.grid(dim).levels();
            let mut prev = 0;
            for w in levels.windows(2) {
                let mid = (w[0] + w[1]) / Level::TWO;
                let lo = q.bin_of_value(dim, w[0]);
                let m = q.bin_of_value(dim, mid);
                let hi = q.bin_of_value(dim, w[1]);
                assert!(prev <= lo && lo == m && m < hi);
                prev = hi;
            }
            assert_eq!(q.bin_of_value(dim, Level::ZERO), 0);
            assert_eq!(q.bin_of_value(dim, inst.grid(dim).budget()), q.max_levels()[dim]);
        }
    }
}
