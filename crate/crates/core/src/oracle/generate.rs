//! Seeded random instances for property sweeps.

use std::collections::{BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{validate_instance, AttributeId, CostGrid, CostRule, Dimension, Instance, InstanceParts, Level, NodeId};
use crate::oracle::enumerate::enumerate_feasible;
use crate::oracle::OracleError;

/// Upper limits for generated instances.
#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    /// At most 12.
    pub max_nodes: usize,
    /// At most 4, counting the progressive one.
    pub max_dims: usize,
    /// Levels per grid, at most 8.
    pub max_grid: usize,
    /// At most 3.
    pub max_attributes: usize,
    /// Out-degree range upper end.
    pub max_out_degree: usize,
    /// Fewest edges between the source and any target.
    pub min_target_hops: usize,
    /// Chance that one dimension uses the attribute-switch rule.
    pub switch_probability: f64,
    pub max_attempts: u32,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            max_nodes: 10,
            max_dims: 3,
            max_grid: 7,
            max_attributes: 2,
            max_out_degree: 3,
            min_target_hops: 2,
            switch_probability: 0.5,
            max_attempts: 500,
        }
    }
}

impl GenParams {
    fn clamped(&self) -> GenParams {
        GenParams {
            max_nodes: self.max_nodes.clamp(2, 12),
            max_dims: self.max_dims.clamp(1, 4),
            max_grid: self.max_grid.clamp(2, 8),
            max_attributes: self.max_attributes.clamp(1, 3),
            max_out_degree: self.max_out_degree.max(1),
            ..self.clone()
        }
    }
}

/// Grid spacing, so non-integer levels get exercised too.
const STEPS: [(i64, u32); 3] = [(1, 0), (5, 1), (2, 0)];

fn step_level(rng: &mut ChaCha8Rng) -> Level {
    let (m, scale) = STEPS[rng.gen_range(0..STEPS.len())];
    Level::new(m, scale)
}

fn uniform_grid(step: Level, levels: usize) -> CostGrid {
    let grid: Vec<Level> = (0..levels as i64).map(|k| step * Level::from(k)).collect();
    let budget = *grid.last().unwrap();
    CostGrid::new(grid, budget)
}

fn draw(rng: &mut ChaCha8Rng, p: &GenParams) -> Result<Option<Instance>, OracleError> {
    let n = rng.gen_range(p.max_nodes.min(4)..=p.max_nodes);
    let d = rng.gen_range(1..=p.max_dims);
    let attrs = rng.gen_range(1..=p.max_attributes);

    // Dimension 0 is additive and progressive with weights of one or two steps.
    let mut dimensions = Vec::with_capacity(d);
    let mut steps = Vec::with_capacity(d);
    let switch_dim = if d > 1 && attrs > 1 && rng.gen_bool(p.switch_probability) {
        Some(d - 1)
    } else {
        None
    };
    for dim in 0..d {
        let step = step_level(rng);
        let low = if dim == 0 { p.max_grid.min(4) } else { 2 };
        let levels = rng.gen_range(low..=p.max_grid);
        let rule = if Some(dim) == switch_dim {
            CostRule::AttributeSwitch { penalty: step }
        } else {
            CostRule::Additive
        };
        dimensions.push(Dimension {
            name: format!("c{}", dim + 1),
            rule,
            grid: uniform_grid(step, levels),
            delta_min: (dim == 0).then_some(step),
        });
        steps.push(step);
    }

    let mut edges = Vec::new();
    for src in 0..n as u32 {
        let degree = rng.gen_range(1..=p.max_out_degree);
        for _ in 0..degree {
            let dst = rng.gen_range(0..n as u32);
            if dst == src {
                continue;
            }
            let attribute = AttributeId(rng.gen_range(0..attrs as u32));
            let weights = (0..d)
                .map(|dim| match dimensions[dim].rule {
                    CostRule::Additive => {
                        let lo = if dim == 0 { 1 } else { 0 };
                        steps[dim] * Level::from(rng.gen_range(lo..=2))
                    }
                    _ => Level::ZERO,
                })
                .collect();
            edges.push((NodeId(src), NodeId(dst), attribute, weights));
        }
    }

    // Hop distance from the source, ignoring costs.
    let mut hops = vec![usize::MAX; n];
    hops[0] = 0;
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        for &(src, dst, _, _) in &edges {
            if src.index() == u && hops[dst.index()] == usize::MAX {
                hops[dst.index()] = hops[u] + 1;
                queue.push_back(dst.index());
            }
        }
    }
    let mut far: Vec<u32> = (1..n as u32)
        .filter(|&v| hops[v as usize] != usize::MAX && hops[v as usize] >= p.min_target_hops)
        .collect();
    if far.is_empty() {
        return Ok(None);
    }
    far.shuffle(rng);
    let target_count = rng.gen_range(1..=far.len().min(2));
    let targets: BTreeSet<NodeId> = far[..target_count].iter().map(|&t| NodeId(t)).collect();

    Ok(Some(Instance::new(InstanceParts {
        nodes: (0..n).map(|i| format!("v{i}")).collect(),
        attributes: (0..attrs).map(|i| format!("A{}", i + 1)).collect(),
        edges,
        dimensions,
        source: NodeId(0),
        targets,
        ..Default::default()
    })?))
}

/// Same seed and parameters, same instance. Draws until the instance is
/// valid and has at least one feasible path.
pub fn generate_random_instance(seed: u64, params: &GenParams) -> Result<Instance, OracleError> {
    let p = params.clamped();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..p.max_attempts {
        let Some(instance) = draw(&mut rng, &p)? else {
            continue;
        };
        if !validate_instance(&instance).is_valid() {
            continue;
        }
        if !enumerate_feasible(&instance)?.feasible.is_empty() {
            return Ok(instance);
        }
    }
    Err(OracleError::RejectionBudget {
        seed,
        attempts: p.max_attempts,
    })
}
