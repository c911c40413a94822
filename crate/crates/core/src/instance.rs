//! Traversal instances and single-step cost dynamics.
//!
//! An [`Instance`] bundles a directed graph, one [`Dimension`] per cost
//! criterion (rule + grid + optional progress declaration), the context
//! transition table, and the source/target nodes. Costs never leave the grid:
//! a [`CostVector`] stores grid indices, and every level value is an exact
//! decimal.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use rust_decimal::Decimal;
use thiserror::Error;

/// Exact cost level. Binary floating point never enters the pipeline.
pub type Level = Decimal;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_newtype!(
    /// Dense index into the node table.
    NodeId
);
id_newtype!(
    /// Dense index into the edge list.
    EdgeId
);
id_newtype!(
    /// Finite edge label (a zone, a layer, a vendor...).
    AttributeId
);
id_newtype!(
    /// Markov context refining the terminal node. `ContextId(0)` is the
    /// initial context of the empty path.
    ContextId
);

impl ContextId {
    pub const INITIAL: ContextId = ContextId(0);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub attribute: AttributeId,
    /// Raw per-dimension increments. Only additive dimensions read them.
    pub weights: Vec<Level>,
}

/// Finite, strictly increasing set of admissible levels for one dimension,
/// together with its budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostGrid {
    levels: Vec<Level>,
    budget: Level,
}

impl CostGrid {
    pub fn new(levels: Vec<Level>, budget: Level) -> Self {
        Self { levels, budget }
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn budget(&self) -> Level {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, index: u32) -> Level {
        self.levels[index as usize]
    }

    /// Grid index of `value`, if it is a grid level.
    pub fn index_of(&self, value: Level) -> Option<u32> {
        self.levels.binary_search(&value).ok().map(|i| i as u32)
    }

    /// Index of the largest grid level `<= value`.
    pub fn floor_index(&self, value: Level) -> Option<u32> {
        match self.levels.binary_search(&value) {
            Ok(i) => Some(i as u32),
            Err(0) => None,
            Err(i) => Some((i - 1) as u32),
        }
    }
}

/// On-grid cost vector, one grid index per dimension.
///
/// Ordering is lexicographic on the index tuple; it is only used for
/// deterministic iteration, never for dominance.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CostVector(Vec<u32>);

impl CostVector {
    pub fn new(indices: Vec<u32>) -> Self {
        Self(indices)
    }

    pub fn zeros(dims: usize) -> Self {
        Self(vec![0; dims])
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, dim: usize) -> u32 {
        self.0[dim]
    }

    /// Componentwise `<=` on grid indices, which matches `<=` on levels
    /// because every grid is strictly increasing.
    pub fn le(&self, other: &CostVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

/// (node, context) pair. Equal signatures share the terminal node by
/// construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub node: NodeId,
    pub context: ContextId,
}

impl Signature {
    pub fn new(node: NodeId, context: ContextId) -> Self {
        Self { node, context }
    }
}

/// Per-dimension transition rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostRule {
    /// `next = current + edge.weights[dim]`.
    Additive,
    /// `next = current + penalty` when the edge attribute differs from the
    /// attribute recorded by the current context; the initial context never
    /// pays.
    AttributeSwitch { penalty: Level },
    /// Fully general `(context, edge, level index) -> level index` map.
    /// Missing entries leave the level unchanged.
    ExplicitTable(BTreeMap<(ContextId, EdgeId, u32), u32>),
}

impl CostRule {
    pub fn kind(&self) -> &'static str {
        match self {
            CostRule::Additive => "additive",
            CostRule::AttributeSwitch { .. } => "attribute-switch",
            CostRule::ExplicitTable(_) => "table",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dimension {
    pub name: String,
    pub rule: CostRule,
    pub grid: CostGrid,
    /// Declared minimum increment; `Some` marks the dimension progressive.
    pub delta_min: Option<Level>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    pub name: String,
    /// Attribute remembered by this context, read by attribute-switch rules.
    pub attribute: Option<AttributeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContextTransition {
    /// The context is the attribute of the last traversed edge.
    LastAttribute,
    /// Explicit total table over (context, attribute).
    Table(BTreeMap<(ContextId, AttributeId), ContextId>),
}

/// Raw description of an instance before structural checks.
#[derive(Clone, Debug, Default)]
pub struct InstanceParts {
    pub nodes: Vec<String>,
    pub attributes: Vec<String>,
    /// Ignored under [`ContextTransition::LastAttribute`], where contexts are
    /// derived from the attributes. Otherwise entry 0 is the initial context.
    pub contexts: Vec<Context>,
    pub edges: Vec<(NodeId, NodeId, AttributeId, Vec<Level>)>,
    pub dimensions: Vec<Dimension>,
    pub source: NodeId,
    pub targets: BTreeSet<NodeId>,
    pub context_transition: Option<ContextTransition>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance has no nodes")]
    NoNodes,
    #[error("instance has no cost dimensions")]
    NoDimensions,
    #[error("node index {0} out of range")]
    NodeOutOfRange(u32),
    #[error("edge {edge}: attribute index {attribute} out of range")]
    AttributeOutOfRange { edge: u32, attribute: u32 },
    #[error("edge {edge}: expected {expected} weights, found {found}")]
    WeightArity { edge: u32, expected: usize, found: usize },
    #[error("dimension {dim}: table entry {detail} out of range")]
    TableEntryOutOfRange { dim: usize, detail: String },
    #[error("context table has no entry for context `{context}` and attribute `{attribute}`")]
    ContextTableIncomplete { context: String, attribute: String },
    #[error("context table refers to context index {0} out of range")]
    ContextOutOfRange(u32),
    #[error("explicit context tables need at least the initial context")]
    NoContexts,
    #[error("edge {edge} leaves node {src}, not the signature node {node}")]
    EdgeSourceMismatch { edge: u32, src: u32, node: u32 },
    #[error("cost vector has {found} dimensions, instance has {expected}")]
    CostArity { expected: usize, found: usize },
    #[error("cost index {index} is off the grid of dimension {dim}")]
    CostOffGrid { dim: usize, index: u32 },
    #[error("dimension {dim} is declared progressive but its smallest increment is {computed} (declared {declared})")]
    ProgressContradiction {
        dim: usize,
        declared: Level,
        computed: Level,
    },
    #[error("no progressive dimension declared")]
    NoProgressiveDimension,
    #[error("instance failed validation:\n{0}")]
    Invalid(ValidationReport),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    nodes: Vec<String>,
    attributes: Vec<String>,
    contexts: Vec<Context>,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<EdgeId>>,
    dimensions: Vec<Dimension>,
    source: NodeId,
    targets: BTreeSet<NodeId>,
    context_transition: ContextTransition,
}

/// Result of evaluating one dimension's rule on one grid level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelTransition {
    To(u32),
    OverBudget(Level),
    OffGrid(Level),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PruneReason {
    BudgetExceeded,
    OffGrid,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Advanced { sig: Signature, cost: CostVector },
    Pruned { dim: usize, reason: PruneReason },
}

impl Instance {
    pub fn new(parts: InstanceParts) -> Result<Self, InstanceError> {
        let InstanceParts {
            nodes,
            attributes,
            contexts,
            edges,
            dimensions,
            source,
            targets,
            context_transition,
        } = parts;

        if nodes.is_empty() {
            return Err(InstanceError::NoNodes);
        }
        if dimensions.is_empty() {
            return Err(InstanceError::NoDimensions);
        }
        let n = nodes.len() as u32;
        let check_node = |id: NodeId| {
            if id.0 < n {
                Ok(())
            } else {
                Err(InstanceError::NodeOutOfRange(id.0))
            }
        };
        check_node(source)?;
        for t in &targets {
            check_node(*t)?;
        }

        let d = dimensions.len();
        let mut built = Vec::with_capacity(edges.len());
        let mut outgoing = vec![Vec::new(); nodes.len()];
        for (i, (src, dst, attribute, weights)) in edges.into_iter().enumerate() {
            check_node(src)?;
            check_node(dst)?;
            if attribute.index() >= attributes.len() {
                return Err(InstanceError::AttributeOutOfRange {
                    edge: i as u32,
                    attribute: attribute.0,
                });
            }
            if weights.len() != d {
                return Err(InstanceError::WeightArity {
                    edge: i as u32,
                    expected: d,
                    found: weights.len(),
                });
            }
            let id = EdgeId(i as u32);
            outgoing[src.index()].push(id);
            built.push(Edge {
                id,
                src,
                dst,
                attribute,
                weights,
            });
        }

        let context_transition = context_transition.unwrap_or(ContextTransition::LastAttribute);
        let contexts = match &context_transition {
            ContextTransition::LastAttribute => std::iter::once(Context {
                name: "init".to_string(),
                attribute: None,
            })
            .chain(attributes.iter().enumerate().map(|(i, name)| Context {
                name: name.clone(),
                attribute: Some(AttributeId(i as u32)),
            }))
            .collect(),
            ContextTransition::Table(table) => {
                if contexts.is_empty() {
                    return Err(InstanceError::NoContexts);
                }
                for c in 0..contexts.len() as u32 {
                    for a in 0..attributes.len() as u32 {
                        match table.get(&(ContextId(c), AttributeId(a))) {
                            Some(to) if to.index() < contexts.len() => {}
                            Some(to) => return Err(InstanceError::ContextOutOfRange(to.0)),
                            None => {
                                return Err(InstanceError::ContextTableIncomplete {
                                    context: contexts[c as usize].name.clone(),
                                    attribute: attributes[a as usize].clone(),
                                })
                            }
                        }
                    }
                }
                for ctx in &contexts {
                    if let Some(a) = ctx.attribute {
                        if a.index() >= attributes.len() {
                            return Err(InstanceError::AttributeOutOfRange {
                                edge: u32::MAX,
                                attribute: a.0,
                            });
                        }
                    }
                }
                contexts
            }
        };

        for (dim, dimension) in dimensions.iter().enumerate() {
            if let CostRule::ExplicitTable(table) = &dimension.rule {
                let len = dimension.grid.len() as u32;
                for (&(ctx, edge, from), &to) in table {
                    if ctx.index() >= contexts.len()
                        || edge.index() >= built.len()
                        || from >= len
                        || to >= len
                    {
                        return Err(InstanceError::TableEntryOutOfRange {
                            dim,
                            detail: format!("({}, {}, {}) -> {}", ctx.0, edge.0, from, to),
                        });
                    }
                }
            }
        }

        Ok(Self {
            nodes,
            attributes,
            contexts,
            edges: built,
            outgoing,
            dimensions,
            source,
            targets,
            context_transition,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.index()]
    }

    pub fn node_names(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .position(|n| n == name)
            .map(|i| NodeId(i as u32))
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn context_name(&self, id: ContextId) -> &str {
        &self.contexts[id.index()].name
    }

    pub fn context_by_name(&self, name: &str) -> Option<ContextId> {
        self.contexts
            .iter()
            .position(|c| c.name == name)
            .map(|i| ContextId(i as u32))
    }

    pub fn context_transition(&self) -> &ContextTransition {
        &self.context_transition
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.index()]
    }

    pub fn outgoing(&self, node: NodeId) -> impl Iterator<Item = &Edge> + '_ {
        self.outgoing[node.index()].iter().map(|e| &self.edges[e.index()])
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.outgoing[node.index()].len()
    }

    pub fn max_out_degree(&self) -> usize {
        self.outgoing.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    pub fn dims(&self) -> usize {
        self.dimensions.len()
    }

    pub fn grid(&self, dim: usize) -> &CostGrid {
        &self.dimensions[dim].grid
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn targets(&self) -> &BTreeSet<NodeId> {
        &self.targets
    }

    pub fn is_target(&self, node: NodeId) -> bool {
        self.targets.contains(&node)
    }

    pub fn progressive_dims(&self) -> impl Iterator<Item = usize> + '_ {
        self.dimensions
            .iter()
            .enumerate()
            .filter(|(_, d)| d.delta_min.is_some())
            .map(|(i, _)| i)
    }

    pub fn initial_signature(&self) -> Signature {
        Signature::new(self.source, ContextId::INITIAL)
    }

    pub fn initial_cost(&self) -> CostVector {
        CostVector::zeros(self.dims())
    }

    pub fn next_context(&self, context: ContextId, attribute: AttributeId) -> ContextId {
        match &self.context_transition {
            ContextTransition::LastAttribute => ContextId(attribute.0 + 1),
            ContextTransition::Table(table) => table[&(context, attribute)],
        }
    }

    /// Level values of an on-grid cost vector.
    pub fn cost_values(&self, cost: &CostVector) -> Vec<Level> {
        cost.indices()
            .iter()
            .enumerate()
            .map(|(dim, &idx)| self.grid(dim).level(idx))
            .collect()
    }

    /// `(v1,v2,...)` with level values, normalized (no trailing zeros).
    pub fn format_cost(&self, cost: &CostVector) -> String {
        let parts: Vec<String> = self
            .cost_values(cost)
            .into_iter()
            .map(|v| v.normalize().to_string())
            .collect();
        format!("({})", parts.join(","))
    }

    pub fn format_signature(&self, sig: Signature) -> String {
        format!(
            "({},{})",
            self.node_name(sig.node),
            self.context_name(sig.context)
        )
    }

    /// Raw next value of dimension `dim`, before any grid or budget check.
    pub fn raw_transition(&self, dim: usize, context: ContextId, edge: &Edge, level: u32) -> Level {
        let dimension = &self.dimensions[dim];
        let current = dimension.grid.level(level);
        match &dimension.rule {
            CostRule::Additive => current + edge.weights[dim],
            CostRule::AttributeSwitch { penalty } => {
                match self.contexts[context.index()].attribute {
                    Some(a) if a != edge.attribute => current + *penalty,
                    _ => current,
                }
            }
            CostRule::ExplicitTable(table) => {
                let to = table
                    .get(&(context, edge.id, level))
                    .copied()
                    .unwrap_or(level);
                dimension.grid.level(to)
            }
        }
    }

    /// Evaluates one dimension's rule and classifies the result against the
    /// grid and the budget.
    pub fn transition(&self, dim: usize, context: ContextId, edge: &Edge, level: u32) -> LevelTransition {
        let raw = self.raw_transition(dim, context, edge, level);
        let grid = &self.dimensions[dim].grid;
        if raw > grid.budget() {
            LevelTransition::OverBudget(raw)
        } else {
            match grid.index_of(raw) {
                Some(i) => LevelTransition::To(i),
                None => LevelTransition::OffGrid(raw),
            }
        }
    }

    fn check_cost(&self, cost: &CostVector) -> Result<(), InstanceError> {
        if cost.dims() != self.dims() {
            return Err(InstanceError::CostArity {
                expected: self.dims(),
                found: cost.dims(),
            });
        }
        for (dim, &idx) in cost.indices().iter().enumerate() {
            if idx as usize >= self.grid(dim).len() {
                return Err(InstanceError::CostOffGrid { dim, index: idx });
            }
        }
        Ok(())
    }

    /// Extends the state `(sig, cost)` by `edge`.
    pub fn step(&self, sig: Signature, cost: &CostVector, edge: &Edge) -> Result<StepOutcome, InstanceError> {
        if edge.src != sig.node {
            return Err(InstanceError::EdgeSourceMismatch {
                edge: edge.id.0,
                src: edge.src.0,
                node: sig.node.0,
            });
        }
        self.check_cost(cost)?;
        let mut next = Vec::with_capacity(self.dims());
        for dim in 0..self.dims() {
            match self.transition(dim, sig.context, edge, cost.get(dim)) {
                LevelTransition::To(i) => next.push(i),
                LevelTransition::OverBudget(_) => {
                    return Ok(StepOutcome::Pruned {
                        dim,
                        reason: PruneReason::BudgetExceeded,
                    })
                }
                LevelTransition::OffGrid(_) => {
                    return Ok(StepOutcome::Pruned {
                        dim,
                        reason: PruneReason::OffGrid,
                    })
                }
            }
        }
        Ok(StepOutcome::Advanced {
            sig: Signature::new(edge.dst, self.next_context(sig.context, edge.attribute)),
            cost: CostVector::new(next),
        })
    }

    /// Replays an edge sequence from the initial state. Returns `None` if an
    /// edge does not connect or a step is pruned.
    pub fn replay(&self, edges: &[EdgeId]) -> Option<(Signature, CostVector)> {
        let mut sig = self.initial_signature();
        let mut cost = self.initial_cost();
        for &e in edges {
            match self.step(sig, &cost, self.edge(e)).ok()? {
                StepOutcome::Advanced { sig: s, cost: c } => {
                    sig = s;
                    cost = c;
                }
                StepOutcome::Pruned { .. } => return None,
            }
        }
        Some((sig, cost))
    }

    /// Signatures reachable from the source, ignoring costs.
    pub fn reachable_signatures(&self) -> BTreeSet<Signature> {
        let start = self.initial_signature();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(sig) = queue.pop_front() {
            for edge in self.outgoing(sig.node) {
                let next = Signature::new(edge.dst, self.next_context(sig.context, edge.attribute));
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    /// Smallest non-pruned increment per dimension over every reachable
    /// (signature, edge, level) triple; `None` when nothing stays in budget.
    pub fn computed_increments(&self) -> Vec<Option<Level>> {
        let mut mins: Vec<Option<Level>> = vec![None; self.dims()];
        for sig in self.reachable_signatures() {
            for edge in self.outgoing(sig.node) {
                for (dim, slot) in mins.iter_mut().enumerate() {
                    let grid = self.grid(dim);
                    for level in 0..grid.len() as u32 {
                        let raw = self.raw_transition(dim, sig.context, edge, level);
                        if raw > grid.budget() {
                            continue;
                        }
                        let inc = raw - grid.level(level);
                        *slot = Some(slot.map_or(inc, |m: Level| m.min(inc)));
                    }
                }
            }
        }
        mins
    }

    /// Minimum increment vector: the recomputed increment on progressive
    /// dimensions, zero elsewhere.
    pub fn delta_min_vector(&self) -> Result<Vec<Level>, InstanceError> {
        if self.progressive_dims().next().is_none() {
            return Err(InstanceError::NoProgressiveDimension);
        }
        let computed = self.computed_increments();
        self.dimensions
            .iter()
            .zip(computed)
            .enumerate()
            .map(|(dim, (d, computed))| match d.delta_min {
                None => Ok(Level::ZERO),
                Some(declared) => match computed {
                    // Nothing stays in budget: every path dies at its first step.
                    None => Ok(declared),
                    Some(c) if c <= Level::ZERO || c < declared => {
                        Err(InstanceError::ProgressContradiction {
                            dim,
                            declared,
                            computed: c,
                        })
                    }
                    Some(c) => Ok(c),
                },
            })
            .collect()
    }

    /// Hard bound on path length: the minimum over progressive dimensions of
    /// `floor(budget / increment)`.
    pub fn max_step_count(&self) -> Result<u64, InstanceError> {
        let delta = self.delta_min_vector()?;
        Ok(self
            .progressive_dims()
            .map(|dim| floor_div(self.grid(dim).budget(), delta[dim]))
            .min()
            .expect("at least one progressive dimension"))
    }
}

/// Exact `floor(num / den)` for non-negative `num` and positive `den`.
pub(crate) fn floor_div(num: Level, den: Level) -> u64 {
    let mut k = (num / den).floor();
    while (k + Level::ONE) * den <= num {
        k += Level::ONE;
    }
    while k > Level::ZERO && k * den > num {
        k -= Level::ONE;
    }
    u64::try_from(k).expect("step bound fits in u64")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One violated structural condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Issue {
    NoTargets,
    SourceIsTarget,
    NoProgressiveDimension,
    EmptyGrid { dim: usize },
    GridMissingZero { dim: usize },
    GridMissingBudget { dim: usize },
    GridNotIncreasing { dim: usize },
    GridOutsideRange { dim: usize },
    NegativeWeight { dim: usize, edge: EdgeId },
    NonPositiveDeclaredIncrement { dim: usize, declared: Level },
    /// `δ(σ, e, g) < g`.
    Decreasing { dim: usize, sig: Signature, edge: EdgeId, level: u32 },
    /// `δ(σ, e, g) > δ(σ, e, g')` for the next grid level `g'`.
    NotMonotone { dim: usize, sig: Signature, edge: EdgeId, level: u32 },
    /// Increment below the declared progress constant.
    InsufficientProgress {
        dim: usize,
        sig: Signature,
        edge: EdgeId,
        level: u32,
        increment: Level,
        declared: Level,
    },
    /// Additive or switch increment landing strictly between grid levels
    /// below the budget.
    OffGridIncrement { dim: usize, sig: Signature, edge: EdgeId, level: u32, value: Level },
    DeclaredBelowComputed { dim: usize, declared: Level, computed: Level },
}

impl Issue {
    pub fn severity(&self) -> Severity {
        match self {
            Issue::SourceIsTarget | Issue::DeclaredBelowComputed { .. } => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::NoTargets => write!(f, "target set is empty"),
            Issue::SourceIsTarget => write!(f, "source is a target; the empty path is not reported as a solution"),
            Issue::NoProgressiveDimension => write!(f, "no progressive dimension declared"),
            Issue::EmptyGrid { dim } => write!(f, "dimension {dim}: grid is empty"),
            Issue::GridMissingZero { dim } => write!(f, "dimension {dim}: grid does not contain 0"),
            Issue::GridMissingBudget { dim } => write!(f, "dimension {dim}: grid does not contain the budget"),
            Issue::GridNotIncreasing { dim } => write!(f, "dimension {dim}: grid levels are not strictly increasing"),
            Issue::GridOutsideRange { dim } => write!(f, "dimension {dim}: grid level outside [0, budget]"),
            Issue::NegativeWeight { dim, edge } => write!(f, "dimension {dim}: edge {} has a negative weight", edge.0),
            Issue::NonPositiveDeclaredIncrement { dim, declared } => {
                write!(f, "dimension {dim}: declared minimum increment {declared} is not positive")
            }
            Issue::Decreasing { dim, sig, edge, level } => write!(
                f,
                "dimension {dim}: δ ≥ g violated at context {}, node {}, edge {}, level index {level}",
                sig.context.0, sig.node.0, edge.0
            ),
            Issue::NotMonotone { dim, sig, edge, level } => write!(
                f,
                "dimension {dim}: δ not monotone at context {}, node {}, edge {}, level index {level}",
                sig.context.0, sig.node.0, edge.0
            ),
            Issue::InsufficientProgress { dim, sig, edge, level, increment, declared } => write!(
                f,
                "dimension {dim}: progress violated at context {}, node {}, edge {}, level index {level}: increment {increment} < declared {declared}",
                sig.context.0, sig.node.0, edge.0
            ),
            Issue::OffGridIncrement { dim, sig, edge, level, value } => write!(
                f,
                "dimension {dim}: value {value} is off-grid below the budget (context {}, node {}, edge {}, level index {level})",
                sig.context.0, sig.node.0, edge.0
            ),
            Issue::DeclaredBelowComputed { dim, declared, computed } => write!(
                f,
                "dimension {dim}: declared minimum increment {declared} is below the computed {computed}"
            ),
        }
    }
}

/// Every violated condition found by [`validate_instance`]. Warnings do not
/// make an instance invalid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity() == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity() == Severity::Warning)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return writeln!(f, "valid");
        }
        for issue in &self.issues {
            let tag = match issue.severity() {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{tag}: {issue}")?;
        }
        Ok(())
    }
}

/// Checks grids, rule monotonicity, non-decrease, progress and on-grid
/// closure by exhaustive sweep over reachable signatures, their outgoing
/// edges and every grid level.
pub fn validate_instance(instance: &Instance) -> ValidationReport {
    let mut issues = Vec::new();

    if instance.targets.is_empty() {
        issues.push(Issue::NoTargets);
    }
    if instance.targets.contains(&instance.source) {
        issues.push(Issue::SourceIsTarget);
    }
    if instance.progressive_dims().next().is_none() {
        issues.push(Issue::NoProgressiveDimension);
    }

    let mut grids_ok = true;
    for (dim, d) in instance.dimensions.iter().enumerate() {
        let levels = d.grid.levels();
        if levels.is_empty() {
            issues.push(Issue::EmptyGrid { dim });
            grids_ok = false;
            continue;
        }
        if levels[0] != Level::ZERO {
            issues.push(Issue::GridMissingZero { dim });
            grids_ok = false;
        }
        if *levels.last().unwrap() != d.grid.budget() {
            issues.push(Issue::GridMissingBudget { dim });
            grids_ok = false;
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            issues.push(Issue::GridNotIncreasing { dim });
            grids_ok = false;
        }
        if levels.iter().any(|&l| l < Level::ZERO || l > d.grid.budget()) {
            issues.push(Issue::GridOutsideRange { dim });
            grids_ok = false;
        }
        for edge in &instance.edges {
            if edge.weights[dim] < Level::ZERO {
                issues.push(Issue::NegativeWeight { dim, edge: edge.id });
            }
        }
        if let Some(declared) = d.delta_min {
            if declared <= Level::ZERO {
                issues.push(Issue::NonPositiveDeclaredIncrement { dim, declared });
            }
        }
    }
    if !grids_ok {
        // Rule sweeps index into the grids; stop before they misbehave.
        return ValidationReport { issues };
    }

    let reachable = instance.reachable_signatures();
    for (dim, d) in instance.dimensions.iter().enumerate() {
        let grid = &d.grid;
        let n = grid.len() as u32;
        for &sig in &reachable {
            for edge in instance.outgoing(sig.node) {
                let raws: Vec<Level> = (0..n)
                    .map(|g| instance.raw_transition(dim, sig.context, edge, g))
                    .collect();
                if let Some(level) = (0..n).find(|&g| raws[g as usize] < grid.level(g)) {
                    issues.push(Issue::Decreasing { dim, sig, edge: edge.id, level });
                }
                if let Some(level) = (0..n.saturating_sub(1)).find(|&g| raws[g as usize] > raws[g as usize + 1]) {
                    issues.push(Issue::NotMonotone { dim, sig, edge: edge.id, level });
                }
                if let Some(level) = (0..n).find(|&g| {
                    let r = raws[g as usize];
                    r <= grid.budget() && grid.index_of(r).is_none()
                }) {
                    issues.push(Issue::OffGridIncrement {
                        dim,
                        sig,
                        edge: edge.id,
                        level,
                        value: raws[level as usize],
                    });
                }
                if let Some(declared) = d.delta_min {
                    if let Some(level) = (0..n).find(|&g| {
                        let r = raws[g as usize];
                        r <= grid.budget() && r - grid.level(g) < declared
                    }) {
                        issues.push(Issue::InsufficientProgress {
                            dim,
                            sig,
                            edge: edge.id,
                            level,
                            increment: raws[level as usize] - grid.level(level),
                            declared,
                        });
                    }
                }
            }
        }
    }

    for (dim, computed) in instance.computed_increments().into_iter().enumerate() {
        if let (Some(declared), Some(computed)) = (instance.dimensions[dim].delta_min, computed) {
            if declared > Level::ZERO && declared < computed {
                issues.push(Issue::DeclaredBelowComputed { dim, declared, computed });
            }
        }
    }

    ValidationReport { issues }
}
