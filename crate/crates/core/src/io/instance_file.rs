//! TOML instance documents.
//!
//! Every number is written as a decimal string (`"0.5"`, `"12"`) or a TOML
//! integer and parsed to an exact decimal. TOML floats are rejected. Unknown
//! keys are rejected. See `book/src/file_formats.md` for the full schema.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::instance::{
    validate_instance, AttributeId, Context, ContextId, ContextTransition, CostGrid, CostRule, Dimension, EdgeId,
    Instance, InstanceError, InstanceParts, Level, NodeId, ValidationReport,
};

/// Exact decimal literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Num(pub Level);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.normalize().to_string())
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Num;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a decimal string such as \"1.5\" or an integer")
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(Level::from(v)))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(Level::from(v)))
            }

            fn visit_str<E: serde::de::Error>(self, s: &str) -> Result<Num, E> {
                Level::from_str(s.trim())
                    .map(Num)
                    .map_err(|e| E::custom(format!("invalid decimal `{s}`: {e}")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContextMode {
    #[default]
    LastAttribute,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Additive,
    AttributeSwitch,
    Table,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextDoc {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextTableRow {
    pub context: String,
    pub attribute: String,
    pub next: String,
}

/// One row of an explicit transition table, in level values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleTableRow {
    pub context: String,
    /// Index into `edges`.
    pub edge: u32,
    pub from: Num,
    pub to: Num,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionDoc {
    pub name: String,
    pub rule: RuleKind,
    pub grid: Vec<Num>,
    pub budget: Num,
    /// Declared minimum increment; marks the dimension progressive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_min: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<Num>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<RuleTableRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub to: String,
    pub attribute: String,
    pub weights: Vec<Num>,
}

/// Serialized form of an [`Instance`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub nodes: Vec<String>,
    pub attributes: Vec<String>,
    pub source: String,
    pub targets: Vec<String>,
    #[serde(default)]
    pub context_transition: ContextMode,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contexts: Vec<ContextDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub context_table: Vec<ContextTableRow>,
    pub dimensions: Vec<DimensionDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Syntax(String),
    #[error("{0}")]
    Reference(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("instance failed validation:\n{0}")]
    Invalid(ValidationReport),
}

fn lookup(names: &[String], name: &str, what: &str) -> Result<u32, FormatError> {
    names
        .iter()
        .position(|n| n == name)
        .map(|i| i as u32)
        .ok_or_else(|| FormatError::Reference(format!("unknown {what} `{name}`")))
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<Instance, FormatError> {
        let node = |name: &str| lookup(&self.nodes, name, "node").map(NodeId);
        let attr = |name: &str| lookup(&self.attributes, name, "attribute").map(AttributeId);

        let (contexts, transition) = match self.context_transition {
            ContextMode::LastAttribute => {
                if !self.contexts.is_empty() || !self.context_table.is_empty() {
                    return Err(FormatError::Reference(
                        "`contexts` and `context_table` require context_transition = \"table\"".into(),
                    ));
                }
                (Vec::new(), ContextTransition::LastAttribute)
            }
            ContextMode::Table => {
                let contexts = self
                    .contexts
                    .iter()
                    .map(|c| {
                        Ok(Context {
                            name: c.name.clone(),
                            attribute: c.attribute.as_deref().map(attr).transpose()?,
                        })
                    })
                    .collect::<Result<Vec<_>, FormatError>>()?;
                let names: Vec<String> = contexts.iter().map(|c| c.name.clone()).collect();
                let mut table = BTreeMap::new();
                for row in &self.context_table {
                    let key = (
                        ContextId(lookup(&names, &row.context, "context")?),
                        attr(&row.attribute)?,
                    );
                    let next = ContextId(lookup(&names, &row.next, "context")?);
                    if table.insert(key, next).is_some() {
                        return Err(FormatError::Reference(format!(
                            "duplicate context_table row for ({}, {})",
                            row.context, row.attribute
                        )));
                    }
                }
                (contexts, ContextTransition::Table(table))
            }
        };
        let context_names: Vec<String> = match self.context_transition {
            ContextMode::LastAttribute => std::iter::once("init".to_string())
                .chain(self.attributes.iter().cloned())
                .collect(),
            ContextMode::Table => contexts.iter().map(|c| c.name.clone()).collect(),
        };

        let mut dimensions = Vec::with_capacity(self.dimensions.len());
        for d in &self.dimensions {
            let levels: Vec<Level> = d.grid.iter().map(|n| n.0).collect();
            let grid = CostGrid::new(levels, d.budget.0);
            let require_absent = |present: bool, key: &str| {
                if present {
                    Err(FormatError::Reference(format!(
                        "dimension `{}`: key `{key}` is not used by rule `{}`",
                        d.name,
                        serde_plain_rule(d.rule)
                    )))
                } else {
                    Ok(())
                }
            };
            let rule = match d.rule {
                RuleKind::Additive => {
                    require_absent(d.penalty.is_some(), "penalty")?;
                    require_absent(!d.table.is_empty(), "table")?;
                    CostRule::Additive
                }
                RuleKind::AttributeSwitch => {
                    require_absent(!d.table.is_empty(), "table")?;
                    let penalty = d.penalty.ok_or_else(|| {
                        FormatError::Reference(format!("dimension `{}`: missing key `penalty`", d.name))
                    })?;
                    CostRule::AttributeSwitch { penalty: penalty.0 }
                }
                RuleKind::Table => {
                    require_absent(d.penalty.is_some(), "penalty")?;
                    let mut table = BTreeMap::new();
                    for row in &d.table {
                        let ctx = ContextId(lookup(&context_names, &row.context, "context")?);
                        let on_grid = |v: Num| {
                            grid.index_of(v.0).ok_or_else(|| {
                                FormatError::Reference(format!(
                                    "dimension `{}`: table level {} is not on the grid",
                                    d.name, v.0
                                ))
                            })
                        };
                        let key = (ctx, EdgeId(row.edge), on_grid(row.from)?);
                        if table.insert(key, on_grid(row.to)?).is_some() {
                            return Err(FormatError::Reference(format!(
                                "dimension `{}`: duplicate table row for context {}, edge {}, level {}",
                                d.name, row.context, row.edge, row.from.0
                            )));
                        }
                    }
                    CostRule::ExplicitTable(table)
                }
            };
            dimensions.push(Dimension {
                name: d.name.clone(),
                rule,
                grid,
                delta_min: d.delta_min.map(|n| n.0),
            });
        }

        let edges = self
            .edges
            .iter()
            .map(|e| {
                Ok((
                    node(&e.from)?,
                    node(&e.to)?,
                    attr(&e.attribute)?,
                    e.weights.iter().map(|n| n.0).collect(),
                ))
            })
            .collect::<Result<Vec<_>, FormatError>>()?;

        let targets = self
            .targets
            .iter()
            .map(|t| node(t))
            .collect::<Result<BTreeSet<_>, _>>()?;

        Ok(Instance::new(InstanceParts {
            nodes: self.nodes.clone(),
            attributes: self.attributes.clone(),
            contexts,
            edges,
            dimensions,
            source: node(&self.source)?,
            targets,
            context_transition: Some(transition),
        })?)
    }

    pub fn from_instance(instance: &Instance) -> Self {
        let attr_name = |a: AttributeId| instance.attributes()[a.index()].clone();
        let (mode, contexts, context_table) = match instance.context_transition() {
            ContextTransition::LastAttribute => (ContextMode::LastAttribute, Vec::new(), Vec::new()),
            ContextTransition::Table(table) => (
                ContextMode::Table,
                instance
                    .contexts()
                    .iter()
                    .map(|c| ContextDoc {
                        name: c.name.clone(),
                        attribute: c.attribute.map(attr_name),
                    })
                    .collect(),
                table
                    .iter()
                    .map(|(&(c, a), &n)| ContextTableRow {
                        context: instance.context_name(c).to_string(),
                        attribute: attr_name(a),
                        next: instance.context_name(n).to_string(),
                    })
                    .collect(),
            ),
        };
        let dimensions = instance
            .dimensions()
            .iter()
            .map(|d| {
                let (rule, penalty, table) = match &d.rule {
                    CostRule::Additive => (RuleKind::Additive, None, Vec::new()),
                    CostRule::AttributeSwitch { penalty } => (RuleKind::AttributeSwitch, Some(Num(*penalty)), Vec::new()),
                    CostRule::ExplicitTable(t) => (
                        RuleKind::Table,
                        None,
                        t.iter()
                            .map(|(&(c, e, from), &to)| RuleTableRow {
                                context: instance.context_name(c).to_string(),
                                edge: e.0,
                                from: Num(d.grid.level(from)),
                                to: Num(d.grid.level(to)),
                            })
                            .collect(),
                    ),
                };
                DimensionDoc {
                    name: d.name.clone(),
                    rule,
                    grid: d.grid.levels().iter().copied().map(Num).collect(),
                    budget: Num(d.grid.budget()),
                    delta_min: d.delta_min.map(Num),
                    penalty,
                    table,
                }
            })
            .collect();
        InstanceDoc {
            nodes: instance.node_names().to_vec(),
            attributes: instance.attributes().to_vec(),
            source: instance.node_name(instance.source()).to_string(),
            targets: instance
                .targets()
                .iter()
                .map(|&t| instance.node_name(t).to_string())
                .collect(),
            context_transition: mode,
            contexts,
            context_table,
            dimensions,
            edges: instance
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    from: instance.node_name(e.src).to_string(),
                    to: instance.node_name(e.dst).to_string(),
                    attribute: attr_name(e.attribute),
                    weights: e.weights.iter().copied().map(Num).collect(),
                })
                .collect(),
        }
    }
}

fn serde_plain_rule(kind: RuleKind) -> &'static str {
    match kind {
        RuleKind::Additive => "additive",
        RuleKind::AttributeSwitch => "attribute-switch",
        RuleKind::Table => "table",
    }
}

/// Parses a document without running validation.
pub fn parse_instance_unchecked(text: &str) -> Result<Instance, FormatError> {
    let doc: InstanceDoc = toml::from_str(text).map_err(|e| FormatError::Syntax(e.to_string()))?;
    doc.into_instance()
}

/// Parses and validates a document. Validation warnings are accepted.
pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    let instance = parse_instance_unchecked(text)?;
    let report = validate_instance(&instance);
    if report.is_valid() {
        Ok(instance)
    } else {
        Err(FormatError::Invalid(report))
    }
}

pub fn emit_instance(instance: &Instance) -> String {
    toml::to_string(&InstanceDoc::from_instance(instance)).expect("instance documents always serialize")
}
