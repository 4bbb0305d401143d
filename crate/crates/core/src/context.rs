//! Environment shared by the simplifiers: metric, dimension, convention
//! flags, symmetry declarations and active component definitions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Indexed, ICHR2, KDELTA};
use crate::rules::ComponentTable;
use crate::symmetry::{Block, BlockKind, SymmetryDeclaration, SymmetryTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Dimension {
    /// Kept as the scalar symbol `dim`.
    #[default]
    Symbolic,
    Fixed(u32),
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Symbolic => f.write_str("dim"),
            Dimension::Fixed(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub name: Option<String>,
    pub dimension: Dimension,
}

#[derive(Debug, Clone)]
pub struct Context {
    pub metric: MetricConfig,
    /// `igeowedge_flag`: true selects the unnormalized antisymmetrization.
    pub geowedge: bool,
    pub symmetries: SymmetryTable,
    pub components: ComponentTable,
}

impl Default for Context {
    fn default() -> Self {
        Context::new()
    }
}

impl Context {
    pub fn new() -> Self {
        let mut symmetries = SymmetryTable::default();
        symmetries
            .declare(SymmetryDeclaration {
                name: ICHR2.into(),
                cov_arity: 2,
                contra_arity: 1,
                cov_blocks: vec![Block::all(BlockKind::Sym, 2)],
                contra_blocks: vec![],
            })
            .expect("fresh table");
        Context {
            metric: MetricConfig::default(),
            geowedge: true,
            symmetries,
            components: ComponentTable::default(),
        }
    }

    /// Context with `imetric(name)` already applied.
    pub fn with_metric(name: &str) -> Self {
        let mut ctx = Context::new();
        ctx.set_metric(name).expect("fresh context");
        ctx
    }

    /// Configures the metric and declares it symmetric.
    pub fn set_metric(&mut self, name: &str) -> Result<()> {
        if name == KDELTA || name == ICHR2 {
            return Err(Error::Unsupported(format!("{name} cannot be the metric")));
        }
        self.symmetries.declare(SymmetryDeclaration::symmetric(name, 2, 0))?;
        self.symmetries.declare(SymmetryDeclaration::symmetric(name, 0, 2))?;
        self.metric.name = Some(name.to_string());
        Ok(())
    }

    pub fn set_dimension(&mut self, dim: Dimension) {
        self.metric.dimension = dim;
    }

    pub fn metric_name(&self) -> Result<&str> {
        self.metric.name.as_deref().ok_or(Error::NoMetric)
    }

    pub fn is_metric(&self, t: &Indexed) -> bool {
        self.metric.name.as_deref() == Some(t.name.as_str())
    }
}
