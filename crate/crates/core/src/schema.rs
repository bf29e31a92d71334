use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::ValueKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Dimension,
    Measure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeDef {
    pub name: String,
    pub role: Role,
    pub kind: ValueKind,
}

impl AttributeDef {
    pub fn new(name: impl Into<String>, role: Role, kind: ValueKind) -> Self {
        Self {
            name: name.into(),
            role,
            kind,
        }
    }

    pub fn dimension(name: impl Into<String>, kind: ValueKind) -> Self {
        Self::new(name, Role::Dimension, kind)
    }

    pub fn measure(name: impl Into<String>) -> Self {
        Self::new(name, Role::Measure, ValueKind::Numeric)
    }
}

/// Ordered attribute list with unique names.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Schema {
    attrs: Vec<AttributeDef>,
}

impl Schema {
    pub fn new(attrs: Vec<AttributeDef>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for a in &attrs {
            if !seen.insert(a.name.as_str()) {
                return Err(Error::plan_type(format!("duplicate attribute `{}`", a.name)));
            }
        }
        Ok(Self { attrs })
    }

    pub fn attrs(&self) -> &[AttributeDef] {
        &self.attrs
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a.name == name)
    }

    pub fn get(&self, name: &str) -> Option<&AttributeDef> {
        self.attrs.iter().find(|a| a.name == name)
    }

    pub fn require(&self, name: &str) -> Result<&AttributeDef> {
        self.get(name)
            .ok_or_else(|| Error::plan_type(format!("unknown attribute `{name}`")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.attrs.iter().map(|a| a.name.as_str())
    }

    pub fn dimensions(&self) -> impl Iterator<Item = &AttributeDef> {
        self.attrs.iter().filter(|a| a.role == Role::Dimension)
    }

    pub fn measures(&self) -> impl Iterator<Item = &AttributeDef> {
        self.attrs.iter().filter(|a| a.role == Role::Measure)
    }

    /// Dimension names in lexicographic order, the form used for matching.
    pub fn canonical_dimensions(&self) -> Vec<&str> {
        let mut dims: Vec<&str> = self.dimensions().map(|a| a.name.as_str()).collect();
        dims.sort_unstable();
        dims
    }
}
