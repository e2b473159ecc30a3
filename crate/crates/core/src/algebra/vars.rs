use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordered set of spatial variable names. The position of a name is its variable id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarSet {
    names: Vec<String>,
}

impl VarSet {
    /// `t` and `pi` are reserved and duplicates are rejected.
    pub fn new<I, S>(names: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            let valid = !n.is_empty()
                && n.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid || matches!(n.as_str(), "t" | "pi" | "sin" | "cos" | "exp") {
                return Err(Error::Config(format!("invalid variable name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::Config(format!("duplicate variable `{n}`")));
            }
        }
        Ok(Arc::new(Self { names }))
    }

    /// `x1, ..., xd`.
    pub fn indexed(prefix: &str, d: usize) -> Result<Arc<Self>> {
        Self::new((1..=d).map(|i| format!("{prefix}{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.names.join(", "))
    }
}

pub(crate) fn same_vars(a: &Arc<VarSet>, b: &Arc<VarSet>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}
