//! Session-scoped fresh identifiers.
//!
//! Cost registers and solver-introduced integer variables share one id space;
//! renaming a CEFA register to a program integer variable is then just an id
//! substitution. Ids are unique within a [`Session`] and allocation is the
//! only mutable session state.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

// One process-wide counter: ids stay collision-free even across sessions
// (solver internals allocate auxiliary variables of their own).
static NEXT_ID: AtomicU64 = AtomicU64::new(0);

/// Allocator for fresh [`RegisterId`]s. Cheap to clone and share.
#[derive(Debug, Default, Clone)]
pub struct Session {}

impl Session {
    pub fn new() -> Self {
        Session::default()
    }

    /// A fresh register/variable with the given display name.
    pub fn fresh(&self, name: impl Into<Arc<str>>) -> RegisterId {
        let id = NEXT_ID.fetch_add(1, Ordering::Relaxed);
        RegisterId {
            id,
            name: name.into(),
        }
    }

    /// A fresh register named `{prefix}{id}`.
    pub fn fresh_numbered(&self, prefix: &str) -> RegisterId {
        let id = NEXT_ID.fetch_add(1, Ordering::Relaxed);
        RegisterId {
            id,
            name: format!("{prefix}{id}").into(),
        }
    }
}

/// Opaque identifier for a cost register or integer variable.
///
/// Equality, ordering, and hashing use only the numeric id; the name is for
/// display.
#[derive(Debug, Clone)]
pub struct RegisterId {
    id: u64,
    name: Arc<str>,
}

impl RegisterId {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn raw(&self) -> u64 {
        self.id
    }
}

impl PartialEq for RegisterId {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for RegisterId {}

impl PartialOrd for RegisterId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for RegisterId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}

impl std::hash::Hash for RegisterId {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl fmt::Display for RegisterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_ids_are_distinct() {
        let s = Session::new();
        let a = s.fresh("r");
        let b = s.fresh("r");
        assert_ne!(a, b);
        assert_eq!(a.name(), b.name());
    }

    #[test]
    fn clones_share_the_counter() {
        let s = Session::new();
        let s2 = s.clone();
        let a = s.fresh("x");
        let b = s2.fresh("x");
        assert_ne!(a, b);
    }
}
