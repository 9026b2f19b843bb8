//! Name-keyed collections of interchangeable algorithm variants.

use crate::error::{Error, Result};

/// Variants of one algorithm family behind a shared trait object, selected by
/// name at runtime.
pub struct Registry<T: ?Sized> {
    entries: Vec<(&'static str, Box<T>)>,
}

impl<T: ?Sized> Default for Registry<T> {
    fn default() -> Self {
        Registry { entries: Vec::new() }
    }
}

impl<T: ?Sized> Registry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variant; a later registration under the same name replaces the
    /// earlier one.
    pub fn register(&mut self, name: &'static str, item: Box<T>) -> &mut Self {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, item));
        self
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, item)| item.as_ref())
            .ok_or_else(|| Error::UnknownStrategy(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}
