use indexmap::IndexMap;

use super::{ModelError, Origin};
use crate::syntax::SourceSpan;

/// Root of the entity type lattice.
pub const ROOT_TYPE: &str = "Entity";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityType {
    pub name: String,
    /// `None` only for the root type.
    pub supertype: Option<String>,
    pub origin: Origin,
    pub span: Option<SourceSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    pub left: String,
    pub right: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationshipType {
    pub name: String,
    /// Overloads, in declaration order. Never empty.
    pub signatures: Vec<Signature>,
    pub origin: Origin,
    pub span: Option<SourceSpan>,
}

/// Subtype lattice over entity types plus relationship-type signatures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeTable {
    entity_types: IndexMap<String, EntityType>,
    relationship_types: IndexMap<String, RelationshipType>,
}

impl Default for TypeTable {
    fn default() -> Self {
        Self::new()
    }
}

impl TypeTable {
    pub fn new() -> TypeTable {
        let mut entity_types = IndexMap::new();
        entity_types.insert(
            ROOT_TYPE.to_string(),
            EntityType { name: ROOT_TYPE.to_string(), supertype: None, origin: Origin::Declared, span: None },
        );
        TypeTable { entity_types, relationship_types: IndexMap::new() }
    }

    pub fn entity_types(&self) -> impl Iterator<Item = &EntityType> {
        self.entity_types.values()
    }

    pub fn relationship_types(&self) -> impl Iterator<Item = &RelationshipType> {
        self.relationship_types.values()
    }

    pub fn entity_type(&self, name: &str) -> Option<&EntityType> {
        self.entity_types.get(name)
    }

    pub fn relationship_type(&self, name: &str) -> Option<&RelationshipType> {
        self.relationship_types.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entity_types.contains_key(name) || self.relationship_types.contains_key(name)
    }

    pub(crate) fn span_of(&self, name: &str) -> Option<SourceSpan> {
        self.entity_types
            .get(name)
            .and_then(|t| t.span.clone())
            .or_else(|| self.relationship_types.get(name).and_then(|r| r.span.clone()))
    }

    /// Reflexive-transitive subtype test.
    pub fn subtype_of(&self, a: &str, b: &str) -> Result<bool, ModelError> {
        if !self.entity_types.contains_key(b) {
            return Err(ModelError::UnknownType { name: b.to_string() });
        }
        let mut current = self.entity_types.get(a).ok_or_else(|| ModelError::UnknownType { name: a.to_string() })?;
        loop {
            if current.name == b {
                return Ok(true);
            }
            match &current.supertype {
                Some(sup) => current = &self.entity_types[sup.as_str()],
                None => return Ok(false),
            }
        }
    }

    /// Chain from `name` up to the root, inclusive.
    pub fn ancestors(&self, name: &str) -> Vec<&str> {
        let mut chain = Vec::new();
        let mut cur = self.entity_types.get(name);
        while let Some(t) = cur {
            chain.push(t.name.as_str());
            cur = t.supertype.as_deref().and_then(|s| self.entity_types.get(s));
        }
        chain
    }

    pub(crate) fn insert_entity_type(&mut self, ty: EntityType) -> Result<(), ModelError> {
        let sup = ty.supertype.as_deref().unwrap_or(ROOT_TYPE);
        if sup == ty.name {
            return Err(ModelError::TypeCycle { name: ty.name });
        }
        if !self.entity_types.contains_key(sup) {
            return Err(ModelError::UnknownName { name: sup.to_string() });
        }
        // The supertype already exists and reaches the root, so the new node
        // cannot close a cycle.
        self.entity_types.insert(ty.name.clone(), ty);
        Ok(())
    }

    pub(crate) fn insert_signature(
        &mut self,
        name: &str,
        signature: Signature,
        origin: Origin,
        span: Option<SourceSpan>,
    ) -> Result<bool, ModelError> {
        for side in [&signature.left, &signature.right] {
            if !self.entity_types.contains_key(side.as_str()) {
                return Err(ModelError::UnknownName { name: side.clone() });
            }
        }
        match self.relationship_types.get_mut(name) {
            Some(existing) => {
                if existing.signatures.contains(&signature) {
                    Ok(false)
                } else {
                    existing.signatures.push(signature);
                    Ok(true)
                }
            }
            None => {
                self.relationship_types.insert(
                    name.to_string(),
                    RelationshipType { name: name.to_string(), signatures: vec![signature], origin, span },
                );
                Ok(true)
            }
        }
    }
}
