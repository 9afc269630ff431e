//! CVSS vector templates keyed by failure mode.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::cvss::{
    AttackComplexity, AttackVector, CvssVector, Impact, PrivilegesRequired, Scope, UserInteraction,
};
use crate::findings::Phase;

use super::model::ModelError;

pub const BUNDLED_TEMPLATES: &str = include_str!("../../data/templates.toml");

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorTemplate {
    pub mode: String,
    pub vector: CvssVector,
    pub title: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateDocument {
    schema_version: u32,
    templates: Vec<VectorTemplate>,
}

#[derive(Debug, Clone, Default)]
pub struct TemplateSet {
    by_mode: BTreeMap<String, VectorTemplate>,
}

impl TemplateSet {
    pub fn bundled() -> TemplateSet {
        TemplateSet::parse(BUNDLED_TEMPLATES).expect("bundled templates are valid")
    }

    pub fn parse(source: &str) -> Result<TemplateSet, ModelError> {
        let doc: TemplateDocument =
            toml::from_str(source).map_err(|e| ModelError::Schema(e.to_string()))?;
        if doc.schema_version != 1 {
            return Err(ModelError::Schema(format!(
                "unsupported template schema_version {}",
                doc.schema_version
            )));
        }
        let mut by_mode = BTreeMap::new();
        for t in doc.templates {
            if by_mode.contains_key(&t.mode) {
                return Err(ModelError::Schema(format!(
                    "duplicate template for mode {}",
                    t.mode
                )));
            }
            by_mode.insert(t.mode.clone(), t);
        }
        Ok(TemplateSet { by_mode })
    }

    pub fn get(&self, mode: &str) -> Option<&VectorTemplate> {
        self.by_mode.get(mode)
    }

    pub fn iter(&self) -> impl Iterator<Item = &VectorTemplate> {
        self.by_mode.values()
    }
}

/// Low-impact vector used when a failure mode has no template.
pub fn conservative_vector(phase: Phase) -> CvssVector {
    let attack_vector = match phase {
        Phase::InformationGathering => AttackVector::Network,
        Phase::Nearby | Phase::SameNetwork => AttackVector::Adjacent,
        Phase::Physical => AttackVector::Physical,
        Phase::ShellAccess => AttackVector::Local,
    };
    CvssVector {
        attack_vector,
        attack_complexity: AttackComplexity::High,
        privileges_required: PrivilegesRequired::None,
        user_interaction: UserInteraction::None,
        scope: Scope::Unchanged,
        confidentiality: Impact::Low,
        integrity: Impact::None,
        availability: Impact::None,
    }
}
