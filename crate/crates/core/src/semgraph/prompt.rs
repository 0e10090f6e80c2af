use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GraphError, OrderedSemanticGraph};
use crate::masking::{SemanticClass, CLASS_COUNT};

/// Placeholder replaced by the prompt chosen for the previous class.
pub const WILDCARD: char = '#';

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PromptTemplate(String);

impl PromptTemplate {
    pub fn new(text: impl Into<String>) -> Result<Self, GraphError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(GraphError::InvalidPrompt(text, "empty prompt"));
        }
        if text.matches(WILDCARD).count() > 1 {
            return Err(GraphError::InvalidPrompt(text, "more than one wildcard"));
        }
        Ok(PromptTemplate(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn has_wildcard(&self) -> bool {
        self.0.contains(WILDCARD)
    }

    /// Substitutes the wildcard with `previous`; without a previous prompt the
    /// wildcard is dropped and doubled spaces are collapsed.
    pub fn render(&self, previous: Option<&str>) -> String {
        if !self.has_wildcard() {
            return self.0.clone();
        }
        match previous {
            Some(p) => self.0.replacen(WILDCARD, p, 1),
            None => self
                .0
                .replacen(WILDCARD, "", 1)
                .split_whitespace()
                .collect::<Vec<_>>()
                .join(" "),
        }
    }
}

impl TryFrom<String> for PromptTemplate {
    type Error = GraphError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        PromptTemplate::new(s)
    }
}

impl From<PromptTemplate> for String {
    fn from(p: PromptTemplate) -> String {
        p.0
    }
}

/// Prompt sets keyed by class, as read from `{"sky": ["..."], ...}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PromptConfig(BTreeMap<SemanticClass, Vec<PromptTemplate>>);

impl PromptConfig {
    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn get(&self, class: SemanticClass) -> &[PromptTemplate] {
        self.0.get(&class).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn to_array(&self) -> [Vec<PromptTemplate>; CLASS_COUNT] {
        SemanticClass::ALL.map(|c| self.get(c).to_vec())
    }

    /// Stock prompt sets for every class.
    pub fn builtin() -> Self {
        let table: [(SemanticClass, &[&str]); CLASS_COUNT] = [
            (
                SemanticClass::Sky,
                &["clear blue sky", "blue sky with clouds", "cloudy sky", "sky at golden hour"],
            ),
            (
                SemanticClass::Ground,
                &["cobblestone pavement", "sunlit gravel path", "wet street reflecting #"],
            ),
            (
                SemanticClass::Vegetation,
                &["green leafy trees", "lush grass", "dense foliage"],
            ),
            (
                SemanticClass::Water,
                &["water reflecting #", "calm lake water", "rippling sea surface"],
            ),
            (
                SemanticClass::HumanSubject,
                &["person in casual clothes", "face in soft daylight"],
            ),
            (
                SemanticClass::NonHumanSubject,
                &["dog with brown fur", "parked car with glossy paint"],
            ),
            (
                SemanticClass::Cityscape,
                &["city buildings with windows", "brick facade", "glass skyscraper reflecting #"],
            ),
            (
                SemanticClass::Indoor,
                &["bright window light", "lamp with a glowing filament", "window with a view of #"],
            ),
            (
                SemanticClass::Others,
                &["detailed texture", "surface with fine detail"],
            ),
        ];
        PromptConfig(
            table
                .iter()
                .map(|(c, ps)| {
                    (
                        *c,
                        ps.iter()
                            .map(|p| PromptTemplate::new(*p).expect("builtin prompt"))
                            .collect(),
                    )
                })
                .collect(),
        )
    }
}

fn class_seed(seed: u64, class: SemanticClass) -> u64 {
    seed ^ (class.id() as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Draws a prompt for `class` and resolves its wildcard against `history`.
///
/// The choice is uniform over the class prompt set, driven by a generator
/// seeded from `(seed, class)`. An `override_text` replaces sampling but still
/// gets wildcard substitution.
pub fn sample_prompt(
    g: &OrderedSemanticGraph,
    class: SemanticClass,
    seed: u64,
    history: &[String],
    override_text: Option<&str>,
) -> Result<String, GraphError> {
    let previous = history.last().map(String::as_str);
    if let Some(text) = override_text {
        return Ok(PromptTemplate::new(text)?.render(previous));
    }
    let prompts = g.prompts(class);
    if prompts.is_empty() {
        return Err(GraphError::EmptyPromptSet(class));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(class_seed(seed, class));
    let pick = rng.random_range(0..prompts.len());
    Ok(prompts[pick].render(previous))
}
