use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LibraryError;

/// One position of an intent example.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Word(String),
    /// Placeholder replaced by any phrase of the named entity grammar.
    Entity(String),
}

impl Token {
    pub fn as_str(&self) -> &str {
        match self {
            Token::Word(w) | Token::Entity(w) => w,
        }
    }

    pub fn is_entity(&self) -> bool {
        matches!(self, Token::Entity(_))
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn looks_like_placeholder(token: &str) -> bool {
    token.len() > 4 && token.starts_with("__") && token.ends_with("__")
}

fn is_reserved(token: &str) -> bool {
    token.starts_with('<') && token.ends_with('>')
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntentExample {
    pub intent_id: String,
    pub example_id: String,
    pub tokens: Vec<Token>,
    /// Words tolerated strictly between the example's tokens, in total.
    pub blank_quota: usize,
}

impl IntentExample {
    pub fn text(&self) -> String {
        let words: Vec<&str> = self.tokens.iter().map(Token::as_str).collect();
        words.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Intent {
    pub id: String,
    pub name: String,
    pub examples: Vec<IntentExample>,
}

/// Intents with their examples plus the entity phrase lists that
/// placeholders expand to.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntentLibrary {
    pub intents: Vec<Intent>,
    pub entities: BTreeMap<String, Vec<Vec<String>>>,
    pub default_blank_quota: usize,
}

impl IntentLibrary {
    pub fn new() -> Self {
        IntentLibrary::default()
    }

    pub fn add_entity<S: AsRef<str>>(&mut self, name: &str, phrases: &[S]) -> &mut Self {
        let phrases = phrases
            .iter()
            .map(|p| p.as_ref().split_whitespace().map(str::to_string).collect())
            .collect();
        self.entities.insert(name.to_string(), phrases);
        self
    }

    pub fn add_intent(&mut self, id: &str, name: &str) -> &mut Self {
        self.intents.push(Intent {
            id: id.to_string(),
            name: name.to_string(),
            examples: Vec::new(),
        });
        self
    }

    /// Adds an example given as space-separated tokens to the intent `id`,
    /// creating the intent if needed. Tokens naming a known entity, or
    /// written `__LIKE_THIS__`, become placeholders.
    pub fn add_example(&mut self, intent_id: &str, text: &str, blank_quota: usize) -> &mut Self {
        let tokens = text.split_whitespace().map(|t| self.classify(t)).collect();
        let pos = match self.intents.iter().position(|i| i.id == intent_id) {
            Some(pos) => pos,
            None => {
                self.add_intent(intent_id, intent_id);
                self.intents.len() - 1
            }
        };
        let intent = &mut self.intents[pos];
        let example_id = format!("{}/{}", intent_id, intent.examples.len());
        intent.examples.push(IntentExample {
            intent_id: intent_id.to_string(),
            example_id,
            tokens,
            blank_quota,
        });
        self
    }

    fn classify(&self, token: &str) -> Token {
        if self.entities.contains_key(token) || looks_like_placeholder(token) {
            Token::Entity(token.to_string())
        } else {
            Token::Word(token.to_string())
        }
    }

    pub fn examples(&self) -> impl Iterator<Item = &IntentExample> {
        self.intents.iter().flat_map(|i| i.examples.iter())
    }

    pub fn num_examples(&self) -> usize {
        self.intents.iter().map(|i| i.examples.len()).sum()
    }

    pub fn example(&self, example_id: &str) -> Option<&IntentExample> {
        self.examples().find(|e| e.example_id == example_id)
    }

    /// Checks the library invariants. An empty library is valid here; the
    /// file loader rejects it.
    pub fn validate(&self) -> Result<(), LibraryError> {
        for (name, phrases) in &self.entities {
            if phrases.is_empty() {
                return Err(LibraryError::EmptyEntity(name.clone()));
            }
            for phrase in phrases {
                if phrase.is_empty() {
                    return Err(LibraryError::EmptyPhrase(name.clone()));
                }
                if let Some(w) = phrase.iter().find(|w| is_reserved(w)) {
                    return Err(LibraryError::ReservedToken(w.clone()));
                }
            }
        }
        let mut intent_ids = BTreeSet::new();
        let mut example_ids = BTreeSet::new();
        for (i, intent) in self.intents.iter().enumerate() {
            let ptr = format!("/intents/{i}");
            if !intent_ids.insert(intent.id.as_str()) {
                return Err(LibraryError::DuplicateIntent {
                    pointer: format!("{ptr}/id"),
                    id: intent.id.clone(),
                });
            }
            if intent.examples.is_empty() {
                return Err(LibraryError::EmptyIntent {
                    pointer: format!("{ptr}/examples"),
                });
            }
            for (k, ex) in intent.examples.iter().enumerate() {
                let ptr = format!("{ptr}/examples/{k}");
                if !example_ids.insert(ex.example_id.as_str()) {
                    return Err(LibraryError::DuplicateExample(ex.example_id.clone()));
                }
                if ex.tokens.is_empty() {
                    return Err(LibraryError::EmptyExample {
                        pointer: format!("{ptr}/tokens"),
                    });
                }
                for (t, tok) in ex.tokens.iter().enumerate() {
                    match tok {
                        Token::Entity(name) if !self.entities.contains_key(name) => {
                            return Err(LibraryError::UnresolvedPlaceholder {
                                pointer: format!("{ptr}/tokens/{t}"),
                                token: name.clone(),
                            })
                        }
                        Token::Word(w) if is_reserved(w) => {
                            return Err(LibraryError::ReservedToken(w.clone()))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    /// Loads and validates the JSON library format. Errors carry
    /// JSON-pointer locations.
    pub fn from_json(text: &str) -> Result<Self, LibraryError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawLibrary = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = path_to_pointer(&e.path().to_string());
            LibraryError::Schema {
                pointer,
                message: e.inner().to_string(),
            }
        })?;
        let lib = raw.into_library()?;
        if lib.intents.is_empty() {
            return Err(LibraryError::NoIntents);
        }
        lib.validate()?;
        Ok(lib)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawLibrary::from_library(self)).expect("library serializes")
    }
}

// serde_path_to_error renders `intents[3].examples[0].tokens`
fn path_to_pointer(path: &str) -> String {
    if path == "." {
        return "/".into();
    }
    let mut out = String::new();
    for part in path.split('.') {
        let mut rest = part;
        if let Some(idx) = rest.find('[') {
            out.push('/');
            out.push_str(&rest[..idx]);
            rest = &rest[idx..];
            while let Some(end) = rest.find(']') {
                out.push('/');
                out.push_str(&rest[1..end]);
                rest = &rest[end + 1..];
            }
        } else {
            out.push('/');
            out.push_str(rest);
        }
    }
    out.replace("//", "/")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawId {
    Num(u64),
    Str(String),
}

impl RawId {
    fn into_string(self) -> String {
        match self {
            RawId::Num(n) => n.to_string(),
            RawId::Str(s) => s,
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawDefaults {
    #[serde(default)]
    blank_quota: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawExample {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<RawId>,
    tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blank_quota: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawIntent {
    id: RawId,
    #[serde(default)]
    name: String,
    examples: Vec<RawExample>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawLibrary {
    #[serde(default)]
    defaults: RawDefaults,
    intents: Vec<RawIntent>,
    #[serde(default)]
    entities: BTreeMap<String, Vec<Vec<String>>>,
}

impl RawLibrary {
    fn into_library(self) -> Result<IntentLibrary, LibraryError> {
        let mut lib = IntentLibrary {
            intents: Vec::new(),
            entities: self.entities,
            default_blank_quota: self.defaults.blank_quota,
        };
        for (i, raw) in self.intents.into_iter().enumerate() {
            let id = raw.id.into_string();
            let mut examples = Vec::new();
            for (k, ex) in raw.examples.into_iter().enumerate() {
                let mut tokens = Vec::new();
                for (t, tok) in ex.tokens.iter().enumerate() {
                    let token = lib.classify(tok);
                    if let Token::Entity(name) = &token {
                        if !lib.entities.contains_key(name) {
                            return Err(LibraryError::UnresolvedPlaceholder {
                                pointer: format!("/intents/{i}/examples/{k}/tokens/{t}"),
                                token: name.clone(),
                            });
                        }
                    }
                    tokens.push(token);
                }
                examples.push(IntentExample {
                    intent_id: id.clone(),
                    example_id: ex
                        .id
                        .map(RawId::into_string)
                        .unwrap_or_else(|| format!("{id}/{k}")),
                    tokens,
                    blank_quota: ex.blank_quota.unwrap_or(lib.default_blank_quota),
                });
            }
            let name = if raw.name.is_empty() { id.clone() } else { raw.name };
            lib.intents.push(Intent { id, name, examples });
        }
        Ok(lib)
    }

    fn from_library(lib: &IntentLibrary) -> RawLibrary {
        RawLibrary {
            defaults: RawDefaults {
                blank_quota: lib.default_blank_quota,
            },
            intents: lib
                .intents
                .iter()
                .map(|intent| RawIntent {
                    id: RawId::Str(intent.id.clone()),
                    name: intent.name.clone(),
                    examples: intent
                        .examples
                        .iter()
                        .map(|ex| RawExample {
                            id: Some(RawId::Str(ex.example_id.clone())),
                            tokens: ex.tokens.iter().map(|t| t.as_str().to_string()).collect(),
                            blank_quota: Some(ex.blank_quota),
                        })
                        .collect(),
                })
                .collect(),
            entities: lib.entities.clone(),
        }
    }
}
