use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

use super::is_valid_name;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VocabError {
    #[error("invalid {kind} name {name:?}")]
    InvalidName { kind: &'static str, name: String },
    #[error("token [{0}] is registered twice")]
    Collision(String),
}

/// How a task prompt is formed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Task {
    /// The prompt opens the task's single output field.
    Field(String),
    /// The given question sits inside its own field, followed by the
    /// opening token of the answer field.
    Question { question: String, answer: String },
    /// A dedicated task token such as `[cord]`.
    Token(String),
}

impl Task {
    /// Built-in task schemas; any other prompt name becomes a task token.
    pub fn for_name(name: &str) -> Task {
        match name {
            "classification" => Task::Field("class".into()),
            "read_text" => Task::Field("text_sequence".into()),
            "docvqa" => Task::Question {
                question: "question".into(),
                answer: "answer".into(),
            },
            other => Task::Token(other.into()),
        }
    }

    fn fields(&self) -> Vec<&str> {
        match self {
            Task::Field(f) => vec![f],
            Task::Question { question, answer } => vec![question, answer],
            Task::Token(_) => vec![],
        }
    }
}

/// Registered special tokens. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    fields: BTreeSet<String>,
    classes: BTreeSet<String>,
    prompts: BTreeMap<String, Task>,
    max_len: usize,
}

/// On-disk form: `{"fields": [...], "classes": [...], "prompts": [...]}`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VocabFile {
    #[serde(default)]
    pub fields: Vec<String>,
    #[serde(default)]
    pub classes: Vec<String>,
    #[serde(default)]
    pub prompts: Vec<String>,
    #[serde(default)]
    pub max_length: usize,
}

impl Vocab {
    /// Builds a vocabulary. Fields used by built-in prompts are registered
    /// implicitly. `max_len == 0` means unlimited.
    pub fn new<S: AsRef<str>>(
        fields: impl IntoIterator<Item = S>,
        classes: impl IntoIterator<Item = S>,
        prompts: impl IntoIterator<Item = S>,
        max_len: usize,
    ) -> Result<Self, VocabError> {
        let mut vocab = Vocab {
            max_len,
            ..Vocab::default()
        };
        for f in fields {
            let f = f.as_ref();
            check_name("field", f)?;
            vocab.fields.insert(f.to_string());
        }
        for p in prompts {
            let p = p.as_ref();
            check_name("prompt", p)?;
            let task = Task::for_name(p);
            for f in task.fields() {
                vocab.fields.insert(f.to_string());
            }
            vocab.prompts.insert(p.to_string(), task);
        }
        // Plain `[name]` tokens share one namespace and must not look like
        // field delimiters.
        let mut plain = BTreeSet::new();
        let task_tokens = vocab.prompts.values().filter_map(|t| match t {
            Task::Token(name) => Some(("prompt", name.clone())),
            _ => None,
        });
        let class_tokens: Vec<_> = classes
            .into_iter()
            .map(|c| ("class", c.as_ref().to_string()))
            .collect();
        for (kind, name) in class_tokens.iter().cloned().chain(task_tokens) {
            check_name(kind, &name)?;
            if name.starts_with("START_") || name.starts_with("END_") {
                return Err(VocabError::Collision(name));
            }
            if kind == "class" && vocab.classes.contains(&name) {
                continue;
            }
            if !plain.insert(name.clone()) {
                return Err(VocabError::Collision(name));
            }
            if kind == "class" {
                vocab.classes.insert(name);
            }
        }
        Ok(vocab)
    }

    pub fn from_file(file: VocabFile) -> Result<Self, VocabError> {
        Vocab::new(file.fields, file.classes, file.prompts, file.max_length)
    }

    pub fn from_json(json: &str) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        let file: VocabFile = serde_json::from_str(json)?;
        Ok(Vocab::from_file(file)?)
    }

    pub fn has_field(&self, name: &str) -> bool {
        self.fields.contains(name)
    }

    pub fn has_class(&self, label: &str) -> bool {
        self.classes.contains(label)
    }

    pub fn has_prompt_token(&self, name: &str) -> bool {
        matches!(self.prompts.get(name), Some(Task::Token(_)))
    }

    pub fn task(&self, name: &str) -> Option<&Task> {
        self.prompts.get(name)
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(String::as_str)
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().map(String::as_str)
    }
}

fn check_name(kind: &'static str, name: &str) -> Result<(), VocabError> {
    if is_valid_name(name) {
        Ok(())
    } else {
        Err(VocabError::InvalidName {
            kind,
            name: name.to_string(),
        })
    }
}
