use serde::Serialize;

use super::{is_valid_name, DocTree, TokenItem, TokenSeq, Value};

/// Something the decoder had to discard or skip. Positions are item indices
/// into the decoded sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum RecoveryEvent {
    /// `[START_name]` never closed. Items `start..end` were discarded.
    LostField {
        name: String,
        start: usize,
        end: usize,
    },
    /// `[END_name]` with no open field of that name.
    StrayEnd { name: String, position: usize },
    /// Text outside every field, or next to child fields inside an object.
    OrphanText { position: usize },
    /// Task token found inside an open field.
    MisplacedPrompt { name: String, position: usize },
    /// Field delimiter whose name breaks the field-name rule.
    InvalidName { name: String, position: usize },
}

impl RecoveryEvent {
    pub fn is_lost_field(&self) -> bool {
        matches!(self, RecoveryEvent::LostField { .. })
    }
}

struct Frame {
    name: String,
    start: usize,
    children: Vec<(String, Value)>,
    texts: Vec<(usize, String)>,
}

impl Frame {
    fn close(self, events: &mut Vec<RecoveryEvent>) -> (String, Value) {
        let value = if !self.children.is_empty() {
            events.extend(
                self.texts
                    .iter()
                    .map(|&(position, _)| RecoveryEvent::OrphanText { position }),
            );
            Value::Object(fold(self.children))
        } else {
            let parts: Vec<String> = self.texts.into_iter().map(|(_, t)| t).collect();
            Value::Text(parts.join(" "))
        };
        (self.name, value)
    }
}

/// Merges same-key sibling groups: one occurrence stays a scalar, two or more
/// become an array in order of appearance.
fn fold(groups: Vec<(String, Value)>) -> Vec<(String, Value)> {
    let mut out: Vec<(String, Value)> = Vec::with_capacity(groups.len());
    for (key, value) in groups {
        match out.iter_mut().find(|(k, _)| *k == key) {
            Some((_, Value::Array(items))) => items.push(value),
            Some((_, existing)) => {
                let first = std::mem::replace(existing, Value::Array(Vec::new()));
                *existing = Value::Array(vec![first, value]);
            }
            None => out.push((key, value)),
        }
    }
    out
}

/// Rebuilds a tree from an arbitrary token sequence.
///
/// A field whose `[END_x]` is missing is dropped whole, together with
/// whatever got nested under it, when an enclosing field closes or input
/// ends. Task tokens before any open field are prompt echo and are skipped
/// silently. Total: never fails.
pub fn decode(seq: &TokenSeq) -> (DocTree, Vec<RecoveryEvent>) {
    let mut events = Vec::new();
    let mut root: Vec<(String, Value)> = Vec::new();
    let mut stack: Vec<Frame> = Vec::new();

    for (i, item) in seq.items().iter().enumerate() {
        match item {
            TokenItem::FieldStart(name) | TokenItem::FieldEnd(name) if !is_valid_name(name) => {
                events.push(RecoveryEvent::InvalidName {
                    name: name.clone(),
                    position: i,
                });
            }
            TokenItem::FieldStart(name) => stack.push(Frame {
                name: name.clone(),
                start: i,
                children: Vec::new(),
                texts: Vec::new(),
            }),
            TokenItem::FieldEnd(name) => {
                let Some(depth) = stack.iter().rposition(|f| f.name == *name) else {
                    events.push(RecoveryEvent::StrayEnd {
                        name: name.clone(),
                        position: i,
                    });
                    continue;
                };
                while stack.len() > depth + 1 {
                    let lost = stack.pop().expect("stack deeper than depth");
                    events.push(RecoveryEvent::LostField {
                        name: lost.name,
                        start: lost.start,
                        end: i,
                    });
                }
                let group = stack.pop().expect("matched frame").close(&mut events);
                match stack.last_mut() {
                    Some(parent) => parent.children.push(group),
                    None => root.push(group),
                }
            }
            TokenItem::Text(text) | TokenItem::ClassToken(text) => match stack.last_mut() {
                Some(frame) => frame.texts.push((i, text.clone())),
                None => events.push(RecoveryEvent::OrphanText { position: i }),
            },
            TokenItem::PromptToken(name) => {
                if !stack.is_empty() {
                    events.push(RecoveryEvent::MisplacedPrompt {
                        name: name.clone(),
                        position: i,
                    });
                }
            }
        }
    }
    while let Some(lost) = stack.pop() {
        events.push(RecoveryEvent::LostField {
            name: lost.name,
            start: lost.start,
            end: seq.len(),
        });
    }
    (DocTree { fields: fold(root) }, events)
}
