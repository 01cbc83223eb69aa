use super::{is_valid_name, CodecError, DocTree, Task, TokenItem, TokenSeq, Value, Vocab};

/// Depth-first serialization of `tree`.
pub fn encode(tree: &DocTree, vocab: &Vocab) -> Result<TokenSeq, CodecError> {
    let mut first_error = None;
    tree.for_each_field(|name| {
        if first_error.is_none() {
            if !is_valid_name(name) {
                first_error = Some(CodecError::InvalidFieldName(name.to_string()));
            } else if !vocab.has_field(name) {
                first_error = Some(CodecError::UnregisteredField(name.to_string()));
            }
        }
    });
    if let Some(err) = first_error {
        return Err(err);
    }
    tree.validate()?;

    let mut out = Vec::new();
    emit_pairs(&tree.fields, vocab, &mut out);
    if vocab.max_len() > 0 && out.len() > vocab.max_len() {
        return Err(CodecError::SequenceTooLong {
            limit: vocab.max_len(),
            actual: out.len(),
        });
    }
    Ok(TokenSeq(out))
}

fn emit_pairs(pairs: &[(String, Value)], vocab: &Vocab, out: &mut Vec<TokenItem>) {
    for (key, value) in pairs {
        match value {
            Value::Array(items) => {
                for item in items {
                    emit_group(key, item, vocab, out);
                }
            }
            other => emit_group(key, other, vocab, out),
        }
    }
}

fn emit_group(key: &str, value: &Value, vocab: &Vocab, out: &mut Vec<TokenItem>) {
    out.push(TokenItem::FieldStart(key.to_string()));
    match value {
        Value::Object(pairs) => emit_pairs(pairs, vocab, out),
        Value::Text(s) if vocab.has_class(s) => out.push(TokenItem::ClassToken(s.clone())),
        Value::Text(s) if s.is_empty() => {}
        Value::Text(s) => out.push(TokenItem::Text(s.clone())),
        Value::Array(_) => unreachable!("validated: arrays never nest"),
    }
    out.push(TokenItem::FieldEnd(key.to_string()));
}

/// Length of `encode(tree)` computed from the tree's shape alone: two
/// delimiters per non-array pair and per array element, plus one item per
/// non-empty text leaf.
pub fn encoded_len(tree: &DocTree) -> usize {
    fn pairs_len(pairs: &[(String, Value)]) -> usize {
        pairs
            .iter()
            .map(|(_, v)| match v {
                Value::Array(items) => items.iter().map(|i| 2 + value_len(i)).sum(),
                other => 2 + value_len(other),
            })
            .sum()
    }
    fn value_len(v: &Value) -> usize {
        match v {
            Value::Object(pairs) => pairs_len(pairs),
            Value::Text(s) => usize::from(!s.is_empty()),
            Value::Array(_) => 0,
        }
    }
    pairs_len(&tree.fields)
}

impl Vocab {
    /// Prefix sequence that conditions generation for `task`.
    ///
    /// For question-conditioned tasks `question` is required and is placed
    /// inside its own field before the opening token of the answer.
    pub fn make_prompt(&self, task: &str, question: Option<&str>) -> Result<TokenSeq, CodecError> {
        let spec = self
            .task(task)
            .ok_or_else(|| CodecError::UnregisteredPrompt(task.to_string()))?;
        let items = match (spec, question) {
            (Task::Question { question: q, answer }, Some(text)) => {
                let mut items = vec![TokenItem::FieldStart(q.clone())];
                if !text.is_empty() {
                    items.push(TokenItem::Text(text.to_string()));
                }
                items.push(TokenItem::FieldEnd(q.clone()));
                items.push(TokenItem::FieldStart(answer.clone()));
                items
            }
            (Task::Question { .. }, None) => {
                return Err(CodecError::MissingArgument(task.to_string()))
            }
            (_, Some(_)) => return Err(CodecError::UnexpectedArgument(task.to_string())),
            (Task::Field(f), None) => vec![TokenItem::FieldStart(f.clone())],
            (Task::Token(name), None) => vec![TokenItem::PromptToken(name.clone())],
        };
        Ok(TokenSeq(items))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocab {
        Vocab::new(
            vec!["class", "menu", "nm"],
            vec!["memo"],
            vec!["classification", "read_text", "docvqa", "cord"],
            0,
        )
        .unwrap()
    }

    #[test]
    fn class_token_example() {
        let t = DocTree::from_pairs([("class", Value::text("memo"))]);
        assert_eq!(
            encode(&t, &vocab()).unwrap().render(),
            "[START_class][memo][END_class]"
        );
    }

    #[test]
    fn empty_tree_is_empty_sequence() {
        assert!(encode(&DocTree::new(), &vocab()).unwrap().is_empty());
    }

    #[test]
    fn arrays_repeat_the_group() {
        let el = |s: &str| Value::Object(vec![("nm".into(), Value::text(s))]);
        let t = DocTree::from_pairs([("menu", Value::Array(vec![el("A"), el("B")]))]);
        assert_eq!(
            encode(&t, &vocab()).unwrap().render(),
            "[START_menu][START_nm] A [END_nm][END_menu][START_menu][START_nm] B [END_nm][END_menu]"
        );
        assert_eq!(encoded_len(&t), 10);
    }

    #[test]
    fn encode_errors() {
        let v = vocab();
        let t = DocTree::from_pairs([("other", Value::text("x"))]);
        assert_eq!(
            encode(&t, &v),
            Err(CodecError::UnregisteredField("other".into()))
        );
        let t = DocTree::from_pairs([("bad key", Value::text("x"))]);
        assert_eq!(
            encode(&t, &v),
            Err(CodecError::InvalidFieldName("bad key".into()))
        );
        let short = Vocab::new(vec!["nm"], vec![], vec![], 2).unwrap();
        let t = DocTree::from_pairs([("nm", Value::text("x"))]);
        assert_eq!(
            encode(&t, &short),
            Err(CodecError::SequenceTooLong { limit: 2, actual: 3 })
        );
    }

    #[test]
    fn prompts() {
        let v = vocab();
        assert_eq!(
            v.make_prompt("classification", None).unwrap().render(),
            "[START_class]"
        );
        assert_eq!(
            v.make_prompt("read_text", None).unwrap().render(),
            "[START_text_sequence]"
        );
        assert_eq!(
            v.make_prompt("docvqa", Some("what is the date?"))
                .unwrap()
                .render(),
            "[START_question] what is the date? [END_question][START_answer]"
        );
        assert_eq!(v.make_prompt("cord", None).unwrap().render(), "[cord]");
        assert_eq!(
            v.make_prompt("docvqa", None),
            Err(CodecError::MissingArgument("docvqa".into()))
        );
        assert_eq!(
            v.make_prompt("read_text", Some("q")),
            Err(CodecError::UnexpectedArgument("read_text".into()))
        );
        assert_eq!(
            v.make_prompt("summarize", None),
            Err(CodecError::UnregisteredPrompt("summarize".into()))
        );
    }

    #[test]
    fn prompt_is_strict_prefix_of_target() {
        let v = vocab();
        let cases = [
            (
                "classification",
                None,
                DocTree::from_pairs([("class", Value::text("memo"))]),
            ),
            (
                "read_text",
                None,
                DocTree::from_pairs([("text_sequence", Value::text("hello world"))]),
            ),
            (
                "docvqa",
                Some("what is the date?"),
                DocTree::from_pairs([
                    ("question", Value::text("what is the date?")),
                    ("answer", Value::text("1/2/93")),
                ]),
            ),
        ];
        for (task, q, gt) in cases {
            let prompt = v.make_prompt(task, q).unwrap();
            let target = encode(&gt, &v).unwrap();
            assert!(target.starts_with(&prompt), "{task}");
            assert!(target.len() > prompt.len());
        }
    }
}
