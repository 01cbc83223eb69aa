use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::codec::{canonicalize, decode, encode, DocTree, Value, Vocab};

pub type Quad = [[f64; 2]; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextSequence {
    pub text_sequence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub gt_parse: TextSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordRecord {
    pub text: String,
    /// Clockwise from top-left, pixel coordinates.
    pub quad: Quad,
}

/// One line of `metadata.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub file_name: String,
    pub ground_truth: GroundTruth,
    pub words: Vec<WordRecord>,
}

impl ManifestRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("manifest record serialization")
    }
}

/// Appends records from any thread. [`ManifestWriter::finish`] reorders the
/// file by `file_name`, so the result does not depend on completion order.
pub struct ManifestWriter {
    path: PathBuf,
    out: Mutex<BufWriter<File>>,
}

impl ManifestWriter {
    pub fn create(path: impl Into<PathBuf>) -> io::Result<Self> {
        let path = path.into();
        let file = File::create(&path)?;
        Ok(ManifestWriter {
            path,
            out: Mutex::new(BufWriter::new(file)),
        })
    }

    pub fn append(&self, record: &ManifestRecord) -> io::Result<()> {
        let line = record.to_line();
        let mut out = self.out.lock().expect("manifest writer poisoned");
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")
    }

    pub fn finish(self) -> io::Result<PathBuf> {
        let mut out = self.out.into_inner().expect("manifest writer poisoned");
        out.flush()?;
        drop(out);
        let text = std::fs::read_to_string(&self.path)?;
        let mut keyed: Vec<(String, &str)> = text
            .lines()
            .map(|line| {
                let key = serde_json::from_str::<ManifestRecord>(line)
                    .map(|r| r.file_name)
                    .unwrap_or_default();
                (key, line)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        let mut sorted = String::with_capacity(text.len());
        for (_, line) in keyed {
            sorted.push_str(line);
            sorted.push('\n');
        }
        std::fs::write(&self.path, sorted)?;
        Ok(self.path)
    }
}

pub fn read_manifest(path: &Path) -> io::Result<Vec<ManifestRecord>> {
    let reader = BufReader::new(File::open(path)?);
    reader
        .lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|l| {
            let l = l?;
            serde_json::from_str(&l).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Schema,
    DuplicateFileName,
    QuadOutOfBounds,
    MissingImage,
    TextMismatch,
    CodecMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Zero-based record (line) index.
    pub index: usize,
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub records: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

/// Checks schema, file-name uniqueness and quad coordinates. Strict mode also
/// opens every image to check bounds against its size, and checks that the
/// word texts spell the text sequence and that the parse survives the codec.
/// Only I/O failures on the manifest itself are errors.
pub fn validate_manifest(path: &Path, strict: bool) -> io::Result<ValidationReport> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let vocab = Vocab::new(["text_sequence"], [], [], 0).expect("static vocabulary");
    let mut report = ValidationReport::default();
    let mut first_seen: HashMap<String, usize> = HashMap::new();

    for (index, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        report.records += 1;
        let mut flag = |kind, message: String| {
            report.violations.push(Violation {
                index,
                kind,
                message,
            })
        };
        let record: ManifestRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                flag(ViolationKind::Schema, e.to_string());
                continue;
            }
        };
        if let Some(first) = first_seen.get(&record.file_name) {
            flag(
                ViolationKind::DuplicateFileName,
                format!("{} already used by record {first}", record.file_name),
            );
        } else {
            first_seen.insert(record.file_name.clone(), index);
        }

        let mut limit = (f64::INFINITY, f64::INFINITY);
        if strict {
            match image::image_dimensions(base.join(&record.file_name)) {
                Ok((w, h)) => limit = (w as f64, h as f64),
                Err(e) => flag(
                    ViolationKind::MissingImage,
                    format!("{}: {e}", record.file_name),
                ),
            }
        }
        for (w, word) in record.words.iter().enumerate() {
            let outside = word.quad.iter().any(|&[x, y]| {
                !(x.is_finite() && y.is_finite())
                    || x < 0.0
                    || y < 0.0
                    || x > limit.0
                    || y > limit.1
            });
            if outside {
                flag(
                    ViolationKind::QuadOutOfBounds,
                    format!("word {w} ({:?}) quad {:?}", word.text, word.quad),
                );
            }
        }

        if strict {
            let joined = record
                .words
                .iter()
                .map(|w| w.text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            let expected = &record.ground_truth.gt_parse.text_sequence;
            if &joined != expected {
                flag(
                    ViolationKind::TextMismatch,
                    format!("words spell {joined:?}, text_sequence is {expected:?}"),
                );
            }
            let tree = DocTree::from_pairs([("text_sequence", Value::text(expected.clone()))]);
            let ok = encode(&tree, &vocab)
                .map(|seq| decode(&seq) == (canonicalize(&tree), Vec::new()))
                .unwrap_or(false);
            if !ok {
                flag(
                    ViolationKind::CodecMismatch,
                    "ground truth does not survive encode/decode".into(),
                );
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(name: &str, quad: Quad) -> ManifestRecord {
        ManifestRecord {
            file_name: name.into(),
            ground_truth: GroundTruth {
                gt_parse: TextSequence {
                    text_sequence: "hi".into(),
                },
            },
            words: vec![WordRecord {
                text: "hi".into(),
                quad,
            }],
        }
    }

    const BOX: Quad = [[1.0, 1.0], [5.0, 1.0], [5.0, 4.0], [1.0, 4.0]];

    fn write(records: &[ManifestRecord]) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metadata.jsonl");
        let w = ManifestWriter::create(&path).unwrap();
        for r in records {
            w.append(r).unwrap();
        }
        w.finish().unwrap();
        (dir, path)
    }

    #[test]
    fn writer_sorts_by_file_name() {
        let (_d, path) = write(&[record("images/00000002.png", BOX), record("images/00000001.png", BOX)]);
        let names: Vec<_> = read_manifest(&path)
            .unwrap()
            .into_iter()
            .map(|r| r.file_name)
            .collect();
        assert_eq!(names, vec!["images/00000001.png", "images/00000002.png"]);
    }

    #[test]
    fn negative_vertex_is_one_violation() {
        let mut bad = BOX;
        bad[0] = [-1.0, 5.0];
        let (_d, path) = write(&[record("a.png", BOX), record("b.png", bad)]);
        let report = validate_manifest(&path, false).unwrap();
        assert_eq!(report.records, 2);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].index, 1);
        assert_eq!(report.violations[0].kind, ViolationKind::QuadOutOfBounds);
    }

    #[test]
    fn duplicate_file_name() {
        let (_d, path) = write(&[record("a.png", BOX), record("a.png", BOX)]);
        let report = validate_manifest(&path, false).unwrap();
        assert_eq!(report.count(ViolationKind::DuplicateFileName), 1);
        assert_eq!(report.violations.len(), 1);
    }

    #[test]
    fn schema_and_strict_checks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metadata.jsonl");
        let good = record("img.png", BOX).to_line();
        std::fs::write(&path, format!("{good}\n{{\"file_name\": 3}}\n")).unwrap();
        let report = validate_manifest(&path, false).unwrap();
        assert_eq!(report.count(ViolationKind::Schema), 1);

        let report = validate_manifest(&path, true).unwrap();
        assert_eq!(report.count(ViolationKind::MissingImage), 1);

        image::RgbImage::new(4, 4).save(dir.path().join("img.png")).unwrap();
        let report = validate_manifest(&path, true).unwrap();
        // x = 5 exceeds the 4 px width.
        assert_eq!(report.count(ViolationKind::QuadOutOfBounds), 1);
        assert_eq!(report.count(ViolationKind::MissingImage), 0);
    }
}
