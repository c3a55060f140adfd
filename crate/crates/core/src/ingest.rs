//! Dataset loading: WebNLG XML, the canonical JSON-lines format, and
//! dataset statistics.
//!
//! Canonical format, one JSON object per line (UTF-8, LF):
//!
//! ```text
//! {"id":"...","triples":[["head","relation","tail"],...],"refs":["..."],"split":"train","category":"Airport"}
//! ```
//!
//! `category` is omitted when absent.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{assign_levels, GraphError, KnowledgeGraph, Triple};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed XML at line {line}: {message}")]
    XmlMalformed { line: u32, message: String },
    #[error("entry {entry}: triple {text:?} does not have exactly three '|'-separated fields")]
    TripleFieldCount { entry: String, text: String },
    #[error("entry {entry} has no triples")]
    EmptyEntry { entry: String },
    #[error("entry {entry}: {source}")]
    Graph {
        entry: String,
        #[source]
        source: GraphError,
    },
    #[error("line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("duplicate entry id {id:?}")]
    DuplicateId { id: String },
    #[error("entry {id} is in split {split} but has no references")]
    MissingReferences { id: String, split: Split },
}

impl IngestError {
    fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?} (expected train, dev or test)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub entry_id: String,
    pub graph: KnowledgeGraph,
    pub references: Vec<String>,
    pub split: Split,
    pub category: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    pub name: String,
    entries: Vec<DatasetEntry>,
}

impl Dataset {
    /// Validates id uniqueness and that train/dev entries carry references.
    pub fn new(name: impl Into<String>, entries: Vec<DatasetEntry>) -> Result<Self, IngestError> {
        let mut ids = HashSet::with_capacity(entries.len());
        for e in &entries {
            if !ids.insert(e.entry_id.as_str()) {
                return Err(IngestError::DuplicateId {
                    id: e.entry_id.clone(),
                });
            }
            if e.references.is_empty() && e.split != Split::Test {
                return Err(IngestError::MissingReferences {
                    id: e.entry_id.clone(),
                    split: e.split,
                });
            }
        }
        Ok(Self {
            name: name.into(),
            entries,
        })
    }

    /// Concatenates datasets, e.g. the per-size WebNLG training files.
    pub fn merge(name: impl Into<String>, parts: Vec<Dataset>) -> Result<Self, IngestError> {
        let entries = parts.into_iter().flat_map(|d| d.entries).collect();
        Self::new(name, entries)
    }

    pub fn entries(&self) -> &[DatasetEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &DatasetEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Keeps only entries of the given split.
    pub fn filter_split(&self, split: Split) -> Dataset {
        Dataset {
            name: self.name.clone(),
            entries: self.split(split).cloned().collect(),
        }
    }
}

/// `"New_York_City"` becomes `"New York City"`.
pub fn entity_surface(raw: &str) -> String {
    raw.replace('_', " ")
}

/// Inserts a space before every uppercase letter that follows a lowercase one:
/// `"isPartOf"` becomes `"is Part Of"`.
pub fn relation_surface(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len() + 4);
    let mut prev_lower = false;
    for c in raw.chars() {
        if prev_lower && c.is_uppercase() {
            out.push(' ');
        }
        prev_lower = c.is_lowercase();
        out.push(c);
    }
    out
}

/// Parses a WebNLG modified triple `"head | relation | tail"`.
pub fn parse_webnlg_triple(entry: &str, text: &str) -> Result<Triple, IngestError> {
    let fields: Vec<&str> = text.split('|').collect();
    let [head, relation, tail] = fields.as_slice() else {
        return Err(IngestError::TripleFieldCount {
            entry: entry.to_string(),
            text: text.to_string(),
        });
    };
    Triple::new(
        entity_surface(head.trim()),
        relation_surface(relation.trim()),
        entity_surface(tail.trim()),
    )
    .map_err(|source| IngestError::Graph {
        entry: entry.to_string(),
        source,
    })
}

fn lex_text(lex: roxmltree::Node<'_, '_>) -> String {
    // Older releases nest the sentence in <text>; v3.0 stores it directly.
    let node = lex
        .children()
        .find(|c| c.has_tag_name("text"))
        .unwrap_or(lex);
    node.children()
        .filter(|c| c.is_text())
        .filter_map(|c| c.text())
        .collect::<String>()
        .trim()
        .to_string()
}

/// Parses WebNLG XML held in memory. `source_name` is only used for messages.
pub fn parse_webnlg_xml(xml: &str, split: Split, name: &str) -> Result<Dataset, IngestError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| IngestError::XmlMalformed {
        line: e.pos().row,
        message: e.to_string(),
    })?;

    let mut entries = Vec::new();
    for entry in doc.descendants().filter(|n| n.has_tag_name("entry")) {
        let eid = entry.attribute("eid").unwrap_or("");
        let category = entry.attribute("category").map(str::to_string);
        let size = entry.attribute("size").unwrap_or("");
        let entry_id = format!(
            "{split}/{size}/{}/{}",
            category.as_deref().unwrap_or(""),
            if eid.is_empty() {
                (entries.len() + 1).to_string()
            } else {
                eid.to_string()
            }
        );

        let triples = entry
            .children()
            .filter(|c| c.has_tag_name("modifiedtripleset"))
            .flat_map(|set| set.children().filter(|c| c.has_tag_name("mtriple")))
            .map(|m| parse_webnlg_triple(&entry_id, m.text().unwrap_or("")))
            .collect::<Result<Vec<_>, _>>()?;
        if triples.is_empty() {
            return Err(IngestError::EmptyEntry { entry: entry_id });
        }
        let graph = KnowledgeGraph::new(triples).map_err(|source| IngestError::Graph {
            entry: entry_id.clone(),
            source,
        })?;

        let references = entry
            .children()
            .filter(|c| c.has_tag_name("lex"))
            .map(lex_text)
            .filter(|t| !t.is_empty())
            .collect();

        entries.push(DatasetEntry {
            entry_id,
            graph,
            references,
            split,
            category,
        });
    }
    Dataset::new(name, entries)
}

pub fn load_webnlg_xml(path: &Path, split: Split) -> Result<Dataset, IngestError> {
    let xml = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    parse_webnlg_xml(&xml, split, &file_stem(path))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalRecord {
    id: String,
    triples: Vec<[String; 3]>,
    refs: Vec<String>,
    split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    category: Option<String>,
}

pub fn write_canonical<W: Write>(dataset: &Dataset, mut out: W) -> io::Result<()> {
    for e in dataset.entries() {
        let record = CanonicalRecord {
            id: e.entry_id.clone(),
            triples: e
                .graph
                .triples()
                .iter()
                .map(|t| [t.head().into(), t.relation().into(), t.tail().into()])
                .collect(),
            refs: e.references.clone(),
            split: e.split,
            category: e.category.clone(),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_canonical<R: BufRead>(reader: R, name: &str) -> Result<Dataset, IngestError> {
    let mut entries = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| IngestError::ParseError {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CanonicalRecord =
            serde_json::from_str(&line).map_err(|e| IngestError::ParseError {
                line: line_no,
                message: e.to_string(),
            })?;
        if !ids.insert(rec.id.clone()) {
            return Err(IngestError::DuplicateId { id: rec.id });
        }
        let triples = rec
            .triples
            .iter()
            .map(|[h, r, t]| Triple::new(h, r, t))
            .collect::<Result<Vec<_>, _>>()
            .and_then(KnowledgeGraph::new)
            .map_err(|e| IngestError::ParseError {
                line: line_no,
                message: format!("entry {}: {e}", rec.id),
            })?;
        entries.push(DatasetEntry {
            entry_id: rec.id,
            graph: triples,
            references: rec.refs,
            split: rec.split,
            category: rec.category,
        });
    }
    Dataset::new(name, entries)
}

pub fn load_canonical(path: &Path) -> Result<Dataset, IngestError> {
    let file = fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    read_canonical(BufReader::new(file), &file_stem(path))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatsReport {
    pub name: String,
    pub total: usize,
    pub splits: BTreeMap<Split, usize>,
    /// Number of entries per triple count.
    pub triple_histogram: BTreeMap<usize, usize>,
    pub distinct_relations: usize,
    pub distinct_entities: usize,
    pub distinct_categories: usize,
    pub max_level: u32,
}

pub fn dataset_stats(dataset: &Dataset) -> StatsReport {
    let mut splits: BTreeMap<Split, usize> = Split::ALL.iter().map(|&s| (s, 0)).collect();
    let mut triple_histogram = BTreeMap::new();
    let mut relations = BTreeSet::new();
    let mut entities = BTreeSet::new();
    let mut categories = BTreeSet::new();
    let mut max_level = 0;
    for e in dataset.entries() {
        *splits.entry(e.split).or_default() += 1;
        *triple_histogram.entry(e.graph.len()).or_default() += 1;
        for t in e.graph.triples() {
            relations.insert(t.relation());
        }
        entities.extend(e.graph.entities().iter().map(String::as_str));
        if let Some(c) = &e.category {
            categories.insert(c.as_str());
        }
        max_level = max_level.max(assign_levels(&e.graph).max_level());
    }
    StatsReport {
        name: dataset.name.clone(),
        total: dataset.len(),
        splits,
        triple_histogram,
        distinct_relations: relations.len(),
        distinct_entities: entities.len(),
        distinct_categories: categories.len(),
        max_level,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::t;

    const MINIMAL: &str = r#"<?xml version="1.0" ?>
<benchmark>
  <entries>
    <entry category="Test" eid="Id1" shape="" shape_type="" size="1">
      <originaltripleset><otriple>A | r | B</otriple></originaltripleset>
      <modifiedtripleset>
        <mtriple>A | r | B</mtriple>
      </modifiedtripleset>
      <lex comment="good" lid="Id1">A r B.</lex>
    </entry>
  </entries>
</benchmark>
"#;

    #[test]
    fn minimal_document() {
        let d = parse_webnlg_xml(MINIMAL, Split::Train, "min").unwrap();
        assert_eq!(d.len(), 1);
        let e = &d.entries()[0];
        assert_eq!(e.references, ["A r B."]);
        assert_eq!(e.graph.triples(), [t("A", "r", "B")]);
        assert_eq!(e.category.as_deref(), Some("Test"));
        assert_eq!(e.entry_id, "train/1/Test/Id1");
    }

    #[test]
    fn surface_forms() {
        assert_eq!(relation_surface("isPartOf"), "is Part Of");
        assert_eq!(relation_surface("leaderName"), "leader Name");
        assert_eq!(relation_surface("ISBN_number"), "ISBN_number");
        assert_eq!(relation_surface("country"), "country");
        assert_eq!(entity_surface("New_York_City"), "New York City");
        let tr = parse_webnlg_triple("e", " Cyrus_Vance_Jr. | leaderName | New_York ").unwrap();
        assert_eq!(tr, t("Cyrus Vance Jr.", "leader Name", "New York"));
    }

    #[test]
    fn triple_field_count() {
        assert!(matches!(
            parse_webnlg_triple("e", "A | B"),
            Err(IngestError::TripleFieldCount { .. })
        ));
        assert!(matches!(
            parse_webnlg_triple("e", "A | B | C | D"),
            Err(IngestError::TripleFieldCount { .. })
        ));
    }

    #[test]
    fn xml_errors() {
        let err = parse_webnlg_xml("<benchmark>\n<entries>\n<entry>\n</benchmark>", Split::Dev, "x")
            .unwrap_err();
        assert!(matches!(err, IngestError::XmlMalformed { line: 4, .. }), "{err}");

        let empty = "<benchmark><entries><entry eid=\"Id9\"><lex>x</lex></entry></entries></benchmark>";
        assert!(matches!(
            parse_webnlg_xml(empty, Split::Dev, "x"),
            Err(IngestError::EmptyEntry { .. })
        ));
    }

    #[test]
    fn nested_lex_text() {
        let xml = "<benchmark><entries><entry eid=\"1\" size=\"1\"><modifiedtripleset><mtriple>A | r | B</mtriple></modifiedtripleset>\
                   <lex><sortedtripleset/><text>Hello there.</text><template>AGENT-1</template></lex></entry></entries></benchmark>";
        let d = parse_webnlg_xml(xml, Split::Test, "x").unwrap();
        assert_eq!(d.entries()[0].references, ["Hello there."]);
        assert_eq!(d.entries()[0].category, None);
    }

    #[test]
    fn canonical_minimal_and_duplicates() {
        let line = r#"{"id":"e1","triples":[["A","r","B"]],"refs":["A r B."],"split":"train"}"#;
        let d = read_canonical(line.as_bytes(), "c").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.entries()[0].category, None);

        let mut out = Vec::new();
        write_canonical(&d, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{line}\n"));

        let dup = format!("{line}\n{line}\n");
        assert!(matches!(
            read_canonical(dup.as_bytes(), "c"),
            Err(IngestError::DuplicateId { .. })
        ));
        let bad = "{\"id\":\"e1\",\"triples\":[[\"A\",\"r\"]],\"refs\":[],\"split\":\"train\"}";
        assert!(matches!(
            read_canonical(bad.as_bytes(), "c"),
            Err(IngestError::ParseError { line: 1, .. })
        ));
        let dup_triple = r#"{"id":"e1","triples":[["A","r","B"],["A","r","B"]],"refs":["x"],"split":"dev"}"#;
        assert!(matches!(
            read_canonical(dup_triple.as_bytes(), "c"),
            Err(IngestError::ParseError { line: 1, .. })
        ));
    }

    #[test]
    fn unlabeled_test_entries_allowed() {
        let line = r#"{"id":"e1","triples":[["A","r","B"]],"refs":[],"split":"test"}"#;
        assert!(read_canonical(line.as_bytes(), "c").is_ok());
        let line = r#"{"id":"e1","triples":[["A","r","B"]],"refs":[],"split":"train"}"#;
        assert!(matches!(
            read_canonical(line.as_bytes(), "c"),
            Err(IngestError::MissingReferences { .. })
        ));
    }

    fn entry(id: &str, n: usize, split: Split) -> DatasetEntry {
        let triples = (0..n).map(|i| t(&format!("e{i}"), "r", &format!("e{}", i + 1))).collect();
        DatasetEntry {
            entry_id: id.into(),
            graph: KnowledgeGraph::new(triples).unwrap(),
            references: vec!["x".into()],
            split,
            category: None,
        }
    }

    #[test]
    fn stats() {
        let empty = dataset_stats(&Dataset::default());
        assert_eq!(empty.total, 0);
        assert!(empty.splits.values().all(|&c| c == 0));
        assert!(empty.triple_histogram.is_empty());
        assert_eq!(empty.max_level, 0);

        let d = Dataset::new(
            "s",
            vec![
                entry("a", 1, Split::Train),
                entry("b", 2, Split::Train),
                entry("c", 3, Split::Dev),
            ],
        )
        .unwrap();
        let s = dataset_stats(&d);
        assert_eq!(s.triple_histogram, BTreeMap::from([(1, 1), (2, 1), (3, 1)]));
        assert_eq!(s.splits[&Split::Train], 2);
        assert_eq!(s.splits[&Split::Dev], 1);
        assert_eq!(s.splits[&Split::Test], 0);
        assert_eq!(s.distinct_relations, 1);
        assert_eq!(s.distinct_entities, 4);
        assert_eq!(s.max_level, 3);
    }
}
