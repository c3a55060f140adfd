//! Knowledge-graph linearisation with level markers, graph-masking
//! pre-training corpora, experiment split protocols and BLEU/TER scoring.

pub mod graph;
pub mod ingest;
pub mod linearize;
pub mod mask;
pub mod metrics;
pub mod protocol;
pub mod synthetic;

pub use graph::{assign_levels, build_graph, find_roots, GraphError, KnowledgeGraph, LeveledGraph, Triple};
pub use ingest::{
    dataset_stats, load_canonical, load_webnlg_xml, write_canonical, Dataset, DatasetEntry,
    IngestError, Split, StatsReport,
};
pub use linearize::{linearize, parse_linearized, LinearizeOptions, Linearized, ParseError};
pub use mask::{
    build_corpus, mask, mask_relation, mask_triple, mask_triple_relation, reconstruct,
    CorpusManifest, MaskError, MaskPolicy, MaskedExample, Strategy,
};
pub use metrics::{MetricConfig, MetricError, ScoreReport, SegmentPair, Tokenizer};
pub use protocol::{sample_fraction, split_low_resource, ProtocolError, SplitMode, SplitPlan};
