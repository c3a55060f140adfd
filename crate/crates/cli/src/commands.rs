use std::collections::{BTreeMap, HashSet};
use std::io::{self, Write};
use std::path::Path;

use graphmask_core::protocol::SplitPlan;
use graphmask_core::{
    assign_levels, build_corpus, dataset_stats, linearize, load_canonical, load_webnlg_xml,
    sample_fraction, split_low_resource, write_canonical, Dataset, LinearizeOptions, MaskPolicy,
    MetricConfig, StatsReport,
};
use graphmask_core::metrics::{read_segments, score_report};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{
    IngestArgs, LevelizeArgs, MaskArgs, SampleArgs, ScoreArgs, SplitArgs, StatsArgs,
};
use crate::error::CliError;
use crate::output::{read_to_string, Manifest, Outputs};

fn level_options(no_markers: bool) -> LinearizeOptions {
    if no_markers {
        LinearizeOptions::without_level_markers()
    } else {
        LinearizeOptions::default()
    }
}

fn single_output(out: &Path, force: bool) -> Result<Outputs, CliError> {
    let mut outputs = Outputs::new(force);
    outputs.declare(out)?;
    Ok(outputs)
}

pub fn ingest(a: &IngestArgs) -> Result<(), CliError> {
    let outputs = single_output(&a.output.out, a.output.force)?;
    let parts = a
        .xml
        .iter()
        .map(|p| load_webnlg_xml(p, a.split))
        .collect::<Result<Vec<_>, _>>()?;
    let name = a
        .output
        .out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let dataset = Dataset::merge(name, parts)?;

    let out = &a.output.out;
    let mut w = outputs.create(out)?;
    write_canonical(&dataset, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(out, e))?;
    let inputs: Vec<&Path> = a.xml.iter().map(|p| p.as_path()).collect();
    let details = json!({ "split": a.split, "entries": dataset.len() });
    outputs.write_manifest(out, &Manifest::new("ingest", &inputs, out, details))
}

#[derive(Serialize)]
struct LevelRecord<'a> {
    id: &'a str,
    roots: Vec<&'a str>,
    /// Level of each triple, in input order.
    levels: &'a [u32],
    linearized: String,
}

pub fn levelize(a: &LevelizeArgs) -> Result<(), CliError> {
    let outputs = single_output(&a.output.out, a.output.force)?;
    let dataset = load_canonical(&a.input)?;
    let opts = level_options(a.no_level_markers);
    let lines: Vec<String> = dataset
        .entries()
        .par_iter()
        .map(|e| {
            let lg = assign_levels(&e.graph);
            let record = LevelRecord {
                id: &e.entry_id,
                roots: lg.roots().iter().map(String::as_str).collect(),
                levels: lg.levels(),
                linearized: linearize(&lg, &opts),
            };
            serde_json::to_string(&record).expect("serialisable")
        })
        .collect();

    let out = &a.output.out;
    let mut w = outputs.create(out)?;
    lines
        .iter()
        .try_for_each(|l| writeln!(w, "{l}"))
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(out, e))?;
    let details = json!({
        "entries": dataset.len(),
        "level_markers": opts.include_level_markers,
    });
    outputs.write_manifest(out, &Manifest::new("levelize", &[&a.input], out, details))
}

/// Ids listed by a `split` or `sample` output file.
fn read_id_list(path: &Path) -> Result<HashSet<String>, CliError> {
    let value: Value = serde_json::from_str(&read_to_string(path)?)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let list = value
        .get("pretrain_ids")
        .or_else(|| value.get("ids"))
        .and_then(Value::as_array)
        .ok_or_else(|| {
            CliError::Invalid(format!("{}: no `pretrain_ids` or `ids` array", path.display()))
        })?;
    list.iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| CliError::Invalid(format!("{}: ids must be strings", path.display())))
        })
        .collect()
}

pub fn mask(a: &MaskArgs) -> Result<(), CliError> {
    let outputs = single_output(&a.output.out, a.output.force)?;
    if a.min_triples == 0 {
        return Err(CliError::Invalid("--min-triples must be at least 1".into()));
    }
    let mut dataset = load_canonical(&a.input)?;
    if let Some(split) = a.split {
        dataset = dataset.filter_split(split);
    }
    let mut inputs: Vec<&Path> = vec![&a.input];
    if let Some(path) = &a.ids {
        let wanted = read_id_list(path)?;
        let known: HashSet<&str> = dataset.entries().iter().map(|e| e.entry_id.as_str()).collect();
        if let Some(missing) = wanted.iter().find(|id| !known.contains(id.as_str())) {
            return Err(CliError::Invalid(format!(
                "{}: id {missing:?} is not in the input dataset",
                path.display()
            )));
        }
        let kept = dataset
            .entries()
            .iter()
            .filter(|e| wanted.contains(&e.entry_id))
            .cloned()
            .collect();
        dataset = Dataset::new(dataset.name.clone(), kept)?;
        inputs.push(path);
    }
    if dataset.is_empty() {
        return Err(CliError::Invalid("no entries left to mask".into()));
    }

    let policy = MaskPolicy {
        per_level: !a.one_per_graph,
        min_triples: a.min_triples,
    };
    let opts = level_options(a.no_level_markers);
    let out = &a.output.out;
    let w = outputs.create(out)?;
    let manifest = build_corpus(&dataset, a.strategy, &policy, &opts, a.seed, w)
        .map_err(|e| CliError::corpus(out, e))?;
    let details = serde_json::to_value(&manifest).expect("serialisable");
    outputs.write_manifest(out, &Manifest::new("mask", &inputs, out, details))
}

pub fn split(a: &SplitArgs) -> Result<(), CliError> {
    let outputs = single_output(&a.output.out, a.output.force)?;
    let mut plan = SplitPlan::new(a.k, a.mode, a.seed)?;
    plan.stratified = a.stratified;
    let dataset = load_canonical(&a.input)?;
    let result = split_low_resource(&dataset, &plan)?;

    let out = &a.output.out;
    outputs.write_json(out, &result.manifest)?;
    let m = &result.manifest;
    let details = json!({
        "k_percent": m.k_percent,
        "mode": m.mode,
        "seed": m.seed,
        "stratified": m.stratified,
        "train_size": m.train_size,
        "finetune_count": m.finetune_count,
        "pretrain_count": m.pretrain_count,
    });
    outputs.write_manifest(out, &Manifest::new("split", &[&a.input], out, details))
}

pub fn sample(a: &SampleArgs) -> Result<(), CliError> {
    let outputs = single_output(&a.output.out, a.output.force)?;
    let dataset = load_canonical(&a.input)?;
    let result = sample_fraction(&dataset, a.fraction, a.seed)?;

    let out = &a.output.out;
    outputs.write_json(out, &result.manifest)?;
    let m = &result.manifest;
    let details = json!({
        "fraction": m.fraction,
        "seed": m.seed,
        "train_size": m.train_size,
        "count": m.count,
    });
    outputs.write_manifest(out, &Manifest::new("sample", &[&a.input], out, details))
}

fn parse_externals(raw: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for item in raw {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Invalid(format!("--external {item:?} is not name=value")))?;
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Invalid(format!("--external {k} given twice")));
        }
    }
    Ok(map)
}

pub fn score(a: &ScoreArgs) -> Result<(), CliError> {
    let mut outputs = Outputs::new(a.force);
    for p in a.out.iter().chain(&a.segments) {
        outputs.declare(p)?;
    }
    let external = parse_externals(&a.external)?;
    let config = MetricConfig {
        tokenizer: a.tokenizer,
        lowercase: a.lowercase,
        ..MetricConfig::default()
    };
    let pairs = read_segments(&a.hyp, &a.refs)?;
    let report = score_report(&pairs, &config, &external)?;

    let mut inputs: Vec<&Path> = vec![&a.hyp];
    inputs.extend(a.refs.iter().map(|p| p.as_path()));
    let details = json!({
        "config": report.config,
        "segments": pairs.len(),
        "references": a.refs.len(),
    });
    let text = report.to_text();
    match &a.out {
        Some(out) => {
            outputs.write_all(out, text.as_bytes())?;
            outputs.write_manifest(out, &Manifest::new("score", &inputs, out, details.clone()))?;
        }
        None => print_stdout(&text)?,
    }
    if let Some(seg) = &a.segments {
        outputs.write_all(seg, report.segments_tsv().as_bytes())?;
        outputs.write_manifest(seg, &Manifest::new("score", &inputs, seg, details))?;
    }
    Ok(())
}

fn stats_text(s: &StatsReport) -> String {
    let mut out = format!("name={}\nentries={}\n", s.name, s.total);
    for (split, n) in &s.splits {
        out += &format!("split.{split}={n}\n");
    }
    for (size, n) in &s.triple_histogram {
        out += &format!("triples.{size}={n}\n");
    }
    out += &format!(
        "distinct_relations={}\ndistinct_entities={}\ndistinct_categories={}\nmax_level={}\n",
        s.distinct_relations, s.distinct_entities, s.distinct_categories, s.max_level
    );
    out
}

pub fn stats(a: &StatsArgs) -> Result<(), CliError> {
    let mut outputs = Outputs::new(a.force);
    if let Some(out) = &a.out {
        outputs.declare(out)?;
    }
    let dataset = load_canonical(&a.input)?;
    let report = dataset_stats(&dataset);
    match &a.out {
        Some(out) => {
            outputs.write_json(out, &report)?;
            let details = json!({ "entries": report.total });
            outputs.write_manifest(out, &Manifest::new("stats", &[&a.input], out, details))
        }
        None => print_stdout(&stats_text(&report)),
    }
}

fn print_stdout(text: &str) -> Result<(), CliError> {
    let mut stdout = io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}
