use std::collections::BTreeMap;
use std::path::Path;

use hdgr::data::{load_jsonl, save_jsonl, Dataset};
use hdgr::encoder::{assign_hvs, encode_graph, EncodeOptions};
use hdgr::graph::{count_paths, emit_dot, load_graph, save_graph, LayeredGraph};
use hdgr::hdc::Hypervector;
use hdgr::refiner::{refine, EdgeScoreTable, Pipeline};
use hdgr::synth::{evaluate_recovery, random_baseline, run_experiment, BaselineStats, ExperimentConfig, PlantedTask, RecoveryReport};
use hdgr::trainer::{load_model, save_model, train, RefineModel};
use serde::Serialize;

use crate::config::{required, Settings};
use crate::error::CliError;
use crate::io::{self, Outputs};

fn read_graph(path: &Path) -> Result<LayeredGraph, CliError> {
    load_graph(&io::read(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn read_dataset(path: &Path, graph: &LayeredGraph) -> Result<Dataset, CliError> {
    let data = load_jsonl(&io::read_string(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if data.feature_dim() != graph.feature_dim {
        return Err(CliError::input(format!(
            "{}: frames have {} features but the graph declares {}",
            path.display(),
            data.feature_dim(),
            graph.feature_dim
        )));
    }
    Ok(data)
}

fn read_scores(path: &Path) -> Result<EdgeScoreTable, CliError> {
    EdgeScoreTable::from_json(&io::read(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn pipeline(s: &Settings, dim: usize, graph: &LayeredGraph) -> Result<Pipeline, CliError> {
    Ok(Pipeline::new(dim, graph.feature_dim, s.encode, s.train.clone())?)
}

#[derive(Serialize)]
struct EncodingDoc<'a> {
    dim: usize,
    seed: u64,
    options: EncodeOptions,
    num_paths: u128,
    norm: f64,
    graph_hv: &'a Hypervector,
    #[serde(skip_serializing_if = "Option::is_none")]
    memories: Option<&'a BTreeMap<String, Hypervector>>,
}

pub fn encode(s: &Settings) -> Result<(), CliError> {
    let graph = read_graph(required(&s.graph, "graph")?)?;
    let p = pipeline(s, s.dim, &graph)?;
    let tables = assign_hvs(&graph, &p.space, &p.phi)?;
    let enc = encode_graph(&graph, &tables, s.encode)?;
    if !enc.graph_hv.is_finite() {
        return Err(CliError::numeric("graph hypervector is not finite"));
    }
    let doc = EncodingDoc {
        dim: s.dim,
        seed: s.seed,
        options: s.encode,
        num_paths: count_paths(&graph),
        norm: enc.graph_hv.norm(),
        graph_hv: &enc.graph_hv,
        memories: s.with_memories.then_some(&enc.memories),
    };
    let mut out = Outputs::new(s.out_dir());
    out.add_json("encoding.json", &doc);
    out.commit()
}

#[derive(Serialize)]
struct LossDoc<'a> {
    loss_trace: &'a [f64],
}

pub fn train_cmd(s: &Settings) -> Result<(), CliError> {
    let graph = read_graph(required(&s.graph, "graph")?)?;
    let data = read_dataset(required(&s.data, "data")?, &graph)?;
    let p = pipeline(s, s.dim, &graph)?;
    let tables = assign_hvs(&graph, &p.space, &p.phi)?;
    let enc = encode_graph(&graph, &tables, s.encode)?;
    let model = RefineModel::init(s.dim, data.num_classes(), &s.train)?;
    let trained = train(model, &enc.graph_hv, &data, &p.phi)?;
    let mut out = Outputs::new(s.out_dir());
    out.add("model.json", save_model(&trained.model));
    out.add_json("loss.json", &LossDoc { loss_trace: &trained.loss_trace });
    out.commit()
}

#[derive(Serialize)]
struct RoundLossDoc<'a> {
    rounds: Vec<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eval: Option<&'a [f64]>,
}

pub fn refine_cmd(s: &Settings) -> Result<(), CliError> {
    let graph = read_graph(required(&s.graph, "graph")?)?;
    let data = read_dataset(required(&s.data, "data")?, &graph)?;
    let p = pipeline(s, s.dim, &graph)?;
    let outcome = refine(&graph, &data, &p, &s.refine)?;

    let mut out = Outputs::new(s.out_dir());
    out.add("round_0.dot", emit_dot(&graph, None).into_bytes());
    for (k, r) in outcome.rounds.iter().enumerate() {
        let k = k + 1;
        out.add(format!("round_{k}.dot"), emit_dot(&r.refined, Some(&r.scores)).into_bytes());
        out.add(format!("scores_round_{k}.json"), r.scores.to_json());
        out.add(format!("graph_round_{k}.json"), save_graph(&r.refined));
    }
    out.add("refined.json", save_graph(&outcome.graph));
    if let Some(last) = outcome.rounds.last() {
        out.add("model.json", save_model(&last.model));
    }
    let rounds = outcome.rounds.iter().map(|r| r.loss_trace.as_slice()).collect();
    out.add_json("loss.json", &RoundLossDoc { rounds, eval: None });
    out.commit()
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    report: &'a RecoveryReport,
    baseline: &'a BaselineStats,
}

pub fn synth(s: &Settings) -> Result<(), CliError> {
    let cfg = ExperimentConfig {
        task: s.synth_task.clone(),
        refine: s.refine,
        train: s.train.clone(),
        encode: s.encode,
        dim: s.dim,
        baseline_draws: s.baseline_draws,
        evaluate_auc: true,
    };
    let result = run_experiment(&cfg)?;

    let mut out = Outputs::new(s.out_dir());
    out.add_json("task.json", &result.task);
    out.add("graph.json", save_graph(&result.task.graph));
    out.add("dataset.jsonl", save_jsonl(result.task.dataset()).into_bytes());
    for (k, dot) in result.dots.iter().enumerate() {
        out.add(format!("round_{k}.dot"), dot.clone().into_bytes());
    }
    for (k, g) in result.snapshots.iter().enumerate().skip(1) {
        out.add(format!("graph_round_{k}.json"), save_graph(g));
    }
    for (k, table) in result.score_tables.iter().enumerate() {
        out.add(format!("scores_round_{}.json", k + 1), table.to_json());
    }
    out.add_json("report.json", &ReportDoc { report: &result.report, baseline: &result.baseline });
    let rounds = result.loss_traces.iter().map(Vec::as_slice).collect();
    out.add_json("loss.json", &RoundLossDoc { rounds, eval: Some(&result.eval_loss_trace) });
    out.commit()
}

pub fn eval(s: &Settings) -> Result<(), CliError> {
    let refined = read_graph(required(&s.graph, "graph")?)?;
    let task_path = required(&s.task, "task")?;
    let mut task: PlantedTask = serde_json::from_slice(&io::read(task_path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", task_path.display())))?;
    let report = task.graph.validate();
    if !report.is_ok() {
        return Err(CliError::input(format!("{}: {report}", task_path.display())));
    }
    let scores = match &s.scores {
        Some(p) => read_scores(p)?,
        None => EdgeScoreTable::default(),
    };

    let probs = match &s.model {
        Some(model_path) => {
            let data_path = s
                .data
                .as_deref()
                .ok_or_else(|| CliError::usage("--model needs --data to compute class AUCs"))?;
            let data = read_dataset(data_path, &task.graph)?;
            let model = load_model(&io::read(model_path)?)?;
            let p = pipeline(s, model.dim(), &refined)?;
            let tables = assign_hvs(&refined, &p.space, &p.phi)?;
            let enc = encode_graph(&refined, &tables, s.encode)?;
            let probs = model.predict(&enc.graph_hv, &data, &p.phi)?;
            task.dataset = Some(data);
            Some(probs)
        }
        None => None,
    };

    let report = evaluate_recovery(&refined, &scores, &task, probs.as_deref())?;
    let baseline = random_baseline(
        &task.graph.candidate_edges(),
        &task.planted_edges,
        report.refined_edges,
        s.baseline_draws,
        s.seed,
    );
    let mut out = Outputs::new(s.out_dir());
    out.add_json("report.json", &ReportDoc { report: &report, baseline: &baseline });
    out.commit()
}

pub fn dot(s: &Settings) -> Result<(), CliError> {
    let graph = read_graph(required(&s.graph, "graph")?)?;
    let scores = s.scores.as_deref().map(read_scores).transpose()?;
    let text = emit_dot(&graph, scores.as_ref());
    match &s.out {
        Some(path) => io::write(path, text.as_bytes()),
        None => io::write_stdout(text.as_bytes()),
    }
}
