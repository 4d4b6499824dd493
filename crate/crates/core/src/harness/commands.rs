use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::casecontrol::{case_control_odds_ratio, woman_scores, OddsRatioResult, Roster};
use crate::data::{
    self, grouped_split, load_feature_table, load_label_table, select_subset, write_feature_table, write_label_table, DatasetSplit,
    FeatureTable, LabelMode, LabelTable, SubsetSpec, View,
};
use crate::error::{Error, Result};
use crate::metrics::{eval_label_matrix, eval_subsets, map_representation, size_curve, ConventionRow, EvalOptions, EvalReport, MetricResult};
use crate::net::{
    extract_representations, init_network, train, write_network, write_training_log, MaskedBatch, Network, NetworkArch, TrainConfig,
    TrainedNetwork,
};
use crate::ridge::{cross_val_predict_multi, CvOptions, Predictions};
use crate::seed::derive_seed;
use crate::simulate::{simulate_case_control, simulate_cohort, SimConfig, TruthTable};

/// Files written by one command, all stamped with the run's provenance.
struct Outputs {
    dir: PathBuf,
    prov: String,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn new(run: &RunConfig, command: &str) -> Self {
        Outputs {
            dir: run.out.clone(),
            prov: run.provenance(command),
            written: Vec::new(),
        }
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    fn prov(&self) -> Option<&str> {
        Some(&self.prov)
    }

    fn csv(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> Result<()> {
        let path = self.path(name);
        let mut out = data::create(&path)?;
        let io = |e| Error::io(&path, e);
        data::write_provenance(&mut out, &path, self.prov())?;
        writeln!(out, "{header}").map_err(io)?;
        for r in rows {
            writeln!(out, "{r}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}

fn file_name(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DataSection {
    features: Option<String>,
    labels: Option<String>,
    /// Reader manifest; defaults to first appearance in the label file.
    readers: Option<Vec<String>>,
    roster: Option<String>,
}

/// Features and labels, either loaded from `[data]` or simulated from
/// `[simulation]`.
pub struct Inputs {
    pub features: FeatureTable,
    pub labels: LabelTable,
    pub truth: Option<TruthTable>,
    pub sim: Option<SimConfig>,
    roster: Option<PathBuf>,
}

pub fn load_inputs(run: &RunConfig) -> Result<Inputs> {
    let d: DataSection = run.section("data")?;
    let roster = d.roster.as_deref().map(|p| run.resolve(p));
    match (d.features, d.labels) {
        (Some(f), Some(l)) => Ok(Inputs {
            features: load_feature_table(run.resolve(&f))?,
            labels: load_label_table(run.resolve(&l), d.readers)?,
            truth: None,
            sim: None,
            roster,
        }),
        (None, None) if run.has("simulation") => {
            let cfg = SimConfig::from_toml(&run.doc, Some(run.seed))?;
            let c = simulate_cohort(&cfg)?;
            Ok(Inputs {
                features: c.features,
                labels: c.labels,
                truth: Some(c.truth),
                sim: Some(cfg),
                roster,
            })
        }
        _ => Err(Error::Config(
            "need both [data] features and labels, or a [simulation] section".into(),
        )),
    }
}

pub fn cmd_simulate(run: &RunConfig) -> Result<Vec<PathBuf>> {
    let cfg = SimConfig::from_toml(&run.doc, Some(run.seed))?;
    let cohort = simulate_cohort(&cfg)?;
    let roster = simulate_case_control(&cohort.truth, &cfg, &HashSet::new())?;
    let mut out = Outputs::new(run, "simulate");
    write_feature_table(&cohort.features, out.path("features.csv"), out.prov())?;
    write_label_table(&cohort.labels, out.path("labels.csv"), out.prov())?;
    cohort.truth.write_csv(out.path("truth.csv"), out.prov())?;
    roster.write_csv(out.path("roster.csv"), out.prov())?;
    Ok(out.written)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub lambda2: f64,
    pub k: usize,
    pub repeats: usize,
    pub level: f64,
    pub standardize: bool,
    pub label_matrix: bool,
    /// One subset per reader.
    pub readers: bool,
    /// One subset per co-reading pair.
    pub pairs: bool,
    pub min_images: usize,
    pub view: Option<View>,
    pub subset: Vec<SubsetSpec>,
    pub sizes: Vec<usize>,
    /// Reader pairs for scatter and histogram data.
    pub plot_pairs: Vec<[String; 2]>,
    pub bins: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            lambda2: crate::ridge::DEFAULT_LAMBDA2,
            k: crate::ridge::DEFAULT_FOLDS,
            repeats: crate::metrics::DEFAULT_REPEATS,
            level: crate::metrics::DEFAULT_LEVEL,
            standardize: false,
            label_matrix: true,
            readers: false,
            pairs: false,
            min_images: data::DEFAULT_MIN_IMAGES,
            view: None,
            subset: Vec::new(),
            sizes: Vec::new(),
            plot_pairs: Vec::new(),
            bins: 10,
        }
    }
}

impl EvalSettings {
    pub fn options(&self, seed: u64) -> EvalOptions {
        let mut o = EvalOptions::new(self.lambda2, self.k, seed).with_repeats(self.repeats);
        o.bootstrap.level = self.level;
        o.cv.standardize = self.standardize;
        o
    }

    fn spec(&self, s: SubsetSpec) -> SubsetSpec {
        let s = s.with_min_images(self.min_images);
        match self.view {
            Some(v) => s.with_view(v),
            None => s,
        }
    }
}

fn co_reading_pairs(labels: &LabelTable) -> Vec<(String, String)> {
    let mut by_image: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in labels.entries() {
        by_image.entry(&e.image_id).or_default().push(&e.reader_id);
    }
    let mut pairs = BTreeSet::new();
    for rs in by_image.values() {
        for (i, a) in rs.iter().enumerate() {
            for b in &rs[i + 1..] {
                let (x, y) = if a <= b { (a, b) } else { (b, a) };
                pairs.insert((x.to_string(), y.to_string()));
            }
        }
    }
    pairs.into_iter().collect()
}

fn write_report(out: &mut Outputs, name: &str, report: &EvalReport) -> Result<()> {
    report.write_csv(out.path(&format!("report_{name}.csv")), out.prov())?;
    for p in &report.predictions {
        let file = format!("predictions/{name}_{}.csv", file_name(&p.subset));
        p.write_csv(out.path(&file), out.prov())?;
    }
    Ok(())
}

fn metric_cols(m: &MetricResult) -> String {
    format!("{},{},{}", m.point, m.ci_low, m.ci_high)
}

#[derive(Serialize)]
struct SizePoint {
    size: usize,
    rmse: MetricResult,
}

pub fn cmd_eval(run: &RunConfig) -> Result<Vec<PathBuf>> {
    let s: EvalSettings = run.section("eval")?;
    let inp = load_inputs(run)?;
    let opts = s.options(run.seed);
    let mut out = Outputs::new(run, "eval");
    let mut reports: BTreeMap<&str, EvalReport> = BTreeMap::new();

    if s.label_matrix {
        reports.insert("matrix", eval_label_matrix(&inp.features, &inp.labels, &opts)?);
    }
    if s.readers {
        let specs: Vec<_> = inp.labels.readers().iter().map(|r| s.spec(SubsetSpec::single(r.clone()))).collect();
        reports.insert("readers", eval_subsets(&inp.features, &inp.labels, &specs, &opts)?);
    }
    if s.pairs {
        let specs: Vec<_> = co_reading_pairs(&inp.labels)
            .into_iter()
            .map(|(a, b)| s.spec(SubsetSpec::pair(a, b)))
            .collect();
        reports.insert("pairs", eval_subsets(&inp.features, &inp.labels, &specs, &opts)?);
    }
    if !s.subset.is_empty() {
        reports.insert("subsets", eval_subsets(&inp.features, &inp.labels, &s.subset, &opts)?);
    }
    for (name, r) in &reports {
        write_report(&mut out, name, r)?;
    }

    let mut curve = Vec::new();
    if !s.sizes.is_empty() {
        let all = select_subset(&inp.features, &inp.labels, &SubsetSpec::all(LabelMode::Averaged).with_min_images(0))?;
        let target = all.averaged();
        curve = size_curve(&all.features, &target, &s.sizes, &opts)?;
        out.csv(
            "size_curve.csv",
            "size,n,rmse,ci_low,ci_high",
            curve.iter().map(|(size, r)| format!("{size},{},{}", r.n, metric_cols(r))),
        )?;
    }

    for [a, b] in &s.plot_pairs {
        plot_pair(&mut out, &inp, a, b, &s, &opts)?;
    }

    let json = serde_json::json!({
        "provenance": out.prov,
        "reports": reports,
        "size_curve": curve.into_iter().map(|(size, rmse)| SizePoint { size, rmse }).collect::<Vec<_>>(),
    });
    let path = out.path("report.json");
    let mut f = data::create(&path)?;
    serde_json::to_writer_pretty(&mut f, &json).map_err(|e| Error::Invalid(e.to_string()))?;
    writeln!(f).map_err(|e| Error::io(&path, e))?;
    Ok(out.written)
}

/// Scores of both readers on their shared images, predictions of models
/// trained on each reader's scores alone, and histograms of all four.
fn plot_pair(out: &mut Outputs, inp: &Inputs, a: &str, b: &str, s: &EvalSettings, opts: &EvalOptions) -> Result<()> {
    let sel = select_subset(&inp.features, &inp.labels, &SubsetSpec::pair(a, b).with_min_images(0))?;
    let ids: Vec<&str> = sel.features.records().iter().map(|r| r.image_id.as_str()).collect();
    let scores = |r: &str| -> Vec<f64> { ids.iter().map(|id| inp.labels.score(id, r).expect("pair subset")).collect() };
    let (sa, sb) = (scores(a), scores(b));
    let fit = |t: &[f64]| {
        let targets: Vec<Vec<f64>> = t.iter().map(|&v| vec![v]).collect();
        cross_val_predict_multi(&sel.features, &targets, &opts.cv)
    };
    let (pa, pb) = (fit(&sa)?.values, fit(&sb)?.values);
    let tag = format!("{}_{}", file_name(a), file_name(b));
    out.csv(
        &format!("plots/pair_{tag}.csv"),
        "image_id,score_a,score_b,pred_a,pred_b",
        (0..ids.len()).map(|i| format!("{},{},{},{},{}", ids[i], sa[i], sb[i], pa[i], pb[i])),
    )?;
    let bins = s.bins.max(1);
    let width = 100.0 / bins as f64;
    let count = |v: &[f64]| {
        let mut c = vec![0usize; bins];
        for &x in v {
            c[((x.clamp(0.0, 100.0) / width) as usize).min(bins - 1)] += 1;
        }
        c
    };
    let cols = [count(&sa), count(&sb), count(&pa), count(&pb)];
    out.csv(
        &format!("plots/hist_{tag}.csv"),
        "bin_low,bin_high,score_a,score_b,pred_a,pred_b",
        (0..bins).map(|i| {
            format!(
                "{},{},{},{},{},{}",
                i as f64 * width,
                (i + 1) as f64 * width,
                cols[0][i],
                cols[1][i],
                cols[2][i],
                cols[3][i]
            )
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PredictorMode {
    /// One output trained on averaged labels.
    #[default]
    Single,
    /// One output per reader with masked loss.
    Multi,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetSettings {
    pub mode: PredictorMode,
    pub hidden_widths: Vec<usize>,
    pub fractions: [f64; 3],
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub augment_noise_sd: f64,
    pub center_outputs: bool,
}

impl Default for NetSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        NetSettings {
            mode: PredictorMode::Single,
            hidden_widths: vec![32, 16],
            fractions: [0.8, 0.1, 0.1],
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            max_epochs: t.max_epochs,
            beta1: t.beta1,
            beta2: t.beta2,
            epsilon: t.epsilon,
            augment_noise_sd: t.augment_noise_sd,
            center_outputs: t.center_outputs,
        }
    }
}

impl NetSettings {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            seed,
            augment_noise_sd: self.augment_noise_sd,
            center_outputs: self.center_outputs,
        }
    }

    pub fn split(&self, features: &FeatureTable, seed: u64) -> Result<DatasetSplit> {
        let [a, b, c] = self.fractions;
        grouped_split(features, (a, b, c), seed)
    }

    /// Untrained network for `mode`. Both modes draw the same encoder for a
    /// given seed.
    pub fn init(&self, features: &FeatureTable, labels: &LabelTable, mode: PredictorMode, seed: u64) -> Result<Network> {
        let outputs = match mode {
            PredictorMode::Single => 1,
            PredictorMode::Multi => labels.reader_count(),
        };
        let dim = features.dim() - usize::from(features.has_bias());
        init_network(&NetworkArch::new(dim, self.hidden_widths.clone(), outputs), derive_seed(seed, 1))
    }

    pub fn batch(&self, features: &FeatureTable, labels: &LabelTable, rows: &[usize], mode: PredictorMode) -> Result<MaskedBatch> {
        match mode {
            PredictorMode::Single => MaskedBatch::averaged(features, labels, rows),
            PredictorMode::Multi => MaskedBatch::per_reader(features, labels, rows),
        }
    }

    /// Trains on `split.train`, selecting on `split.validation`.
    pub fn fit(&self, features: &FeatureTable, labels: &LabelTable, split: &DatasetSplit, mode: PredictorMode, seed: u64) -> Result<TrainedNetwork> {
        let net = self.init(features, labels, mode, seed)?;
        let tr = self.batch(features, labels, &split.train, mode)?;
        let va = self.batch(features, labels, &split.validation, mode)?;
        train(net, &tr, &va, &self.train_config(derive_seed(seed, 2)))
    }
}

pub fn cmd_train(run: &RunConfig) -> Result<Vec<PathBuf>> {
    let s: NetSettings = run.section("train")?;
    let inp = load_inputs(run)?;
    let split = s.split(&inp.features, run.seed)?;
    let t = s.fit(&inp.features, &inp.labels, &split, s.mode, run.seed)?;
    let test = s.batch(&inp.features, &inp.labels, &split.test, s.mode)?;
    let test_rmse = t.network.masked_rmse(&test)?;

    let mut out = Outputs::new(run, "train");
    write_network(&t.network, &out.path("model.txt"), out.prov())?;
    write_training_log(&t.log, &out.path("training_log.csv"), out.prov())?;
    let mode = match s.mode {
        PredictorMode::Single => "single",
        PredictorMode::Multi => "multi",
    };
    out.csv(
        "train_summary.csv",
        "mode,outputs,best_epoch,initial_val_rmse,best_val_rmse,test_rmse",
        [format!(
            "{mode},{},{},{},{},{}",
            t.network.arch.output_count, t.best_epoch, t.initial_val_rmse, t.best_val_rmse, test_rmse
        )],
    )?;
    let records = inp.features.records();
    let part = |rows: &[usize], name: &'static str| rows.iter().map(move |&r| (r, name)).collect::<Vec<_>>();
    let mut rows = [part(&split.train, "train"), part(&split.validation, "validation"), part(&split.test, "test")].concat();
    rows.sort_unstable();
    out.csv(
        "split.csv",
        "image_id,partition",
        rows.into_iter().map(|(r, p)| format!("{},{p}", records[r].image_id)),
    )?;
    Ok(out.written)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSettings {
    /// Seed of the repeat runs; none skips them.
    pub repeat_seed: Option<u64>,
    /// Readers with fewer test images get no individual mapping.
    pub min_images: usize,
    pub lambda2: f64,
    pub k: usize,
    pub repeats: usize,
    pub level: f64,
}

impl Default for CompareSettings {
    fn default() -> Self {
        CompareSettings {
            repeat_seed: None,
            min_images: 20,
            lambda2: crate::ridge::DEFAULT_LAMBDA2,
            k: crate::ridge::DEFAULT_FOLDS,
            repeats: crate::metrics::DEFAULT_REPEATS,
            level: crate::metrics::DEFAULT_LEVEL,
        }
    }
}

impl CompareSettings {
    pub fn options(&self, seed: u64) -> EvalOptions {
        let mut o = EvalOptions::new(self.lambda2, self.k, seed).with_repeats(self.repeats);
        o.bootstrap.level = self.level;
        o
    }
}

/// Ridge metrics of each representation and the pairwise similarity of
/// their predictions, on the test partition.
#[derive(Debug, Clone)]
pub struct Comparison {
    /// `(model, row)` for models `Pre`, `Single`, `Multi`.
    pub metrics: Vec<(String, ConventionRow)>,
    /// `(comparison, row)` for `M_S`, `M_Pre`, `S_Pre` and, with a repeat
    /// seed, `S_S` and `M_M`.
    pub similarity: Vec<(String, ConventionRow)>,
    /// Test image, averaged label and the `Av` prediction of each model.
    pub scatter: Vec<(String, f64, [f64; 3])>,
    pub trained: Vec<(String, TrainedNetwork)>,
}

impl Comparison {
    pub fn metric(&self, model: &str, convention: crate::metrics::Convention) -> Option<&ConventionRow> {
        self.metrics
            .iter()
            .find(|(m, r)| m == model && r.convention == convention)
            .map(|(_, r)| r)
    }

    pub fn similar(&self, pair: &str, convention: crate::metrics::Convention) -> Option<&ConventionRow> {
        self.similarity
            .iter()
            .find(|(m, r)| m == pair && r.convention == convention)
            .map(|(_, r)| r)
    }
}

pub fn compare_representations(
    features: &FeatureTable,
    labels: &LabelTable,
    net: &NetSettings,
    cmp: &CompareSettings,
    seed: u64,
) -> Result<Comparison> {
    let split = net.split(features, seed)?;
    let test = features.select_rows(&split.test);
    let opts = cmp.options(seed);
    let single = net.fit(features, labels, &split, PredictorMode::Single, seed)?;
    let multi = net.fit(features, labels, &split, PredictorMode::Multi, seed)?;
    let pre = net.init(features, labels, PredictorMode::Single, seed)?;
    let map = |n: &Network| map_representation(&extract_representations(n, &test)?, labels, cmp.min_images, &opts);
    let (mp, ms, mm) = (map(&pre)?, map(&single.network)?, map(&multi.network)?);

    let mut metrics = Vec::new();
    let per_model = [("Pre", mp.metrics(&opts.bootstrap)?), ("Single", ms.metrics(&opts.bootstrap)?), ("Multi", mm.metrics(&opts.bootstrap)?)];
    for c in 0..3 {
        for (name, rows) in &per_model {
            metrics.push((name.to_string(), rows[c]));
        }
    }
    let mut pairs = vec![
        ("M_S", mm.similarity(&ms, &opts.bootstrap)?),
        ("M_Pre", mm.similarity(&mp, &opts.bootstrap)?),
        ("S_Pre", ms.similarity(&mp, &opts.bootstrap)?),
    ];
    let mut trained = vec![("single".to_string(), single), ("multi".to_string(), multi)];
    if let Some(rs) = cmp.repeat_seed {
        let single2 = net.fit(features, labels, &split, PredictorMode::Single, rs)?;
        let multi2 = net.fit(features, labels, &split, PredictorMode::Multi, rs)?;
        pairs.push(("S_S", ms.similarity(&map(&single2.network)?, &opts.bootstrap)?));
        pairs.push(("M_M", mm.similarity(&map(&multi2.network)?, &opts.bootstrap)?));
        trained.push(("single_repeat".into(), single2));
        trained.push(("multi_repeat".into(), multi2));
    }
    let mut similarity = Vec::new();
    for c in 0..3 {
        for (name, rows) in &pairs {
            similarity.push((name.to_string(), rows[c]));
        }
    }
    let lookup = |p: &Predictions| -> BTreeMap<String, f64> { p.image_ids.iter().cloned().zip(p.values.iter().copied()).collect() };
    let (lp, ls, lm) = (lookup(&mp.av), lookup(&ms.av), lookup(&mm.av));
    let scatter = mp
        .av
        .image_ids
        .iter()
        .map(|id| {
            let target = labels.mean_score(id).expect("labelled test image");
            (id.clone(), target, [lp[id], ls[id], lm[id]])
        })
        .collect();
    Ok(Comparison {
        metrics,
        similarity,
        scatter,
        trained,
    })
}

fn row_cols(r: &ConventionRow) -> String {
    format!("{},{},{}", metric_cols(&r.spearman), metric_cols(&r.rmse), r.spearman.n)
}

pub fn cmd_represent_compare(run: &RunConfig) -> Result<Vec<PathBuf>> {
    let net: NetSettings = run.section("train")?;
    let cmp: CompareSettings = run.section("compare")?;
    let inp = load_inputs(run)?;
    let c = compare_representations(&inp.features, &inp.labels, &net, &cmp, run.seed)?;
    let mut out = Outputs::new(run, "represent-compare");
    let header = |first: &str| format!("labels,{first},spearman,spearman_low,spearman_high,rmse,rmse_low,rmse_high,n");
    out.csv(
        "compare_metrics.csv",
        &header("model"),
        c.metrics.iter().map(|(m, r)| format!("{},{m},{}", r.convention, row_cols(r))),
    )?;
    out.csv(
        "compare_similarity.csv",
        &header("comparison"),
        c.similarity.iter().map(|(m, r)| format!("{},{m},{}", r.convention, row_cols(r))),
    )?;
    out.csv(
        "plots/compare_scatter.csv",
        "image_id,target,pre,single,multi",
        c.scatter.iter().map(|(id, t, p)| format!("{id},{t},{},{},{}", p[0], p[1], p[2])),
    )?;
    for (name, t) in &c.trained {
        write_network(&t.network, &out.path(&format!("model_{name}.txt")), out.prov())?;
        write_training_log(&t.log, &out.path(&format!("training_log_{name}.csv")), out.prov())?;
    }
    Ok(out.written)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelInput {
    pub name: String,
    pub predictions: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaseControlSettings {
    /// Prediction files to score; when empty, cross-validated ridge models
    /// on averaged (`ridge_av`) and individual (`ridge_ind`) labels.
    pub model: Vec<ModelInput>,
    pub lambda2: f64,
    pub k: usize,
}

impl Default for CaseControlSettings {
    fn default() -> Self {
        CaseControlSettings {
            model: Vec::new(),
            lambda2: crate::ridge::DEFAULT_LAMBDA2,
            k: crate::ridge::DEFAULT_FOLDS,
        }
    }
}

/// Cross-validated ridge predictions on averaged and on stacked individual
/// labels over every labelled image.
pub fn ridge_models(features: &FeatureTable, labels: &LabelTable, opts: &CvOptions) -> Result<Vec<Predictions>> {
    [LabelMode::Averaged, LabelMode::Individual]
        .into_iter()
        .map(|mode| {
            let sel = select_subset(features, labels, &SubsetSpec::all(mode).with_min_images(0))?;
            let mut p = cross_val_predict_multi(&sel.features, &sel.targets, opts)?;
            p.subset = match mode {
                LabelMode::Averaged => "ridge_av".into(),
                LabelMode::Individual => "ridge_ind".into(),
            };
            Ok(p)
        })
        .collect()
}

pub fn cmd_casecontrol(run: &RunConfig) -> Result<Vec<PathBuf>> {
    let s: CaseControlSettings = run.section("casecontrol")?;
    let inp = load_inputs(run)?;
    let roster = match (&inp.roster, &inp.truth, &inp.sim) {
        (Some(p), _, _) => Roster::load_csv(p)?,
        (None, Some(truth), Some(cfg)) => simulate_case_control(truth, cfg, &HashSet::new())?,
        _ => return Err(Error::Config("casecontrol needs [data] roster or a [simulation] section".into())),
    };
    roster.validate()?;
    let models = if s.model.is_empty() {
        ridge_models(&inp.features, &inp.labels, &CvOptions::new(s.k, s.lambda2, run.seed))?
    } else {
        s.model
            .iter()
            .map(|m| Predictions::load_csv(run.resolve(&m.predictions), m.name.clone()))
            .collect::<Result<_>>()?
    };
    let results: Vec<(String, OddsRatioResult)> = models
        .iter()
        .map(|p| Ok((p.subset.clone(), case_control_odds_ratio(&woman_scores(p, &inp.features), &roster)?)))
        .collect::<Result<_>>()?;

    let mut out = Outputs::new(run, "casecontrol");
    out.csv(
        "casecontrol.csv",
        "model,or,ci_low,ci_high,a,b,c,d,corrected",
        results.iter().map(|(m, r)| {
            let [a, b, c, d] = r.counts;
            format!("{m},{},{},{},{a},{b},{c},{d},{}", r.or_point, r.ci_low, r.ci_high, r.corrected)
        }),
    )?;
    out.csv(
        "plots/odds_ratio_bars.csv",
        "model,or,err_low,err_high",
        results
            .iter()
            .map(|(m, r)| format!("{m},{},{},{}", r.or_point, r.or_point - r.ci_low, r.ci_high - r.or_point)),
    )?;
    Ok(out.written)
}
