use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use edge_lifting::analysis::{build_matrices, condition_number, sparsity_curve, SparsityCurve};
use edge_lifting::io::{
    fmt_f64, parse_coefficients, parse_record, parse_values, read_graph, write_coefficients, write_denoise,
    write_graph, write_matrix, write_record, write_stations, write_values, RunManifest, StationOptions,
};
use edge_lifting::rng::{derive_seed, Stream};
use edge_lifting::shrinkage::{denoise, nlt_denoise, ShrinkageConfig, ThresholdRule};
use edge_lifting::simulation::{
    add_gaussian, embed_edge_average, embed_pointwise, generate_flow_fixture, run_experiment, sample_network,
    Embedding, ExperimentConfig, TestField,
};
use edge_lifting::{build_line_graph, forward, inverse, LiftingConfig, LineGraph, Variant};
use serde_json::{json, Value};

use crate::{Cli, Command, EmbeddingArg, InputArgs, LiftArgs, Rule, ShrinkArgs};

/// Machine-readable category of a failure.
pub fn category(err: &anyhow::Error) -> &'static str {
    if let Some(e) = err.downcast_ref::<edge_lifting::Error>() {
        e.category()
    } else if err.downcast_ref::<std::io::Error>().is_some() {
        "io"
    } else {
        "config"
    }
}

pub fn exit_code(category: &str) -> u8 {
    match category {
        "config" => 2,
        "parse" => 3,
        "graph" => 4,
        "metric" => 5,
        "transform" => 6,
        "data" => 7,
        "io" => 8,
        _ => 1,
    }
}

fn parse_variant(name: &str) -> Result<Variant> {
    Ok(name.trim().parse::<Variant>()?)
}

fn parse_variants(list: &str) -> Result<Vec<Variant>> {
    if list == "all" {
        return Ok(Variant::all());
    }
    list.split(',').map(parse_variant).collect()
}

fn parse_fields(list: &str) -> Result<Vec<TestField>> {
    if list == "all" {
        return Ok(TestField::builtin());
    }
    Ok(list.split(',').map(|f| TestField::from_name(f.trim())).collect::<Result<_, _>>()?)
}

fn lift_config(args: &LiftArgs, seed: u64) -> Result<LiftingConfig> {
    Ok(LiftingConfig::new(parse_variant(&args.variant)?).with_stopping_time(args.tau).with_seed(seed))
}

fn shrink_config(args: &ShrinkArgs) -> ShrinkageConfig {
    ShrinkageConfig {
        keep_coarsest: args.keep_coarsest,
        levels: args.levels,
        rule: match args.rule {
            Rule::PosteriorMedian => ThresholdRule::PosteriorMedian,
            Rule::Hard => ThresholdRule::Hard,
        },
        normalize: !args.no_normalize,
        noise_sd: args.noise_sd,
    }
}

fn embedding(arg: EmbeddingArg) -> Embedding {
    match arg {
        EmbeddingArg::Pointwise => Embedding::Pointwise,
        EmbeddingArg::EdgeAverage => Embedding::EdgeAverage,
    }
}

fn load_graph(path: &Path, complete_links: bool) -> Result<LineGraph<f64>> {
    let file = read_graph(path, StationOptions { complete_links })
        .with_context(|| format!("reading {}", path.display()))?;
    Ok(file.line_graph()?)
}

fn load(input: &InputArgs) -> Result<(LineGraph<f64>, Vec<f64>)> {
    let lg = load_graph(&input.input, input.complete_links)?;
    let values = match &input.values {
        Some(p) => parse_values(&std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => lg.values().ok_or_else(|| {
            edge_lifting::Error::EmptyInput("the graph file has missing values; pass --values".into())
        })?,
    };
    if values.len() != lg.m() {
        bail!(edge_lifting::Error::InvalidConfig(format!(
            "{} values for a line graph with {} vertices",
            values.len(),
            lg.m()
        )));
    }
    Ok((lg, values))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Manifest fields shared by every command; the rest goes in `extra`.
struct Run<'a> {
    cli: &'a Cli,
    command: &'static str,
    variant: String,
    stopping_time: usize,
    levels: Option<usize>,
    keep_coarsest: usize,
    trajectories: Option<usize>,
    input: Option<&'a Path>,
    outputs: Vec<&'a Path>,
    extra: BTreeMap<String, Value>,
}

impl<'a> Run<'a> {
    fn new(cli: &'a Cli, command: &'static str) -> Self {
        Run {
            cli,
            command,
            variant: String::new(),
            stopping_time: 2,
            levels: None,
            keep_coarsest: 2,
            trajectories: None,
            input: None,
            outputs: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    fn shrink(mut self, args: &ShrinkArgs) -> Self {
        self.levels = args.levels;
        self.keep_coarsest = args.keep_coarsest;
        self.extra.insert("rule".into(), json!(format!("{:?}", args.rule)));
        self.extra.insert("normalize".into(), json!(!args.no_normalize));
        self.extra.insert("noise_sd".into(), json!(args.noise_sd));
        self
    }

    fn set(mut self, key: &str, value: Value) -> Self {
        self.extra.insert(key.into(), value);
        self
    }

    fn write(self) -> Result<()> {
        let path: PathBuf = match (&self.cli.manifest, self.outputs.first()) {
            (Some(p), _) => p.clone(),
            (None, Some(out)) => {
                let mut name = out.as_os_str().to_owned();
                name.push(".manifest.json");
                name.into()
            }
            (None, None) => return Ok(()),
        };
        let manifest = RunManifest {
            command: self.command.into(),
            variant: self.variant,
            stopping_time: self.stopping_time,
            levels: self.levels,
            keep_coarsest: self.keep_coarsest,
            trajectories: self.trajectories,
            seed: self.cli.seed,
            input: self.input.map(|p| p.display().to_string()),
            outputs: self.outputs.iter().map(|p| p.display().to_string()).collect(),
            extra: self.extra,
            version: env!("CARGO_PKG_VERSION").into(),
        };
        std::fs::write(&path, manifest.to_json()?).with_context(|| format!("writing {}", path.display()))
    }
}

/// Quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn sparsity_csv(rows: &[(Variant, SparsityCurve)]) -> String {
    let mut out = String::from("variant,kept,ise,graphs\n");
    for (v, curve) in rows {
        for (k, e) in curve.ise.iter().enumerate() {
            let _ = writeln!(out, "{v},{k},{},{}", fmt_f64(*e), curve.graphs);
        }
    }
    out
}

pub fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Linegraph { input, output } => {
            let lg = load_graph(&input.input, input.complete_links)?;
            emit(output.as_deref(), &write_stations(&lg)?)?;
            let mut run = Run::new(cli, "linegraph");
            run.input = Some(&input.input);
            run.outputs.extend(output.as_deref());
            run.write()
        }
        Command::Forward { input, lift, levels, output, record } => {
            let config = lift_config(lift, seed)?;
            let (lg, values) = load(input)?;
            let (mut coeffs, rec) = forward(&values, &lg, &config)?;
            if let Some(l) = levels {
                coeffs.assign_levels(*l)?;
            }
            emit(output.as_deref(), &write_coefficients(&coeffs))?;
            std::fs::write(record, write_record(&rec)?).with_context(|| format!("writing {}", record.display()))?;
            let mut run = Run::new(cli, "forward");
            run.variant = lift.variant.clone();
            run.stopping_time = lift.tau;
            run.levels = *levels;
            run.input = Some(&input.input);
            run.outputs.extend(output.as_deref());
            run.outputs.push(record);
            run.set("values", json!(input.values.as_ref().map(|p| p.display().to_string()))).write()
        }
        Command::Inverse { coefficients, record, graph, output } => {
            let coeffs = parse_coefficients(&std::fs::read_to_string(coefficients)?)?;
            let rec = parse_record(&std::fs::read_to_string(record)?)?;
            let values = inverse(&coeffs, &rec)?;
            let text = match graph {
                Some(g) => {
                    let lg = load_graph(g, false)?;
                    if lg.m() != values.len() {
                        bail!(edge_lifting::Error::RecordMismatch(format!(
                            "record has {} vertices, graph has {}",
                            values.len(),
                            lg.m()
                        )));
                    }
                    write_values(&lg, &values)
                }
                None => {
                    let mut out = String::from("vertex,id,value\n");
                    for (k, v) in values.iter().enumerate() {
                        let _ = writeln!(out, "{k},{k},{}", fmt_f64(*v));
                    }
                    out
                }
            };
            emit(output.as_deref(), &text)?;
            let mut run = Run::new(cli, "inverse");
            run.variant = rec.config.variant().to_string();
            run.stopping_time = rec.config.stopping_time;
            run.input = Some(coefficients);
            run.outputs.extend(output.as_deref());
            run.set("record", json!(record.display().to_string())).write()
        }
        Command::Denoise { input, lift, shrink, output } => {
            let config = lift_config(lift, seed)?;
            let (lg, values) = load(input)?;
            let result = denoise(&values, &lg, &config, &shrink_config(shrink))?;
            emit(output.as_deref(), &write_denoise(&lg, &values, &result))?;
            let mut run = Run::new(cli, "denoise").shrink(shrink);
            run.variant = lift.variant.clone();
            run.stopping_time = lift.tau;
            run.input = Some(&input.input);
            run.outputs.extend(output.as_deref());
            run.write()
        }
        Command::Nlt { input, lift, shrink, trajectories, sigma, reps, output } => {
            let config = lift_config(lift, seed)?;
            let (lg, values) = load(input)?;
            let sc = shrink_config(shrink);
            let text = match sigma {
                None => {
                    let res = nlt_denoise(&values, &lg, &config, &sc, *trajectories, seed)?;
                    write_values(&lg, &res.estimates)
                }
                Some(sigma) => {
                    if !(*sigma > 0.0) || *reps == 0 {
                        bail!(edge_lifting::Error::InvalidConfig("--sigma must be positive and --reps at least 1".into()));
                    }
                    let (mut single, mut averaged) = (Vec::new(), Vec::new());
                    for r in 0..*reps as u64 {
                        let noisy = add_gaussian(&values, *sigma, seed, &[r]);
                        single.push(mse(&denoise(&noisy, &lg, &config, &sc)?.estimates, &values));
                        let traj_seed = derive_seed(seed, Stream::Trajectory, &[r]);
                        averaged.push(mse(&nlt_denoise(&noisy, &lg, &config, &sc, *trajectories, traj_seed)?.estimates, &values));
                    }
                    let (s, s_se) = mean_and_se(&single);
                    let (a, a_se) = mean_and_se(&averaged);
                    let mut out = String::from("method,amse,se\n");
                    let _ = writeln!(out, "{},{},{}", lift.variant, fmt_f64(s), fmt_f64(s_se));
                    let _ = writeln!(out, "{}-nlt({trajectories}),{},{}", lift.variant, fmt_f64(a), fmt_f64(a_se));
                    let _ = writeln!(out, "# improvement,{:.4}", 1.0 - a / s);
                    out
                }
            };
            emit(output.as_deref(), &text)?;
            let mut run = Run::new(cli, "nlt").shrink(shrink);
            run.variant = lift.variant.clone();
            run.stopping_time = lift.tau;
            run.trajectories = Some(*trajectories);
            run.input = Some(&input.input);
            run.outputs.extend(output.as_deref());
            run.set("sigma", json!(sigma)).set("reps", json!(reps)).write()
        }
        Command::Condnum { input, variant, graphs, n, tau, matrix, output } => {
            let variants = parse_variants(variant)?;
            let config = |v: Variant, s: u64| LiftingConfig::new(v).with_stopping_time(*tau).with_seed(s);
            let text = match input {
                Some(path) => {
                    let lg = load_graph(path, false)?;
                    let mut out = String::from("variant,kappa\n");
                    for &v in &variants {
                        let mats = build_matrices(&lg, &config(v, seed))?;
                        let _ = writeln!(out, "{v},{}", fmt_f64(condition_number(&mats)?));
                        if let (Some(p), true) = (matrix, variants.len() == 1) {
                            let labels: Vec<String> = mats
                                .row_ids
                                .iter()
                                .enumerate()
                                .map(|(i, id)| format!("{}{id}", if i < mats.detail_rows { "d" } else { "c" }))
                                .collect();
                            std::fs::write(p, write_matrix(&mats.forward, mats.m, &labels))?;
                        }
                    }
                    if matrix.is_some() && variants.len() != 1 {
                        bail!(edge_lifting::Error::InvalidConfig("--matrix needs exactly one --variant".into()));
                    }
                    out
                }
                None => {
                    if matrix.is_some() {
                        bail!(edge_lifting::Error::InvalidConfig("--matrix needs --input".into()));
                    }
                    let lgs: Vec<LineGraph<f64>> = (0..*graphs as u64)
                        .map(|q| sample_network(*n, seed, q).and_then(|g| build_line_graph(&g)))
                        .collect::<Result<_, _>>()?;
                    let mut out = String::from("variant,max,q75,median,q25,min\n");
                    for &v in &variants {
                        let mut k: Vec<f64> = lgs
                            .iter()
                            .enumerate()
                            .map(|(q, lg)| {
                                condition_number(&build_matrices(lg, &config(v, derive_seed(seed, Stream::TieBreak, &[q as u64])))?)
                            })
                            .collect::<Result<_, _>>()?;
                        k.sort_by(|a, b| a.total_cmp(b));
                        let row = [1.0, 0.75, 0.5, 0.25, 0.0].map(|p| format!("{:.4}", quantile(&k, p)));
                        let _ = writeln!(out, "{v},{}", row.join(","));
                    }
                    out
                }
            };
            emit(output.as_deref(), &text)?;
            let mut run = Run::new(cli, "condnum");
            run.variant = variant.clone();
            run.stopping_time = *tau;
            run.input = input.as_deref();
            run.outputs.extend(output.as_deref());
            run.outputs.extend(matrix.as_deref());
            run.set("graphs", json!(graphs)).set("n", json!(n)).write()
        }
        Command::Sparsity { input, variant, field, embedding: emb, graphs, n, tau, output } => {
            let variants = parse_variants(variant)?;
            let config = |v: Variant, s: u64| LiftingConfig::new(v).with_stopping_time(*tau).with_seed(s);
            let mut rows = Vec::new();
            match input {
                Some(path) => {
                    let lg = load_graph(path, false)?;
                    let values = lg
                        .values()
                        .ok_or_else(|| edge_lifting::Error::EmptyInput("the graph file has missing values".into()))?;
                    for &v in &variants {
                        rows.push((v, sparsity_curve(&values, &lg, &config(v, seed))?));
                    }
                }
                None => {
                    let f = TestField::from_name(field)?;
                    let mut data = Vec::new();
                    for q in 0..*graphs as u64 {
                        let g = sample_network(*n, seed, q)?;
                        let truth = match emb {
                            EmbeddingArg::Pointwise => embed_pointwise(&f, &g)?,
                            EmbeddingArg::EdgeAverage => embed_edge_average(&f, &g, 100)?,
                        };
                        data.push((build_line_graph(&g)?, truth));
                    }
                    for &v in &variants {
                        let curves = data
                            .iter()
                            .enumerate()
                            .map(|(q, (lg, t))| {
                                sparsity_curve(t, lg, &config(v, derive_seed(seed, Stream::TieBreak, &[q as u64])))
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        rows.push((v, SparsityCurve::average(&curves)?));
                    }
                }
            }
            emit(output.as_deref(), &sparsity_csv(&rows))?;
            let mut run = Run::new(cli, "sparsity");
            run.variant = variant.clone();
            run.stopping_time = *tau;
            run.input = input.as_deref();
            run.outputs.extend(output.as_deref());
            run.set("field", json!(field))
                .set("embedding", json!(embedding(*emb).name()))
                .set("graphs", json!(graphs))
                .set("n", json!(n))
                .write()
        }
        Command::Simulate { n, graphs, reps, snr, embedding: emb, samples, fields, variant, shrink, output, table, metric } => {
            let snrs = snr
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| edge_lifting::Error::InvalidConfig(format!("bad --snr list: {e}")))?;
            let cfg = ExperimentConfig {
                n: *n,
                graphs: *graphs,
                replications: *reps,
                snrs,
                embedding: embedding(*emb),
                samples: *samples,
                variants: parse_variants(variant)?,
                fields: parse_fields(fields)?,
                shrinkage: shrink_config(shrink),
                seed,
            };
            let report = run_experiment(&cfg)?;
            emit(output.as_deref(), &report.to_long_csv())?;
            if let Some(t) = table {
                std::fs::write(t, report.to_table_csv(metric)?).with_context(|| format!("writing {}", t.display()))?;
            }
            let mut run = Run::new(cli, "simulate").shrink(shrink);
            run.variant = variant.clone();
            run.outputs.extend(output.as_deref());
            run.outputs.extend(table.as_deref());
            run.set("n", json!(n))
                .set("graphs", json!(graphs))
                .set("reps", json!(reps))
                .set("snr", json!(snr))
                .set("embedding", json!(cfg.embedding.name()))
                .set("samples", json!(samples))
                .set("fields", json!(fields))
                .set("metric", json!(metric))
                .write()
        }
        Command::Flowsim { fixture_seed, output, clusters } => {
            let fixture = generate_flow_fixture(*fixture_seed)?;
            emit(output.as_deref(), &write_graph(&fixture.graph))?;
            if let Some(p) = clusters {
                let mut out = String::from("edge_id,cluster\n");
                for (e, c) in fixture.graph.edges().iter().zip(&fixture.clusters) {
                    let _ = writeln!(out, "{},{c}", e.id);
                }
                std::fs::write(p, out).with_context(|| format!("writing {}", p.display()))?;
            }
            let mut run = Run::new(cli, "flowsim");
            run.outputs.extend(output.as_deref());
            run.outputs.extend(clusters.as_deref());
            run.set("fixture_seed", json!(fixture_seed)).write()
        }
    }
}
