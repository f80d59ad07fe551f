use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use osveta_core::attack::{
    decimate, deletion_probability_curve, gaussian_noise, random_vertex_set, trace_vertices,
};
use osveta_core::neuro::{build_training_set, init_network, train as train_network, TrainConfig};
use osveta_core::ranking::{compute_feature_table, select_hosts, Scorer};
use osveta_core::watermark::{bit_error_rate, embed_watermark, extract_watermark};
use osveta_core::{
    build_adjacency, load_mesh, save_mesh, shapes, validate_topology, CriterionConfig, Mesh,
    MeshFormat, NetworkParams, WatermarkKey, WatermarkPayload, DEFAULT_FLAT_ANGLE_TOL,
};

use crate::config::{config_error, read_text, RunConfig, ScorerKind};
use crate::table::{num, write_json, Table};

pub enum Outcome {
    Complete,
    /// The report was written but some evaluation cells failed.
    Partial {
        failed: usize,
    },
}

fn mesh_format(path: &Path) -> anyhow::Result<MeshFormat> {
    MeshFormat::from_path(path).ok_or_else(|| {
        config_error(format!(
            "{}: unknown mesh format (expected .obj or .ply)",
            path.display()
        ))
    })
}

fn read_mesh(path: &Path) -> anyhow::Result<Mesh> {
    let format = mesh_format(path)?;
    let bytes = std::fs::read(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
    load_mesh(&bytes, format).with_context(|| format!("loading {}", path.display()))
}

fn write_mesh(path: &Path, mesh: &Mesh) -> anyhow::Result<()> {
    let bytes = save_mesh(mesh, mesh_format(path)?);
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn out_dir(cfg: &RunConfig) -> anyhow::Result<PathBuf> {
    let dir = cfg.out()?.to_path_buf();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn criteria(cfg: &RunConfig) -> anyhow::Result<CriterionConfig> {
    match &cfg.criteria {
        Some(path) => CriterionConfig::from_json(&read_text(path)?)
            .map_err(|e| config_error(format!("{}: {e}", path.display()))),
        None => Ok(CriterionConfig::default()),
    }
}

fn params(path: &Path) -> anyhow::Result<NetworkParams> {
    NetworkParams::from_json(&read_text(path)?)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn key(cfg: &RunConfig) -> anyhow::Result<WatermarkKey> {
    let path = cfg
        .key
        .as_deref()
        .ok_or_else(|| config_error("no watermark key given (--key)"))?;
    WatermarkKey::from_json(&read_text(path)?)
        .map_err(|e| config_error(format!("{}: {e}", path.display())))
}

fn payload(text: &str) -> anyhow::Result<WatermarkPayload> {
    WatermarkPayload::parse(text).map_err(|e| config_error(format!("payload: {e}")))
}

fn scorer(cfg: &RunConfig, kind: ScorerKind) -> anyhow::Result<Scorer> {
    Ok(match kind {
        ScorerKind::Osveta => Scorer::Osveta(criteria(cfg)?),
        ScorerKind::Random => Scorer::Random { seed: cfg.seed() },
        ScorerKind::Neuro => {
            let path = cfg.params.as_deref().ok_or_else(|| {
                config_error("the neuro scorer needs trained parameters (--params)")
            })?;
            Scorer::Neuro {
                params: params(path)?,
                criteria: criteria(cfg)?,
            }
        }
    })
}

fn default_scorer(cfg: &RunConfig) -> anyhow::Result<Scorer> {
    scorer(cfg, cfg.scorer.unwrap_or(ScorerKind::Osveta))
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn analyze(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let path = cfg.single_mesh()?;
    let mesh = read_mesh(path)?;
    let dir = out_dir(cfg)?;
    let adj = build_adjacency(&mesh);
    let records = compute_feature_table(&mesh, &adj);
    let mut table = Table::new([
        "vertex",
        "kappa_g",
        "kappa_g1",
        "theta",
        "psi_min",
        "psi_max",
        "area",
        "valence",
        "isolated",
        "boundary",
        "flat_region",
        "collinear_chain",
    ]);
    for r in &records {
        let f = r.features.as_ref();
        table.push(vec![
            json!(r.index),
            opt_num(f.map(|f| f.kappa_g)),
            opt_num(f.map(|f| f.kappa_g1)),
            opt_num(f.map(|f| f.theta)),
            opt_num(f.map(|f| f.psi_min)),
            opt_num(f.map(|f| f.psi_max)),
            opt_num(f.map(|f| f.area)),
            json!(adj.valence(r.index)),
            json!(r.risk.isolated),
            json!(r.risk.boundary),
            json!(r.risk.flat_region),
            json!(r.risk.collinear_chain),
        ]);
    }
    table.write(&dir, "features", cfg.format())?;
    let topo = validate_topology(&mesh, &adj, DEFAULT_FLAT_ANGLE_TOL);
    write_json(
        &dir,
        "topology.json",
        &json!({
            "vertices": mesh.vertex_count(),
            "faces": mesh.face_count(),
            "euler_characteristic": mesh.euler_characteristic(),
            "clean": topo.is_clean(),
            "report": topo,
        }),
    )?;
    Ok(Outcome::Complete)
}

pub fn rank(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let scorer = default_scorer(cfg)?;
    let mesh = read_mesh(cfg.single_mesh()?)?;
    let dir = out_dir(cfg)?;
    let ranking = scorer.rank(&mesh)?;
    let mut table = Table::new(["rank", "vertex", "score"]);
    for (i, (&v, &s)) in ranking.q.iter().zip(&ranking.s).enumerate() {
        table.push(vec![json!(i + 1), json!(v), num(s)]);
    }
    table.write(&dir, "ranking", cfg.format())?;
    Ok(Outcome::Complete)
}

pub fn train(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    if cfg.mesh.is_empty() {
        return Err(config_error("training needs at least one --mesh"));
    }
    let criteria = criteria(cfg)?;
    let meshes = cfg
        .mesh
        .iter()
        .map(|p| read_mesh(p))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let dir = out_dir(cfg)?;
    let mut data = Vec::new();
    for (path, mesh) in cfg.mesh.iter().zip(&meshes) {
        let samples = build_training_set(mesh, &cfg.train.schedule, &criteria)
            .with_context(|| format!("building training set from {}", path.display()))?;
        if samples.len() < cfg.train.min_samples {
            bail!(
                "{} yields {} training samples, fewer than the minimum {}",
                path.display(),
                samples.len(),
                cfg.train.min_samples
            );
        }
        data.extend(samples);
    }
    let init = init_network(criteria.rates().len(), &criteria.rates(), cfg.seed())?;
    let tc = TrainConfig {
        eta: cfg.train.eta,
        epochs: cfg.train.epochs,
        seed: cfg.seed(),
        shuffle: cfg.train.shuffle,
    };
    let (trained, history) = train_network(&init, &data, &tc)?;
    std::fs::write(dir.join("params.json"), trained.to_json() + "\n")?;
    let mut table = Table::new(["epoch", "loss"]);
    for (i, l) in history.iter().enumerate() {
        table.push(vec![json!(i + 1), num(*l)]);
    }
    table.write(&dir, "loss", cfg.format())?;
    Ok(Outcome::Complete)
}

pub fn keygen(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let out = cfg.out()?;
    let seed = cfg.seed();
    let key = WatermarkKey::new(
        cfg.keygen.payload_bits,
        cfg.keygen.group_size,
        seed,
        seed ^ 0x9e37_79b9_7f4a_7c15,
    )
    .map_err(|e| config_error(e.to_string()))?;
    std::fs::write(out, key.to_json() + "\n")
        .with_context(|| format!("writing {}", out.display()))?;
    Ok(Outcome::Complete)
}

pub fn embed(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let key = key(cfg)?;
    let payload = payload(
        cfg.payload
            .as_deref()
            .ok_or_else(|| config_error("no payload given (--payload)"))?,
    )?;
    let scorer = default_scorer(cfg)?;
    let path = cfg.single_mesh()?;
    let mesh = read_mesh(path)?;
    let dir = out_dir(cfg)?;
    let (marked, record) = embed_watermark(&mesh, &payload, &scorer, &key)?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("obj")
        .to_ascii_lowercase();
    write_mesh(&dir.join(format!("marked.{ext}")), &marked)?;
    write_json(
        &dir,
        "embed.json",
        &json!({ "scorer": scorer.name(), "record": record }),
    )?;
    Ok(Outcome::Complete)
}

pub fn extract(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let key = key(cfg)?;
    let expected = cfg.payload.as_deref().map(payload).transpose()?;
    let scorer = default_scorer(cfg)?;
    let mesh = read_mesh(cfg.single_mesh()?)?;
    let dir = out_dir(cfg)?;
    let ex = extract_watermark(&mesh, &scorer, &key)?;
    let ber = expected
        .as_ref()
        .map(|p| bit_error_rate(&p.bits, &ex.payload.bits));
    write_json(
        &dir,
        "extract.json",
        &json!({
            "scorer": scorer.name(),
            "payload": ex.payload.to_bit_string(),
            "converged": ex.converged,
            "desync_position": ex.desync_position,
            "run_mismatches": ex.run_mismatches,
            "decoder_iterations": ex.decoder_iterations,
            "ber": opt_num(ber),
        }),
    )?;
    Ok(Outcome::Complete)
}

fn level_tag(keep: f64) -> String {
    format!("keep_{keep}")
}

pub fn attack(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let levels = cfg.levels()?;
    let scorer = default_scorer(cfg)?;
    let path = cfg.single_mesh()?;
    let mut mesh = read_mesh(path)?;
    let dir = out_dir(cfg)?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("obj")
        .to_ascii_lowercase();
    let ranking = scorer.rank(&mesh)?;
    let tracked = select_hosts(&ranking, cfg.set_size().min(ranking.len()))?;
    if let Some(sigma) = cfg.noise {
        mesh = gaussian_noise(&mesh, sigma, cfg.seed())?;
        write_mesh(&dir.join(format!("noisy.{ext}")), &mesh)?;
    }
    let results = levels
        .par_iter()
        .map(|&keep| {
            let (out, map) = decimate(&mesh, keep)?;
            let (deleted, _) = trace_vertices(&map, &tracked)?;
            Ok((out, map.surviving_count, deleted))
        })
        .collect::<osveta_core::Result<Vec<_>>>()?;
    let mut table = Table::new([
        "keep_fraction",
        "deleted_fraction",
        "vertices",
        "tracked",
        "tracked_deleted",
        "p_d",
    ]);
    for (&keep, (out, remaining, deleted)) in levels.iter().zip(&results) {
        write_mesh(
            &dir.join(format!("attacked_{}.{ext}", level_tag(keep))),
            out,
        )?;
        let p_d = if tracked.is_empty() {
            0.0
        } else {
            *deleted as f64 / tracked.len() as f64
        };
        table.push(vec![
            num(keep),
            num(1.0 - *remaining as f64 / mesh.vertex_count() as f64),
            json!(remaining),
            json!(tracked.len()),
            json!(deleted),
            num(p_d),
        ]);
    }
    table.write(&dir, "attack", cfg.format())?;
    Ok(Outcome::Complete)
}

#[derive(Serialize)]
struct CellFailure {
    mesh: String,
    seed: Option<u64>,
    scorer: Option<String>,
    keep_fraction: Option<f64>,
    error: String,
}

/// Per (mesh, seed) cell: deletion counts for each named set at each level.
type CurveCell = Vec<(String, usize, Vec<usize>)>;

fn curve_cell(
    mesh: &Mesh,
    scorers: &[Scorer],
    set_size: usize,
    seed: u64,
    deletion_levels: &[f64],
) -> anyhow::Result<CurveCell> {
    let mut ranked = Vec::new();
    for s in scorers {
        ranked.push((s.name().to_string(), s.rank(mesh)?));
    }
    let size = ranked
        .iter()
        .map(|(_, r)| r.len())
        .fold(set_size.min(mesh.vertex_count()), usize::min);
    let mut sets = vec![(
        "random".to_string(),
        random_vertex_set(mesh.vertex_count(), size, seed)?,
    )];
    for (name, r) in &ranked {
        sets.push((name.clone(), select_hosts(r, size)?));
    }
    let reports = deletion_probability_curve(mesh, &sets, deletion_levels)?;
    Ok(sets
        .iter()
        .enumerate()
        .map(|(i, (name, set))| {
            (
                name.clone(),
                set.len(),
                reports.iter().map(|r| r.sets[i].deleted).collect(),
            )
        })
        .collect())
}

pub fn evaluate(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let levels = cfg.levels()?;
    let deletion_levels: Vec<f64> = levels.iter().map(|k| 1.0 - k).collect();
    let mut scorers = vec![Scorer::Osveta(criteria(cfg)?)];
    if cfg.params.is_some() {
        scorers.push(scorer(cfg, ScorerKind::Neuro)?);
    }
    let watermark = match (&cfg.key, &cfg.payload) {
        (Some(_), Some(p)) => Some((key(cfg)?, payload(p)?)),
        (None, None) => None,
        _ => {
            return Err(config_error(
                "end-to-end evaluation needs both --key and --payload",
            ))
        }
    };
    let seeds: Vec<u64> = (0..cfg.seeds.unwrap_or(1) as u64)
        .map(|i| cfg.seed() + i)
        .collect();
    if seeds.is_empty() {
        return Err(config_error("seeds must be at least 1"));
    }
    // Without explicit meshes, every seed draws its own evaluation corpus.
    let user_meshes: Vec<(String, Mesh)> = cfg
        .mesh
        .iter()
        .map(|p| {
            Ok((
                p.file_name().map_or_else(
                    || p.display().to_string(),
                    |n| n.to_string_lossy().into_owned(),
                ),
                read_mesh(p)?,
            ))
        })
        .collect::<anyhow::Result<_>>()?;
    let dir = out_dir(cfg)?;
    let meshes_for = |seed: u64| -> Vec<(String, Mesh)> {
        if user_meshes.is_empty() {
            shapes::evaluation_corpus(seed)
        } else {
            user_meshes.clone()
        }
    };

    let cells: Vec<(u64, String, Mesh)> = seeds
        .iter()
        .flat_map(|&s| meshes_for(s).into_iter().map(move |(n, m)| (s, n, m)))
        .collect();
    let outcomes: Vec<anyhow::Result<CurveCell>> = cells
        .par_iter()
        .map(|(seed, _, mesh)| curve_cell(mesh, &scorers, cfg.set_size(), *seed, &deletion_levels))
        .collect();

    let mut failures = Vec::new();
    // (mesh, set) -> (set size, per-level deleted counts per seed)
    let mut acc: BTreeMap<(String, String), (usize, Vec<Vec<usize>>)> = BTreeMap::new();
    for ((seed, name, _), outcome) in cells.iter().zip(outcomes) {
        match outcome {
            Ok(cell) => {
                for (set, size, deleted) in cell {
                    let e = acc.entry((name.clone(), set)).or_insert((size, Vec::new()));
                    e.1.push(deleted);
                }
            }
            Err(e) => failures.push(CellFailure {
                mesh: name.clone(),
                seed: Some(*seed),
                scorer: None,
                keep_fraction: None,
                error: format!("{e:#}"),
            }),
        }
    }

    let mut counts = Table::new(
        [
            "mesh".to_string(),
            "set".to_string(),
            "set_size".to_string(),
        ]
        .into_iter()
        .chain(levels.iter().map(|&k| level_tag(k))),
    );
    let mut curve = Table::new([
        "mesh",
        "set",
        "keep_fraction",
        "deleted_fraction",
        "p_d_mean",
        "p_d_min",
        "p_d_max",
        "seeds",
    ]);
    let order = |set: &str| match set {
        "random" => 0,
        "osveta" => 1,
        _ => 2,
    };
    let mut keys: Vec<&(String, String)> = acc.keys().collect();
    keys.sort_by_key(|(m, s)| (m.clone(), order(s)));
    for k in keys {
        let (size, runs) = &acc[k];
        let mut row = vec![json!(k.0), json!(k.1), json!(size)];
        for (li, &keep) in levels.iter().enumerate() {
            let vals: Vec<f64> = runs.iter().map(|r| r[li] as f64).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            row.push(num(mean));
            let pd: Vec<f64> = vals
                .iter()
                .map(|v| if *size == 0 { 0.0 } else { v / *size as f64 })
                .collect();
            curve.push(vec![
                json!(k.0),
                json!(k.1),
                num(keep),
                num(1.0 - keep),
                num(pd.iter().sum::<f64>() / pd.len() as f64),
                num(pd.iter().copied().fold(f64::INFINITY, f64::min)),
                num(pd.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                json!(pd.len()),
            ]);
        }
        counts.push(row);
    }
    counts.write(&dir, "deleted_counts", cfg.format())?;
    curve.write(&dir, "pd_curve", cfg.format())?;

    if let Some((key, payload)) = &watermark {
        let mut all_scorers = vec![Scorer::Random { seed: cfg.seed() }];
        all_scorers.extend(scorers.iter().cloned());
        let base = meshes_for(cfg.seed());
        let jobs: Vec<(usize, usize)> = (0..base.len())
            .flat_map(|m| (0..all_scorers.len()).map(move |s| (m, s)))
            .collect();
        let results: Vec<Vec<(f64, anyhow::Result<(f64, bool)>)>> = jobs
            .par_iter()
            .map(|&(m, s)| ber_cells(&base[m].1, &all_scorers[s], key, payload, &levels))
            .collect();
        let mut ber = Table::new([
            "mesh",
            "scorer",
            "keep_fraction",
            "status",
            "ber",
            "converged",
        ]);
        for (&(m, s), cells) in jobs.iter().zip(results) {
            for (keep, r) in cells {
                let (status, b, conv) = match r {
                    Ok((b, c)) => ("ok", num(b), json!(c)),
                    Err(e) => {
                        failures.push(CellFailure {
                            mesh: base[m].0.clone(),
                            seed: None,
                            scorer: Some(all_scorers[s].name().into()),
                            keep_fraction: Some(keep),
                            error: format!("{e:#}"),
                        });
                        ("failed", Value::Null, Value::Null)
                    }
                };
                ber.push(vec![
                    json!(base[m].0),
                    json!(all_scorers[s].name()),
                    num(keep),
                    json!(status),
                    b,
                    conv,
                ]);
            }
        }
        ber.write(&dir, "ber", cfg.format())?;
    }

    write_json(
        &dir,
        "evaluate.json",
        &json!({
            "scorers": std::iter::once("random").chain(scorers.iter().map(|s| s.name())).collect::<Vec<_>>(),
            "keep_fractions": levels,
            "seeds": seeds,
            "set_size": cfg.set_size(),
            "failures": failures,
        }),
    )?;
    Ok(if failures.is_empty() {
        Outcome::Complete
    } else {
        Outcome::Partial {
            failed: failures.len(),
        }
    })
}

/// Embeds once, then decimates to every level and extracts blind.
fn ber_cells(
    mesh: &Mesh,
    scorer: &Scorer,
    key: &WatermarkKey,
    payload: &WatermarkPayload,
    levels: &[f64],
) -> Vec<(f64, anyhow::Result<(f64, bool)>)> {
    let marked = match embed_watermark(mesh, payload, scorer, key) {
        Ok((m, _)) => m,
        Err(e) => {
            let msg = format!("embedding: {e}");
            return levels
                .iter()
                .map(|&k| (k, Err(anyhow::anyhow!(msg.clone()))))
                .collect();
        }
    };
    levels
        .iter()
        .map(|&keep| {
            let r = (|| {
                let (attacked, _) = decimate(&marked, keep)?;
                let ex = extract_watermark(&attacked, scorer, key)?;
                Ok((
                    bit_error_rate(&payload.bits, &ex.payload.bits),
                    ex.converged,
                ))
            })();
            (keep, r)
        })
        .collect()
}

pub fn generate(cfg: &RunConfig, shape: &str) -> anyhow::Result<Outcome> {
    let out = cfg.out()?;
    let seed = cfg.seed();
    let mesh = match shape {
        "icosahedron" => shapes::icosahedron(1.0),
        "icosphere" => shapes::icosphere(1.0, 3),
        "pyramid-grid" => shapes::pyramid_grid(9, 1.0).0,
        "bumpy-sphere" => shapes::bumpy_sphere(1.0, 5, 40, seed),
        "ridged-torus" => shapes::ridged_torus(2.0, 0.7, 120, 48, seed),
        "terrain" => shapes::terrain(76, seed),
        other => return Err(config_error(format!("unknown shape {other:?}"))),
    };
    write_mesh(out, &mesh)?;
    Ok(Outcome::Complete)
}
