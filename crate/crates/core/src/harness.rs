//! Replicated discrete runs, comparison with limit ensembles and report files.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, ModelError, Result};
use crate::graph::{bfs_distances, components, intersection_graph, isometry_check, BipartiteGraph, ComponentRecord, SimpleGraph, Vertex};
use crate::lifo::{assemble_graph, explore, sample_surplus_direct, ClockSet};
use crate::limit::{rank_excursions, LimitParams, ZSampler};
use crate::poisson::{sample_conditioned_with, Scaling};
use crate::rng::replicate_rng;
use crate::stats::{ks_critical_two_sample, ks_two_sample, summarize};
use crate::encoding::{
    composition_path, excursions, height_process, lambda_paths, queue_load_path, sigma_transfer, tree_distance_via_height,
    vertex_heights, z_discrepancy, Comparison, Schedule, ZProcess,
};
use crate::lifo::{black_forest, ExplorationRecord};
use crate::surplus::poissonized_surplus;
use crate::metric::distortion_certificate;
use crate::weights::{validate_critical_pair, Color, CriticalPair, WeightSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Limit-ensemble settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSettings {
    pub paths: usize,
    pub step: f64,
    pub horizon: f64,
    pub seed: u64,
}

impl Default for LimitSettings {
    fn default() -> Self {
        LimitSettings { paths: 2000, step: 1e-3, horizon: 10.0, seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pair: CriticalPair,
    pub replicates: usize,
    pub seed: u64,
    pub top_k: usize,
    #[serde(default)]
    pub limit: LimitSettings,
    /// Largest total number of vertices over all replicates; `None` means unlimited.
    #[serde(default)]
    pub vertex_budget: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn new(pair: CriticalPair, replicates: usize, seed: u64) -> Self {
        ExperimentConfig { pair, replicates, seed, top_k: 2, limit: LimitSettings::default(), vertex_budget: None, out_dir: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| ModelError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| ModelError::Io(e.to_string()))?)
    }

    pub fn validate(&self) -> Result<()> {
        validate_critical_pair(&self.pair)?;
        if self.replicates == 0 || self.top_k == 0 {
            return invalid("replicates and top_k must be positive");
        }
        Ok(())
    }

    pub fn scaling(&self) -> Result<Scaling> {
        let report = validate_critical_pair(&self.pair)?;
        Ok(Scaling::for_regime(self.pair.n, report.alpha.unwrap_or(2.0)))
    }
}

/// One of the largest components of a replicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub x_mass: f64,
    pub y_mass: f64,
    pub surplus: usize,
    /// Surplus pairs from the Poissonized sampler in the same tree.
    pub poissonized_surplus: usize,
    pub diameter: usize,
    /// Position in the ranking by black mass, from 0.
    pub x_rank: usize,
    /// Position in the ranking by white mass, from 0.
    pub y_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub index: usize,
    /// Largest components by white mass.
    pub top: Vec<ComponentSummary>,
    /// False when the graph has no edge at all.
    pub nontrivial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    /// `[seed, stream]` of every replicate.
    pub seeds: Vec<[u64; 2]>,
    pub replicates: Vec<ReplicateRecord>,
    /// Fewer replicates than requested because of the vertex budget.
    pub partial: bool,
    /// Replicates without any nontrivial component.
    pub empty_replicates: usize,
}

/// Exact diameter of the component holding `members`.
fn component_diameter(g: &BipartiteGraph, rec: &ComponentRecord) -> usize {
    let members = rec.blacks.iter().map(|&i| Vertex::Black(i)).chain(rec.whites.iter().map(|&j| Vertex::White(j)));
    let mut best = 0;
    for v in members {
        let d = bfs_distances(g, v);
        let far = d.black.iter().chain(&d.white).filter_map(|x| *x).max().unwrap_or(0);
        best = best.max(far);
    }
    best
}

fn run_replicate(config: &ExperimentConfig, index: usize) -> Result<ReplicateRecord> {
    let mut rng = replicate_rng(config.seed, index as u64);
    let coupling = sample_conditioned_with(&config.pair, &mut rng);
    let record = coupling.explore()?;
    let surplus = sample_surplus_direct(&record, &mut rng);
    let g = assemble_graph(&record, &surplus);
    let mut comps = components(&g);
    comps.retain(|c| c.is_nontrivial());
    let nontrivial = !comps.is_empty();

    let sigma = sigma_transfer(&record);
    let atoms = poissonized_surplus(&record, &sigma, &mut rng);
    let root_of = tree_roots(&record);
    let mut by_root = std::collections::HashMap::new();
    for &(b, _) in &atoms.edges {
        *by_root.entry(root_of[b]).or_insert(0usize) += 1;
    }

    let mut by_y: Vec<usize> = (0..comps.len()).collect();
    by_y.sort_by(|&a, &b| comps[b].y_mass.total_cmp(&comps[a].y_mass).then(a.cmp(&b)));
    let mut by_x: Vec<usize> = (0..comps.len()).collect();
    by_x.sort_by(|&a, &b| comps[b].x_mass.total_cmp(&comps[a].x_mass).then(a.cmp(&b)));
    let mut x_rank = vec![0; comps.len()];
    for (r, &c) in by_x.iter().enumerate() {
        x_rank[c] = r;
    }
    let top = by_y
        .iter()
        .take(config.top_k)
        .enumerate()
        .map(|(y_rank, &c)| {
            let rec = &comps[c];
            let root = rec.blacks.first().map(|&b| root_of[b]);
            ComponentSummary {
                x_mass: rec.x_mass,
                y_mass: rec.y_mass,
                surplus: rec.surplus,
                poissonized_surplus: root.and_then(|r| by_root.get(&r).copied()).unwrap_or(0),
                diameter: component_diameter(&g, rec),
                x_rank: x_rank[c],
                y_rank,
            }
        })
        .collect();
    Ok(ReplicateRecord { index, top, nontrivial })
}

/// Root of the black tree holding each black.
fn tree_roots(record: &ExplorationRecord) -> Vec<usize> {
    let forest = black_forest(record);
    let mut root = vec![usize::MAX; forest.len()];
    for &r in &forest.roots {
        let mut stack = vec![r];
        while let Some(v) = stack.pop() {
            root[v] = r;
            stack.extend(forest.children[v].iter().copied());
        }
    }
    root
}

/// Runs all replicates in parallel; replicate `k` uses stream `k` of the configured seed.
pub fn run_discrete(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let per = config.pair.n + config.pair.m;
    let allowed = config.vertex_budget.map_or(config.replicates, |b| (b / per).min(config.replicates));
    let replicates: Vec<ReplicateRecord> =
        (0..allowed).into_par_iter().map(|k| run_replicate(config, k)).collect::<Result<_>>()?;
    let empty_replicates = replicates.iter().filter(|r| !r.nontrivial).count();
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        seeds: (0..allowed as u64).map(|k| [config.seed, k]).collect(),
        replicates,
        partial: allowed < config.replicates,
        empty_replicates,
    })
}

/// Ranked excursion lengths of independent `𝓩` paths, `top_k` per path (zero-padded).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitEnsemble {
    pub params: LimitParams,
    pub settings: LimitSettings,
    pub lengths: Vec<Vec<f64>>,
}

pub fn limit_ensemble(params: &LimitParams, settings: &LimitSettings, top_k: usize) -> Result<LimitEnsemble> {
    let sampler = ZSampler::new(params, settings.horizon, settings.step, None)?;
    let lengths = (0..settings.paths)
        .into_par_iter()
        .map(|k| {
            let mut rng = replicate_rng(settings.seed, k as u64);
            let path = sampler.sample(&mut rng)?;
            let mut ls: Vec<f64> = rank_excursions(&path).iter().take(top_k).map(|e| e.length).collect();
            ls.resize(top_k, 0.0);
            Ok(ls)
        })
        .collect::<Result<_>>()?;
    Ok(LimitEnsemble { params: params.clone(), settings: settings.clone(), lengths })
}

/// Threshold used for every limit comparison; an engineering choice.
pub const KS_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitComparison {
    pub k: usize,
    /// KS between rescaled white mass and the excursion length.
    pub ks_y: f64,
    /// KS between rescaled black mass and `ρ` times the excursion length.
    pub ks_x: f64,
    pub threshold: f64,
    pub sampling_noise: f64,
    pub pass: bool,
}

fn rescaled(report: &RunReport, k: usize, mass_scale: f64, x: bool) -> Vec<f64> {
    report
        .replicates
        .iter()
        .map(|r| r.top.get(k).map_or(0.0, |c| if x { c.x_mass } else { c.y_mass }) * mass_scale)
        .collect()
}

/// KS distances of the `k`-th largest rescaled masses against the `k`-th longest limit excursions;
/// `mass_exponent` overrides the regime scaling `1/b_n`.
pub fn compare_with_limit(report: &RunReport, ensemble: &LimitEnsemble, mass_exponent: Option<f64>) -> Result<Vec<LimitComparison>> {
    let n = report.replicates.len();
    if n != ensemble.lengths.len() {
        return invalid(format!("ensemble size {} differs from replicate count {n}", ensemble.lengths.len()));
    }
    let scale = match mass_exponent {
        Some(e) => (report.config.pair.n as f64).powf(-e),
        None => 1.0 / report.config.scaling()?.b_n,
    };
    let rho = ensemble.params.rho();
    let top_k = report.config.top_k.min(ensemble.lengths.first().map_or(0, |l| l.len()));
    Ok((0..top_k)
        .map(|k| {
            let limit: Vec<f64> = ensemble.lengths.iter().map(|l| l[k]).collect();
            let limit_x: Vec<f64> = limit.iter().map(|v| rho * v).collect();
            let ks_y = ks_two_sample(&rescaled(report, k, scale, false), &limit);
            let ks_x = ks_two_sample(&rescaled(report, k, scale, true), &limit_x);
            LimitComparison {
                k: k + 1,
                ks_y,
                ks_x,
                threshold: KS_THRESHOLD,
                sampling_noise: ks_critical_two_sample(n, n),
                pass: ks_y <= KS_THRESHOLD && ks_x <= KS_THRESHOLD,
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankingConsistency {
    /// Fraction of replicates whose top-`K` rankings by black and white mass agree.
    pub agreement: f64,
    pub ratio_mean: f64,
    /// Half-width of a 95% normal interval for the ratio mean.
    pub ratio_half_width: f64,
}

pub fn ranking_consistency(report: &RunReport, k: usize) -> Result<RankingConsistency> {
    if k == 0 || k > report.config.top_k {
        return Err(ModelError::OutOfRange(format!("K = {k} with {} recorded", report.config.top_k)));
    }
    let usable: Vec<&ReplicateRecord> = report.replicates.iter().filter(|r| r.top.len() >= k).collect();
    if usable.is_empty() {
        return invalid("no replicate has K nontrivial components");
    }
    let agree = usable.iter().filter(|r| r.top[..k].iter().all(|c| c.x_rank == c.y_rank)).count();
    let ratios: Vec<f64> = usable.iter().map(|r| r.top[0].x_mass / r.top[0].y_mass).collect();
    let s = summarize(&ratios);
    Ok(RankingConsistency {
        agreement: agree as f64 / usable.len() as f64,
        ratio_mean: s.mean,
        ratio_half_width: if s.count > 1 { 1.96 * s.std_error } else { 0.0 },
    })
}

const CSV_HEADER: [&str; 9] =
    ["replicate", "rank", "x_mass", "y_mass", "surplus", "poissonized_surplus", "diameter", "x_rank", "y_rank"];

pub fn report_csv(report: &RunReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| ModelError::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in &report.replicates {
        for (rank, c) in r.top.iter().enumerate() {
            w.write_record(&[
                r.index.to_string(),
                (rank + 1).to_string(),
                c.x_mass.to_string(),
                c.y_mass.to_string(),
                c.surplus.to_string(),
                c.poissonized_surplus.to_string(),
                c.diameter.to_string(),
                c.x_rank.to_string(),
                c.y_rank.to_string(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| ModelError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ModelError::Io(e.to_string()))
}

pub fn report_hash(report: &RunReport) -> Result<String> {
    let json = serde_json::to_string(report).map_err(|e| ModelError::Io(e.to_string()))?;
    Ok(Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub schema_version: u32,
    pub hash: String,
    pub report: RunReport,
    #[serde(default)]
    pub comparisons: Vec<LimitComparison>,
    #[serde(default)]
    pub ranking: Option<RankingConsistency>,
    /// Label attached to the KS threshold.
    pub threshold_note: String,
}

impl ReportSummary {
    pub fn new(report: &RunReport) -> Result<Self> {
        Ok(ReportSummary {
            schema_version: SCHEMA_VERSION,
            hash: report_hash(report)?,
            report: report.clone(),
            comparisons: Vec::new(),
            ranking: None,
            threshold_note: format!("KS threshold {KS_THRESHOLD} is an engineering choice"),
        })
    }
}

/// Writes `components.csv` and `summary.json` into `dir`.
pub fn emit(summary: &ReportSummary, dir: &Path) -> Result<()> {
    let io = |e: std::io::Error| ModelError::Io(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join("components.csv"), report_csv(&summary.report)?).map_err(io)?;
    let json = serde_json::to_string_pretty(summary).map_err(|e| ModelError::Io(e.to_string()))?;
    std::fs::write(dir.join("summary.json"), json).map_err(io)
}

pub fn read_summary(path: &Path) -> Result<ReportSummary> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| ModelError::Parse(e.to_string()))
}

/// Violation counts of the exact identities over random explored instances.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub instances: usize,
    pub composition: usize,
    pub excursion_mass: usize,
    pub heights: usize,
    pub tree_distance: usize,
    pub sigma_image: usize,
    pub distortion: usize,
    pub isometry: usize,
}

impl IdentityReport {
    pub fn violations(&self) -> usize {
        self.composition
            + self.excursion_mass
            + self.heights
            + self.tree_distance
            + self.sigma_image
            + self.distortion
            + self.isometry
    }
}

pub const IDENTITY_TOL: f64 = 1e-9;

fn random_spec<R: Rng + ?Sized>(color: Color, rng: &mut R) -> WeightSpec {
    let spec = match rng.gen_range(0..5) {
        0 => WeightSpec::point_mass(rng.gen_range(0.5..2.0), color),
        1 => WeightSpec::exponential(rng.gen_range(0.5..2.0), color),
        2 => {
            let low = rng.gen_range(0.1..1.0);
            WeightSpec::uniform(low, low + rng.gen_range(0.5..2.0), color)
        }
        3 => {
            let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mut atoms: Vec<(f64, f64)> = raw.iter().map(|p| (rng.gen_range(0.2..3.0), p / total)).collect();
            atoms[2].1 = 1.0 - atoms[0].1 - atoms[1].1;
            WeightSpec::table(atoms, color)
        }
        _ => WeightSpec::power_tail(rng.gen_range(1.2..1.9), 1.0, 1.0, color),
    };
    spec.expect("generated parameters are valid")
}

/// Checks each identity on `instances` random graphs with `n, m ≤ 50` and mixed weight laws.
pub fn identity_suite(instances: usize, seed: u64) -> IdentityReport {
    let reports: Vec<IdentityReport> = (0..instances)
        .into_par_iter()
        .map(|k| {
            let mut rng = replicate_rng(seed, k as u64);
            let n = rng.gen_range(1..=50);
            let m = rng.gen_range(1..=50);
            let (sb, sw) = (random_spec(Color::Black, &mut rng), random_spec(Color::White, &mut rng));
            let x: Vec<f64> = (0..n).map(|_| sb.sample(&mut rng)).collect();
            let y: Vec<f64> = (0..m).map(|_| sw.sample(&mut rng)).collect();
            let z = ((n * m) as f64).sqrt();
            let clocks = ClockSet::sample(&x, &y, z, &mut rng);
            let record = explore(&x, &y, z, &clocks);
            check_instance(&record, &mut rng)
        })
        .collect();
    let mut total = IdentityReport::default();
    for r in reports {
        total.instances += r.instances;
        total.composition += r.composition;
        total.excursion_mass += r.excursion_mass;
        total.heights += r.heights;
        total.tree_distance += r.tree_distance;
        total.sigma_image += r.sigma_image;
        total.distortion += r.distortion;
        total.isometry += r.isometry;
    }
    total
}

fn check_instance<R: Rng + ?Sized>(record: &ExplorationRecord, rng: &mut R) -> IdentityReport {
    let mut rep = IdentityReport { instances: 1, ..Default::default() };
    let n = record.x.len();
    let zp = ZProcess { queue_load: queue_load_path(record), composition: composition_path(record) };
    if !(z_discrepancy(&zp) <= IDENTITY_TOL) {
        rep.composition += 1;
    }
    let z = &zp.queue_load;

    let tree = assemble_graph(record, &[]);
    let comps = components(&tree);
    let (lx, _) = lambda_paths(record);
    let ex = excursions(z, &lx);
    let schedule = Schedule::from_record(record);
    if ex.len() != comps.iter().filter(|c| c.is_nontrivial()).count() {
        rep.excursion_mass += 1;
    }
    for e in &ex {
        let matched = schedule
            .client_at(e.g)
            .and_then(|root| comps.iter().find(|c| c.blacks.contains(&root)))
            .map(|c| {
                (c.y_mass - e.y_mass).abs() <= IDENTITY_TOL * c.y_mass.max(1.0)
                    && (c.x_mass - e.x_mass).abs() <= IDENTITY_TOL * c.x_mass.max(1.0)
            });
        if matched != Some(true) {
            rep.excursion_mass += 1;
        }
    }

    let h_nonstrict = height_process(z, Comparison::NonStrict);
    let heights = vertex_heights(record, &h_nonstrict);
    rep.heights += (0..n).filter(|&i| heights[i] != record.forest.height(Vertex::Black(i))).count();

    let h_strict = height_process(z, Comparison::Strict);
    let queue_forest = black_forest(record);
    let queue_graph = SimpleGraph::from_edges(n, &queue_forest.edges());
    let busy: Vec<_> = schedule.segments.iter().filter(|s| s.end > s.start).collect();
    if !busy.is_empty() {
        for _ in 0..20 {
            let mut pick = || {
                let seg = busy[rng.gen_range(0..busy.len())];
                seg.start + (seg.end - seg.start) * rng.gen_range(0.01..0.99)
            };
            let (s, t) = (pick(), pick());
            let (a, b) = (schedule.client_at(s), schedule.client_at(t));
            let via_height = tree_distance_via_height(&h_strict, z, s, t).ok().flatten();
            let via_bfs = match (a, b) {
                (Some(a), Some(b)) => queue_graph.bfs(a)[b],
                _ => Some(usize::MAX),
            };
            if via_height != via_bfs {
                rep.tree_distance += 1;
            }
        }
    }

    let sigma = sigma_transfer(record);
    rep.sigma_image += (0..n).filter(|&k| !((sigma.service_image(record, k) - record.x[k]).abs() <= IDENTITY_TOL)).count();

    let surplus = sample_surplus_direct(record, rng);
    rep.distortion += distortion_certificate(record, &surplus).iter().filter(|c| !c.holds()).count();
    let g = assemble_graph(record, &surplus);
    rep.isometry += isometry_check(&g, &intersection_graph(&g)).violations;
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_config(n: usize, replicates: usize) -> ExperimentConfig {
        let pair = CriticalPair::new(WeightSpec::point_mass(1.0, Color::Black).unwrap(), WeightSpec::point_mass(1.0, Color::White).unwrap(), 1.0, n).unwrap();
        ExperimentConfig::new(pair, replicates, 42)
    }

    #[test]
    fn deterministic_reports() {
        let cfg = unit_config(300, 20);
        let a = run_discrete(&cfg).unwrap();
        let b = run_discrete(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(report_hash(&a).unwrap(), report_hash(&b).unwrap());
        assert_eq!(report_csv(&a).unwrap(), report_csv(&b).unwrap());
        let other = run_discrete(&ExperimentConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(report_hash(&a).unwrap(), report_hash(&other).unwrap());
    }

    #[test]
    fn subcritical_runs_are_flagged() {
        let pair = CriticalPair::new(WeightSpec::point_mass(1.0, Color::Black).unwrap(), WeightSpec::point_mass(1.0, Color::White).unwrap(), 1.0, 1).unwrap();
        let report = run_discrete(&ExperimentConfig::new(pair, 50, 3)).unwrap();
        assert!(report.empty_replicates > 0);
        assert!(report.replicates.iter().filter(|r| !r.nontrivial).all(|r| r.top.is_empty()));
    }

    #[test]
    fn budget_gives_partial_report() {
        let cfg = ExperimentConfig { vertex_budget: Some(2000), ..unit_config(300, 20) };
        let report = run_discrete(&cfg).unwrap();
        assert!(report.partial);
        assert_eq!(report.replicates.len(), 3);
    }

    #[test]
    fn ranking_examples() {
        let mut report = run_discrete(&unit_config(200, 1)).unwrap();
        let r = ranking_consistency(&report, 1).unwrap();
        assert!(r.agreement == 0.0 || r.agreement == 1.0);
        assert!(ranking_consistency(&report, 3).is_err());
        report.replicates[0].top[0].x_rank = 1;
        assert_eq!(ranking_consistency(&report, 1).unwrap().agreement, 0.0);
    }

    #[test]
    fn ensemble_against_itself() {
        let cfg = ExperimentConfig { top_k: 1, ..unit_config(100, 200) };
        let params = LimitParams::unit(1.0).unwrap();
        let settings = LimitSettings { paths: 200, step: 2e-3, horizon: 4.0, seed: 5 };
        let ens = limit_ensemble(&params, &settings, 1).unwrap();
        // a synthetic report whose rescaled masses are the ensemble itself
        let b_n = cfg.scaling().unwrap().b_n;
        let replicates = ens
            .lengths
            .iter()
            .enumerate()
            .map(|(index, l)| ReplicateRecord {
                index,
                top: vec![ComponentSummary {
                    x_mass: l[0] * b_n,
                    y_mass: l[0] * b_n,
                    surplus: 0,
                    poissonized_surplus: 0,
                    diameter: 0,
                    x_rank: 0,
                    y_rank: 0,
                }],
                nontrivial: true,
            })
            .collect();
        let report = RunReport {
            schema_version: SCHEMA_VERSION,
            config: cfg,
            seeds: vec![],
            replicates,
            partial: false,
            empty_replicates: 0,
        };
        let cmp = compare_with_limit(&report, &ens, None).unwrap();
        assert!(cmp[0].ks_y < cmp[0].sampling_noise);
        assert!(cmp[0].pass);
        let short = LimitEnsemble { lengths: ens.lengths[..10].to_vec(), ..ens };
        assert!(compare_with_limit(&report, &short, None).is_err());
    }

    #[test]
    fn emit_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut empty = run_discrete(&unit_config(50, 1)).unwrap();
        empty.replicates.clear();
        let summary = ReportSummary::new(&empty).unwrap();
        emit(&summary, dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join("components.csv")).unwrap();
        assert_eq!(csv.trim(), CSV_HEADER.join(","));
        let full = ReportSummary::new(&run_discrete(&unit_config(200, 5)).unwrap()).unwrap();
        emit(&full, dir.path()).unwrap();
        assert_eq!(read_summary(&dir.path().join("summary.json")).unwrap(), full);
        assert!(emit(&full, Path::new("/proc/forbidden/dir")).is_err());
    }

    #[test]
    fn identities_hold() {
        let rep = identity_suite(100, 9);
        assert_eq!(rep.instances, 100);
        assert_eq!(rep.violations(), 0, "{rep:?}");
    }

    #[test]
    fn config_json() {
        let cfg = unit_config(100, 3);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        assert!(ExperimentConfig::from_json("{}").is_err());
    }
}
