//! Seeded experiment harness: builds instances, solves every requested
//! delivery mode, verifies the policies that carry weight, and writes
//! JSON/CSV artifacts.
//!
//! Rates in reports are normalised to chunks per chunk-time: one slot
//! carries a subpacket, i.e. `1 / C(L, t)` of a chunk, so a per-slot rate
//! `1/n` becomes `C(L, t) / n`. This rescaling leaves the optimal time
//! shares unchanged.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::delivery::DeliveryMode;
use crate::error::{Error, Result};
use crate::fairness::{
    maximize_fairness_with, utility, FairnessObjective, RegionOracle, SolverDiagnostics, SolverOptions,
};
use crate::oracle::{verify_schedule, Finding, VerifyContext};
use crate::placement::{assign_profiles, PlacementParams, ProfileAssignment, Requests};
use crate::policy::{Instance, Limits, Policy};
use crate::topology::{
    build_hex_grid, place_users, two_helper_fixture, NetworkTopology, TopologyDocument, DEFAULT_R_INTER,
    DEFAULT_R_TRANS,
};

/// Name accepted in place of a topology file for the built-in five-user
/// two-helper instance.
pub const TWO_HELPER_TOPOLOGY: &str = "two-helper";

/// Mixed into the seed for the profile draw so it is independent of the
/// user drop.
const PROFILE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSelection {
    Siso,
    Ir,
    Ccc,
    All,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<DeliveryMode> {
        match self {
            ModeSelection::Siso => vec![DeliveryMode::Siso],
            ModeSelection::Ir => vec![DeliveryMode::Ir],
            ModeSelection::Ccc => vec![DeliveryMode::Ccc],
            ModeSelection::All => DeliveryMode::ALL.to_vec(),
        }
    }
}

impl FromStr for ModeSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "siso" => Ok(ModeSelection::Siso),
            "ir" => Ok(ModeSelection::Ir),
            "ccc" => Ok(ModeSelection::Ccc),
            "all" => Ok(ModeSelection::All),
            other => Err(Error::InvalidConfig {
                field: "mode".into(),
                message: format!("expected siso, ir, ccc or all, got {other:?}"),
            }),
        }
    }
}

/// Everything one run needs. Serialises to the JSON accepted by `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Hexagonal rings around the centre helper; ignored with `topology`.
    #[serde(default = "defaults::rings")]
    pub rings: usize,
    /// Topology document path, or `"two-helper"` for the built-in instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    /// Mean users per helper in the Poisson drop.
    #[serde(default = "defaults::users_per_helper")]
    pub users_per_helper: f64,
    #[serde(default = "defaults::profiles")]
    pub profiles: usize,
    /// Cache size over library size, `M / N`.
    #[serde(default = "defaults::cache_ratio")]
    pub cache_ratio: f64,
    #[serde(default = "defaults::mux_gain")]
    pub mux_gain: usize,
    #[serde(default = "defaults::mode")]
    pub mode: ModeSelection,
    /// 0 sum rate, 1 proportional fairness, `inf` max-min.
    #[serde(default = "defaults::fairness_parameter", with = "extended_real")]
    pub fairness_parameter: f64,
    #[serde(default = "defaults::seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "defaults::tolerance")]
    pub tolerance: f64,
    #[serde(default = "defaults::max_iterations")]
    pub max_iterations: usize,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default = "defaults::r_trans")]
    pub r_trans: f64,
    #[serde(default = "defaults::r_inter")]
    pub r_inter: f64,
    /// Check every weighted policy with the reception oracle.
    #[serde(default = "defaults::verify")]
    pub verify: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

mod defaults {
    use super::ModeSelection;

    pub fn rings() -> usize {
        1
    }
    pub fn users_per_helper() -> f64 {
        5.0
    }
    pub fn profiles() -> usize {
        5
    }
    pub fn cache_ratio() -> f64 {
        0.2
    }
    pub fn mux_gain() -> usize {
        2
    }
    pub fn mode() -> ModeSelection {
        ModeSelection::All
    }
    pub fn fairness_parameter() -> f64 {
        1.0
    }
    pub fn seeds() -> Vec<u64> {
        vec![0]
    }
    pub fn tolerance() -> f64 {
        1e-6
    }
    pub fn max_iterations() -> usize {
        100_000
    }
    pub fn r_trans() -> f64 {
        crate::topology::DEFAULT_R_TRANS
    }
    pub fn r_inter() -> f64 {
        crate::topology::DEFAULT_R_INTER
    }
    pub fn verify() -> bool {
        true
    }
}

/// Finite reals as JSON numbers, infinity as the string `"inf"`.
mod extended_real {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(v),
            Raw::Text(t) => t.parse::<f64>().map_err(serde::de::Error::custom),
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rings: defaults::rings(),
            topology: None,
            users_per_helper: defaults::users_per_helper(),
            profiles: defaults::profiles(),
            cache_ratio: defaults::cache_ratio(),
            mux_gain: defaults::mux_gain(),
            mode: defaults::mode(),
            fairness_parameter: defaults::fairness_parameter(),
            seeds: defaults::seeds(),
            tolerance: defaults::tolerance(),
            max_iterations: defaults::max_iterations(),
            limits: Limits::default(),
            r_trans: DEFAULT_R_TRANS,
            r_inter: DEFAULT_R_INTER,
            verify: true,
            output_dir: None,
        }
    }
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::InvalidConfig { field: field.into(), message: message.into() }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid("config", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Checks every field; the first problem is reported with its field name.
    pub fn validate(&self) -> Result<PlacementParams> {
        if !(self.users_per_helper.is_finite() && self.users_per_helper > 0.0) {
            return Err(invalid("users_per_helper", "must be a finite positive number"));
        }
        if self.mux_gain == 0 {
            return Err(invalid("mux_gain", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "at least one seed is required"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(invalid("tolerance", "must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations", "must be positive"));
        }
        FairnessObjective::new(self.fairness_parameter).map_err(|e| invalid("fairness_parameter", e.to_string()))?;
        if !(self.r_trans > 0.0 && self.r_inter >= self.r_trans && self.r_inter.is_finite()) {
            return Err(invalid("r_inter", "need 0 < r_trans <= r_inter"));
        }
        if self.topology.is_none() && self.rings > 3 {
            return Err(invalid("rings", "at most 3 rings (37 helpers) are supported"));
        }
        let params = PlacementParams::from_ratio(self.profiles, self.cache_ratio).map_err(|e| {
            let field = if self.profiles == 0 || self.profiles > crate::combinatorics::MAX_PROFILES {
                "profiles"
            } else {
                "cache_ratio"
            };
            invalid(field, e.to_string())
        })?;
        Ok(params)
    }

    fn fixed_topology(&self) -> Result<Option<(NetworkTopology, Option<ProfileAssignment>)>> {
        let Some(source) = &self.topology else { return Ok(None) };
        let text = if source == TWO_HELPER_TOPOLOGY {
            two_helper_fixture().to_string()
        } else {
            std::fs::read_to_string(source).map_err(|e| invalid("topology", format!("{source}: {e}")))?
        };
        let doc = TopologyDocument::from_json(&text).map_err(|e| invalid("topology", e.to_string()))?;
        let (topo, assignment) = doc.build().map_err(|e| invalid("topology", e.to_string()))?;
        if let Some(a) = &assignment {
            if a.profile_count() != self.profiles {
                return Err(invalid(
                    "profiles",
                    format!("topology file fixes L = {}, config has {}", a.profile_count(), self.profiles),
                ));
            }
        }
        Ok(Some((topo, assignment)))
    }
}

/// One policy with time share, its rates, and the oracle verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPolicy {
    pub weight: f64,
    pub policy: Policy,
    pub rates: Vec<f64>,
    /// `None` when verification is switched off.
    pub verified: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub findings: Vec<Finding>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeResult {
    pub mode: DeliveryMode,
    pub utility: f64,
    /// `round(|utility|)`.
    pub rounded_utility: f64,
    /// Per-user long-run rate, chunks per chunk-time.
    pub throughput: Vec<f64>,
    pub excluded_users: Vec<usize>,
    pub configurations: usize,
    pub policies: u64,
    pub sampled: bool,
    pub diagnostics: SolverDiagnostics,
    pub weights: Vec<WeightedPolicy>,
}

impl ModeResult {
    pub fn all_verified(&self) -> bool {
        self.weights.iter().all(|w| w.verified != Some(false))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeOutcome {
    pub mode: DeliveryMode,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Solved(ModeResult),
    Failed { kind: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub helpers: usize,
    pub users: usize,
    pub profiles: Vec<usize>,
    pub modes: Vec<ModeOutcome>,
}

impl SeedResult {
    pub fn mode(&self, mode: DeliveryMode) -> Option<&ModeResult> {
        self.modes.iter().find(|m| m.mode == mode).and_then(|m| match &m.outcome {
            Outcome::Solved(r) => Some(r),
            Outcome::Failed { .. } => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub mode: DeliveryMode,
    pub solved_seeds: usize,
    pub failed_seeds: usize,
    pub mean_utility: Option<f64>,
    pub median_utility: Option<f64>,
    pub mean_rounded_utility: Option<f64>,
}

/// Deterministic part of a run; equal configs and seeds give equal payloads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPayload {
    pub config: ExperimentConfig,
    /// `t = L M / N`.
    pub t: usize,
    pub seeds: Vec<SeedResult>,
    pub summary: Vec<ModeSummary>,
}

impl ExperimentPayload {
    pub fn modes(&self) -> Vec<DeliveryMode> {
        self.config.mode.modes()
    }

    /// Utility per seed for `mode`; `None` where that seed failed.
    pub fn utilities(&self, mode: DeliveryMode) -> Vec<Option<f64>> {
        self.seeds.iter().map(|s| s.mode(mode).map(|r| r.utility)).collect()
    }

    /// Every user's throughput under `mode`, seeds in order.
    pub fn user_rates(&self, mode: DeliveryMode) -> Vec<f64> {
        self.seeds.iter().filter_map(|s| s.mode(mode)).flat_map(|r| r.throughput.iter().copied()).collect()
    }

    pub fn all_verified(&self) -> bool {
        self.seeds.iter().all(|s| {
            s.modes.iter().all(|m| match &m.outcome {
                Outcome::Solved(r) => r.all_verified(),
                Outcome::Failed { .. } => true,
            })
        })
    }
}

/// Runs every seed (concurrently) and every requested mode.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentPayload> {
    let params = config.validate()?;
    let fixed = config.fixed_topology()?;
    let modes = config.mode.modes();
    let seeds: Vec<SeedResult> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, &params, fixed.as_ref(), &modes, seed))
        .collect::<Result<_>>()?;
    let summary = modes.iter().map(|&m| summarize(&seeds, m)).collect();
    // where results land is run metadata, not part of the payload
    let config = ExperimentConfig { output_dir: None, ..config.clone() };
    Ok(ExperimentPayload { config, t: params.t, seeds, summary })
}

fn run_seed(
    config: &ExperimentConfig,
    params: &PlacementParams,
    fixed: Option<&(NetworkTopology, Option<ProfileAssignment>)>,
    modes: &[DeliveryMode],
    seed: u64,
) -> Result<SeedResult> {
    let topology = match fixed {
        Some((t, _)) => t.clone(),
        None => {
            let helpers = build_hex_grid(config.rings);
            let users = place_users(&helpers, config.r_trans, config.users_per_helper, seed)?;
            NetworkTopology::from_coordinates(helpers, users, config.r_trans, config.r_inter)?
        }
    };
    let assignment = match fixed.and_then(|(_, a)| a.clone()) {
        Some(a) => a,
        None => assign_profiles(topology.user_count(), params.profiles, seed ^ PROFILE_STREAM)?,
    };
    let modes = modes
        .iter()
        .map(|&mode| {
            let outcome = match solve_mode(config, params, &topology, &assignment, mode) {
                Ok(r) => Outcome::Solved(r),
                Err(e) => Outcome::Failed { kind: e.kind().to_string(), message: e.to_string() },
            };
            ModeOutcome { mode, outcome }
        })
        .collect();
    Ok(SeedResult {
        seed,
        helpers: topology.helper_count(),
        users: topology.user_count(),
        profiles: assignment.profiles().to_vec(),
        modes,
    })
}

fn solve_mode(
    config: &ExperimentConfig,
    params: &PlacementParams,
    topology: &NetworkTopology,
    assignment: &ProfileAssignment,
    mode: DeliveryMode,
) -> Result<ModeResult> {
    let instance = Instance::new(topology, assignment, params, config.mux_gain)?;
    let mut set = instance.configurations(mode, &config.limits)?;
    set.dedup_offers();
    let users = instance.user_count();
    let oracle = RegionOracle { configurations: &set.configurations, users };
    let objective = FairnessObjective::new(config.fairness_parameter)?;
    let options = SolverOptions { tolerance: config.tolerance, max_iterations: config.max_iterations };
    let point = maximize_fairness_with(&oracle, &objective, &options)?;

    let scale = params.subpackets_per_chunk() as f64;
    let throughput: Vec<f64> = point.throughput.iter().map(|r| r * scale).collect();
    let counted = point.counted();
    let value = utility(&throughput, &objective, Some(&counted))?;

    let requests = Requests::distinct(users);
    let ctx = VerifyContext { topology, assignment, params, requests: &requests, mux_gain: config.mux_gain };
    let weights = point
        .weights
        .into_par_iter()
        .map(|wv| {
            let (verified, findings) = if config.verify {
                let rates = instance.policy_rate_vector(&wv.vertex)?;
                let schedule = instance.policy_schedule(&wv.vertex, &requests)?;
                let report = verify_schedule(&schedule, &wv.vertex.pattern, &wv.vertex.nulling, &ctx, &rates);
                (Some(report.passed), report.findings)
            } else {
                (None, Vec::new())
            };
            Ok(WeightedPolicy {
                weight: wv.weight,
                policy: wv.vertex,
                rates: wv.rates.iter().map(|r| r * scale).collect(),
                verified,
                findings,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ModeResult {
        mode,
        utility: value,
        rounded_utility: value.abs().round(),
        throughput,
        excluded_users: point.excluded_users,
        configurations: set.configurations.len(),
        policies: set.policy_count(),
        sampled: set.sampled,
        diagnostics: point.diagnostics,
        weights,
    })
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    Some(if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) })
}

fn summarize(seeds: &[SeedResult], mode: DeliveryMode) -> ModeSummary {
    let solved: Vec<&ModeResult> = seeds.iter().filter_map(|s| s.mode(mode)).collect();
    let utilities: Vec<f64> = solved.iter().map(|r| r.utility).collect();
    let rounded: Vec<f64> = solved.iter().map(|r| r.rounded_utility).collect();
    ModeSummary {
        mode,
        solved_seeds: solved.len(),
        failed_seeds: seeds.len() - solved.len(),
        mean_utility: mean(&utilities),
        median_utility: median(&utilities),
        mean_rounded_utility: mean(&rounded),
    }
}

/// Empirical CDF rows `(value, k/n)`, one per distinct value, with `k` the
/// number of samples at or below it.
pub fn emit_cdf(rates: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = rates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (i, &r) in sorted.iter().enumerate() {
        let y = (i + 1) as f64 / n;
        match rows.last_mut() {
            Some(last) if last.0 == r => last.1 = y,
            _ => rows.push((r, y)),
        }
    }
    rows
}

pub fn cdf_csv(rates: &[f64]) -> String {
    let mut out = String::from("rate,cdf\n");
    for (r, y) in emit_cdf(rates) {
        writeln!(out, "{r},{y}").unwrap();
    }
    out
}

/// `seed,mode,utility,rounded_utility`, plus failed rows with empty values.
pub fn utility_table_csv(payload: &ExperimentPayload) -> String {
    let mut out = String::from("seed,mode,utility,rounded_utility\n");
    for s in &payload.seeds {
        for m in &s.modes {
            match &m.outcome {
                Outcome::Solved(r) => writeln!(out, "{},{},{},{}", s.seed, m.mode.name(), r.utility, r.rounded_utility),
                Outcome::Failed { .. } => writeln!(out, "{},{},,", s.seed, m.mode.name()),
            }
            .unwrap();
        }
    }
    out
}

/// `seed,user,profile,rate` for one mode; one row per user per solved seed.
pub fn user_rates_csv(payload: &ExperimentPayload, mode: DeliveryMode) -> String {
    let mut out = String::from("seed,user,profile,rate\n");
    for s in &payload.seeds {
        if let Some(r) = s.mode(mode) {
            for (k, rate) in r.throughput.iter().enumerate() {
                writeln!(out, "{},{k},{},{rate}", s.seed, s.profiles[k]).unwrap();
            }
        }
    }
    out
}

/// Run-specific header of `results.json`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Full `results.json` text; only `metadata` varies between identical runs.
pub fn results_json(payload: &ExperimentPayload, metadata: &RunMetadata) -> String {
    let doc = serde_json::json!({
        "metadata": {
            "generator": concat!("ccwlan ", env!("CARGO_PKG_VERSION")),
            "timestamp": metadata.timestamp,
            "output_dir": metadata.output_dir,
        },
        "payload": payload,
    });
    serde_json::to_string_pretty(&doc).expect("payload serialises") + "\n"
}

/// Writes `results.json`, `utility_table.csv` and, per mode,
/// `cdf_<mode>_L<L>.csv` and `rates_<mode>_L<L>.csv`. Returns the paths.
pub fn write_outputs(payload: &ExperimentPayload, dir: &Path, timestamp: &str) -> Result<Vec<PathBuf>> {
    let io = |e: std::io::Error| invalid("output_dir", format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let metadata = RunMetadata { timestamp: timestamp.into(), output_dir: Some(dir.to_path_buf()) };
    let mut files = vec![
        ("results.json".to_string(), results_json(payload, &metadata)),
        ("utility_table.csv".to_string(), utility_table_csv(payload)),
    ];
    let l = payload.config.profiles;
    for mode in payload.modes() {
        let rates = payload.user_rates(mode);
        if !rates.is_empty() {
            files.push((format!("cdf_{}_L{l}.csv", mode.name()), cdf_csv(&rates)));
        }
        files.push((format!("rates_{}_L{l}.csv", mode.name()), user_rates_csv(payload, mode)));
    }
    let mut paths = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_helper_config() -> ExperimentConfig {
        ExperimentConfig {
            topology: Some(TWO_HELPER_TOPOLOGY.into()),
            profiles: 3,
            cache_ratio: 1.0 / 3.0,
            mux_gain: 2,
            mode: ModeSelection::All,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(emit_cdf(&[1.0 / 3.0, 1.0 / 3.0, 0.5]), vec![(1.0 / 3.0, 2.0 / 3.0), (0.5, 1.0)]);
        assert_eq!(emit_cdf(&[0.25]), vec![(0.25, 1.0)]);
        assert!(emit_cdf(&[]).is_empty());
        assert_eq!(cdf_csv(&[0.5]), "rate,cdf\n0.5,1\n");
    }

    #[test]
    fn validation_names_the_field() {
        let field = |c: ExperimentConfig| match c.validate() {
            Err(Error::InvalidConfig { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(field(ExperimentConfig { mux_gain: 0, ..Default::default() }), "mux_gain");
        assert_eq!(field(ExperimentConfig { cache_ratio: 0.3, ..Default::default() }), "cache_ratio");
        assert_eq!(field(ExperimentConfig { profiles: 0, ..Default::default() }), "profiles");
        assert_eq!(field(ExperimentConfig { seeds: vec![], ..Default::default() }), "seeds");
        assert_eq!(field(ExperimentConfig { fairness_parameter: -1.0, ..Default::default() }), "fairness_parameter");
        assert_eq!(field(ExperimentConfig { users_per_helper: f64::NAN, ..Default::default() }), "users_per_helper");
        assert!(matches!("both".parse::<ModeSelection>(), Err(Error::InvalidConfig { .. })));
        assert!(matches!(ExperimentConfig::from_json("{\"ring\": 1}"), Err(Error::InvalidConfig { .. })));
    }

    #[test]
    fn config_json_round_trip() {
        let c = ExperimentConfig { fairness_parameter: f64::INFINITY, seeds: vec![1, 2], ..two_helper_config() };
        let text = c.to_json();
        assert!(text.contains("\"inf\""));
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
        let partial = ExperimentConfig::from_json("{\"profiles\": 10, \"mode\": \"ccc\"}").unwrap();
        assert_eq!(partial.profiles, 10);
        assert_eq!(partial.mode, ModeSelection::Ccc);
        assert_eq!(partial.rings, 1);
    }

    #[test]
    fn two_helper_mode_ordering() {
        let payload = run_experiment(&two_helper_config()).unwrap();
        let seed = &payload.seeds[0];
        let f = |m| seed.mode(m).unwrap().utility;
        assert!(f(DeliveryMode::Ccc) >= f(DeliveryMode::Siso) - 1e-9);
        assert!(f(DeliveryMode::Ir) >= f(DeliveryMode::Siso) - 1e-9);
        assert!(payload.all_verified());
        for m in DeliveryMode::ALL {
            let r = seed.mode(m).unwrap();
            let total: f64 = r.weights.iter().map(|w| w.weight).sum();
            assert!((total - 1.0).abs() < 1e-9);
            assert!(r.weights.iter().all(|w| w.verified == Some(true)));
        }
    }

    #[test]
    fn uncoded_baseline_runs() {
        let c = ExperimentConfig {
            rings: 0,
            profiles: 1,
            users_per_helper: 3.0,
            mode: ModeSelection::Siso,
            seeds: vec![1, 2, 3],
            ..Default::default()
        };
        let payload = run_experiment(&c).unwrap();
        assert_eq!(payload.t, 0);
        assert!(payload.all_verified());
        for s in &payload.seeds {
            if s.users > 0 {
                let r = s.mode(DeliveryMode::Siso).unwrap();
                // one helper, unicast: equal shares of one chunk per chunk-time
                let share = 1.0 / s.users as f64;
                assert!(r.throughput.iter().all(|x| (x - share).abs() < 1e-4), "{:?}", r.throughput);
            }
        }
    }

    #[test]
    fn empty_drop_is_recorded_not_fatal() {
        let c = ExperimentConfig { rings: 0, users_per_helper: 1e-9, seeds: vec![5], ..Default::default() };
        let payload = run_experiment(&c).unwrap();
        assert_eq!(payload.seeds[0].users, 0);
        assert!(payload.seeds[0].modes.iter().all(|m| matches!(m.outcome, Outcome::Failed { .. })));
        assert_eq!(payload.summary[0].failed_seeds, 1);
        assert_eq!(payload.summary[0].mean_utility, None);
    }

    #[test]
    fn outputs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let payload = run_experiment(&ExperimentConfig { seeds: vec![3, 4], ..two_helper_config() }).unwrap();
        let paths = write_outputs(&payload, dir.path(), "t0").unwrap();
        let names: Vec<String> = paths.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert!(names.contains(&"results.json".to_string()));
        assert!(names.contains(&"cdf_ccc_L3.csv".to_string()));
        let rates = std::fs::read_to_string(dir.path().join("rates_siso_L3.csv")).unwrap();
        assert_eq!(rates.lines().count(), 1 + 2 * 5);
        let table = std::fs::read_to_string(dir.path().join("utility_table.csv")).unwrap();
        assert_eq!(table.lines().count(), 1 + 2 * 3);
    }
}
