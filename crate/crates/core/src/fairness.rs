//! Alpha-fair utility maximisation over the convex hull of rate vectors.
//!
//! The hull is accessed only through a linear maximisation oracle
//! ([`VertexOracle`]), so the vertex set never has to be listed when it is a
//! product of per-helper choices. Finite parameters use conditional gradient
//! with away steps over the active vertex set and an exact line search; the
//! outer duality gap bounds the distance to the optimum. Max-min fairness is
//! solved separately by column generation on a small LP.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{Configuration, Policy, RateVector};

/// Member of the alpha-fair family: 0 is sum rate, 1 proportional
/// fairness, `f64::INFINITY` max-min.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessObjective {
    pub parameter: f64,
}

impl FairnessObjective {
    pub fn new(parameter: f64) -> Result<Self> {
        if parameter.is_nan() || parameter < 0.0 {
            return Err(Error::InvalidParameters(format!("fairness parameter must be >= 0, got {parameter}")));
        }
        Ok(FairnessObjective { parameter })
    }

    pub fn proportional() -> Self {
        FairnessObjective { parameter: 1.0 }
    }

    pub fn sum_rate() -> Self {
        FairnessObjective { parameter: 0.0 }
    }

    pub fn max_min() -> Self {
        FairnessObjective { parameter: f64::INFINITY }
    }

    pub fn is_max_min(&self) -> bool {
        self.parameter.is_infinite()
    }

    fn needs_positive(&self) -> bool {
        self.parameter >= 1.0
    }

    fn term(&self, r: f64) -> f64 {
        let a = self.parameter;
        if a == 1.0 {
            r.ln()
        } else if a == 0.0 {
            r
        } else {
            r.powf(1.0 - a) / (1.0 - a)
        }
    }

    fn derivative(&self, r: f64) -> f64 {
        let a = self.parameter;
        if a == 0.0 {
            1.0
        } else if a == 1.0 {
            1.0 / r
        } else {
            r.powf(-a)
        }
    }
}

/// Utility of `throughput` over the users flagged in `counted` (all users
/// when `None`).
pub fn utility(throughput: &[f64], objective: &FairnessObjective, counted: Option<&[bool]>) -> Result<f64> {
    let included = |k: usize| counted.is_none_or(|c| c[k]);
    let values = throughput.iter().enumerate().filter(|(k, _)| included(*k)).map(|(_, &r)| r);
    if objective.is_max_min() {
        return Ok(values.fold(f64::INFINITY, f64::min));
    }
    let mut total = 0.0;
    for (k, &r) in throughput.iter().enumerate() {
        if !included(k) {
            continue;
        }
        if objective.needs_positive() && r <= 0.0 {
            return Err(Error::UndefinedUtility(format!(
                "user {k} has zero rate under fairness parameter {}",
                objective.parameter
            )));
        }
        total += objective.term(r);
    }
    Ok(total)
}

/// Linear maximisation over a finite vertex set.
pub trait VertexOracle: Sync {
    type Vertex: Clone + Send;

    fn dimension(&self) -> usize;

    /// Users with a positive rate in at least one vertex.
    fn servable(&self) -> Vec<bool>;

    /// A vertex maximising `weights . v`, with its coordinates.
    fn best_vertex(&self, weights: &[f64]) -> Option<(Self::Vertex, Vec<f64>)>;
}

/// A plain list of rate vectors; vertices are indices into it.
pub struct ExplicitVectors<'a>(pub &'a [RateVector]);

impl VertexOracle for ExplicitVectors<'_> {
    type Vertex = usize;

    fn dimension(&self) -> usize {
        self.0.first().map_or(0, |v| v.0.len())
    }

    fn servable(&self) -> Vec<bool> {
        let mut s = vec![false; self.dimension()];
        for v in self.0 {
            for (k, &r) in v.0.iter().enumerate() {
                s[k] |= r > 0.0;
            }
        }
        s
    }

    fn best_vertex(&self, weights: &[f64]) -> Option<(usize, Vec<f64>)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in self.0.iter().enumerate() {
            let score = dot(weights, &v.0);
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((i, score));
            }
        }
        best.map(|(i, _)| (i, self.0[i].0.clone()))
    }
}

/// Rate region spanned by a set of configurations.
pub struct RegionOracle<'a> {
    pub configurations: &'a [Configuration],
    pub users: usize,
}

impl VertexOracle for RegionOracle<'_> {
    type Vertex = Policy;

    fn dimension(&self) -> usize {
        self.users
    }

    fn servable(&self) -> Vec<bool> {
        let mut s = vec![false; self.users];
        for c in self.configurations {
            for k in c.servable() {
                s[k] = true;
            }
        }
        s
    }

    fn best_vertex(&self, weights: &[f64]) -> Option<(Policy, Vec<f64>)> {
        let (idx, _, picks) = self
            .configurations
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let (score, picks) = c.best_response(weights);
                (i, score, picks)
            })
            .reduce_with(|a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a })?;
        let config = &self.configurations[idx];
        let mut rates = vec![0.0; self.users];
        for (offer, pick) in config.offers.iter().zip(&picks) {
            for &k in pick {
                rates[k] = offer.rate();
            }
        }
        Some((config.policy(picks), rates))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once the duality gap is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tolerance: 1e-6, max_iterations: 100_000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub final_gap: f64,
    pub cap_hit: bool,
    /// Utility after every step.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightedVertex<V> {
    pub vertex: V,
    pub rates: Vec<f64>,
    pub weight: f64,
}

/// Optimal time-sharing: vertex weights, the resulting throughput, and
/// its utility over the counted users.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThroughputPoint<V> {
    pub weights: Vec<WeightedVertex<V>>,
    pub throughput: Vec<f64>,
    pub utility: f64,
    /// Users that are never served; left out of the objective.
    pub excluded_users: Vec<usize>,
    pub diagnostics: SolverDiagnostics,
}

impl<V> ThroughputPoint<V> {
    pub fn counted(&self) -> Vec<bool> {
        let mut c = vec![true; self.throughput.len()];
        for &k in &self.excluded_users {
            c[k] = false;
        }
        c
    }
}

/// Maximises the objective over the hull of explicit rate vectors.
pub fn maximize_fairness(
    vectors: &[RateVector],
    objective: &FairnessObjective,
    options: &SolverOptions,
) -> Result<ThroughputPoint<usize>> {
    if vectors.is_empty() {
        return Err(Error::InfeasibleObjective("no rate vectors".into()));
    }
    let k = vectors[0].0.len();
    if vectors.iter().any(|v| v.0.len() != k) {
        return Err(Error::InvalidParameters("rate vectors differ in length".into()));
    }
    maximize_fairness_with(&ExplicitVectors(vectors), objective, options)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct ActiveSet<V> {
    vertices: Vec<(V, Vec<f64>)>,
    weights: Vec<f64>,
}

impl<V: Clone> ActiveSet<V> {
    fn position(&self, rates: &[f64]) -> Option<usize> {
        self.vertices.iter().position(|(_, r)| r.as_slice() == rates)
    }

    fn point(&self, dim: usize) -> Vec<f64> {
        let mut r = vec![0.0; dim];
        for ((_, v), &w) in self.vertices.iter().zip(&self.weights) {
            for (x, y) in r.iter_mut().zip(v) {
                *x += w * y;
            }
        }
        r
    }

    fn prune(&mut self) {
        let mut i = 0;
        while i < self.weights.len() {
            if self.weights[i] <= 0.0 {
                self.weights.swap_remove(i);
                self.vertices.swap_remove(i);
            } else {
                i += 1;
            }
        }
        let total: f64 = self.weights.iter().sum();
        for w in &mut self.weights {
            *w /= total;
        }
    }

    fn into_point(
        self,
        dim: usize,
        objective: &FairnessObjective,
        counted: &[bool],
        diagnostics: SolverDiagnostics,
    ) -> Result<ThroughputPoint<V>> {
        let throughput = self.point(dim);
        let utility = utility(&throughput, objective, Some(counted))?;
        let weights = self
            .vertices
            .into_iter()
            .zip(self.weights)
            .filter(|(_, w)| *w > 0.0)
            .map(|((vertex, rates), weight)| WeightedVertex { vertex, rates, weight })
            .collect();
        Ok(ThroughputPoint {
            weights,
            throughput,
            utility,
            excluded_users: counted.iter().enumerate().filter(|(_, &c)| !c).map(|(k, _)| k).collect(),
            diagnostics,
        })
    }
}

/// Vertices that together give every counted user a positive rate.
fn covering_vertices<O: VertexOracle>(oracle: &O, counted: &[bool]) -> Vec<(O::Vertex, Vec<f64>)> {
    let dim = counted.len();
    let mut out: Vec<(O::Vertex, Vec<f64>)> = Vec::new();
    let mut covered = vec![false; dim];
    for k in 0..dim {
        if !counted[k] || covered[k] {
            continue;
        }
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        if let Some((v, rates)) = oracle.best_vertex(&e) {
            for (c, &r) in covered.iter_mut().zip(&rates) {
                *c |= r > 0.0;
            }
            if !out.iter().any(|(_, r)| *r == rates) {
                out.push((v, rates));
            }
        }
    }
    out
}

/// Maximises the objective over the hull of the oracle's vertices.
pub fn maximize_fairness_with<O: VertexOracle>(
    oracle: &O,
    objective: &FairnessObjective,
    options: &SolverOptions,
) -> Result<ThroughputPoint<O::Vertex>> {
    let dim = oracle.dimension();
    let counted = oracle.servable();
    if !counted.iter().any(|&c| c) {
        return Err(Error::InfeasibleObjective("every rate vector is zero".into()));
    }
    if objective.is_max_min() {
        return max_min(oracle, &counted, options);
    }

    let init = covering_vertices(oracle, &counted);
    let n = init.len() as f64;
    let mut active = ActiveSet { weights: vec![1.0 / n; init.len()], vertices: init };
    let mut diag = SolverDiagnostics::default();
    let mut r = active.point(dim);
    diag.trace.push(utility(&r, objective, Some(&counted))?);

    let gradient = |r: &[f64]| -> Vec<f64> {
        r.iter().zip(&counted).map(|(&x, &c)| if c { objective.derivative(x) } else { 0.0 }).collect()
    };

    'outer: loop {
        let g = gradient(&r);
        let (s, s_rates) = oracle.best_vertex(&g).expect("nonempty vertex set");
        let gap = dot(&g, &s_rates) - dot(&g, &r);
        diag.final_gap = gap.max(0.0);
        if gap <= options.tolerance {
            break;
        }
        if active.position(&s_rates).is_none() {
            active.vertices.push((s, s_rates));
            active.weights.push(0.0);
        }

        // corrective away-step iterations restricted to the active set
        loop {
            if diag.iterations >= options.max_iterations {
                diag.cap_hit = true;
                break 'outer;
            }
            let g = gradient(&r);
            let gr = dot(&g, &r);
            let scores: Vec<f64> = active.vertices.iter().map(|(_, v)| dot(&g, v)).collect();
            let fw = (0..scores.len()).max_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(b.cmp(&a))).unwrap();
            let away = (0..scores.len())
                .filter(|&i| active.weights[i] > 0.0)
                .min_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)))
                .unwrap();
            let fw_gap = scores[fw] - gr;
            let away_gap = gr - scores[away];
            if fw_gap <= options.tolerance * 0.25 {
                break;
            }
            let toward = fw_gap >= away_gap || active.weights[away] >= 1.0;
            let (direction, max_step) = if toward {
                (active.vertices[fw].1.iter().zip(&r).map(|(s, x)| s - x).collect::<Vec<_>>(), 1.0)
            } else {
                let w = active.weights[away];
                (r.iter().zip(&active.vertices[away].1).map(|(x, a)| x - a).collect(), w / (1.0 - w))
            };
            let step = line_search(objective, &counted, &r, &direction, max_step);
            diag.iterations += 1;
            if step <= 0.0 {
                break;
            }
            if toward {
                for w in &mut active.weights {
                    *w *= 1.0 - step;
                }
                active.weights[fw] += step;
            } else {
                for w in &mut active.weights {
                    *w *= 1.0 + step;
                }
                active.weights[away] -= step;
                if step >= max_step {
                    active.weights[away] = 0.0;
                }
            }
            active.prune();
            let next = active.point(dim);
            let u = utility(&next, objective, Some(&counted))?;
            let prev = *diag.trace.last().unwrap();
            r = next;
            diag.trace.push(u.max(prev));
        }
    }
    active.into_point(dim, objective, &counted, diag)
}

/// Maximiser of the concave `phi(s) = f(r + s d)` on `[0, max_step]`,
/// returned from the increasing side so `phi(step) >= phi(0)`.
fn line_search(objective: &FairnessObjective, counted: &[bool], r: &[f64], d: &[f64], max_step: f64) -> f64 {
    let slope = |s: f64| -> f64 {
        let mut total = 0.0;
        for k in 0..r.len() {
            if !counted[k] || d[k] == 0.0 {
                continue;
            }
            let x = r[k] + s * d[k];
            if x <= 0.0 && objective.parameter > 0.0 {
                return f64::NEG_INFINITY;
            }
            total += d[k] * objective.derivative(x);
        }
        total
    };
    if slope(0.0) <= 0.0 {
        return 0.0;
    }
    if slope(max_step) >= 0.0 {
        return max_step;
    }
    let (mut lo, mut hi) = (0.0, max_step);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn max_min<O: VertexOracle>(
    oracle: &O,
    counted: &[bool],
    options: &SolverOptions,
) -> Result<ThroughputPoint<O::Vertex>> {
    let dim = counted.len();
    let users: Vec<usize> = (0..dim).filter(|&k| counted[k]).collect();
    let mut vertices = covering_vertices(oracle, counted);
    let mut diag = SolverDiagnostics::default();
    loop {
        let (theta, z) = max_min_primal(&vertices, &users)?;
        let prices = max_min_dual(&vertices, &users, dim)?;
        diag.trace.push(z);
        diag.iterations += 1;
        let (s, s_rates) = oracle.best_vertex(&prices).expect("nonempty vertex set");
        let bound = dot(&prices, &s_rates);
        diag.final_gap = (bound - z).max(0.0);
        let known = vertices.iter().any(|(_, r)| *r == s_rates);
        if diag.final_gap <= options.tolerance || known || diag.iterations >= options.max_iterations {
            diag.cap_hit = diag.iterations >= options.max_iterations && diag.final_gap > options.tolerance;
            let active = ActiveSet { vertices, weights: theta };
            return active.into_point(dim, &FairnessObjective::max_min(), counted, diag);
        }
        vertices.push((s, s_rates));
    }
}

/// `max z` s.t. `sum_j theta_j v_jk >= z` for counted users, theta on the simplex.
fn max_min_primal<V>(vertices: &[(V, Vec<f64>)], users: &[usize]) -> Result<(Vec<f64>, f64)> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let z = lp.add_var(1.0, (0.0, f64::INFINITY));
    let theta: Vec<_> = vertices.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for &k in users {
        let mut row: Vec<_> = theta.iter().zip(vertices).map(|(&t, (_, v))| (t, v[k])).collect();
        row.push((z, -1.0));
        lp.add_constraint(&row, ComparisonOp::Ge, 0.0);
    }
    let ones: Vec<_> = theta.iter().map(|&t| (t, 1.0)).collect();
    lp.add_constraint(&ones, ComparisonOp::Eq, 1.0);
    let sol = lp.solve().map_err(|e| Error::InfeasibleObjective(format!("max-min LP: {e}")))?;
    let weights: Vec<f64> = theta.iter().map(|&t| sol[t].max(0.0)).collect();
    Ok((weights, sol[z]))
}

/// Dual prices: `min w` s.t. `sum_k y_k v_jk <= w` for every vertex, y on the simplex.
fn max_min_dual<V>(vertices: &[(V, Vec<f64>)], users: &[usize], dim: usize) -> Result<Vec<f64>> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let w = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    let y: Vec<_> = users.iter().map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for (_, v) in vertices {
        let mut row: Vec<_> = y.iter().zip(users).map(|(&yk, &k)| (yk, v[k])).collect();
        row.push((w, -1.0));
        lp.add_constraint(&row, ComparisonOp::Le, 0.0);
    }
    let ones: Vec<_> = y.iter().map(|&yk| (yk, 1.0)).collect();
    lp.add_constraint(&ones, ComparisonOp::Eq, 1.0);
    let sol = lp.solve().map_err(|e| Error::InfeasibleObjective(format!("max-min dual LP: {e}")))?;
    let mut prices = vec![0.0; dim];
    for (&yk, &k) in y.iter().zip(users) {
        prices[k] = sol[yk].max(0.0);
    }
    Ok(prices)
}

/// Exhaustive search over a weight grid on the simplex (at most four
/// vectors). Used to cross-check [`maximize_fairness`].
pub fn brute_force_fairness(
    vectors: &[RateVector],
    objective: &FairnessObjective,
    grid_step: f64,
) -> Result<ThroughputPoint<usize>> {
    if vectors.is_empty() {
        return Err(Error::InfeasibleObjective("no rate vectors".into()));
    }
    if vectors.len() > 4 {
        return Err(Error::OracleScaleExceeded(format!("{} vectors, grid search supports at most 4", vectors.len())));
    }
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(Error::InvalidParameters(format!("grid step must lie in (0, 1], got {grid_step}")));
    }
    let oracle = ExplicitVectors(vectors);
    let counted = oracle.servable();
    if !counted.iter().any(|&c| c) {
        return Err(Error::InfeasibleObjective("every rate vector is zero".into()));
    }
    let dim = oracle.dimension();
    let units = (1.0 / grid_step).round() as usize;
    let m = vectors.len();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut parts = vec![0usize; m];
    let mut r = vec![0.0; dim];

    // enumerate compositions of `units` into `m` nonnegative parts
    fn visit(idx: usize, remaining: usize, parts: &mut Vec<usize>, ctx: &mut dyn FnMut(&[usize])) {
        if idx + 1 == parts.len() {
            parts[idx] = remaining;
            ctx(parts);
            return;
        }
        for take in 0..=remaining {
            parts[idx] = take;
            visit(idx + 1, remaining - take, parts, ctx);
        }
    }
    let mut evaluate = |parts: &[usize]| {
        for x in r.iter_mut() {
            *x = 0.0;
        }
        for (p, v) in parts.iter().zip(vectors) {
            if *p == 0 {
                continue;
            }
            let w = *p as f64 / units as f64;
            for (x, y) in r.iter_mut().zip(&v.0) {
                *x += w * y;
            }
        }
        if let Ok(u) = utility(&r, objective, Some(&counted)) {
            if u.is_finite() && best.as_ref().is_none_or(|(b, _)| u > *b) {
                best = Some((u, parts.to_vec()));
            }
        }
    };
    visit(0, units, &mut parts, &mut evaluate);
    let (_, parts) = best.ok_or_else(|| Error::InfeasibleObjective("no grid point has finite utility".into()))?;
    let active = ActiveSet {
        vertices: vectors.iter().enumerate().map(|(i, v)| (i, v.0.clone())).collect(),
        weights: parts.iter().map(|&p| p as f64 / units as f64).collect(),
    };
    active.into_point(dim, objective, &counted, SolverDiagnostics::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: &[f64]) -> RateVector {
        RateVector(v.to_vec())
    }

    fn pf() -> FairnessObjective {
        FairnessObjective::proportional()
    }

    #[test]
    fn utility_values() {
        let third = 1.0 / 3.0;
        let u = utility(&[third, third], &pf(), None).unwrap();
        assert!((u + 2.0 * 3f64.ln()).abs() < 1e-12);
        assert!((utility(&[third; 3], &FairnessObjective::sum_rate(), None).unwrap() - 1.0).abs() < 1e-12);
        let two = FairnessObjective::new(2.0).unwrap();
        assert!((utility(&[0.5, 0.25], &two, None).unwrap() + 6.0).abs() < 1e-12);
        assert_eq!(utility(&[0.5, 0.25], &FairnessObjective::max_min(), None).unwrap(), 0.25);
        assert!(matches!(utility(&[0.0, 1.0], &pf(), None), Err(Error::UndefinedUtility(_))));
        assert!(utility(&[0.0, 1.0], &pf(), Some(&[false, true])).is_ok());
        assert!(FairnessObjective::new(-1.0).is_err());
    }

    #[test]
    fn symmetric_pair_splits_evenly() {
        let p = maximize_fairness(&[rv(&[1.0, 0.0]), rv(&[0.0, 1.0])], &pf(), &SolverOptions::default()).unwrap();
        assert!((p.throughput[0] - 0.5).abs() < 1e-6);
        assert!((p.throughput[1] - 0.5).abs() < 1e-6);
        assert!((p.utility + 2.0 * 2f64.ln()).abs() < 1e-6);
        for w in &p.weights {
            assert!((w.weight - 0.5).abs() < 1e-3);
        }
    }

    #[test]
    fn single_vector_is_its_own_optimum() {
        let p = maximize_fairness(&[rv(&[0.25, 0.5])], &pf(), &SolverOptions::default()).unwrap();
        assert_eq!(p.weights.len(), 1);
        assert_eq!(p.weights[0].vertex, 0);
        assert_eq!(p.throughput, vec![0.25, 0.5]);
    }

    #[test]
    fn two_vector_grid_oracle() {
        let third = 1.0 / 3.0;
        let vs = [rv(&[third, third, 0.0]), rv(&[0.0, third, third])];
        let p = maximize_fairness(&vs, &pf(), &SolverOptions::default()).unwrap();
        // 1-D grid over theta at 1e-3
        let best = (0..=1000)
            .map(|i| i as f64 / 1000.0)
            .filter(|&th| th > 0.0 && th < 1.0)
            .map(|th| (th * third).ln() + third.ln() + ((1.0 - th) * third).ln())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((p.utility - best).abs() < 1e-4, "{} vs {}", p.utility, best);
    }

    #[test]
    fn all_zero_vectors_are_infeasible() {
        assert!(matches!(
            maximize_fairness(&[rv(&[0.0, 0.0])], &pf(), &SolverOptions::default()),
            Err(Error::InfeasibleObjective(_))
        ));
        assert!(maximize_fairness(&[], &pf(), &SolverOptions::default()).is_err());
    }

    #[test]
    fn unservable_users_are_excluded() {
        let p =
            maximize_fairness(&[rv(&[1.0, 0.0, 0.0]), rv(&[0.0, 1.0, 0.0])], &pf(), &SolverOptions::default()).unwrap();
        assert_eq!(p.excluded_users, vec![2]);
        assert!((p.utility + 2.0 * 2f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn sum_rate_picks_best_vertex() {
        let vs = [rv(&[1.0, 0.0]), rv(&[0.6, 0.6]), rv(&[0.0, 1.0])];
        let p = maximize_fairness(&vs, &FairnessObjective::sum_rate(), &SolverOptions::default()).unwrap();
        assert!((p.utility - 1.2).abs() < 1e-9);
    }

    #[test]
    fn max_min_balances() {
        let vs = [rv(&[1.0, 0.0, 0.5]), rv(&[0.0, 1.0, 0.5])];
        let p = maximize_fairness(&vs, &FairnessObjective::max_min(), &SolverOptions::default()).unwrap();
        assert!((p.utility - 0.5).abs() < 1e-9);
        let vs = [rv(&[1.0, 0.0]), rv(&[0.0, 0.5])];
        let p = maximize_fairness(&vs, &FairnessObjective::max_min(), &SolverOptions::default()).unwrap();
        assert!((p.utility - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn brute_force_limits() {
        let vs = vec![rv(&[1.0]); 5];
        assert!(matches!(brute_force_fairness(&vs, &pf(), 0.1), Err(Error::OracleScaleExceeded(_))));
        let p = brute_force_fairness(&[rv(&[1.0, 0.0]), rv(&[0.0, 1.0])], &pf(), 1e-3).unwrap();
        assert!((p.utility + 2.0 * 2f64.ln()).abs() < 1e-5);
        let p = brute_force_fairness(&[rv(&[0.3, 0.2])], &pf(), 1e-3).unwrap();
        assert_eq!(p.throughput, vec![0.3, 0.2]);
    }
}
