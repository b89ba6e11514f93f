// SPDX-License-Identifier: Apache-2.0

//! Named verification suites run against a scenario.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use clusterdyn_core::bbgky::{
    bbgky_rhs, cumulant_apply, cumulant_norm_bound_check, grand_canonical_marginals, marginals_from_clusters,
    series_time_derivative, solve_bbgky_series_all, MarginalSequence,
};
use clusterdyn_core::correlations::{
    clusterize, cluster_preserving_permutations, correlations_to_density, density_to_correlations,
    integrate_hierarchy, von_neumann_rhs, CorrelationSequence,
};
use clusterdyn_core::hamiltonian::{evolve_group, EvolutionCache};
use clusterdyn_core::hilbert::{exchange_symmetry_residual, symmetry_residual, trace_norm};
use clusterdyn_core::{ClusterSet, Complex64, ManyBodyOperator, Matrix, OperatorSequence, Permutation};
use clusterdyn_oracles::{direct_density_evolution, normalized_grand_canonical_marginal, grand_canonical_marginal};

use crate::random::{random_density_sequence, random_operator, rng};
use crate::scenario::ScenarioConfig;

/// Step of the Richardson-extrapolated central difference.
pub const FD_STEP: f64 = 1e-4;
/// Minimum convergence order accepted for the RK4 comparison.
pub const MIN_RK4_ORDER: f64 = 3.7;
/// Discrepancies below this are treated as rounding noise when measuring the order.
pub const ORDER_NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckName {
    MobiusRoundtrip,
    HierarchyResidual,
    CumulantZeroTime,
    CumulantFree,
    BbgkyResidual,
    DefinitionConsistency,
    SolutionVsIntegrator,
    NormBound,
    SymmetryPreservation,
}

impl CheckName {
    pub const ALL: [CheckName; 9] = [
        CheckName::MobiusRoundtrip,
        CheckName::HierarchyResidual,
        CheckName::CumulantZeroTime,
        CheckName::CumulantFree,
        CheckName::BbgkyResidual,
        CheckName::DefinitionConsistency,
        CheckName::SolutionVsIntegrator,
        CheckName::NormBound,
        CheckName::SymmetryPreservation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckName::MobiusRoundtrip => "mobius_roundtrip",
            CheckName::HierarchyResidual => "hierarchy_residual",
            CheckName::CumulantZeroTime => "cumulant_zero_time",
            CheckName::CumulantFree => "cumulant_free",
            CheckName::BbgkyResidual => "bbgky_residual",
            CheckName::DefinitionConsistency => "definition_consistency",
            CheckName::SolutionVsIntegrator => "solution_vs_integrator",
            CheckName::NormBound => "norm_bound",
            CheckName::SymmetryPreservation => "symmetry_preservation",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            CheckName::MobiusRoundtrip => 1e-12,
            CheckName::HierarchyResidual => 1e-8,
            CheckName::CumulantZeroTime => 1e-13,
            CheckName::CumulantFree => 1e-12,
            CheckName::BbgkyResidual => 1e-10,
            CheckName::DefinitionConsistency => 1e-11,
            CheckName::SolutionVsIntegrator => 1e-7,
            CheckName::NormBound => 1e-12,
            CheckName::SymmetryPreservation => 1e-12,
        }
    }

    /// How the residual is measured, echoed in reports.
    pub fn residual_kind(self) -> &'static str {
        match self {
            CheckName::MobiusRoundtrip => "max ||roundtrip - input||_1 / (1 + ||input||_1)",
            CheckName::HierarchyResidual => "max ||Richardson d/dt g_n - rhs||_1",
            CheckName::CumulantZeroTime | CheckName::CumulantFree => "max ||A_{1+n}(t) f||_1 / ||f||_1",
            CheckName::BbgkyResidual => "max ||d/dt series - bbgky_rhs||_1",
            CheckName::DefinitionConsistency => "max ||F_s(clusters) - normalized GC marginal||_1",
            CheckName::SolutionVsIntegrator => "max ||series - marginals(RK4)||_1",
            CheckName::NormBound => "max (||A f||_1 / ||f||_1 - sum_P (|P|-1)!)",
            CheckName::SymmetryPreservation => "max symmetry residual / (1 + ||op||_1)",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown check `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub check: CheckName,
    pub inputs: String,
    /// `None` when the check could not be evaluated.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    /// Wall time in seconds; omitted in deterministic mode.
    pub wall_s: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub digest: String,
    pub records: Vec<CheckRecord>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }
}

struct Outcome {
    residual: f64,
    inputs: String,
    detail: String,
    /// Extra pass condition besides `residual <= tolerance`.
    extra_ok: bool,
}

impl Outcome {
    fn new(residual: f64, inputs: String, detail: String) -> Self {
        Outcome {
            residual,
            inputs,
            detail,
            extra_ok: true,
        }
    }
}

type CheckResult = Result<Outcome, String>;

/// Tracks the largest residual together with where it occurred.
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn new() -> Self {
        Worst {
            value: 0.0,
            at: "none".into(),
        }
    }

    fn update(&mut self, value: f64, at: impl FnOnce() -> String) {
        // NaN must surface as a failure.
        if value > self.value || value.is_nan() && !self.value.is_nan() {
            self.value = value;
            self.at = at();
        }
    }
}

fn dist(a: &ManyBodyOperator, b: &ManyBodyOperator) -> f64 {
    trace_norm(&(a - b))
}

fn dist_matrix(a: &Matrix, b: &Matrix) -> f64 {
    let n = (a - b).singular_values();
    n.iter().sum()
}

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

/// Shared read-only inputs of all checks.
pub struct Context<'a> {
    config: &'a ScenarioConfig,
    cache: EvolutionCache,
    density: OperatorSequence,
    correlations: CorrelationSequence,
}

impl<'a> Context<'a> {
    pub fn new(config: &'a ScenarioConfig) -> Result<Self, String> {
        let spec = config.spec().map_err(err)?;
        let cache = EvolutionCache::build(&spec, config.n_max).map_err(err)?;
        let density = config.initial_density().map_err(err)?;
        let correlations = config.initial_correlations().map_err(err)?;
        Ok(Context {
            config,
            cache,
            density,
            correlations,
        })
    }

    fn describe(&self) -> String {
        format!(
            "d={} {} n_max={} hbar={} potentials={:?}",
            self.config.d,
            self.config.stats,
            self.config.n_max,
            self.config.hbar,
            self.config.potentials.iter().map(|p| p.0).collect::<Vec<_>>()
        )
    }

    fn times(&self) -> String {
        format!("{:?}", self.config.times)
    }

    fn run(&self, check: CheckName) -> CheckResult {
        match check {
            CheckName::MobiusRoundtrip => self.mobius_roundtrip(),
            CheckName::HierarchyResidual => self.hierarchy_residual(),
            CheckName::CumulantZeroTime => self.cumulant_vanishing(&self.cache, &[0.0], CheckName::CumulantZeroTime),
            CheckName::CumulantFree => {
                let free = EvolutionCache::build(&self.cache.spec().without_potentials(), self.config.n_max)
                    .map_err(err)?;
                let mut times = self.config.times.clone();
                times.extend([-5.0, 5.0]);
                self.cumulant_vanishing(&free, &times, CheckName::CumulantFree)
            }
            CheckName::BbgkyResidual => self.bbgky_residual(),
            CheckName::DefinitionConsistency => self.definition_consistency(),
            CheckName::SolutionVsIntegrator => self.solution_vs_integrator(),
            CheckName::NormBound => self.norm_bound(),
            CheckName::SymmetryPreservation => self.symmetry_preservation(),
        }
    }

    fn mobius_roundtrip(&self) -> CheckResult {
        let c = self.config;
        let mut worst = Worst::new();
        let mut check = |label: &str, input: &OperatorSequence| -> Result<(), String> {
            let g = density_to_correlations(input).map_err(err)?;
            let back = correlations_to_density(&g).map_err(err)?;
            let g_seq = CorrelationSequence::new(input.components().to_vec()).map_err(err)?;
            let forward = density_to_correlations(&correlations_to_density(&g_seq).map_err(err)?).map_err(err)?;
            for (n, x) in input.components().iter().enumerate() {
                let scale = 1.0 + trace_norm(x);
                let r1 = dist(&back.components()[n], x) / scale;
                worst.update(r1, || format!("{label} n={} D->g->D", n + 1));
                let r2 = dist(&forward.components()[n], x) / scale;
                worst.update(r2, || format!("{label} n={} g->D->g", n + 1));
            }
            Ok(())
        };
        check("initial", &self.density)?;
        for i in 0..c.samples {
            let seed = c.seed.wrapping_add(i as u64);
            let positive = i % 2 == 0;
            check(
                &format!("sample seed={seed}"),
                &random_density_sequence(seed, c.n_max, c.d, c.stats, positive, 1.0),
            )?;
        }
        Ok(Outcome::new(
            worst.value,
            format!("{} samples={} seed={}", self.describe(), c.samples, c.seed),
            format!("worst at {}", worst.at),
        ))
    }

    fn hierarchy_residual(&self) -> CheckResult {
        let spec = self.cache.spec();
        let evolve = |t: f64| -> Result<CorrelationSequence, String> {
            density_to_correlations(&direct_density_evolution(&self.density, t, spec).value).map_err(err)
        };
        let mut worst = Worst::new();
        for &t in &self.config.times {
            let g = evolve(t)?;
            let mut shifted = Vec::new();
            for dt in [FD_STEP, -FD_STEP, FD_STEP / 2.0, -FD_STEP / 2.0] {
                shifted.push(evolve(t + dt)?);
            }
            for n in 1..=self.config.n_max {
                let m = |k: usize| shifted[k].component(n).expect("within truncation").matrix();
                let coarse = (m(0) - m(1)) / Complex64::new(2.0 * FD_STEP, 0.0);
                let fine = (m(2) - m(3)) / Complex64::new(FD_STEP, 0.0);
                let fd = (fine * Complex64::new(4.0, 0.0) - coarse) / Complex64::new(3.0, 0.0);
                let rhs = von_neumann_rhs(&g, n, &self.cache).map_err(err)?;
                worst.update(dist_matrix(&fd, rhs.matrix()), || format!("t={t} n={n}"));
            }
        }
        Ok(Outcome::new(
            worst.value,
            format!("{} times={} h={FD_STEP:e}", self.describe(), self.times()),
            format!("worst at {}", worst.at),
        ))
    }

    fn cumulant_vanishing(&self, cache: &EvolutionCache, times: &[f64], check: CheckName) -> CheckResult {
        let c = self.config;
        let mut worst = Worst::new();
        let mut r = rng(c.seed ^ 0xC0FFEE);
        let mut cases = 0;
        for &s in &c.orders {
            for n in 1..=c.n_max.saturating_sub(s).min(3) {
                let cluster = ClusterSet::cluster_with_satellites(s, n).map_err(err)?;
                for _ in 0..c.samples.max(1) {
                    let f = random_operator(&mut r, s + n, c.d, c.stats);
                    let norm = trace_norm(&f);
                    for &t in times {
                        let a = cumulant_apply(t, &cluster, &f, cache).map_err(err)?;
                        worst.update(trace_norm(&a) / norm, || format!("s={s} n={n} t={t}"));
                        cases += 1;
                    }
                }
            }
        }
        let t_desc = if check == CheckName::CumulantZeroTime {
            "t=0".to_string()
        } else {
            format!("times={times:?} potentials dropped")
        };
        Ok(Outcome::new(
            worst.value,
            format!("{} orders={:?} samples={} {t_desc}", self.describe(), c.orders, c.samples),
            format!("{cases} cases, worst at {}", worst.at),
        ))
    }

    fn bbgky_residual(&self) -> CheckResult {
        let f0 = grand_canonical_marginals(&self.density).map_err(err)?;
        let mut worst = Worst::new();
        for &t in &self.config.times {
            let ft = solve_bbgky_series_all(&f0, t, &self.cache).map_err(err)?;
            for &s in &self.config.orders {
                let lhs = series_time_derivative(&f0, t, s, &self.cache).map_err(err)?;
                let rhs = bbgky_rhs(&ft, s, &self.cache).map_err(err)?;
                worst.update(dist(&lhs, &rhs), || format!("t={t} s={s}"));
            }
        }
        Ok(Outcome::new(
            worst.value,
            format!(
                "{} orders={:?} times={} F0=grand-canonical marginals of D0",
                self.describe(),
                self.config.orders,
                self.times()
            ),
            format!("worst at {}", worst.at),
        ))
    }

    fn definition_consistency(&self) -> CheckResult {
        let mut worst = Worst::new();
        let mut literal = Worst::new();
        for &t in &self.config.times {
            let dt = direct_density_evolution(&self.density, t, self.cache.spec()).value;
            let g = density_to_correlations(&dt).map_err(err)?;
            let f = marginals_from_clusters(&g).map_err(err)?;
            for &s in &self.config.orders {
                let fs = f.component(s).expect("checked order");
                let normalized = normalized_grand_canonical_marginal(&dt, s);
                worst.update(dist(fs, &normalized), || format!("t={t} s={s}"));
                let plain = grand_canonical_marginal(&dt, s);
                literal.update(dist(fs, &plain), || format!("t={t} s={s}"));
            }
        }
        Ok(Outcome::new(
            worst.value,
            format!("{} orders={:?} times={}", self.describe(), self.config.orders, self.times()),
            format!(
                "worst at {}; unnormalized sum sum_n Tr D_(s+n)/n! differs by {:.3e} (at {})",
                worst.at, literal.value, literal.at
            ),
        ))
    }

    fn solution_vs_integrator(&self) -> CheckResult {
        let c = self.config;
        let f0 = marginals_from_clusters(&self.correlations).map_err(err)?;
        let discrepancy = |t: f64, steps: usize, series: &MarginalSequence| -> Result<f64, String> {
            let g = integrate_hierarchy(&self.correlations, t, steps, &self.cache).map_err(err)?;
            let f = marginals_from_clusters(&g).map_err(err)?;
            Ok(series
                .components()
                .iter()
                .zip(f.components())
                .map(|(a, b)| dist(a, b))
                .fold(0.0, f64::max))
        };
        let mut worst = Worst::new();
        let mut orders = Vec::new();
        let mut order_ok = true;
        for &t in &c.times {
            let steps = ((t.abs() * c.steps_per_unit as f64).ceil() as usize).max(1);
            let series = solve_bbgky_series_all(&f0, t, &self.cache).map_err(err)?;
            worst.update(discrepancy(t, steps, &series)?, || format!("t={t}"));
            if t == 0.0 {
                continue;
            }
            let coarse = (steps / 16).max(1);
            let e1 = discrepancy(t, coarse, &series)?;
            let e2 = discrepancy(t, 2 * coarse, &series)?;
            if e2 < ORDER_NOISE_FLOOR {
                orders.push(format!("t={t}: below noise floor ({e1:.2e}, {e2:.2e})"));
            } else {
                let p = (e1 / e2).log2();
                order_ok &= p >= MIN_RK4_ORDER;
                orders.push(format!("t={t}: order {p:.2} from steps {coarse}/{}", 2 * coarse));
            }
        }
        let mut out = Outcome::new(
            worst.value,
            format!(
                "{} times={} steps_per_unit={} F0=marginals of initial correlations",
                self.describe(),
                self.times(),
                c.steps_per_unit
            ),
            format!(
                "worst at {}; {}; min order {MIN_RK4_ORDER}",
                worst.at,
                if orders.is_empty() { "order not measured".to_string() } else { orders.join(", ") }
            ),
        );
        out.extra_ok = order_ok;
        Ok(out)
    }

    fn norm_bound(&self) -> CheckResult {
        let c = self.config;
        let mut r = rng(c.seed ^ 0xB0B);
        let mut worst = Worst {
            value: f64::NEG_INFINITY,
            at: "none".into(),
        };
        let mut max_ratio = 0.0f64;
        let mut cases = 0;
        for &s in &c.orders {
            for n in 0..=c.n_max.saturating_sub(s).min(3) {
                let cluster = ClusterSet::cluster_with_satellites(s, n).map_err(err)?;
                for _ in 0..c.samples {
                    let f = random_operator(&mut r, s + n, c.d, c.stats);
                    for &t in &c.times {
                        let rep = cumulant_norm_bound_check(t, &cluster, &f, &self.cache).map_err(err)?;
                        max_ratio = max_ratio.max(rep.ratio);
                        worst.update(rep.ratio - rep.bound_factor, || {
                            format!("s={s} n={n} t={t} ratio={:.6} bound={}", rep.ratio, rep.bound_factor)
                        });
                        cases += 1;
                    }
                }
            }
        }
        if cases == 0 {
            return Err("no cluster sizes to test".into());
        }
        Ok(Outcome::new(
            worst.value,
            format!("{} orders={:?} samples={} times={}", self.describe(), c.orders, c.samples, self.times()),
            format!("{cases} cases, max ratio {max_ratio:.6}, smallest slack at {}", worst.at),
        ))
    }

    fn symmetry_preservation(&self) -> CheckResult {
        let c = self.config;
        let mut worst = Worst::new();
        let mut full = |label: String, op: &ManyBodyOperator| -> Result<(), String> {
            let res = exchange_symmetry_residual(op).map_err(err)?;
            let r = res.max() / (1.0 + trace_norm(op));
            worst.update(r, || match &res.worst {
                Some(p) => format!("{label}, permutation {p}"),
                None => label,
            });
            Ok(())
        };
        let g = &self.correlations;
        for (n, x) in self.density.components().iter().enumerate() {
            full(format!("initial D_{}", n + 1), x)?;
        }
        for (n, x) in g.components().iter().enumerate() {
            full(format!("density_to_correlations g_{}", n + 1), x)?;
        }
        let back = correlations_to_density(g).map_err(err)?;
        for (n, x) in back.components().iter().enumerate() {
            full(format!("correlations_to_density D_{}", n + 1), x)?;
        }
        for n in 1..=c.n_max {
            full(format!("von_neumann_rhs n={n}"), &von_neumann_rhs(g, n, &self.cache).map_err(err)?)?;
        }
        let f0 = marginals_from_clusters(g).map_err(err)?;
        for (s, x) in f0.components().iter().enumerate() {
            full(format!("marginal F_{}", s + 1), x)?;
        }
        for &t in &c.times {
            for (n, x) in self.density.components().iter().enumerate() {
                full(
                    format!("evolve_group D_{} t={t}", n + 1),
                    &evolve_group(x, t, &self.cache).map_err(err)?,
                )?;
            }
            let ft = solve_bbgky_series_all(&f0, t, &self.cache).map_err(err)?;
            for (s, x) in ft.components().iter().enumerate() {
                full(format!("solve_bbgky_series F_{} t={t}", s + 1), x)?;
            }
        }
        for &s in &c.orders {
            for n in 0..=c.n_max - s {
                let op = clusterize(g, s, n).map_err(err)?.op;
                let res = symmetry_residual(
                    &op,
                    &cluster_preserving_permutations(s, n),
                    &Permutation::all(s + n),
                )
                .map_err(err)?;
                let r = res.max() / (1.0 + trace_norm(&op));
                worst.update(r, || match &res.worst {
                    Some(p) => format!("clusterize s={s} n={n}, permutation {p}"),
                    None => format!("clusterize s={s} n={n}"),
                });
            }
        }
        Ok(Outcome::new(
            worst.value,
            format!("{} times={} orders={:?}", self.describe(), self.times(), c.orders),
            format!(
                "worst at {}; potential exchange asymmetry {:.3e}",
                worst.at,
                self.cache.spec().exchange_asymmetry()
            ),
        ))
    }
}

fn record(config: &ScenarioConfig, check: CheckName, ctx: &Result<Context<'_>, String>) -> CheckRecord {
    let tolerance = config.tolerance(check);
    let start = Instant::now();
    let result = match ctx {
        Ok(ctx) => ctx.run(check),
        Err(e) => Err(format!("setup failed: {e}")),
    };
    let wall_s = (!config.deterministic_reduction).then(|| start.elapsed().as_secs_f64());
    match result {
        Ok(o) => CheckRecord {
            check,
            passed: o.residual <= tolerance && o.extra_ok,
            inputs: o.inputs,
            residual: Some(o.residual),
            tolerance,
            wall_s,
            detail: format!("{}; {}", check.residual_kind(), o.detail),
        },
        Err(e) => CheckRecord {
            check,
            inputs: String::new(),
            residual: None,
            tolerance,
            passed: false,
            wall_s,
            detail: format!("error: {e}"),
        },
    }
}

/// Runs every configured check; a failing or erroring check never stops
/// the suite. Records keep the configured order in both modes.
pub fn run_checks(config: &ScenarioConfig, parallel: bool) -> CheckReport {
    let ctx = if config.checks.is_empty() {
        Err("no checks".to_string())
    } else {
        Context::new(config)
    };
    let records = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = config
                .checks
                .iter()
                .map(|&check| {
                    let ctx = &ctx;
                    scope.spawn(move || record(config, check, ctx))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("check thread panicked"))
                .collect()
        })
    } else {
        config.checks.iter().map(|&check| record(config, check, &ctx)).collect()
    };
    CheckReport {
        digest: config.digest.clone(),
        records,
    }
}
