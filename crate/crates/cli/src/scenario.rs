// SPDX-License-Identifier: Apache-2.0

//! Scenario files: sectioned `key = value` text with inline matrix rows.
//!
//! ```text
//! [system]
//! d = 2
//! statistics = bose          # bose | fermi | boltzmann
//! n_max = 3
//! hbar = 1.0
//!
//! [one_body]                 # inline rows, `file = path` or `laplacian = scale`
//! 1 0.5
//! 0.5 -1
//!
//! [potential 2]              # d^k × d^k rows or `file = path`
//! ...
//!
//! [initial]
//! kind = random              # chaos | density | random
//! seed = 7
//! positive = true
//! scale = 1.0
//!
//! [run]
//! times = 0, 0.3, 1.0
//! steps_per_unit = 2000
//! checks = mobius_roundtrip, bbgky_residual
//! deterministic_reduction = true
//!
//! [tolerances]
//! bbgky_residual = 1e-10
//! ```
//!
//! Relative file paths resolve against the scenario's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clusterdyn_core::correlations::{correlations_to_density, density_to_correlations, CorrelationSequence};
use clusterdyn_core::hamiltonian::{periodic_laplacian, InteractionSpec, DEFAULT_MAX_SIDE};
use clusterdyn_core::hilbert::hermiticity_deviation;
use clusterdyn_core::{Error as CoreError, ManyBodyOperator, Matrix, OperatorSequence, Statistics};
use sha2::{Digest, Sha256};

use crate::checks::CheckName;
use crate::format::{parse_operator, parse_row, parse_sequence, read_file, Lines};
use crate::random::{random_density_sequence, random_state, rng};
use crate::{CliError, Result};

/// Largest accepted truncation order.
pub const MAX_N_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// Uncorrelated data: `g_1` given, all higher correlations zero.
    Chaos { g1: ManyBodyOperator },
    /// An explicit density sequence.
    Density { density: OperatorSequence },
    /// Seeded random states per particle count.
    Random { seed: u64, positive: bool, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub d: usize,
    pub stats: Statistics,
    pub n_max: usize,
    pub hbar: f64,
    pub max_side: usize,
    pub one_body: Matrix,
    pub potentials: Vec<(usize, Matrix)>,
    pub initial: InitialData,
    pub times: Vec<f64>,
    pub steps_per_unit: usize,
    pub checks: Vec<CheckName>,
    pub tolerances: BTreeMap<CheckName, f64>,
    pub deterministic_reduction: bool,
    /// Base seed for the random samples drawn inside suites.
    pub seed: u64,
    /// Number of random samples per statistical check.
    pub samples: usize,
    /// Marginal orders `s` exercised by the marginal checks.
    pub orders: Vec<usize>,
    /// SHA-256 of the scenario text, lowercase hex.
    pub digest: String,
}

impl ScenarioConfig {
    pub fn spec(&self) -> std::result::Result<InteractionSpec, CoreError> {
        let mut spec = InteractionSpec::new(self.d, self.hbar, self.one_body.clone())?.with_max_side(self.max_side);
        for (k, phi) in &self.potentials {
            spec = spec.with_potential(*k, phi.clone())?;
        }
        Ok(spec)
    }

    pub fn initial_density(&self) -> std::result::Result<OperatorSequence, CoreError> {
        match &self.initial {
            InitialData::Chaos { g1 } => correlations_to_density(&CorrelationSequence::chaos(g1, self.n_max)?),
            InitialData::Density { density } => Ok(density.clone()),
            InitialData::Random { seed, positive, scale } => Ok(random_density_sequence(
                *seed, self.n_max, self.d, self.stats, *positive, *scale,
            )),
        }
    }

    pub fn initial_correlations(&self) -> std::result::Result<CorrelationSequence, CoreError> {
        match &self.initial {
            InitialData::Chaos { g1 } => CorrelationSequence::chaos(g1, self.n_max),
            _ => density_to_correlations(&self.initial_density()?),
        }
    }

    pub fn tolerance(&self, check: CheckName) -> f64 {
        self.tolerances.get(&check).copied().unwrap_or(check.default_tolerance())
    }
}

#[derive(Debug, Default)]
struct Section {
    header_line: usize,
    keys: BTreeMap<String, (usize, String)>,
    rows: Vec<(usize, String)>,
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = read_file(path)?;
    parse_scenario(path, &text)
}

pub fn parse_scenario(path: &Path, text: &str) -> Result<ScenarioConfig> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut lines = Lines::new(path, text);
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    while let Some((line, t)) = lines.next_content() {
        let t = t.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        if let Some(name) = t.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| lines.error(line, "unterminated section header"))?;
            let name = name.split_whitespace().collect::<Vec<_>>().join(" ");
            if sections.contains_key(&name) {
                return Err(lines.error(line, format!("duplicate section [{name}]")));
            }
            sections.insert(
                name.clone(),
                Section {
                    header_line: line,
                    ..Section::default()
                },
            );
            current = Some(name);
            continue;
        }
        let name = current
            .as_ref()
            .ok_or_else(|| lines.error(line, "content before the first section"))?;
        let section = sections.get_mut(name).expect("inserted on header");
        if let Some((k, v)) = t.split_once('=') {
            let key = k.trim().to_string();
            if section.keys.insert(key.clone(), (line, v.trim().to_string())).is_some() {
                return Err(lines.error(line, format!("duplicate key `{key}`")));
            }
        } else {
            section.rows.push((line, t.to_string()));
        }
    }

    let mut parser = Parser {
        lines: &lines,
        base,
        sections,
    };
    let config = parser.build(text)?;
    if let Some((name, s)) = parser.sections.iter().next() {
        return Err(lines.error(s.header_line, format!("unknown section [{name}]")));
    }
    Ok(config)
}

struct Parser<'a> {
    lines: &'a Lines<'a>,
    base: PathBuf,
    sections: BTreeMap<String, Section>,
}

impl Parser<'_> {
    fn take(&mut self, name: &str) -> Option<Section> {
        self.sections.remove(name)
    }

    fn value<T: std::str::FromStr>(&self, s: &mut Section, key: &str) -> Result<Option<T>> {
        match s.keys.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| self.lines.error(line, format!("invalid value `{v}` for `{key}`"))),
        }
    }

    fn required<T: std::str::FromStr>(&self, s: &mut Section, section: &str, key: &str) -> Result<T> {
        let line = s.header_line;
        self.value(s, key)?
            .ok_or_else(|| self.lines.error(line, format!("[{section}] requires `{key}`")))
    }

    fn list<T: std::str::FromStr>(&self, s: &mut Section, key: &str) -> Result<Option<Vec<T>>> {
        match s.keys.remove(key) {
            None => Ok(None),
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse()
                        .map_err(|_| self.lines.error(line, format!("invalid entry `{x}` in `{key}`")))
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    fn finish(&self, s: Section, name: &str) -> Result<()> {
        if let Some((key, (line, _))) = s.keys.into_iter().next() {
            return Err(self.lines.error(line, format!("unknown key `{key}` in [{name}]")));
        }
        Ok(())
    }

    fn resolve(&self, file: &str) -> PathBuf {
        let p = Path::new(file);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    /// Matrix from inline rows or `file = path`.
    fn matrix(&self, s: &mut Section, name: &str, side: usize) -> Result<Matrix> {
        if let Some((line, file)) = s.keys.remove("file") {
            if !s.rows.is_empty() {
                return Err(self.lines.error(line, format!("[{name}] has both `file` and inline rows")));
            }
            let path = self.resolve(&file);
            let op = parse_operator(&path, &read_file(&path)?)?;
            if op.side() != side {
                return Err(self.lines.error(line, format!("{} holds a {}×{} matrix, expected {side}×{side}", path.display(), op.side(), op.side())));
            }
            return Ok(op.into_matrix());
        }
        if s.rows.len() != side {
            return Err(self.lines.error(
                s.rows.first().map_or(s.header_line, |r| r.0),
                format!("[{name}] needs {side} rows, found {}", s.rows.len()),
            ));
        }
        let mut entries = Vec::with_capacity(side * side);
        for (line, row) in std::mem::take(&mut s.rows) {
            let r = parse_row(self.lines, line, &row)?;
            if r.len() != side {
                return Err(self.lines.error(line, format!("expected {side} entries, found {}", r.len())));
            }
            entries.extend(r);
        }
        Ok(Matrix::from_row_slice(side, side, &entries))
    }

    fn hermitian(&self, m: &Matrix, name: &str, line: usize) -> Result<()> {
        let dev = hermiticity_deviation(m);
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if dev > clusterdyn_core::hamiltonian::HERMITIAN_TOLERANCE * scale {
            return Err(CliError::Invalid(format!(
                "{name} (line {line}) is not Hermitian: max |h - h^dagger| = {dev:e}"
            )));
        }
        Ok(())
    }

    fn build(&mut self, text: &str) -> Result<ScenarioConfig> {
        let mut sys = self
            .take("system")
            .ok_or_else(|| self.lines.error(1, "missing [system] section"))?;
        let d: usize = self.required(&mut sys, "system", "d")?;
        let stats: Statistics = self.required(&mut sys, "system", "statistics")?;
        let n_max: usize = self.required(&mut sys, "system", "n_max")?;
        let hbar: f64 = self.value(&mut sys, "hbar")?.unwrap_or(1.0);
        let max_side: usize = self.value(&mut sys, "max_side")?.unwrap_or(DEFAULT_MAX_SIDE);
        let sys_line = sys.header_line;
        self.finish(sys, "system")?;
        if d < 2 {
            return Err(self.lines.error(sys_line, "d must be at least 2"));
        }
        if !(1..=MAX_N_MAX).contains(&n_max) {
            return Err(self.lines.error(sys_line, format!("n_max must lie in 1..={MAX_N_MAX}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(self.lines.error(sys_line, "hbar must be positive"));
        }
        match d.checked_pow(n_max as u32) {
            Some(side) if side <= max_side => {}
            _ => {
                return Err(CliError::Core(CoreError::ResourceCap {
                    what: "Hamiltonian matrix side",
                    requested: d.saturating_pow(n_max as u32),
                    cap: max_side,
                }))
            }
        }

        let mut ob = self
            .take("one_body")
            .ok_or_else(|| self.lines.error(1, "missing [one_body] section"))?;
        let ob_line = ob.header_line;
        let one_body = match self.value::<f64>(&mut ob, "laplacian")? {
            Some(scale) => periodic_laplacian(d, scale),
            None => self.matrix(&mut ob, "one_body", d)?,
        };
        self.finish(ob, "one_body")?;
        self.hermitian(&one_body, "one_body", ob_line)?;

        let pot_names: Vec<String> = self
            .sections
            .keys()
            .filter(|k| k.starts_with("potential"))
            .cloned()
            .collect();
        let mut potentials = Vec::new();
        for name in pot_names {
            let mut s = self.take(&name).expect("listed");
            let k: usize = name
                .strip_prefix("potential")
                .map(str::trim)
                .and_then(|k| k.parse().ok())
                .filter(|&k| k >= 2)
                .ok_or_else(|| self.lines.error(s.header_line, "potential sections are named [potential k] with k >= 2"))?;
            let side = d
                .checked_pow(k as u32)
                .filter(|&side| side <= max_side)
                .ok_or_else(|| self.lines.error(s.header_line, "potential exceeds the matrix-size cap"))?;
            let m = self.matrix(&mut s, &name, side)?;
            self.hermitian(&m, &name, s.header_line)?;
            self.finish(s, &name)?;
            potentials.push((k, m));
        }
        potentials.sort_by_key(|p| p.0);

        let mut init = self
            .take("initial")
            .ok_or_else(|| self.lines.error(1, "missing [initial] section"))?;
        let kind: String = self.required(&mut init, "initial", "kind")?;
        let init_line = init.header_line;
        let initial = match kind.as_str() {
            "chaos" => {
                let g1 = if let Some(seed) = self.value::<u64>(&mut init, "seed")? {
                    let scale: f64 = self.value(&mut init, "scale")?.unwrap_or(1.0);
                    random_state(&mut rng(seed), 1, d, stats, true).scaled(clusterdyn_core::Complex64::new(scale, 0.0))
                } else {
                    let mut g = self
                        .take("g1")
                        .ok_or_else(|| self.lines.error(init_line, "chaos data needs a [g1] section or a seed"))?;
                    let m = self.matrix(&mut g, "g1", d)?;
                    self.hermitian(&m, "g1", g.header_line)?;
                    self.finish(g, "g1")?;
                    ManyBodyOperator::new(1, d, stats, m)?
                };
                InitialData::Chaos { g1 }
            }
            "density" => {
                let file: String = self.required(&mut init, "initial", "file")?;
                let path = self.resolve(&file);
                let density = parse_sequence(&path, &read_file(&path)?)?;
                if density.d() != d || density.stats() != stats || density.n_max() != n_max {
                    return Err(CliError::Invalid(format!(
                        "{} does not match d = {d}, statistics = {stats}, n_max = {n_max}",
                        path.display()
                    )));
                }
                InitialData::Density { density }
            }
            "random" => InitialData::Random {
                seed: self.required(&mut init, "initial", "seed")?,
                positive: self.value(&mut init, "positive")?.unwrap_or(true),
                scale: self.value(&mut init, "scale")?.unwrap_or(1.0),
            },
            other => return Err(self.lines.error(init_line, format!("unknown initial kind `{other}`"))),
        };
        self.finish(init, "initial")?;

        let mut run = self.take("run").unwrap_or_default();
        let run_line = run.header_line;
        let times: Vec<f64> = self.list(&mut run, "times")?.unwrap_or_else(|| vec![0.5]);
        if times.iter().any(|t| !t.is_finite()) || times.is_empty() {
            return Err(self.lines.error(run_line, "times must be a nonempty list of finite numbers"));
        }
        let steps_per_unit: usize = self.value(&mut run, "steps_per_unit")?.unwrap_or(1000);
        if steps_per_unit == 0 {
            return Err(self.lines.error(run_line, "steps_per_unit must be positive"));
        }
        let checks: Vec<CheckName> = match run.keys.remove("checks") {
            None => CheckName::ALL.to_vec(),
            Some((line, v)) => v
                .split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|x| {
                    x.parse().map_err(|_| {
                        self.lines.error(
                            line,
                            format!(
                                "unknown check `{x}`; known checks: {}",
                                CheckName::ALL.iter().map(|c| c.name()).collect::<Vec<_>>().join(", ")
                            ),
                        )
                    })
                })
                .collect::<Result<_>>()?,
        };
        let deterministic_reduction = self.value(&mut run, "deterministic_reduction")?.unwrap_or(true);
        let seed = self.value(&mut run, "seed")?.unwrap_or(0);
        let samples = self.value(&mut run, "samples")?.unwrap_or(10);
        let orders: Vec<usize> = self
            .list(&mut run, "orders")?
            .unwrap_or_else(|| (1..=n_max.min(2)).collect());
        if orders.iter().any(|&s| s == 0 || s > n_max) {
            return Err(self.lines.error(run_line, "orders must lie in 1..=n_max"));
        }
        self.finish(run, "run")?;

        let mut tolerances = BTreeMap::new();
        if let Some(mut tol) = self.take("tolerances") {
            for (key, (line, v)) in std::mem::take(&mut tol.keys) {
                let check: CheckName = key
                    .parse()
                    .map_err(|_| self.lines.error(line, format!("unknown check `{key}` in [tolerances]")))?;
                let value: f64 = v
                    .parse()
                    .ok()
                    .filter(|x: &f64| x.is_finite())
                    .ok_or_else(|| self.lines.error(line, format!("invalid tolerance `{v}`")))?;
                tolerances.insert(check, value);
            }
        }

        let digest = Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();

        Ok(ScenarioConfig {
            d,
            stats,
            n_max,
            hbar,
            max_side,
            one_body,
            potentials,
            initial,
            times,
            steps_per_unit,
            checks,
            tolerances,
            deterministic_reduction,
            seed,
            samples,
            orders,
            digest,
        })
    }
}
