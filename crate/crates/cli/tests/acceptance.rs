// SPDX-License-Identifier: Apache-2.0

//! Acceptance criteria C1–C10. Each row prints one PASS/FAIL line with its
//! residual, pinned tolerance and runtime; the test fails if any row fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use clusterdyn::checks::{run_checks, CheckName, CheckRecord};
use clusterdyn::format::operator_to_string;
use clusterdyn::random::{random_state, rng};
use clusterdyn::scenario::load_scenario;
use clusterdyn_core::{Complex64, Statistics};

const QUANTUM: [Statistics; 2] = [Statistics::Bose, Statistics::Fermi];

struct Row {
    id: &'static str,
    label: String,
    record: CheckRecord,
}

struct Criterion {
    id: &'static str,
    limit: Duration,
    rows: Vec<Row>,
    elapsed: Duration,
}

struct Workspace {
    dir: tempfile::TempDir,
    count: usize,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
            count: 0,
        }
    }

    /// Writes a scenario with a seeded Hermitian one-body term and
    /// exchange-symmetric potentials of the given orders.
    fn scenario(&mut self, stats: Statistics, n_max: usize, orders: &[usize], seed: u64, run: &str) -> PathBuf {
        self.scenario_d(2, stats, n_max, orders, seed, run)
    }

    fn scenario_d(&mut self, d: usize, stats: Statistics, n_max: usize, orders: &[usize], seed: u64, run: &str) -> PathBuf {
        self.count += 1;
        let mut r = rng(seed);
        let h1 = random_state(&mut r, 1, d, Statistics::Boltzmann, false);
        let h1_path = self.dir.path().join(format!("h1_{}.txt", self.count));
        std::fs::write(&h1_path, operator_to_string(&h1)).unwrap();
        let mut text = format!(
            "[system]\nd = {d}\nstatistics = {}\nn_max = {n_max}\n\n[one_body]\nfile = {}\n\n",
            stats.name(),
            h1_path.file_name().unwrap().to_str().unwrap()
        );
        for &k in orders {
            let phi = random_state(&mut r, k, d, Statistics::Boltzmann, false).scaled(Complex64::new(0.6, 0.0));
            let name = format!("phi{k}_{}.txt", self.count);
            std::fs::write(self.dir.path().join(&name), operator_to_string(&phi)).unwrap();
            text.push_str(&format!("[potential {k}]\nfile = {name}\n\n"));
        }
        text.push_str(&format!("[initial]\nkind = random\nseed = {}\npositive = true\n\n{run}", seed + 1));
        let path = self.dir.path().join(format!("scenario_{}.ini", self.count));
        std::fs::write(&path, text).unwrap();
        path
    }
}

fn run_single(path: &Path, check: CheckName) -> CheckRecord {
    let config = load_scenario(path).unwrap();
    assert_eq!(config.checks, vec![check]);
    run_checks(&config, false).records.remove(0)
}

fn criterion(id: &'static str, limit_s: u64, body: impl FnOnce(&mut Vec<Row>)) -> Criterion {
    let start = Instant::now();
    let mut rows = Vec::new();
    body(&mut rows);
    Criterion {
        id,
        limit: Duration::from_secs(limit_s),
        rows,
        elapsed: start.elapsed(),
    }
}

fn row(rows: &mut Vec<Row>, id: &'static str, label: String, record: CheckRecord) {
    rows.push(Row { id, label, record });
}

fn run_block(check: CheckName, tol: f64, extra: &str) -> String {
    format!("[run]\nchecks = {}\ndeterministic_reduction = true\n{extra}\n[tolerances]\n{} = {tol:e}\n", check, check)
}

fn c1(ws: &mut Workspace) -> Criterion {
    criterion("C1", 5, |rows| {
        for stats in Statistics::ALL {
            let p = ws.scenario(stats, 3, &[2], 100, &run_block(CheckName::MobiusRoundtrip, 1e-12, "samples = 50\nseed = 1000\n"));
            row(rows, "C1", format!("mobius roundtrip {stats}, 50 samples"), run_single(&p, CheckName::MobiusRoundtrip));
        }
    })
}

fn c2(ws: &mut Workspace) -> Criterion {
    criterion("C2", 10, |rows| {
        for stats in Statistics::ALL {
            let p = ws.scenario(stats, 3, &[2], 200, &run_block(CheckName::HierarchyResidual, 1e-8, "times = 0, 0.3, 1.0\n"));
            row(rows, "C2", format!("hierarchy residual {stats}, n <= 3"), run_single(&p, CheckName::HierarchyResidual));
        }
    })
}

fn c3(ws: &mut Workspace) -> Criterion {
    criterion("C3", 2, |rows| {
        for stats in Statistics::ALL {
            let p = ws.scenario(stats, 5, &[2], 300, &run_block(CheckName::CumulantZeroTime, 1e-13, "orders = 1, 2\nsamples = 2\n"));
            row(rows, "C3", format!("cumulant at t=0 {stats}, s <= 2, n <= 3"), run_single(&p, CheckName::CumulantZeroTime));
        }
    })
}

fn c4(ws: &mut Workspace) -> Criterion {
    criterion("C4", 2, |rows| {
        for stats in Statistics::ALL {
            let p = ws.scenario(
                stats,
                4,
                &[2],
                400,
                &run_block(CheckName::CumulantFree, 1e-12, "orders = 1, 2\ntimes = -2.5, 0.7, 3.1\nsamples = 2\n"),
            );
            row(rows, "C4", format!("free cumulant {stats}, |t| <= 5"), run_single(&p, CheckName::CumulantFree));
        }
    })
}

fn c5(ws: &mut Workspace) -> Criterion {
    criterion("C5", 30, |rows| {
        for stats in QUANTUM {
            for orders in [&[2][..], &[2, 3][..]] {
                let p = ws.scenario(stats, 4, orders, 500, &run_block(CheckName::BbgkyResidual, 1e-10, "orders = 1, 2\ntimes = 0.1, 0.7\n"));
                row(rows, "C5", format!("bbgky residual {stats}, potentials {orders:?}"), run_single(&p, CheckName::BbgkyResidual));
            }
        }
    })
}

fn c6(ws: &mut Workspace) -> Criterion {
    criterion("C6", 20, |rows| {
        for stats in Statistics::ALL {
            for n_max in [2, 4] {
                let p = ws.scenario(
                    stats,
                    n_max,
                    &[2],
                    600,
                    &run_block(CheckName::DefinitionConsistency, 1e-11, "orders = 1, 2\ntimes = -2, 0, 0.8, 2\n"),
                );
                row(rows, "C6", format!("definition consistency {stats}, n_max={n_max}"), run_single(&p, CheckName::DefinitionConsistency));
            }
        }
    })
}

fn c7(ws: &mut Workspace) -> Criterion {
    criterion("C7", 60, |rows| {
        // With d = 2 the antisymmetric three-particle space is empty, so the
        // d = 3 rows are the informative Fermi cases.
        for stats in Statistics::ALL {
            for (d, n_max) in [(2, 2), (2, 3), (3, 3)] {
                let p = ws.scenario_d(
                    d,
                    stats,
                    n_max,
                    &[2],
                    700,
                    &run_block(CheckName::SolutionVsIntegrator, 1e-7, "times = 0.5\nsteps_per_unit = 2000\n"),
                );
                row(rows, "C7", format!("series vs RK4 {stats}, d={d} n_max={n_max}"), run_single(&p, CheckName::SolutionVsIntegrator));
            }
        }
    })
}

fn c8(ws: &mut Workspace) -> Criterion {
    criterion("C8", 5, |rows| {
        for stats in Statistics::ALL {
            let p = ws.scenario(stats, 4, &[2], 800, &run_block(CheckName::NormBound, 1e-12, "orders = 1\nsamples = 20\ntimes = 0.9\n"));
            row(rows, "C8", format!("cumulant norm bound {stats}, n <= 3, 20 f"), run_single(&p, CheckName::NormBound));
        }
    })
}

fn c9(ws: &mut Workspace) -> Criterion {
    criterion("C9", 5, |rows| {
        for stats in QUANTUM {
            let p = ws.scenario(stats, 3, &[2, 3], 900, &run_block(CheckName::SymmetryPreservation, 1e-12, "orders = 1, 2\ntimes = 0.4\n"));
            row(rows, "C9", format!("symmetry preservation {stats}"), run_single(&p, CheckName::SymmetryPreservation));
        }
    })
}

fn c10(ws: &mut Workspace) -> (Criterion, bool) {
    let p = ws.scenario(Statistics::Fermi, 3, &[2], 1000, "[run]\ndeterministic_reduction = true\nseed = 4\nsamples = 3\n");
    let start = Instant::now();
    let run = |name: &str, parallel: bool| -> Vec<u8> {
        let out = ws.dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_clusterdyn"));
        cmd.arg("check").arg(&p).args(["--format", "jsonl", "--out"]).arg(&out);
        if parallel {
            cmd.arg("--parallel");
        }
        cmd.status().unwrap();
        std::fs::read(out).unwrap()
    };
    let a = run("a.jsonl", false);
    let b = run("b.jsonl", false);
    let c = run("c.jsonl", true);
    let same = !a.is_empty() && a == b && a == c;
    (
        Criterion {
            id: "C10",
            limit: Duration::from_secs(60),
            rows: Vec::new(),
            elapsed: start.elapsed(),
        },
        same,
    )
}

#[test]
fn acceptance() {
    let mut ws = Workspace::new();
    let criteria = vec![c1(&mut ws), c2(&mut ws), c3(&mut ws), c4(&mut ws), c5(&mut ws), c6(&mut ws), c7(&mut ws), c8(&mut ws), c9(&mut ws)];
    let mut failures = Vec::new();
    for c in &criteria {
        let in_time = c.elapsed <= c.limit;
        for r in &c.rows {
            let rec = &r.record;
            let ok = rec.passed && in_time;
            let residual = rec.residual.map_or("error".into(), |x| format!("{x:.3e}"));
            println!(
                "[{}] {:<48} residual {:>10} tol {:.0e}  {}",
                r.id,
                r.label,
                residual,
                rec.tolerance,
                if ok { "PASS" } else { "FAIL" }
            );
            if !ok {
                println!("      {}", rec.detail);
                failures.push(format!("{} {}", r.id, r.label));
            }
        }
        println!(
            "[{}] runtime {:.2} s (limit {} s)  {}",
            c.id,
            c.elapsed.as_secs_f64(),
            c.limit.as_secs(),
            if in_time { "PASS" } else { "FAIL" }
        );
        if !in_time {
            failures.push(format!("{} runtime", c.id));
        }
    }
    let (c, same) = c10(&mut ws);
    println!("[C10] byte-identical jsonl over 3 runs (2 sequential, 1 parallel)  {}", if same { "PASS" } else { "FAIL" });
    println!("[C10] runtime {:.2} s", c.elapsed.as_secs_f64());
    if !same {
        failures.push("C10 determinism".into());
    }
    assert!(failures.is_empty(), "failing acceptance rows: {failures:#?}");
}
