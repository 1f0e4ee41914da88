//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::path::{Path, PathBuf};
use std::time::Instant;

use mlgame_cli::bench;
use mlgame_cli::format::{parse, TensorFile};
use mlgame_cli::{run_args, EXIT_OK};
use mlgame_core::bridge::{certify, nash_to_tcp, nash_to_tcp_with_values, tcp_to_nash, values_from_tcp, Tolerances};
use mlgame_core::driver::{solve_game, DriverOptions};
use mlgame_core::game::{random_game, MixedProfile, MultilinearGame};
use mlgame_core::linalg::Matrix;
use mlgame_core::solver::{default_start, eval_h, jacobian_h, solve, SolveReport, SolverConfig};
use mlgame_core::tcp::{TcpInstance, DEFAULT_BIG_TENSOR_BUDGET};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Check = (u8, &'static str, fn() -> Outcome);

fn games_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("games")
}

fn load(name: &str) -> MultilinearGame<f64> {
    mlgame_cli::format::read_game(&games_dir().join(name)).unwrap().1
}

fn cli_json(args: &[&str]) -> (i32, Value, f64) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["mlgame"];
    full.extend_from_slice(args);
    let start = Instant::now();
    let code = run_args(full, &mut out, &mut err);
    let secs = start.elapsed().as_secs_f64();
    let v = serde_json::from_slice(&out).unwrap_or(Value::Null);
    (code, v, secs)
}

fn floats(v: &Value) -> Vec<f64> {
    match v {
        Value::Array(items) => items.iter().flat_map(floats).collect(),
        Value::Number(n) => vec![n.as_f64().unwrap()],
        _ => Vec::new(),
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let path = games_dir().join("battle_of_sexes.json").display().to_string();
    let (code, v, secs) = cli_json(&["solve", &path, "--json"]);
    ensure(code == EXIT_OK, || format!("exit code {code}"))?;
    let y = floats(&v["y"]);
    let y_star = [3.0, 2.0, 2.0, 3.0];
    let tcp = TcpInstance::new(load("battle_of_sexes.json"));
    let res = tcp.residual(&y).map_err(|e| e.to_string())?;
    let printed_res = tcp.residual(&y_star).map_err(|e| e.to_string())?;
    let dy = max_diff(&y, &y_star);
    ensure(dy <= 1e-4 || (res <= 1e-6 && printed_res <= 1e-12), || format!("y = {y:?}"))?;
    let dx = max_diff(&floats(&v["profile"]), &[0.6, 0.4, 0.4, 0.6]);
    ensure(dx <= 1e-6, || format!("profile error {dx:e}"))?;
    let iters = v["iterations"].as_u64().unwrap_or(u64::MAX);
    ensure(iters <= 20, || format!("{iters} iterations"))?;
    ensure(secs < 1.0, || format!("{secs:.3} s"))?;
    Ok(format!(
        "|y - y*| = {dy:.1e}, |x - x*| = {dx:.1e}, residual(y*) = {printed_res:.1e}, {iters} iterations, {secs:.4} s"
    ))
}

fn criterion_2() -> Outcome {
    let g = load("three_player_2x3x2.json");
    let x = MixedProfile::pure(&[2, 3, 2], &[0, 0, 0]).map_err(|e| e.to_string())?;
    let y_printed = [0.6235, 0.0, 3.8396, 0.0, 0.0, 4.3070, 0.0];
    let printed = certify(&g, &x, &y_printed, Tolerances::uniform(5e-4)).map_err(|e| e.to_string())?;
    ensure(printed.certified, || {
        format!("printed pair: residual {:.2e}, gap {:.2e}", printed.tcp_residual, printed.max_gap)
    })?;
    let path = games_dir().join("three_player_2x3x2.json").display().to_string();
    let (code, v, secs) = cli_json(&["solve", &path, "--json"]);
    ensure(code == EXIT_OK && v["certified"] == true, || format!("exit code {code}"))?;
    let res = v["tcp_residual"].as_f64().unwrap_or(f64::INFINITY);
    let gap = floats(&v["gaps"]).into_iter().fold(0.0, f64::max);
    ensure(res <= 1e-6 && gap <= 1e-6, || format!("residual {res:e}, gap {gap:e}"))?;
    ensure(secs < 1.0, || format!("{secs:.3} s"))?;
    Ok(format!(
        "printed pair residual {:.1e} / gap {:.1e} (tol 5e-4); solve residual {res:.1e}, gap {gap:.1e}, {} iterations, {secs:.4} s",
        printed.tcp_residual, printed.max_gap, v["iterations"]
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let rows = bench::run(&bench::default_grid(), 10, &DriverOptions::default());
    let secs = start.elapsed().as_secs_f64();
    let mut problems = Vec::new();
    let mut max_iter = 0;
    let mut max_h: f64 = 0.0;
    for row in &rows {
        let record = row.csv_record();
        println!("    {}", record.join(","));
        if row.solved() * 10 < row.cells.len() * 8 {
            problems.push(format!("{} solved {}/{}", record[0], row.solved(), row.cells.len()));
        }
        for c in row.cells.iter().filter(|c| c.certified) {
            max_iter = max_iter.max(c.iterations);
            max_h = max_h.max(c.h_norm);
        }
    }
    ensure(problems.is_empty(), || problems.join("; "))?;
    ensure(max_h <= 1e-6, || format!("final ||H|| {max_h:e}"))?;
    ensure(max_iter <= 120, || format!("MaxI {max_iter}"))?;
    ensure(secs < 60.0, || format!("{secs:.1} s"))?;
    let solved: usize = rows.iter().map(bench::Row::solved).sum();
    let min_row = rows.iter().map(bench::Row::solved).min().unwrap_or(0);
    Ok(format!(
        "{solved}/180 certified (worst row {min_row}/10), MaxI {max_iter}, max final ||H|| {max_h:.1e}, {secs:.2} s"
    ))
}

fn criterion_4() -> Outcome {
    let shapes: [&[usize]; 6] = [&[2, 3], &[3, 3], &[2, 3, 2], &[3, 2, 3], &[2, 2, 2, 2], &[2, 3, 2, 2]];
    let mut opts = DriverOptions::default();
    opts.solver.residual_tol = Some(1e-12);
    let mut cases = Vec::new();
    let mut seed = 0u64;
    while cases.len() < 50 && seed < 200 {
        let dims = shapes[seed as usize % shapes.len()];
        let g = random_game::<f64>(dims, 7000 + seed).map_err(|e| e.to_string())?;
        seed += 1;
        let sol = solve_game(&g, &opts).map_err(|e| e.to_string())?;
        if sol.certified {
            cases.push((g.shift(sol.shift).map_err(|e| e.to_string())?, sol.report.y));
        }
    }
    ensure(cases.len() == 50, || format!("only {} certified instances", cases.len()))?;
    let (mut worst_nash, mut worst_tcp) = (0.0f64, 0.0f64);
    let (mut forward, mut converse) = (0, 0);
    let mut players = [0usize; 5];
    for (g, y) in &cases {
        players[g.players()] += 1;
        let t = TcpInstance::new(g.clone());
        let x = tcp_to_nash(g, y).map_err(|e| e.to_string())?;
        let there = nash_to_tcp(g, &x).map_err(|e| e.to_string())?;
        let back = tcp_to_nash(g, &there).map_err(|e| e.to_string())?;
        worst_nash = worst_nash.max(max_diff(&back.to_flat(), &x.to_flat()));
        let values = values_from_tcp(g.dims(), y).map_err(|e| e.to_string())?;
        let y2 = nash_to_tcp_with_values(&x, &values).map_err(|e| e.to_string())?;
        worst_tcp = worst_tcp.max(max_diff(&y2, y));

        let gap = g.best_response_gap(&x).map_err(|e| e.to_string())?.into_iter().fold(0.0, f64::max);
        if gap <= 1e-10 && g.values(&x).map_err(|e| e.to_string())?.all_positive() {
            forward += 1;
            let r = t.residual(&there).map_err(|e| e.to_string())?;
            ensure(r <= 1e-8, || format!("forward implication: residual {r:e}"))?;
        }
        if t.residual(y).map_err(|e| e.to_string())? <= 1e-10 {
            converse += 1;
            ensure(gap <= 1e-8, || format!("converse implication: gap {gap:e}"))?;
        }
        let mut off = 0;
        for &m in g.dims() {
            let s: f64 = y[off..off + m].iter().sum();
            ensure(s > 0.0, || "vanishing block".into())?;
            off += m;
        }
    }
    ensure(worst_nash <= 1e-10, || format!("Nash round trip {worst_nash:e}"))?;
    ensure(worst_tcp <= 1e-8, || format!("TCP round trip {worst_tcp:e}"))?;
    ensure(players[2] > 0 && players[3] > 0 && players[4] > 0, || format!("{players:?}"))?;
    ensure(forward > 0 && converse > 0, || "implication premises never held".into())?;
    Ok(format!(
        "50 instances (n=2: {}, n=3: {}, n=4: {}), round trips {worst_nash:.1e} / {worst_tcp:.1e}, forward premise held {forward}x, converse {converse}x",
        players[2], players[3], players[4]
    ))
}

fn criterion_5() -> Outcome {
    let mut shapes: Vec<Vec<usize>> = Vec::new();
    for a in 1..=11 {
        for b in 1..=12 - a {
            shapes.push(vec![a, b]);
        }
    }
    for a in 1..=4 {
        for b in 1..=4 {
            for c in 1..=4 {
                shapes.push(vec![a, b, c]);
            }
        }
    }
    for a in 1..=3 {
        for b in 1..=3 {
            for c in 1..=3 {
                for d in 1..=3 {
                    shapes.push(vec![a, b, c, d]);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst = 0.0f64;
    for (i, dims) in shapes.iter().enumerate() {
        let t = TcpInstance::new(random_game::<f64>(dims, i as u64).map_err(|e| e.to_string())?);
        let big = t.assemble_big_tensor(DEFAULT_BIG_TENSOR_BUDGET).map_err(|e| e.to_string())?;
        // through the export format and back
        let text = mlgame_cli::format::to_json(&TensorFile::new(&big, t.q()));
        let file: TensorFile = parse(&text, "export").map_err(|e| e.to_string())?;
        let big = file.to_tensor("export").map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let y: Vec<f64> = (0..t.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let via: Vec<f64> = big
                .power_contract(&y)
                .map_err(|e| e.to_string())?
                .iter()
                .zip(&file.q)
                .map(|(a, b)| a + b)
                .collect();
            worst = worst.max(max_diff(&via, &t.eval_f(&y).map_err(|e| e.to_string())?));
        }
    }
    ensure(worst <= 1e-12, || format!("max difference {worst:e}"))?;
    Ok(format!("{} games with m <= 12, 50 points each, max difference {worst:.1e}", shapes.len()))
}

fn central_difference(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Matrix<f64> {
    let rows = f(x).len();
    let mut jac = Matrix::zeros(rows, x.len());
    let mut p = x.to_vec();
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs().max(1.0);
        p[j] = x[j] + h;
        let up = f(&p);
        p[j] = x[j] - h;
        let down = f(&p);
        p[j] = x[j];
        for i in 0..rows {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    jac
}

fn relative_error(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    let d = a.data().iter().zip(b.data()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    d / a.max_abs().max(1.0)
}

fn criterion_6() -> Outcome {
    let shapes: [&[usize]; 6] = [&[2, 2], &[3, 5], &[2, 3, 2], &[4, 2, 3], &[2, 2, 2, 2], &[3, 2, 2, 2]];
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let (mut worst_f, mut worst_h) = (0.0f64, 0.0f64);
    let mut count = 0;
    for dims in shapes {
        for seed in 0..3 {
            let t = TcpInstance::new(random_game::<f64>(dims, 600 + seed).map_err(|e| e.to_string())?);
            let y: Vec<f64> = (0..t.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let fd = central_difference(|p| t.eval_f(p).unwrap(), &y);
            worst_f = worst_f.max(relative_error(&t.jacobian_f(&y).map_err(|e| e.to_string())?, &fd));
            let mut z = vec![rng.gen_range(0.01..1.0)];
            z.extend((0..2 * t.dim()).map(|_| rng.gen_range(-2.0..2.0)));
            let fd = central_difference(|p| eval_h(&t, p).unwrap(), &z);
            worst_h = worst_h.max(relative_error(&jacobian_h(&t, &z).map_err(|e| e.to_string())?, &fd));
            count += 1;
        }
    }
    ensure(worst_f <= 1e-6 && worst_h <= 1e-6, || format!("F {worst_f:e}, H {worst_h:e}"))?;
    Ok(format!("{count} games (6 per n in 2, 3, 4), relative error F {worst_f:.1e}, H {worst_h:.1e}"))
}

fn trace_violations(r: &SolveReport<f64>) -> usize {
    r.trace
        .iter()
        .filter(|t| !(t.mu > 0.0 && t.mu_next > 0.0 && t.h_next < t.h_norm))
        .count()
}

fn criterion_7() -> Outcome {
    let mut games = vec![load("battle_of_sexes.json"), load("three_player_2x3x2.json")];
    for dims in bench::DEFAULT_GRID {
        for seed in 1..=3 {
            games.push(random_game(&dims, seed).map_err(|e| e.to_string())?);
        }
    }
    let refined = SolverConfig {
        residual_tol: Some(1e-9),
        ..SolverConfig::default()
    };
    let (mut solves, mut steps, mut bad) = (0, 0, 0);
    for g in &games {
        for c in [0.0, 1.0, 10.0] {
            let t = TcpInstance::new(g.shift(c).map_err(|e| e.to_string())?);
            for cfg in [&SolverConfig::default(), &refined] {
                let r = solve(&t, &default_start(&t), cfg).map_err(|e| e.to_string())?;
                solves += 1;
                steps += r.trace.len();
                bad += trace_violations(&r);
            }
        }
    }
    ensure(bad == 0, || format!("{bad} of {steps} steps violate mu > 0 or descent"))?;
    Ok(format!("{solves} solves, {steps} accepted steps, all with mu > 0 and strict descent"))
}

fn criterion_8() -> Outcome {
    let shapes: [&[usize]; 4] = [&[2, 3], &[3, 2, 2], &[2, 2, 2, 2], &[4, 5]];
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let dims = shapes[i % shapes.len()];
        let g = random_game::<f64>(dims, 800 + i as u64).map_err(|e| e.to_string())?;
        let blocks = dims.iter().map(|&m| (0..m).map(|_| rng.gen_range(0.01..1.0)).collect()).collect();
        let x = MixedProfile::normalize(blocks, 0.0).map_err(|e| e.to_string())?;
        let c = rng.gen_range(-100.0..100.0);
        let a = g.best_response_gap(&x).map_err(|e| e.to_string())?;
        let b = g.shift(c).and_then(|s| s.best_response_gap(&x)).map_err(|e| e.to_string())?;
        worst = worst.max(max_diff(&a, &b));
    }
    ensure(worst <= 1e-10, || format!("drift {worst:e}"))?;
    Ok(format!("20 games, random shifts in [-100, 100), max gap drift {worst:.1e}"))
}

fn main() {
    let criteria: [Check; 8] = [
        (1, "battle of the sexes", criterion_1),
        (2, "three-player example", criterion_2),
        (3, "benchmark grid", criterion_3),
        (4, "correspondence round trips", criterion_4),
        (5, "big tensor equivalence", criterion_5),
        (6, "derivatives", criterion_6),
        (7, "algorithm invariants", criterion_7),
        (8, "shift invariance", criterion_8),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        match check() {
            Ok(detail) => println!("criterion {n} PASS [{name}]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL [{name}]: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
