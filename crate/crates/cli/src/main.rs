use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::rngs::StdRng;
use rand::SeedableRng;

use zigzag_core::engine::ZigzagError;
use zigzag_core::filtration::parse_filtration;
use zigzag_core::formats::{parse_barcode, parse_representatives, write_barcode, write_representatives};
use zigzag_core::random::{random_zigzag, ZigzagParams};
use zigzag_core::rips::{load_points, oscillating_rips, greedy_permutation, PointCloud};
use zigzag_core::validator::{Certificate, Verifier};
use zigzag_core::{run, Bar, Module, ZigzagFiltration};

/// Zigzag persistence barcodes with representatives.
#[derive(Debug, Parser)]
#[command(name = "zigzag", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the barcode of a filtration file.
    Compute {
        /// Also write representatives to this file.
        #[arg(long)]
        reps: Option<PathBuf>,
        /// Include the boundary module's bars.
        #[arg(long)]
        boundary_module: bool,
        input: PathBuf,
        output: PathBuf,
    },
    /// Certify a barcode (and optionally representatives) against a filtration.
    Verify {
        filtration: PathBuf,
        barcode: PathBuf,
        reps: Option<PathBuf>,
    },
    /// Build an oscillating Rips filtration from a point cloud.
    Rips {
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        points: PathBuf,
        output: PathBuf,
    },
    /// Time compute over a ladder of filtration lengths.
    Bench {
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shortest rung for generated filtrations; rungs double twice.
        #[arg(long, default_value_t = 2000)]
        base_m: usize,
        /// Complex size cap for generated filtrations.
        #[arg(long, default_value_t = 60)]
        cap: usize,
        #[arg(long, default_value_t = 2.0)]
        mu: f64,
        #[arg(long, default_value_t = 2.2)]
        nu: f64,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
        /// A filtration or point cloud; without it a random zigzag is generated.
        input: Option<PathBuf>,
    },
}

enum Failure {
    /// Unreadable or invalid input.
    Input(String),
    /// The engine broke one of its own invariants.
    Internal(String),
    /// Verification ran and found a failing check.
    Rejected,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Internal(_) => 2,
            Failure::Rejected => 3,
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_filtration(path: &Path) -> Result<ZigzagFiltration, Failure> {
    let text = read(path)?;
    let f = parse_filtration(text.as_bytes()).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    f.validate().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(f)
}

fn compute(reps: Option<&Path>, boundary_module: bool, input: &Path, output: &Path) -> CmdResult {
    let f = load_filtration(input)?;
    let start = Instant::now();
    let result = run(&f).map_err(|e| match e {
        ZigzagError::Invalid(e) => Failure::Input(e.to_string()),
        ZigzagError::Engine(e) => Failure::Internal(e.to_string()),
    })?;
    let elapsed = start.elapsed();
    let keep = |m: Module| m == Module::H || boundary_module;
    let bars: Vec<Bar> = result.bars().into_iter().filter(|b| keep(b.module)).collect();
    write(output, &write_barcode(&bars))?;
    if let Some(path) = reps {
        let mut out = Vec::new();
        for iv in result.intervals.iter().filter(|iv| keep(iv.bar.module)) {
            out.push(result.representative(iv).map_err(|e| Failure::Internal(format!("{}: {e}", iv.bar)))?);
        }
        write(path, &write_representatives(&out))?;
    }
    let s = result.stats;
    println!("m = {}", s.m);
    println!("n = {}", s.n);
    println!("homology intervals = {}", s.homology_bars);
    println!("boundary intervals = {}", s.boundary_bars);
    println!("time = {:.3}s", elapsed.as_secs_f64());
    Ok(())
}

fn verify(filtration: &Path, barcode: &Path, reps: Option<&Path>) -> CmdResult {
    let f = load_filtration(filtration)?;
    let bars = parse_barcode(&read(barcode)?).map_err(|e| Failure::Input(format!("{}: {e}", barcode.display())))?;
    let v = Verifier::new(&f).map_err(|e| Failure::Input(e.to_string()))?;
    let mut modules = vec![Module::H];
    if bars.iter().any(|b| b.module == Module::B) {
        modules.push(Module::B);
    }
    let mut cert = v.check_pairing(&bars, &modules);
    match reps {
        None => cert.skip("representatives", "no representative file given"),
        Some(path) => {
            let reps = parse_representatives(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let mut have: Vec<Bar> = reps.iter().map(|r| r.bar).collect();
            let mut want = bars.clone();
            have.sort();
            want.sort();
            cert.record(
                "representatives match barcode",
                if have == want { Ok(()) } else { Err("bars differ from the barcode".into()) },
            );
            for r in &reps {
                cert.extend(v.check_representative(r));
            }
            if modules.contains(&Module::B) {
                let basis = (0..=f.len()).try_for_each(|j| v.check_pointwise_basis(&reps, j));
                cert.record("pointwise basis", basis);
            } else {
                cert.skip("pointwise basis", "boundary module not in barcode");
            }
        }
    }
    print!("{cert}");
    report(&cert)
}

fn report(cert: &Certificate) -> CmdResult {
    if cert.passed() {
        println!("PASS all");
        Ok(())
    } else {
        Err(Failure::Rejected)
    }
}

fn rips(mu: f64, nu: f64, max_dim: usize, points: &Path, output: &Path) -> CmdResult {
    let cloud = load_points(&read(points)?).map_err(|e| Failure::Input(format!("{}: {e}", points.display())))?;
    let g = greedy_permutation(&cloud).map_err(|e| Failure::Input(e.to_string()))?;
    if g.truncated > 0 {
        eprintln!("warning: {} duplicate points dropped", g.truncated);
    }
    let f = oscillating_rips(&cloud, mu, nu, max_dim).map_err(|e| Failure::Input(e.to_string()))?;
    let stats = f.validate().map_err(|e| Failure::Internal(e.to_string()))?;
    write(output, &f.serialize())?;
    println!("points = {}", g.order.len());
    println!("m = {}", stats.m);
    println!("n = {}", stats.n);
    Ok(())
}

/// Least-squares slope of `ln t` against `ln m`.
fn fitted_exponent(rows: &[(usize, usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.0 > 0 && r.2 > 0.0)
        .map(|r| ((r.0 as f64).ln(), r.2.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / k, sy / k);
    let num: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (den > 0.0).then(|| num / den)
}

#[allow(clippy::too_many_arguments)]
fn bench(
    trials: usize,
    seed: u64,
    base_m: usize,
    cap: usize,
    mu: f64,
    nu: f64,
    max_dim: usize,
    input: Option<&Path>,
) -> CmdResult {
    let full = match input {
        None => {
            let mut rng = StdRng::seed_from_u64(seed);
            let params = ZigzagParams {
                vertices: 12,
                max_dim: 3,
                steps: 4 * base_m,
                insert_prob: 0.55,
                max_size: Some(cap),
            };
            random_zigzag(&mut rng, &params)
        }
        Some(path) => {
            let text = read(path)?;
            match parse_filtration(text.as_bytes()) {
                Ok(f) => {
                    f.validate().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                    f
                }
                Err(_) => {
                    let cloud: PointCloud =
                        load_points(&text).map_err(|e| Failure::Input(format!("{}: not a filtration or point cloud: {e}", path.display())))?;
                    oscillating_rips(&cloud, mu, nu, max_dim).map_err(|e| Failure::Input(e.to_string()))?
                }
            }
        }
    };
    let top = full.len();
    let ladder = [top / 4, top / 2, top];
    println!("{:>10} {:>8} {:>12}", "m", "n", "seconds");
    let mut rows = Vec::new();
    for &m in &ladder {
        let f = full.prefix(m);
        let mut best = f64::INFINITY;
        let mut n = 0;
        for _ in 0..trials.max(1) {
            let start = Instant::now();
            let result = run(&f).map_err(|e| Failure::Internal(e.to_string()))?;
            best = best.min(start.elapsed().as_secs_f64());
            n = result.stats.n;
        }
        println!("{m:>10} {n:>8} {best:>12.4}");
        rows.push((m, n, best));
    }
    match fitted_exponent(&rows) {
        Some(e) => println!("fitted exponent = {e:.3}"),
        None => println!("fitted exponent = n/a"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Compute {
            reps,
            boundary_module,
            input,
            output,
        } => compute(reps.as_deref(), *boundary_module, input, output),
        Command::Verify { filtration, barcode, reps } => verify(filtration, barcode, reps.as_deref()),
        Command::Rips {
            mu,
            nu,
            max_dim,
            points,
            output,
        } => rips(*mu, *nu, *max_dim, points, output),
        Command::Bench {
            trials,
            seed,
            base_m,
            cap,
            mu,
            nu,
            max_dim,
            input,
        } => bench(*trials, *seed, *base_m, *cap, *mu, *nu, *max_dim, input.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Input(msg) => eprintln!("error: {msg}"),
                Failure::Internal(msg) => eprintln!("internal error: {msg}"),
                Failure::Rejected => eprintln!("verification failed"),
            }
            ExitCode::from(failure.code())
        }
    }
}
