//! Command-line interface.  Subcommands drive the solver and diagnostics;
//! results are written as plain-text records under the results directory
//! (`--out`, else `SCHERK_LAB_RESULTS`, else `./results`).
//!
//! Exit codes: 0 success, 1 usage error, 2 validation failure (with a
//! machine-readable `FAIL ...` report on stdout).

use crate::csvout;
use crate::diag;
use crate::mesh;
use crate::obj;
use crate::persist::{self, SolutionRecord};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use scherk::beltrami::{self, LocalQuadraticDifferential, PushParams};
use scherk::forces;
use scherk::numerics::Truncation;
use scherk::solver;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "scherk-lab", version, about = "Periodic Scherk-type surface laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Results directory (overrides SCHERK_LAB_RESULTS).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file mirroring the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for stochastic pieces (grid jitter, multistarts).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the conjugacy system at a genus and end angle.
    Solve {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        theta: Option<f64>,
        /// Truncation order; omit for the resummed (exact-limit) integrand.
        #[arg(long)]
        m: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Continue the family over an angle grid.
    Sweep {
        #[arg(long)]
        genus: usize,
        #[arg(long, value_name = "A")]
        theta_min: f64,
        #[arg(long, value_name = "B")]
        theta_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        m: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Force balance of a node configuration (default: equally spaced).
    Forces {
        #[arg(long)]
        genus: usize,
        /// Node positions c_0,...,c_k (c_0 = 0).
        #[arg(long, value_delimiter = ',')]
        nodes: Option<Vec<f64>>,
        /// Window sizes for a truncated-force decay table (CSV output).
        #[arg(long, value_delimiter = ',')]
        decay: Option<Vec<u32>>,
        #[command(flatten)]
        common: Common,
    },
    /// Hessian spectrum at the equally spaced configuration.
    Hessian {
        #[arg(long)]
        genus: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Deformation-calculus identities: finite differences, corner
    /// cancellation, and the even-differential pairing.
    BeltramiCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Sample a solved surface into an OBJ mesh.
    Mesh {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long, default_value_t = 1)]
        periods: usize,
        #[arg(long)]
        obj: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Area growth profile of a solved surface.
    AreaGrowth {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, value_delimiter = ',')]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 48)]
        resolution: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Symmetry-plane intersection curves of a solved surface.
    Symmetry {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = 48)]
        resolution: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Recompute the full certificate of a solution file at doubled
    /// truncation and tightened quadrature.
    Verify {
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

const CERT_TOL: f64 = 1e-8;

/// Entry point used by both the binary and the CLI tests.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 1;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            1
        }
        Err(Failure::Validation(report)) => {
            println!("{report}");
            2
        }
    }
}

enum Failure {
    Usage(String),
    Validation(String),
}

impl Failure {
    fn fail(kind: &str, detail: String) -> Failure {
        Failure::Validation(format!("FAIL {kind} {detail}"))
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn check_resolution(resolution: usize) -> CmdResult {
    if resolution < 8 {
        return Err(usage(format!("resolution {resolution} below the minimum of 8")));
    }
    Ok(())
}

fn config_value(common: &Common, key: &str) -> Option<String> {
    let path = common.config.as_deref()?;
    persist::read_config(path).ok()?.get(key).cloned()
}

fn truncation_of(m: Option<u32>, common: &Common) -> Truncation {
    match m.or_else(|| config_value(common, "m").and_then(|v| v.parse().ok())) {
        Some(m) => Truncation::Finite(m),
        None => Truncation::Infinite,
    }
}

fn dispatch(cmd: Command) -> CmdResult {
    match cmd {
        Command::Solve {
            genus,
            theta,
            m,
            common,
        } => {
            let theta = theta
                .or_else(|| config_value(&common, "theta").and_then(|v| v.parse().ok()))
                .ok_or_else(|| usage("missing --theta"))?;
            let truncation = truncation_of(m, &common);
            let solved = solver::solve_genus_theta(genus, theta, truncation)
                .map_err(|e| Failure::fail("solve", format!("error=\"{e}\"")))?;
            let record = SolutionRecord::from_solved(&solved);
            let dir = persist::results_dir(common.out.as_deref());
            let path = record.save(&dir).map_err(|e| usage(e.to_string()))?;
            let zig = persist::ZigzagRecord::from_zigzag(&solved.pair.gdh_zigzag);
            std::fs::write(dir.join(format!("zig_{}.txt", record.key())), zig.to_text())
                .map_err(|e| usage(e.to_string()))?;
            println!(
                "solved genus={} theta={:.9} b0={:.9} lambda={:.9} conjugacy={:.3e} angle={:.3e}",
                genus,
                theta,
                record.b[0],
                record.lambda,
                record.conjugacy_residual,
                record.angle_residual
            );
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Sweep {
            genus,
            theta_min,
            theta_max,
            steps,
            m,
            common,
        } => {
            if steps < 1 || theta_max <= theta_min {
                return Err(usage("need steps >= 1 and theta_max > theta_min"));
            }
            let truncation = truncation_of(m, &common);
            let thetas: Vec<f64> = (0..steps)
                .map(|i| theta_min + (theta_max - theta_min) * i as f64 / (steps - 1).max(1) as f64)
                .collect();
            // Warm-start chain per worker block: continuation is sequential
            // in theta, so parallelize over blocks of the grid.
            let blocks: Vec<Vec<f64>> = thetas
                .chunks((thetas.len() / rayon::current_num_threads().max(1)).max(4))
                .map(|c| c.to_vec())
                .collect();
            let solved: Vec<_> = blocks
                .par_iter()
                .map(|block| solver::continue_family(genus, block, truncation))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Failure::fail("sweep", format!("error=\"{e}\"")))?
                .into_iter()
                .flatten()
                .collect();
            let dir = persist::results_dir(common.out.as_deref());
            for s in &solved {
                let record = SolutionRecord::from_solved(s);
                let path = record.save(&dir).map_err(|e| usage(e.to_string()))?;
                println!(
                    "theta={:.9} achieved={:.9} lambda={:.9} -> {}",
                    s.theta_target,
                    s.theta_achieved,
                    s.lambda,
                    path.display()
                );
            }
            Ok(())
        }
        Command::Forces {
            genus,
            nodes,
            decay,
            common,
        } => {
            let explicit_nodes = nodes.is_some();
            let cfg = match nodes {
                Some(c) => forces::NodeConfiguration::new(c)
                    .map_err(|e| usage(format!("bad --nodes: {e}")))?,
                None => forces::equally_spaced(genus),
            };
            let f = forces::limit_force(&cfg);
            println!("limit_force sup_norm = {:.6e}", f.sup_norm());
            if let Some(ms) = decay {
                let table = forces::truncated_force_decay(genus, &ms);
                let rows: Vec<Vec<f64>> = table
                    .iter()
                    .map(|(m, sup)| vec![*m as f64, *sup, *m as f64 * *sup])
                    .collect();
                let dir = persist::results_dir(common.out.as_deref());
                let path = dir.join(format!("force_decay_g{genus}.csv"));
                csvout::write_csv(&path, &["m", "sup_norm", "m_times_sup"], &rows)
                    .map_err(|e| usage(e.to_string()))?;
                println!("wrote {}", path.display());
            }
            if !explicit_nodes && f.sup_norm() >= 1e-12 {
                return Err(Failure::fail(
                    "forces",
                    format!("sup_norm={:.3e} tol=1e-12", f.sup_norm()),
                ));
            }
            Ok(())
        }
        Command::Hessian { genus, common } => {
            let _ = common;
            let h = forces::hessian(&forces::equally_spaced(genus), Truncation::Infinite);
            let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            let evs = ev
                .iter()
                .map(|x| format!("{x:.9e}"))
                .collect::<Vec<_>>()
                .join(", ");
            println!("hessian eigenvalues (genus {genus}): {evs}");
            if ev.iter().any(|v| *v >= 0.0) {
                return Err(Failure::fail(
                    "hessian",
                    format!("max_eigenvalue={:.3e} expected<0", ev.last().unwrap()),
                ));
            }
            Ok(())
        }
        Command::BeltramiCheck { common } => beltrami_check(&common),
        Command::Mesh {
            solution,
            resolution,
            periods,
            obj: obj_path,
            common,
        } => {
            let _ = common;
            check_resolution(resolution)?;
            let s = load_solution(&solution)?;
            let mesh = mesh::sample_mesh(&s, resolution, periods)
                .map_err(|e| Failure::fail("mesh", format!("error=\"{e}\"")))?;
            obj::export_obj(&mesh, &obj_path)
                .map_err(|e| Failure::fail("mesh", format!("error=\"{e}\"")))?;
            println!(
                "mesh vertices={} triangles={} seam_defect={:.3e} -> {}",
                mesh.vertices.len(),
                mesh.triangles.len(),
                mesh.seam_defect,
                obj_path.display()
            );
            if mesh.seam_defect >= CERT_TOL {
                return Err(Failure::fail(
                    "mesh",
                    format!("seam_defect={:.3e} tol={CERT_TOL:e}", mesh.seam_defect),
                ));
            }
            Ok(())
        }
        Command::AreaGrowth {
            solution,
            radii,
            resolution,
            common,
        } => {
            if radii.is_empty() {
                return Err(usage("need --radii r1,r2,..."));
            }
            check_resolution(resolution)?;
            if radii.iter().any(|r| !(*r > 0.0)) {
                return Err(usage("radii must be positive"));
            }
            let s = load_solution(&solution)?;
            let rmax = radii.iter().fold(0.0f64, |m, r| m.max(*r));
            let periods = ((2.0 * rmax).ceil() as usize + 2).max(1);
            let m = mesh::sample_mesh(&s, resolution, periods)
                .map_err(|e| Failure::fail("area-growth", format!("error=\"{e}\"")))?;
            let profile = diag::area_growth_profile(&m, &radii)
                .map_err(|e| Failure::fail("area-growth", format!("error=\"{e}\"")))?;
            let rows: Vec<Vec<f64>> = profile.iter().map(|(r, a)| vec![*r, *a]).collect();
            let dir = persist::results_dir(common.out.as_deref());
            let path = dir.join("area_growth.csv");
            csvout::write_csv(&path, &["r", "abar"], &rows).map_err(|e| usage(e.to_string()))?;
            for (r, a) in &profile {
                println!("r={r:.6} abar={a:.9}");
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Symmetry {
            solution,
            resolution,
            common,
        } => {
            let _ = common;
            check_resolution(resolution)?;
            let s = load_solution(&solution)?;
            let genus = s.genus();
            let m = mesh::sample_mesh(&s, resolution, 3)
                .map_err(|e| Failure::fail("symmetry", format!("error=\"{e}\"")))?;
            let rep = diag::symmetry_diagnostics(&m)
                .map_err(|e| Failure::fail("symmetry", format!("error=\"{e}\"")))?;
            for p in &rep.planes {
                println!(
                    "plane x{} closed={} convex={} open_chains={}",
                    p.axis + 1,
                    p.closed_curves_per_period,
                    p.convex_curves_per_period,
                    p.open_chains
                );
            }
            let expected = genus + 1;
            for p in &rep.planes {
                if p.closed_curves_per_period != expected
                    || p.convex_curves_per_period != expected
                {
                    return Err(Failure::fail(
                        "symmetry",
                        format!(
                            "plane=x{} closed={} convex={} expected={expected}",
                            p.axis + 1,
                            p.closed_curves_per_period,
                            p.convex_curves_per_period
                        ),
                    ));
                }
            }
            Ok(())
        }
        Command::Verify { solution, common } => {
            let _ = common;
            let s = load_solution(&solution)?;
            let cert = solver::certify(&s, 1e-11)
                .map_err(|e| Failure::fail("verify", format!("error=\"{e}\"")))?;
            println!(
                "certificate conjugacy={:.3e} angle={:.3e} closure=({:.3e},{:.3e},{:.3e}) edge_conjugacy={:.3e}",
                cert.conjugacy,
                cert.angle,
                cert.closure[0],
                cert.closure[1],
                cert.closure[2],
                cert.edge_conjugacy
            );
            if !cert.passes(CERT_TOL) {
                return Err(Failure::fail(
                    "verify",
                    format!(
                        "conjugacy={:.3e} angle={:.3e} closure_max={:.3e} edge_conjugacy={:.3e} tol={CERT_TOL:e}",
                        cert.conjugacy,
                        cert.angle,
                        cert.closure.iter().fold(0.0f64, |m, c| m.max(*c)),
                        cert.edge_conjugacy
                    ),
                ));
            }
            println!("verified");
            Ok(())
        }
    }
}

fn load_solution(path: &PathBuf) -> std::result::Result<scherk::solver::SolvedSurface, Failure> {
    let record = SolutionRecord::load(path).map_err(usage)?;
    let config = record.configuration().map_err(usage)?;
    // Rebuild the orthodisk pair from the stored configuration so the
    // surface object is self-consistent with the record.
    let gdh = config
        .zigzag(scherk::scmap::Structure::Gdh)
        .map_err(|e| Failure::fail("load", format!("error=\"{e}\"")))?
        .scaled(record.lambda);
    let inv = config
        .zigzag(scherk::scmap::Structure::Inv)
        .map_err(|e| Failure::fail("load", format!("error=\"{e}\"")))?
        .scaled(1.0 / record.lambda);
    let conj = scherk::orthodisk::conjugacy_residual(&gdh, &inv)
        .map_err(|e| Failure::fail("load", format!("error=\"{e}\"")))?;
    let theta_achieved = solver::achieved_theta(&gdh);
    Ok(scherk::solver::SolvedSurface {
        config,
        lambda: record.lambda,
        theta_target: record.theta_target,
        theta_achieved,
        conjugacy_residual: conj,
        angle_residual: (theta_achieved - record.theta_target).abs(),
        pair: scherk::orthodisk::OrthodiskPair {
            gdh_zigzag: gdh,
            inv_zigzag: inv,
            conjugacy_residual: conj,
        },
    })
}

fn beltrami_check(common: &Common) -> CmdResult {
    use num_complex::Complex64;
    let p = PushParams::new(1.0, 1.0, 1.0);
    // Deterministic interior sample set away from interfaces.
    let mut samples = Vec::new();
    for i in 0..10 {
        for j in 0..10 {
            let z = Complex64::new(-2.35 + 0.47 * i as f64, -0.93 + 0.205 * j as f64);
            samples.push(z);
        }
    }
    let fd = beltrami::finite_difference_check(&p, &samples, 1e-4, 1e-4)
        .map_err(|e| Failure::fail("beltrami", format!("error=\"{e}\"")))?;

    let p0 = PushParams::new(0.0, 1.0, 1.0);
    let mut corner_samples = Vec::new();
    for i in 1..10 {
        for j in 1..10 {
            corner_samples.push(Complex64::new(-0.1 * i as f64, 0.1 * j as f64));
            corner_samples.push(Complex64::new(-0.1 * i as f64, -0.1 * j as f64));
        }
    }
    let cancel = beltrami::cancellation_check(&p0, &corner_samples);

    let q = LocalQuadraticDifferential::even(Complex64::new(1.0, 0.0), Complex64::new(0.4, -0.2));
    let pairing = beltrami::pair_with_quadratic_differential(&q, &p0, 0.8, 64).norm();
    let odd = LocalQuadraticDifferential {
        c0: Complex64::new(0.0, 0.0),
        c2: Complex64::new(0.0, 0.0),
        odd: Complex64::new(1.0, 0.0),
    };
    let control = beltrami::pair_with_quadratic_differential(&odd, &p0, 0.8, 64).norm();

    println!(
        "beltrami fd_sup={fd:.3e} cancellation={cancel:.3e} even_pairing={pairing:.3e} odd_control={control:.3e}"
    );
    let rows = vec![vec![fd, cancel, pairing, control]];
    let dir = persist::results_dir(common.out.as_deref());
    let path = dir.join("beltrami_check.csv");
    csvout::write_csv(
        &path,
        &["fd_sup", "cancellation", "even_pairing", "odd_control"],
        &rows,
    )
    .map_err(|e| usage(e.to_string()))?;
    println!("wrote {}", path.display());
    if fd >= 1e-6 || cancel >= 1e-14 || pairing >= 1e-8 || control <= 1e-3 {
        return Err(Failure::fail(
            "beltrami",
            format!("fd={fd:.3e} cancellation={cancel:.3e} pairing={pairing:.3e} control={control:.3e}"),
        ));
    }
    Ok(())
}
