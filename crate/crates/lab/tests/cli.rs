//! End-to-end CLI tests driving the dispatcher in-process.

use scherk_lab::cli::run;
use scherk_lab::persist::SolutionRecord;

fn args(s: &str) -> Vec<String> {
    std::iter::once("scherk-lab".to_string())
        .chain(s.split_whitespace().map(|w| w.to_string()))
        .collect()
}

#[test]
fn solve_writes_solution_with_b0_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display();
    let code = run(args(&format!(
        "solve --genus 0 --theta 1.5707963 --out {out}"
    )));
    assert_eq!(code, 0);
    let path = dir.path().join("sol_g0_t1.570796.txt");
    assert!(path.exists());
    let rec = SolutionRecord::load(&path).unwrap();
    assert!((rec.b[0] - 0.5).abs() < 1e-7, "b0 = {}", rec.b[0]);
    assert!((rec.lambda - 1.0).abs() < 1e-8);
}

#[test]
fn verify_accepts_solution_and_rejects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display();
    assert_eq!(
        run(args(&format!("solve --genus 0 --theta 1.2 --out {out}"))),
        0
    );
    let path = dir.path().join("sol_g0_t1.200000.txt");
    assert_eq!(
        run(args(&format!("verify --solution {}", path.display()))),
        0
    );
    // Perturb b0 by 1e-3: the certificate must reject.
    let rec = SolutionRecord::load(&path).unwrap();
    let mut bad = rec.clone();
    bad.b[0] += 1e-3;
    std::fs::write(&path, bad.to_text()).unwrap();
    assert_eq!(
        run(args(&format!("verify --solution {}", path.display()))),
        2
    );
}

#[test]
fn forces_equally_spaced_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display();
    assert_eq!(run(args(&format!("forces --genus 2 --out {out}"))), 0);
    // decay table CSV
    assert_eq!(
        run(args(&format!(
            "forces --genus 2 --decay 10,100,1000 --out {out}"
        ))),
        0
    );
    let csv = std::fs::read_to_string(dir.path().join("force_decay_g2.csv")).unwrap();
    assert!(csv.starts_with("m,sup_norm,m_times_sup"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn hessian_subcommand() {
    assert_eq!(run(args("hessian --genus 3")), 0);
}

#[test]
fn beltrami_check_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display();
    assert_eq!(run(args(&format!("beltrami-check --out {out}"))), 0);
    assert!(dir.path().join("beltrami_check.csv").exists());
}

#[test]
fn mesh_and_area_growth_and_symmetry() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display();
    assert_eq!(
        run(args(&format!("solve --genus 0 --theta 1.5707963267948966 --out {out}"))),
        0
    );
    let sol = dir.path().join("sol_g0_t1.570796.txt");
    let obj = dir.path().join("tower.obj");
    assert_eq!(
        run(args(&format!(
            "mesh --solution {} --resolution 24 --periods 1 --obj {}",
            sol.display(),
            obj.display()
        ))),
        0
    );
    let text = std::fs::read_to_string(&obj).unwrap();
    assert!(text.lines().any(|l| l.starts_with("v ")));
    assert!(text.lines().any(|l| l.starts_with("f ")));

    assert_eq!(
        run(args(&format!(
            "area-growth --solution {} --radii 0.5,1.0 --resolution 16 --out {out}",
            sol.display()
        ))),
        0
    );
    let csv = std::fs::read_to_string(dir.path().join("area_growth.csv")).unwrap();
    assert!(csv.starts_with("r,abar"));

    assert_eq!(
        run(args(&format!(
            "symmetry --solution {} --resolution 24",
            sol.display()
        ))),
        0
    );
}

#[test]
fn sweep_writes_each_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display();
    assert_eq!(
        run(args(&format!(
            "sweep --genus 0 --theta-min 1.0 --theta-max 1.4 --steps 5 --out {out}"
        ))),
        0
    );
    let count = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .starts_with("sol_g0_")
        })
        .count();
    assert_eq!(count, 5);
}

#[test]
fn deterministic_solution_bytes() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        assert_eq!(
            run(args(&format!(
                "solve --genus 0 --theta 0.9 --out {}",
                d.path().display()
            ))),
            0
        );
    }
    let f1 = std::fs::read(d1.path().join("sol_g0_t0.900000.txt")).unwrap();
    let f2 = std::fs::read(d2.path().join("sol_g0_t0.900000.txt")).unwrap();
    assert_eq!(f1, f2);
}

#[test]
fn reload_reproduces_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display();
    assert_eq!(
        run(args(&format!("solve --genus 1 --theta 1.3 --out {out}"))),
        0
    );
    let path = dir.path().join("sol_g1_t1.300000.txt");
    let rec = SolutionRecord::load(&path).unwrap();
    let cfg = rec.configuration().unwrap();
    // Recompute the conjugacy residual from the reloaded configuration.
    let gdh = cfg.zigzag(scherk::scmap::Structure::Gdh).unwrap().scaled(rec.lambda);
    let inv = cfg
        .zigzag(scherk::scmap::Structure::Inv)
        .unwrap()
        .scaled(1.0 / rec.lambda);
    let conj = scherk::orthodisk::conjugacy_residual(&gdh, &inv).unwrap();
    assert!(
        (conj - rec.conjugacy_residual).abs() < 1e-12,
        "reloaded {conj} recorded {}",
        rec.conjugacy_residual
    );
}

#[test]
fn config_file_supplies_theta_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "theta = 1.1\n").unwrap();
    assert_eq!(
        run(args(&format!(
            "solve --genus 0 --config {} --out {out}",
            cfg.display()
        ))),
        0
    );
    assert!(dir.path().join("sol_g0_t1.100000.txt").exists());
    // Flag beats the file.
    assert_eq!(
        run(args(&format!(
            "solve --genus 0 --theta 0.8 --config {} --out {out}",
            cfg.display()
        ))),
        0
    );
    assert!(dir.path().join("sol_g0_t0.800000.txt").exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(args("solve --genus 0")), 1); // missing theta
    assert_eq!(run(args("no-such-command")), 1);
    assert_eq!(
        run(args("sweep --genus 0 --theta-min 1.0 --theta-max 0.5 --steps 3")),
        1
    );
    assert_eq!(
        run(args("mesh --solution nowhere.txt --resolution 4 --obj x.obj")),
        1
    );
}
