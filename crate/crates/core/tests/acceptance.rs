use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::{json, Value};
use twisted_hessian::algebra::{ConcaveTerm, ConvexPart, OperatorSpec, SymMatrix};
use twisted_hessian::concavity::sampling::{random_spd, sample_rng, SPD_EPSILON};
use twisted_hessian::concavity::{
    certify_subsolution, check_transform_concavity, sandwich_sweep, ScalarTransform,
};
use twisted_hessian::oracle::{counterexample_roots, existence_transition, identity_sweep};
use twisted_hessian::probe::{
    holder_seminorm, refinement_study, HessianField, PairRequest, Region,
};
use twisted_hessian::solver::{solve_dirichlet, ConvexDomain, Grid, SolveOptions};

const SAMPLES: usize = 10_000;

struct Outcome {
    pass: bool,
    summary: String,
    /// Deterministic record of every computed quantity.
    record: Value,
}

fn identity() -> Outcome {
    let reports: Vec<_> = (2..=8)
        .map(|n| identity_sweep(n, SAMPLES, 1000 + n as u64, 1e-10).expect("valid n"))
        .collect();
    let worst = reports.iter().map(|r| r.max_defect).fold(0.0, f64::max);
    Outcome {
        pass: reports.iter().all(|r| r.pass),
        summary: format!("max defect {worst:.3e} over n = 2..8"),
        record: json!(reports),
    }
}

fn sandwich() -> Outcome {
    let cert = sandwich_sweep(SAMPLES, 2);
    Outcome {
        pass: cert.pass,
        summary: format!(
            "{} witnesses, max violation {:?}",
            cert.witnesses.len(),
            cert.max_violation
        ),
        record: json!(cert),
    }
}

fn random_pencil(n: usize, seed: u64) -> OperatorSpec<f64> {
    let mut rng = sample_rng(seed, 0);
    let a = random_spd(n, SPD_EPSILON, &mut rng);
    let weights: Vec<f64> = (2..=n).map(|_| rng.random_range(0.1..2.0)).collect();
    let bs = (2..=n).map(|_| random_spd(n, SPD_EPSILON, &mut rng)).collect();
    OperatorSpec::weighted_pencil(n, a, &weights, bs).expect("valid pencil")
}

fn subsolution_form() -> Outcome {
    let mut certs = Vec::new();
    for n in [2, 3] {
        certs.push(certify_subsolution(&OperatorSpec::det_plus_laplacian(n).unwrap(), SAMPLES, 30 + n as u64));
        for p in 0..10u64 {
            let spec = random_pencil(n, 300 + 10 * n as u64 + p);
            certs.push(certify_subsolution(&spec, SAMPLES / 10, 3000 + 10 * n as u64 + p));
        }
    }
    let failures = certs.iter().filter(|c| !c.pass).count();
    let worst = certs.iter().filter_map(|c| c.max_violation).fold(f64::NEG_INFINITY, f64::max);
    let skipped: usize = certs.iter().map(|c| c.skipped).sum();
    Outcome {
        pass: failures == 0,
        summary: format!("{failures} failing sweeps, max form {worst:.3e}, {skipped} skipped"),
        record: json!(certs),
    }
}

fn pencil_root_concavity() -> Outcome {
    let mut certs = Vec::new();
    for n in 2..=4 {
        for k in 2..=n {
            let mut rng = sample_rng(400 + n as u64, k);
            let b = random_spd(n, SPD_EPSILON, &mut rng);
            for p in [k, n] {
                let term = ConcaveTerm { k, weight: 1.0, b: b.clone() };
                let g = ScalarTransform::power_root(p as f64).unwrap();
                let spec = OperatorSpec::new(n, ConvexPart::Zero, vec![term], g).unwrap();
                certs.push(check_transform_concavity(&spec, 0, SAMPLES, 40 + (10 * n + k) as u64).unwrap());
            }
        }
    }
    let violations: usize = certs.iter().map(|c| c.witnesses.len()).sum();
    Outcome {
        pass: certs.iter().all(|c| c.pass),
        summary: format!("{} sweeps, {violations} violations", certs.len()),
        record: json!(certs),
    }
}

fn radial_solve(h: f64) -> (f64, bool, Value) {
    let spec = OperatorSpec::sum_of_hessians(2).unwrap();
    let disk = ConvexDomain::disk(1.0).unwrap();
    let opts = SolveOptions { h, ..SolveOptions::default() };
    let (u, report) = solve_dirichlet(&spec, disk, &|_, _| 3.0, &|_, _| 0.0, opts).unwrap();
    let a = 3f64.sqrt();
    let g = u.grid();
    let err = (0..g.len())
        .map(|k| {
            let [x, y] = g.position(k);
            (u.values[k] - 0.5 * a * (x * x + y * y - 1.0)).abs()
        })
        .fold(0.0, f64::max);
    let record: Value = serde_json::from_str(&report.to_json(false)).unwrap();
    (err, report.converged, json!({ "h": h, "error": err, "report": record }))
}

fn radial_convergence() -> Outcome {
    let (e32, c32, r32) = radial_solve(1.0 / 32.0);
    let (e64, c64, r64) = radial_solve(1.0 / 64.0);
    let ratio = e32 / e64;
    Outcome {
        pass: c32 && c64 && e64 <= 1e-3 && (3.5..=4.5).contains(&ratio),
        summary: format!("error h=1/32 {e32:.3e}, h=1/64 {e64:.3e}, ratio {ratio:.3}"),
        record: json!({ "coarse": r32, "fine": r64, "ratio": ratio }),
    }
}

fn planted_quadratic() -> Outcome {
    let spec = OperatorSpec::det_plus_laplacian(2).unwrap();
    let disk = ConvexDomain::disk(1.0).unwrap();
    let m = SymMatrix::from_row_major(2, &[2.0, 0.3, 0.3, 1.5]).unwrap();
    let q = |x: f64, y: f64| 0.5 * (2.0 * x * x + 0.6 * x * y + 1.5 * y * y) + 0.3 * x - 0.1 * y;
    let f = m.det() + m.trace();
    let opts = SolveOptions { h: 1.0 / 32.0, ..SolveOptions::default() };
    let (u, report) = solve_dirichlet(&spec, disk, &move |_, _| f, &q, opts).unwrap();
    let g = u.grid();
    let err = (0..g.len())
        .map(|k| {
            let [x, y] = g.position(k);
            (u.values[k] - q(x, y)).abs()
        })
        .fold(0.0, f64::max);
    let record: Value = serde_json::from_str(&report.to_json(false)).unwrap();
    Outcome {
        pass: report.converged && err <= 1e-9,
        summary: format!("sup error {err:.3e}"),
        record: json!({ "error": err, "report": record }),
    }
}

fn polynomial_sharpness() -> Outcome {
    let mut ok = true;
    let mut reports = Vec::new();
    let mut transitions = Vec::new();
    for n in 2..=6 {
        let m = n as f64 - 1.0;
        for k in 0..=6 {
            let r = counterexample_roots(n, m * (1.0 + 10f64.powi(-k))).unwrap();
            ok &= !r.existence;
            reports.push(r);
        }
        let r = counterexample_roots(n, m / 2.0).unwrap();
        ok &= r.existence && !r.cone_admissible.is_empty();
        reports.push(r);
        let t = existence_transition(n, m / 2.0, 2.0 * m).unwrap();
        ok &= (t - m).abs() <= 1e-9;
        transitions.push(json!({ "n": n, "transition": t, "offset": t - m }));
    }
    let worst = transitions
        .iter()
        .map(|t| t["offset"].as_f64().unwrap().abs())
        .fold(0.0, f64::max);
    Outcome {
        pass: ok,
        summary: format!("worst transition offset {worst:.3e}"),
        record: json!({ "reports": reports, "transitions": transitions }),
    }
}

fn holder_boundedness() -> Outcome {
    let spec = OperatorSpec::det_plus_laplacian(2).unwrap();
    let disk = ConvexDomain::disk(1.0).unwrap();
    let alphas = [0.25, 0.5, 0.75];
    let table = refinement_study(
        &spec,
        disk,
        &|x, y| 3.0 + x * x - 0.5 * y,
        &|_, _| 0.0,
        &alphas,
        &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
        Region::default(),
        PairRequest::Auto { pairs: 1_000_000, seed: 8 },
        SolveOptions::default(),
    )
    .unwrap();
    let mut ok = true;
    let mut spreads = Vec::new();
    for alpha in alphas {
        let s = table.seminorms(alpha);
        if s.iter().any(Option::is_none) {
            ok = false;
            continue;
        }
        let s: Vec<f64> = s.into_iter().flatten().collect();
        let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = s.iter().copied().fold(0.0, f64::max);
        let spread = hi / lo;
        ok &= lo > 0.0 && spread <= 1.5;
        spreads.push(spread);
    }
    let grid = Grid::new(disk, 1.0 / 64.0).unwrap();
    let points: Vec<[f64; 2]> = (0..grid.len()).map(|k| grid.position(k)).collect();
    let constant = SymMatrix::from_row_major(2, &[1.3, -0.2, -0.2, 0.9]).unwrap();
    let field = HessianField::new(grid.h(), Some(disk), points.clone(), vec![constant; points.len()]).unwrap();
    let zeros: Vec<f64> = alphas
        .iter()
        .map(|&a| holder_seminorm(&field, a, Region::default(), PairRequest::default()).unwrap().seminorm)
        .collect();
    ok &= zeros.iter().all(|&z| z == 0.0);
    Outcome {
        pass: ok,
        summary: format!("seminorm spreads {spreads:.3?}, constant-field seminorms {zeros:?}"),
        record: json!({ "table": table, "constant_field": zeros }),
    }
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 8] = [
        ("reduction identity", identity, Duration::from_secs(5)),
        ("sandwich bound", sandwich, Duration::from_secs(5)),
        ("subsolution form", subsolution_form, Duration::from_secs(120)),
        ("pencil root concavity", pencil_root_concavity, Duration::from_secs(60)),
        ("solver vs radial oracle", radial_convergence, Duration::from_secs(120)),
        ("planted quadratic", planted_quadratic, Duration::from_secs(120)),
        ("polynomial sharpness", polynomial_sharpness, Duration::from_secs(5)),
        ("Hölder boundedness", holder_boundedness, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    let mut records = Vec::new();
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= *limit;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {} ({:.2}s, limit {}s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.summary,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
        records.push(serde_json::to_string(&out.record).unwrap());
    }
    let mismatched: Vec<usize> = criteria
        .iter()
        .zip(&records)
        .enumerate()
        .filter(|(_, ((_, run, _), first))| serde_json::to_string(&run().record).unwrap() != **first)
        .map(|(i, _)| i + 1)
        .collect();
    let bytes: usize = records.iter().map(String::len).sum();
    if mismatched.is_empty() {
        println!("PASS criterion 9: determinism: {bytes} bytes of JSON reproduced exactly");
    } else {
        failed += 1;
        println!("FAIL criterion 9: determinism: criteria {mismatched:?} differ on rerun");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
