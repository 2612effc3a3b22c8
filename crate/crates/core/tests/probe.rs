use std::sync::Arc;

use twisted_hessian::algebra::OperatorSpec;
use twisted_hessian::oracle::{radial_field, RadialProfile};
use twisted_hessian::probe::{
    holder_seminorm, refinement_study, refinement_table, HessianField, PairMode, PairRequest,
    Region,
};
use twisted_hessian::solver::{ConvexDomain, Grid, GridField, SolveOptions};

fn smooth(x: f64, y: f64) -> f64 {
    (x + 0.5 * y).sin() + 0.3 * (x * y).cos()
}

#[test]
fn scaling_multiplies_seminorm_by_eta_power() {
    let eta = 2.0;
    let base = Arc::new(Grid::new(ConvexDomain::disk(1.0).unwrap(), 1.0 / 16.0).unwrap());
    let scaled = Arc::new(Grid::new(ConvexDomain::disk(1.0 / eta).unwrap(), 1.0 / (16.0 * eta)).unwrap());
    assert_eq!(base.nodes(), scaled.nodes());
    let u = GridField::from_fn(base, smooth);
    let v = GridField::from_fn(scaled, |x, y| smooth(eta * x, eta * y) / (eta * eta));
    let fu = HessianField::from_solution(&u);
    let fv = HessianField::from_solution(&v);
    for (a, b) in fu.values.iter().zip(&fv.values) {
        assert!((a - b).norm_max() <= 1e-9 * (1.0 + a.norm_max()));
    }
    for alpha in [0.25, 0.5, 0.75] {
        let ru = holder_seminorm(&fu, alpha, Region::default(), PairRequest::Exhaustive).unwrap();
        let rv = holder_seminorm(&fv, alpha, Region::default(), PairRequest::Exhaustive).unwrap();
        let expected = ru.seminorm * eta.powf(alpha);
        assert!((rv.seminorm - expected).abs() <= 1e-7 * expected, "{} vs {expected}", rv.seminorm);
    }
}

#[test]
fn random_mode_bounded_by_exhaustive_on_smooth_field() {
    let g = Arc::new(Grid::new(ConvexDomain::ellipse(1.0, 0.8).unwrap(), 1.0 / 24.0).unwrap());
    let f = HessianField::from_solution(&GridField::from_fn(g, smooth));
    let ex = holder_seminorm(&f, 0.5, Region::default(), PairRequest::Exhaustive).unwrap();
    assert_eq!(ex.mode, PairMode::Exhaustive);
    for seed in 0..4 {
        let r = holder_seminorm(&f, 0.5, Region::default(), PairRequest::Random { pairs: 5000, seed }).unwrap();
        assert!(r.seminorm <= ex.seminorm);
        let again = holder_seminorm(&f, 0.5, Region::default(), PairRequest::Random { pairs: 5000, seed }).unwrap();
        assert_eq!(r, again);
    }
}

#[test]
fn monotone_in_alpha_for_short_pairs() {
    let g = Arc::new(Grid::new(ConvexDomain::disk(1.0).unwrap(), 1.0 / 16.0).unwrap());
    let f = HessianField::from_solution(&GridField::from_fn(g, smooth));
    let s: Vec<f64> = [0.25, 0.5, 0.75]
        .iter()
        .map(|&a| holder_seminorm(&f, a, Region::default(), PairRequest::Exhaustive).unwrap().seminorm)
        .collect();
    assert!(s[0] <= s[1] && s[1] <= s[2], "{s:?}");
}

#[test]
fn injected_radial_fields_have_zero_seminorm() {
    let spec = OperatorSpec::sum_of_hessians(2).unwrap();
    let profile = RadialProfile::for_rhs(2, 3.0).unwrap();
    let solutions = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]
        .iter()
        .map(|&h| {
            let g = Arc::new(Grid::new(ConvexDomain::disk(1.0).unwrap(), h).unwrap());
            (h, Ok(radial_field(&profile, g).unwrap()))
        })
        .collect();
    let table = refinement_table(&spec, &[0.25, 0.5, 0.75], Region::default(), PairRequest::default(), solutions);
    assert_eq!(table.rows.len(), 9);
    for row in &table.rows {
        assert!(row.seminorm.unwrap() <= 1e-9, "{row:?}");
        assert!(row.failure.is_none());
    }
}

#[test]
fn failed_solves_become_failure_rows() {
    let spec = OperatorSpec::sum_of_hessians(2).unwrap();
    let table = refinement_study(
        &spec,
        ConvexDomain::disk(1.0).unwrap(),
        &|_, _| 0.5,
        &|_, _| 0.0,
        &[0.5],
        &[0.25, 0.125, 0.0625],
        Region::default(),
        PairRequest::default(),
        SolveOptions::default(),
    )
    .unwrap();
    assert_eq!(table.rows.len(), 3);
    assert!(table.rows.iter().all(|r| r.seminorm.is_none() && r.failure.is_some()));
    assert!(table.to_text().contains("f > n - 1"));
    assert!(refinement_study(
        &spec,
        ConvexDomain::disk(1.0).unwrap(),
        &|_, _| 3.0,
        &|_, _| 0.0,
        &[0.5],
        &[0.125, 0.25, 0.0625],
        Region::default(),
        PairRequest::default(),
        SolveOptions::default(),
    )
    .is_err());
}

#[test]
fn det_plus_laplacian_seminorms_stay_bounded() {
    let spec = OperatorSpec::det_plus_laplacian(2).unwrap();
    let alphas = [0.25, 0.5, 0.75];
    let table = refinement_study(
        &spec,
        ConvexDomain::disk(1.0).unwrap(),
        &|x, y| 3.0 + x * x - 0.5 * y,
        &|_, _| 0.0,
        &alphas,
        &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0],
        Region::default(),
        PairRequest::default(),
        SolveOptions::default(),
    )
    .unwrap();
    eprintln!("{}", table.to_text());
    for alpha in alphas {
        let s: Vec<f64> = table.seminorms(alpha).into_iter().map(|v| v.unwrap()).collect();
        let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(lo > 0.0 && hi / lo <= 1.5, "alpha {alpha}: {s:?}");
    }
}
