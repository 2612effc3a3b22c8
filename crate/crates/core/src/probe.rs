//! Discrete Hölder seminorms of Hessian fields and their behavior under grid refinement.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::matrix::SymMatrix;
use crate::algebra::operator::OperatorSpec;
use crate::concavity::constants::estimate_constants;
use crate::concavity::sampling::sample_rng;
use crate::error::{Error, Result};
use crate::solver::domain::ConvexDomain;
use crate::solver::grid::{hessian_field, GridField};
use crate::solver::newton::{solve_dirichlet, SolveOptions};

/// Pair counts up to this are evaluated exhaustively.
pub const MAX_EXHAUSTIVE_PAIRS: usize = 1_000_000;
/// Random pairs drawn per generator stream.
const PAIRS_PER_STREAM: usize = 4096;

/// Hessians sampled at planar points with spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianField {
    pub h: f64,
    pub domain: Option<ConvexDomain>,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<SymMatrix<f64>>,
}

impl HessianField {
    pub fn new(h: f64, domain: Option<ConvexDomain>, points: Vec<[f64; 2]>, values: Vec<SymMatrix<f64>>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::precondition(format!(
                "{} points but {} Hessians",
                points.len(),
                values.len()
            )));
        }
        Ok(Self {
            h,
            domain,
            points,
            values,
        })
    }

    /// Discrete Hessians of a grid solution at every interior node.
    pub fn from_solution(u: &GridField) -> Self {
        let g = u.grid();
        Self {
            h: g.h(),
            domain: Some(*g.domain()),
            points: (0..g.len()).map(|k| g.position(k)).collect(),
            values: hessian_field(u),
        }
    }
}

/// Where pairs are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region {
    /// The field's domain shrunk about the origin by `ratio`.
    Scaled { ratio: f64 },
    All,
}

impl Default for Region {
    fn default() -> Self {
        Region::Scaled { ratio: 0.5 }
    }
}

/// Requested pair sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PairRequest {
    /// Exhaustive up to [`MAX_EXHAUSTIVE_PAIRS`], random beyond.
    Auto { pairs: usize, seed: u64 },
    Exhaustive,
    Random { pairs: usize, seed: u64 },
}

impl Default for PairRequest {
    fn default() -> Self {
        PairRequest::Auto {
            pairs: MAX_EXHAUSTIVE_PAIRS,
            seed: 0,
        }
    }
}

/// Sampling mode actually used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairMode {
    Exhaustive,
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArgmaxPair {
    /// Indices into the field's point list, first < second.
    pub nodes: (usize, usize),
    pub points: [[f64; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub alpha: f64,
    pub region: Region,
    pub seminorm: f64,
    pub argmax: Option<ArgmaxPair>,
    pub h: f64,
    pub mode: PairMode,
    pub region_nodes: usize,
}

fn quotient(field: &HessianField, alpha: f64, i: usize, j: usize) -> f64 {
    let [xi, yi] = field.points[i];
    let [xj, yj] = field.points[j];
    let dist = (xi - xj).hypot(yi - yj);
    (&field.values[i] - &field.values[j]).norm_max() / dist.powf(alpha)
}

/// Larger value wins; ties go to the lexicographically smaller pair.
fn better(a: (f64, usize, usize), b: (f64, usize, usize)) -> (f64, usize, usize) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if (a.1, a.2) <= (b.1, b.2) {
                a
            } else {
                b
            }
        }
    }
}

const NONE: (f64, usize, usize) = (f64::NEG_INFINITY, usize::MAX, usize::MAX);

/// `sup |H(x) - H(y)|_max / |x - y|^alpha` over distinct node pairs of `region`.
pub fn holder_seminorm(field: &HessianField, alpha: f64, region: Region, request: PairRequest) -> Result<HolderReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::precondition(format!("Hölder exponent must lie in (0, 1), got {alpha}")));
    }
    let members: Vec<usize> = match region {
        Region::All => (0..field.points.len()).collect(),
        Region::Scaled { ratio } => {
            if !(ratio > 0.0) || !ratio.is_finite() {
                return Err(Error::precondition(format!("region ratio must be positive, got {ratio}")));
            }
            let domain = field
                .domain
                .ok_or_else(|| Error::precondition("scaled region needs the field's domain"))?
                .scaled(ratio)?;
            (0..field.points.len())
                .filter(|&k| domain.contains(field.points[k][0], field.points[k][1]))
                .collect()
        }
    };
    if members.is_empty() {
        return Err(Error::precondition("Hölder region contains no nodes"));
    }
    let m = members.len();
    let total = m * (m - 1) / 2;
    let mode = match request {
        PairRequest::Exhaustive => PairMode::Exhaustive,
        PairRequest::Auto { .. } if total <= MAX_EXHAUSTIVE_PAIRS => PairMode::Exhaustive,
        PairRequest::Auto { pairs, seed } | PairRequest::Random { pairs, seed } => PairMode::Random { count: pairs, seed },
    };
    let best = match mode {
        _ if m < 2 => NONE,
        PairMode::Exhaustive => (0..m)
            .into_par_iter()
            .map(|a| {
                ((a + 1)..m).fold(NONE, |acc, b| {
                    let (i, j) = (members[a], members[b]);
                    better(acc, (quotient(field, alpha, i, j), i.min(j), i.max(j)))
                })
            })
            .reduce(|| NONE, better),
        PairMode::Random { count, seed } => {
            let streams = count.div_ceil(PAIRS_PER_STREAM);
            (0..streams)
                .into_par_iter()
                .map(|s| {
                    let mut rng = sample_rng(seed, s);
                    let len = PAIRS_PER_STREAM.min(count - s * PAIRS_PER_STREAM);
                    (0..len).fold(NONE, |acc, _| {
                        let a = rng.random_range(0..m);
                        let mut b = rng.random_range(0..m - 1);
                        if b >= a {
                            b += 1;
                        }
                        let (i, j) = (members[a].min(members[b]), members[a].max(members[b]));
                        better(acc, (quotient(field, alpha, i, j), i, j))
                    })
                })
                .reduce(|| NONE, better)
        }
    };
    let argmax = (best.1 != usize::MAX).then(|| ArgmaxPair {
        nodes: (best.1, best.2),
        points: [field.points[best.1], field.points[best.2]],
    });
    Ok(HolderReport {
        alpha,
        region,
        seminorm: if argmax.is_some() { best.0 } else { 0.0 },
        argmax,
        h: field.h,
        mode,
        region_nodes: m,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementRow {
    pub h: f64,
    pub alpha: f64,
    pub seminorm: Option<f64>,
    pub gamma: Option<f64>,
    pub big_gamma: Option<f64>,
    pub g_sup: Option<f64>,
    pub hessian_sup: Option<f64>,
    pub mode: Option<PairMode>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementTable {
    pub region: Region,
    pub rows: Vec<RefinementRow>,
}

impl RefinementTable {
    /// Seminorms for `alpha` in row order, `None` for failed rows.
    pub fn seminorms(&self, alpha: f64) -> Vec<Option<f64>> {
        self.rows.iter().filter(|r| r.alpha == alpha).map(|r| r.seminorm).collect()
    }

    /// Whitespace-aligned columns, one row per `(h, alpha)`.
    pub fn to_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"));
        let mut out = format!(
            "{:>10} {:>6} {:>14} {:>14} {:>14} {:>14} {:>14}  {}\n",
            "h", "alpha", "seminorm", "gamma", "Gamma", "sup|G|", "sup|D2u|", "status"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:>10.6} {:>6.3} {:>14} {:>14} {:>14} {:>14} {:>14}  {}\n",
                r.h,
                r.alpha,
                opt(r.seminorm),
                opt(r.gamma),
                opt(r.big_gamma),
                opt(r.g_sup),
                opt(r.hessian_sup),
                r.failure.as_deref().unwrap_or("ok")
            ));
        }
        out
    }
}

/// Builds the table from already computed solutions; `Err` entries become failure rows.
pub fn refinement_table(
    spec: &OperatorSpec<f64>,
    alphas: &[f64],
    region: Region,
    request: PairRequest,
    solutions: Vec<(f64, std::result::Result<GridField, String>)>,
) -> RefinementTable {
    let mut rows = Vec::new();
    for (h, sol) in solutions {
        let failed = |reason: String| RefinementRow {
            h,
            alpha: 0.0,
            seminorm: None,
            gamma: None,
            big_gamma: None,
            g_sup: None,
            hessian_sup: None,
            mode: None,
            failure: Some(reason),
        };
        let u = match sol {
            Ok(u) => u,
            Err(reason) => {
                rows.extend(alphas.iter().map(|&alpha| RefinementRow {
                    alpha,
                    ..failed(reason.clone())
                }));
                continue;
            }
        };
        let field = HessianField::from_solution(&u);
        let hessian_sup = field.values.iter().map(|m| m.norm_max()).fold(0.0, f64::max);
        let constants = estimate_constants(spec, &field.values);
        for &alpha in alphas {
            let row = match holder_seminorm(&field, alpha, region, request) {
                Ok(rep) => RefinementRow {
                    h,
                    alpha,
                    seminorm: Some(rep.seminorm),
                    gamma: constants.as_ref().ok().and_then(|c| c.gamma),
                    big_gamma: constants.as_ref().ok().and_then(|c| c.big_gamma),
                    g_sup: constants.as_ref().ok().and_then(|c| c.g_sup),
                    hessian_sup: Some(hessian_sup),
                    mode: Some(rep.mode),
                    failure: constants.as_ref().err().map(|e| e.to_string()),
                },
                Err(e) => RefinementRow {
                    alpha,
                    ..failed(e.to_string())
                },
            };
            rows.push(row);
        }
    }
    RefinementTable { region, rows }
}

/// Solves at every `h` (descending, at least three) and tabulates seminorms per `alpha`.
#[allow(clippy::too_many_arguments)]
pub fn refinement_study(
    spec: &OperatorSpec<f64>,
    domain: ConvexDomain,
    f: &(dyn Fn(f64, f64) -> f64 + Sync),
    phi: &(dyn Fn(f64, f64) -> f64 + Sync),
    alphas: &[f64],
    hs: &[f64],
    region: Region,
    request: PairRequest,
    base: SolveOptions,
) -> Result<RefinementTable> {
    if hs.len() < 3 {
        return Err(Error::precondition(format!("refinement needs at least 3 grid sizes, got {}", hs.len())));
    }
    if hs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::precondition("grid sizes must be strictly descending"));
    }
    if alphas.is_empty() {
        return Err(Error::precondition("refinement needs at least one exponent"));
    }
    let solutions = hs
        .iter()
        .map(|&h| {
            let out = solve_dirichlet(spec, domain, f, phi, SolveOptions { h, ..base });
            let sol = match out {
                Ok((u, rep)) if rep.converged => Ok(u),
                Ok((_, rep)) => Err(rep.failure.unwrap_or_else(|| "solver did not converge".into())),
                Err(e) => Err(e.to_string()),
            };
            (h, sol)
        })
        .collect();
    Ok(refinement_table(spec, alphas, region, request, solutions))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_field(alpha: f64) -> HessianField {
        let points: Vec<[f64; 2]> = (-8..=8).map(|i| [i as f64 / 8.0, 0.0]).collect();
        let values = points
            .iter()
            .map(|p| SymMatrix::from_row_major(2, &[p[0].abs().powf(alpha), 0.0, 0.0, 0.0]).unwrap())
            .collect();
        HessianField::new(0.125, None, points, values).unwrap()
    }

    #[test]
    fn constant_field_has_zero_seminorm() {
        let m = SymMatrix::from_row_major(2, &[1.0, 0.2, 0.2, 3.0]).unwrap();
        let points: Vec<[f64; 2]> = (0..20).map(|i| [i as f64 * 0.1, (i % 3) as f64 * 0.1]).collect();
        let f = HessianField::new(0.1, None, points, vec![m; 20]).unwrap();
        let r = holder_seminorm(&f, 0.5, Region::All, PairRequest::Exhaustive).unwrap();
        assert_eq!(r.seminorm, 0.0);
        assert_eq!(r.argmax.unwrap().nodes, (0, 1));
    }

    #[test]
    fn planted_power_field_has_unit_seminorm() {
        for alpha in [0.25, 0.5, 0.75] {
            let f = line_field(alpha);
            let r = holder_seminorm(&f, alpha, Region::All, PairRequest::Exhaustive).unwrap();
            assert!((r.seminorm - 1.0).abs() < 1e-12, "alpha={alpha} got {}", r.seminorm);
            let (i, j) = r.argmax.as_ref().unwrap().nodes;
            assert_eq!(quotient(&f, alpha, i, j), r.seminorm);
        }
    }

    #[test]
    fn random_pairs_never_exceed_exhaustive() {
        let f = line_field(0.5);
        let ex = holder_seminorm(&f, 0.3, Region::All, PairRequest::Exhaustive).unwrap();
        let rnd = holder_seminorm(&f, 0.3, Region::All, PairRequest::Random { pairs: 50, seed: 3 }).unwrap();
        assert!(rnd.seminorm <= ex.seminorm);
        assert_eq!(rnd.mode, PairMode::Random { count: 50, seed: 3 });
    }

    #[test]
    fn bad_inputs() {
        let f = line_field(0.5);
        assert!(holder_seminorm(&f, 1.0, Region::All, PairRequest::Exhaustive).is_err());
        assert!(holder_seminorm(&f, 0.5, Region::default(), PairRequest::Exhaustive).is_err());
        let empty = HessianField::new(0.1, None, vec![], vec![]).unwrap();
        assert!(holder_seminorm(&empty, 0.5, Region::All, PairRequest::Exhaustive).is_err());
    }
}
