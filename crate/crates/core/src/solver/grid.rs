//! Cartesian grids masked by a convex domain, with cut-cell boundary points.

use std::sync::Arc;

use rayon::prelude::*;

use crate::algebra::matrix::SymMatrix;
use crate::error::{Error, Result};
use crate::solver::domain::ConvexDomain;

/// Stencil directions, in plus/minus pairs: x, y, diagonal, anti-diagonal.
pub const DIRECTIONS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, -1),
    (1, -1),
    (-1, 1),
];

/// What lies one grid step away from an interior node in a stencil direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Neighbor {
    /// Another interior node.
    Node(usize),
    /// The boundary, reached at fraction `theta` of the step; `id` indexes the cut list.
    Cut { id: usize, theta: f64 },
}

impl Neighbor {
    pub fn fraction(&self) -> f64 {
        match *self {
            Neighbor::Node(_) => 1.0,
            Neighbor::Cut { theta, .. } => theta,
        }
    }
}

/// Grid with nodes `(i h, j h)`; interior nodes satisfy `rho < 0`.
#[derive(Debug, Clone)]
pub struct Grid {
    h: f64,
    domain: ConvexDomain,
    extent: (i64, i64),
    nodes: Vec<(i64, i64)>,
    lookup: Vec<Option<usize>>,
    stencils: Vec<[Neighbor; 8]>,
    cuts: Vec<[f64; 2]>,
}

impl Grid {
    pub fn new(domain: ConvexDomain, h: f64) -> Result<Self> {
        domain.validate()?;
        let (a, b) = domain.semi_axes();
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Discretization(format!("grid spacing must be positive, got {h}")));
        }
        if h >= a.min(b) {
            return Err(Error::Discretization(format!(
                "grid spacing {h} is too coarse for a domain with semi-axes ({a}, {b})"
            )));
        }
        let extent = ((a / h).ceil() as i64 + 1, (b / h).ceil() as i64 + 1);
        let width = (2 * extent.0 + 1) as usize;
        let height = (2 * extent.1 + 1) as usize;
        let mut lookup = vec![None; width * height];
        let mut nodes = Vec::new();
        for j in -extent.1..=extent.1 {
            for i in -extent.0..=extent.0 {
                if domain.contains(i as f64 * h, j as f64 * h) {
                    lookup[Self::slot(extent, i, j)] = Some(nodes.len());
                    nodes.push((i, j));
                }
            }
        }
        if nodes.is_empty() {
            return Err(Error::Discretization("no grid node lies inside the domain".into()));
        }
        let mut cuts = Vec::new();
        let mut stencils = Vec::with_capacity(nodes.len());
        for &(i, j) in &nodes {
            let p = [i as f64 * h, j as f64 * h];
            let mut st = [Neighbor::Node(0); 8];
            for (d, &(di, dj)) in DIRECTIONS.iter().enumerate() {
                let (ni, nj) = (i + di, j + dj);
                let inside = ni.abs() <= extent.0 && nj.abs() <= extent.1;
                st[d] = match inside.then(|| lookup[Self::slot(extent, ni, nj)]).flatten() {
                    Some(k) => Neighbor::Node(k),
                    None => {
                        let step = [di as f64 * h, dj as f64 * h];
                        let theta = domain.boundary_fraction(p, step);
                        cuts.push([p[0] + theta * step[0], p[1] + theta * step[1]]);
                        Neighbor::Cut {
                            id: cuts.len() - 1,
                            theta,
                        }
                    }
                };
            }
            stencils.push(st);
        }
        Ok(Self {
            h,
            domain,
            extent,
            nodes,
            lookup,
            stencils,
            cuts,
        })
    }

    fn slot(extent: (i64, i64), i: i64, j: i64) -> usize {
        let width = 2 * extent.0 + 1;
        ((j + extent.1) * width + (i + extent.0)) as usize
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn domain(&self) -> &ConvexDomain {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integer coordinates `(i, j)` of every interior node, row by row.
    pub fn nodes(&self) -> &[(i64, i64)] {
        &self.nodes
    }

    pub fn position(&self, node: usize) -> [f64; 2] {
        let (i, j) = self.nodes[node];
        [i as f64 * self.h, j as f64 * self.h]
    }

    pub fn index_of(&self, i: i64, j: i64) -> Option<usize> {
        if i.abs() > self.extent.0 || j.abs() > self.extent.1 {
            return None;
        }
        self.lookup[Self::slot(self.extent, i, j)]
    }

    pub fn stencil(&self, node: usize) -> &[Neighbor; 8] {
        &self.stencils[node]
    }

    /// Exact boundary points reached by cut stencil arms.
    pub fn cuts(&self) -> &[[f64; 2]] {
        &self.cuts
    }

    /// Whether all eight neighbors of `node` are interior nodes.
    pub fn is_full_interior(&self, node: usize) -> bool {
        self.stencils[node].iter().all(|n| matches!(n, Neighbor::Node(_)))
    }

    /// Smallest cut fraction over the grid (1 if there are no cuts).
    pub fn min_fraction(&self) -> f64 {
        self.stencils
            .iter()
            .flat_map(|s| s.iter().map(Neighbor::fraction))
            .fold(1.0, f64::min)
    }
}

/// Weights `(w_plus, w_minus, w_center)` of the second difference along a grid
/// line with arms of `tp * h` and `tm * h`; exact on quadratics.
pub fn second_difference_weights(tp: f64, tm: f64, h: f64) -> (f64, f64, f64) {
    let h2 = h * h;
    (
        2.0 / (tp * (tp + tm) * h2),
        2.0 / (tm * (tp + tm) * h2),
        -2.0 / (tp * tm * h2),
    )
}

/// A scalar field: values at interior nodes and at cut boundary points.
#[derive(Debug, Clone)]
pub struct GridField {
    grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub boundary: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, boundary: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() || boundary.len() != grid.cuts().len() {
            return Err(Error::domain(format!(
                "field shape ({}, {}) does not match grid ({}, {})",
                values.len(),
                boundary.len(),
                grid.len(),
                grid.cuts().len()
            )));
        }
        if values.iter().chain(&boundary).any(|v| !v.is_finite()) {
            return Err(Error::domain("field values must be finite"));
        }
        Ok(Self {
            grid,
            values,
            boundary,
        })
    }

    /// Samples `f` at every node and cut point.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let [x, y] = grid.position(k);
                f(x, y)
            })
            .collect();
        let boundary = grid.cuts().iter().map(|&[x, y]| f(x, y)).collect();
        Self {
            grid,
            values,
            boundary,
        }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        Self::from_fn(grid, |_, _| 0.0)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn neighbor_value(&self, n: Neighbor) -> f64 {
        match n {
            Neighbor::Node(k) => self.values[k],
            Neighbor::Cut { id, .. } => self.boundary[id],
        }
    }

    /// Largest absolute value over interior nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().chain(&self.boundary).all(|v| v.is_finite())
    }
}

/// Second differences along the four stencil lines at `node`: `e^T D^2u e`
/// for `e` in `(1,0), (0,1), (1,1), (1,-1)`.
pub fn line_second_differences(u: &GridField, node: usize) -> [f64; 4] {
    let grid = u.grid();
    let st = grid.stencil(node);
    let u0 = u.values[node];
    let mut out = [0.0; 4];
    for (line, slot) in out.iter_mut().enumerate() {
        let (p, m) = (st[2 * line], st[2 * line + 1]);
        let (wp, wm, w0) = second_difference_weights(p.fraction(), m.fraction(), grid.h());
        *slot = wp * u.neighbor_value(p) + wm * u.neighbor_value(m) + w0 * u0;
    }
    out
}

/// Discrete Hessian at an interior node.
///
/// Pure second derivatives come from the axis lines; the mixed derivative from
/// the difference of the two diagonal lines.
pub fn discrete_hessian(u: &GridField, node: usize) -> SymMatrix<f64> {
    let [dx, dy, dd, da] = line_second_differences(u, node);
    let mut m = SymMatrix::zeros(2);
    m.set(0, 0, dx);
    m.set(1, 1, dy);
    m.set(0, 1, 0.25 * (dd - da));
    m
}

/// Discrete Hessian at every interior node.
pub fn hessian_field(u: &GridField) -> Vec<SymMatrix<f64>> {
    (0..u.grid().len())
        .into_par_iter()
        .map(|k| discrete_hessian(u, k))
        .collect()
}
