//! Axis-aligned lattice over the bounding box of a polytope.
//!
//! Nodes are classified by their smallest facet distance: `Interior` when
//! `min_i l_i >= h/2`, `NearBoundary` when the node lies in the closed polytope
//! but closer to the boundary, `Outside` otherwise. The lattice is padded by
//! [`PolytopeGrid::PAD`] layers on every side so that centered stencils and
//! cubic spline evaluation can read extrapolated ghost values.
//!
//! Quadrature: each interior node owns the part of `P` nearest to it (its
//! `h`-cube clipped to `P`, plus the adjacent boundary strip). Ownership is
//! resolved on a sub-lattice of each cell and the weights are rescaled so they
//! sum to `mu(P)`. A second, signed set of spline weights gives the integral
//! over `P` of the cubic spline model of a node field exactly.

use super::{DelzantPolytope, SplineField};
use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::collections::VecDeque;

const CLASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    NearBoundary,
    Outside,
}

/// Ordered extrapolation recipe that fills every node outside a known mask
/// as a fixed linear combination of previously known or filled nodes.
#[derive(Debug, Clone)]
pub struct FillPlan {
    steps: Vec<(usize, Vec<(usize, f64)>)>,
}

impl FillPlan {
    pub fn apply(&self, values: &mut [f64]) {
        for (target, sources) in &self.steps {
            values[*target] = sources.iter().map(|&(s, w)| w * values[s]).sum();
        }
    }

    /// Apply the plan to each component of a strided multi-component field.
    pub fn apply_strided(&self, values: &mut [f64], components: usize) {
        for (target, sources) in &self.steps {
            for c in 0..components {
                values[target * components + c] = sources
                    .iter()
                    .map(|&(s, w)| w * values[s * components + c])
                    .sum();
            }
        }
    }

    /// Transpose of [`FillPlan::apply`]: pulls sensitivities of filled nodes
    /// back onto their sources.
    pub fn apply_adjoint(&self, grads: &mut [f64]) {
        for (target, sources) in self.steps.iter().rev() {
            let gt = std::mem::take(&mut grads[*target]);
            for &(s, w) in sources {
                grads[s] += w * gt;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct PolytopeGrid {
    dim: usize,
    h: f64,
    origin: Vec<f64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    class: Vec<NodeClass>,
    facet_count: usize,
    facet_dist: Vec<f64>,
    interior: Vec<usize>,
    slot: Vec<Option<usize>>,
    weights: Vec<f64>,
    spline_weights: Vec<f64>,
    volume: f64,
    interior_fill: FillPlan,
    closure_fill: FillPlan,
    mixed: Vec<MixedStencil>,
}

/// Diagonal pair used for the mixed second difference of an axis pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedStencil {
    /// Four corners `(+-, +-)`.
    Centered,
    /// Second difference along `e_a + e_b`.
    Plus,
    /// Second difference along `e_a - e_b`.
    Minus,
}

/// Picks, per axis pair, the diagonal tangent to some facet, so second
/// differences along that facet stay on one lattice row.
fn mixed_stencils(polytope: &DelzantPolytope) -> Vec<MixedStencil> {
    let n = polytope.dim();
    let normals: Vec<Vec<f64>> = polytope.facets().iter().map(|f| f.normal_f64()).collect();
    let mut out = vec![MixedStencil::Centered; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let along = |sign: f64| normals.iter().any(|v| v[a] != 0.0 && v[a] == sign * v[b]);
            let s = match (along(1.0), along(-1.0)) {
                (true, false) => MixedStencil::Minus,
                (false, true) => MixedStencil::Plus,
                _ => MixedStencil::Centered,
            };
            out[a * n + b] = s;
            out[b * n + a] = s;
        }
    }
    out
}

impl PolytopeGrid {
    /// Ghost layers on each side of the bounding box.
    pub const PAD: usize = 3;

    pub fn new(polytope: &DelzantPolytope, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid spacing {h} must be positive"
            )));
        }
        let dim = polytope.dim();
        let (lo, hi) = polytope.bounding_box();
        let pad = Self::PAD;
        let mut shape = Vec::with_capacity(dim);
        let mut origin = Vec::with_capacity(dim);
        for a in 0..dim {
            let cells = ((hi[a] - lo[a]) / h - 1e-9).ceil().max(1.0) as usize;
            shape.push(cells + 1 + 2 * pad);
            origin.push(lo[a] - pad as f64 * h);
        }
        let mut strides = vec![1; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * shape[a + 1];
        }
        let total: usize = shape.iter().product();
        let facet_count = polytope.facets().len();

        let mut class = Vec::with_capacity(total);
        let mut facet_dist = Vec::with_capacity(total * facet_count);
        let mut interior = Vec::new();
        let mut slot = vec![None; total];
        let mut grid_coords = vec![0.0; dim];
        for idx in 0..total {
            let mut rem = idx;
            for a in 0..dim {
                let k = rem / strides[a];
                rem %= strides[a];
                grid_coords[a] = origin[a] + k as f64 * h;
            }
            let ls = polytope.facet_distances(&grid_coords);
            let m = ls.iter().copied().fold(f64::INFINITY, f64::min);
            let c = if m >= 0.5 * h - CLASS_TOL {
                slot[idx] = Some(interior.len());
                interior.push(idx);
                NodeClass::Interior
            } else if m >= -CLASS_TOL {
                NodeClass::NearBoundary
            } else {
                NodeClass::Outside
            };
            class.push(c);
            facet_dist.extend(ls);
        }
        if interior.is_empty() {
            return Err(Error::GridTooCoarse {
                h,
                reason: "no interior nodes".into(),
            });
        }

        let mut grid = Self {
            dim,
            h,
            origin,
            shape,
            strides,
            class,
            facet_count,
            facet_dist,
            interior,
            slot,
            weights: Vec::new(),
            spline_weights: Vec::new(),
            volume: polytope.volume()?,
            interior_fill: FillPlan { steps: Vec::new() },
            closure_fill: FillPlan { steps: Vec::new() },
            mixed: mixed_stencils(polytope),
        };
        grid.check_connected()?;
        let interior_mask: Vec<bool> = grid
            .class
            .iter()
            .map(|&c| c == NodeClass::Interior)
            .collect();
        let closure_mask: Vec<bool> = grid
            .class
            .iter()
            .map(|&c| c != NodeClass::Outside)
            .collect();
        grid.interior_fill = grid.build_fill_plan(&interior_mask);
        grid.closure_fill = grid.build_fill_plan(&closure_mask);
        grid.weights = grid.compute_weights(polytope);
        grid.spline_weights = grid.compute_spline_weights(polytope)?;
        Ok(grid)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Number of lattice nodes including ghost padding.
    pub fn lattice_len(&self) -> usize {
        self.class.len()
    }

    pub fn class(&self, idx: usize) -> NodeClass {
        self.class[idx]
    }

    /// Lattice indices of interior nodes in lexicographic order.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn interior_len(&self) -> usize {
        self.interior.len()
    }

    /// Position of a lattice node in the interior ordering.
    pub fn slot(&self, idx: usize) -> Option<usize> {
        self.slot[idx]
    }

    /// Quadrature weights for interior nodes; they sum to `mu(P)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Signed weights with `sum_k w_k f_k = int_P S[f] dx` for the spline
    /// model `S[f]` of an interior field.
    pub fn spline_weights(&self) -> &[f64] {
        &self.spline_weights
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn facet_distances(&self, idx: usize) -> &[f64] {
        &self.facet_dist[idx * self.facet_count..(idx + 1) * self.facet_count]
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        let mut rem = idx;
        self.strides
            .iter()
            .map(|&s| {
                let k = rem / s;
                rem %= s;
                k
            })
            .collect()
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.origin)
            .map(|(&k, &o)| o + k as f64 * self.h)
            .collect()
    }

    /// Coordinates of every interior node, in interior order.
    pub fn interior_coords(&self) -> Vec<Vec<f64>> {
        self.interior.iter().map(|&i| self.coords(i)).collect()
    }

    /// Lattice neighbour displaced by `offset` (in lattice units) along `axis`.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> Option<usize> {
        let k = (idx / self.strides[axis]) % self.shape[axis];
        let nk = k as isize + offset;
        if nk < 0 || nk >= self.shape[axis] as isize {
            return None;
        }
        Some((idx as isize + offset * self.strides[axis] as isize) as usize)
    }

    fn shift(&self, idx: usize, dir: &[isize], times: isize) -> Option<usize> {
        let mut cur = idx;
        for (a, &d) in dir.iter().enumerate() {
            if d != 0 {
                cur = self.neighbor(cur, a, d * times)?;
            }
        }
        Some(cur)
    }

    /// Ghost extension that fills every non-interior lattice node from interior values.
    pub fn interior_fill(&self) -> &FillPlan {
        &self.interior_fill
    }

    /// Ghost extension that fills every outside node from closed-polytope values.
    pub fn closure_fill(&self) -> &FillPlan {
        &self.closure_fill
    }

    /// Lattice index of the node nearest to `x` (clamped to the lattice).
    pub fn nearest_node(&self, x: &[f64]) -> usize {
        (0..self.dim)
            .map(|a| {
                let k = ((x[a] - self.origin[a]) / self.h).round();
                k.clamp(0.0, (self.shape[a] - 1) as f64) as usize * self.strides[a]
            })
            .sum()
    }

    /// Mixed-difference choice for the axis pair `(a, b)`.
    pub fn mixed_stencil(&self, a: usize, b: usize) -> MixedStencil {
        self.mixed[a * self.dim + b]
    }

    /// Second-order finite-difference Hessian of a lattice field at `idx`.
    /// The field must carry ghost values on the padding.
    pub fn fd_hessian(&self, values: &[f64], idx: usize) -> Option<DMatrix<f64>> {
        let h2 = self.h * self.h;
        let mut m = DMatrix::zeros(self.dim, self.dim);
        let v0 = values[idx];
        for a in 0..self.dim {
            let p = self.neighbor(idx, a, 1)?;
            let q = self.neighbor(idx, a, -1)?;
            m[(a, a)] = (values[p] - 2.0 * v0 + values[q]) / h2;
        }
        for a in 0..self.dim {
            let p = self.neighbor(idx, a, 1)?;
            let q = self.neighbor(idx, a, -1)?;
            for b in (a + 1)..self.dim {
                let pp = self.neighbor(p, b, 1)?;
                let pm = self.neighbor(p, b, -1)?;
                let mp = self.neighbor(q, b, 1)?;
                let mm = self.neighbor(q, b, -1)?;
                let axes = m[(a, a)] + m[(b, b)];
                let d = match self.mixed_stencil(a, b) {
                    MixedStencil::Centered => {
                        (values[pp] - values[pm] - values[mp] + values[mm]) / (4.0 * h2)
                    }
                    MixedStencil::Plus => ((values[pp] - 2.0 * v0 + values[mm]) / h2 - axes) / 2.0,
                    MixedStencil::Minus => (axes - (values[pm] - 2.0 * v0 + values[mp]) / h2) / 2.0,
                };
                m[(a, b)] = d;
                m[(b, a)] = d;
            }
        }
        Some(m)
    }

    /// First derivatives at every interior node of a field known only at
    /// interior nodes (indexed by slot). The field is ghost-extended and
    /// differenced centrally, which reduces to the one-sided three-point
    /// formula next to the boundary.
    pub fn interior_gradients(&self, values: &[f64]) -> Result<Vec<Vec<f64>>> {
        if values.len() != self.interior.len() {
            return Err(Error::Misaligned(format!(
                "{} values for {} interior nodes",
                values.len(),
                self.interior.len()
            )));
        }
        let mut lattice = vec![0.0; self.class.len()];
        for (&idx, &v) in self.interior.iter().zip(values) {
            lattice[idx] = v;
        }
        self.interior_fill.apply(&mut lattice);
        self.interior
            .iter()
            .map(|&idx| {
                (0..self.dim)
                    .map(
                        |a| match (self.neighbor(idx, a, 1), self.neighbor(idx, a, -1)) {
                            (Some(p), Some(m)) => Ok((lattice[p] - lattice[m]) / (2.0 * self.h)),
                            _ => Err(Error::StencilUnavailable {
                                node: idx,
                                reason: format!("node on the lattice edge along axis {a}"),
                            }),
                        },
                    )
                    .collect()
            })
            .collect()
    }

    fn check_connected(&self) -> Result<()> {
        let mut seen = vec![false; self.class.len()];
        let mut queue = VecDeque::from([self.interior[0]]);
        seen[self.interior[0]] = true;
        let mut count = 0;
        while let Some(i) = queue.pop_front() {
            count += 1;
            for a in 0..self.dim {
                for off in [-1, 1] {
                    if let Some(j) = self.neighbor(i, a, off) {
                        if !seen[j] && self.class[j] == NodeClass::Interior {
                            seen[j] = true;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        if count != self.interior.len() {
            return Err(Error::GridTooCoarse {
                h: self.h,
                reason: "interior node set is disconnected".into(),
            });
        }
        Ok(())
    }

    fn compute_weights(&self, polytope: &DelzantPolytope) -> Vec<f64> {
        let m: usize = match self.dim {
            1 => 32,
            2 => 8,
            _ => 4,
        };
        let sub_h = self.h / m as f64;
        let sub_vol = sub_h.powi(self.dim as i32);
        let mut weights = vec![0.0; self.interior.len()];
        let sub_count = m.pow(self.dim as u32);
        let mut x = vec![0.0; self.dim];
        for idx in 0..self.class.len() {
            // only cells that can meet P
            if self
                .facet_distances(idx)
                .iter()
                .zip(polytope.facets())
                .any(|(&l, f)| l < -self.h * f.normal_norm() * self.dim as f64)
            {
                continue;
            }
            let centre = self.coords(idx);
            for s in 0..sub_count {
                let mut rem = s;
                for a in 0..self.dim {
                    let k = rem % m;
                    rem /= m;
                    x[a] = centre[a] - 0.5 * self.h + (k as f64 + 0.5) * sub_h;
                }
                if !polytope.contains(&x) {
                    continue;
                }
                let owner = match self.slot[idx] {
                    Some(s) => s,
                    None => self.nearest_interior(&x, idx),
                };
                weights[owner] += sub_vol;
            }
        }
        let sum: f64 = weights.iter().sum();
        let scale = self.volume / sum;
        weights.iter_mut().for_each(|w| *w *= scale);
        weights
    }

    fn compute_spline_weights(&self, polytope: &DelzantPolytope) -> Result<Vec<f64>> {
        let refinement = match self.dim {
            1 => 8,
            2 => 4,
            _ => 2,
        };
        let (points, weights) = polytope.midpoint_rule(self.h / refinement as f64)?;
        Ok(SplineField::integration_weights(self, &points, &weights))
    }

    fn nearest_interior(&self, x: &[f64], around: usize) -> usize {
        let base = self.multi_index(around);
        let mut radius = 1usize;
        loop {
            let mut best: Option<(f64, usize)> = None;
            let width = 2 * radius + 1;
            for s in 0..width.pow(self.dim as u32) {
                let mut rem = s;
                let mut idx = 0usize;
                let mut ok = true;
                for a in 0..self.dim {
                    let off = (rem % width) as isize - radius as isize;
                    rem /= width;
                    let k = base[a] as isize + off;
                    if k < 0 || k >= self.shape[a] as isize {
                        ok = false;
                        break;
                    }
                    idx += k as usize * self.strides[a];
                }
                if !ok {
                    continue;
                }
                if let Some(slot) = self.slot[idx] {
                    let c = self.coords(idx);
                    let d2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                    if best
                        .is_none_or(|(bd, bs)| d2 < bd - 1e-15 || (d2 <= bd + 1e-15 && slot < bs))
                    {
                        best = Some((d2, slot));
                    }
                }
            }
            if let Some((_, slot)) = best {
                return slot;
            }
            radius += 1;
        }
    }

    fn build_fill_plan(&self, known_mask: &[bool]) -> FillPlan {
        let n = self.dim;
        let mut dirs: Vec<Vec<isize>> = (0..3usize.pow(n as u32))
            .map(|s| {
                let mut rem = s;
                (0..n)
                    .map(|_| {
                        let d = (rem % 3) as isize - 1;
                        rem /= 3;
                        d
                    })
                    .collect::<Vec<isize>>()
            })
            .filter(|d| d.iter().any(|&x| x != 0))
            .collect();
        dirs.sort_by_key(|d| d.iter().filter(|&&x| x != 0).count());
        let tier = |d: &Vec<isize>| d.iter().filter(|&&x| x != 0).count();

        // extrapolation weights: cubic, quadratic, linear, constant
        let recipes: [&[f64]; 4] = [
            &[4.0, -6.0, 4.0, -1.0],
            &[3.0, -3.0, 1.0],
            &[2.0, -1.0],
            &[1.0],
        ];

        let mut known = known_mask.to_vec();
        let mut steps = Vec::new();
        // fill layer by layer, using a lower order only when no higher-order path exists anywhere
        'layers: loop {
            for recipe in recipes {
                let mut layer = Vec::new();
                for idx in 0..known.len() {
                    if known[idx] {
                        continue;
                    }
                    let mut chosen: Vec<Vec<usize>> = Vec::new();
                    let mut chosen_tier = usize::MAX;
                    for d in &dirs {
                        if tier(d) > chosen_tier {
                            break;
                        }
                        let path: Option<Vec<usize>> = (1..=recipe.len() as isize)
                            .map(|t| self.shift(idx, d, t).filter(|&j| known[j]))
                            .collect();
                        if let Some(path) = path {
                            chosen_tier = tier(d);
                            chosen.push(path);
                        }
                    }
                    if !chosen.is_empty() {
                        let scale = 1.0 / chosen.len() as f64;
                        let sources = chosen
                            .iter()
                            .flat_map(|path| {
                                path.iter().zip(recipe).map(move |(&j, &w)| (j, w * scale))
                            })
                            .collect();
                        layer.push((idx, sources));
                    }
                }
                if !layer.is_empty() {
                    for (idx, _) in &layer {
                        known[*idx] = true;
                    }
                    steps.extend(layer);
                    continue 'layers;
                }
            }
            break;
        }
        FillPlan { steps }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_interior_nodes() {
        let p = DelzantPolytope::preset("interval").unwrap();
        let g = PolytopeGrid::new(&p, 1.0 / 8.0).unwrap();
        let xs: Vec<f64> = g.interior_coords().into_iter().map(|c| c[0]).collect();
        assert_eq!(xs.len(), 7);
        for (k, x) in xs.iter().enumerate() {
            assert_relative_eq!(*x, (k + 1) as f64 / 8.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn square_interior_nodes() {
        let p = DelzantPolytope::preset("square").unwrap();
        let g = PolytopeGrid::new(&p, 0.25).unwrap();
        assert_eq!(g.interior_len(), 9);
    }

    #[test]
    fn simplex_interior_count_matches_enumeration() {
        let p = DelzantPolytope::preset("simplex").unwrap();
        let h = 0.25;
        let g = PolytopeGrid::new(&p, h).unwrap();
        // brute force over lattice points (i h, j h)
        let mut count = 0;
        for i in -2..8 {
            for j in -2..8 {
                let (x, y) = (i as f64 * h, j as f64 * h);
                if x.min(y).min(1.0 - x - y) >= h / 2.0 {
                    count += 1;
                }
            }
        }
        assert_eq!(count, 3);
        assert_eq!(g.interior_len(), count);
    }

    #[test]
    fn interior_nodes_respect_half_spacing_margin() {
        for name in ["interval", "square", "simplex"] {
            let p = DelzantPolytope::preset(name).unwrap();
            let g = PolytopeGrid::new(&p, 1.0 / 16.0).unwrap();
            for &i in g.interior() {
                let m = g
                    .facet_distances(i)
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
                assert!(m >= g.h() / 2.0 - 1e-12);
            }
        }
    }

    #[test]
    fn weights_sum_to_volume_and_cover_boundary_strip() {
        let p = DelzantPolytope::preset("interval").unwrap();
        let g = PolytopeGrid::new(&p, 0.125).unwrap();
        let w = g.weights();
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(w[0], 0.1875, epsilon = 1e-12);
        assert_relative_eq!(w[3], 0.125, epsilon = 1e-12);

        let s = DelzantPolytope::preset("simplex").unwrap();
        let g = PolytopeGrid::new(&s, 1.0 / 16.0).unwrap();
        assert_relative_eq!(g.weights().iter().sum::<f64>(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn spline_weights_integrate_cubics() {
        let p = DelzantPolytope::preset("interval").unwrap();
        let g = PolytopeGrid::new(&p, 1.0 / 16.0).unwrap();
        let w = g.spline_weights();
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let m3: f64 = g
            .interior()
            .iter()
            .zip(w)
            .map(|(&i, w)| w * g.coords(i)[0].powi(3))
            .sum();
        assert_relative_eq!(m3, 0.25, epsilon = 1e-5);

        let s = DelzantPolytope::preset("simplex").unwrap();
        let g = PolytopeGrid::new(&s, 1.0 / 16.0).unwrap();
        let q = |c: &[f64]| c[0] * c[0] * c[1] + c[1];
        let total: f64 = g
            .interior()
            .iter()
            .zip(g.spline_weights())
            .map(|(&i, w)| w * q(&g.coords(i)))
            .sum();
        // int_simplex x^2 y + y = 1/60 + 1/6
        assert_relative_eq!(total, 1.0 / 60.0 + 1.0 / 6.0, epsilon = 1e-4);
    }

    proptest::proptest! {
        #[test]
        fn fill_adjoint_is_transpose(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let p = DelzantPolytope::preset("simplex").unwrap();
            let g = PolytopeGrid::new(&p, 0.125).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..g.lattice_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r: Vec<f64> = (0..g.lattice_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut fv = v.clone();
            g.interior_fill().apply(&mut fv);
            let mut tr = r.clone();
            g.interior_fill().apply_adjoint(&mut tr);
            let lhs: f64 = fv.iter().zip(&r).map(|(a, b)| a * b).sum();
            let rhs: f64 = v.iter().zip(&tr).map(|(a, b)| a * b).sum();
            proptest::prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn too_coarse_grid() {
        let p = DelzantPolytope::preset("interval").unwrap();
        assert!(matches!(
            PolytopeGrid::new(&p, 1.0),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn fill_plan_reproduces_quadratics() {
        let p = DelzantPolytope::preset("simplex").unwrap();
        let g = PolytopeGrid::new(&p, 1.0 / 8.0).unwrap();
        let q = |c: &[f64]| {
            1.0 + 2.0 * c[0] - c[1] + 0.5 * c[0] * c[0] - 3.0 * c[0] * c[1] + c[1] * c[1]
        };
        let mut vals = vec![f64::NAN; g.lattice_len()];
        for &i in g.interior() {
            vals[i] = q(&g.coords(i));
        }
        g.interior_fill().apply(&mut vals);
        for i in 0..g.lattice_len() {
            assert!((vals[i] - q(&g.coords(i))).abs() < 1e-9, "node {i}");
        }
    }

    #[test]
    fn fd_hessian_exact_on_quadratic() {
        let p = DelzantPolytope::preset("square").unwrap();
        let g = PolytopeGrid::new(&p, 0.125).unwrap();
        let vals: Vec<f64> = (0..g.lattice_len())
            .map(|i| {
                let c = g.coords(i);
                c[0] * c[0] + 0.5 * c[0] * c[1]
            })
            .collect();
        let hess = g.fd_hessian(&vals, g.interior()[5]).unwrap();
        assert_relative_eq!(hess[(0, 0)], 2.0, epsilon = 1e-9);
        assert_relative_eq!(hess[(0, 1)], 0.5, epsilon = 1e-9);
        assert_relative_eq!(hess[(1, 1)], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn mixed_stencil_follows_slanted_facets() {
        let square = PolytopeGrid::new(&DelzantPolytope::preset("square").unwrap(), 0.25).unwrap();
        assert_eq!(square.mixed_stencil(0, 1), MixedStencil::Centered);
        let simplex = DelzantPolytope::preset("simplex").unwrap();
        let g = PolytopeGrid::new(&simplex, 0.125).unwrap();
        assert_eq!(g.mixed_stencil(0, 1), MixedStencil::Minus);
        assert_eq!(g.mixed_stencil(1, 0), MixedStencil::Minus);
        let vals: Vec<f64> = (0..g.lattice_len())
            .map(|i| {
                let c = g.coords(i);
                c[0] * c[0] - 1.5 * c[0] * c[1] + 2.0 * c[1] * c[1]
            })
            .collect();
        for &idx in g.interior() {
            let hess = g.fd_hessian(&vals, idx).unwrap();
            assert_relative_eq!(hess[(0, 1)], -1.5, epsilon = 1e-9);
            assert_relative_eq!(hess[(1, 1)], 4.0, epsilon = 1e-9);
        }
    }
}
