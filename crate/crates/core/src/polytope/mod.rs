//! Delzant polytopes in facet (H-) representation.
//!
//! A polytope is stored as a list of facets `l_i(x) = <x, n_i> + c_i >= 0` with
//! primitive inward integer normals. Vertices are derived once at construction.
//! Measures: `dmu` is Lebesgue measure on `P`, and on facet `F_i` the boundary
//! measure `dsigma` is Lebesgue measure divided by `|n_i|`.

mod grid;
mod spline;

pub use grid::{FillPlan, MixedStencil, NodeClass, PolytopeGrid};
pub use spline::SplineField;

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Tolerance used when deciding whether a point lies on a facet.
const INCIDENCE_TOL: f64 = 1e-9;

/// Names accepted by [`DelzantPolytope::preset`].
pub const PRESETS: [&str; 3] = ["interval", "square", "simplex"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: f64,
}

impl Facet {
    pub fn new(normal: Vec<i64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    /// `l(x) = <x, n> + c`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.normal
            .iter()
            .zip(x)
            .map(|(&n, &xi)| n as f64 * xi)
            .sum::<f64>()
            + self.offset
    }

    pub fn normal_f64(&self) -> Vec<f64> {
        self.normal.iter().map(|&n| n as f64).collect()
    }

    pub fn normal_norm(&self) -> f64 {
        self.normal
            .iter()
            .map(|&n| (n * n) as f64)
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelzantPolytope {
    dim: usize,
    facets: Vec<Facet>,
    vertices: Vec<Vec<f64>>,
}

/// Outcome of [`DelzantPolytope::validate_delzant`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelzantReport {
    pub valid: bool,
    /// Per vertex: the vertex and the determinant of its incident-normal matrix
    /// (`None` when the vertex does not lie on exactly `dim` facets).
    pub vertex_determinants: Vec<(Vec<f64>, Option<i64>)>,
    pub issues: Vec<String>,
}

impl DelzantReport {
    pub fn into_result(self) -> Result<()> {
        if self.valid {
            Ok(())
        } else {
            Err(Error::InvalidPolytope(self.issues.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryMeasure {
    /// sigma-mass of each facet, in facet order.
    pub facet_masses: Vec<f64>,
    pub total: f64,
}

impl DelzantPolytope {
    /// Build a polytope from its facets. Checks that the described region is
    /// bounded with nonempty interior; the Delzant condition itself is checked
    /// separately by [`validate_delzant`](Self::validate_delzant).
    pub fn new(facets: Vec<Facet>) -> Result<Self> {
        let dim = facets
            .first()
            .map(|f| f.normal.len())
            .ok_or_else(|| Error::InvalidPolytope("no facets".into()))?;
        if dim == 0 {
            return Err(Error::InvalidPolytope("zero-dimensional normals".into()));
        }
        if let Some((i, f)) = facets
            .iter()
            .enumerate()
            .find(|(_, f)| f.normal.len() != dim)
        {
            return Err(Error::InvalidPolytope(format!(
                "facet {i} has {} normal components, expected {dim}",
                f.normal.len()
            )));
        }
        if let Some(i) = facets.iter().position(|f| f.normal.iter().all(|&n| n == 0)) {
            return Err(Error::DegenerateFacet(i));
        }
        if !facets.iter().all(|f| f.offset.is_finite()) {
            return Err(Error::InvalidPolytope("non-finite offset".into()));
        }
        check_bounded(&facets, dim)?;
        let vertices = enumerate_vertices(&facets, dim);
        if vertices.len() < dim + 1 {
            return Err(Error::InvalidPolytope(format!(
                "found {} vertices, need at least {}",
                vertices.len(),
                dim + 1
            )));
        }
        let poly = Self {
            dim,
            facets,
            vertices,
        };
        let centre = poly.vertex_mean();
        if poly.min_facet_distance(&centre) <= INCIDENCE_TOL {
            return Err(Error::InvalidPolytope("empty interior".into()));
        }
        Ok(poly)
    }

    /// One of the named presets: `interval` = [0,1], `square` = [0,1]^2,
    /// `simplex` = {x >= 0, y >= 0, x + y <= 1}.
    pub fn preset(name: &str) -> Result<Self> {
        let facets = match name {
            "interval" => vec![Facet::new(vec![1], 0.0), Facet::new(vec![-1], 1.0)],
            "square" => vec![
                Facet::new(vec![1, 0], 0.0),
                Facet::new(vec![0, 1], 0.0),
                Facet::new(vec![-1, 0], 1.0),
                Facet::new(vec![0, -1], 1.0),
            ],
            "simplex" => vec![
                Facet::new(vec![1, 0], 0.0),
                Facet::new(vec![0, 1], 0.0),
                Facet::new(vec![-1, -1], 1.0),
            ],
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown preset `{other}` (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Self::new(facets)
    }

    /// Parse the text format: one facet per line, `n_1 ... n_n c`, where the
    /// normal entries are integers and the offset is a decimal or `p/q`
    /// rational. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut facets = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() < 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected `n_1 ... n_n c`, got `{line}`",
                    lineno + 1
                )));
            }
            let (normal_tokens, offset_token) = tokens.split_at(tokens.len() - 1);
            let normal = normal_tokens
                .iter()
                .map(|t| {
                    t.parse::<i64>().map_err(|_| {
                        Error::Parse(format!("line {}: `{t}` is not an integer", lineno + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let offset = parse_rational(offset_token[0]).ok_or_else(|| {
                Error::Parse(format!(
                    "line {}: `{}` is not a rational offset",
                    lineno + 1,
                    offset_token[0]
                ))
            })?;
            facets.push(Facet::new(normal, offset));
        }
        Self::new(facets)
    }

    /// Serialize back to the text format parsed by [`parse`](Self::parse).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.facets {
            for n in &f.normal {
                out.push_str(&format!("{n} "));
            }
            out.push_str(&format!("{}\n", f.offset));
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// All facet distances `l_i(x)`.
    pub fn facet_distances(&self, x: &[f64]) -> Vec<f64> {
        self.facets.iter().map(|f| f.eval(x)).collect()
    }

    pub fn min_facet_distance(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| f.eval(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.min_facet_distance(x) >= -INCIDENCE_TOL
    }

    pub fn contains_interior(&self, x: &[f64]) -> bool {
        self.min_facet_distance(x) > 0.0
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &self.vertices {
            for a in 0..self.dim {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        (lo, hi)
    }

    fn vertex_mean(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in &self.vertices {
            for a in 0..self.dim {
                c[a] += v[a];
            }
        }
        c.iter_mut().for_each(|x| *x /= self.vertices.len() as f64);
        c
    }

    fn facet_vertices(&self, i: usize) -> Vec<&Vec<f64>> {
        let f = &self.facets[i];
        self.vertices
            .iter()
            .filter(|v| f.eval(v).abs() <= INCIDENCE_TOL * (1.0 + f.offset.abs()))
            .collect()
    }

    /// Check primitivity of every normal and, at every vertex, that exactly
    /// `dim` facets meet and their normals form a Z-basis (determinant +-1).
    pub fn validate_delzant(&self) -> DelzantReport {
        let mut issues = Vec::new();
        for (i, f) in self.facets.iter().enumerate() {
            let g = f.normal.iter().fold(0i64, |acc, &n| gcd(acc, n.abs()));
            if g != 1 {
                issues.push(
                    Error::NonPrimitiveNormal {
                        facet: i,
                        normal: f.normal.clone(),
                        gcd: g,
                    }
                    .to_string(),
                );
            }
        }
        let mut vertex_determinants = Vec::with_capacity(self.vertices.len());
        for v in &self.vertices {
            let incident: Vec<&Facet> = self
                .facets
                .iter()
                .filter(|f| f.eval(v).abs() <= INCIDENCE_TOL * (1.0 + f.offset.abs()))
                .collect();
            if incident.len() != self.dim {
                issues.push(
                    Error::VertexIncidence {
                        vertex: v.clone(),
                        count: incident.len(),
                        dim: self.dim,
                    }
                    .to_string(),
                );
                vertex_determinants.push((v.clone(), None));
                continue;
            }
            let rows: Vec<Vec<i64>> = incident.iter().map(|f| f.normal.clone()).collect();
            let det = integer_determinant(&rows);
            if det.abs() != 1 {
                issues.push(
                    Error::NotUnimodular {
                        vertex: v.clone(),
                        det,
                    }
                    .to_string(),
                );
            }
            vertex_determinants.push((v.clone(), Some(det)));
        }
        DelzantReport {
            valid: issues.is_empty(),
            vertex_determinants,
            issues,
        }
    }

    /// Midpoint rule on the lattice of the given spacing anchored at the
    /// bounding-box corner. Cells cut by the boundary are represented by the
    /// centroid and volume of their part inside `P`; weights sum to `mu(P)`.
    pub fn midpoint_rule(&self, spacing: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "spacing {spacing} must be positive"
            )));
        }
        let n = self.dim();
        let cut: usize = if n <= 2 { 16 } else { 8 };
        let (lo, hi) = self.bounding_box();
        let counts: Vec<usize> = (0..n)
            .map(|a| ((hi[a] - lo[a]) / spacing - 1e-9).ceil().max(1.0) as usize)
            .collect();
        let total: usize = counts.iter().product();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut corner = vec![0.0; n];
        let mut y = vec![0.0; n];
        for cell in 0..total {
            let mut rem = cell;
            let base: Vec<f64> = counts
                .iter()
                .enumerate()
                .map(|(a, &c)| {
                    let k = rem % c;
                    rem /= c;
                    lo[a] + k as f64 * spacing
                })
                .collect();
            let full = (0..1usize << n).all(|mask| {
                for a in 0..n {
                    corner[a] = base[a] + if mask >> a & 1 == 1 { spacing } else { 0.0 };
                }
                self.contains(&corner)
            });
            if full {
                points.push(base.iter().map(|b| b + 0.5 * spacing).collect());
                weights.push(spacing.powi(n as i32));
                continue;
            }
            // sub-points on the boundary count half
            let mut count = 0.0;
            let mut centroid = vec![0.0; n];
            for sub in 0..cut.pow(n as u32) {
                let mut rem = sub;
                for a in 0..n {
                    y[a] = base[a] + ((rem % cut) as f64 + 0.5) * spacing / cut as f64;
                    rem /= cut;
                }
                let m = self.min_facet_distance(&y);
                let share = if m > INCIDENCE_TOL * spacing {
                    1.0
                } else if m >= -INCIDENCE_TOL * spacing {
                    0.5
                } else {
                    0.0
                };
                if share > 0.0 {
                    count += share;
                    centroid
                        .iter_mut()
                        .zip(&y)
                        .for_each(|(c, v)| *c += share * v);
                }
            }
            if count > 0.0 {
                centroid.iter_mut().for_each(|c| *c /= count);
                if self.contains_interior(&centroid) {
                    points.push(centroid);
                    weights.push(count * (spacing / cut as f64).powi(n as i32));
                }
            }
        }
        let scale = self.volume()? / weights.iter().sum::<f64>();
        weights.iter_mut().for_each(|w| *w *= scale);
        Ok((points, weights))
    }

    /// Euclidean volume `mu(P)`.
    pub fn volume(&self) -> Result<f64> {
        let o = self.vertex_mean();
        self.pyramid_volume(&o)
    }

    fn pyramid_volume(&self, apex: &[f64]) -> Result<f64> {
        let n = self.dim as f64;
        let mut vol = 0.0;
        for (i, f) in self.facets.iter().enumerate() {
            let height = f.eval(apex) / f.normal_norm();
            vol += height * self.facet_euclidean_volume(i)? / n;
        }
        Ok(vol)
    }

    /// Euclidean `(dim-1)`-volume of facet `i`.
    pub fn facet_euclidean_volume(&self, i: usize) -> Result<f64> {
        let verts = self.facet_vertices(i);
        match self.dim {
            1 => {
                if verts.len() == 1 {
                    Ok(1.0)
                } else {
                    Err(Error::DegenerateFacet(i))
                }
            }
            2 => {
                if verts.len() != 2 {
                    return Err(Error::DegenerateFacet(i));
                }
                Ok(dist(verts[0], verts[1]))
            }
            3 => {
                if verts.len() < 3 {
                    return Err(Error::DegenerateFacet(i));
                }
                let (area, _) = planar_polygon(&verts, &self.facets[i].normal_f64());
                Ok(area)
            }
            d => Err(Error::Unsupported(format!("measures in dimension {d}"))),
        }
    }

    /// sigma-mass per facet (Euclidean facet volume over `|n_i|`) and total.
    pub fn boundary_measure(&self) -> Result<BoundaryMeasure> {
        let facet_masses = (0..self.facets.len())
            .map(|i| Ok(self.facet_euclidean_volume(i)? / self.facets[i].normal_norm()))
            .collect::<Result<Vec<_>>>()?;
        let total = facet_masses.iter().sum();
        Ok(BoundaryMeasure {
            facet_masses,
            total,
        })
    }

    /// Centre of mass of `P` with respect to `dmu`.
    pub fn barycenter(&self) -> Result<Vec<f64>> {
        let o = self.vertex_mean();
        let n = self.dim as f64;
        let mut total = 0.0;
        let mut acc = vec![0.0; self.dim];
        for (i, f) in self.facets.iter().enumerate() {
            let height = f.eval(&o) / f.normal_norm();
            let vol = height * self.facet_euclidean_volume(i)? / n;
            let fc = self.facet_centroid(i)?;
            // centroid of a cone over a facet sits n/(n+1) of the way to the base
            for a in 0..self.dim {
                acc[a] += vol * (o[a] + n / (n + 1.0) * (fc[a] - o[a]));
            }
            total += vol;
        }
        acc.iter_mut().for_each(|x| *x /= total);
        Ok(acc)
    }

    fn facet_centroid(&self, i: usize) -> Result<Vec<f64>> {
        let verts = self.facet_vertices(i);
        match self.dim {
            1 | 2 => {
                let k = verts.len() as f64;
                if verts.is_empty() {
                    return Err(Error::DegenerateFacet(i));
                }
                Ok((0..self.dim)
                    .map(|a| verts.iter().map(|v| v[a]).sum::<f64>() / k)
                    .collect())
            }
            3 => {
                let (_, c) = planar_polygon(&verts, &self.facets[i].normal_f64());
                Ok(c)
            }
            d => Err(Error::Unsupported(format!("measures in dimension {d}"))),
        }
    }

    /// Homothety of `P` about `center` by factor `lambda in (0, 1]`: the convex
    /// hull of `center + lambda (v - center)`. Facet normals are unchanged and
    /// offsets become `c_i - (1 - lambda) l_i(center)`.
    pub fn shrink(&self, center: &[f64], lambda: f64) -> Result<Self> {
        if center.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "center has dimension {}, expected {}",
                center.len(),
                self.dim
            )));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "shrink factor {lambda} not in (0, 1]"
            )));
        }
        if !self.contains_interior(center) {
            return Err(Error::PointOutside(center.to_vec()));
        }
        if lambda == 1.0 {
            return Ok(self.clone());
        }
        let facets = self
            .facets
            .iter()
            .map(|f| Facet::new(f.normal.clone(), f.offset - (1.0 - lambda) * f.eval(center)))
            .collect();
        Self::new(facets)
    }
}

fn parse_rational(s: &str) -> Option<f64> {
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p.trim().parse::<i64>().ok()? as f64;
        let q: f64 = q.trim().parse::<i64>().ok()? as f64;
        if q == 0.0 {
            return None;
        }
        Some(p / q)
    } else {
        s.parse::<f64>().ok().filter(|x| x.is_finite())
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact determinant by cofactor expansion; only used for `dim <= 3`-ish matrices.
fn integer_determinant(rows: &[Vec<i64>]) -> i64 {
    let n = rows.len();
    match n {
        0 => 1,
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        _ => (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = rows[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * rows[0][j] * integer_determinant(&minor)
            })
            .sum(),
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn enumerate_vertices(facets: &[Facet], dim: usize) -> Vec<Vec<f64>> {
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for subset in combinations(facets.len(), dim) {
        let a = DMatrix::from_fn(dim, dim, |r, c| facets[subset[r]].normal[c] as f64);
        let b = DVector::from_fn(dim, |r, _| -facets[subset[r]].offset);
        let Some(x) = a.lu().solve(&b) else { continue };
        let x: Vec<f64> = x.iter().copied().collect();
        if !x.iter().all(|v| v.is_finite()) {
            continue;
        }
        let feasible = facets
            .iter()
            .all(|f| f.eval(&x) >= -INCIDENCE_TOL * (1.0 + f.offset.abs()));
        if feasible && !vertices.iter().any(|v| dist(v, &x) <= 1e-9) {
            vertices.push(x);
        }
    }
    vertices.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    vertices
}

/// The region `{x : l_i(x) >= 0}` is bounded iff no nonzero direction `d`
/// has `<n_i, d> >= 0` for every facet. Candidate extreme rays of that cone
/// are null directions of `dim - 1` normals.
fn check_bounded(facets: &[Facet], dim: usize) -> Result<()> {
    let normals = DMatrix::from_fn(facets.len(), dim, |r, c| facets[r].normal[c] as f64);
    if normals.rank(1e-9) < dim {
        return Err(Error::InvalidPolytope(
            "normals do not span; region is unbounded".into(),
        ));
    }
    let in_recession = |d: &[f64]| {
        facets.iter().all(|f| {
            f.normal
                .iter()
                .zip(d)
                .map(|(&n, &x)| n as f64 * x)
                .sum::<f64>()
                >= -1e-12
        })
    };
    let candidates: Vec<Vec<f64>> = if dim == 1 {
        vec![vec![1.0]]
    } else {
        combinations(facets.len(), dim - 1)
            .into_iter()
            .filter_map(|subset| {
                let m = DMatrix::from_fn(dim - 1, dim, |r, c| facets[subset[r]].normal[c] as f64);
                let eig = (m.transpose() * &m).symmetric_eigen();
                let (k, _) = eig.eigenvalues.argmin();
                let rank = eig.eigenvalues.iter().filter(|&&s| s > 1e-9).count();
                (rank == dim - 1).then(|| eig.eigenvectors.column(k).iter().copied().collect())
            })
            .collect()
    };
    for d in candidates {
        let neg: Vec<f64> = d.iter().map(|x| -x).collect();
        if in_recession(&d) || in_recession(&neg) {
            return Err(Error::InvalidPolytope("region is unbounded".into()));
        }
    }
    Ok(())
}

/// Area and centroid of a planar convex polygon in R^3 with the given normal.
fn planar_polygon(verts: &[&Vec<f64>], normal: &[f64]) -> (f64, Vec<f64>) {
    let k = verts.len() as f64;
    let c: Vec<f64> = (0..3)
        .map(|a| verts.iter().map(|v| v[a]).sum::<f64>() / k)
        .collect();
    let nn = DVector::from_column_slice(normal).normalize();
    let seed = if nn[0].abs() < 0.9 {
        DVector::from_column_slice(&[1.0, 0.0, 0.0])
    } else {
        DVector::from_column_slice(&[0.0, 1.0, 0.0])
    };
    let e1 = (&seed - &nn * nn.dot(&seed)).normalize();
    let e2 = DVector::from_column_slice(&[
        nn[1] * e1[2] - nn[2] * e1[1],
        nn[2] * e1[0] - nn[0] * e1[2],
        nn[0] * e1[1] - nn[1] * e1[0],
    ]);
    let mut pts: Vec<(f64, f64)> = verts
        .iter()
        .map(|v| {
            let d = DVector::from_fn(3, |a, _| v[a] - c[a]);
            (d.dot(&e1), d.dot(&e2))
        })
        .collect();
    pts.sort_by(|a, b| {
        a.1.atan2(a.0)
            .partial_cmp(&b.1.atan2(b.0))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut area2 = 0.0;
    let (mut cx, mut cy) = (0.0, 0.0);
    for j in 0..pts.len() {
        let (x0, y0) = pts[j];
        let (x1, y1) = pts[(j + 1) % pts.len()];
        let cross = x0 * y1 - x1 * y0;
        area2 += cross;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    let area = area2 / 2.0;
    let (cx, cy) = (cx / (3.0 * area2), cy / (3.0 * area2));
    let centroid = (0..3).map(|a| c[a] + cx * e1[a] + cy * e2[a]).collect();
    (area.abs(), centroid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn midpoint_rule_moments() {
        let s = DelzantPolytope::preset("simplex").unwrap();
        let (pts, w) = s.midpoint_rule(1.0 / 20.0).unwrap();
        assert_relative_eq!(w.iter().sum::<f64>(), 0.5, epsilon = 1e-12);
        assert!(pts.iter().all(|x| s.contains_interior(x)));
        let mx: f64 = pts.iter().zip(&w).map(|(x, w)| w * x[0]).sum();
        assert_relative_eq!(mx, 1.0 / 6.0, epsilon = 1e-4);
        let q = DelzantPolytope::preset("square").unwrap();
        let (pts, w) = q.midpoint_rule(0.25).unwrap();
        assert_eq!(pts.len(), 16);
        assert!(w.iter().all(|&v| (v - 0.0625).abs() < 1e-15));
        assert!(s.midpoint_rule(0.0).is_err());
    }

    #[test]
    fn presets_are_delzant() {
        for name in PRESETS {
            let p = DelzantPolytope::preset(name).unwrap();
            let report = p.validate_delzant();
            assert!(report.valid, "{name}: {:?}", report.issues);
            for (_, det) in &report.vertex_determinants {
                assert_eq!(det.map(i64::abs), Some(1));
            }
        }
    }

    #[test]
    fn non_primitive_normal_rejected() {
        let p = DelzantPolytope::new(vec![
            Facet::new(vec![2, 0], 0.0),
            Facet::new(vec![0, 1], 0.0),
            Facet::new(vec![-1, 0], 1.0),
            Facet::new(vec![0, -1], 1.0),
        ])
        .unwrap();
        let report = p.validate_delzant();
        assert!(!report.valid);
        assert!(report.issues[0].contains("not primitive"));
    }

    #[test]
    fn non_unimodular_vertex_rejected() {
        // {x >= 0, y >= 0, 2 - x - 2y >= 0}: vertex (0,1) pairs (1,0) with (-1,-2), det -2.
        let p = DelzantPolytope::new(vec![
            Facet::new(vec![1, 0], 0.0),
            Facet::new(vec![0, 1], 0.0),
            Facet::new(vec![-1, -2], 2.0),
        ])
        .unwrap();
        let report = p.validate_delzant();
        assert!(!report.valid);
        assert!(report
            .vertex_determinants
            .iter()
            .any(|(_, d)| d.map(i64::abs) == Some(2)));
    }

    #[test]
    fn unbounded_region_rejected() {
        let err = DelzantPolytope::new(vec![
            Facet::new(vec![1, 0], 0.0),
            Facet::new(vec![0, 1], 0.0),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::InvalidPolytope(_)));
    }

    #[test]
    fn preset_measures() {
        let sq = DelzantPolytope::preset("square").unwrap();
        let m = sq.boundary_measure().unwrap();
        assert_eq!(m.facet_masses, vec![1.0; 4]);
        assert_relative_eq!(m.total, 4.0);
        assert_relative_eq!(sq.volume().unwrap(), 1.0, epsilon = 1e-14);

        let s = DelzantPolytope::preset("simplex").unwrap();
        assert_relative_eq!(s.boundary_measure().unwrap().total, 3.0, epsilon = 1e-12);
        assert_relative_eq!(s.volume().unwrap(), 0.5, epsilon = 1e-14);

        let i = DelzantPolytope::preset("interval").unwrap();
        let m = i.boundary_measure().unwrap();
        assert_eq!(m.facet_masses, vec![1.0, 1.0]);
        assert_relative_eq!(i.volume().unwrap(), 1.0);
    }

    #[test]
    fn cube_measures_in_three_dimensions() {
        let cube =
            DelzantPolytope::parse("1 0 0 0\n0 1 0 0\n0 0 1 0\n-1 0 0 1\n0 -1 0 1\n0 0 -1 1\n")
                .unwrap();
        assert!(cube.validate_delzant().valid);
        assert_relative_eq!(cube.volume().unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(cube.boundary_measure().unwrap().total, 6.0, epsilon = 1e-12);
        let c = cube.barycenter().unwrap();
        for x in c {
            assert_relative_eq!(x, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn barycenter_of_simplex() {
        let s = DelzantPolytope::preset("simplex").unwrap();
        let c = s.barycenter().unwrap();
        assert_relative_eq!(c[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(c[1], 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn shrink_examples() {
        let sq = DelzantPolytope::preset("square").unwrap();
        let half = sq.shrink(&[0.5, 0.5], 0.5).unwrap();
        let (lo, hi) = half.bounding_box();
        assert_relative_eq!(lo[0], 0.25);
        assert_relative_eq!(lo[1], 0.25);
        assert_relative_eq!(hi[0], 0.75);
        assert_relative_eq!(hi[1], 0.75);
        assert_eq!(sq.shrink(&[0.3, 0.6], 1.0).unwrap(), sq);

        let i = DelzantPolytope::preset("interval").unwrap();
        let s = i.shrink(&[0.5], 0.5).unwrap();
        assert_eq!(s.vertices(), &[vec![0.25], vec![0.75]]);

        assert!(matches!(
            sq.shrink(&[1.5, 0.5], 0.5),
            Err(Error::PointOutside(_))
        ));
    }

    #[test]
    fn parse_round_trip_and_rationals() {
        let p = DelzantPolytope::parse("# simplex\n1 0 0\n0 1 0\n-1 -1 2/2\n").unwrap();
        assert_eq!(p, DelzantPolytope::preset("simplex").unwrap());
        assert_eq!(DelzantPolytope::parse(&p.to_text()).unwrap(), p);
        assert!(matches!(
            DelzantPolytope::parse("1 x 0"),
            Err(Error::Parse(_))
        ));
    }
}
