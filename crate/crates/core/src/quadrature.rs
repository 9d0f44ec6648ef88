//! Graded midpoint quadrature for power-law singular integrands on the lower
//! triangle `{u < s}`.
//!
//! Cells accumulate geometrically at declared singular lines and kinks, from
//! an inner cutoff `eps` outward, with `cells_per_decade` cells per factor of
//! ten in distance. Once a geometric cell would exceed `max_cell_width` the
//! grid continues uniformly. A band of half-width `eps` around each graded
//! line is left out. Geometric nodes are anchored at powers of ten, so
//! refining `eps` by whole decades only adds cells.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::levy::Singularity;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub outer_cutoff: f64,
    pub inner_cutoff: f64,
    pub cells_per_decade: usize,
    pub max_cell_width: f64,
    #[serde(skip)]
    pub singular_points: Vec<Singularity>,
}

impl QuadratureSpec {
    pub fn new(outer_cutoff: f64, inner_cutoff: f64, cells_per_decade: usize) -> Result<Self> {
        if !(inner_cutoff > 0.0 && inner_cutoff < 1.0) {
            return Err(param("inner_cutoff", inner_cutoff, "must lie in (0, 1)"));
        }
        if !(outer_cutoff > 1.0) || !outer_cutoff.is_finite() {
            return Err(param("outer_cutoff", outer_cutoff, "must be finite and exceed 1"));
        }
        if cells_per_decade < 4 {
            return Err(param("cells_per_decade", cells_per_decade as f64, "must be at least 4"));
        }
        Ok(Self {
            outer_cutoff,
            inner_cutoff,
            cells_per_decade,
            max_cell_width: 0.25,
            singular_points: Vec::new(),
        })
    }

    pub fn with_outer_cutoff(&self, outer_cutoff: f64) -> Result<Self> {
        let mut q = Self::new(outer_cutoff, self.inner_cutoff, self.cells_per_decade)?;
        q.max_cell_width = self.max_cell_width;
        q.singular_points = self.singular_points.clone();
        Ok(q)
    }

    pub fn with_inner_cutoff(&self, inner_cutoff: f64) -> Result<Self> {
        let mut q = Self::new(self.outer_cutoff, inner_cutoff, self.cells_per_decade)?;
        q.max_cell_width = self.max_cell_width;
        q.singular_points = self.singular_points.clone();
        Ok(q)
    }

    pub fn with_max_cell_width(mut self, w: f64) -> Self {
        self.max_cell_width = w;
        self
    }

    pub fn with_singular_points(mut self, points: Vec<Singularity>) -> Self {
        self.singular_points = points;
        self
    }
}

/// A midpoint-rule cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub mid: f64,
    pub width: f64,
}

/// Distances from a graded end at which cell boundaries sit, up to `length`.
fn graded_offsets(length: f64, eps: f64, cpd: usize, max_w: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if length <= eps {
        return out;
    }
    out.push(eps);
    let step = 1.0 / cpd as f64;
    let mut k = (eps.log10() * cpd as f64).floor() as i64 + 1;
    let mut d = eps;
    loop {
        let geo = 10f64.powf(k as f64 * step);
        if geo - d > max_w {
            break;
        }
        if geo >= length {
            out.push(length);
            return out;
        }
        out.push(geo);
        d = geo;
        k += 1;
    }
    loop {
        d += max_w;
        if d >= length {
            out.push(length);
            return out;
        }
        out.push(d);
    }
}

fn uniform_cells(a: f64, b: f64, max_w: f64, out: &mut Vec<Cell>) {
    let n = ((b - a) / max_w).ceil().max(1.0) as usize;
    let w = (b - a) / n as f64;
    out.extend((0..n).map(|i| Cell {
        mid: a + (i as f64 + 0.5) * w,
        width: w,
    }));
}

fn push_offsets(anchor: f64, sign: f64, offsets: &[f64], out: &mut Vec<Cell>) {
    for pair in offsets.windows(2) {
        let (x0, x1) = (anchor + sign * pair[0], anchor + sign * pair[1]);
        out.push(Cell {
            mid: 0.5 * (x0 + x1),
            width: (x1 - x0).abs(),
        });
    }
}

/// Cells covering `(a, b)` graded toward every breakpoint strictly inside it
/// and toward the ends flagged in `grade_ends`.
pub fn graded_cells(
    a: f64,
    b: f64,
    breakpoints: &[f64],
    grade_ends: (bool, bool),
    eps: f64,
    cpd: usize,
    max_w: f64,
) -> Vec<Cell> {
    let mut cells = Vec::new();
    if !(b > a) {
        return cells;
    }
    let mut pts: Vec<(f64, bool)> = vec![(a, grade_ends.0)];
    let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner.into_iter().map(|x| (x, true)));
    pts.push((b, grade_ends.1));

    for seg in pts.windows(2) {
        let ((lo, glo), (hi, ghi)) = (seg[0], seg[1]);
        let len = hi - lo;
        match (glo, ghi) {
            (false, false) => uniform_cells(lo, hi, max_w, &mut cells),
            (true, false) => push_offsets(lo, 1.0, &graded_offsets(len, eps, cpd, max_w), &mut cells),
            (false, true) => push_offsets(hi, -1.0, &graded_offsets(len, eps, cpd, max_w), &mut cells),
            (true, true) => {
                let half = 0.5 * len;
                push_offsets(lo, 1.0, &graded_offsets(half, eps, cpd, max_w), &mut cells);
                push_offsets(hi, -1.0, &graded_offsets(half, eps, cpd, max_w), &mut cells);
            }
        }
    }
    cells
}

/// Midpoint-rule integral of `g` over `{u < s} ∩ [-Λ, Λ]^2`, graded toward
/// `spec.singular_points` plus the extra lines in `lines`.
pub fn integrate_lower_triangle<G>(g: G, spec: &QuadratureSpec, lines: &[Singularity]) -> Result<f64>
where
    G: Fn(f64, f64) -> f64,
{
    let lam = spec.outer_cutoff;
    let all: Vec<Singularity> = spec.singular_points.iter().chain(lines).copied().collect();
    let s_breaks: Vec<f64> = all
        .iter()
        .filter_map(|l| match l {
            Singularity::SAxis(x) => Some(*x),
            _ => None,
        })
        .collect();
    let u_fixed: Vec<f64> = all
        .iter()
        .filter_map(|l| match l {
            Singularity::UAxis(x) => Some(*x),
            _ => None,
        })
        .collect();
    let offsets: Vec<f64> = all
        .iter()
        .filter_map(|l| match l {
            Singularity::Diagonal(d) => Some(*d),
            _ => None,
        })
        .collect();
    let diagonal_graded = offsets.contains(&0.0);

    let outer = graded_cells(
        -lam,
        lam,
        &s_breaks,
        (false, false),
        spec.inner_cutoff,
        spec.cells_per_decade,
        spec.max_cell_width,
    );
    let mut total = 0.0;
    let mut u_breaks = Vec::with_capacity(u_fixed.len() + offsets.len());
    for sc in &outer {
        let s = sc.mid;
        u_breaks.clear();
        u_breaks.extend(u_fixed.iter().copied());
        u_breaks.extend(offsets.iter().filter(|&&d| d > 0.0).map(|d| s - d));
        let inner = graded_cells(
            -lam,
            s,
            &u_breaks,
            (false, diagonal_graded),
            spec.inner_cutoff,
            spec.cells_per_decade,
            spec.max_cell_width,
        );
        let mut row = 0.0;
        for uc in &inner {
            let v = g(s, uc.mid);
            if !v.is_finite() {
                return Err(Error::Quadrature { s, u: uc.mid });
            }
            row += v * uc.width;
        }
        total += row * sc.width;
    }
    Ok(total)
}

/// One-dimensional graded midpoint integral of `g` over `(a, b)`.
pub fn integrate_line<G>(g: G, a: f64, b: f64, breakpoints: &[f64], eps: f64, cpd: usize, max_w: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    let mut total = 0.0;
    for c in graded_cells(a, b, breakpoints, (false, false), eps, cpd, max_w) {
        let v = g(c.mid);
        if !v.is_finite() {
            return Err(Error::Quadrature { s: c.mid, u: f64::NAN });
        }
        total += v * c.width;
    }
    Ok(total)
}
