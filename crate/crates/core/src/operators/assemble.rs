use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::sparse::{BandLu, CsrMatrix};
use super::{EllipticOperator, Grid, GridFunction, Layout};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::scalar::Real;

/// Description of the stencil used by [`assemble`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StencilInfo {
    pub layout: &'static str,
    /// Largest number of nonzeros in a row.
    pub points: usize,
    pub mixed_terms: bool,
    pub drift_terms: bool,
}

/// The matrix of `-𝓛` on interior nodes (Dirichlet rows eliminated), with its factorization.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T> {
    grid: Arc<Grid<T>>,
    matrix: CsrMatrix<T>,
    lu: BandLu<T>,
    stencil: StencilInfo,
    potential_max: T,
}

/// Sign structure of an assembled matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MMatrixReport {
    pub nonpositive_off_diagonal: bool,
    pub positive_diagonal: bool,
    /// Row sums are nonnegative; required when `c ≤ 0`.
    pub nonnegative_row_sums: bool,
    pub potential_nonpositive: bool,
    /// All pivots of the pivot-free LU are positive, so the Z-matrix is a nonsingular M-matrix.
    pub positive_pivots: bool,
}

impl MMatrixReport {
    pub fn is_m_matrix(&self) -> bool {
        self.nonpositive_off_diagonal
            && self.positive_diagonal
            && self.positive_pivots
            && (self.nonnegative_row_sums || !self.potential_nonpositive)
    }
}

impl<T: Real> DiscreteOperator<T> {
    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn stencil(&self) -> &StencilInfo {
        &self.stencil
    }

    pub fn apply(&self, u: &GridFunction<T>) -> GridFunction<T> {
        let v = self.matrix.matvec(u.values());
        GridFunction::new(self.grid.clone(), v).expect("matvec preserves length")
    }

    pub fn m_matrix_report(&self) -> MMatrixReport {
        let diag = self.matrix.diagonal();
        let scale = self.matrix.norm_inf() * T::tol(1e-13);
        MMatrixReport {
            nonpositive_off_diagonal: self.matrix.max_off_diagonal() <= scale,
            positive_diagonal: diag.iter().all(|&d| d > T::zero()),
            nonnegative_row_sums: self.matrix.row_sums().iter().all(|&s| s >= -scale),
            potential_nonpositive: self.potential_max <= T::zero(),
            positive_pivots: self.lu.pivots().iter().all(|&p| p > T::zero()),
        }
    }

    pub(crate) fn solve_raw(&self, rhs: &[T]) -> Vec<T> {
        self.lu.solve(rhs)
    }
}

type Offset = Vec<i32>;

fn axis_offset(dim: usize, axis: usize, step: i32) -> Offset {
    let mut o = vec![0; dim];
    o[axis] = step;
    o
}

fn check_coefficients<T: Real>(op: &EllipticOperator<T>, x: &[T], node: usize) -> Result<(Vec<T>, Vec<T>, T)> {
    let n = op.dim();
    let a = op.diffusion_at(x);
    let b = op.drift_at(x);
    let c = op.potential_at(x);
    if a.len() != n * n || b.len() != n {
        return Err(Error::Mismatch(format!(
            "operator of dim {n} returned {} diffusion and {} drift entries",
            a.len(),
            b.len()
        )));
    }
    let bounds = op.bounds();
    let slack = T::tol(1e-12);
    let lo = bounds.c0 - slack * bounds.c0.abs().max(T::one());
    let hi = bounds.big_c0 + slack * bounds.big_c0.abs().max(T::one());
    for k in 0..n {
        for l in 0..k {
            if (a[k * n + l] - a[l * n + k]).abs() > slack * (a[k * n + k].abs() + a[l * n + l].abs()) {
                return Err(Error::Ellipticity { node, detail: format!("diffusion not symmetric in ({k},{l})") });
            }
        }
    }
    let form = |xi: &[T]| -> T {
        let mut s = T::zero();
        for k in 0..n {
            for l in 0..n {
                s = s + a[k * n + l] * xi[k] * xi[l];
            }
        }
        s
    };
    let inv_sqrt2 = T::lit(0.5).sqrt();
    let mut directions: Vec<Vec<T>> = (0..n)
        .map(|k| {
            let mut e = vec![T::zero(); n];
            e[k] = T::one();
            e
        })
        .collect();
    for k in 0..n {
        for l in k + 1..n {
            for sign in [T::one(), -T::one()] {
                let mut e = vec![T::zero(); n];
                e[k] = inv_sqrt2;
                e[l] = sign * inv_sqrt2;
                directions.push(e);
            }
        }
    }
    for xi in &directions {
        let q = form(xi);
        if q < lo || q > hi {
            return Err(Error::Ellipticity {
                node,
                detail: format!("a(x)ξ·ξ = {q} outside [{}, {}] for ξ = {xi:?}", bounds.c0, bounds.big_c0),
            });
        }
    }
    let bnorm = b.iter().map(|&v| v * v).sum::<T>().sqrt();
    let btol = bounds.b0 + slack * bounds.b0.max(T::one());
    if bnorm > btol || c.abs() > btol {
        return Err(Error::CoefficientBound {
            node,
            detail: format!("|b| = {bnorm}, |c| = {} exceed b0 = {}", c.abs(), bounds.b0),
        });
    }
    Ok((a, b, c))
}

/// Assembles `-𝓛` with central second differences, sign-adapted 7-point mixed
/// stencils, upwind first differences and the potential on the diagonal.
pub fn assemble<T: Real>(op: &EllipticOperator<T>, d: &Domain<T>) -> Result<DiscreteOperator<T>> {
    if op.dim() != d.dim() {
        return Err(Error::Mismatch(format!("operator dim {} vs domain dim {}", op.dim(), d.dim())));
    }
    let grid = Grid::new(d);
    let (rows, stencil, potential_max) = match grid.layout().clone() {
        Layout::Cartesian { shape, spacing } => assemble_cartesian(op, &grid, &shape, &spacing)?,
        Layout::Radial { nodes, h } => assemble_radial(op, &grid, nodes, h)?,
    };
    let matrix = CsrMatrix::from_rows(rows);
    let lu = BandLu::factor(&matrix)?;
    Ok(DiscreteOperator { grid, matrix, lu, stencil, potential_max })
}

#[allow(clippy::type_complexity)]
fn assemble_cartesian<T: Real>(
    op: &EllipticOperator<T>,
    grid: &Grid<T>,
    shape: &[usize],
    spacing: &[T],
) -> Result<(Vec<Vec<(usize, T)>>, StencilInfo, T)> {
    let n = grid.dim();
    let zero_tol = T::tol(1e-13);
    let mut rows = Vec::with_capacity(grid.len());
    let mut points = 0;
    let mut mixed_terms = false;
    let mut drift_terms = false;
    let mut potential_max = T::neg_infinity();
    for i in 0..grid.len() {
        let x = grid.point(i);
        let (a, b, c) = check_coefficients(op, x, i)?;
        potential_max = potential_max.max(c);
        let mut st: BTreeMap<Offset, T> = BTreeMap::new();
        let mut add = |o: Offset, v: T| {
            let e = st.entry(o).or_insert(T::zero());
            *e = *e + v;
        };
        let center = vec![0; n];
        for k in 0..n {
            let akk = a[k * n + k] / (spacing[k] * spacing[k]);
            add(center.clone(), akk + akk);
            add(axis_offset(n, k, 1), -akk);
            add(axis_offset(n, k, -1), -akk);
        }
        for k in 0..n {
            for l in k + 1..n {
                let akl = a[k * n + l];
                if akl.abs() <= zero_tol * (a[k * n + k].abs() + a[l * n + l].abs()) {
                    continue;
                }
                mixed_terms = true;
                let s = akl.abs() / (spacing[k] * spacing[l]);
                for step in [1, -1] {
                    add(axis_offset(n, k, step), s);
                    add(axis_offset(n, l, step), s);
                }
                add(center.clone(), -(s + s));
                let sign = if akl > T::zero() { 1 } else { -1 };
                for step in [1, -1] {
                    let mut o = vec![0; n];
                    o[k] = step;
                    o[l] = step * sign;
                    add(o, -s);
                }
            }
        }
        for k in 0..n {
            let bk = b[k];
            if bk == T::zero() {
                continue;
            }
            drift_terms = true;
            let w = bk.abs() / spacing[k];
            // forward difference for b_k > 0, backward for b_k < 0: the neighbour
            // entry of -b_k ∂_k u is then -|b_k|/h_k
            add(axis_offset(n, k, if bk > T::zero() { 1 } else { -1 }), -w);
            add(center.clone(), w);
        }
        add(center.clone(), -c);

        let diag_scale = st.get(&center).copied().unwrap_or(T::zero()).abs().max(T::one());
        for (o, &v) in &st {
            if o != &center && v > zero_tol * diag_scale {
                let axis = o.iter().position(|&s| s != 0).unwrap_or(0);
                return Err(Error::MonotonicityLoss { node: i, axis });
            }
        }
        let idx = grid.multi_index(i);
        let mut row = Vec::with_capacity(st.len());
        'entries: for (o, v) in st {
            let mut j = 0usize;
            for k in 0..n {
                let p = idx[k] as i64 + o[k] as i64;
                if p < 0 || p >= shape[k] as i64 {
                    continue 'entries;
                }
                j += p as usize * grid.stride(k);
            }
            if v != T::zero() || j == i {
                row.push((j, v));
            }
        }
        points = points.max(row.len());
        rows.push(row);
    }
    let info = StencilInfo { layout: "cartesian", points, mixed_terms, drift_terms };
    Ok((rows, info, potential_max))
}

#[allow(clippy::type_complexity)]
fn assemble_radial<T: Real>(
    op: &EllipticOperator<T>,
    grid: &Grid<T>,
    nodes: usize,
    h: T,
) -> Result<(Vec<Vec<(usize, T)>>, StencilInfo, T)> {
    let n = grid.dim();
    let half = h * T::lit(0.5);
    let nn = T::of(n);
    let tol = T::tol(1e-10);
    let mut rows = Vec::with_capacity(nodes);
    let mut drift_terms = false;
    let mut potential_max = T::neg_infinity();
    for j in 0..nodes {
        let x = grid.point(j);
        let (a, b, c) = check_coefficients(op, x, j)?;
        potential_max = potential_max.max(c);
        let r = x[0];
        let diffusion = a[0];
        let scale = diffusion.abs().max(T::one());
        for k in 0..n {
            for l in 0..n {
                let expect = if k == l { diffusion } else { T::zero() };
                if (a[k * n + l] - expect).abs() > tol * scale {
                    return Err(Error::NonRadial(format!("diffusion is not isotropic at r = {r}")));
                }
            }
        }
        let beta = b[0];
        if b[1..].iter().any(|v| v.abs() > tol * beta.abs().max(T::one())) {
            return Err(Error::NonRadial(format!("drift is not radial at r = {r}")));
        }
        if n >= 2 {
            let mut y = vec![T::zero(); n];
            y[1] = r;
            let a2 = op.diffusion_at(&y);
            let b2 = op.drift_at(&y);
            let c2 = op.potential_at(&y);
            let same = |p: T, q: T| (p - q).abs() <= tol * p.abs().max(q.abs()).max(T::one());
            if !same(a2[n + 1], diffusion) || !same(b2[1], beta) || !same(c2, c) {
                return Err(Error::NonRadial(format!("coefficients differ between axes at r = {r}")));
            }
        }

        let mut row = Vec::with_capacity(3);
        if j == 0 {
            let w = nn * T::lit(2.0) * diffusion / (h * h);
            row.push((0, w - c));
            if nodes > 1 {
                row.push((1, -w));
            }
        } else {
            let vol = ((r + half).powi(n as i32) - (r - half).powi(n as i32)) / nn;
            let up = diffusion * (r + half).powi(n as i32 - 1) / (h * vol);
            let down = diffusion * (r - half).powi(n as i32 - 1) / (h * vol);
            let mut diag = up + down - c;
            let mut lower = -down;
            let mut upper = -up;
            if beta != T::zero() {
                drift_terms = true;
                let w = beta.abs() / h;
                diag = diag + w;
                if beta > T::zero() {
                    upper = upper - w;
                } else {
                    lower = lower - w;
                }
            }
            row.push((j - 1, lower));
            row.push((j, diag));
            if j + 1 < nodes {
                row.push((j + 1, upper));
            }
        }
        rows.push(row);
    }
    let info = StencilInfo { layout: "radial", points: 3, mixed_terms: false, drift_terms };
    Ok((rows, info, potential_max))
}

/// Solves `A u = f`, refining until the relative residual is at most `1e-10` (or the
/// backward-error floor `64 ε ‖A‖ ‖u‖ / ‖f‖` of the scalar type, if larger).
pub fn solve_dirichlet<T: Real>(a: &DiscreteOperator<T>, f: &GridFunction<T>) -> Result<GridFunction<T>> {
    if f.len() != a.grid().len() {
        return Err(Error::Mismatch(format!("rhs has {} values, operator {}", f.len(), a.grid().len())));
    }
    let rhs = f.values();
    let fnorm = norm2(rhs);
    if fnorm == T::zero() {
        return Ok(GridFunction::zeros(a.grid().clone()));
    }
    let mut u = a.solve_raw(rhs);
    let a_norm = a.matrix().norm_inf();
    let mut res = f64::INFINITY;
    let mut tol = T::tol(1e-10);
    for _ in 0..4 {
        let r: Vec<T> = a.matrix().matvec(&u).iter().zip(rhs).map(|(&au, &b)| b - au).collect();
        let rel = norm2(&r) / fnorm;
        // what the working precision can resolve for this conditioning; binds only in f32
        let floor = T::epsilon() * T::lit(64.0) * a_norm * norm2(&u) / fnorm;
        tol = T::tol(1e-10).max(floor);
        res = rel.f64();
        if !rel.is_finite() {
            break;
        }
        if rel <= tol {
            return GridFunction::new(a.grid().clone(), u);
        }
        let du = a.solve_raw(&r);
        for (x, d) in u.iter_mut().zip(du) {
            *x = *x + d;
        }
    }
    Err(Error::LinearSolve { residual: res, tol: tol.f64() })
}

pub(crate) fn norm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}
