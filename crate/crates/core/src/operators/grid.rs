use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume, Domain, DomainKind};
use crate::operators::ScalarField;
use crate::scalar::Real;

/// Node layout of a discretized domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout<T> {
    /// Interior nodes of a uniform tensor grid; `shape[k]` interior nodes along axis `k`,
    /// axis 0 varying fastest.
    Cartesian { shape: Vec<usize>, spacing: Vec<T> },
    /// Radial nodes `r_j = j·h`, `j = 0..nodes`, of a ball; `r = nodes·h` is the boundary.
    Radial { nodes: usize, h: T },
}

/// Unknowns of a Dirichlet problem on a [`Domain`]: coordinates and quadrature weights.
#[derive(Debug, Clone)]
pub struct Grid<T> {
    domain: Domain<T>,
    layout: Layout<T>,
    coords: Vec<T>,
    weights: Vec<T>,
}

impl<T: Real> Grid<T> {
    pub fn new(domain: &Domain<T>) -> Arc<Self> {
        let dim = domain.dim();
        let (layout, coords, weights) = match domain.kind() {
            DomainKind::Interval { .. } | DomainKind::Box { .. } => {
                let extents = domain.extents();
                let res = domain.resolution();
                let spacing: Vec<T> = extents.iter().zip(res).map(|(&l, &n)| l / T::of(n)).collect();
                let shape: Vec<usize> = res.iter().map(|&n| n - 1).collect();
                let count: usize = shape.iter().product();
                let cell = spacing.iter().fold(T::one(), |acc, &h| acc * h);
                let mut coords = Vec::with_capacity(count * dim);
                let mut idx = vec![0usize; dim];
                for _ in 0..count {
                    for k in 0..dim {
                        coords.push(T::of(idx[k] + 1) * spacing[k]);
                    }
                    for k in 0..dim {
                        idx[k] += 1;
                        if idx[k] < shape[k] {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
                (Layout::Cartesian { shape, spacing }, coords, vec![cell; count])
            }
            DomainKind::Ball { radius } => {
                let nodes = domain.resolution()[0];
                let h = *radius / T::of(nodes);
                let half = h * T::lit(0.5);
                let vol = unit_ball_volume::<T>(dim);
                let mut coords = Vec::with_capacity(nodes * dim);
                let mut weights = Vec::with_capacity(nodes);
                for j in 0..nodes {
                    let r = T::of(j) * h;
                    coords.push(r);
                    coords.extend(std::iter::repeat_n(T::zero(), dim - 1));
                    let inner = (r - half).max(T::zero());
                    weights.push(vol * ((r + half).powi(dim as i32) - inner.powi(dim as i32)));
                }
                (Layout::Radial { nodes, h }, coords, weights)
            }
        };
        Arc::new(Self { domain: domain.clone(), layout, coords, weights })
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn layout(&self) -> &Layout<T> {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical coordinates of node `i` (radial nodes lie on the first axis).
    pub fn point(&self, i: usize) -> &[T] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    /// Quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Stride of axis `k` in the linear node index (Cartesian layouts).
    pub(crate) fn stride(&self, axis: usize) -> usize {
        match &self.layout {
            Layout::Cartesian { shape, .. } => shape[..axis].iter().product(),
            Layout::Radial { .. } => 1,
        }
    }

    /// Multi-index of node `i` (Cartesian layouts).
    pub(crate) fn multi_index(&self, mut i: usize) -> Vec<usize> {
        match &self.layout {
            Layout::Cartesian { shape, .. } => shape
                .iter()
                .map(|&s| {
                    let r = i % s;
                    i /= s;
                    r
                })
                .collect(),
            Layout::Radial { .. } => vec![i],
        }
    }
}

/// Nodal values on the interior nodes of a [`Grid`].
#[derive(Debug, Clone)]
pub struct GridFunction<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!("grid has {} nodes, got {} values", grid.len(), values.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values }
    }

    pub fn constant(grid: Arc<Grid<T>>, value: T) -> Self {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    /// Samples `field` at every node. On ball grids the field must be radial: it is
    /// sampled along the first axis and compared against the second.
    pub fn from_field(grid: Arc<Grid<T>>, field: &ScalarField<T>) -> Result<Self> {
        let values: Vec<T> = (0..grid.len()).map(|i| field.eval(grid.point(i))).collect();
        if let Layout::Radial { .. } = grid.layout() {
            let d = grid.dim();
            if d >= 2 && field.as_constant().is_none() {
                let mut rotated = vec![T::zero(); d];
                for (i, &v) in values.iter().enumerate() {
                    rotated[1] = grid.point(i)[0];
                    let w = field.eval(&rotated);
                    let scale = v.abs().max(w.abs()).max(T::one());
                    if (v - w).abs() > T::tol(1e-10) * scale {
                        return Err(Error::NonRadial(format!(
                            "weight differs between axes at r = {} ({} vs {})",
                            grid.point(i)[0],
                            v,
                            w
                        )));
                    }
                }
            }
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Weighted inner product `∫ u v`.
    pub fn inner(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).zip(self.grid.weights()).map(|((&a, &b), &w)| w * a * b).sum()
    }

    pub fn l2_norm(&self) -> T {
        self.inner(self).sqrt()
    }

    pub fn linf_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    /// `(∫ |u|^q)^{1/q}`, `q ≥ 1`.
    pub fn lq_norm(&self, q: T) -> T {
        let s: T = self.values.iter().zip(self.grid.weights()).map(|(&v, &w)| w * v.abs().powf(q)).sum();
        s.powf(q.recip())
    }

    /// Discrete `‖∇u‖_{L²}` with zero Dirichlet data, consistent with the assembled Laplacian.
    pub fn h1_seminorm(&self) -> T {
        let u = &self.values;
        let g = &self.grid;
        let mut acc = T::zero();
        match g.layout() {
            Layout::Cartesian { shape, spacing } => {
                let cell = spacing.iter().fold(T::one(), |a, &h| a * h);
                for (k, (&nk, &hk)) in shape.iter().zip(spacing).enumerate() {
                    let stride = g.stride(k);
                    for i in 0..u.len() {
                        let ik = g.multi_index(i)[k];
                        // edge to the lower neighbour (boundary value 0 at ik == 0)
                        let lower = if ik == 0 { T::zero() } else { u[i - stride] };
                        let d = (u[i] - lower) / hk;
                        acc = acc + d * d * cell;
                        if ik + 1 == nk {
                            let d = u[i] / hk;
                            acc = acc + d * d * cell;
                        }
                    }
                }
            }
            Layout::Radial { nodes, h } => {
                let n = g.dim();
                let surf = T::of(n) * unit_ball_volume::<T>(n);
                for j in 0..*nodes {
                    let next = if j + 1 < *nodes { u[j + 1] } else { T::zero() };
                    let r = (T::of(j) + T::lit(0.5)) * *h;
                    let d = (next - u[j]) / *h;
                    acc = acc + d * d * surf * r.powi(n as i32 - 1) * *h;
                }
            }
        }
        acc.sqrt()
    }

    /// Writes `coordinate columns…,value` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_columns_csv(&[("value", self)], out)
    }
}

/// Writes coordinate columns followed by one named column per function; all functions
/// must have the same length as the first.
pub fn write_columns_csv<T: Real, W: Write>(columns: &[(&str, &GridFunction<T>)], mut out: W) -> Result<()> {
    let Some((_, first)) = columns.first() else {
        return Err(Error::Mismatch("no columns to write".into()));
    };
    let g = first.grid();
    if columns.iter().any(|(_, f)| f.len() != g.len()) {
        return Err(Error::Mismatch("columns live on different grids".into()));
    }
    let mut header: Vec<String> = match g.layout() {
        Layout::Radial { .. } => vec!["r".to_string()],
        Layout::Cartesian { .. } if g.dim() == 1 => vec!["x".to_string()],
        Layout::Cartesian { .. } => (1..=g.dim()).map(|k| format!("x{k}")).collect(),
    };
    header.extend(columns.iter().map(|(name, _)| name.to_string()));
    writeln!(out, "{}", header.join(","))?;
    for i in 0..g.len() {
        let mut cells: Vec<String> = match g.layout() {
            Layout::Radial { .. } => vec![crate::fmt_float(g.point(i)[0].f64())],
            Layout::Cartesian { .. } => g.point(i).iter().map(|x| crate::fmt_float(x.f64())).collect(),
        };
        cells.extend(columns.iter().map(|(_, f)| crate::fmt_float(f.values()[i].f64())));
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interval_nodes_and_weights() {
        let g = Grid::new(&Domain::<f64>::interval(1.0, 8).unwrap());
        assert_eq!(g.len(), 7);
        assert!((g.point(0)[0] - 0.125).abs() < 1e-15);
        assert!((g.weights().iter().sum::<f64>() - 7.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn box_indexing_is_axis0_fastest() {
        let g = Grid::new(&Domain::cuboid(vec![1.0, 2.0], vec![8, 16]).unwrap());
        assert_eq!(g.len(), 7 * 15);
        assert_eq!(g.stride(1), 7);
        assert_eq!(g.multi_index(8), vec![1, 1]);
        assert_eq!(g.point(8), &[0.25, 0.25]);
    }

    #[test]
    fn sine_norms_match_quadrature() {
        let g = Grid::new(&Domain::interval(1.0, 256).unwrap());
        let u = GridFunction::from_field(g, &ScalarField::new(|x: &[f64]| (PI * x[0]).sin())).unwrap();
        assert!((u.l2_norm() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((u.linf_norm() - 1.0).abs() < 1e-12);
        // ‖u'‖² = π²/2 up to O(h²)
        assert!((u.h1_seminorm().powi(2) / (PI * PI / 2.0) - 1.0).abs() < 1e-4);
        assert!((u.lq_norm(1.0) - 2.0 / PI).abs() < 1e-4);
    }

    #[test]
    fn radial_weights_cover_ball() {
        let d = Domain::ball(1.0, 2, 64).unwrap();
        let g = Grid::new(&d);
        let total: f64 = g.weights().iter().sum();
        let expected = PI * (1.0 - 0.5 / 64.0f64).powi(2);
        assert!((total - expected).abs() < 1e-12);
    }

    #[test]
    fn non_radial_weight_rejected_on_ball() {
        let g = Grid::new(&Domain::ball(1.0, 2, 16).unwrap());
        let err = GridFunction::from_field(g.clone(), &ScalarField::new(|x: &[f64]| 1.0 + x[0])).unwrap_err();
        assert!(matches!(err, Error::NonRadial(_)));
        let ok = GridFunction::from_field(g, &ScalarField::new(|x: &[f64]| 1.0 + x[0] * x[0] + x[1] * x[1]));
        assert!(ok.is_ok());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = Grid::new(&Domain::interval(1.0, 8).unwrap());
        let u = GridFunction::constant(g, 2.0);
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,value"));
        assert_eq!(lines.next(), Some("0.125,2"));
        assert_eq!(text.lines().count(), 8);
    }

    #[test]
    fn length_mismatch_rejected() {
        let g = Grid::new(&Domain::interval(1.0, 8).unwrap());
        assert!(GridFunction::new(g, vec![1.0; 3]).is_err());
    }
}
