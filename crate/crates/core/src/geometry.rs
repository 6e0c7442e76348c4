//! Point clouds and a uniform-grid index for fixed-radius neighbor queries.

use std::collections::HashMap;
use std::io::Read;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An immutable sample of points in `R^d` with their Euclidean norms cached.
///
/// Index `i` always refers to the same point; norms are computed once here
/// and reused by every enumeration over the cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<F> {
    dim: usize,
    coords: Vec<F>,
    norms: Vec<F>,
}

impl<F: Scalar> PointCloud<F> {
    /// Builds a cloud from row vectors. Every row must have `dim` finite entries.
    pub fn new(dim: usize, points: Vec<Vec<F>>) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteCoordinate { index: i });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords)
    }

    /// Builds a cloud from row-major coordinates (`len = n * dim`).
    pub fn from_flat(dim: usize, coords: Vec<F>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ParameterOutOfRange("dimension must be positive".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(pos) = coords.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index: pos / dim });
        }
        let norms = coords.chunks_exact(dim).map(euclidean_norm).collect();
        Ok(Self { dim, coords, norms })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::from_flat(dim, Vec::new())
    }

    /// Reads one point per row of comma-separated decimals.
    ///
    /// A single header row is skipped when its first field does not parse as a
    /// number. Rows must have exactly `dim` fields.
    pub fn read_csv<R: Read>(reader: R, dim: usize) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(reader);
        let mut coords = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if row == 0 {
                let first = record.get(0).unwrap_or("").trim();
                if first.parse::<f64>().is_err() {
                    continue;
                }
            }
            if record.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: record.len(),
                });
            }
            for field in record.iter() {
                let x: f64 = field.trim().parse().map_err(|_| {
                    Error::Csv(format!("row {}: cannot parse {field:?} as a number", row + 1))
                })?;
                coords.push(F::of(x));
            }
        }
        Self::from_flat(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn point(&self, i: usize) -> &[F] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[F]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn norm(&self, i: usize) -> F {
        self.norms[i]
    }

    pub fn norms(&self) -> &[F] {
        &self.norms
    }

    /// Indices ordered by non-increasing norm, ties by ascending index.
    pub fn descending_norm_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.norms[b]
                .partial_cmp(&self.norms[a])
                .expect("norms are finite")
                .then(a.cmp(&b))
        });
        order
    }

    /// Sub-cloud made of the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        let mut norms = Vec::with_capacity(indices.len());
        for &i in indices {
            coords.extend_from_slice(self.point(i));
            norms.push(self.norms[i]);
        }
        Self {
            dim: self.dim,
            coords,
            norms,
        }
    }
}

pub(crate) fn euclidean_norm<F: Scalar>(x: &[F]) -> F {
    // hypot-style scaling so huge heavy-tailed radii don't overflow when squared
    let scale = x.iter().fold(F::zero(), |m, v| m.max(v.abs()));
    if scale == F::zero() || !scale.is_finite() {
        return scale;
    }
    let sum = x.iter().fold(F::zero(), |acc, v| {
        let s = *v / scale;
        acc + s * s
    });
    scale * sum.sqrt()
}

pub(crate) fn distance<F: Scalar>(a: &[F], b: &[F]) -> F {
    let scale = a
        .iter()
        .zip(b)
        .fold(F::zero(), |m, (x, y)| m.max((*x - *y).abs()));
    if scale == F::zero() || !scale.is_finite() {
        return scale;
    }
    let sum = a.iter().zip(b).fold(F::zero(), |acc, (x, y)| {
        let s = (*x - *y) / scale;
        acc + s * s
    });
    scale * sum.sqrt()
}

type CellKey = Vec<i64>;

/// Uniform grid over a [`PointCloud`] with cubic cells of side `cell_size`.
///
/// Every indexed point sits in exactly one cell, the one containing its
/// coordinates. Queries with `r <= cell_size` scan the `3^d` surrounding cells.
#[derive(Debug, Clone)]
pub struct GridIndex<'a, F> {
    cloud: &'a PointCloud<F>,
    cell_size: F,
    cells: HashMap<CellKey, Vec<usize>>,
    indexed: usize,
}

impl<'a, F: Scalar> GridIndex<'a, F> {
    /// Indexes every point of `cloud`.
    pub fn build(cloud: &'a PointCloud<F>, cell_size: F) -> Result<Self> {
        let mut index = Self::empty(cloud, cell_size)?;
        for i in 0..cloud.len() {
            index.insert(i);
        }
        Ok(index)
    }

    /// An index over `cloud` holding no points yet; see [`GridIndex::insert`].
    pub(crate) fn empty(cloud: &'a PointCloud<F>, cell_size: F) -> Result<Self> {
        if !(cell_size > F::zero()) || !cell_size.is_finite() {
            return Err(Error::NonPositiveCellSize(cell_size.as_f64()));
        }
        Ok(Self {
            cloud,
            cell_size,
            cells: HashMap::new(),
            indexed: 0,
        })
    }

    pub(crate) fn insert(&mut self, i: usize) {
        let key = self.cell_of(self.cloud.point(i));
        self.cells.entry(key).or_default().push(i);
        self.indexed += 1;
    }

    pub fn cell_size(&self) -> F {
        self.cell_size
    }

    pub fn cloud(&self) -> &'a PointCloud<F> {
        self.cloud
    }

    pub fn occupied_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn len(&self) -> usize {
        self.indexed
    }

    pub fn is_empty(&self) -> bool {
        self.indexed == 0
    }

    /// Point indices stored in the cell with the given lattice coordinates.
    pub fn cell_members(&self, cell: &[i64]) -> &[usize] {
        self.cells.get(cell).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn cell_of(&self, x: &[F]) -> CellKey {
        // `as` saturates, so astronomically far points share boundary cells;
        // the exact distance check in queries keeps results correct.
        x.iter()
            .map(|v| (*v / self.cell_size).floor().to_f64().unwrap_or(0.0) as i64)
            .collect()
    }

    /// Indices of indexed points within distance `r` (inclusive) of `query`,
    /// in ascending order, omitting `exclude` if given.
    pub fn neighbors_within(&self, query: &[F], r: F, exclude: Option<usize>) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        self.for_each_neighbor(query, r, exclude, |j| out.push(j))?;
        out.sort_unstable();
        Ok(out)
    }

    pub(crate) fn for_each_neighbor(
        &self,
        query: &[F],
        r: F,
        exclude: Option<usize>,
        mut visit: impl FnMut(usize),
    ) -> Result<()> {
        let d = self.cloud.dim();
        if query.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: query.len(),
            });
        }
        if self.cells.is_empty() {
            return Ok(());
        }
        let reach = (r / self.cell_size).ceil().to_f64().unwrap_or(1.0).max(1.0) as i64;
        let center = self.cell_of(query);
        let mut offset = vec![-reach; d];
        let mut key = vec![0i64; d];
        loop {
            for ((k, c), o) in key.iter_mut().zip(&center).zip(&offset) {
                *k = c.saturating_add(*o);
            }
            if let Some(members) = self.cells.get(key.as_slice()) {
                for &j in members {
                    if Some(j) != exclude && distance(self.cloud.point(j), query) <= r {
                        visit(j);
                    }
                }
            }
            // odometer over (2 reach + 1)^d offsets
            let mut axis = 0;
            loop {
                if axis == d {
                    return Ok(());
                }
                offset[axis] += 1;
                if offset[axis] <= reach {
                    break;
                }
                offset[axis] = -reach;
                axis += 1;
            }
        }
    }
}

/// Convenience wrapper over [`GridIndex::build`].
pub fn build_index<F: Scalar>(cloud: &PointCloud<F>, cell_size: F) -> Result<GridIndex<'_, F>> {
    GridIndex::build(cloud, cell_size)
}
