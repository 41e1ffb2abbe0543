//! Fixed-radius neighbor search behind a common trait.
//!
//! Backends are registered by name in an [`IndexRegistry`] so callers (and the
//! CLI's `--index` flag) can pick one at runtime. All backends answer queries
//! with the same predicate, `dist_sq(p, q) <= r * r`, and return indices in
//! ascending order, so they are interchangeable bit for bit.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::dist_sq;
use crate::types::PointCloud;

pub trait SpatialIndex: Send + Sync {
    fn name(&self) -> &'static str;

    /// Sorted indices of every point `p` with `|p − q|² ≤ r²`.
    fn within(&self, q: &[f64], r: f64) -> Vec<usize>;
}

/// Builds an index over a cloud; `cell_hint` is the radius most queries will use.
pub type IndexBuilder = for<'a> fn(&'a PointCloud, f64) -> Box<dyn SpatialIndex + 'a>;

struct Entry {
    name: &'static str,
    description: &'static str,
    build: IndexBuilder,
}

pub struct IndexRegistry {
    entries: Vec<Entry>,
}

impl IndexRegistry {
    pub fn empty() -> Self {
        IndexRegistry {
            entries: Vec::new(),
        }
    }

    /// Registry holding the built-in `grid` and `linear` backends.
    pub fn builtin() -> Self {
        let mut reg = IndexRegistry::empty();
        reg.register("grid", "uniform hash grid with cell side = query radius", |c, h| {
            Box::new(GridIndex::new(c, h))
        });
        reg.register("linear", "scan every point", |c, _| Box::new(LinearScan::new(c)));
        reg
    }

    /// Adds a backend, replacing any existing entry of the same name.
    pub fn register(&mut self, name: &'static str, description: &'static str, build: IndexBuilder) {
        self.entries.retain(|e| e.name != name);
        self.entries.push(Entry {
            name,
            description,
            build,
        });
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name).collect()
    }

    pub fn describe(&self) -> Vec<(&'static str, &'static str)> {
        self.entries.iter().map(|e| (e.name, e.description)).collect()
    }

    pub fn get(&self, name: &str) -> Result<IndexBuilder> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| e.build)
            .ok_or_else(|| Error::UnknownIndex(name.to_string()))
    }

    pub fn build<'a>(
        &self,
        name: &str,
        cloud: &'a PointCloud,
        cell_hint: f64,
    ) -> Result<Box<dyn SpatialIndex + 'a>> {
        if !(cell_hint > 0.0 && cell_hint.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "index cell size must be positive, got {cell_hint}"
            )));
        }
        Ok((self.get(name)?)(cloud, cell_hint))
    }
}

impl Default for IndexRegistry {
    fn default() -> Self {
        IndexRegistry::builtin()
    }
}

impl fmt::Debug for IndexRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}

pub struct LinearScan<'a> {
    cloud: &'a PointCloud,
}

impl<'a> LinearScan<'a> {
    pub fn new(cloud: &'a PointCloud) -> Self {
        LinearScan { cloud }
    }
}

impl SpatialIndex for LinearScan<'_> {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn within(&self, q: &[f64], r: f64) -> Vec<usize> {
        let r2 = r * r;
        self.cloud
            .points()
            .enumerate()
            .filter(|(_, p)| dist_sq(p, q) <= r2)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Uniform grid keyed by integer cell coordinates.
pub struct GridIndex<'a> {
    cloud: &'a PointCloud,
    cell: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a> GridIndex<'a> {
    pub fn new(cloud: &'a PointCloud, cell: f64) -> Self {
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in cloud.points().enumerate() {
            let key = p.iter().map(|&x| cell_coord(x, cell)).collect();
            cells.entry(key).or_default().push(i);
        }
        GridIndex { cloud, cell, cells }
    }

    fn key_range(&self, q: &[f64], r: f64) -> (Vec<i64>, Vec<i64>) {
        // widen slightly so rounding in the division never drops a boundary cell
        q.iter()
            .map(|&x| {
                let slack = 1e-9 * (1.0 + (x.abs() + r) / self.cell);
                let lo = ((x - r) / self.cell - slack).floor();
                let hi = ((x + r) / self.cell + slack).floor();
                (saturate(lo), saturate(hi))
            })
            .unzip()
    }

    fn scan(&self, bucket: &[usize], q: &[f64], r2: f64, out: &mut Vec<usize>) {
        out.extend(
            bucket
                .iter()
                .copied()
                .filter(|&i| dist_sq(self.cloud.point(i), q) <= r2),
        );
    }
}

fn cell_coord(x: f64, cell: f64) -> i64 {
    saturate((x / cell).floor())
}

fn saturate(v: f64) -> i64 {
    v.clamp(i64::MIN as f64 / 4.0, i64::MAX as f64 / 4.0) as i64
}

impl SpatialIndex for GridIndex<'_> {
    fn name(&self) -> &'static str {
        "grid"
    }

    fn within(&self, q: &[f64], r: f64) -> Vec<usize> {
        let r2 = r * r;
        let (lo, hi) = self.key_range(q, r);
        let span = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| (h - l + 1) as f64)
            .product::<f64>();
        let mut out = Vec::new();
        if span > self.cells.len() as f64 {
            for (key, bucket) in &self.cells {
                if key.iter().zip(lo.iter().zip(&hi)).all(|(k, (l, h))| l <= k && k <= h) {
                    self.scan(bucket, q, r2, &mut out);
                }
            }
        } else {
            let mut key = lo.clone();
            'odometer: loop {
                if let Some(bucket) = self.cells.get(&key) {
                    self.scan(bucket, q, r2, &mut out);
                }
                for d in 0..key.len() {
                    if key[d] < hi[d] {
                        key[d] += 1;
                        continue 'odometer;
                    }
                    key[d] = lo[d];
                }
                break;
            }
        }
        out.sort_unstable();
        out
    }
}
