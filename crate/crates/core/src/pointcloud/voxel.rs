use std::collections::BTreeMap;
use std::fmt;

use super::{Point3, PointCloud};
use crate::error::{Error, Result};
use crate::par;

pub type CellIndex = (i64, i64, i64);

/// Occupied cells of a cubic voxel lattice anchored at `origin`, each mapped
/// to the index of its representative point.
///
/// The representative is the original point nearest the mean of the points
/// falling in the cell (ties go to the lower index), so every retained point
/// is a genuine return.
#[derive(Clone, Debug)]
pub struct VoxelGrid {
    pub cell_size: f64,
    pub origin: Point3,
    pub cells: BTreeMap<CellIndex, usize>,
}

impl VoxelGrid {
    /// Lattice anchored at the world origin, which keeps downsampling
    /// idempotent: retained points stay in distinct cells on a second pass.
    pub fn build(cloud: &PointCloud, cell_size: f64) -> Result<VoxelGrid> {
        VoxelGrid::build_with_origin(cloud, cell_size, Point3::origin())
    }

    pub fn build_with_origin(cloud: &PointCloud, cell_size: f64, origin: Point3) -> Result<VoxelGrid> {
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::InvalidConfig(vec![format!(
                "cell_size must be a positive finite length, got {cell_size}"
            )]));
        }
        let pts = cloud.points();
        let key = |p: &Point3| -> CellIndex {
            let d = (p - origin) / cell_size;
            (d.x.floor() as i64, d.y.floor() as i64, d.z.floor() as i64)
        };
        let mut keyed: Vec<(CellIndex, usize)> = par::map_range(pts.len(), |i| (key(&pts[i]), i));
        par::sort_by_key(&mut keyed, |&(k, i)| (k, i));

        let mut cells = BTreeMap::new();
        let mut start = 0;
        while start < keyed.len() {
            let k = keyed[start].0;
            let mut end = start;
            while end < keyed.len() && keyed[end].0 == k {
                end += 1;
            }
            let members = &keyed[start..end];
            let mean = members
                .iter()
                .fold(nalgebra::Vector3::zeros(), |acc, &(_, i)| acc + pts[i].coords)
                / members.len() as f64;
            let rep = members
                .iter()
                .map(|&(_, i)| (i, (pts[i].coords - mean).norm_squared()))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .map(|(i, _)| i)
                .expect("non-empty cell");
            cells.insert(k, rep);
            start = end;
        }
        Ok(VoxelGrid {
            cell_size,
            origin,
            cells,
        })
    }

    /// Representative indices in ascending order.
    pub fn representatives(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.cells.values().copied().collect();
        idx.sort_unstable();
        idx
    }

    pub fn cell_min_corner(&self, index: CellIndex) -> Point3 {
        self.origin
            + nalgebra::Vector3::new(index.0 as f64, index.1 as f64, index.2 as f64) * self.cell_size
    }
}

/// Keeps at most one point per voxel of side `cell_size`, preserving input
/// order among the retained points. Normals and attributes travel with their
/// points.
pub fn downsample(cloud: &PointCloud, cell_size: f64) -> Result<PointCloud> {
    let grid = VoxelGrid::build(cloud, cell_size)?;
    Ok(cloud.subset(&grid.representatives()))
}

/// Input/output point counts of a reduction step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub input: usize,
    pub output: usize,
}

impl Reduction {
    /// `1 - output / input`; zero for an empty input.
    pub fn ratio(&self) -> f64 {
        if self.input == 0 {
            0.0
        } else {
            1.0 - self.output as f64 / self.input as f64
        }
    }
}

impl fmt::Display for Reduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -> {} points, {:.2}% reduction",
            self.input,
            self.output,
            100.0 * self.ratio()
        )
    }
}
