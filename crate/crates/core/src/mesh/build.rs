use super::SimplicialComplex3;
use crate::error::{Error, Result};

/// Corners of a block indexed by `x | y << 1 | z << 2`.
type Corners = [usize; 8];

/// Five-tet split of a hexahedral block. Odd-parity blocks use the mirrored
/// split so that face diagonals agree with every neighbour.
fn split_block(c: &Corners, odd: bool) -> [[usize; 4]; 5] {
    // Even: central tet on {000, 110, 101, 011}; the other four corners each
    // cut off with their three axis neighbours. Odd blocks swap the roles.
    let (central, tips): ([usize; 4], [usize; 4]) = if odd {
        ([0b001, 0b010, 0b100, 0b111], [0b000, 0b011, 0b101, 0b110])
    } else {
        ([0b000, 0b011, 0b101, 0b110], [0b001, 0b010, 0b100, 0b111])
    };
    let mut out = [[0usize; 4]; 5];
    out[0] = central.map(|b| c[b]);
    for (k, &tip) in tips.iter().enumerate() {
        out[k + 1] = [c[tip], c[tip ^ 1], c[tip ^ 2], c[tip ^ 4]];
    }
    out
}

/// Rectangular slab of `nx × ny × nz` blocks of size `dx × dy × dz` (metres),
/// each block split into five tetrahedra.
pub fn build_slab(nx: usize, ny: usize, nz: usize, dx: f64, dy: f64, dz: f64) -> Result<SimplicialComplex3> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::InvalidInput("block counts must be at least 1".into()));
    }
    if !(dx > 0.0 && dy > 0.0 && dz > 0.0) {
        return Err(Error::InvalidInput("block sizes must be positive".into()));
    }
    // i-major, then j, then k: this is lexicographic (x, y, z) order.
    let id = |i: usize, j: usize, k: usize| (i * (ny + 1) + j) * (nz + 1) + k;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for i in 0..=nx {
        for j in 0..=ny {
            for k in 0..=nz {
                vertices.push([i as f64 * dx, j as f64 * dy, k as f64 * dz]);
            }
        }
    }
    let mut tets = Vec::with_capacity(5 * nx * ny * nz);
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                let c: Corners = std::array::from_fn(|b| id(i + (b & 1), j + (b >> 1 & 1), k + (b >> 2 & 1)));
                tets.extend(split_block(&c, (i + j + k) % 2 == 1));
            }
        }
    }
    SimplicialComplex3::from_tets(vertices, &tets)
}

/// Plate described over an `nx × nz` grid of square cells in the x–z plane,
/// with the thin direction along y.
#[derive(Clone, Debug)]
pub struct HeightField {
    pub nx: usize,
    pub nz: usize,
    /// Row-major over (i, k): index `i * nz + k`.
    pub mask: Vec<bool>,
    pub thickness: Vec<f64>,
    pub elevation: Vec<f64>,
    pub cell: f64,
    /// Number of blocks across the thickness.
    pub layers: usize,
}

impl HeightField {
    pub fn rectangle(nx: usize, nz: usize, cell: f64, thickness: f64, layers: usize) -> Self {
        Self {
            nx,
            nz,
            mask: vec![true; nx * nz],
            thickness: vec![thickness; nx * nz],
            elevation: vec![0.0; nx * nz],
            cell,
            layers,
        }
    }

    fn at(&self, i: usize, k: usize) -> usize {
        i * self.nz + k
    }

    fn validate(&self) -> Result<()> {
        let n = self.nx * self.nz;
        if n == 0 || self.layers == 0 {
            return Err(Error::InvalidInput("height field grid must be non-empty".into()));
        }
        for (name, len) in [("mask", self.mask.len()), ("thickness", self.thickness.len()), ("elevation", self.elevation.len())] {
            if len != n {
                return Err(Error::InvalidInput(format!("{name} has {len} cells, grid has {n}")));
            }
        }
        if !(self.cell > 0.0) {
            return Err(Error::InvalidInput("cell size must be positive".into()));
        }
        if (0..n).any(|c| self.mask[c] && !(self.thickness[c] > 0.0)) {
            return Err(Error::InvalidInput("thickness must be positive on masked cells".into()));
        }
        let components = self.components();
        if components == 0 {
            return Err(Error::InvalidInput("mask selects no cells".into()));
        }
        if components > 1 {
            return Err(Error::DisconnectedMask { components });
        }
        Ok(())
    }

    /// Number of edge-connected components of the mask.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.mask.len()];
        let mut count = 0;
        for start in 0..self.mask.len() {
            if !self.mask[start] || seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(c) = stack.pop() {
                let (i, k) = (c / self.nz, c % self.nz);
                let mut nb = Vec::with_capacity(4);
                if i > 0 {
                    nb.push(self.at(i - 1, k));
                }
                if i + 1 < self.nx {
                    nb.push(self.at(i + 1, k));
                }
                if k > 0 {
                    nb.push(self.at(i, k - 1));
                }
                if k + 1 < self.nz {
                    nb.push(self.at(i, k + 1));
                }
                for n in nb {
                    if self.mask[n] && !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        count
    }
}

/// One column of `layers` blocks per masked cell. Node heights average the
/// thickness and elevation of the masked cells around each grid node.
pub fn build_heightfield_plate(h: &HeightField) -> Result<SimplicialComplex3> {
    h.validate()?;
    let (nx, nz, ny) = (h.nx, h.nz, h.layers);
    let node = |i: usize, k: usize| i * (nz + 1) + k;
    let mut used = vec![false; (nx + 1) * (nz + 1)];
    let mut thick = vec![0.0; used.len()];
    let mut elev = vec![0.0; used.len()];
    let mut count = vec![0usize; used.len()];
    for i in 0..nx {
        for k in 0..nz {
            let c = h.at(i, k);
            if !h.mask[c] {
                continue;
            }
            for (di, dk) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let n = node(i + di, k + dk);
                used[n] = true;
                thick[n] += h.thickness[c];
                elev[n] += h.elevation[c];
                count[n] += 1;
            }
        }
    }
    // Provisional ids over (node, layer), then renumber lexicographically.
    let mut provisional = vec![usize::MAX; used.len() * (ny + 1)];
    let mut points = Vec::new();
    for i in 0..=nx {
        for k in 0..=nz {
            let n = node(i, k);
            if !used[n] {
                continue;
            }
            let t = thick[n] / count[n] as f64;
            let e = elev[n] / count[n] as f64;
            for j in 0..=ny {
                provisional[n * (ny + 1) + j] = points.len();
                points.push([i as f64 * h.cell, e + t * j as f64 / ny as f64, k as f64 * h.cell]);
            }
        }
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (points[a], points[b]);
        p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])).then(p[2].total_cmp(&q[2]))
    });
    let mut rank = vec![0usize; points.len()];
    for (r, &p) in order.iter().enumerate() {
        rank[p] = r;
    }
    let vertices: Vec<[f64; 3]> = order.iter().map(|&p| points[p]).collect();
    let id = |i: usize, j: usize, k: usize| rank[provisional[node(i, k) * (ny + 1) + j]];

    let mut tets = Vec::new();
    for i in 0..nx {
        for k in 0..nz {
            if !h.mask[h.at(i, k)] {
                continue;
            }
            for j in 0..ny {
                let c: Corners = std::array::from_fn(|b| id(i + (b & 1), j + (b >> 1 & 1), k + (b >> 2 & 1)));
                tets.extend(split_block(&c, (i + j + k) % 2 == 1));
            }
        }
    }
    SimplicialComplex3::from_tets(vertices, &tets)
}
