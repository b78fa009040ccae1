//! Uniform periodic meshes built by subdividing a Cartesian pattern grid of
//! edge h into cells of a single element type, with affine mappings, constant
//! Jacobians and symmetric face connectivity.

use std::collections::HashMap;

use crate::error::Error;
use crate::refelem::{ElementKind, ReferenceElement};

/// Constant metric data of one subcell shape.
#[derive(Debug, Clone)]
pub struct CellShape {
    /// Affine map x = offset + jac * x_ref.
    pub jac: [[f64; 3]; 3],
    pub jac_inv: [[f64; 3]; 3],
    /// Transpose-inverse applied to reference gradients.
    pub jac_inv_t: [[f64; 3]; 3],
    pub det: f64,
    pub offset: [f64; 3],
    /// Per external flux point: unit physical normal.
    pub phys_normal: Vec<[f64; 3]>,
    /// Per external flux point: det(J) |J^{-T} n_ref| flux scaling.
    pub face_scale: Vec<f64>,
    /// Physical coordinates of points relative to the pattern origin.
    pub sol_pts: Vec<[f64; 3]>,
    pub ext_pts: Vec<[f64; 3]>,
    pub int_unique_pts: Vec<[f64; 3]>,
}

/// One interior (or periodic) face pairing with its flux point permutation.
#[derive(Debug, Clone)]
pub struct FacePair {
    pub left_cell: usize,
    pub left_face: usize,
    pub right_cell: usize,
    pub right_face: usize,
    /// perm[i] = external flux point index (within the right face) matching
    /// the i-th external flux point of the left face.
    pub perm: Vec<usize>,
}

/// Boundary face on a non-periodic axis.
#[derive(Debug, Clone)]
pub struct BoundaryFace {
    pub cell: usize,
    pub face: usize,
}

/// Per-(cell, ext fpt) partner lookup used by the residual pipeline.
#[derive(Debug, Clone, Copy)]
pub enum Partner {
    Interior { cell: u32, fpt: u32, left: bool },
    Boundary,
}

#[derive(Debug)]
pub struct Mesh {
    pub kind: ElementKind,
    pub dim: usize,
    pub cells_per_axis: usize,
    pub h: f64,
    pub periodic: [bool; 3],
    pub shapes: Vec<CellShape>,
    /// Pattern origin for each cell. Cell index = pattern * n_sub + subcell.
    pub origins: Vec<[f64; 3]>,
    pub faces: Vec<FacePair>,
    pub boundary: Vec<BoundaryFace>,
    /// Flattened (cell * n_ext + fpt) partner table.
    pub partners: Vec<Partner>,
    pub n_ext: usize,
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        self.origins.len()
    }

    pub fn n_sub(&self) -> usize {
        self.shapes.len()
    }

    pub fn shape_of(&self, cell: usize) -> &CellShape {
        &self.shapes[cell % self.shapes.len()]
    }

    /// Physical coordinates of a solution point.
    pub fn sol_point(&self, cell: usize, s: usize) -> [f64; 3] {
        let o = self.origins[cell];
        let p = self.shape_of(cell).sol_pts[s];
        [o[0] + p[0], o[1] + p[1], o[2] + p[2]]
    }

    pub fn ext_point(&self, cell: usize, f: usize) -> [f64; 3] {
        let o = self.origins[cell];
        let p = self.shape_of(cell).ext_pts[f];
        [o[0] + p[0], o[1] + p[1], o[2] + p[2]]
    }

    pub fn int_unique_point(&self, cell: usize, f: usize) -> [f64; 3] {
        let o = self.origins[cell];
        let p = self.shape_of(cell).int_unique_pts[f];
        [o[0] + p[0], o[1] + p[1], o[2] + p[2]]
    }

    /// Transformed normal flux at an external flux point from the physical
    /// common flux: the det(J) |J^{-T} n_ref| face scaling of the affine map.
    pub fn transform_flux(&self, cell: usize, fpt: usize, physical_normal_flux: f64) -> f64 {
        self.shape_of(cell).face_scale[fpt] * physical_normal_flux
    }

    /// Pattern lattice coordinates of a cell.
    pub fn pattern_index(&self, cell: usize) -> [usize; 3] {
        let pat = cell / self.n_sub();
        let n = self.cells_per_axis;
        match self.dim {
            2 => [pat % n, pat / n, 0],
            _ => [pat % n, (pat / n) % n, pat / (n * n)],
        }
    }

    pub fn domain_length(&self) -> f64 {
        self.h * self.cells_per_axis as f64
    }
}

fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn triple(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn mat_inv3(m: &[[f64; 3]; 3], dim: usize) -> ([[f64; 3]; 3], f64) {
    let mut a = *m;
    // Pad unused dimensions with the identity to keep 3x3 inversion uniform.
    for d in dim..3 {
        for k in 0..3 {
            a[d][k] = 0.0;
            a[k][d] = 0.0;
        }
        a[d][d] = 1.0;
    }
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    let mut inv = [[0.0; 3]; 3];
    inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
    inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
    inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
    inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
    inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
    inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
    inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
    inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
    inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;
    (inv, det)
}

/// Vertex tuples (relative to the pattern origin, scaled by h) for each
/// subcell of the pattern, matching the reference element vertex order.
fn subcell_vertices(kind: ElementKind, h: f64) -> Vec<Vec<[f64; 3]>> {
    let s = h;
    match kind {
        ElementKind::Quad => vec![vec![
            [0.0, 0.0, 0.0],
            [s, 0.0, 0.0],
            [s, s, 0.0],
            [0.0, s, 0.0],
        ]],
        ElementKind::Tri => vec![
            // Split along the (h,0)-(0,h) diagonal, identical in every
            // pattern; this orientation pairs with the wave-angle convention
            // of the stability tables.
            vec![[0.0, 0.0, 0.0], [s, 0.0, 0.0], [0.0, s, 0.0]],
            vec![[s, s, 0.0], [0.0, s, 0.0], [s, 0.0, 0.0]],
        ],
        ElementKind::Hex => vec![vec![
            [0.0, 0.0, 0.0],
            [s, 0.0, 0.0],
            [s, s, 0.0],
            [0.0, s, 0.0],
            [0.0, 0.0, s],
            [s, 0.0, s],
            [s, s, s],
            [0.0, s, s],
        ]],
        ElementKind::Pri => vec![
            // Same anti-diagonal split as the triangles, extruded in z.
            vec![
                [0.0, 0.0, 0.0],
                [s, 0.0, 0.0],
                [0.0, s, 0.0],
                [0.0, 0.0, s],
                [s, 0.0, s],
                [0.0, s, s],
            ],
            vec![
                [s, s, 0.0],
                [0.0, s, 0.0],
                [s, 0.0, 0.0],
                [s, s, s],
                [0.0, s, s],
                [s, 0.0, s],
            ],
        ],
        ElementKind::Tet => {
            // Six tetrahedra obtained by splitting the two prisms of the
            // anti-diagonal triangle subdivision into three tets each, with
            // quad-face diagonals chosen so the pattern tiles periodically.
            let a = [0.0, 0.0, 0.0];
            let b = [s, 0.0, 0.0];
            let c = [0.0, s, 0.0];
            let d = [s, s, 0.0];
            let up = |p: [f64; 3]| [p[0], p[1], p[2] + s];
            let (ap, bp, cp, dp) = (up(a), up(b), up(c), up(d));
            let tets: Vec<Vec<[f64; 3]>> = vec![
                vec![a, b, c, ap],
                vec![b, c, ap, bp],
                vec![c, ap, bp, cp],
                vec![d, c, b, bp],
                vec![d, c, bp, cp],
                vec![d, cp, bp, dp],
            ];
            // Enforce positive orientation against the reference vertex order.
            tets.into_iter()
                .map(|mut v| {
                    let e1 = sub3(v[1], v[0]);
                    let e2 = sub3(v[2], v[0]);
                    let e3 = sub3(v[3], v[0]);
                    if triple(e1, e2, e3) < 0.0 {
                        v.swap(1, 2);
                    }
                    v
                })
                .collect()
        }
    }
}

/// Reference element vertices in the order expected by `subcell_vertices`.
fn reference_vertices(kind: ElementKind) -> Vec<[f64; 3]> {
    match kind {
        ElementKind::Quad => vec![
            [-1.0, -1.0, 0.0],
            [1.0, -1.0, 0.0],
            [1.0, 1.0, 0.0],
            [-1.0, 1.0, 0.0],
        ],
        ElementKind::Tri => vec![[-1.0, -1.0, 0.0], [1.0, -1.0, 0.0], [-1.0, 1.0, 0.0]],
        ElementKind::Hex => vec![
            [-1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0],
            [1.0, 1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
            [1.0, -1.0, 1.0],
            [1.0, 1.0, 1.0],
            [-1.0, 1.0, 1.0],
        ],
        ElementKind::Pri => vec![
            [-1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
            [1.0, -1.0, 1.0],
            [-1.0, 1.0, 1.0],
        ],
        ElementKind::Tet => vec![
            [-1.0, -1.0, -1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ],
    }
}

/// Solve the affine map x = b + G x_ref from vertex correspondences.
fn affine_from_vertices(
    refv: &[[f64; 3]],
    physv: &[[f64; 3]],
    dim: usize,
) -> ([[f64; 3]; 3], [f64; 3]) {
    let cols: Vec<usize> = match (dim, refv.len()) {
        (2, 3) => vec![1, 2],
        (2, 4) => vec![1, 3],
        (3, 4) => vec![1, 2, 3],
        (3, 6) => vec![1, 2, 3],
        (3, 8) => vec![1, 3, 4],
        _ => unreachable!(),
    };
    let mut r = [[0.0f64; 3]; 3];
    let mut pmat = [[0.0f64; 3]; 3];
    for (k, &c) in cols.iter().enumerate() {
        for d in 0..3 {
            r[d][k] = refv[c][d] - refv[0][d];
            pmat[d][k] = physv[c][d] - physv[0][d];
        }
    }
    for d in dim..3 {
        r[d][d] = 1.0;
        pmat[d][d] = 1.0;
    }
    let (rinv, _) = mat_inv3(&r, 3);
    let mut g = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += pmat[i][k] * rinv[k][j];
            }
            g[i][j] = s;
        }
    }
    let mut b = [0.0f64; 3];
    for d in 0..3 {
        let mut gx = 0.0;
        for k in 0..3 {
            gx += g[d][k] * refv[0][k];
        }
        b[d] = physv[0][d] - gx;
    }
    (g, b)
}

fn apply_affine(g: &[[f64; 3]; 3], b: &[f64; 3], x: &[f64], dim: usize) -> [f64; 3] {
    let mut out = *b;
    for d in 0..3 {
        for (k, xv) in x.iter().enumerate().take(dim) {
            out[d] += g[d][k] * xv;
        }
    }
    out
}

/// Build a uniform mesh of N^dim patterns of edge h, each subdivided into
/// the subcells of the requested element type.
pub fn build_uniform(
    re: &ReferenceElement,
    n: usize,
    h: f64,
    periodic: [bool; 3],
) -> Result<Mesh, Error> {
    let kind = re.kind;
    let dim = kind.dim();
    if periodic.iter().take(dim).any(|p| *p) && n < 3 {
        return Err(Error::Config(format!(
            "periodic uniform meshes need at least 3 cells per axis, got {n}"
        )));
    }
    let refv = reference_vertices(kind);
    let subs = subcell_vertices(kind, h);

    let mut shapes = Vec::with_capacity(subs.len());
    for physv in &subs {
        let (g, b) = affine_from_vertices(&refv, physv, dim);
        let (ginv, det) = mat_inv3(&g, dim);
        if det <= 0.0 {
            return Err(Error::Numerical(format!(
                "negative Jacobian in {kind:?} subdivision: {det}"
            )));
        }
        let mut ginv_t = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                ginv_t[i][j] = ginv[j][i];
            }
        }
        let mut phys_normal = Vec::with_capacity(re.ext_fpts.len());
        let mut face_scale = Vec::with_capacity(re.ext_fpts.len());
        for fp in &re.ext_fpts {
            let mut np = [0.0f64; 3];
            for d in 0..3 {
                for k in 0..dim {
                    np[d] += ginv_t[d][k] * fp.normal[k];
                }
            }
            let mag = (np[0] * np[0] + np[1] * np[1] + np[2] * np[2]).sqrt();
            for v in np.iter_mut() {
                *v /= mag;
            }
            phys_normal.push(np);
            face_scale.push(det * mag);
        }
        let sol_pts = re
            .sol_pts
            .iter()
            .map(|x| apply_affine(&g, &b, x, dim))
            .collect();
        let ext_pts = re
            .ext_fpts
            .iter()
            .map(|f| apply_affine(&g, &b, &f.coords, dim))
            .collect();
        let int_unique_pts = re
            .int_unique
            .iter()
            .map(|x| apply_affine(&g, &b, x, dim))
            .collect();
        shapes.push(CellShape {
            jac: g,
            jac_inv: ginv,
            jac_inv_t: ginv_t,
            det,
            offset: b,
            phys_normal,
            face_scale,
            sol_pts,
            ext_pts,
            int_unique_pts,
        });
    }

    let n_patterns = n.pow(dim as u32);
    let n_sub = shapes.len();
    let mut origins = Vec::with_capacity(n_patterns * n_sub);
    for pat in 0..n_patterns {
        let (i, j, k) = match dim {
            2 => (pat % n, pat / n, 0),
            _ => (pat % n, (pat / n) % n, pat / (n * n)),
        };
        let o = [i as f64 * h, j as f64 * h, k as f64 * h];
        for _ in 0..n_sub {
            origins.push(o);
        }
    }

    // Face pairing by wrapped face-centroid matching.
    let length = n as f64 * h;
    let tol = 1e-9 * h;
    let wrap = |v: f64, axis: usize| -> f64 {
        if axis < dim && periodic[axis] {
            let mut w = v % length;
            if w < -tol {
                w += length;
            }
            if (w - length).abs() < tol || w.abs() < tol {
                w = 0.0;
            }
            w
        } else {
            v
        }
    };
    let quant = |v: f64| -> i64 { (v / tol).round() as i64 };

    let n_cells = origins.len();
    let n_faces_per_cell = re.faces.len();
    let mut table: HashMap<[i64; 3], (usize, usize)> = HashMap::new();
    let mut pairs: Vec<FacePair> = Vec::new();
    let mut boundary: Vec<BoundaryFace> = Vec::new();

    let face_centroid = |cell: usize, face: usize| -> [f64; 3] {
        let shape = &shapes[cell % n_sub];
        let fdef = &re.faces[face];
        let o = origins[cell];
        let mut c = [0.0f64; 3];
        let cnt = (fdef.fpt_end - fdef.fpt_begin) as f64;
        for i in fdef.fpt_begin..fdef.fpt_end {
            for d in 0..3 {
                c[d] += (shape.ext_pts[i][d] + o[d]) / cnt;
            }
        }
        c
    };

    for cell in 0..n_cells {
        for face in 0..n_faces_per_cell {
            let c = face_centroid(cell, face);
            let key = [
                quant(wrap(c[0], 0)),
                quant(wrap(c[1], 1)),
                quant(wrap(c[2], 2)),
            ];
            if let Some((other_cell, other_face)) = table.remove(&key) {
                pairs.push(FacePair {
                    left_cell: other_cell,
                    left_face: other_face,
                    right_cell: cell,
                    right_face: face,
                    perm: Vec::new(),
                });
            } else {
                table.insert(key, (cell, face));
            }
        }
    }
    for (_, (cell, face)) in table {
        let fdef = &re.faces[face];
        let on_open_boundary = {
            let nrm = &fdef.normal;
            let mut ok = false;
            for (d, &peri) in periodic.iter().enumerate().take(dim) {
                if !peri && nrm[d].abs() > 0.99 {
                    ok = true;
                }
            }
            ok
        };
        if !on_open_boundary {
            return Err(Error::Numerical(format!(
                "unmatched interior face (cell {cell}, face {face})"
            )));
        }
        boundary.push(BoundaryFace { cell, face });
    }
    boundary.sort_by_key(|b| (b.cell, b.face));

    // Orientation: axis-consistent left/right. Faces with an axis-aligned
    // physical normal take the cell on the negative side as left (well
    // defined across the periodic wrap); other faces fall back to subcell
    // order, which keeps the prism diagonal orientation uniform.
    for pair in pairs.iter_mut() {
        let nrm_left = &re.faces[pair.left_face].normal;
        let shape_left = &shapes[pair.left_cell % n_sub];
        let mut nl = [0.0f64; 3];
        for d in 0..3 {
            for k in 0..dim {
                nl[d] += shape_left.jac_inv_t[d][k] * nrm_left[k];
            }
        }
        let mag = (nl[0] * nl[0] + nl[1] * nl[1] + nl[2] * nl[2]).sqrt();
        let axis = (0..dim).find(|&d| nl[d].abs() > 0.99 * mag);
        let keep = match axis {
            Some(d) => nl[d] > 0.0,
            None => pair.left_cell % n_sub <= pair.right_cell % n_sub,
        };
        if !keep {
            std::mem::swap(&mut pair.left_cell, &mut pair.right_cell);
            std::mem::swap(&mut pair.left_face, &mut pair.right_face);
        }
    }

    // Flux point permutations by wrapped coordinate matching.
    for pair in pairs.iter_mut() {
        let lf = &re.faces[pair.left_face];
        let rf = &re.faces[pair.right_face];
        let ls = &shapes[pair.left_cell % n_sub];
        let rs = &shapes[pair.right_cell % n_sub];
        let lo = origins[pair.left_cell];
        let ro = origins[pair.right_cell];
        let nl = lf.fpt_end - lf.fpt_begin;
        let mut perm = vec![usize::MAX; nl];
        for (i, li) in (lf.fpt_begin..lf.fpt_end).enumerate() {
            let lp = [
                wrap(ls.ext_pts[li][0] + lo[0], 0),
                wrap(ls.ext_pts[li][1] + lo[1], 1),
                wrap(ls.ext_pts[li][2] + lo[2], 2),
            ];
            let mut found = usize::MAX;
            for (j, rj) in (rf.fpt_begin..rf.fpt_end).enumerate() {
                let rp = [
                    wrap(rs.ext_pts[rj][0] + ro[0], 0),
                    wrap(rs.ext_pts[rj][1] + ro[1], 1),
                    wrap(rs.ext_pts[rj][2] + ro[2], 2),
                ];
                let d2: f64 = (0..3).map(|d| (lp[d] - rp[d]) * (lp[d] - rp[d])).sum();
                if d2.sqrt() < 1e-10 * h.max(1.0) {
                    found = j;
                    break;
                }
            }
            if found == usize::MAX {
                return Err(Error::Numerical(format!(
                    "flux point {i} of face pair ({}, {}) has no coordinate match",
                    pair.left_cell, pair.right_cell
                )));
            }
            perm[i] = found;
        }
        pair.perm = perm;
    }

    // Partner lookup table.
    let n_ext = re.counts.n_ext;
    let mut partners = vec![Partner::Boundary; n_cells * n_ext];
    for pair in &pairs {
        let lf = &re.faces[pair.left_face];
        let rf = &re.faces[pair.right_face];
        for (i, &j) in pair.perm.iter().enumerate() {
            let lidx = pair.left_cell * n_ext + lf.fpt_begin + i;
            let ridx = pair.right_cell * n_ext + rf.fpt_begin + j;
            partners[lidx] = Partner::Interior {
                cell: pair.right_cell as u32,
                fpt: (rf.fpt_begin + j) as u32,
                left: true,
            };
            partners[ridx] = Partner::Interior {
                cell: pair.left_cell as u32,
                fpt: (lf.fpt_begin + i) as u32,
                left: false,
            };
        }
    }

    Ok(Mesh {
        kind,
        dim,
        cells_per_axis: n,
        h,
        periodic,
        shapes,
        origins,
        faces: pairs,
        boundary,
        partners,
        n_ext,
    })
}
