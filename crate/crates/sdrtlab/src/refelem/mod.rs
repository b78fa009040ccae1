//! Reference elements: solution points, external/internal flux points with
//! their degree-of-freedom normals, faces and the point-count formulas.

pub mod cubature;
pub mod gauss;
pub mod simplex_rules;

pub use gauss::{gauss_jacobi, gauss_legendre};
pub use simplex_rules::{simplex_points, simplex_rule, SimplexKind, SimplexRule};

use crate::error::Error;

/// The five supported reference element kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    Quad,
    Tri,
    Hex,
    Tet,
    Pri,
}

impl ElementKind {
    pub fn dim(self) -> usize {
        match self {
            ElementKind::Quad | ElementKind::Tri => 2,
            _ => 3,
        }
    }

    /// Cells produced when one tensor-product background cell is subdivided.
    pub fn n_subcells(self) -> usize {
        match self {
            ElementKind::Quad | ElementKind::Hex => 1,
            ElementKind::Tri | ElementKind::Pri => 2,
            ElementKind::Tet => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Quad => "quad",
            ElementKind::Tri => "tri",
            ElementKind::Hex => "hex",
            ElementKind::Tet => "tet",
            ElementKind::Pri => "pri",
        }
    }

    pub fn all() -> [ElementKind; 5] {
        [
            ElementKind::Quad,
            ElementKind::Tri,
            ElementKind::Hex,
            ElementKind::Tet,
            ElementKind::Pri,
        ]
    }
}

impl std::fmt::Display for ElementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ElementKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "quad" => Ok(ElementKind::Quad),
            "tri" => Ok(ElementKind::Tri),
            "hex" => Ok(ElementKind::Hex),
            "tet" => Ok(ElementKind::Tet),
            "pri" | "prism" => Ok(ElementKind::Pri),
            other => Err(Error::Config(format!(
                "unknown element type `{other}` (expected quad, tri, hex, tet or pri)"
            ))),
        }
    }
}

/// Closed-form point counts per element type and degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointCounts {
    pub n_sol: usize,
    pub n_flux: usize,
    pub n_ext: usize,
    pub n_int: usize,
    pub n_int_unique: usize,
}

pub fn counts(kind: ElementKind, p: usize) -> PointCounts {
    let c = match kind {
        ElementKind::Tri => PointCounts {
            n_sol: (p + 1) * (p + 2) / 2,
            n_flux: (p + 1) * (p + 3),
            n_ext: 3 * (p + 1),
            n_int: p * (p + 1),
            n_int_unique: p * (p + 1) / 2,
        },
        ElementKind::Quad => PointCounts {
            n_sol: (p + 1) * (p + 1),
            n_flux: 2 * (p + 1) * (p + 2),
            n_ext: 4 * (p + 1),
            n_int: 2 * p * (p + 1),
            n_int_unique: 2 * p * (p + 1),
        },
        ElementKind::Tet => PointCounts {
            n_sol: (p + 1) * (p + 2) * (p + 3) / 6,
            n_flux: (p + 1) * (p + 2) * (p + 4) / 2,
            n_ext: 2 * (p + 1) * (p + 2),
            n_int: p * (p + 1) * (p + 2) / 2,
            n_int_unique: p * (p + 1) * (p + 2) / 6,
        },
        ElementKind::Hex => PointCounts {
            n_sol: (p + 1).pow(3),
            n_flux: 3 * (p + 1) * (p + 1) * (p + 2),
            n_ext: 6 * (p + 1) * (p + 1),
            n_int: 3 * p * (p + 1) * (p + 1),
            n_int_unique: 3 * p * (p + 1) * (p + 1),
        },
        ElementKind::Pri => PointCounts {
            n_sol: (p + 1) * (p + 1) * (p + 2) / 2,
            n_flux: (p + 1) * (3 * p * p + 12 * p + 10) / 2,
            n_ext: (p + 1) * (4 * p + 5),
            n_int: p * (p + 1) * (3 * p + 4) / 2,
            n_int_unique: p * (p + 1) * (2 * p + 3) / 2,
        },
    };
    debug_assert_eq!(c.n_flux, c.n_ext + c.n_int);
    c
}

/// A flux point: location plus its degree-of-freedom normal (outward unit
/// normal for external points, canonical axis or face normal for internal).
#[derive(Debug, Clone)]
pub struct FluxPoint {
    pub coords: Vec<f64>,
    pub normal: Vec<f64>,
}

/// One face of the reference element.
#[derive(Debug, Clone)]
pub struct Face {
    /// Corner vertices in reference coordinates.
    pub vertices: Vec<Vec<f64>>,
    /// Outward unit normal.
    pub normal: Vec<f64>,
    /// Contiguous range of external flux point indices on this face.
    pub fpt_begin: usize,
    pub fpt_end: usize,
    /// True when the face is a triangle (simplex faces in 3D).
    pub is_tri: bool,
}

/// Immutable description of a reference element for one degree.
#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub kind: ElementKind,
    pub degree: usize,
    pub sol_pts: Vec<Vec<f64>>,
    pub ext_fpts: Vec<FluxPoint>,
    /// Duplicated internal flux points ordered by (unique location, normal).
    pub int_fpts: Vec<FluxPoint>,
    /// Unique internal flux point locations.
    pub int_unique: Vec<Vec<f64>>,
    /// Map from internal flux point index to unique location index.
    pub unique_int_map: Vec<usize>,
    pub faces: Vec<Face>,
    pub counts: PointCounts,
}

impl ReferenceElement {
    pub fn dim(&self) -> usize {
        self.kind.dim()
    }
}

fn tri_ws_points(n: usize) -> Result<Vec<Vec<f64>>, Error> {
    simplex_points(SimplexKind::Tri, n)
}

fn edge_points(v0: &[f64], v1: &[f64], ts: &[f64]) -> Vec<Vec<f64>> {
    ts.iter()
        .map(|t| {
            v0.iter()
                .zip(v1)
                .map(|(a, b)| a + (t + 1.0) / 2.0 * (b - a))
                .collect()
        })
        .collect()
}

/// Map triangle barycentric points onto a 3D triangular face.
fn tri_face_points(verts: &[Vec<f64>; 3], bary: &[[f64; 4]]) -> Vec<Vec<f64>> {
    bary.iter()
        .map(|lam| {
            (0..3)
                .map(|d| lam[0] * verts[0][d] + lam[1] * verts[1][d] + lam[2] * verts[2][d])
                .collect()
        })
        .collect()
}

/// Build the reference element for (kind, p). Degrees 1..=5 are accepted;
/// p = 5 exists to probe the simplex instability and is not otherwise tuned.
pub fn build_reference(kind: ElementKind, p: usize) -> Result<ReferenceElement, Error> {
    if p == 0 || p > 5 {
        return Err(Error::Config(format!(
            "polynomial degree {p} unsupported (expected 1 <= p <= 5)"
        )));
    }
    let c = counts(kind, p);
    let (gl_p1, _) = gauss_legendre(p + 1)?;
    let gl_p = if p >= 1 { gauss_legendre(p)?.0 } else { vec![] };

    let mut sol_pts: Vec<Vec<f64>> = Vec::new();
    let mut ext: Vec<FluxPoint> = Vec::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut int_unique: Vec<Vec<f64>> = Vec::new();
    let mut int_fpts: Vec<FluxPoint> = Vec::new();
    let mut unique_int_map: Vec<usize> = Vec::new();

    let push_face = |faces: &mut Vec<Face>,
                     ext: &mut Vec<FluxPoint>,
                     vertices: Vec<Vec<f64>>,
                     normal: Vec<f64>,
                     pts: Vec<Vec<f64>>,
                     is_tri: bool| {
        let begin = ext.len();
        for ptc in pts {
            ext.push(FluxPoint {
                coords: ptc,
                normal: normal.clone(),
            });
        }
        let end = ext.len();
        faces.push(Face {
            vertices,
            normal,
            fpt_begin: begin,
            fpt_end: end,
            is_tri,
        });
    };

    match kind {
        ElementKind::Quad => {
            for y in &gl_p1 {
                for x in &gl_p1 {
                    sol_pts.push(vec![*x, *y]);
                }
            }
            let v = [
                vec![-1.0, -1.0],
                vec![1.0, -1.0],
                vec![1.0, 1.0],
                vec![-1.0, 1.0],
            ];
            let edges = [
                (0usize, 1usize, vec![0.0, -1.0]),
                (1, 2, vec![1.0, 0.0]),
                (2, 3, vec![0.0, 1.0]),
                (3, 0, vec![-1.0, 0.0]),
            ];
            for (a, b, n) in edges {
                let pts = edge_points(&v[a], &v[b], &gl_p1);
                push_face(
                    &mut faces,
                    &mut ext,
                    vec![v[a].clone(), v[b].clone()],
                    n,
                    pts,
                    false,
                );
            }
            // Internal: staggered Gauss-Legendre lines, x-normal set then
            // y-normal set, each location carrying a single axis normal.
            for y in &gl_p1 {
                for x in &gl_p {
                    int_unique.push(vec![*x, *y]);
                    unique_int_map.push(int_unique.len() - 1);
                    int_fpts.push(FluxPoint {
                        coords: vec![*x, *y],
                        normal: vec![1.0, 0.0],
                    });
                }
            }
            for y in &gl_p {
                for x in &gl_p1 {
                    int_unique.push(vec![*x, *y]);
                    unique_int_map.push(int_unique.len() - 1);
                    int_fpts.push(FluxPoint {
                        coords: vec![*x, *y],
                        normal: vec![0.0, 1.0],
                    });
                }
            }
        }
        ElementKind::Hex => {
            for z in &gl_p1 {
                for y in &gl_p1 {
                    for x in &gl_p1 {
                        sol_pts.push(vec![*x, *y, *z]);
                    }
                }
            }
            // (fixed axis, fixed value, free axes a/b, normal)
            struct HexFace {
                fixed: usize,
                value: f64,
                a: usize,
                b: usize,
            }
            let hf = [
                HexFace {
                    fixed: 2,
                    value: -1.0,
                    a: 0,
                    b: 1,
                },
                HexFace {
                    fixed: 1,
                    value: -1.0,
                    a: 0,
                    b: 2,
                },
                HexFace {
                    fixed: 0,
                    value: 1.0,
                    a: 1,
                    b: 2,
                },
                HexFace {
                    fixed: 1,
                    value: 1.0,
                    a: 0,
                    b: 2,
                },
                HexFace {
                    fixed: 0,
                    value: -1.0,
                    a: 1,
                    b: 2,
                },
                HexFace {
                    fixed: 2,
                    value: 1.0,
                    a: 0,
                    b: 1,
                },
            ];
            for f in hf {
                let mut normal = vec![0.0; 3];
                normal[f.fixed] = f.value;
                let mut pts = Vec::new();
                for bq in &gl_p1 {
                    for aq in &gl_p1 {
                        let mut ptc = vec![0.0; 3];
                        ptc[f.fixed] = f.value;
                        ptc[f.a] = *aq;
                        ptc[f.b] = *bq;
                        pts.push(ptc);
                    }
                }
                let mut verts = Vec::new();
                for (sa, sb) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                    let mut vv = vec![0.0; 3];
                    vv[f.fixed] = f.value;
                    vv[f.a] = sa;
                    vv[f.b] = sb;
                    verts.push(vv);
                }
                push_face(&mut faces, &mut ext, verts, normal, pts, false);
            }
            for d in 0..3usize {
                let lines: [&Vec<f64>; 3] = match d {
                    0 => [&gl_p, &gl_p1, &gl_p1],
                    1 => [&gl_p1, &gl_p, &gl_p1],
                    _ => [&gl_p1, &gl_p1, &gl_p],
                };
                for z in lines[2] {
                    for y in lines[1] {
                        for x in lines[0] {
                            let mut normal = vec![0.0; 3];
                            normal[d] = 1.0;
                            int_unique.push(vec![*x, *y, *z]);
                            unique_int_map.push(int_unique.len() - 1);
                            int_fpts.push(FluxPoint {
                                coords: vec![*x, *y, *z],
                                normal,
                            });
                        }
                    }
                }
            }
        }
        ElementKind::Tri => {
            sol_pts = tri_ws_points((p + 1) * (p + 2) / 2)?;
            let v = [vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0]];
            let s = 1.0 / 2f64.sqrt();
            let edges = [
                (0usize, 1usize, vec![0.0, -1.0]),
                (1, 2, vec![s, s]),
                (2, 0, vec![-1.0, 0.0]),
            ];
            for (a, b, n) in edges {
                let pts = edge_points(&v[a], &v[b], &gl_p1);
                push_face(
                    &mut faces,
                    &mut ext,
                    vec![v[a].clone(), v[b].clone()],
                    n,
                    pts,
                    false,
                );
            }
            let uniq = tri_ws_points(p * (p + 1) / 2)?;
            for u in uniq {
                let ui = int_unique.len();
                int_unique.push(u.clone());
                for d in 0..2usize {
                    let mut normal = vec![0.0; 2];
                    normal[d] = 1.0;
                    unique_int_map.push(ui);
                    int_fpts.push(FluxPoint {
                        coords: u.clone(),
                        normal,
                    });
                }
            }
        }
        ElementKind::Tet => {
            sol_pts = simplex_points(SimplexKind::Tet, (p + 1) * (p + 2) * (p + 3) / 6)?;
            let v = [
                vec![-1.0, -1.0, -1.0],
                vec![1.0, -1.0, -1.0],
                vec![-1.0, 1.0, -1.0],
                vec![-1.0, -1.0, 1.0],
            ];
            let s3 = 1.0 / 3f64.sqrt();
            let facedefs: [([usize; 3], Vec<f64>); 4] = [
                ([0, 1, 2], vec![0.0, 0.0, -1.0]),
                ([0, 1, 3], vec![0.0, -1.0, 0.0]),
                ([0, 2, 3], vec![-1.0, 0.0, 0.0]),
                ([1, 2, 3], vec![s3, s3, s3]),
            ];
            let face_rule = simplex_rule(SimplexKind::Tri, (p + 1) * (p + 2) / 2)?;
            for (ids, n) in facedefs {
                let verts = [v[ids[0]].clone(), v[ids[1]].clone(), v[ids[2]].clone()];
                let pts = tri_face_points(&verts, &face_rule.points);
                push_face(&mut faces, &mut ext, verts.to_vec(), n, pts, true);
            }
            let uniq = simplex_points(SimplexKind::Tet, p * (p + 1) * (p + 2) / 6)?;
            for u in uniq {
                let ui = int_unique.len();
                int_unique.push(u.clone());
                for d in 0..3usize {
                    let mut normal = vec![0.0; 3];
                    normal[d] = 1.0;
                    unique_int_map.push(ui);
                    int_fpts.push(FluxPoint {
                        coords: u.clone(),
                        normal,
                    });
                }
            }
        }
        ElementKind::Pri => {
            let tri_sol = tri_ws_points((p + 1) * (p + 2) / 2)?;
            for z in &gl_p1 {
                for t in &tri_sol {
                    sol_pts.push(vec![t[0], t[1], *z]);
                }
            }
            let vb = [
                vec![-1.0, -1.0, -1.0],
                vec![1.0, -1.0, -1.0],
                vec![-1.0, 1.0, -1.0],
            ];
            let vt = [
                vec![-1.0, -1.0, 1.0],
                vec![1.0, -1.0, 1.0],
                vec![-1.0, 1.0, 1.0],
            ];
            let face_rule = simplex_rule(SimplexKind::Tri, (p + 1) * (p + 2) / 2)?;
            // Bottom / top triangles.
            let pts = tri_face_points(
                &[vb[0].clone(), vb[1].clone(), vb[2].clone()],
                &face_rule.points,
            );
            push_face(
                &mut faces,
                &mut ext,
                vb.to_vec(),
                vec![0.0, 0.0, -1.0],
                pts,
                true,
            );
            let pts = tri_face_points(
                &[vt[0].clone(), vt[1].clone(), vt[2].clone()],
                &face_rule.points,
            );
            push_face(
                &mut faces,
                &mut ext,
                vt.to_vec(),
                vec![0.0, 0.0, 1.0],
                pts,
                true,
            );
            // Quad faces: y = -1, hypotenuse, x = -1.
            let s = 1.0 / 2f64.sqrt();
            struct QuadFace {
                e0: [f64; 2],
                e1: [f64; 2],
                normal: Vec<f64>,
            }
            let qf = [
                QuadFace {
                    e0: [-1.0, -1.0],
                    e1: [1.0, -1.0],
                    normal: vec![0.0, -1.0, 0.0],
                },
                QuadFace {
                    e0: [1.0, -1.0],
                    e1: [-1.0, 1.0],
                    normal: vec![s, s, 0.0],
                },
                QuadFace {
                    e0: [-1.0, 1.0],
                    e1: [-1.0, -1.0],
                    normal: vec![-1.0, 0.0, 0.0],
                },
            ];
            for f in qf {
                let mut pts = Vec::new();
                for zb in &gl_p1 {
                    for ta in &gl_p1 {
                        let x = f.e0[0] + (ta + 1.0) / 2.0 * (f.e1[0] - f.e0[0]);
                        let y = f.e0[1] + (ta + 1.0) / 2.0 * (f.e1[1] - f.e0[1]);
                        pts.push(vec![x, y, *zb]);
                    }
                }
                let verts = vec![
                    vec![f.e0[0], f.e0[1], -1.0],
                    vec![f.e1[0], f.e1[1], -1.0],
                    vec![f.e1[0], f.e1[1], 1.0],
                    vec![f.e0[0], f.e0[1], 1.0],
                ];
                push_face(&mut faces, &mut ext, verts, f.normal, pts, false);
            }
            // Internal set 1: triangle-interior layout extruded to p+1
            // Gauss-Legendre levels, carrying the two in-plane normals.
            let tri_int = tri_ws_points(p * (p + 1) / 2)?;
            for z in &gl_p1 {
                for t in &tri_int {
                    let ui = int_unique.len();
                    int_unique.push(vec![t[0], t[1], *z]);
                    for d in 0..2usize {
                        let mut normal = vec![0.0; 3];
                        normal[d] = 1.0;
                        unique_int_map.push(ui);
                        int_fpts.push(FluxPoint {
                            coords: vec![t[0], t[1], *z],
                            normal,
                        });
                    }
                }
            }
            // Internal set 2: triangle-face layout at p interior levels with
            // the extrusion-axis normal.
            let tri_face = tri_ws_points((p + 1) * (p + 2) / 2)?;
            for z in &gl_p {
                for t in &tri_face {
                    let ui = int_unique.len();
                    int_unique.push(vec![t[0], t[1], *z]);
                    unique_int_map.push(ui);
                    int_fpts.push(FluxPoint {
                        coords: vec![t[0], t[1], *z],
                        normal: vec![0.0, 0.0, 1.0],
                    });
                }
            }
        }
    }

    let built = ReferenceElement {
        kind,
        degree: p,
        sol_pts,
        ext_fpts: ext,
        int_fpts,
        int_unique,
        unique_int_map,
        faces,
        counts: c,
    };
    if built.sol_pts.len() != c.n_sol
        || built.ext_fpts.len() != c.n_ext
        || built.int_fpts.len() != c.n_int
        || built.int_unique.len() != c.n_int_unique
    {
        return Err(Error::Numerical(format!(
            "constructed point counts disagree with closed forms for {kind:?} p={p}: \
             sol {}/{}, ext {}/{}, int {}/{}, unique {}/{}",
            built.sol_pts.len(),
            c.n_sol,
            built.ext_fpts.len(),
            c.n_ext,
            built.int_fpts.len(),
            c.n_int,
            built.int_unique.len(),
            c.n_int_unique
        )));
    }
    Ok(built)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_counts_examples() {
        let c = counts(ElementKind::Tri, 2);
        assert_eq!((c.n_sol, c.n_ext, c.n_int, c.n_int_unique), (6, 9, 6, 3));
        let c = counts(ElementKind::Hex, 1);
        assert_eq!((c.n_sol, c.n_ext, c.n_int, c.n_int_unique), (8, 24, 12, 12));
        let c = counts(ElementKind::Pri, 2);
        assert_eq!((c.n_ext, c.n_int, c.n_int_unique), (39, 30, 21));
    }

    #[test]
    fn build_matches_counts_exhaustive() {
        for kind in ElementKind::all() {
            for p in 1..=4 {
                let r = build_reference(kind, p).unwrap();
                let c = counts(kind, p);
                assert_eq!(r.sol_pts.len(), c.n_sol, "{kind:?} p={p} sol");
                assert_eq!(r.ext_fpts.len(), c.n_ext, "{kind:?} p={p} ext");
                assert_eq!(r.int_fpts.len(), c.n_int, "{kind:?} p={p} int");
                assert_eq!(r.int_unique.len(), c.n_int_unique, "{kind:?} p={p} uniq");
                assert_eq!(c.n_flux, c.n_ext + c.n_int);
            }
        }
    }

    #[test]
    fn degree_bounds_rejected() {
        assert!(build_reference(ElementKind::Quad, 0).is_err());
        assert!(build_reference(ElementKind::Quad, 6).is_err());
        assert!(build_reference(ElementKind::Tri, 5).is_ok());
    }

    #[test]
    fn external_points_on_boundary_with_face_normals() {
        for kind in ElementKind::all() {
            let r = build_reference(kind, 2).unwrap();
            for f in &r.faces {
                for i in f.fpt_begin..f.fpt_end {
                    let fp = &r.ext_fpts[i];
                    assert_eq!(fp.normal, f.normal);
                    // Distance from the face plane must vanish.
                    let d: f64 = fp
                        .coords
                        .iter()
                        .zip(&f.normal)
                        .map(|(x, n)| x * n)
                        .sum::<f64>()
                        - f.vertices[0]
                            .iter()
                            .zip(&f.normal)
                            .map(|(x, n)| x * n)
                            .sum::<f64>();
                    assert!(d.abs() < 1e-13, "{kind:?} face point off the plane: {d}");
                }
            }
        }
    }

    #[test]
    fn simplex_unique_normals_stack_to_identity() {
        for kind in [ElementKind::Tri, ElementKind::Tet] {
            let dim = kind.dim();
            let r = build_reference(kind, 3).unwrap();
            for ui in 0..r.int_unique.len() {
                let mut stacked: Vec<Vec<f64>> = Vec::new();
                for (idx, fp) in r.int_fpts.iter().enumerate() {
                    if r.unique_int_map[idx] == ui {
                        stacked.push(fp.normal.clone());
                    }
                }
                assert_eq!(stacked.len(), dim);
                for (row, n) in stacked.iter().enumerate() {
                    for (col, v) in n.iter().enumerate() {
                        let expect = if row == col { 1.0 } else { 0.0 };
                        assert_eq!(*v, expect);
                    }
                }
            }
        }
    }
}
