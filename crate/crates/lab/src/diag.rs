//! Mesh diagnostics: discrete mean curvature (cotangent Laplacian against
//! the vertex normals), area growth in balls about the origin with exact
//! triangle-disk clipping, and the structure of the symmetry-plane
//! intersection curves.

use crate::mesh::{MeshError, Result, SurfaceMesh};
use std::collections::HashMap;

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// 95th percentile over interior vertices of the discrete mean curvature
/// magnitude, normalized by the mean edge length.
///
/// Interior vertices are those whose incident triangles form a closed fan
/// (every incident edge shared by exactly two incident triangles); on the
/// mirrored-and-translated assemblies this classifies seam copies as
/// boundary, so the estimate runs over genuinely two-sided stencils.
pub fn mean_curvature_residual(mesh: &SurfaceMesh) -> Result<f64> {
    if mesh.is_empty() {
        return Err(MeshError::Empty);
    }
    let nv = mesh.vertices.len();
    let mut edge_count: HashMap<(u32, u32), u32> = HashMap::new();
    let mut area_acc = vec![0.0f64; nv];
    let mut lap = vec![[0.0f64; 3]; nv];
    let mut total_edge_len = 0.0;
    let mut edge_samples = 0usize;
    for t in &mesh.triangles {
        let [i, j, k] = *t;
        let (p, q, r) = (
            mesh.vertices[i as usize],
            mesh.vertices[j as usize],
            mesh.vertices[k as usize],
        );
        let area = 0.5 * norm(cross(sub(q, p), sub(r, p)));
        if area < 1e-300 {
            return Err(MeshError::DegenerateTriangles(area));
        }
        for (a, b) in [(i, j), (j, k), (k, i)] {
            let key = if a < b { (a, b) } else { (b, a) };
            *edge_count.entry(key).or_insert(0) += 1;
            total_edge_len += norm(sub(mesh.vertices[a as usize], mesh.vertices[b as usize]));
            edge_samples += 1;
        }
        for v in [i, j, k] {
            area_acc[v as usize] += area / 3.0;
        }
        // cotangent weights: the angle at each vertex weights the opposite edge
        let corners = [(i, j, k), (j, k, i), (k, i, j)];
        for (apex, u, w) in corners {
            let (pa, pu, pw) = (
                mesh.vertices[apex as usize],
                mesh.vertices[u as usize],
                mesh.vertices[w as usize],
            );
            let e1 = sub(pu, pa);
            let e2 = sub(pw, pa);
            let cot = dot(e1, e2) / norm(cross(e1, e2)).max(1e-300);
            // contributes to the Laplacian of u and w along edge (u, w)
            let d = sub(mesh.vertices[w as usize], mesh.vertices[u as usize]);
            for c in 0..3 {
                lap[u as usize][c] += 0.5 * cot * d[c];
                lap[w as usize][c] -= 0.5 * cot * d[c];
            }
        }
    }
    let mean_edge = total_edge_len / edge_samples as f64;

    // Closed-fan detection: an interior vertex has no incident
    // once-counted edge.
    let mut open = vec![false; nv];
    for (&(a, b), &count) in &edge_count {
        if count != 2 {
            open[a as usize] = true;
            open[b as usize] = true;
        }
    }
    let mut residuals: Vec<f64> = Vec::new();
    for v in 0..nv {
        if open[v] || area_acc[v] <= 0.0 {
            continue;
        }
        // mean curvature normal K = -lap/A has |K| = 2H
        let k = lap[v];
        let h = dot(k, mesh.normals[v]).abs() / (2.0 * area_acc[v]);
        residuals.push(h * mean_edge);
    }
    if residuals.is_empty() {
        return Err(MeshError::Empty);
    }
    residuals.sort_by(f64::total_cmp);
    let idx = ((residuals.len() as f64) * 0.95) as usize;
    Ok(residuals[idx.min(residuals.len() - 1)])
}

/// Exact area of the intersection of the triangle `(a, b, c)` with the ball
/// of radius `r` about the origin: the triangle is clipped against the disk
/// cut by its own plane.
pub fn triangle_ball_area(a: [f64; 3], b: [f64; 3], c: [f64; 3], r: f64) -> f64 {
    let n = cross(sub(b, a), sub(c, a));
    let nn = norm(n);
    if nn < 1e-300 {
        return 0.0;
    }
    let unit = [n[0] / nn, n[1] / nn, n[2] / nn];
    let d = dot(unit, a); // signed distance of the plane from the origin
    if d.abs() >= r {
        return 0.0;
    }
    let rho = (r * r - d * d).sqrt();
    // 2-D frame in the plane, centered at the projection of the origin.
    let center = [unit[0] * d, unit[1] * d, unit[2] * d];
    let mut u = sub(b, a);
    let un = norm(u);
    u = [u[0] / un, u[1] / un, u[2] / un];
    let v = cross(unit, u);
    let to2d = |p: [f64; 3]| -> (f64, f64) {
        let w = sub(p, center);
        (dot(w, u), dot(w, v))
    };
    let p2 = [to2d(a), to2d(b), to2d(c)];
    polygon_disk_area(&p2, rho).abs()
}

/// Signed area of `polygon ∩ disk(0, r)` by summing per-edge contributions
/// of origin-fans clipped to the disk.
fn polygon_disk_area(poly: &[(f64, f64)], r: f64) -> f64 {
    let mut area = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        area += fan_contribution(p, q, r);
    }
    area
}

/// Contribution of the origin-fan over the directed segment p -> q, clipped
/// to the disk: straight subsegments inside the disk contribute cross/2,
/// subsegments outside contribute circular sectors.
fn fan_contribution(p: (f64, f64), q: (f64, f64), r: f64) -> f64 {
    let inside = |a: (f64, f64)| a.0 * a.0 + a.1 * a.1 <= r * r;
    // intersection parameters of the segment with the circle
    let d = (q.0 - p.0, q.1 - p.1);
    let aa = d.0 * d.0 + d.1 * d.1;
    if aa < 1e-300 {
        return 0.0;
    }
    let bb = 2.0 * (p.0 * d.0 + p.1 * d.1);
    let cc = p.0 * p.0 + p.1 * p.1 - r * r;
    let disc = bb * bb - 4.0 * aa * cc;
    let mut ts = vec![0.0];
    if disc > 0.0 {
        let sq = disc.sqrt();
        for t in [(-bb - sq) / (2.0 * aa), (-bb + sq) / (2.0 * aa)] {
            if t > 0.0 && t < 1.0 {
                ts.push(t);
            }
        }
    }
    ts.push(1.0);
    ts.sort_by(f64::total_cmp);
    let at = |t: f64| (p.0 + d.0 * t, p.1 + d.1 * t);
    let mut area = 0.0;
    for w in ts.windows(2) {
        let a = at(w[0]);
        let b = at(w[1]);
        let mid = at(0.5 * (w[0] + w[1]));
        if inside(mid) {
            area += 0.5 * (a.0 * b.1 - a.1 * b.0);
        } else {
            // circular sector between the two directions
            let ang_a = a.1.atan2(a.0);
            let ang_b = b.1.atan2(b.0);
            let mut dang = ang_b - ang_a;
            while dang > std::f64::consts::PI {
                dang -= 2.0 * std::f64::consts::PI;
            }
            while dang < -std::f64::consts::PI {
                dang += 2.0 * std::f64::consts::PI;
            }
            area += 0.5 * r * r * dang;
        }
    }
    area
}

/// Table of `(r, A(r)/r^2)` over the given radii.
pub fn area_growth_profile(mesh: &SurfaceMesh, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    if mesh.is_empty() {
        return Err(MeshError::Empty);
    }
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        if r > mesh.coverage_radius {
            return Err(MeshError::MeshTooSmall(r, mesh.coverage_radius));
        }
        let mut a = 0.0;
        for t in &mesh.triangles {
            a += triangle_ball_area(
                mesh.vertices[t[0] as usize],
                mesh.vertices[t[1] as usize],
                mesh.vertices[t[2] as usize],
                r,
            );
        }
        out.push((r, a / (r * r)));
    }
    Ok(out)
}

/// Findings for one symmetry plane.
#[derive(Debug, Clone)]
pub struct PlaneReport {
    /// Which coordinate plane: 0 for {x1 = 0}, 1 for {x2 = 0}.
    pub axis: usize,
    /// Closed intersection curves per period (middle period window).
    pub closed_curves_per_period: usize,
    /// Closed curves that are discretely convex (all turning angles one sign).
    pub convex_curves_per_period: usize,
    /// Open chains (boundary effects of the sampled window).
    pub open_chains: usize,
}

/// Symmetry diagnostics: intersection polylines of the mesh with the two
/// vertical symmetry planes, counted per period.
///
/// The mesh carries its seam vertices on the planes themselves, so the
/// intersection is taken with planes offset by a small transversality shift
/// tau; curves are chained from triangle crossing segments and classified
/// by closure and discrete convexity.
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    pub planes: [PlaneReport; 2],
    pub tau: f64,
}

pub fn symmetry_diagnostics(mesh: &SurfaceMesh) -> Result<SymmetryReport> {
    if mesh.is_empty() {
        return Err(MeshError::Empty);
    }
    let tau = 1e-5;
    let p0 = plane_curves(mesh, 0, tau)?;
    let p1 = plane_curves(mesh, 1, tau)?;
    Ok(SymmetryReport {
        planes: [p0, p1],
        tau,
    })
}

fn plane_curves(mesh: &SurfaceMesh, axis: usize, tau: f64) -> Result<PlaneReport> {
    // Crossing segments of triangles with the plane {x_axis = tau}.
    let mut segments: Vec<([f64; 3], [f64; 3])> = Vec::new();
    for t in &mesh.triangles {
        let vs = [
            mesh.vertices[t[0] as usize],
            mesh.vertices[t[1] as usize],
            mesh.vertices[t[2] as usize],
        ];
        let s: Vec<f64> = vs.iter().map(|v| v[axis] - tau).collect();
        let mut pts: Vec<[f64; 3]> = Vec::new();
        for e in 0..3 {
            let (i, j) = (e, (e + 1) % 3);
            if s[i] == 0.0 {
                return Err(MeshError::NontransverseIntersection);
            }
            if s[i] * s[j] < 0.0 {
                let w = s[i] / (s[i] - s[j]);
                let p = [
                    vs[i][0] + w * (vs[j][0] - vs[i][0]),
                    vs[i][1] + w * (vs[j][1] - vs[i][1]),
                    vs[i][2] + w * (vs[j][2] - vs[i][2]),
                ];
                pts.push(p);
            }
        }
        if pts.len() == 2 {
            segments.push((pts[0], pts[1]));
        }
    }
    // Chain segments by quantized endpoints.
    let quant = |p: [f64; 3]| -> (i64, i64, i64) {
        let s = 1.0 / 5e-7;
        (
            (p[0] * s).round() as i64,
            (p[1] * s).round() as i64,
            (p[2] * s).round() as i64,
        )
    };
    let mut adjacency: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, (a, b)) in segments.iter().enumerate() {
        adjacency.entry(quant(*a)).or_default().push(i);
        adjacency.entry(quant(*b)).or_default().push(i);
    }
    let mut used = vec![false; segments.len()];
    let mut closed_mid = 0usize;
    let mut convex_mid = 0usize;
    let mut open_chains = 0usize;
    // Middle period window for per-period counting.
    let z_lo = -0.5;
    let z_hi = 0.5;
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        // walk forward from this segment
        let mut chain: Vec<[f64; 3]> = vec![segments[start].0, segments[start].1];
        used[start] = true;
        let mut closed = false;
        loop {
            let tail = *chain.last().unwrap();
            let key = quant(tail);
            let mut advanced = false;
            if let Some(cands) = adjacency.get(&key) {
                for &c in cands {
                    if used[c] {
                        continue;
                    }
                    let (a, b) = segments[c];
                    let next = if quant(a) == key { b } else { a };
                    used[c] = true;
                    chain.push(next);
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                break;
            }
            if quant(*chain.last().unwrap()) == quant(chain[0]) {
                closed = true;
                chain.pop();
                break;
            }
        }
        let centroid_z = chain.iter().map(|p| p[2]).sum::<f64>() / chain.len() as f64;
        let in_window = centroid_z >= z_lo && centroid_z < z_hi;
        if closed {
            if in_window {
                closed_mid += 1;
                if is_discretely_convex(&chain, axis) {
                    convex_mid += 1;
                }
            }
        } else {
            open_chains += 1;
        }
    }
    Ok(PlaneReport {
        axis,
        closed_curves_per_period: closed_mid,
        convex_curves_per_period: convex_mid,
        open_chains,
    })
}

/// All turning angles of the closed polygon have one sign (projected to the
/// plane coordinates).  Crossing points closer than a thousandth of the
/// curve diameter are merged first: chaining otherwise produces
/// noise-direction micro-segments near mesh vertices.
fn is_discretely_convex(chain: &[[f64; 3]], axis: usize) -> bool {
    let proj = |p: [f64; 3]| -> (f64, f64) {
        if axis == 0 {
            (p[1], p[2])
        } else {
            (p[0], p[2])
        }
    };
    let pts: Vec<(f64, f64)> = chain.iter().map(|p| proj(*p)).collect();
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = (lo.0.min(p.0), lo.1.min(p.1));
        hi = (hi.0.max(p.0), hi.1.max(p.1));
    }
    let diam = (hi.0 - lo.0).hypot(hi.1 - lo.1);
    if diam <= 0.0 {
        return false;
    }
    let min_step = 1e-3 * diam;
    let mut filtered: Vec<(f64, f64)> = vec![pts[0]];
    for p in &pts[1..] {
        let last = *filtered.last().unwrap();
        if (p.0 - last.0).hypot(p.1 - last.1) >= min_step {
            filtered.push(*p);
        }
    }
    while filtered.len() > 1 {
        let first = filtered[0];
        let last = *filtered.last().unwrap();
        if (first.0 - last.0).hypot(first.1 - last.1) < min_step {
            filtered.pop();
        } else {
            break;
        }
    }
    let n = filtered.len();
    if n < 3 {
        return false;
    }
    let mut sign = 0.0f64;
    for i in 0..n {
        let a = filtered[i];
        let b = filtered[(i + 1) % n];
        let c = filtered[(i + 2) % n];
        let u = (b.0 - a.0, b.1 - a.1);
        let v = (c.0 - b.0, c.1 - b.1);
        let cr = u.0 * v.1 - u.1 * v.0;
        if cr.abs() < 1e-9 * diam * diam {
            continue;
        }
        if sign == 0.0 {
            sign = cr.signum();
        } else if cr.signum() != sign {
            return false;
        }
    }
    sign != 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{catenoid_mesh, plane_mesh};
    use std::f64::consts::PI;

    #[test]
    fn plane_has_zero_curvature() {
        let m = plane_mesh(2.0, 24);
        let r = mean_curvature_residual(&m).unwrap();
        assert!(r < 1e-12, "plane residual {r}");
    }

    #[test]
    fn catenoid_curvature_residual_small() {
        let m = catenoid_mesh(2.0_f64.exp(), 64);
        let r = mean_curvature_residual(&m).unwrap();
        assert!(r < 1e-3, "catenoid residual {r}");
    }

    #[test]
    fn plane_area_growth_is_pi() {
        let m = plane_mesh(3.0, 40);
        let prof = area_growth_profile(&m, &[0.5, 1.0, 2.0, 2.9]).unwrap();
        for (r, bar) in prof {
            assert!((bar - PI).abs() < 1e-6, "r {r}: {bar}");
        }
    }

    #[test]
    fn doubled_plane_area_growth() {
        let mut m = plane_mesh(3.0, 32);
        let other = plane_mesh(3.0, 32);
        let offset = m.vertices.len() as u32;
        m.vertices.extend_from_slice(&other.vertices);
        m.normals.extend_from_slice(&other.normals);
        m.triangles
            .extend(other.triangles.iter().map(|t| [t[0] + offset, t[1] + offset, t[2] + offset]));
        let prof = area_growth_profile(&m, &[1.0, 2.5]).unwrap();
        for (_, bar) in prof {
            assert!((bar - 2.0 * PI).abs() < 1e-6);
        }
    }

    #[test]
    fn mesh_too_small_detected() {
        let m = plane_mesh(1.0, 8);
        assert!(matches!(
            area_growth_profile(&m, &[2.0]),
            Err(MeshError::MeshTooSmall(_, _))
        ));
    }

    #[test]
    fn triangle_clip_matches_full_containment() {
        // Triangle fully inside the ball: clipped area equals plain area.
        let a = [0.1, 0.0, 0.0];
        let b = [0.0, 0.2, 0.1];
        let c = [-0.1, 0.05, -0.05];
        let full = 0.5 * norm(cross(sub(b, a), sub(c, a)));
        assert!((triangle_ball_area(a, b, c, 10.0) - full).abs() < 1e-14);
        // Fully outside.
        let far = triangle_ball_area([5.0, 0.0, 0.0], [6.0, 0.0, 0.0], [5.0, 1.0, 0.0], 1.0);
        assert_eq!(far, 0.0);
    }

    #[test]
    fn plane_mesh_has_no_closed_symmetry_curves() {
        let m = plane_mesh(2.0, 16);
        let rep = symmetry_diagnostics(&m).unwrap();
        for p in &rep.planes {
            assert_eq!(p.closed_curves_per_period, 0, "negative control");
        }
    }
}
