use std::collections::HashMap;

use super::Mesh;

/// Red refinement: every triangle is split into four congruent children
/// through its edge midpoints. Children keep the parent orientation.
pub(super) fn red_refine(mesh: &Mesh) -> Mesh {
    let mut nodes = mesh.nodes().to_vec();
    let mut midpoint_of: HashMap<[usize; 2], usize> = HashMap::with_capacity(mesh.num_faces());
    for f in mesh.faces() {
        midpoint_of.insert(f.nodes, nodes.len());
        nodes.push(f.midpoint);
    }
    let mid = |a: usize, b: usize| midpoint_of[&[a.min(b), a.max(b)]];

    let mut triangles = Vec::with_capacity(4 * mesh.num_triangles());
    for &[a, b, c] in mesh.triangles() {
        let ab = mid(a, b);
        let bc = mid(b, c);
        let ca = mid(c, a);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([bc, ca, ab]);
    }
    Mesh::from_parts(nodes, triangles).expect("red refinement preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;

    fn canonical(m: &Mesh) -> Vec<[[i64; 2]; 3]> {
        let key = |p: Point| [(p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64];
        let mut tris: Vec<[[i64; 2]; 3]> = m
            .triangles()
            .iter()
            .map(|t| {
                let mut v = t.map(|i| key(m.nodes()[i]));
                v.sort();
                v
            })
            .collect();
        tris.sort();
        tris
    }

    #[test]
    fn quadruples_triangles_and_keeps_area() {
        let m = Mesh::structured_unit_square(1);
        let r = m.uniform_refine();
        assert_eq!(r.num_triangles(), 8);
        assert!((r.total_area() - 1.0).abs() < 1e-14);
        let j = Mesh::structured_unit_square(3).jittered(0.2, 3).unwrap();
        let rj = j.uniform_refine();
        assert!(((rj.total_area() - j.total_area()) / j.total_area()).abs() < 1e-14);
    }

    #[test]
    fn refining_structured_matches_finer_structured() {
        let a = Mesh::structured_unit_square(2).uniform_refine();
        let b = Mesh::structured_unit_square(4);
        assert_eq!(canonical(&a), canonical(&b));
    }

    #[test]
    fn children_partition_parent_area() {
        let m = Mesh::structured_unit_square(2).jittered(0.2, 11).unwrap();
        let r = m.uniform_refine();
        for t in 0..m.num_triangles() {
            let kids: f64 = (0..4).map(|k| r.area(4 * t + k)).sum();
            assert!((kids - m.area(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn width_halves_on_structured_family() {
        let m = Mesh::structured_unit_square(3);
        let r = m.uniform_refine();
        assert!((r.h() - 0.5 * m.h()).abs() < 1e-15);
        let boundary = |m: &Mesh| m.faces().iter().filter(|f| f.is_boundary()).map(|f| f.length).sum::<f64>();
        assert!((boundary(&r) - boundary(&m)).abs() < 1e-14);
    }
}
