//! Region-count equalities that let logical operators be deformed between a
//! reference region and the complement of another: the counts g_R must agree
//! across each related pair.

use stslab_core::analysis::Region;
use stslab_core::lattice::{build_toric, LatticeLayout};
use stslab_core::stabilizer::StabilizerCode;

fn g(code: &StabilizerCode, region: &Region) -> usize {
    code.g_region(&region.qubits()).unwrap()
}

/// Pairs (A, B) with A equivalent to the complement of B, in three
/// dimensions. Every pair must satisfy g_A == g_{complement(B)}.
fn related_pairs(layout: &LatticeLayout) -> Vec<(Region, Region)> {
    let q = |mask: [bool; 3]| Region::spanning_box(layout, &mask).unwrap();
    let r = |m: usize| Region::winding_union(layout, m).unwrap();
    let line_x = q([true, false, false]);
    let line_y = q([false, true, false]);
    let line_z = q([false, false, true]);
    let plane_xy = q([true, true, false]);
    let plane_yz = q([false, true, true]);
    let plane_xz = q([true, false, true]);
    vec![
        (r(0), r(2)),
        (line_x.clone(), plane_xy.union(&plane_xz).unwrap()),
        (line_y.clone(), plane_xy.union(&plane_yz).unwrap()),
        (line_z.clone(), plane_xz.union(&plane_yz).unwrap()),
        (
            line_x.union(&line_y).unwrap(),
            plane_xy.union(&line_z).unwrap(),
        ),
        (
            line_y.union(&line_z).unwrap(),
            plane_yz.union(&line_x).unwrap(),
        ),
        (
            line_z.union(&line_x).unwrap(),
            plane_xz.union(&line_y).unwrap(),
        ),
        (r(1), r(1)),
        (plane_xy.clone(), plane_xy.clone()),
        (plane_yz.clone(), plane_yz.clone()),
        (plane_xz.clone(), plane_xz),
    ]
}

#[test]
fn three_dimensional_deformation_equalities_hold_for_edge_qubits() {
    let (code, layout) = build_toric(3, 1, 2).unwrap();
    for (i, (region, partner)) in related_pairs(&layout).iter().enumerate() {
        assert_eq!(
            g(&code, region),
            g(&code, &partner.complement()),
            "relation {i}"
        );
    }
}

#[test]
fn three_dimensional_deformation_equalities_hold_for_face_qubits() {
    let (code, layout) = build_toric(3, 2, 2).unwrap();
    for (i, (region, partner)) in related_pairs(&layout).iter().enumerate() {
        assert_eq!(
            g(&code, region),
            g(&code, &partner.complement()),
            "relation {i}"
        );
    }
}
