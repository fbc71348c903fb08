mod common;

use common::checks::{self, leaf_ids, uniform_dir};
use common::scene;
use proptest::prelude::*;
use wfpg_core::math::{Rgb, Vec3};
use wfpg_core::morton::morton_encode;
use wfpg_core::rng::RngStream;
use wfpg_core::svo::{build_octree, Side, SvoCache, VoxelFragment, VoxelGrid, NO_NODE};

fn well_formed(svo: &SvoCache) -> Result<(), String> {
    let nodes = svo.nodes();
    if nodes[0].parent != NO_NODE || nodes[0].level != 0 {
        return Err("bad root".into());
    }
    for level in 0..=svo.depth() {
        let range = svo.level_range(level);
        for id in range.clone() {
            let n = &nodes[id];
            if n.level as u32 != level {
                return Err(format!("node {id} stored at level {level} claims {}", n.level));
            }
            if id > range.start && nodes[id - 1].code >= n.code {
                return Err(format!("level {level} not strictly Morton ordered at {id}"));
            }
            if n.is_leaf() != (level == svo.depth()) {
                return Err(format!("node {id}: leaf flag disagrees with level"));
            }
            if n.is_leaf() {
                continue;
            }
            let first = n.first_child as usize;
            let count = n.child_mask.count_ones() as usize;
            let mut seen = 0u8;
            for c in first..first + count {
                let ch = &nodes[c];
                if ch.parent != id as u32 || ch.level as u32 != level + 1 || ch.code >> 3 != n.code {
                    return Err(format!("child {c} of {id} is inconsistent"));
                }
                seen |= 1 << (ch.code & 7);
            }
            if seen != n.child_mask {
                return Err(format!("node {id}: mask {:08b} but children cover {seen:08b}", n.child_mask));
            }
        }
    }
    Ok(())
}

fn unit_grid(r: u32) -> VoxelGrid {
    VoxelGrid {
        origin: Vec3::ZERO,
        side: 1.0,
        resolution: r,
    }
}

#[test]
fn cornell_tree_is_well_formed() {
    let s = scene("cornell.wfpg");
    for r in [16, 32, 64] {
        let svo = SvoCache::from_scene(&s, r, 0).unwrap();
        well_formed(&svo).unwrap();
        assert_eq!(svo.depth(), r.trailing_zeros());
    }
}

#[test]
fn random_fragment_cloud() {
    let mut rng = RngStream::new(50, 0, 0);
    let r = 64u32;
    let frags: Vec<VoxelFragment> = (0..10_000)
        .map(|_| {
            let mut c = || rng.next_index(r as usize) as u32;
            VoxelFragment {
                coord: [c(), c(), c()],
                normal: Vec3::Y,
            }
        })
        .collect();
    let svo = build_octree(&frags, unit_grid(r), 3).unwrap();
    well_formed(&svo).unwrap();
    let mut codes: Vec<u64> = frags.iter().map(|f| morton_encode(f.coord[0], f.coord[1], f.coord[2]).unwrap()).collect();
    codes.sort_unstable();
    codes.dedup();
    assert_eq!(svo.leaf_count(), codes.len());
    let leaf_codes: Vec<u64> = leaf_ids(&svo).iter().map(|&i| svo.node(i).code).collect();
    assert_eq!(leaf_codes, codes);
}

#[test]
fn surface_points_find_their_leaf() {
    // every point of every triangle lies in a leaf, and descending agrees
    // with a binary search over the sorted leaf codes
    let s = scene("cornell.wfpg");
    let svo = SvoCache::from_scene(&s, 64, 0).unwrap();
    let leaves = leaf_ids(&svo);
    let codes: Vec<u64> = leaves.iter().map(|&i| svo.node(i).code).collect();
    let mut rng = RngStream::new(51, 0, 0);
    for i in 0..10_000 {
        let t = &s.triangles[i % s.triangles.len()];
        let (a, b) = rng.next_2d();
        let p = t.sample_point(a, b);
        let c = svo.grid().locate(p).unwrap();
        let oracle = codes.binary_search(&morton_encode(c[0], c[1], c[2]).unwrap()).map(|k| leaves[k]);
        let got = svo.descend_leaf(p).unwrap();
        assert_eq!(got, oracle.ok(), "point {p:?}");
        assert!(got.is_some(), "surface point {p:?} is in no leaf");
        assert!(svo.node_bounds(got.unwrap()).contains(p));
    }
}

#[test]
fn empty_space_has_no_leaf() {
    let s = scene("cornell.wfpg");
    let svo = SvoCache::from_scene(&s, 32, 0).unwrap();
    assert_eq!(svo.descend_leaf(Vec3::new(0.5, 0.5, 0.5)).unwrap(), None);
    assert!(svo.descend_leaf(Vec3::new(5.0, 0.5, 0.5)).is_err());
}

fn recursive_exitance(svo: &SvoCache, id: u32, target: Vec3) -> Rgb {
    let n = svo.node(id);
    let side = n.side_towards(target);
    if n.is_leaf() {
        let s = side as usize;
        return if n.weight[s] > 0.0 { n.sum[s] / n.weight[s] } else { Rgb::BLACK };
    }
    let normal = n.side_normal(side);
    let first = n.first_child;
    let count = n.child_mask.count_ones();
    let mut acc = Rgb::BLACK;
    for c in first..first + count {
        acc += recursive_exitance(svo, c, normal);
    }
    acc / count as f64
}

#[test]
fn propagation_matches_recursive_oracle() {
    let mut rng = RngStream::new(52, 0, 0);
    for round in 0..50 {
        let frags: Vec<VoxelFragment> = (0..40)
            .map(|_| VoxelFragment {
                coord: [rng.next_index(4) as u32, rng.next_index(4) as u32, rng.next_index(4) as u32],
                normal: uniform_dir(&mut rng),
            })
            .collect();
        let mut svo = build_octree(&frags, unit_grid(4), round).unwrap();
        assert_eq!(svo.depth(), 2);
        for leaf in leaf_ids(&svo) {
            for _ in 0..rng.next_index(4) {
                let l = Rgb::new(rng.next_f64(), rng.next_f64(), rng.next_f64()) * 10.0;
                svo.accumulate_exitance(leaf, uniform_dir(&mut rng), l);
            }
        }
        svo.propagate_up();
        for id in 0..svo.node_count() as u32 {
            let n = svo.node(id).clone();
            for side in [Side::A, Side::B] {
                let want = recursive_exitance(&svo, id, n.side_normal(side));
                let got = n.exitance(side);
                assert!((got - want).map(f64::abs).max_channel() < 1e-12, "round {round} node {id} {side:?}");
            }
        }
    }
}

#[test]
fn footprint_level_matches_linear_scan() {
    let s = scene("cornell.wfpg");
    let svo = SvoCache::from_scene(&s, 64, 0).unwrap();
    let leaves = leaf_ids(&svo);
    let mut rng = RngStream::new(53, 0, 0);
    for _ in 0..1000 {
        let leaf = leaves[rng.next_index(leaves.len())];
        let r = 0.01 + 2.0 * rng.next_f64();
        let omega = 4.0 * std::f64::consts::PI / [64.0, 256.0, 1024.0, 4096.0, 16384.0][rng.next_index(5)];
        let area = r * r * omega;
        let mut best = (f64::INFINITY, 0u32);
        for level in (0..=svo.depth()).rev() {
            let side = svo.grid().side / (1u64 << level) as f64;
            let err = (area - side * side).abs();
            if err < best.0 {
                best = (err, level);
            }
        }
        let id = svo.match_footprint(leaf, area);
        assert_eq!(svo.node(id).level as u32, best.1, "area {area}");
        assert_eq!(svo.ancestor_at(leaf, best.1), id);
    }
}

#[test]
fn doubling_distance_moves_up_one_level() {
    let s = scene("cornell.wfpg");
    let svo = SvoCache::from_scene(&s, 64, 0).unwrap();
    let leaf = leaf_ids(&svo)[17];
    for level in 1..=svo.depth() {
        let r = svo.voxel_side(level);
        let id = svo.match_footprint(leaf, r * r);
        assert_eq!(svo.node(id).level as u32, level);
        let up = svo.match_footprint(leaf, 4.0 * r * r);
        assert_eq!(svo.node(up).level as u32, level - 1);
    }
}

#[test]
fn antipodal_normals() {
    checks::antipodality(10_000).unwrap();
}

#[test]
fn memory_grows_slower_than_volume() {
    let s = scene("cornell.wfpg");
    let mut prev: Option<(f64, usize)> = None;
    for r in [16u32, 32, 64, 128] {
        let svo = SvoCache::from_scene(&s, r, 0).unwrap();
        let fill = svo.leaf_count() as f64 / (r as f64).powi(3);
        eprintln!("R={r}: {} leaves, {} bytes", svo.leaf_count(), svo.memory_bytes());
        if let Some((prev_fill, bytes)) = prev {
            // surfaces scale with R^2: the filled fraction roughly halves per doubling
            assert!(fill < 0.6 * prev_fill, "R={r}: fill {fill} vs {prev_fill}");
            assert!(svo.memory_bytes() < 5 * bytes, "R={r}: {} vs {bytes}", svo.memory_bytes());
        }
        prev = Some((fill, svo.memory_bytes()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exitance_stays_finite_and_non_negative(seed in 0u64..10_000, deposits in 1usize..200) {
        let s = scene("cornell.wfpg");
        let mut svo = SvoCache::from_scene(&s, 16, seed).unwrap();
        let leaves = leaf_ids(&svo);
        let mut rng = RngStream::new(seed, 1, 0);
        for _ in 0..deposits {
            let l = Rgb::new(rng.next_f64(), rng.next_f64(), rng.next_f64()) * 100.0;
            svo.accumulate_exitance(leaves[rng.next_index(leaves.len())], uniform_dir(&mut rng), l);
        }
        svo.propagate_up();
        for n in svo.nodes() {
            for side in [Side::A, Side::B] {
                let e = n.exitance(side);
                prop_assert!(e.is_finite() && e.min_channel() >= 0.0);
            }
        }
        // a second pass changes nothing
        let before: Vec<_> = svo.nodes().iter().map(|n| n.mean).collect();
        svo.propagate_up();
        let after: Vec<_> = svo.nodes().iter().map(|n| n.mean).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn leaf_mean_is_arithmetic_mean(values in prop::collection::vec(0.0f64..50.0, 1..40)) {
        let frags = [VoxelFragment { coord: [1, 2, 3], normal: Vec3::Z }];
        let mut svo = build_octree(&frags, unit_grid(8), 0).unwrap();
        let leaf = leaf_ids(&svo)[0];
        for &v in &values {
            svo.accumulate_exitance(leaf, Vec3::Z, Rgb::splat(v));
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let got = svo.node(leaf).exitance(Side::A).r;
        prop_assert!((got - mean).abs() <= 1e-12 * mean.max(1.0));
        prop_assert_eq!(svo.node(leaf).exitance(Side::B), Rgb::BLACK);
    }
}
