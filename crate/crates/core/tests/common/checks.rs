//! Oracle checks shared by the integration suites and the acceptance run.
//! Each returns `Err(reason)` on the first disagreement.

use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use wfpg_core::accumulation::{AccumulationBuffer, Frame, HeuristicKind};
use wfpg_core::guiding::{build_distribution, build_product, ProductBlocks, UPPER_RES};
use wfpg_core::math::{Ray, Rgb, Vec3, FOUR_PI, INV_PI, PI};
use wfpg_core::morton::{morton_decode, morton_encode, MAX_COORD};
use wfpg_core::octa::{octa_dir_to_uv, octa_uv_to_dir, VALID_RESOLUTIONS};
use wfpg_core::rng::RngStream;
use wfpg_core::scene::{brute_force, Bvh, Material, Triangle};
use wfpg_core::svo::{cluster_normals, SvoCache, NO_NODE};
use wfpg_core::wavefront::{partition_spatial, update_exitance, PathBuffer};

use super::scene;

pub type Check = Result<(), String>;

pub fn uniform_dir(rng: &mut RngStream) -> Vec3 {
    let (a, b) = rng.next_2d();
    let z = 1.0 - 2.0 * a;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = 2.0 * PI * b;
    Vec3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Upper tail probability of Pearson's statistic. Bins expecting fewer than
/// five hits are pooled into one.
pub fn chi_square_p(observed: &[u64], expected: &[f64]) -> f64 {
    let (mut stat, mut dof) = (0.0, 0usize);
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        if e < 5.0 {
            pool_o += o as f64;
            pool_e += e;
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
        dof += 1;
    }
    if pool_e >= 5.0 {
        stat += (pool_o - pool_e).powi(2) / pool_e;
        dof += 1;
    } else if pool_o > 0.0 && pool_e == 0.0 {
        return 0.0;
    }
    if dof < 2 {
        return 1.0;
    }
    1.0 - ChiSquared::new((dof - 1) as f64).unwrap().cdf(stat)
}

fn random_field(rng: &mut RngStream, n: usize, zero_prob: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n * n)
        .map(|_| if rng.next_f64() < zero_prob { 0.0 } else { rng.next_f64().powi(3) * 10.0 })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        v[rng.next_index(n * n)] = 1.0;
    }
    v
}

/// Summed cell densities times cell solid angle equal one for random fields.
pub fn distribution_normalization() -> Check {
    let mut rng = RngStream::new(11, 0, 0);
    for case in 0..1000 {
        let n = VALID_RESOLUTIONS[rng.next_index(VALID_RESOLUTIONS.len())];
        let zero_prob = 0.3 * rng.next_f64();
        let values = random_field(&mut rng, n, zero_prob);
        let g = build_distribution(&values, n);
        let cell = FOUR_PI / (n * n) as f64;
        let mut total = 0.0;
        for r in 0..n {
            for c in 0..n {
                total += g.pdf_cell(c, r) * cell;
            }
        }
        if (total - 1.0).abs() > 1e-5 {
            return Err(format!("case {case}: N={n} integrates to {total}"));
        }
        let last = *g.inner().marginal_cdf().last().unwrap();
        if last != 1.0 {
            return Err(format!("case {case}: marginal ends at {last}"));
        }
    }
    Ok(())
}

fn cell_histogram(n: usize, draws: usize, mut draw: impl FnMut() -> (Vec3, f64), pdf: impl Fn(Vec3) -> f64) -> Result<Vec<u64>, String> {
    let mut hist = vec![0u64; n * n];
    for i in 0..draws {
        let (d, p) = draw();
        let expect = pdf(d);
        if (p - expect).abs() > 1e-9 * expect.max(1.0) {
            return Err(format!("draw {i}: returned pdf {p} but pdf() gives {expect}"));
        }
        if p <= 0.0 {
            return Err(format!("draw {i}: sampled a zero-density direction"));
        }
        let (c, r) = octa_dir_to_uv(d).cell(n);
        hist[r * n + c] += 1;
    }
    Ok(hist)
}

/// Histogram of sampled cells against the cell masses the density reports.
pub fn plain_sampler_chi_square() -> Check {
    let mut rng = RngStream::new(12, 0, 0);
    let n = 16;
    let values = random_field(&mut rng, n, 0.2);
    let g = build_distribution(&values, n);
    let draws = 400_000;
    let hist = cell_histogram(n, draws, || g.sample(rng.next_f64(), rng.next_f64()), |d| g.pdf(d))?;
    let expected: Vec<f64> = (0..n * n)
        .map(|i| values[i] / values.iter().sum::<f64>() * draws as f64)
        .collect();
    let p = chi_square_p(&hist, &expected);
    if p <= 0.01 {
        return Err(format!("plain sampler chi-square p = {p}"));
    }
    Ok(())
}

/// Independent dense evaluation of the two-layer product probabilities.
pub fn dense_product(values: &[f64], n: usize, albedo: f64, wo: Vec3, normal: Vec3, eps: f64) -> Vec<f64> {
    let b = n / UPPER_RES;
    let mut upper = vec![0.0; UPPER_RES * UPPER_RES];
    let mut block_sum = vec![0.0; UPPER_RES * UPPER_RES];
    for r in 0..n {
        for c in 0..n {
            block_sum[(r / b) * UPPER_RES + c / b] += values[r * n + c];
        }
    }
    for ur in 0..UPPER_RES {
        for uc in 0..UPPER_RES {
            let u = (uc as f64 + 0.5) / UPPER_RES as f64;
            let v = (ur as f64 + 0.5) / UPPER_RES as f64;
            let d = octa_uv_to_dir(u, v);
            let cos = d.dot(normal);
            let f = if cos > 0.0 && wo.dot(normal) > 0.0 { albedo * INV_PI } else { 0.0 };
            let mean = block_sum[ur * UPPER_RES + uc] / (b * b) as f64;
            upper[ur * UPPER_RES + uc] = (mean * f * cos.max(0.0)).max(eps);
        }
    }
    let upper_total: f64 = upper.iter().sum();
    let mut p = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let k = (r / b) * UPPER_RES + c / b;
            p[r * n + c] = upper[k] / upper_total * values[r * n + c] / block_sum[k];
        }
    }
    p
}

fn random_lambert_setup(rng: &mut RngStream) -> (f64, Vec3, Vec3) {
    let normal = uniform_dir(rng);
    let mut wo = uniform_dir(rng);
    if wo.dot(normal) < 0.0 {
        wo = -wo;
    }
    (0.2 + 0.7 * rng.next_f64(), wo, normal)
}

/// Cell masses of the product sampler equal the dense oracle to rounding.
pub fn product_matches_dense() -> Check {
    let mut rng = RngStream::new(13, 0, 0);
    for case in 0..200 {
        let n = [8, 16, 32, 64][rng.next_index(4)];
        let values: Vec<f64> = (0..n * n).map(|_| 1e-2 + rng.next_f64()).collect();
        let (albedo, wo, normal) = random_lambert_setup(&mut rng);
        let eps = 1e-2;
        let m = Material::lambert("m", Rgb::splat(albedo));
        let blocks = ProductBlocks::new(&values, n);
        let h = build_product(&blocks, &m, wo, normal, eps).map_err(|e| e.to_string())?;
        let oracle = dense_product(&values, n, albedo, wo, normal, eps);
        let cell = FOUR_PI / (n * n) as f64;
        for r in 0..n {
            for c in 0..n {
                let got = h.pdf_cell(c, r) * cell;
                let want = oracle[r * n + c];
                if (got - want).abs() > 1e-12 {
                    return Err(format!("case {case}: cell ({c},{r}) mass {got} vs oracle {want}"));
                }
            }
        }
    }
    Ok(())
}

pub fn product_sampler_chi_square() -> Check {
    let mut rng = RngStream::new(14, 0, 0);
    let n = 16;
    for trial in 0..3 {
        let values: Vec<f64> = (0..n * n).map(|_| 1e-2 + rng.next_f64().powi(2)).collect();
        let (albedo, wo, normal) = random_lambert_setup(&mut rng);
        let m = Material::lambert("m", Rgb::splat(albedo));
        let blocks = ProductBlocks::new(&values, n);
        let h = build_product(&blocks, &m, wo, normal, 1e-2).map_err(|e| e.to_string())?;
        let draws = 300_000;
        let hist = cell_histogram(
            n,
            draws,
            || {
                let (a, b) = rng.next_2d();
                let (c, d) = rng.next_2d();
                h.sample(a, b, c, d)
            },
            |d| h.pdf(d),
        )?;
        let expected: Vec<f64> = dense_product(&values, n, albedo, wo, normal, 1e-2)
            .iter()
            .map(|p| p * draws as f64)
            .collect();
        let p = chi_square_p(&hist, &expected);
        if p <= 0.01 {
            return Err(format!("trial {trial}: product sampler chi-square p = {p}"));
        }
    }
    Ok(())
}

/// Straightforward re-implementation of the binning rule with hash maps.
pub fn binning_oracle(leaves: &[u32], svo: &SvoCache, l_min: u32, c_ray: u32) -> Vec<(u32, Vec<u32>)> {
    let mut count: HashMap<u32, u32> = HashMap::new();
    for &leaf in leaves {
        let mut id = leaf;
        loop {
            *count.entry(id).or_default() += 1;
            let n = svo.node(id);
            if n.level as u32 <= l_min || n.parent == NO_NODE {
                break;
            }
            id = n.parent;
        }
    }
    let mut bins: HashMap<u32, Vec<u32>> = HashMap::new();
    for (i, &leaf) in leaves.iter().enumerate() {
        let mut id = leaf;
        while count[&id] < c_ray && svo.node(id).level as u32 > l_min {
            id = svo.node(id).parent;
        }
        bins.entry(id).or_default().push(i as u32);
    }
    let mut out: Vec<(u32, Vec<u32>)> = bins.into_iter().collect();
    out.sort();
    out
}

pub fn leaf_ids(svo: &SvoCache) -> Vec<u32> {
    svo.level_range(svo.depth()).map(|i| i as u32).collect()
}

pub fn binning_matches_oracle(sets: usize) -> Check {
    let sc = scene("cornell.wfpg");
    let svo = SvoCache::from_scene(&sc, 32, 1).map_err(|e| e.to_string())?;
    let leaves = leaf_ids(&svo);
    let mut rng = RngStream::new(15, 0, 0);
    for set in 0..sets {
        // clustered draws so that some subtrees cross c_ray and others do not
        let count = 1 + rng.next_index(400);
        let span = 1 + rng.next_index(leaves.len());
        let start = rng.next_index(leaves.len());
        let rays: Vec<u32> = (0..count)
            .map(|_| leaves[(start + rng.next_index(span)) % leaves.len()])
            .collect();
        let l_min = rng.next_index(svo.depth() as usize) as u32;
        let c_ray = 1 + rng.next_index(96) as u32;
        let got: Vec<(u32, Vec<u32>)> = partition_spatial(&rays, &svo, l_min, c_ray)
            .into_iter()
            .map(|b| (b.node, b.members))
            .collect();
        let want = binning_oracle(&rays, &svo, l_min, c_ray);
        if got != want {
            return Err(format!("set {set}: {} bins vs oracle {} (l_min {l_min}, c_ray {c_ray})", got.len(), want.len()));
        }
        if (0..svo.node_count() as u32).any(|i| svo.ray_count(i) != 0) {
            return Err(format!("set {set}: counters not cleared"));
        }
    }
    Ok(())
}

/// Random emitter-terminated paths through the Cornell octree.
pub fn random_paths(svo: &SvoCache, rng: &mut RngStream, paths: usize, max_depth: usize) -> PathBuffer {
    let leaves = leaf_ids(svo);
    let mut buf = PathBuffer::new(paths, max_depth);
    for p in 0..paths {
        let n = 1 + rng.next_index(max_depth);
        buf.record(p, 0, Vec3::new(0.5, 0.5, -1.4), Rgb::WHITE);
        let mut t = Rgb::WHITE;
        for k in 1..=n {
            let b = svo.node_bounds(leaves[rng.next_index(leaves.len())]);
            let e = b.extent();
            let pos = b.min + Vec3::new(e.x * rng.next_f64(), e.y * rng.next_f64(), e.z * rng.next_f64());
            buf.record(p, k, pos, t);
            let f = Rgb::new(rng.next_f64(), rng.next_f64(), rng.next_f64());
            t *= if rng.next_f64() < 0.05 { Rgb::new(f.r, 0.0, f.b) } else { f * 2.0 };
        }
        if rng.next_f64() < 0.8 {
            buf.emitted[p] = Rgb::new(rng.next_f64() * 20.0, rng.next_f64() * 20.0, rng.next_f64() * 20.0);
        }
    }
    buf
}

/// Per-leaf, per-side sums computed path by path without the deposit list.
pub fn deposit_oracle(paths: &PathBuffer, svo: &SvoCache) -> HashMap<(u32, usize), (Rgb, f64)> {
    let mut out: HashMap<(u32, usize), (Rgb, f64)> = HashMap::new();
    for p in 0..paths.len() {
        let le = paths.emitted[p];
        if le.r == 0.0 && le.g == 0.0 && le.b == 0.0 {
            continue;
        }
        let n = paths.vertex_count[p] as usize;
        let tn = paths.throughput_at(p, n);
        for k in 1..=n {
            let tk = paths.throughput_at(p, k);
            if tk.r == 0.0 || tk.g == 0.0 || tk.b == 0.0 {
                continue;
            }
            let x = paths.position(p, k);
            let Ok(Some(leaf)) = svo.descend_leaf(x) else { continue };
            let w = paths.position(p, k - 1) - x;
            let w = w / w.length();
            let nrm = svo.node(leaf).normal;
            let side = if w.dot(nrm) >= -w.dot(nrm) { 0 } else { 1 };
            let l = Rgb::new(le.r * tn.r / tk.r, le.g * tn.g / tk.g, le.b * tn.b / tk.b);
            let e = out.entry((leaf, side)).or_insert((Rgb::BLACK, 0.0));
            e.0 += l;
            e.1 += 1.0;
        }
    }
    out
}

pub fn deposits_match_oracle() -> Check {
    let sc = scene("cornell.wfpg");
    let mut svo = SvoCache::from_scene(&sc, 32, 2).map_err(|e| e.to_string())?;
    let mut rng = RngStream::new(16, 0, 0);
    for round in 0..20 {
        svo.clear_exitance();
        let paths = random_paths(&svo, &mut rng, 500, 8);
        update_exitance(&paths, &mut svo);
        let oracle = deposit_oracle(&paths, &svo);
        for leaf in leaf_ids(&svo) {
            let node = svo.node(leaf);
            for side in 0..2 {
                let (sum, w) = oracle.get(&(leaf, side)).copied().unwrap_or((Rgb::BLACK, 0.0));
                let err = (node.sum[side] - sum).map(f64::abs).max_channel();
                if node.weight[side] != w || err > 1e-12 * sum.max_channel().max(1.0) {
                    return Err(format!(
                        "round {round}: leaf {leaf} side {side}: {:?}/{} vs oracle {:?}/{}",
                        node.sum[side], node.weight[side], sum, w
                    ));
                }
            }
        }
    }
    Ok(())
}

pub fn octa_round_trip(count: usize) -> Check {
    let mut rng = RngStream::new(17, 0, 0);
    let mut worst: f64 = 0.0;
    let specials = [Vec3::X, -Vec3::X, Vec3::Y, -Vec3::Y, Vec3::Z, -Vec3::Z, Vec3::new(1.0, 1.0, 0.0).normalized()];
    for i in 0..count + specials.len() {
        let d = if i < specials.len() { specials[i] } else { uniform_dir(&mut rng) };
        let g = octa_dir_to_uv(d);
        if !(0.0..1.0).contains(&g.u) || !(0.0..1.0).contains(&g.v) {
            return Err(format!("{d:?} maps outside the square: {g:?}"));
        }
        worst = worst.max(octa_uv_to_dir(g.u, g.v).angle_to(d));
    }
    if worst >= 1e-5 {
        return Err(format!("worst round-trip error {worst} rad"));
    }
    Ok(())
}

pub fn morton_round_trip(count: usize) -> Check {
    let mut rng = RngStream::new(18, 0, 0);
    let m = MAX_COORD - 1;
    let fixed = [(0, 0, 0), (m, m, m), (m, 0, 0), (0, m, 0), (0, 0, m), (1, 2, 3)];
    for i in 0..count + fixed.len() {
        let (x, y, z) = if i < fixed.len() {
            fixed[i]
        } else {
            let mut c = || (rng.next_f64() * MAX_COORD as f64) as u32;
            (c(), c(), c())
        };
        let code = morton_encode(x, y, z).map_err(|e| e.to_string())?;
        if morton_decode(code) != (x, y, z) {
            return Err(format!("({x},{y},{z}) decodes to {:?}", morton_decode(code)));
        }
    }
    if morton_encode(MAX_COORD, 0, 0).is_ok() {
        return Err("overflow accepted".into());
    }
    Ok(())
}

fn random_soup(rng: &mut RngStream, count: usize) -> Vec<Triangle> {
    (0..count)
        .map(|_| {
            let c = Vec3::new(rng.next_f64(), rng.next_f64(), rng.next_f64()) * 10.0;
            let mut p = || c + Vec3::new(rng.next_f64() - 0.5, rng.next_f64() - 0.5, rng.next_f64() - 0.5) * 2.0;
            Triangle::new(p(), p(), p(), 0)
        })
        .collect()
}

pub fn bvh_matches_brute_force(rays: usize) -> Check {
    let mut rng = RngStream::new(19, 0, 0);
    let cornell = scene("cornell.wfpg").triangles;
    for (name, tris) in [("cornell", cornell), ("soup", random_soup(&mut rng, 500))] {
        let bvh = Bvh::build(&tris);
        let (lo, hi) = if name == "cornell" { (-0.2, 1.2) } else { (-1.0, 11.0) };
        for i in 0..rays / 2 {
            let o = Vec3::new(rng.next_f64(), rng.next_f64(), rng.next_f64()) * (hi - lo) + Vec3::splat(lo);
            let ray = Ray::new(o, uniform_dir(&mut rng));
            let a = bvh.intersect(&tris, &ray, 1e-9, f64::INFINITY);
            let b = brute_force(&tris, &ray, 1e-9, f64::INFINITY);
            let same = match (a, b) {
                (None, None) => true,
                (Some(a), Some(b)) => a.t == b.t,
                _ => false,
            };
            if !same {
                return Err(format!("{name} ray {i}: bvh {a:?} vs brute force {b:?}"));
            }
        }
    }
    Ok(())
}

pub fn antipodality(sets: usize) -> Check {
    let mut rng = RngStream::new(20, 0, 0);
    for set in 0..sets {
        let count = 1 + rng.next_index(20);
        let normals: Vec<Vec3> = (0..count).map(|_| uniform_dir(&mut rng)).collect();
        let (a, b) = cluster_normals(&normals, &mut rng);
        if b != -a {
            return Err(format!("set {set}: {a:?} and {b:?} are not exact opposites"));
        }
    }
    let sc = scene("cornell.wfpg");
    let svo = SvoCache::from_scene(&sc, 32, 3).map_err(|e| e.to_string())?;
    for (i, n) in svo.nodes().iter().enumerate() {
        use wfpg_core::svo::Side;
        if n.side_normal(Side::B) != -n.side_normal(Side::A) {
            return Err(format!("node {i} sides are not exact opposites"));
        }
    }
    Ok(())
}

/// Weighted mean of constant frames evaluated with plain loops.
pub fn heuristic_oracle(kind: HeuristicKind, values: &[f64], w: &[f64]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (j, (&v, &wi)) in values.iter().zip(w).enumerate() {
        let i = j + 1;
        let h = match kind {
            HeuristicKind::Linear => i.min(5) as f64,
            HeuristicKind::Quadratic => (i.min(5) * i.min(5)) as f64,
            HeuristicKind::OneTwo => if i == 1 { 1.0 } else { 2.0 },
            HeuristicKind::DiscardFirst => if i == 1 { 0.0 } else { 1.0 },
            HeuristicKind::Constant | HeuristicKind::PtFirst => 1.0,
        };
        num += wi * h * v;
        den += wi * h;
    }
    (den > 0.0).then(|| num / den)
}

pub fn heuristics_match_oracle(cases: usize) -> Check {
    let mut rng = RngStream::new(21, 0, 0);
    for case in 0..cases {
        let kind = HeuristicKind::ALL[rng.next_index(6)];
        let len = 1 + rng.next_index(12);
        let values: Vec<Vec<f64>> = (0..len).map(|_| (0..6).map(|_| rng.next_f64() * 50.0).collect()).collect();
        let w: Vec<f64> = (0..len).map(|_| 0.1 + rng.next_f64() * 3.0).collect();
        let mut acc = AccumulationBuffer::new(2, 1, kind);
        for (vals, &wi) in values.iter().zip(&w) {
            let px = vec![Rgb::new(vals[0], vals[1], vals[2]), Rgb::new(vals[3], vals[4], vals[5])];
            acc.add_weighted(&Frame::new(2, 1, px), wi).map_err(|e| e.to_string())?;
        }
        let resolved = acc.resolve();
        for ch in 0..6 {
            let col: Vec<f64> = values.iter().map(|v| v[ch]).collect();
            let want = heuristic_oracle(kind, &col, &w);
            match (&resolved, want) {
                (Ok(f), Some(want)) => {
                    let got = f.pixels[ch / 3].to_array()[ch % 3];
                    if (got - want).abs() > 1e-12 * want.abs().max(1.0) {
                        return Err(format!("case {case}: {kind} channel {ch}: {got} vs {want}"));
                    }
                }
                (Err(_), None) => {}
                _ => return Err(format!("case {case}: {kind} disagrees on whether the weight sum is zero")),
            }
        }
    }
    Ok(())
}
