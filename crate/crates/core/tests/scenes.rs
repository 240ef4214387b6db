use std::collections::{BTreeMap, BTreeSet};

use morphoscan::pipeline::{self, PipelineConfig};
use morphoscan::scene::{build_scenes, filter_noise, SceneRoster, Side, StreetScene};
use morphoscan::synth::oracle::oracle_adjacency;
use morphoscan::synth::{generate, hillside, random_corridor, Role};

fn majority(labels: &[i32], indices: &[usize]) -> i32 {
    let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
    for &i in indices {
        *counts.entry(labels[i]).or_default() += 1;
    }
    counts.into_iter().max_by_key(|&(l, n)| (n, -l)).map(|(l, _)| l).unwrap_or(-1)
}

#[test]
fn hillside_membership_matches_brute_force() {
    let spec = hillside(0.1, 5);
    let cloud = generate(&spec).unwrap();
    let labels = cloud.labels().unwrap();
    let mut cfg = PipelineConfig::default();
    // 0.1 m sampling gives 100 points per m².
    cfg.scene.min_density = 50.0;
    let out = pipeline::run(&cloud, &cfg, false).unwrap();

    let streets: Vec<i32> = (0..spec.planes.len() as i32).filter(|&k| spec.planes[k as usize].role == Role::Street).collect();
    let facades: Vec<i32> = (0..spec.planes.len() as i32).filter(|&k| spec.planes[k as usize].role.is_facade()).collect();
    let oracle = oracle_adjacency(cloud.points(), labels, &streets, &facades, cfg.scene.adjacency_radius);

    assert_eq!(out.scenes.len(), 3);
    for scene in &out.scenes {
        let street = majority(labels, &scene.street.indices);
        let got: BTreeSet<i32> = scene.facades.iter().map(|f| majority(labels, &f.entity.indices)).collect();
        assert_eq!(got, oracle[&street], "street {street}");
    }
    // Terraces are numbered from the top.
    let order: Vec<i32> = out.scenes.iter().map(|s| majority(labels, &s.street.indices)).collect();
    assert_eq!(order, vec![2, 1, 0]);
    // The two shared walls appear in two scenes each.
    let mut uses: BTreeMap<i32, usize> = BTreeMap::new();
    for s in &out.scenes {
        for f in &s.facades {
            *uses.entry(majority(labels, &f.entity.indices)).or_default() += 1;
        }
    }
    assert_eq!(uses[&4], 2);
    assert_eq!(uses[&5], 2);
}

#[test]
fn side_labels_agree_with_generator() {
    let cfg = PipelineConfig::default();
    let (mut right, mut total) = (0usize, 0usize);
    for seed in 201..221u64 {
        let spec = random_corridor(seed).build();
        let cloud = generate(&spec).unwrap();
        let labels = cloud.labels().unwrap();
        let out = pipeline::run(&cloud, &cfg, false).unwrap();
        // A and B follow the sign of the street axis, so a scene may be
        // labelled with the two sides swapped.
        for s in &out.scenes {
            let (mut same, mut swapped) = (0, 0);
            for f in &s.facades {
                let label = majority(labels, &f.entity.indices);
                let want = if label >= 0 { spec.planes[label as usize].role.side() } else { Side::Unknown };
                same += (want == f.side) as usize;
                swapped += (want == f.side.opposite()) as usize;
            }
            total += s.facades.len();
            right += same.max(swapped);
        }
    }
    assert!(total > 40);
    assert!(right as f64 >= 0.95 * total as f64, "{right} of {total} sides correct");
}

#[test]
fn scene_invariants_on_random_corridors() {
    let cfg = PipelineConfig::default();
    for seed in 301..306u64 {
        let cloud = generate(&random_corridor(seed).build()).unwrap();
        let out = pipeline::run(&cloud, &cfg, false).unwrap();
        let (kept, _) = filter_noise(&out.entities, cfg.scene.min_density);
        let vertical: BTreeSet<usize> = kept
            .iter()
            .filter(|e| e.orientation == morphoscan::geometry::Orientation::Vertical)
            .map(|e| e.id)
            .collect();
        for s in &out.scenes {
            for f in &s.facades {
                assert!(f.entity.centroid.z >= s.street.centroid.z);
                assert!(vertical.contains(&f.entity.id));
            }
        }
        let again = build_scenes(&cloud, &kept, &cfg.scene);
        assert_eq!(again, out.scenes);
        // Rebuilding from the scenes' own entities reproduces them.
        let mut own: Vec<_> = out
            .scenes
            .iter()
            .flat_map(|s| std::iter::once(s.street.clone()).chain(s.facades.iter().map(|f| f.entity.clone())))
            .collect();
        own.sort_by_key(|e| e.id);
        own.dedup_by_key(|e| e.id);
        assert_eq!(build_scenes(&cloud, &own, &cfg.scene), out.scenes);
        let rosters: Vec<SceneRoster> = out.scenes.iter().map(StreetScene::roster).collect();
        for (r, s) in rosters.iter().zip(&out.scenes) {
            assert_eq!(&StreetScene::from_roster(r, &out.entities).unwrap(), s);
        }
    }
}
