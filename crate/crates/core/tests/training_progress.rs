use chcl_core::exec::Sequential;
use chcl_core::families::toy_dataset;
use chcl_core::training::{pretrain, TrainConfig};

#[test]
fn toy_loss_decreases_for_most_seeds() {
    let data = toy_dataset(0);
    let mut wins = 0;
    for seed in 0..10 {
        let config = TrainConfig {
            epochs: 50,
            seed,
            ..TrainConfig::default()
        };
        let trace = pretrain(&data, &config, &Sequential).unwrap().trace;
        let (first, last) = (trace[0].total, trace[49].total);
        println!("seed {seed}: {first:.4} -> {last:.4}");
        if last < first {
            wins += 1;
        }
    }
    assert!(wins >= 9, "{wins}/10");
}

#[test]
fn views_of_one_graph_align_after_pretraining() {
    use chcl_core::linalg::{dot, norm};
    use chcl_core::model::gcn_forward;
    use chcl_core::training::make_pair;

    let data = toy_dataset(0);
    let cos = |a: &[f64], b: &[f64]| dot(a, b) / (norm(a) * norm(b));
    let mut wins = 0;
    for seed in 0..10 {
        let config = TrainConfig {
            epochs: 50,
            seed,
            ..TrainConfig::default()
        };
        let params = pretrain(&data, &config, &Sequential).unwrap().params;
        let z: Vec<[Vec<f64>; 2]> = data
            .graphs()
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let p = make_pair(g, &config, 1000, i).unwrap();
                [
                    gcn_forward(&params, &p.first.graph).unwrap().z,
                    gcn_forward(&params, &p.second.graph).unwrap().z,
                ]
            })
            .collect();
        let n = z.len();
        let same: f64 = (0..n).map(|i| cos(&z[i][0], &z[i][1])).sum::<f64>() / n as f64;
        let mut cross = 0.0;
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i) {
                cross += cos(&z[i][0], &z[j][1]);
            }
        }
        cross /= (n * (n - 1)) as f64;
        println!("seed {seed}: same {same:.4} cross {cross:.4}");
        if same > cross {
            wins += 1;
        }
    }
    assert!(wins >= 9, "{wins}/10");
}
