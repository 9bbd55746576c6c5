use infobench::info::{
    conditional_mi, discretize, entropy, f_statistic, linear_metrics, mi_shuffle_null,
    mutual_information, shannon_transform, te_shuffle_null, transfer_entropy,
};
use infobench::{DiscretizationSpec, JointHistogram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LN2: f64 = std::f64::consts::LN_2;

fn uniform(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random()).collect()
}

fn bits(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| f64::from(rng.random::<bool>())).collect()
}

#[test]
fn discretize_examples() {
    let b = discretize(&[1.0, 2.0, 3.0, 4.0], &DiscretizationSpec::fixed_width(2)).unwrap();
    assert_eq!(b.indices, vec![0, 0, 1, 1]);

    let b = discretize(&[2.5; 10], &DiscretizationSpec::quantile(4)).unwrap();
    assert!(b.indices.iter().all(|&i| i == 0));

    let b = discretize(&uniform(1000, 1), &DiscretizationSpec::quantile(10)).unwrap();
    let mut occupancy = [0usize; 10];
    for &i in &b.indices {
        occupancy[i] += 1;
    }
    assert!(
        occupancy.iter().all(|&c| (99..=101).contains(&c)),
        "{occupancy:?}"
    );
}

#[test]
fn entropy_examples() {
    let h = |counts: Vec<u64>| {
        let n = counts.len();
        entropy(&JointHistogram::from_counts(counts, &[n]).unwrap())
            .unwrap()
            .value
    };
    assert!((h(vec![5, 5, 5, 5]) - 4f64.ln()).abs() < 1e-12);
    assert_eq!(h(vec![0, 9, 0]), 0.0);
    let expected = -(0.25 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
    assert!((h(vec![1, 3]) - expected).abs() < 1e-12);
    assert!((h(vec![1, 3]) - 0.5623).abs() < 1e-4);
}

#[test]
fn mutual_information_examples() {
    let x = uniform(1000, 2);
    let spec = DiscretizationSpec::quantile(8);
    let i = mutual_information(&x, &x, &spec).unwrap().value;
    assert!((i - 8f64.ln()).abs() < 1e-3, "{i}");

    let pairs = [0.0, 0.0, 1.0, 1.0];
    let i = mutual_information(&pairs, &pairs, &DiscretizationSpec::quantile(2))
        .unwrap()
        .value;
    assert!((i - LN2).abs() < 1e-12);
}

#[test]
fn independent_streams_stay_below_shuffle_null() {
    let spec = DiscretizationSpec::quantile(8);
    let (x, y) = (uniform(5000, 3), uniform(5000, 4));
    let i = mutual_information(&x, &y, &spec).unwrap().value;
    let null = mi_shuffle_null(&x, &y, &spec, 200, 5).unwrap();
    assert!(i < null.p95() * 1.5, "{i} vs {}", null.p95());
    assert!(i < 0.02);
}

#[test]
fn conditional_mi_examples() {
    let spec = DiscretizationSpec::fixed_width(2);
    // x and y are both copies of z: independent given z.
    let z = bits(2000, 6);
    assert!(conditional_mi(&z, &z, &z, &spec).unwrap().value.abs() < 1e-12);

    // Constant condition reduces to mutual information.
    let x = bits(2000, 7);
    let y: Vec<f64> = x
        .iter()
        .zip(bits(2000, 8))
        .map(|(a, b)| if b > 0.5 { *a } else { 1.0 - a })
        .collect();
    let c = vec![1.0; x.len()];
    let cmi = conditional_mi(&x, &y, &c, &spec).unwrap().value;
    let mi = mutual_information(&x, &y, &spec).unwrap().value;
    assert!((cmi - mi).abs() < 1e-12);

    // y = x XOR z with z a fair coin.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut zs = Vec::new();
    for _ in 0..20_000 {
        let (a, b) = (rng.random::<bool>(), rng.random::<bool>());
        xs.push(f64::from(a));
        zs.push(f64::from(b));
        ys.push(f64::from(a ^ b));
    }
    let v = conditional_mi(&xs, &ys, &zs, &spec).unwrap().value;
    assert!((v - LN2).abs() < 1e-3, "{v}");
}

#[test]
fn transfer_entropy_examples() {
    let spec = DiscretizationSpec::fixed_width(2);
    let x = bits(50_000, 10);
    let mut y = vec![0.0; x.len()];
    y[1..].copy_from_slice(&x[..x.len() - 1]);
    let te = transfer_entropy(&x, &y, 1, &spec).unwrap().value;
    assert!((te - LN2).abs() < 0.01, "{te}");

    let self_te = transfer_entropy(&x, &x, 1, &spec).unwrap().value;
    assert!(self_te.abs() < 1e-12);

    let (a, b) = (uniform(5000, 11), uniform(5000, 12));
    let spec = DiscretizationSpec::quantile(4);
    let te = transfer_entropy(&a, &b, 1, &spec).unwrap().value;
    let null = te_shuffle_null(&a, &b, 1, &spec, 200, 13).unwrap();
    assert!(te < null.quantile(0.99), "{te} vs {}", null.quantile(0.99));
}

#[test]
fn f_statistic_examples() {
    let spec = DiscretizationSpec::quantile(6);
    let (x, y) = (uniform(3000, 14), uniform(3000, 15));
    let f = f_statistic(&x, &y, shannon_transform, &spec).unwrap().value;
    let i = mutual_information(&x, &y, &spec).unwrap().value;
    assert!((f - i).abs() < 1e-12, "{f} vs {i}");

    // E[p(x,y)/(p(x)p(y))] under the joint sums to one for any table.
    let e = f_statistic(&x, &y, |u| u, &spec).unwrap().value;
    assert!((e - 1.0).abs() < 1e-12, "{e}");

    // Self-paired binary series: diagonal ratios 1/p, off-diagonal ratios 0.
    let s = [0.0, 0.0, 0.0, 1.0];
    let g = |u: f64| u.sqrt();
    let by_hand =
        0.75 * 0.75 * g(1.0 / 0.75) + 0.25 * 0.25 * g(1.0 / 0.25) + 2.0 * 0.75 * 0.25 * g(0.0);
    let v = f_statistic(&s, &s, g, &DiscretizationSpec::fixed_width(2))
        .unwrap()
        .value;
    assert!((v - by_hand).abs() < 1e-12, "{v} vs {by_hand}");
}

#[test]
fn linear_metrics_examples() {
    let obs = [1.0, 3.0, 2.0, 5.0];
    let m = linear_metrics(&obs, &obs).unwrap();
    assert_eq!((m.mse, m.mean_bias), (0.0, 0.0));
    assert!((m.pearson_r.unwrap() - 1.0).abs() < 1e-12);

    let shifted: Vec<f64> = obs.iter().map(|v| v + 2.0).collect();
    let m = linear_metrics(&obs, &shifted).unwrap();
    assert!((m.mse - 4.0).abs() < 1e-12);
    assert!((m.pearson_r.unwrap() - 1.0).abs() < 1e-12);
    assert!((m.mean_bias - 2.0).abs() < 1e-12);

    let m = linear_metrics(&[0.0, 1.0, 2.0], &[2.0, 1.0, 0.0]).unwrap();
    assert!((m.pearson_r.unwrap() + 1.0).abs() < 1e-12);
    assert!((m.mse - 8.0 / 3.0).abs() < 1e-12);
}
