// Scratch calibration runs (removed before release).
use aoselm::adapt::{adapt_real, adapt_virtual, rank_snapshot, underfit_check};
use aoselm::data::digits::SyntheticDigits;
use aoselm::data::hog::hog_features;
use aoselm::data::{sea, stagger};
use aoselm::linalg::{random_matrix, RandomScheme};
use aoselm::model::{one_hot_block, ConceptScope, ElmModel, InitScheme, LabeledBatch};
use aoselm::sequential::{ceoselm_update, oselm_update, GrowthSpec};
use aoselm::{Mat, RngStream};

fn accuracy(preds: &[usize], labels: &[usize]) -> f64 {
    preds.iter().zip(labels).filter(|(a, b)| a == b).count() as f64 / labels.len() as f64
}

fn stagger_run(c: f64, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed);
    let mut model = ElmModel::<f64>::init(9, 9, 2, InitScheme::Ros, c, &mut rng).unwrap();
    let mut tests = Vec::new();
    for concept in 1..=3usize {
        if concept > 1 {
            adapt_real(&mut model, 2, true).unwrap();
        }
        let block = concept - 1;
        let (x, labels) = stagger::generate_raw::<f64>(3520, concept, &mut rng).unwrap();
        let m = model.output_dim();
        for start in (0..3520).step_by(500) {
            let end = (start + 500).min(3520);
            let xb = Mat::from_fn(9, end - start, |i, j| x.get(i, start + j));
            let lb: Vec<usize> = labels[start..end].to_vec();
            let t = one_hot_block(&lb, 2 * block, 2, m);
            oselm_update(&mut model, &LabeledBatch::new(xb, t).unwrap()).unwrap();
        }
        let (tx, tl) = stagger::generate_raw::<f64>(880, concept, &mut rng).unwrap();
        tests.push((block, tx, tl));
    }
    tests
        .iter()
        .map(|(block, tx, tl)| {
            let preds = model.classify(tx, ConceptScope::Concept(*block)).unwrap();
            accuracy(&preds, tl)
        })
        .collect()
}

fn oselm_stagger_run(c: f64, seed: u64) -> f64 {
    let mut rng = RngStream::new(seed);
    let mut model = ElmModel::<f64>::init(9, 9, 2, InitScheme::Ros, c, &mut rng).unwrap();
    let mut test1 = None;
    for concept in 1..=3usize {
        let (x, labels) = stagger::generate_raw::<f64>(3520, concept, &mut rng).unwrap();
        for start in (0..3520).step_by(500) {
            let end = (start + 500).min(3520);
            let xb = Mat::from_fn(9, end - start, |i, j| x.get(i, start + j));
            let lb: Vec<usize> = labels[start..end].to_vec();
            let t = one_hot_block(&lb, 0, 2, 2);
            oselm_update(&mut model, &LabeledBatch::new(xb, t).unwrap()).unwrap();
        }
        let (tx, tl) = stagger::generate_raw::<f64>(880, concept, &mut rng).unwrap();
        if concept == 1 {
            test1 = Some((tx, tl));
        }
    }
    let (tx, tl) = test1.unwrap();
    let preds = model.classify(&tx, ConceptScope::Concept(0)).unwrap();
    accuracy(&preds, &tl)
}

fn chol_inverse_rank(k: &Mat) -> usize {
    let n = k.rows();
    match aoselm::linalg::spd_solve(k, &Mat::identity(n)) {
        Ok(p) => aoselm::linalg::numeric_rank(&p, None).unwrap_or(0),
        Err(_) => aoselm::linalg::numeric_rank(k, None).unwrap_or(0),
    }
}

fn underfit_calib() {
    for c in [1e10f64, 1e11, 1e12, 1e13] {
        for (pretrain, batch) in [(2000usize, 30usize), (2000, 240)] {
            let mut ranks = Vec::new();
            for seed in 0..5u64 {
                let mut rng = RngStream::new(900 + seed);
                let l0 = 150;
                let mut model =
                    ElmModel::<f64>::init(20, l0, 4, InitScheme::Ros, c, &mut rng).unwrap();
                for _ in 0..2 {
                    let n = pretrain / 2;
                    let x: Mat = random_matrix(&mut rng, 20, n, RandomScheme::Uniform);
                    let labels: Vec<usize> = (0..n).map(|_| rng.next_index(4)).collect();
                    let t = one_hot_block(&labels, 0, 4, 4);
                    oselm_update(&mut model, &LabeledBatch::new(x, t).unwrap()).unwrap();
                }
                let before = chol_inverse_rank(model.autocorrelation());
                let x: Mat = random_matrix(&mut rng, 20, batch, RandomScheme::Uniform);
                let labels: Vec<usize> = (0..batch).map(|_| rng.next_index(4)).collect();
                let t = one_hot_block(&labels, 0, 4, 4);
                let mut growth = GrowthSpec::new(120, rng.split());
                match ceoselm_update(&mut model, &LabeledBatch::new(x, t).unwrap(), &mut growth) {
                    Ok(()) => {
                        let after = chol_inverse_rank(model.autocorrelation());
                        ranks.push((before, after));
                    }
                    Err(e) => {
                        println!("    c={c:.0e} batch={batch} seed={seed}: solver err {e}");
                        ranks.push((before, usize::MAX));
                    }
                }
            }
            println!("  c={c:.0e} pre={pretrain} batch={batch}: ranks {ranks:?}");
        }
    }
}

fn digits_calib() {
    let stretch: f64 = std::env::args().nth(2).map(|s| s.parse().unwrap()).unwrap_or(1.0);
    let affine: bool = std::env::args().nth(3).is_some();
    let digits = SyntheticDigits::new(4242, 10);
    for seed in 0..3u64 {
        let mut rng = RngStream::new(seed);
        let set = digits.image_set::<f64>(1200, &mut rng); // 12000 images
        let train_n = 10_000;
        let l = 500;
        // grey-only model
        let mut grey = ElmModel::<f64>::init(784, l, 10, InitScheme::Ros, 100.0, &mut rng).unwrap();
        // VD model: grey phase then grey+hog phase
        let mut vd = ElmModel::<f64>::init(784, l, 10, InitScheme::Ros, 100.0, &mut rng).unwrap();
        let hogs: Vec<Vec<f64>> = set
            .images
            .iter()
            .map(|im| {
                hog_features::<f64>(im)
                    .unwrap()
                    .into_iter()
                    .map(|v| if affine { (v * stretch).min(1.0) * 2.0 - 1.0 } else { v * stretch })
                    .collect()
            })
            .collect();
        // hog-standalone reference
        let mut hog_only =
            ElmModel::<f64>::init(81, 200, 10, InitScheme::Ros, 100.0, &mut rng).unwrap();
        let batchsize = 1000;
        for start in (0..train_n).step_by(batchsize) {
            let end = start + batchsize;
            let labels: Vec<usize> = set.labels[start..end].to_vec();
            let t = one_hot_block::<f64>(&labels, 0, 10, 10);
            let xg = Mat::from_fn(784, batchsize, |i, j| set.images[start + j][i]);
            let xho = Mat::from_fn(81, batchsize, |i, j| hogs[start + j][i]);
            oselm_update(&mut grey, &LabeledBatch::new(xg.clone(), t.clone()).unwrap()).unwrap();
            oselm_update(&mut hog_only, &LabeledBatch::new(xho, t.clone()).unwrap()).unwrap();
            if start < train_n / 2 {
                oselm_update(&mut vd, &LabeledBatch::new(xg, t).unwrap()).unwrap();
            } else {
                if start == train_n / 2 {
                    adapt_virtual(&mut vd, 865, &mut rng).unwrap();
                }
                let xh = Mat::from_fn(865, batchsize, |i, j| {
                    if i < 784 {
                        set.images[start + j][i]
                    } else {
                        hogs[start + j][i - 784]
                    }
                });
                oselm_update(&mut vd, &LabeledBatch::new(xh, t).unwrap()).unwrap();
            }
        }
        // holdout
        let test_idx: Vec<usize> = (train_n..set.len()).collect();
        let tl: Vec<usize> = test_idx.iter().map(|&i| set.labels[i]).collect();
        let xg = Mat::from_fn(784, test_idx.len(), |i, j| set.images[test_idx[j]][i]);
        let xho = Mat::from_fn(81, test_idx.len(), |i, j| hogs[test_idx[j]][i]);
        let xgh = Mat::from_fn(865, test_idx.len(), |i, j| {
            if i < 784 {
                set.images[test_idx[j]][i]
            } else {
                hogs[test_idx[j]][i - 784]
            }
        });
        let acc_grey = accuracy(&grey.classify(&xg, ConceptScope::All).unwrap(), &tl);
        let acc_hog = accuracy(&hog_only.classify(&xho, ConceptScope::All).unwrap(), &tl);
        let acc_vd = accuracy(&vd.classify(&xgh, ConceptScope::All).unwrap(), &tl);
        println!("  seed {seed}: grey {acc_grey:.4} hog-only {acc_hog:.4} vd-greyhog {acc_vd:.4}");
    }
}

fn sea_quick() {
    // quick SEA sanity at L0=200 to check the ~90% ceiling with 10% noise
    let mut rng = RngStream::new(7);
    let c = 100.0;
    let mut model = ElmModel::<f64>::init(3, 200, 2, InitScheme::Ros, c, &mut rng).unwrap();
    let mut tests = Vec::new();
    for concept in 1..=4usize {
        if concept > 1 {
            adapt_real(&mut model, 2, true).unwrap();
        }
        let block = concept - 1;
        let (x, labels) = sea::generate_raw::<f64>(16000, concept, 0.1, &mut rng).unwrap();
        let m = model.output_dim();
        for start in (0..16000).step_by(1000) {
            let end = start + 1000;
            let xb = Mat::from_fn(3, 1000, |i, j| x.get(i, start + j));
            let lb: Vec<usize> = labels[start..end].to_vec();
            let t = one_hot_block(&lb, 2 * block, 2, m);
            oselm_update(&mut model, &LabeledBatch::new(xb, t).unwrap()).unwrap();
        }
        let (tx, tl) = sea::generate_raw::<f64>(4000, concept, 0.1, &mut rng).unwrap();
        tests.push((block, tx, tl));
    }
    for (block, tx, tl) in &tests {
        let preds = model.classify(tx, ConceptScope::Concept(*block)).unwrap();
        println!("  sea concept {}: acc {:.4}", block + 1, accuracy(&preds, tl));
    }
}

/// Growth step that rebuilds the output weights from the current batch's
/// cross-correlation only, discarding the accumulated memory term. This is
/// NOT the production update; it exists to document how the published
/// forgetting tables behave when the memory term is dropped.
fn reset_growth(
    model: &ElmModel<f64>,
    x: &Mat,
    t: &Mat,
    added: usize,
    rng: &mut RngStream,
) -> ElmModel<f64> {
    let d = model.input_dim();
    let l = model.hidden_count();
    let delta_a: Mat = random_matrix(rng, d, added, RandomScheme::Uniform);
    let delta_b: Vec<f64> = (0..added).map(|_| rng.uniform(-1.0, 1.0)).collect();
    // helper model to compute the new nodes' activations
    let probe = ElmModel::from_parts(
        delta_a.clone(),
        delta_b.clone(),
        Mat::identity(added),
        Mat::zeros(added, model.output_dim()),
        model.ridge(),
        model.activation(),
        model.scheme(),
        vec![(0, model.output_dim(), 1.0)],
    )
    .unwrap();
    let h = model.hidden_activations(x).unwrap();
    let dh = probe.hidden_activations(x).unwrap();

    let total = l + added;
    let mut k_grown = Mat::zeros(total, total);
    let mut top_left = model.autocorrelation().clone();
    h.accumulate_gram(&mut top_left);
    k_grown.copy_block(0, 0, &top_left);
    let cross = h.t_mul(&dh).unwrap();
    k_grown.copy_block(0, l, &cross);
    k_grown.copy_block(l, 0, &cross.transpose());
    let mut bottom = dh.gram();
    bottom.add_diag(1.0 / model.ridge());
    k_grown.copy_block(l, l, &bottom);

    // memoryless refresh: rhs = [Hᵀ T ; ΔHᵀ T] with no K_old*beta term
    let rhs = h.t_mul(t).unwrap().vstack(&dh.t_mul(t).unwrap()).unwrap();
    let beta = aoselm::linalg::spd_solve(&k_grown, &rhs).unwrap();

    let grown_a = model.input_weights().hstack(&delta_a).unwrap();
    let mut grown_b = model.bias().to_vec();
    grown_b.extend_from_slice(&delta_b);
    let blocks: Vec<(usize, usize, f64)> =
        model.concepts().iter().map(|c| (c.col_start(), c.width(), c.gain())).collect();
    ElmModel::from_parts(
        grown_a,
        grown_b,
        k_grown,
        beta,
        model.ridge(),
        model.activation(),
        model.scheme(),
        blocks,
    )
    .unwrap()
}

fn forgetting_reference() {
    let digits = SyntheticDigits::new(4242, 10);
    for seed in 0..3u64 {
        let mut rng = RngStream::new(seed);
        let set = digits.image_set::<f64>(1600, &mut rng);
        let first: Vec<usize> = (0..set.len()).filter(|&i| set.labels[i] < 6).collect();
        let second: Vec<usize> = (0..set.len()).filter(|&i| set.labels[i] >= 6).collect();
        let take = |idx: &[usize], range: std::ops::Range<usize>| -> (Mat, Vec<usize>) {
            let picks = &idx[range];
            let x = Mat::from_fn(784, picks.len(), |i, j| set.images[picks[j]][i]);
            let l: Vec<usize> =
                picks.iter().map(|&i| set.labels[i] - if set.labels[i] >= 6 { 6 } else { 0 }).collect();
            (x, l)
        };
        let (c1x, c1l) = take(&first, 0..4000);
        let (c2x, c2l) = take(&second, 0..4000);
        let (t1x, t1l) = take(&first, 4000..5000);
        let (t2x, t2l) = take(&second, 4000..5000);

        for variant in ["exact", "reset"] {
            let mut model =
                ElmModel::<f64>::init(784, 500, 6, InitScheme::Ros, 100.0, &mut RngStream::new(77 + seed))
                    .unwrap();
            let mut grng = RngStream::new(55 + seed);
            for start in (0..4000).step_by(1000) {
                let xb = Mat::from_fn(784, 1000, |i, j| c1x.get(i, start + j));
                let t = one_hot_block(&c1l[start..start + 1000], 0, 6, 6);
                oselm_update(&mut model, &LabeledBatch::new(xb, t).unwrap()).unwrap();
            }
            adapt_real(&mut model, 4, true).unwrap();
            for start in (0..4000).step_by(1000) {
                let xb = Mat::from_fn(784, 1000, |i, j| c2x.get(i, start + j));
                let t = one_hot_block(&c2l[start..start + 1000], 6, 4, 10);
                if start == 0 {
                    if variant == "reset" {
                        model = reset_growth(&model, &xb, &t, 125, &mut grng);
                    } else {
                        let mut growth = GrowthSpec::new(125, grng.split());
                        ceoselm_update(&mut model, &LabeledBatch::new(xb, t).unwrap(), &mut growth)
                            .unwrap();
                    }
                } else {
                    oselm_update(&mut model, &LabeledBatch::new(xb, t).unwrap()).unwrap();
                }
            }
            let a1 = accuracy(&model.classify(&t1x, ConceptScope::Concept(0)).unwrap(), &t1l);
            let a2 = accuracy(&model.classify(&t2x, ConceptScope::Concept(1)).unwrap(), &t2l);
            println!("  seed {seed} {variant}: C1 {a1:.4} C2 {a2:.4}");
        }
    }
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "forgetting" => forgetting_reference(),
        "stagger" => {
            for c in [1.0, 10.0, 100.0, 1e4, 1e6] {
                let mut all = Vec::new();
                for seed in 0..5 {
                    all.push(stagger_run(c, seed));
                }
                println!("c={c:.0e}: {all:?}");
                let os: Vec<f64> = (0..5).map(|s| oselm_stagger_run(c, s)).collect();
                println!("  oselm concept1 after drifts: {os:?}");
            }
        }
        "underfit" => underfit_calib(),
        "digits" => digits_calib(),
        "sea" => sea_quick(),
        _ => println!("usage: calib <stagger|underfit|digits|sea>"),
    }
}
