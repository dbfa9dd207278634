mod common;

#[test]
fn mlp_gradient_matches_central_differences() {
    for seed in [1, 2, 3] {
        let err = common::mlp_gradient_error(5, 8, 6, 3, seed);
        assert!(err < 1e-4, "seed {seed}: max relative error {err:e}");
    }
}

#[test]
fn gradient_check_detects_a_wrong_gradient() {
    // perturbing the loss scale must break agreement, otherwise the check is vacuous
    use labelmine::classifiers::mlp::{loss_and_gradient, MlpModel};
    use labelmine::classifiers::SparseRows;
    use labelmine::dataset::FeatureMatrix;
    use labelmine::RandomSeed;

    let x = FeatureMatrix::new(2, 2, vec![0.5, 0.2, 0.1, 0.9]).unwrap();
    let rows = SparseRows::from_dense(&x);
    let model = MlpModel::init(2, 3, 2, RandomSeed(4));
    let (_, grad) = loss_and_gradient(&model, &rows, &[0, 1]);
    let mut bumped = model.clone();
    bumped.b2[0] += 1e-5;
    let (up, _) = loss_and_gradient(&bumped, &rows, &[0, 1]);
    bumped.b2[0] -= 2e-5;
    let (down, _) = loss_and_gradient(&bumped, &rows, &[0, 1]);
    let numeric = (up - down) / 2e-5;
    assert!((grad.b2[0] - numeric).abs() < 1e-8);
    assert!((2.0 * grad.b2[0] - numeric).abs() > 1e-3);
}
