#include <algorithm>

#include <doctest.h>

#include "cbmadv/error.hpp"
#include "cbmadv/models.hpp"
#include "cbmadv/rng.hpp"
#include "test_helpers.hpp"

using namespace cbmadv;

TEST_CASE("1-NN scores its own training set perfectly") {
  const LabeledDataset ds = testutil::blob_dataset(15, 201);
  TrainConfig cfg;
  cfg.knn_k = 1;
  const TrainedModel m = train_classifier(Algorithm::Knn, cfg, ds);
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(m.predict(ds.rows[i]) == ds.labels[i]);
}

TEST_CASE("knn tie-breaking: mean distance, then lowest class index") {
  // Two Ball points at distance 1 and 3, two InnerRace points at 2 and 2.
  // With k=4 the votes tie 2-2; Ball has the same mean distance (2) so the
  // lower class index wins. Pulling one InnerRace point closer flips it.
  LabeledDataset ds;
  auto point = [](double v) {
    FeatureVector f;
    f[0] = v;
    return f;
  };
  ds.push_back(point(1.0), Label::Ball);
  ds.push_back(point(3.0), Label::Ball);
  ds.push_back(point(2.0), Label::InnerRace);
  ds.push_back(point(-2.0), Label::InnerRace);
  TrainConfig cfg;
  cfg.knn_k = 4;
  const TrainedModel m = train_classifier(Algorithm::Knn, cfg, ds);
  CHECK(m.predict(point(0.0)) == Label::Ball);

  ds.rows[3][0] = -1.5;  // InnerRace mean distance now 1.75 < 2
  const TrainedModel m2 = train_classifier(Algorithm::Knn, cfg, ds);
  CHECK(m2.predict(point(0.0)) == Label::InnerRace);
}

TEST_CASE("decision tree finds the single separating threshold") {
  LabeledDataset ds;
  auto point = [](double v) {
    FeatureVector f;
    f[3] = v;
    return f;
  };
  ds.push_back(point(-2.0), Label::Normal);
  ds.push_back(point(-1.0), Label::Normal);
  ds.push_back(point(1.0), Label::Ball);
  ds.push_back(point(2.0), Label::Ball);
  TrainConfig cfg;
  const TrainedModel m = train_classifier(Algorithm::DecisionTree, cfg, ds);
  const auto& tree = std::get<DecisionTreeModel>(m.variant());
  REQUIRE(tree.nodes.size() == 3);  // one split, two leaves
  CHECK(tree.nodes[0].feature == 3);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.0));
  CHECK(m.predict(point(-5.0)) == Label::Normal);
  CHECK(m.predict(point(5.0)) == Label::Ball);
}

TEST_CASE("every algorithm learns the blob dataset") {
  const LabeledDataset ds = testutil::blob_dataset(30, 211);
  TrainConfig cfg;
  cfg.seed = 9;
  cfg.forest_trees = 20;
  for (Algorithm a : kAllAlgorithms) {
    const TrainedModel m = train_classifier(a, cfg, ds);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (m.predict(ds.rows[i]) == ds.labels[i]) ++correct;
    const double acc = static_cast<double>(correct) / static_cast<double>(ds.size());
    INFO("algorithm ", algorithm_name(a));
    // Depth-1 boosting is weak by design; everything else should nail blobs.
    CHECK(acc >= (a == Algorithm::AdaBoost ? 0.4 : 0.95));
  }
}

TEST_CASE("forest of one tree without bootstrap equals the plain tree") {
  const LabeledDataset ds = testutil::blob_dataset(25, 223, 0.6);
  TrainConfig cfg;
  cfg.seed = 4;
  cfg.forest_trees = 1;
  cfg.forest_bootstrap = false;
  cfg.forest_mtry = static_cast<int>(kFeatureCount);
  const TrainedModel forest = train_classifier(Algorithm::RandomForest, cfg, ds);
  const TrainedModel tree = train_classifier(Algorithm::DecisionTree, cfg, ds);

  Rng rng(224);
  for (int i = 0; i < 200; ++i) {
    const FeatureVector x = testutil::random_features(rng, 2.0);
    CHECK(forest.predict(x) == tree.predict(x));
  }
}

TEST_CASE("forest votes match per-tree enumeration") {
  const LabeledDataset ds = testutil::blob_dataset(20, 227, 0.8);
  TrainConfig cfg;
  cfg.seed = 12;
  cfg.forest_trees = 15;
  const TrainedModel m = train_classifier(Algorithm::RandomForest, cfg, ds);
  const auto& forest = std::get<RandomForestModel>(m.variant());

  Rng rng(228);
  for (int i = 0; i < 100; ++i) {
    const FeatureVector x = testutil::random_features(rng, 2.0);
    std::array<int, kClassCount> votes{};
    for (const auto& t : forest.trees) ++votes[static_cast<std::size_t>(t.predict(x))];
    std::size_t best = 0;
    for (std::size_t c = 1; c < kClassCount; ++c)
      if (votes[c] > votes[best]) best = c;
    CHECK(m.predict(x) == kAllLabels[best]);
  }
}

TEST_CASE("permutation invariance for knn, naive bayes, and qda") {
  const LabeledDataset ds = testutil::blob_dataset(25, 229, 0.7);
  LabeledDataset shuffled = ds;
  Rng rng(230);
  std::vector<std::size_t> order(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled.rows[i] = ds.rows[order[i]];
    shuffled.labels[i] = ds.labels[order[i]];
  }

  TrainConfig cfg;
  for (Algorithm a : {Algorithm::Knn, Algorithm::GaussianNb, Algorithm::Qda}) {
    const TrainedModel m1 = train_classifier(a, cfg, ds);
    const TrainedModel m2 = train_classifier(a, cfg, shuffled);
    for (int i = 0; i < 100; ++i) {
      const FeatureVector x = testutil::random_features(rng, 2.0);
      INFO("algorithm ", algorithm_name(a));
      CHECK(m1.predict(x) == m2.predict(x));
    }
  }
}

TEST_CASE("training is deterministic for every algorithm") {
  const LabeledDataset ds = testutil::blob_dataset(20, 233, 0.5);
  TrainConfig cfg;
  cfg.seed = 77;
  cfg.forest_trees = 10;
  Rng rng(234);
  std::vector<FeatureVector> probes;
  for (int i = 0; i < 50; ++i) probes.push_back(testutil::random_features(rng, 2.0));

  for (Algorithm a : kAllAlgorithms) {
    const TrainedModel m1 = train_classifier(a, cfg, ds);
    const TrainedModel m2 = train_classifier(a, cfg, ds);
    for (const auto& x : probes) {
      INFO("algorithm ", algorithm_name(a));
      CHECK(m1.predict(x) == m2.predict(x));
    }
    const auto p1 = testutil::temp_path("det_a.model");
    const auto p2 = testutil::temp_path("det_b.model");
    save_model(m1, p1);
    save_model(m2, p2);
    CHECK(testutil::read_file(p1) == testutil::read_file(p2));
  }
}

TEST_CASE("naive bayes applies the variance floor to degenerate features") {
  LabeledDataset ds;
  Rng rng(241);
  for (int i = 0; i < 10; ++i) {
    FeatureVector f = testutil::random_features(rng);
    f[5] = 1.0;  // constant within and across classes
    ds.push_back(f, i % 2 == 0 ? Label::Ball : Label::Normal);
  }
  TrainConfig cfg;
  const TrainedModel m = train_classifier(Algorithm::GaussianNb, cfg, ds);
  const auto& nb = std::get<GaussianNbModel>(m.variant());
  for (const auto& c : nb.classes) CHECK(c.variance[5] == 1e-9);
  const FeatureVector x = testutil::random_features(rng);
  CHECK_NOTHROW(m.predict(x));
}

TEST_CASE("qda falls back to the ridge for a degenerate class covariance") {
  LabeledDataset ds;
  Rng rng(251);
  // Ball rows are all identical: zero covariance, needs the ridge.
  FeatureVector constant = testutil::random_features(rng);
  for (int i = 0; i < 6; ++i) ds.push_back(constant, Label::Ball);
  for (int i = 0; i < 6; ++i) ds.push_back(testutil::random_features(rng), Label::Normal);
  TrainConfig cfg;
  const TrainedModel m = train_classifier(Algorithm::Qda, cfg, ds);
  CHECK(m.predict(constant) == Label::Ball);
}

TEST_CASE("empty and single-class datasets are rejected") {
  LabeledDataset empty;
  TrainConfig cfg;
  CHECK_THROWS_AS(train_classifier(Algorithm::Knn, cfg, empty), EmptyClass);

  LabeledDataset one_class;
  Rng rng(257);
  for (int i = 0; i < 5; ++i) one_class.push_back(testutil::random_features(rng), Label::Ball);
  CHECK_THROWS_AS(train_classifier(Algorithm::Mlp, cfg, one_class), EmptyClass);
}

TEST_CASE("predict_batch agrees with per-row predict") {
  const LabeledDataset ds = testutil::blob_dataset(15, 263);
  TrainConfig cfg;
  cfg.forest_trees = 5;
  const TrainedModel m = train_classifier(Algorithm::RandomForest, cfg, ds);
  const auto batch = m.predict_batch(ds.rows);
  REQUIRE(batch.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) CHECK(batch[i] == m.predict(ds.rows[i]));
}

TEST_CASE("model serialization round trip is prediction-identical") {
  const LabeledDataset ds = testutil::blob_dataset(20, 269, 0.6);
  TrainConfig cfg;
  cfg.seed = 31;
  cfg.forest_trees = 8;
  Rng rng(270);
  std::vector<FeatureVector> probes;
  for (int i = 0; i < 100; ++i) probes.push_back(testutil::random_features(rng, 2.5));

  for (Algorithm a : kAllAlgorithms) {
    const TrainedModel m = train_classifier(a, cfg, ds);
    const auto path = testutil::temp_path("roundtrip.model");
    save_model(m, path);
    const TrainedModel loaded = load_model(path);
    CHECK(loaded.algorithm() == a);
    for (const auto& x : probes) {
      INFO("algorithm ", algorithm_name(a));
      CHECK(loaded.predict(x) == m.predict(x));
    }
  }
}

TEST_CASE("algorithm names round trip") {
  for (Algorithm a : kAllAlgorithms) CHECK(parse_algorithm(algorithm_name(a)) == a);
  CHECK_THROWS_AS(parse_algorithm("svm_rbf"), ConfigError);
}
