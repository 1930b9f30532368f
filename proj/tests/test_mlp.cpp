#include <gtest/gtest.h>

#include <random>

#include "eeg/mlp.hpp"
#include "support/synthetic.hpp"

namespace eeg {
namespace {

struct Blobs {
  std::vector<std::vector<float>> features;
  std::vector<int> labels;

  std::vector<MlpExample> examples() const {
    std::vector<MlpExample> out;
    for (std::size_t i = 0; i < features.size(); ++i) out.push_back({features[i], labels[i]});
    return out;
  }
};

// Two Gaussian clusters centred at -mu and +mu along every axis.
Blobs blobs(std::uint64_t seed, int per_class, std::uint32_t dim = 8, double mu = 2.0) {
  std::mt19937_64 rng(seed);
  Blobs b;
  for (int k = 0; k < per_class; ++k) {
    b.features.push_back(synthetic::gaussian_vector(rng, dim, -mu));
    b.labels.push_back(0);
    b.features.push_back(synthetic::gaussian_vector(rng, dim, mu));
    b.labels.push_back(1);
  }
  return b;
}

double accuracy(const MlpClassifier& clf, const Blobs& data) {
  int hits = 0;
  for (std::size_t i = 0; i < data.features.size(); ++i) {
    hits += mlp_predict(clf, data.features[i]).label == data.labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(data.features.size());
}

TEST(Mlp, FitsSeparableClusters) {
  const auto train = blobs(1, 100);
  const auto clf = fit_mlp(5, train.examples(), {});
  EXPECT_EQ(clf.layer_index, 5u);
  EXPECT_EQ(clf.hidden, 128u);
  EXPECT_GE(clf.training_accuracy, 0.99);
  EXPECT_DOUBLE_EQ(clf.training_accuracy, accuracy(clf, train));
}

TEST(Mlp, GeneralisesToHeldOutDraws) {
  const auto clf = fit_mlp(1, blobs(2, 100).examples(), {});
  EXPECT_GE(accuracy(clf, blobs(99, 100)), 0.95);
}

TEST(Mlp, SameSeedIsBitIdentical) {
  const auto data = blobs(3, 40);
  MlpHyperparams params;
  params.epochs = 50;
  params.seed = 17;
  const auto a = fit_mlp(2, data.examples(), params);
  const auto b = fit_mlp(2, data.examples(), params);
  EXPECT_EQ(a, b);
  params.seed = 18;
  EXPECT_NE(fit_mlp(2, data.examples(), params).w1, a.w1);
}

TEST(Mlp, SingleClassInputIsRejected) {
  auto data = blobs(4, 5);
  for (auto& l : data.labels) l = 1;
  try {
    fit_mlp(1, data.examples(), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyClass);
    EXPECT_STREQ(e.what(), "single-class input");
  }
}

TEST(Mlp, RejectsMalformedTrainingData) {
  EXPECT_THROW(fit_mlp(1, std::vector<MlpExample>{}, {}), Error);

  auto data = blobs(5, 5);
  data.features[3].push_back(1.0f);
  EXPECT_THROW(fit_mlp(1, data.examples(), {}), Error);

  data = blobs(5, 5);
  data.labels[0] = 2;
  EXPECT_THROW(fit_mlp(1, data.examples(), {}), Error);

  data = blobs(5, 5);
  data.features[0][0] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(fit_mlp(1, data.examples(), {}), Error);

  MlpHyperparams bad;
  bad.hidden = 0;
  EXPECT_THROW(fit_mlp(1, blobs(5, 5).examples(), bad), Error);
}

TEST(Mlp, ZeroWeightsTieToBenign) {
  MlpClassifier clf;
  clf.input_dim = 3;
  clf.hidden = 2;
  clf.w1.assign(6, 0.0);
  clf.b1.assign(2, 0.0);
  clf.w2.assign(4, 0.0);
  clf.b2.assign(2, 0.0);
  const auto p = mlp_predict(clf, std::vector<float>{1, 2, 3});
  EXPECT_EQ(p.label, 0);
  EXPECT_DOUBLE_EQ(p.probability_harmful, 0.5);
}

TEST(Mlp, PredictRejectsWrongLength) {
  const auto clf = fit_mlp(1, blobs(6, 10).examples(), {});
  EXPECT_THROW(mlp_predict(clf, std::vector<float>(7, 0.0f)), Error);
}

TEST(Mlp, ValidateCatchesInconsistentWeights) {
  auto clf = fit_mlp(1, blobs(7, 10).examples(), {});
  EXPECT_NO_THROW(validate_mlp(clf));
  clf.b2.pop_back();
  EXPECT_THROW(validate_mlp(clf), Error);
}

}  // namespace
}  // namespace eeg
