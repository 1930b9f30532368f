#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "eeg/types.hpp"

namespace eeg {
namespace {

EmbeddingTrace two_by_three() {
  EmbeddingTrace t;
  t.prompt_id = "p";
  t.model_id = "m";
  t.n_layers = 2;
  t.dim = 3;
  t.layers = {{1.0f, 2.0f, 3.0f}, {-1.0f, 0.5f, 0.0f}};
  return t;
}

TEST(ValidateTrace, WellFormedTraceIsOk) { EXPECT_TRUE(validate_trace(two_by_three()).ok()); }

TEST(ValidateTrace, ShortLayerIsReported) {
  auto t = two_by_three();
  t.layers[1] = {1.0f, 2.0f};
  const auto r = validate_trace(t);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].message, "layer 1 length 2 \xE2\x89\xA0 dim 3");
  EXPECT_EQ(r.violations[0].layer, 1u);
}

TEST(ValidateTrace, NanNamesLayerAndIndex) {
  auto t = two_by_three();
  t.layers[0][1] = std::numeric_limits<float>::quiet_NaN();
  const auto r = validate_trace(t);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].layer, 0u);
  EXPECT_EQ(r.violations[0].index, 1u);
  EXPECT_NE(r.violations[0].message.find("layer 0 index 1"), std::string::npos);
}

TEST(ValidateTrace, InfinityAndCountMismatchAreAllListed) {
  auto t = two_by_three();
  t.layers[1][2] = std::numeric_limits<float>::infinity();
  t.n_layers = 3;
  const auto r = validate_trace(t);
  EXPECT_EQ(r.violations.size(), 2u);
}

TEST(ValidateTrace, ZeroShapeIsInvalid) {
  EmbeddingTrace t;
  const auto r = validate_trace(t);
  EXPECT_FALSE(r.ok());
  EXPECT_GE(r.violations.size(), 2u);
}

TEST(ValidateTrace, IsDeterministic) {
  auto t = two_by_three();
  t.layers[0][0] = std::numeric_limits<float>::quiet_NaN();
  const auto a = validate_trace(t);
  const auto b = validate_trace(t);
  ASSERT_EQ(a.violations.size(), b.violations.size());
  for (std::size_t i = 0; i < a.violations.size(); ++i) {
    EXPECT_EQ(a.violations[i].message, b.violations[i].message);
  }
}

TEST(PromptLabel, ParsesEveryName) {
  for (auto label : {PromptLabel::Benign, PromptLabel::Harmful, PromptLabel::Jailbreak,
                     PromptLabel::Unknown}) {
    EXPECT_EQ(parse_label(to_string(label)), label);
  }
  EXPECT_FALSE(parse_label("Benign").has_value());
}

}  // namespace
}  // namespace eeg
