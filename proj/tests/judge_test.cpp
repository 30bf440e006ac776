#include "chartfi/judge.hpp"

#include <random>

#include <gtest/gtest.h>

#include "support/images.hpp"

using namespace chartfi;

namespace {

struct Rig {
  std::shared_ptr<MockChatProvider> mock;
  ChatClient client;
  Judge judge;
  ImageData chart = make_image(test_support::tiny_png(40, 80, 120));

  explicit Rig(std::vector<std::string> replies)
      : mock(std::make_shared<MockChatProvider>([&] {
          std::vector<MockReply> script;
          for (auto& r : replies) script.push_back({std::move(r), {}});
          return script;
        }())),
        client(mock),
        judge(client, "adjudicator-x") {}
};

const std::string kDescription =
    "The line chart plots accuracy over 20 epochs. ViT peaks at 0.91 around epoch 12 "
    "and then declines slightly, which suggests overfitting.";

}  // namespace

TEST(FaithfulnessScore, Formula) {
  EXPECT_EQ(faithfulness_score({10, 0, {}, "", ""}), 1.0);
  EXPECT_EQ(faithfulness_score({10, 10, {}, "", ""}), 0.0);
  EXPECT_EQ(faithfulness_score({8, 2, {}, "", ""}), 0.75);
  EXPECT_FALSE(faithfulness_score({0, 0, {}, "", ""}));
}

TEST(FaithfulnessScore, PropertyWithinUnitInterval) {
  std::mt19937 rng(2);
  for (int i = 0; i < 500; ++i) {
    const long total = std::uniform_int_distribution<long>(1, 60)(rng);
    const long wrong = std::uniform_int_distribution<long>(0, total)(rng);
    const double s = *faithfulness_score({total, wrong, {}, "", ""});
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(JudgeFaithfulness, NoErrors) {
  Rig rig({R"({"n_total_claims":10,"n_erroneous":0,"errors":[]})"});
  const auto v = rig.judge.judge_faithfulness(rig.chart, kDescription);
  EXPECT_EQ(v.n_total_claims, 10);
  EXPECT_EQ(*faithfulness_score(v), 1.0);
  EXPECT_EQ(v.adjudicator, "adjudicator-x");
}

TEST(JudgeFaithfulness, VerdictPreserved) {
  Rig rig({R"({"n_total_claims":8,"n_erroneous":2,"errors":[
      {"claim_text":"ViT peaks at 0.91","category":"numerical value","explanation":"peak is 0.89"},
      {"claim_text":"then declines","category":"Trend","explanation":"it plateaus"}]})"});
  const auto v = rig.judge.judge_faithfulness(rig.chart, kDescription);
  ASSERT_EQ(v.errors.size(), 2u);
  EXPECT_EQ(v.errors[0].category, "numerical value");
  EXPECT_EQ(v.errors[1].category, "trend");
  EXPECT_EQ(v.errors[0].claim_text, "ViT peaks at 0.91");
  EXPECT_EQ(*faithfulness_score(v), 0.75);
  EXPECT_EQ(json(v)["errors"][1]["explanation"], "it plateaus");
}

TEST(JudgeFaithfulness, InconsistentVerdictRepromptsThenFails) {
  const std::string bad = R"({"n_total_claims":8,"n_erroneous":3,"errors":[
      {"claim_text":"a","category":"trend"},{"claim_text":"b","category":"range"}]})";
  Rig rig({bad, bad});
  try {
    rig.judge.judge_faithfulness(rig.chart, kDescription);
    FAIL() << "expected JudgeError";
  } catch (const JudgeError& e) {
    EXPECT_EQ(e.raw_text(), bad);
  }
  ASSERT_EQ(rig.mock->calls(), 2u);
  EXPECT_NE(rig.mock->captured()[1].user_text.find("n_erroneous is 3"), std::string::npos);

  Rig recovers({bad, R"({"n_total_claims":8,"n_erroneous":0,"errors":[]})"});
  EXPECT_EQ(recovers.judge.judge_faithfulness(recovers.chart, kDescription).n_erroneous, 0);
}

TEST(JudgeFaithfulness, OneVisionCallWithWholeDescription) {
  Rig rig({R"({"n_total_claims":3,"n_erroneous":0,"errors":[]})"});
  rig.judge.judge_faithfulness(rig.chart, kDescription);
  const auto captured = rig.mock->captured();
  ASSERT_EQ(captured.size(), 1u);
  const auto& req = captured[0];
  ASSERT_EQ(req.images.size(), 1u);
  EXPECT_EQ(req.images[0].bytes, rig.chart.bytes);
  EXPECT_NE(req.user_text.find(kDescription), std::string::npos);
  EXPECT_EQ(req.response_format, ResponseFormat::Json);
  EXPECT_EQ(req.model_id, "adjudicator-x");
}

TEST(JudgeFaithfulness, RejectsUnknownCategoryAndBadInput) {
  Rig rig({R"({"n_total_claims":2,"n_erroneous":1,"errors":[{"claim_text":"x","category":"spelling"}]})"});
  EXPECT_THROW(rig.judge.judge_faithfulness(rig.chart, kDescription), JudgeError);
  EXPECT_THROW(rig.judge.judge_faithfulness(rig.chart, " "), ValidationError);
  EXPECT_THROW(rig.judge.judge_faithfulness(ImageData{"image/png", "nope"}, kDescription), ValidationError);
}

TEST(AcuityScore, Formula) {
  AcuityVerdict v;
  v.scores = {5, 5, 5, 5, 5};
  EXPECT_EQ(acuity_score(v), 5.0);
  v.scores = {1, 1, 1, 1, 1};
  EXPECT_EQ(acuity_score(v), 1.0);
  const double means[] = {3.22, 3.54, 3.50, 2.53, 3.67};
  EXPECT_NEAR((means[0] + means[1] + means[2] + means[3] + means[4]) / 5, 3.292, 1e-12);
}

TEST(JudgeAcuity, Passthrough) {
  Rig rig({R"({"accuracy":5,"integration":5,"insight":5,"etiological":5,"multivariate":5})"});
  EXPECT_EQ(rig.judge.judge_acuity(rig.chart, kDescription).scores, (std::array<int, 5>{5, 5, 5, 5, 5}));
  Rig mixed({R"({"accuracy":3,"integration":4,"insight":4,"etiological":3,"multivariate":4,
                 "rationales":{"insight":"notes overfitting"}})"});
  const auto v = mixed.judge.judge_acuity(mixed.chart, kDescription);
  EXPECT_EQ(v.scores, (std::array<int, 5>{3, 4, 4, 3, 4}));
  EXPECT_EQ(v[AcuityDimension::Etiological], 3);
  EXPECT_EQ(v.rationales.at("insight"), "notes overfitting");
  EXPECT_DOUBLE_EQ(acuity_score(v), 3.6);
}

TEST(JudgeAcuity, OutOfRangeRepromptsThenFails) {
  const std::string bad = R"({"accuracy":3,"integration":4,"insight":4,"etiological":6,"multivariate":4})";
  Rig rig({bad, bad});
  EXPECT_THROW(rig.judge.judge_acuity(rig.chart, kDescription), JudgeError);
  ASSERT_EQ(rig.mock->calls(), 2u);
  EXPECT_NE(rig.mock->captured()[1].user_text.find("etiological"), std::string::npos);
}

TEST(ErrorCategories, CanonicalNames) {
  EXPECT_EQ(kErrorCategories.size(), 9u);
  EXPECT_EQ(canonical_error_category("Numerical Value"), "numerical value");
  EXPECT_EQ(canonical_error_category("colour"), "color");
  EXPECT_FALSE(canonical_error_category("grammar"));
}
