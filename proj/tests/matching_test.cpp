#include "chartfi/matching.hpp"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "support/fact_gen.hpp"
#include "support/oracles.hpp"

using namespace chartfi;
using test_support::FactGenerator;

namespace {

std::vector<std::string> words(std::initializer_list<const char*> w) { return {w.begin(), w.end()}; }

DataFact trend(std::vector<std::string> states) {
  DataFact f = DataFact::of_type(FactType::Trend);
  std::vector<Parameter> p(states.begin(), states.end());
  f.parameters = std::move(p);
  return f;
}

DataFact relational(FactType t, const char* rel, const char* a, const char* b) {
  DataFact f = DataFact::of_type(t);
  f.parameters = std::vector<Parameter>{std::string(rel), std::string(a), std::string(b)};
  return f;
}

DataFact distribution(std::vector<DegreeState> pairs) {
  DataFact f = DataFact::of_type(FactType::Distribution);
  f.parameters = std::vector<Parameter>(pairs.begin(), pairs.end());
  return f;
}

DataFact value_fact(double v, const char* entity) {
  DataFact f = DataFact::of_type(FactType::Value);
  f.parameters = std::vector<Parameter>{std::string(entity), v};
  return f;
}

std::multiset<std::pair<std::string, std::string>> pair_keys(const MatchResult& r,
                                                             const std::vector<DataFact>& R,
                                                             const std::vector<DataFact>& M) {
  std::multiset<std::pair<std::string, std::string>> out;
  for (const auto& p : r.pairs) {
    out.emplace(canonical_serialize(R[p.reference_index]), canonical_serialize(M[p.model_index]));
  }
  return out;
}

}  // namespace

TEST(LcsRatio, Examples) {
  const auto s = words({"Increase", "Peak"});
  EXPECT_DOUBLE_EQ(lcs_ratio(s, s), 1.0);
  EXPECT_DOUBLE_EQ(lcs_ratio(std::vector<std::string>{}, words({"Increase"})), 0.0);
  EXPECT_DOUBLE_EQ(lcs_ratio(words({"Increase", "Peak", "Decrease"}), words({"Peak", "Increase", "Decrease"})),
                   2.0 / 3.0);
}

TEST(LcsRatio, AgreesWithBruteForceAndIsSymmetric) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> len(0, 7), sym(0, 3);
  for (int it = 0; it < 400; ++it) {
    std::vector<int> a(static_cast<std::size_t>(len(rng))), b(static_cast<std::size_t>(len(rng)));
    for (auto& x : a) x = sym(rng);
    for (auto& x : b) x = sym(rng);
    ASSERT_EQ(lcs_length(a, b), test_support::brute_force_lcs(a, b));
    EXPECT_EQ(lcs_ratio(a, b), lcs_ratio(b, a));
    EXPECT_EQ(lcs_ratio(a, b) == 1.0, a == b);
  }
}

TEST(SigmaDimension, TrendExamples) {
  const MatchConfig cfg;
  const TokenNormalizer norm;
  EXPECT_DOUBLE_EQ(sigma_dimension(trend({"Increase"}), trend({"Increase"}), Dimension::Parameters, cfg, norm), 1.0);
  EXPECT_DOUBLE_EQ(sigma_dimension(trend({"Increase", "Peak", "Decrease"}), trend({"Increase", "Decrease"}),
                                   Dimension::Parameters, cfg, norm),
                   2.0 / 3.0);
}

TEST(SigmaDimension, ComparisonSwapInvertsDirection) {
  const MatchConfig cfg;
  const TokenNormalizer norm;
  const auto r = relational(FactType::Comparison, "Greater", "A", "B");
  EXPECT_EQ(sigma_dimension(r, relational(FactType::Comparison, "Less", "B", "A"), Dimension::Parameters, cfg, norm), 1.0);
  EXPECT_EQ(sigma_dimension(r, relational(FactType::Comparison, "Greater", "B", "A"), Dimension::Parameters, cfg, norm), 0.0);
  EXPECT_EQ(sigma_dimension(r, relational(FactType::Comparison, "Greater", "a", "b"), Dimension::Parameters, cfg, norm), 1.0);

  // correlation sign does not depend on argument order
  const auto c = relational(FactType::Correlation, "Positive", "X", "Y");
  EXPECT_EQ(sigma_dimension(c, relational(FactType::Correlation, "Positive", "Y", "X"), Dimension::Parameters, cfg, norm), 1.0);
  EXPECT_EQ(sigma_dimension(c, relational(FactType::Correlation, "Negative", "Y", "X"), Dimension::Parameters, cfg, norm), 0.0);
}

TEST(SigmaDimension, DistributionPartialCredit) {
  const MatchConfig cfg;
  const TokenNormalizer norm;
  const auto r = distribution({{Degree::Highly, DistributionState::Clustered}});
  auto s = [&](DegreeState m) { return sigma_dimension(r, distribution({m}), Dimension::Parameters, cfg, norm); };
  EXPECT_EQ(s({Degree::Highly, DistributionState::Clustered}), 1.0);
  EXPECT_EQ(s({Degree::Moderately, DistributionState::Clustered}), 0.5);
  EXPECT_EQ(s({Degree::Slightly, DistributionState::Clustered}), 0.0);
  EXPECT_EQ(s({Degree::Highly, DistributionState::Dispersed}), 0.0);
}

TEST(SigmaDimension, NumericTolerance) {
  const MatchConfig cfg;
  const TokenNormalizer norm;
  auto s = [&](double ref, double model) {
    return sigma_dimension(value_fact(ref, "ViT"), value_fact(model, "vit"), Dimension::Parameters, cfg, norm);
  };
  EXPECT_EQ(s(100.0, 104.0), 1.0);
  EXPECT_EQ(s(100.0, 106.0), 0.0);
  EXPECT_EQ(s(0.0, 0.0), 1.0);
  EXPECT_EQ(s(0.0, 1e-6), 0.0);
}

TEST(SigmaDimension, FieldOverlapAndIncomparableTypes) {
  const MatchConfig cfg;
  const TokenNormalizer norm;
  DataFact r = value_fact(1.0, "A");
  DataFact m = r;
  r.measures = words({"accuracy", "loss"});
  m.measures = words({"Accuracy", "latency", "f1"});
  EXPECT_DOUBLE_EQ(sigma_dimension(r, m, Dimension::Measures, cfg, norm), 0.5);
  m.measures = std::nullopt;
  EXPECT_EQ(sigma_dimension(r, m, Dimension::Measures, cfg, norm), 0.0);
  EXPECT_EQ(sigma_dimension(trend({"Increase"}), value_fact(1.0, "A"), Dimension::Measures, cfg, norm), 0.0);
}

TEST(ReallocateWeights, Examples) {
  const MatchConfig cfg;
  DataFact r = value_fact(1.0, "A");
  r.measures = words({"accuracy"});
  r.context = "test split";
  r.breakdowns = words({"model"});
  DataFact m = r;
  auto w = reallocate_weights(r, m, cfg);
  EXPECT_NEAR(w[0], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(w[1], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(w[2], 2.0 / 9.0, 1e-12);
  EXPECT_NEAR(w[3], 1.0 / 9.0, 1e-12);
  EXPECT_EQ(w[4], 0.0);

  r.focus = words({"A"});
  w = reallocate_weights(r, m, cfg);  // focus is N/A on one side only: still active
  EXPECT_EQ(w, cfg.weights);

  DataFact bare = value_fact(1.0, "A");
  w = reallocate_weights(bare, bare, cfg);
  EXPECT_EQ(w, (DimensionWeights{1.0, 0, 0, 0, 0}));
}

TEST(ReallocateWeights, PropertySumsToOne) {
  FactGenerator gen(3);
  const MatchConfig cfg;
  for (int i = 0; i < 500; ++i) {
    const auto w = reallocate_weights(gen.fact(), gen.fact(), cfg);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(Phi, Examples) {
  DataFact f = trend({"Increase", "Peak"});
  f.measures = words({"accuracy"});
  EXPECT_EQ(phi(f, f), 1.0);
  EXPECT_EQ(phi(f, value_fact(1.0, "A")), 0.0);

  DataFact ext = DataFact::of_type(FactType::Extrema);
  ext.parameters = std::vector<Parameter>{std::string("A"), std::string("Maximum")};
  ext.measures = words({"accuracy"});
  DataFact rank = DataFact::of_type(FactType::Rank);
  rank.parameters = std::vector<Parameter>{std::string("A"), 1.0};
  rank.measures = words({"accuracy"});
  EXPECT_EQ(phi(ext, rank), 1.0);
}

TEST(Phi, PropertyBounded) {
  FactGenerator gen(11);
  for (int i = 0; i < 1000; ++i) {
    const DataFact r = gen.fact();
    const DataFact m = gen.coin(0.5) ? gen.variant_of(r) : gen.fact();
    const double s = phi(r, m);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(CrossTypeConvert, RankAndExtrema) {
  DataFact rank = DataFact::of_type(FactType::Rank);
  rank.parameters = std::vector<Parameter>{std::string("A"), 1.0};
  const auto ext = cross_type_convert(rank, FactType::Extrema);
  ASSERT_TRUE(ext);
  EXPECT_EQ(ext->type, FactType::Extrema);
  EXPECT_EQ(json(*ext)["parameters"], json::parse(R"(["A","Maximum"])"));

  rank.parameters = std::vector<Parameter>{std::string("A"), 3.0};
  EXPECT_FALSE(cross_type_convert(rank, FactType::Extrema));

  DataFact minimum = DataFact::of_type(FactType::Extrema);
  minimum.parameters = std::vector<Parameter>{std::string("B"), std::string("Minimum")};
  const auto last = cross_type_convert(minimum, FactType::Rank);
  ASSERT_TRUE(last);
  EXPECT_EQ(json(*last)["parameters"], json::parse(R"(["B","Last"])"));
  const auto back = cross_type_convert(*last, FactType::Extrema);
  ASSERT_TRUE(back);
  EXPECT_EQ(canonical_serialize(*back), canonical_serialize(minimum));

  EXPECT_THROW(cross_type_convert(trend({"Increase"}), FactType::Value), ValidationError);
}

TEST(CrossTypeConvert, ConfiguredGroupRetypes) {
  MatchConfig cfg;
  cfg.equivalence_groups.push_back({FactType::Value, FactType::Proportion});
  const auto p = cross_type_convert(value_fact(0.4, "A"), FactType::Proportion, cfg);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->type, FactType::Proportion);
  EXPECT_EQ(p->level, SemanticLevel::L2);
}

TEST(NormalizeToken, Examples) {
  ChartSchema accuracy_only;
  accuracy_only.axis_labels = {"accuracy"};
  EXPECT_EQ(normalize_token("Accuracy", accuracy_only, nullptr), "accuracy");

  auto provider = std::make_shared<MockEmbeddingProvider>(std::map<std::string, std::vector<double>>{
      {"mAP", {1, 0, 0}}, {"mean average precision", {1, 0, 0}}, {"zebra", {0, 0, 1}}, {"accuracy", {0, 1, 0}}});
  EmbeddingClient embedder(provider);
  ChartSchema s;
  s.axis_labels = {"mean average precision", "accuracy"};
  EXPECT_EQ(normalize_token("mAP", s, &embedder), "mean average precision");
  EXPECT_EQ(normalize_token("zebra", accuracy_only, &embedder), "zebra");
  EXPECT_EQ(normalize_token("  Top-1   Error ", accuracy_only, nullptr), "top-1 error");
}

namespace {

class FailingEmbeddings : public EmbeddingProvider {
 public:
  std::vector<EmbeddingVector> embed(std::span<const std::string>) override {
    throw ProviderError(ProviderErrorKind::Rejected, "embedding service down");
  }
  std::string model_id() const override { return "down"; }
};

}  // namespace

TEST(NormalizeToken, EmbeddingFailureDegradesToLexical) {
  EmbeddingClient embedder(std::make_shared<FailingEmbeddings>());
  ChartSchema s;
  s.axis_labels = {"accuracy"};
  TokenNormalizer norm(s, &embedder);
  EXPECT_EQ(norm("Top1 Acc"), "top1 acc");
  EXPECT_EQ(norm.embedding_failures(), 1u);
}

TEST(GreedyAssign, HandBuiltMatrix) {
  const ScoreMatrix scores{{0.90, 0.80, 0.10}, {0.85, 0.75, 0.20}, {0.30, 0.72, 0.71}};
  const std::vector<std::string> rk{"r0", "r1", "r2"}, mk{"m0", "m1", "m2"};
  // By hand: (0,0) .90 accepted; (1,0) and (0,1) blocked; (1,1) .75 accepted;
  // (2,1) blocked; (2,2) .71 accepted.
  const std::vector<MatchPair> expected{{0, 0, 0.90}, {1, 1, 0.75}, {2, 2, 0.71}};
  EXPECT_EQ(greedy_assign(scores, rk, mk, 0.7), expected);

  const auto oracle = test_support::greedy_oracle(scores, rk, mk, 0.7);
  ASSERT_EQ(oracle.size(), expected.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    EXPECT_EQ(oracle[i].ref, expected[i].reference_index);
    EXPECT_EQ(oracle[i].model, expected[i].model_index);
  }
}

TEST(GreedyAssign, GreedyIsNotMaximumCardinality) {
  const ScoreMatrix scores{{0.9, 0.85}, {0.8, 0.1}};
  const auto got = greedy_assign(scores, {"a", "b"}, {"c", "d"}, 0.7);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0], (MatchPair{0, 0, 0.9}));
}

TEST(GreedyAssign, TiesBrokenByContentNotPosition) {
  const ScoreMatrix scores{{1.0, 1.0}, {1.0, 1.0}};
  const auto got = greedy_assign(scores, {"y", "x"}, {"q", "x"}, 0.7);
  // the identical-key pair (1,1) is taken first, then (0,0)
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0], (MatchPair{1, 1, 1.0}));
  EXPECT_EQ(got[1], (MatchPair{0, 0, 1.0}));
}

TEST(Assign, Examples) {
  FactGenerator gen(23);
  std::vector<DataFact> R;
  for (int i = 0; i < 5; ++i) R.push_back(gen.fact());
  const auto same = assign(R, R);
  EXPECT_EQ(same.coverage, 1.0);
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.f1, 1.0);

  const auto none = assign(R, {});
  EXPECT_EQ(none.coverage, 0.0);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.f1, 0.0);

  const auto no_ref = assign({}, R);
  EXPECT_EQ(no_ref.recall, 0.0);
  EXPECT_EQ(no_ref.coverage, 0.0);
  EXPECT_EQ(no_ref.f1, 0.0);
}

TEST(Assign, PropertyMatchesOracleAndIsOneToOne) {
  FactGenerator gen(31);
  const MatchConfig cfg;
  for (int it = 0; it < 300; ++it) {
    const auto R = gen.facts(6);
    std::vector<DataFact> M;
    for (const auto& r : R) {
      if (gen.coin(0.6)) M.push_back(gen.variant_of(r));
    }
    for (std::size_t extra = gen.pick(3); extra > 0; --extra) M.push_back(gen.fact());
    std::shuffle(M.begin(), M.end(), gen.rng());

    const auto res = assign(R, M, cfg);
    std::vector<std::vector<double>> scores(R.size(), std::vector<double>(M.size()));
    std::vector<std::string> rk, mk;
    for (const auto& f : R) rk.push_back(canonical_serialize(f));
    for (const auto& f : M) mk.push_back(canonical_serialize(f));
    for (std::size_t i = 0; i < R.size(); ++i)
      for (std::size_t j = 0; j < M.size(); ++j) scores[i][j] = phi(R[i], M[j], cfg);
    const auto oracle = test_support::greedy_oracle(scores, rk, mk, cfg.tau);

    ASSERT_EQ(res.pairs.size(), oracle.size());
    std::set<std::size_t> used_r, used_m;
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      EXPECT_EQ(res.pairs[k].reference_index, oracle[k].ref);
      EXPECT_EQ(res.pairs[k].model_index, oracle[k].model);
      EXPECT_GE(res.pairs[k].score, cfg.tau);
      EXPECT_TRUE(used_r.insert(res.pairs[k].reference_index).second);
      EXPECT_TRUE(used_m.insert(res.pairs[k].model_index).second);
    }
  }
}

TEST(Assign, PropertySelfCoverage) {
  FactGenerator gen(41);
  for (int it = 0; it < 200; ++it) {
    auto R = gen.facts(8);
    if (R.empty()) R.push_back(gen.fact());
    const auto res = assign(R, R);
    ASSERT_EQ(res.coverage, 1.0);
    ASSERT_EQ(res.precision, 1.0);
    ASSERT_EQ(res.f1, 1.0);
  }
}

TEST(Assign, PropertyPermutationInvariance) {
  FactGenerator gen(43);
  for (int it = 0; it < 200; ++it) {
    const auto R = gen.facts(6);
    std::vector<DataFact> M;
    for (const auto& r : R) M.push_back(gen.variant_of(r));
    const auto base = assign(R, M);
    auto R2 = R, M2 = M;
    std::shuffle(R2.begin(), R2.end(), gen.rng());
    std::shuffle(M2.begin(), M2.end(), gen.rng());
    const auto shuffled = assign(R2, M2);
    EXPECT_EQ(base.matched_count, shuffled.matched_count);
    EXPECT_EQ(base.precision, shuffled.precision);
    EXPECT_EQ(base.recall, shuffled.recall);
    EXPECT_EQ(base.f1, shuffled.f1);
    EXPECT_EQ(pair_keys(base, R, M), pair_keys(shuffled, R2, M2));
  }
}

TEST(Assign, PropertyCoverageNonIncreasingInTau) {
  FactGenerator gen(47);
  for (int it = 0; it < 100; ++it) {
    const auto R = gen.facts(6);
    std::vector<DataFact> M;
    for (const auto& r : R) M.push_back(gen.variant_of(r));
    double prev = 2.0;
    for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      MatchConfig cfg;
      cfg.tau = tau;
      const double c = assign(R, M, cfg).coverage;
      EXPECT_LE(c, prev);
      prev = c;
    }
  }
}

TEST(MatchConfig, DefaultsAndJson) {
  const MatchConfig cfg;
  EXPECT_EQ(cfg.tau, 0.7);
  EXPECT_EQ(cfg.weights, (DimensionWeights{0.3, 0.3, 0.2, 0.1, 0.1}));
  const auto back = json(cfg).get<MatchConfig>();
  EXPECT_EQ(back.tau, cfg.tau);
  EXPECT_EQ(back.weights, cfg.weights);
  EXPECT_THROW(json::parse(R"({"tau":0})").get<MatchConfig>(), ValidationError);
  EXPECT_THROW(json::parse(R"({"weights":[0.5,0.5,0.5,0,0]})").get<MatchConfig>(), ValidationError);
}
