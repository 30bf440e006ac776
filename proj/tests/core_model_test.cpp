#include "chartfi/core_model.hpp"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "support/fact_gen.hpp"

using namespace chartfi;

TEST(SemanticLevel, MappingMatchesTaxonomyTable) {
  const std::map<FactType, SemanticLevel> expected{
      {FactType::ChartConstruction, SemanticLevel::L1}, {FactType::Value, SemanticLevel::L2},
      {FactType::Distribution, SemanticLevel::L2},      {FactType::Extrema, SemanticLevel::L2},
      {FactType::Outlier, SemanticLevel::L2},           {FactType::Proportion, SemanticLevel::L2},
      {FactType::Range, SemanticLevel::L2},             {FactType::Comparison, SemanticLevel::L3},
      {FactType::Trend, SemanticLevel::L3},             {FactType::Correlation, SemanticLevel::L3},
      {FactType::Rank, SemanticLevel::L3},              {FactType::Hierarchy, SemanticLevel::L3},
      {FactType::DomainSpecific, SemanticLevel::L4}};
  ASSERT_EQ(expected.size(), kAllFactTypes.size());
  for (auto t : kAllFactTypes) EXPECT_EQ(semantic_level_of(t), expected.at(t)) << to_string(t);
  static_assert(semantic_level_of(FactType::Value) == SemanticLevel::L2);
  static_assert(semantic_level_of(FactType::Trend) == SemanticLevel::L3);
  static_assert(semantic_level_of(FactType::DomainSpecific) == SemanticLevel::L4);
}

TEST(SemanticLevel, TotalOrder) {
  EXPECT_LT(SemanticLevel::L1, SemanticLevel::L2);
  EXPECT_LT(SemanticLevel::L2, SemanticLevel::L3);
  EXPECT_LT(SemanticLevel::L3, SemanticLevel::L4);
}

TEST(FactType, ParseRoundTripAndRejectsUnknown) {
  for (auto t : kAllFactTypes) EXPECT_EQ(parse_fact_type(to_string(t)), t);
  EXPECT_EQ(parse_fact_type("Chart Construction"), FactType::ChartConstruction);
  EXPECT_EQ(parse_fact_type("domain_specific"), FactType::DomainSpecific);
  EXPECT_THROW(parse_fact_type("anomaly"), ValidationError);
  EXPECT_THROW(parse_fact_type(""), ValidationError);
}

TEST(DataFactJson, ParsesCanonicalizesAndValidates) {
  const auto f = json::parse(R"({"type":"trend","parameters":["increase","PEAK"],
      "measures":["accuracy"],"context":null,"breakdowns":null,"focus":null})")
                     .get<DataFact>();
  EXPECT_EQ(f.level, SemanticLevel::L3);
  ASSERT_TRUE(f.parameters);
  EXPECT_EQ(std::get<std::string>((*f.parameters)[0]), "Increase");
  EXPECT_EQ(std::get<std::string>((*f.parameters)[1]), "Peak");
  EXPECT_FALSE(f.context);

  const auto dist = json::parse(R"({"type":"distribution","parameters":["Highly Clustered",
      {"degree":"slightly","state":"skewed"}]})").get<DataFact>();
  ASSERT_EQ(dist.parameters->size(), 2u);
  EXPECT_EQ(std::get<DegreeState>((*dist.parameters)[0]),
            (DegreeState{Degree::Highly, DistributionState::Clustered}));
}

TEST(DataFactJson, ValidationErrorsNameTheField) {
  auto field_of = [](const char* text) {
    try {
      json::parse(text).get<DataFact>();
    } catch (const ValidationError& e) {
      return e.field();
    }
    return std::string("<no error>");
  };
  EXPECT_EQ(field_of(R"({"type":"trend","parameters":["Skyrocket"]})"), "parameters");
  EXPECT_EQ(field_of(R"({"type":"comparison","parameters":["Bigger","A","B"]})"), "parameters");
  EXPECT_EQ(field_of(R"({"type":"comparison","parameters":["Greater","A"]})"), "parameters");
  EXPECT_EQ(field_of(R"({"type":"distribution","parameters":["Clustered"]})"), "parameters");
  EXPECT_EQ(field_of(R"({"type":"value","level":"L3"})"), "level");
  EXPECT_EQ(field_of(R"({"type":"value","measures":[""]})"), "measures");
  EXPECT_EQ(field_of(R"({"parameters":[]})"), "type");
}

TEST(DataFactJson, NullAndEmptyListAreDistinct) {
  auto na = json::parse(R"({"type":"value","measures":null})").get<DataFact>();
  auto empty = json::parse(R"({"type":"value","measures":[]})").get<DataFact>();
  EXPECT_FALSE(na.measures.has_value());
  ASSERT_TRUE(empty.measures.has_value());
  EXPECT_TRUE(empty.measures->empty());
  EXPECT_NE(canonical_serialize(na), canonical_serialize(empty));
  EXPECT_TRUE(json(na)["measures"].is_null());
  EXPECT_TRUE(json(empty)["measures"].is_array());
}

TEST(CanonicalSerialize, DeterministicAndOrderRules) {
  DataFact a = DataFact::of_type(FactType::Value);
  a.parameters = std::vector<Parameter>{0.93, std::string("ResNet")};
  a.measures = std::vector<std::string>{"accuracy", "loss"};
  DataFact b = a;
  EXPECT_EQ(canonical_serialize(a), canonical_serialize(b));

  b.measures = std::vector<std::string>{"loss", "accuracy"};
  EXPECT_EQ(canonical_serialize(a), canonical_serialize(b));
  EXPECT_TRUE(a == b);

  DataFact up = DataFact::of_type(FactType::Trend);
  up.parameters = std::vector<Parameter>{std::string("Increase"), std::string("Decrease")};
  DataFact down = up;
  down.parameters = std::vector<Parameter>{std::string("Decrease"), std::string("Increase")};
  EXPECT_NE(canonical_serialize(up), canonical_serialize(down));

  DataFact cmp = DataFact::of_type(FactType::Comparison);
  cmp.parameters = std::vector<Parameter>{std::string("Greater"), std::string("A"), std::string("B")};
  DataFact swapped = cmp;
  swapped.parameters = std::vector<Parameter>{std::string("Greater"), std::string("B"), std::string("A")};
  EXPECT_NE(canonical_serialize(cmp), canonical_serialize(swapped));
}

TEST(CanonicalSerialize, RejectsMalformedFact) {
  DataFact bad = DataFact::of_type(FactType::Trend);
  bad.parameters = std::vector<Parameter>{std::string("Sideways")};
  try {
    canonical_serialize(bad);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "parameters");
  }
}

// canonical_serialize(f) == canonical_serialize(g) iff f and g are equal up to
// reordering of the non-semantic lists.
TEST(CanonicalSerialize, PropertyEqualityUnderShuffleAndJsonRoundTrip) {
  test_support::FactGenerator gen(17);
  auto shuffled = [&](TokenList l) {
    if (l) std::shuffle(l->begin(), l->end(), gen.rng());
    return l;
  };
  for (int i = 0; i < 500; ++i) {
    const DataFact f = gen.fact();
    DataFact g = f;
    g.measures = shuffled(g.measures);
    g.breakdowns = shuffled(g.breakdowns);
    g.focus = shuffled(g.focus);
    EXPECT_EQ(canonical_serialize(f), canonical_serialize(g));

    const DataFact back = json::parse(json(f).dump()).get<DataFact>();
    EXPECT_EQ(canonical_serialize(f), canonical_serialize(back));

    const DataFact other = gen.fact();
    const bool same_content =
        f.type == other.type && f.context == other.context && [&] {
          auto sorted = [](TokenList l) {
            if (l) std::sort(l->begin(), l->end());
            return l;
          };
          return sorted(f.measures) == sorted(other.measures) &&
                 sorted(f.breakdowns) == sorted(other.breakdowns) &&
                 sorted(f.focus) == sorted(other.focus) &&
                 json(f)["parameters"] == json(other)["parameters"];
        }();
    EXPECT_EQ(canonical_serialize(f) == canonical_serialize(other), same_content);
  }
}

TEST(ChartSchemaJson, RoundTripAndValidation) {
  auto s = json::parse(R"({"axis_labels":["epoch","accuracy"],"legend_entries":[],
      "categories":["ViT"],"title":null})").get<ChartSchema>();
  EXPECT_EQ(s.axis_labels, (std::vector<std::string>{"epoch", "accuracy"}));
  EXPECT_FALSE(s.title);
  EXPECT_EQ(json(s).get<ChartSchema>(), s);
  EXPECT_THROW(json::parse(R"({"axis_labels":[""]})").get<ChartSchema>(), ValidationError);
  EXPECT_TRUE(json::parse("{}").get<ChartSchema>().empty());
}

TEST(LevelUnitJson, RequiresFactForL2AndL3) {
  EXPECT_NO_THROW(json::parse(R"({"text":"x axis shows epochs","level":"L1","fact":null})").get<LevelUnit>());
  EXPECT_THROW(json::parse(R"({"text":"accuracy peaks","level":"L3","fact":null})").get<LevelUnit>(),
               ValidationError);
  EXPECT_THROW(
      json::parse(R"({"text":"0.9","level":"L3","fact":{"type":"value","parameters":[0.9]}})").get<LevelUnit>(),
      ValidationError);
  const auto u =
      json::parse(R"({"text":"0.9","level":"L2","fact":{"type":"value","parameters":[0.9]}})").get<LevelUnit>();
  EXPECT_EQ(u.fact->type, FactType::Value);
}
