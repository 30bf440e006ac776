#include "chartfi/extraction.hpp"

#include <gtest/gtest.h>

#include "chartfi/informativeness.hpp"
#include "support/images.hpp"

using namespace chartfi;

namespace {

struct Rig {
  std::shared_ptr<MockChatProvider> mock;
  ChatClient client;
  Extractor extractor;

  explicit Rig(std::vector<std::string> replies)
      : mock(std::make_shared<MockChatProvider>([&] {
          std::vector<MockReply> script;
          for (auto& r : replies) script.push_back({std::move(r), {}});
          return script;
        }())),
        client(mock),
        extractor(client, "extractor-model") {}
};

const char* kThreeFacts = R"([
  {"type":"value","parameters":["ViT",0.91],"measures":["accuracy"],"context":null,"breakdowns":null,"focus":null},
  {"type":"trend","parameters":["Increase","Peak"],"measures":["accuracy"],"context":"2019-2021","breakdowns":null,"focus":null},
  {"type":"domain-specific","parameters":["overfitting"],"measures":null,"context":null,"breakdowns":null,"focus":["ViT"]}
])";

}  // namespace

TEST(ExtractFacts, RejectsEmptyDescription) {
  Rig rig({"[]"});
  EXPECT_THROW(rig.extractor.extract_facts(""), ValidationError);
  EXPECT_THROW(rig.extractor.extract_facts("   \n"), ValidationError);
  EXPECT_EQ(rig.mock->calls(), 0u);
}

TEST(ExtractFacts, PassesValidFactsThrough) {
  Rig rig({kThreeFacts});
  const auto out = rig.extractor.extract_facts("ViT reaches 0.91 accuracy and peaks in 2021.");
  ASSERT_EQ(out.facts.size(), 3u);
  EXPECT_TRUE(out.warnings.empty());
  const auto expected = json::parse(kThreeFacts);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(canonical_serialize(out.facts[i]), canonical_serialize(expected[i].get<DataFact>()));
  }
  const auto req = rig.mock->captured().front();
  EXPECT_EQ(req.response_format, ResponseFormat::Json);
  EXPECT_EQ(req.temperature, 0.0);
  EXPECT_EQ(req.top_p, 1.0);
  EXPECT_NE(req.user_text.find("ViT reaches 0.91"), std::string::npos);
}

TEST(ExtractFacts, AcceptsWrappedArrayAndEmptyResult) {
  Rig wrapped({R"({"facts":[{"type":"value","parameters":[3]}]})"});
  EXPECT_EQ(wrapped.extractor.extract_facts("three").facts.size(), 1u);
  Rig none({"[]"});
  const auto out = none.extractor.extract_facts("Nothing quantitative here.");
  EXPECT_TRUE(out.facts.empty());
  EXPECT_TRUE(out.warnings.empty());
}

TEST(ExtractFacts, InvalidFactGetsOneRepairThenDropped) {
  const std::string bad = R"([{"type":"trend","parameters":["Skyrocket"]}])";
  Rig rig({bad, bad});
  const auto out = rig.extractor.extract_facts("Accuracy skyrockets.");
  EXPECT_TRUE(out.facts.empty());
  ASSERT_EQ(out.warnings.size(), 1u);
  EXPECT_NE(out.warnings[0].find("Skyrocket"), std::string::npos);
  ASSERT_EQ(rig.mock->calls(), 2u);
  EXPECT_NE(rig.mock->captured()[1].user_text.find("Skyrocket"), std::string::npos);
}

TEST(ExtractFacts, RepairedFactIsKept) {
  Rig rig({R"([{"type":"value","parameters":[1]},{"type":"trend","parameters":["Skyrocket"]}])",
           R"([{"type":"trend","parameters":["Increase"]}])"});
  const auto out = rig.extractor.extract_facts("x");
  ASSERT_EQ(out.facts.size(), 2u);
  EXPECT_EQ(out.facts[1].type, FactType::Trend);
  EXPECT_TRUE(out.warnings.empty());
}

TEST(ExtractFacts, SchemaIsSentWhenGiven) {
  Rig rig({"[]"});
  ChartSchema s;
  s.axis_labels = {"epoch", "accuracy"};
  rig.extractor.extract_facts("x", &s);
  EXPECT_NE(rig.mock->captured()[0].user_text.find("\"epoch\""), std::string::npos);
}

TEST(ExtractSchema, PassThroughDedupAndEmpty) {
  const auto png = make_image(test_support::tiny_png(255, 255, 255));
  Rig rig({R"({"axis_labels":["epoch","accuracy"],"legend_entries":["ViT"],"categories":[],"title":"Training"})"});
  const auto s = rig.extractor.extract_schema(png);
  EXPECT_EQ(s.axis_labels, (std::vector<std::string>{"epoch", "accuracy"}));
  EXPECT_EQ(s.legend_entries, (std::vector<std::string>{"ViT"}));
  EXPECT_EQ(s.title, "Training");
  ASSERT_EQ(rig.mock->captured()[0].images.size(), 1u);

  Rig dup({R"({"axis_labels":[],"legend_entries":["mAP","map"],"categories":[]})"});
  EXPECT_EQ(dup.extractor.extract_schema(png).legend_entries, (std::vector<std::string>{"mAP"}));

  Rig blank({R"({"axis_labels":[],"legend_entries":[],"categories":[],"title":null})"});
  EXPECT_TRUE(blank.extractor.extract_schema(png).empty());

  EXPECT_THROW(blank.extractor.extract_schema(ImageData{"image/png", "garbage"}), ValidationError);
}

TEST(SegmentLevels, ConstructionOnlyDescription) {
  Rig rig({R"([{"text":"The x axis shows epochs.","level":"L1","fact":null},
               {"text":"The legend lists three models.","level":"L1","fact":null}])"});
  const auto out = rig.extractor.segment_levels("The x axis shows epochs. The legend lists three models.");
  ASSERT_EQ(out.units.size(), 2u);
  for (const auto& u : out.units) {
    EXPECT_EQ(u.level, SemanticLevel::L1);
    EXPECT_FALSE(u.fact);
  }
}

TEST(SegmentLevels, OneUnitPerLevelGivesUniformProportions) {
  Rig rig({R"({"units":[
    {"text":"A line chart.","level":"L1","fact":null},
    {"text":"ViT reaches 0.91.","level":"L2","fact":{"type":"value","parameters":["ViT",0.91]}},
    {"text":"Accuracy rises.","level":"L3","fact":{"type":"trend","parameters":["Increase"]}},
    {"text":"ViT overfits late.","level":"L4","fact":{"type":"domain-specific","parameters":["overfitting"]}}]})"});
  const auto out = rig.extractor.segment_levels("...");
  ASSERT_EQ(out.units.size(), 4u);
  EXPECT_EQ(level_proportions(out.units), (LevelArray{0.25, 0.25, 0.25, 0.25}));
  EXPECT_EQ(out.units[1].fact->type, FactType::Value);
  EXPECT_EQ(out.units[3].level, semantic_level_of(out.units[3].fact->type));
}

TEST(SegmentLevels, InconsistentUnitsAreDropped) {
  Rig rig({R"([{"text":"Accuracy rises.","level":"L2","fact":{"type":"trend","parameters":["Increase"]}},
               {"text":"A bar chart.","level":"L1"},
               {"text":"A claim","level":"L3","fact":null}])"});
  const auto out = rig.extractor.segment_levels("...");
  ASSERT_EQ(out.units.size(), 1u);
  EXPECT_EQ(out.warnings.size(), 2u);
}

TEST(Extraction, IdempotentUnderCaching) {
  const auto dir = std::filesystem::temp_directory_path() / "chartfi-extraction-cache";
  std::filesystem::remove_all(dir);
  auto mock = std::make_shared<MockChatProvider>(std::vector<MockReply>{{kThreeFacts, {}}, {"[]", {}}});
  ChatClient a(mock, ResponseCache(dir));
  const auto first = Extractor(a, "m").extract_facts("same text");
  ChatClient b(mock, ResponseCache(dir));
  const auto second = Extractor(b, "m").extract_facts("same text");
  ASSERT_EQ(first.facts.size(), second.facts.size());
  for (std::size_t i = 0; i < first.facts.size(); ++i) EXPECT_EQ(first.facts[i], second.facts[i]);
  EXPECT_EQ(mock->calls(), 1u);
  std::filesystem::remove_all(dir);
}
