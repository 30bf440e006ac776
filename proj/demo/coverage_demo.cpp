// Coverage of a candidate description's facts against a reference, with the
// per-pair scores printed. No model calls: the facts are written inline.

#include <cstdio>

#include "chartfi/chartfi.hpp"

using namespace chartfi;

int main() {
  const auto reference = json::parse(R"([
    {"type": "extrema", "parameters": ["ViT", "Maximum", 0.91], "measures": ["top-1 accuracy"]},
    {"type": "trend", "parameters": ["Increase", "Stable"], "measures": ["accuracy"], "focus": ["ResNet"]},
    {"type": "comparison", "parameters": ["Greater", "ViT", "ResNet"], "measures": ["accuracy"]},
    {"type": "value", "parameters": ["MLP", 0.62], "measures": ["accuracy"]}
  ])").get<std::vector<DataFact>>();

  // Rank 1 stands in for the maximum, the comparison is stated the other way
  // round, and the MLP value is off by more than the numeric tolerance.
  const auto candidate = json::parse(R"([
    {"type": "rank", "parameters": ["ViT", 1, 0.91], "measures": ["Top-1  Accuracy"]},
    {"type": "comparison", "parameters": ["Less", "ResNet", "ViT"], "measures": ["accuracy"]},
    {"type": "value", "parameters": ["MLP", 0.70], "measures": ["accuracy"]},
    {"type": "trend", "parameters": ["Decrease"], "measures": ["loss"]}
  ])").get<std::vector<DataFact>>();

  const MatchConfig cfg;
  const auto scores = score_matrix(reference, candidate, cfg, TokenNormalizer{});
  std::printf("phi      ");
  for (std::size_t j = 0; j < candidate.size(); ++j) std::printf("  m%zu   ", j);
  std::printf("\n");
  for (std::size_t i = 0; i < reference.size(); ++i) {
    std::printf("r%zu %-10s", i, std::string(to_string(reference[i].type)).c_str());
    for (double s : scores[i]) std::printf(" %.3f ", s);
    std::printf("\n");
  }

  const auto res = assign(reference, candidate, cfg);
  std::printf("\nmatched at tau %.2f:\n", cfg.tau);
  for (const auto& p : res.pairs) {
    std::printf("  r%zu <-> m%zu  %.3f\n", p.reference_index, p.model_index, p.score);
  }
  std::printf("coverage %.3f  precision %.3f  f1 %.3f\n", res.coverage, res.precision, res.f1);
}
