#pragma once

// End-to-end orchestration: dataset and model-output ingestion, description
// generation, per-record metric execution, report aggregation and rendering,
// and rank agreement with human scores.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "chartfi/config.hpp"
#include "chartfi/extraction.hpp"
#include "chartfi/informativeness.hpp"
#include "chartfi/judge.hpp"
#include "chartfi/matching.hpp"
#include "chartfi/textmetrics.hpp"

namespace chartfi {

inline constexpr std::string_view kToolVersion = "chartfi 0.1.0";

struct BenchmarkRecord {
  std::string id;
  std::string image_path;  // resolved against the dataset file's directory
  std::string reference_description;
  std::optional<ChartSchema> schema;
  std::string domain;
  std::optional<std::string> chart_type;
  std::optional<std::vector<DataFact>> reference_facts;   // skip extraction when present
  std::optional<std::vector<LevelUnit>> reference_units;  // skip segmentation when present
};

struct ModelOutput {
  std::string record_id;
  std::string model_name;
  std::string description;
  std::optional<std::vector<DataFact>> facts;
  std::optional<std::vector<LevelUnit>> units;
  std::map<std::string, double> external_metrics;  // meteor / bleurt computed elsewhere
};

inline void to_json(json& j, const BenchmarkRecord& r) {
  j = json{{"id", r.id},
           {"image_path", r.image_path},
           {"reference_description", r.reference_description},
           {"domain", r.domain}};
  if (r.schema) j["schema"] = *r.schema;
  if (r.chart_type) j["chart_type"] = *r.chart_type;
  if (r.reference_facts) j["reference_facts"] = *r.reference_facts;
  if (r.reference_units) j["reference_units"] = *r.reference_units;
}

inline void to_json(json& j, const ModelOutput& o) {
  j = json{{"record_id", o.record_id}, {"model_name", o.model_name}, {"description", o.description}};
  if (o.facts) j["facts"] = *o.facts;
  if (o.units) j["units"] = *o.units;
  if (!o.external_metrics.empty()) j["external_metrics"] = o.external_metrics;
}

namespace detail {

inline std::string required_string(const json& j, const char* key, bool allow_empty = false) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw ValidationError(std::string("missing string field '") + key + "'", key);
  }
  std::string s = j[key].get<std::string>();
  if (!allow_empty && trim(s).empty()) throw ValidationError(std::string("field '") + key + "' is empty", key);
  return s;
}

// Calls fn(line_number, parsed_object) for each non-blank line; failures are
// rethrown with the file and line prefixed.
template <typename Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'", "path");
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ValidationError(path + ": line " + std::to_string(n) + ": not a JSON object", "line");
    }
    try {
      fn(n, j);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": line " + std::to_string(n) + ": " + e.what(), e.field());
    } catch (const json::exception& e) {
      throw ValidationError(path + ": line " + std::to_string(n) + ": " + e.what(), "line");
    }
  }
}

template <typename T>
std::optional<std::vector<T>> optional_list(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_array()) throw ValidationError(std::string("'") + key + "' must be a list", key);
  return j[key].get<std::vector<T>>();
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads; the first exception
/// is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// JSONL, one record per line. Ids must be unique and image files must exist;
/// errors name the offending line.
inline std::vector<BenchmarkRecord> load_dataset(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path base = fs::absolute(path).parent_path();
  std::vector<BenchmarkRecord> records;
  std::map<std::string, std::size_t> seen;
  detail::for_each_jsonl(path, [&](std::size_t line, const json& j) {
    BenchmarkRecord r;
    r.id = detail::required_string(j, "id");
    if (auto it = seen.find(r.id); it != seen.end()) {
      throw ValidationError("duplicate id '" + r.id + "' (first seen on line " + std::to_string(it->second) + ")",
                            "id");
    }
    fs::path image = detail::required_string(j, "image_path");
    if (image.is_relative()) image = base / image;
    if (!fs::is_regular_file(image)) {
      throw ValidationError("image file '" + image.string() + "' does not exist", "image_path");
    }
    r.image_path = image.lexically_normal().string();
    r.reference_description = detail::required_string(j, "reference_description");
    r.domain = j.value("domain", std::string{});
    if (j.contains("chart_type") && j["chart_type"].is_string()) r.chart_type = j["chart_type"].get<std::string>();
    if (j.contains("schema") && !j["schema"].is_null()) r.schema = j["schema"].get<ChartSchema>();
    r.reference_facts = detail::optional_list<DataFact>(j, "reference_facts");
    r.reference_units = detail::optional_list<LevelUnit>(j, "reference_units");
    seen.emplace(r.id, line);
    records.push_back(std::move(r));
  });
  return records;
}

inline std::vector<ModelOutput> load_outputs(const std::string& path) {
  std::vector<ModelOutput> outputs;
  std::set<std::pair<std::string, std::string>> seen;
  detail::for_each_jsonl(path, [&](std::size_t, const json& j) {
    ModelOutput o;
    o.record_id = detail::required_string(j, "record_id");
    o.model_name = detail::required_string(j, "model_name");
    o.description = detail::required_string(j, "description", /*allow_empty=*/true);
    if (!seen.emplace(o.record_id, o.model_name).second) {
      throw ValidationError("duplicate output for record '" + o.record_id + "' and model '" + o.model_name + "'",
                            "record_id");
    }
    o.facts = detail::optional_list<DataFact>(j, "facts");
    o.units = detail::optional_list<LevelUnit>(j, "units");
    if (j.contains("external_metrics") && j["external_metrics"].is_object()) {
      for (const auto& [k, v] : j["external_metrics"].items()) {
        if (v.is_number()) o.external_metrics[k] = v.get<double>();
      }
    }
    outputs.push_back(std::move(o));
  });
  return outputs;
}

template <typename T>
void write_jsonl(const std::string& path, const std::vector<T>& items) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ValidationError("cannot write '" + path + "'", "out");
  for (const auto& item : items) out << json(item).dump() << "\n";
}

// ---------------------------------------------------------------------------
// Generation

struct GenerationResult {
  std::vector<ModelOutput> outputs;                          // in dataset order
  std::vector<std::pair<std::string, std::string>> failures;  // record id, reason
};

/// One description per record from the fixed generation prompt, sampled
/// greedily. Provider failures are recorded per record; the response cache
/// makes an interrupted run resumable.
inline GenerationResult generate_descriptions(const std::vector<BenchmarkRecord>& records, ChatClient& chat,
                                              const std::string& model_id, const std::string& model_name,
                                              const PromptSet& prompts = {}, std::size_t concurrency = 4) {
  std::vector<std::optional<ModelOutput>> slots(records.size());
  std::vector<std::optional<std::string>> errors(records.size());
  detail::parallel_for(records.size(), concurrency, [&](std::size_t i) {
    try {
      ChatRequest req;
      req.model_id = model_id;
      req.user_text = prompts.generation.text;
      req.images.push_back(load_image(records[i].image_path));
      req.temperature = 0.0;
      req.top_p = 1.0;
      slots[i] = ModelOutput{records[i].id, model_name, chat.chat_complete(req).text, {}, {}, {}};
    } catch (const std::exception& e) {
      errors[i] = e.what();
      spdlog::error("generation failed for record {}: {}", records[i].id, e.what());
    }
  });
  GenerationResult res;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (slots[i]) res.outputs.push_back(std::move(*slots[i]));
    if (errors[i]) res.failures.emplace_back(records[i].id, *errors[i]);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Evaluation

enum class Metric { Faithfulness, Coverage, Informativeness, Acuity, Bleu, Rouge };

inline constexpr std::array<Metric, 6> kAllMetrics{Metric::Faithfulness, Metric::Coverage,
                                                   Metric::Informativeness, Metric::Acuity,
                                                   Metric::Bleu, Metric::Rouge};
inline constexpr std::array<std::string_view, 6> kMetricNames{"faithfulness", "coverage", "informativeness",
                                                              "acuity",       "bleu",     "rouge"};

constexpr std::string_view to_string(Metric m) { return kMetricNames[static_cast<std::size_t>(m)]; }

/// Comma-separated metric names, or "all".
inline std::vector<Metric> parse_metrics(const std::string& list) {
  std::set<Metric> chosen;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string name = detail::ascii_lower(detail::trim(item));
    if (name.empty()) continue;
    if (name == "all") {
      chosen.insert(kAllMetrics.begin(), kAllMetrics.end());
      continue;
    }
    const std::string key = name == "rouge-l" || name == "rouge_l" ? "rouge" : name;
    auto idx = detail::find_name(kMetricNames, key);
    if (!idx) throw ValidationError("unknown metric '" + item + "'", "metrics");
    chosen.insert(kAllMetrics[*idx]);
  }
  if (chosen.empty()) throw ValidationError("no metrics selected", "metrics");
  return {chosen.begin(), chosen.end()};
}

struct RecordScores {
  std::string record_id;
  std::string model_name;
  std::optional<double> faithfulness, coverage, precision, recall, f1, informativeness, acuity;
  std::optional<double> bleu, rouge_l, meteor, bleurt;
  std::optional<std::array<int, 5>> acuity_subscores;
  std::vector<std::string> error_categories;  // one entry per erroneous claim
  std::vector<std::string> flags;             // "<metric>: <reason>" for N/A or degraded values
  json details = json::object();
};

// Scalar columns in report order, with accessors into RecordScores.
struct ScoreColumn {
  std::string_view name;
  std::optional<double> RecordScores::*field;
};

inline constexpr std::array<ScoreColumn, 11> kScoreColumns{{
    {"bleu", &RecordScores::bleu},
    {"meteor", &RecordScores::meteor},
    {"rouge_l", &RecordScores::rouge_l},
    {"bleurt", &RecordScores::bleurt},
    {"faithfulness", &RecordScores::faithfulness},
    {"coverage", &RecordScores::coverage},
    {"informativeness", &RecordScores::informativeness},
    {"acuity", &RecordScores::acuity},
    {"precision", &RecordScores::precision},
    {"recall", &RecordScores::recall},
    {"f1", &RecordScores::f1},
}};

inline std::optional<double> score_by_name(const RecordScores& r, std::string_view name) {
  for (const auto& c : kScoreColumns) {
    if (c.name == name) return r.*(c.field);
  }
  return std::nullopt;
}

struct ModelSummary {
  std::string model_name;
  std::size_t records = 0;
  std::map<std::string, std::optional<double>> means;  // over records where the metric is defined
  std::map<std::string, std::size_t> counts;
  std::array<std::optional<double>, 5> acuity_breakdown{};
  std::map<std::string, std::size_t> error_histogram;  // all nine categories present
};

struct EvaluationReport {
  json metadata = json::object();
  std::vector<RecordScores> per_record;  // sorted by record id, then model order
  std::vector<ModelSummary> per_model;   // in order of first appearance
};

inline std::vector<ModelSummary> summarize_models(const std::vector<RecordScores>& rows,
                                                  const std::vector<std::string>& model_order) {
  std::vector<ModelSummary> out;
  for (const auto& model : model_order) {
    ModelSummary s;
    s.model_name = model;
    for (auto c : kErrorCategories) s.error_histogram[std::string(c)] = 0;
    std::map<std::string, double> sums;
    std::array<double, 5> acuity_sums{};
    std::size_t acuity_n = 0;
    for (const auto& r : rows) {
      if (r.model_name != model) continue;
      ++s.records;
      for (const auto& c : kScoreColumns) {
        const std::string name(c.name);
        s.counts.try_emplace(name, 0);
        if (const auto& v = r.*(c.field)) {
          sums[name] += *v;
          ++s.counts[name];
        }
      }
      if (r.acuity_subscores) {
        for (std::size_t d = 0; d < 5; ++d) acuity_sums[d] += (*r.acuity_subscores)[d];
        ++acuity_n;
      }
      for (const auto& cat : r.error_categories) ++s.error_histogram[cat];
    }
    for (const auto& c : kScoreColumns) {
      const std::string name(c.name);
      s.means[name] = s.counts[name] ? std::optional<double>(sums[name] / static_cast<double>(s.counts[name]))
                                     : std::nullopt;
    }
    for (std::size_t d = 0; d < 5; ++d) {
      if (acuity_n) s.acuity_breakdown[d] = acuity_sums[d] / static_cast<double>(acuity_n);
    }
    out.push_back(std::move(s));
  }
  return out;
}

/// Clients used for model-driven metrics; null members make the dependent
/// metrics N/A unless the inputs carry pre-extracted facts or units.
struct EvaluationServices {
  ChatClient* extractor = nullptr;
  std::string extractor_model;
  ChatClient* adjudicator = nullptr;
  std::string adjudicator_model;
  EmbeddingClient* embedder = nullptr;
  std::string embedder_model;
};

struct EvaluateOptions {
  std::vector<Metric> metrics{kAllMetrics.begin(), kAllMetrics.end()};
  std::size_t concurrency = 4;
  std::string timestamp;  // injected for reproducible reports; empty means now
};

namespace detail {

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Reference-side artifacts, computed once per record and shared by all models.
struct ReferenceArtifacts {
  std::optional<ImageData> image;
  std::string image_error;
  ChartSchema schema;
  std::optional<std::vector<DataFact>> facts;
  std::string facts_error;
  std::optional<std::vector<LevelUnit>> units;
  std::string units_error;
};

inline bool wants(const std::vector<Metric>& metrics, Metric m) {
  return std::find(metrics.begin(), metrics.end(), m) != metrics.end();
}

inline ReferenceArtifacts prepare_reference(const BenchmarkRecord& rec, const std::vector<Metric>& metrics,
                                            const EvaluationServices& svc, const HarnessConfig& cfg) {
  ReferenceArtifacts a;
  const bool need_image = wants(metrics, Metric::Faithfulness) || wants(metrics, Metric::Acuity) ||
                          (wants(metrics, Metric::Coverage) && !rec.schema && svc.extractor);
  if (need_image) {
    try {
      a.image = load_image(rec.image_path);
    } catch (const std::exception& e) {
      a.image_error = e.what();
    }
  }
  if (wants(metrics, Metric::Coverage)) {
    if (rec.schema) {
      a.schema = *rec.schema;
    } else if (svc.extractor && a.image) {
      try {
        a.schema = Extractor(*svc.extractor, svc.extractor_model, cfg.prompts).extract_schema(*a.image);
      } catch (const std::exception& e) {
        spdlog::warn("schema extraction failed for record {}: {}; matching lexically", rec.id, e.what());
      }
    }
    if (rec.reference_facts) {
      a.facts = *rec.reference_facts;
    } else if (!svc.extractor) {
      a.facts_error = "no extractor configured";
    } else {
      try {
        a.facts = Extractor(*svc.extractor, svc.extractor_model, cfg.prompts)
                      .extract_facts(rec.reference_description, &a.schema)
                      .facts;
      } catch (const std::exception& e) {
        a.facts_error = std::string("reference extraction failed: ") + e.what();
      }
    }
  }
  if (wants(metrics, Metric::Informativeness)) {
    if (rec.reference_units) {
      a.units = *rec.reference_units;
    } else if (!svc.extractor) {
      a.units_error = "no extractor configured";
    } else {
      try {
        a.units = Extractor(*svc.extractor, svc.extractor_model, cfg.prompts)
                      .segment_levels(rec.reference_description)
                      .units;
      } catch (const std::exception& e) {
        a.units_error = std::string("reference segmentation failed: ") + e.what();
      }
    }
  }
  return a;
}

inline void flag(RecordScores& s, Metric m, const std::string& reason) {
  s.flags.push_back(std::string(to_string(m)) + ": " + reason);
}

inline RecordScores score_output(const BenchmarkRecord& rec, const ReferenceArtifacts& ref,
                                 const ModelOutput& out, const std::vector<Metric>& metrics,
                                 const EvaluationServices& svc, const HarnessConfig& cfg) {
  RecordScores s;
  s.record_id = out.record_id;
  s.model_name = out.model_name;
  if (auto it = out.external_metrics.find("meteor"); it != out.external_metrics.end()) s.meteor = it->second;
  if (auto it = out.external_metrics.find("bleurt"); it != out.external_metrics.end()) s.bleurt = it->second;
  const bool empty_desc = trim(out.description).empty();
  const auto run = [&](Metric m, auto&& body) {
    if (!wants(metrics, m)) return;
    try {
      body();
    } catch (const std::exception& e) {
      flag(s, m, std::string("failed: ") + e.what());
      spdlog::warn("{} failed for ({}, {}): {}", to_string(m), out.record_id, out.model_name, e.what());
    }
  };

  run(Metric::Bleu, [&] { s.bleu = bleu(out.description, {rec.reference_description}); });
  run(Metric::Rouge, [&] { s.rouge_l = rouge_l(out.description, rec.reference_description).f1; });

  run(Metric::Coverage, [&] {
    if (!ref.facts) return flag(s, Metric::Coverage, ref.facts_error);
    if (ref.facts->empty()) return flag(s, Metric::Coverage, "reference has no data facts");
    std::vector<DataFact> model_facts;
    if (out.facts) {
      model_facts = *out.facts;
    } else if (!empty_desc) {
      if (!svc.extractor) return flag(s, Metric::Coverage, "no extractor configured");
      model_facts = Extractor(*svc.extractor, svc.extractor_model, cfg.prompts)
                        .extract_facts(out.description, &ref.schema)
                        .facts;
    }
    const TokenNormalizer norm(ref.schema, svc.embedder, cfg.match.embed_fallback_threshold);
    const MatchResult m = assign(*ref.facts, model_facts, cfg.match, norm);
    s.coverage = m.coverage;
    s.precision = m.precision;
    s.recall = m.recall;
    s.f1 = m.f1;
    s.details["coverage"] = m;
    s.details["coverage"]["reference_facts"] = ref.facts->size();
    s.details["coverage"]["model_facts"] = model_facts.size();
  });

  run(Metric::Informativeness, [&] {
    if (!ref.units) return flag(s, Metric::Informativeness, ref.units_error);
    if (ref.units->empty()) return flag(s, Metric::Informativeness, "reference has no level units");
    const LevelWeights w = context_weights(level_proportions(*ref.units), cfg.level_base_weights);
    std::vector<LevelUnit> units;
    if (out.units) {
      units = *out.units;
    } else if (!empty_desc) {
      if (!svc.extractor) return flag(s, Metric::Informativeness, "no extractor configured");
      units = Extractor(*svc.extractor, svc.extractor_model, cfg.prompts).segment_levels(out.description).units;
    }
    const InformativenessResult r = informativeness_score(units, w);
    s.informativeness = r.score;
    if (r.empty_description) flag(s, Metric::Informativeness, "empty description scored 0");
    s.details["informativeness"] = informativeness_json(w, r);
  });

  const bool judged = wants(metrics, Metric::Faithfulness) || wants(metrics, Metric::Acuity);
  std::string judge_blocker;
  if (judged) {
    if (!svc.adjudicator) judge_blocker = "no adjudicator configured";
    else if (!ref.image) judge_blocker = "chart image unusable: " + ref.image_error;
    else if (empty_desc) judge_blocker = "empty description";
  }
  run(Metric::Faithfulness, [&] {
    if (!judge_blocker.empty()) return flag(s, Metric::Faithfulness, judge_blocker);
    const auto v = Judge(*svc.adjudicator, svc.adjudicator_model, cfg.prompts)
                       .judge_faithfulness(*ref.image, out.description);
    s.faithfulness = faithfulness_score(v);
    if (!s.faithfulness) flag(s, Metric::Faithfulness, "adjudicator counted no claims");
    for (const auto& e : v.errors) s.error_categories.push_back(e.category);
    s.details["faithfulness"] = v;
  });
  run(Metric::Acuity, [&] {
    if (!judge_blocker.empty()) return flag(s, Metric::Acuity, judge_blocker);
    const auto v =
        Judge(*svc.adjudicator, svc.adjudicator_model, cfg.prompts).judge_acuity(*ref.image, out.description);
    s.acuity = acuity_score(v);
    s.acuity_subscores = v.scores;
    s.details["acuity"] = v;
  });
  return s;
}

}  // namespace detail

/// Scores every model output against its record. Metric failures become
/// per-record N/A flags; only unknown record ids abort the run.
inline EvaluationReport evaluate(const std::vector<BenchmarkRecord>& records,
                                 const std::vector<ModelOutput>& outputs, const HarnessConfig& cfg,
                                 const EvaluationServices& svc, const EvaluateOptions& opt = {}) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) by_id.emplace(records[i].id, i);
  std::vector<std::string> model_order;
  std::vector<std::size_t> needed;
  for (const auto& o : outputs) {
    auto it = by_id.find(o.record_id);
    if (it == by_id.end()) {
      throw ValidationError("output references unknown record '" + o.record_id + "'", "record_id");
    }
    if (std::find(model_order.begin(), model_order.end(), o.model_name) == model_order.end()) {
      model_order.push_back(o.model_name);
    }
    if (std::find(needed.begin(), needed.end(), it->second) == needed.end()) needed.push_back(it->second);
  }

  std::vector<detail::ReferenceArtifacts> refs(records.size());
  detail::parallel_for(needed.size(), opt.concurrency, [&](std::size_t k) {
    refs[needed[k]] = detail::prepare_reference(records[needed[k]], opt.metrics, svc, cfg);
  });

  EvaluationReport report;
  report.per_record.resize(outputs.size());
  detail::parallel_for(outputs.size(), opt.concurrency, [&](std::size_t i) {
    const std::size_t r = by_id.at(outputs[i].record_id);
    report.per_record[i] = detail::score_output(records[r], refs[r], outputs[i], opt.metrics, svc, cfg);
  });

  auto model_rank = [&](const std::string& m) {
    return std::find(model_order.begin(), model_order.end(), m) - model_order.begin();
  };
  std::stable_sort(report.per_record.begin(), report.per_record.end(),
                   [&](const RecordScores& a, const RecordScores& b) {
                     if (a.record_id != b.record_id) return a.record_id < b.record_id;
                     return model_rank(a.model_name) < model_rank(b.model_name);
                   });
  report.per_model = summarize_models(report.per_record, model_order);

  json metrics = json::array();
  for (auto m : opt.metrics) metrics.push_back(std::string(to_string(m)));
  report.metadata = json{{"tool", kToolVersion},
                         {"config_hash", config_hash(cfg)},
                         {"prompt_versions", cfg.prompts.versions()},
                         {"adjudicator", svc.adjudicator ? svc.adjudicator_model : ""},
                         {"extractor", svc.extractor ? svc.extractor_model : ""},
                         {"embedder", svc.embedder ? svc.embedder_model : ""},
                         {"metrics", std::move(metrics)},
                         {"models", model_order},
                         {"timestamp", opt.timestamp.empty() ? detail::utc_now() : opt.timestamp}};
  return report;
}

// ---------------------------------------------------------------------------
// Report persistence

namespace detail {

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> optional_from(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace detail

inline json report_to_json(const EvaluationReport& r) {
  json rows = json::array();
  for (const auto& s : r.per_record) {
    json scores = json::object();
    for (const auto& c : kScoreColumns) scores[std::string(c.name)] = detail::optional_json(s.*(c.field));
    json subs = nullptr;
    if (s.acuity_subscores) {
      subs = json::object();
      for (std::size_t d = 0; d < 5; ++d) subs[std::string(kAcuityDimensionNames[d])] = (*s.acuity_subscores)[d];
    }
    scores["acuity_subscores"] = std::move(subs);
    rows.push_back({{"record_id", s.record_id},
                    {"model_name", s.model_name},
                    {"scores", std::move(scores)},
                    {"faithfulness_error_categories", s.error_categories},
                    {"flags", s.flags},
                    {"details", s.details}});
  }
  json models = json::array();
  for (const auto& m : r.per_model) {
    json means = json::object();
    for (const auto& [k, v] : m.means) means[k] = detail::optional_json(v);
    json breakdown = json::object();
    for (std::size_t d = 0; d < 5; ++d) {
      breakdown[std::string(kAcuityDimensionNames[d])] = detail::optional_json(m.acuity_breakdown[d]);
    }
    models.push_back({{"model_name", m.model_name},
                      {"records", m.records},
                      {"means", std::move(means)},
                      {"counts", m.counts},
                      {"acuity_breakdown", std::move(breakdown)},
                      {"error_histogram", m.error_histogram}});
  }
  return json{{"metadata", r.metadata}, {"per_record", std::move(rows)}, {"per_model", std::move(models)}};
}

/// Rebuilds a report from its JSON form; per-model summaries are recomputed
/// from the per-record rows.
inline EvaluationReport report_from_json(const json& j) {
  EvaluationReport r;
  try {
    r.metadata = j.at("metadata");
    std::vector<std::string> model_order;
    for (const auto& row : j.at("per_record")) {
      RecordScores s;
      s.record_id = row.at("record_id").get<std::string>();
      s.model_name = row.at("model_name").get<std::string>();
      const json& scores = row.at("scores");
      for (const auto& c : kScoreColumns) s.*(c.field) = detail::optional_from(scores, std::string(c.name).c_str());
      if (scores.contains("acuity_subscores") && scores["acuity_subscores"].is_object()) {
        std::array<int, 5> subs{};
        for (std::size_t d = 0; d < 5; ++d) {
          subs[d] = scores["acuity_subscores"].at(std::string(kAcuityDimensionNames[d])).get<int>();
        }
        s.acuity_subscores = subs;
      }
      s.error_categories = row.value("faithfulness_error_categories", std::vector<std::string>{});
      s.flags = row.value("flags", std::vector<std::string>{});
      s.details = row.value("details", json::object());
      if (std::find(model_order.begin(), model_order.end(), s.model_name) == model_order.end()) {
        model_order.push_back(s.model_name);
      }
      r.per_record.push_back(std::move(s));
    }
    if (r.metadata.contains("models")) {
      const auto declared = r.metadata["models"].get<std::vector<std::string>>();
      if (std::is_permutation(declared.begin(), declared.end(), model_order.begin(), model_order.end())) {
        model_order = declared;
      }
    }
    r.per_model = summarize_models(r.per_record, model_order);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what(), "report");
  }
  return r;
}

inline EvaluationReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open report '" + path + "'", "report");
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ValidationError("report '" + path + "' is not valid JSON", "report");
  return report_from_json(j);
}

// ---------------------------------------------------------------------------
// Rendering

struct TableColumn {
  std::string_view key;    // key into ModelSummary::means
  std::string_view title;  // column heading
};

inline constexpr std::array<TableColumn, 8> kComparisonColumns{{{"bleu", "BLEU"},
                                                                {"meteor", "METEOR"},
                                                                {"rouge_l", "ROUGE"},
                                                                {"bleurt", "BLEURT"},
                                                                {"faithfulness", "Faithfulness"},
                                                                {"coverage", "Coverage"},
                                                                {"informativeness", "Informativeness"},
                                                                {"acuity", "Acuity"}}};

inline constexpr std::array<std::string_view, 5> kAcuityColumnTitles{"Acc.", "Integ.", "Insight", "Etiol.",
                                                                     "Multi."};

namespace detail {

inline std::string fixed(const std::optional<double>& v, int decimals) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
  return buf;
}

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<Table> report_tables(const EvaluationReport& r) {
  Table cmp{"Model comparison", {"Model"}, {}};
  for (const auto& c : kComparisonColumns) cmp.header.emplace_back(c.title);
  Table acu{"Acuity breakdown", {"Model"}, {}};
  for (auto t : kAcuityColumnTitles) acu.header.emplace_back(t);
  Table err{"Faithfulness error categories", {"Model"}, {}};
  for (auto c : kErrorCategories) err.header.emplace_back(c);
  for (const auto& m : r.per_model) {
    std::vector<std::string> row{m.model_name};
    for (const auto& c : kComparisonColumns) row.push_back(fixed(m.means.at(std::string(c.key)), 4));
    cmp.rows.push_back(std::move(row));
    row = {m.model_name};
    for (const auto& v : m.acuity_breakdown) row.push_back(fixed(v, 2));
    acu.rows.push_back(std::move(row));
    row = {m.model_name};
    for (auto c : kErrorCategories) row.push_back(std::to_string(m.error_histogram.at(std::string(c))));
    err.rows.push_back(std::move(row));
  }
  return {cmp, acu, err};
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string md_cell(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

/// Renders the model comparison, the acuity breakdown and the error-category
/// histogram as "markdown", "csv" or "json".
inline std::string aggregate_report(const EvaluationReport& r, const std::string& format) {
  const auto tables = detail::report_tables(r);
  std::ostringstream out;
  if (format == "markdown" || format == "md") {
    for (std::size_t t = 0; t < tables.size(); ++t) {
      if (t) out << "\n";
      out << "### " << tables[t].title << "\n\n|";
      for (const auto& h : tables[t].header) out << " " << h << " |";
      out << "\n|";
      for (std::size_t c = 0; c < tables[t].header.size(); ++c) out << (c ? "---:|" : "---|");
      out << "\n";
      for (const auto& row : tables[t].rows) {
        out << "|";
        for (const auto& cell : row) out << " " << detail::md_cell(cell) << " |";
        out << "\n";
      }
    }
    return out.str();
  }
  if (format == "csv") {
    for (std::size_t t = 0; t < tables.size(); ++t) {
      if (t) out << "\n";
      out << "# " << tables[t].title << "\n";
      for (const auto& row : std::vector<std::vector<std::string>>{tables[t].header}) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << detail::csv_cell(row[c]);
        out << "\n";
      }
      for (const auto& row : tables[t].rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << detail::csv_cell(row[c]);
        out << "\n";
      }
    }
    return out.str();
  }
  if (format == "json") {
    json models = json::array();
    for (const auto& m : r.per_model) {
      json cols = json::object();
      for (const auto& c : kComparisonColumns) cols[std::string(c.key)] = detail::optional_json(m.means.at(std::string(c.key)));
      json acu = json::object();
      for (std::size_t d = 0; d < 5; ++d) acu[std::string(kAcuityDimensionNames[d])] = detail::optional_json(m.acuity_breakdown[d]);
      models.push_back({{"model_name", m.model_name},
                        {"records", m.records},
                        {"comparison", std::move(cols)},
                        {"acuity_breakdown", std::move(acu)},
                        {"error_histogram", m.error_histogram}});
    }
    return json{{"models", std::move(models)}}.dump(2) + "\n";
  }
  throw ValidationError("unknown report format '" + format + "' (expected markdown, csv or json)", "format");
}

// ---------------------------------------------------------------------------
// Human agreement

struct SrccEntry {
  std::optional<double> rho;  // N/A with fewer than two aligned pairs or a constant list
  std::size_t pairs = 0;
};

/// Spearman correlation per metric between report scores and human scores
/// read from JSONL lines {record_id, model_name, metric, score}.
inline std::map<std::string, SrccEntry> compute_srcc(const EvaluationReport& report, const std::string& human_path) {
  std::map<std::pair<std::string, std::string>, const RecordScores*> rows;
  for (const auto& s : report.per_record) rows[{s.record_id, s.model_name}] = &s;
  std::map<std::string, ScorePair> aligned;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  detail::for_each_jsonl(human_path, [&](std::size_t, const json& j) {
    const std::string rid = detail::required_string(j, "record_id");
    const std::string model = detail::required_string(j, "model_name");
    std::string metric = detail::ascii_lower(detail::required_string(j, "metric"));
    if (metric == "rouge") metric = "rouge_l";
    if (!j.contains("score") || !j["score"].is_number()) throw ValidationError("missing numeric 'score'", "score");
    if (std::none_of(kScoreColumns.begin(), kScoreColumns.end(), [&](const auto& c) { return c.name == metric; })) {
      throw ValidationError("unknown metric '" + metric + "'", "metric");
    }
    if (!seen.emplace(rid, model, metric).second) {
      throw ValidationError("duplicate human score for (" + rid + ", " + model + ", " + metric + ")", "metric");
    }
    auto& pair = aligned[metric];
    auto it = rows.find({rid, model});
    if (it == rows.end()) return;
    const auto automatic = score_by_name(*it->second, metric);
    if (!automatic) return;
    pair.automatic.push_back(*automatic);
    pair.human.push_back(j["score"].get<double>());
  });
  std::map<std::string, SrccEntry> out;
  for (const auto& [metric, pair] : aligned) {
    SrccEntry e;
    e.pairs = pair.automatic.size();
    if (e.pairs >= 2) e.rho = spearman(pair);
    out[metric] = e;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extraction export

/// Copies of the records with schema, reference facts and reference units
/// filled in where they were missing, so later runs need no extraction calls.
inline std::vector<BenchmarkRecord> enrich_records(const std::vector<BenchmarkRecord>& records,
                                                   ChatClient& chat, const std::string& model_id,
                                                   const PromptSet& prompts, std::size_t concurrency) {
  std::vector<BenchmarkRecord> out = records;
  const Extractor extractor(chat, model_id, prompts);
  detail::parallel_for(out.size(), concurrency, [&](std::size_t i) {
    auto& r = out[i];
    if (!r.schema) r.schema = extractor.extract_schema(load_image(r.image_path));
    if (!r.reference_facts) r.reference_facts = extractor.extract_facts(r.reference_description, &*r.schema).facts;
    if (!r.reference_units) r.reference_units = extractor.segment_levels(r.reference_description).units;
  });
  return out;
}

/// Copies of the outputs with facts and units filled in, matched against
/// each record's schema when one is known.
inline std::vector<ModelOutput> enrich_outputs(const std::vector<ModelOutput>& outputs,
                                               const std::vector<BenchmarkRecord>& records, ChatClient& chat,
                                               const std::string& model_id, const PromptSet& prompts,
                                               std::size_t concurrency) {
  std::map<std::string, const BenchmarkRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::vector<ModelOutput> out = outputs;
  const Extractor extractor(chat, model_id, prompts);
  detail::parallel_for(out.size(), concurrency, [&](std::size_t i) {
    auto& o = out[i];
    if (detail::trim(o.description).empty()) {
      o.facts = o.facts.value_or(std::vector<DataFact>{});
      o.units = o.units.value_or(std::vector<LevelUnit>{});
      return;
    }
    auto it = by_id.find(o.record_id);
    const ChartSchema* schema = it != by_id.end() && it->second->schema ? &*it->second->schema : nullptr;
    if (!o.facts) o.facts = extractor.extract_facts(o.description, schema).facts;
    if (!o.units) o.units = extractor.segment_levels(o.description).units;
  });
  return out;
}

}  // namespace chartfi
