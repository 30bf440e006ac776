// chartfi: batch evaluation of chart descriptions.
//
//   chartfi extract  --dataset d.jsonl [--outputs o.jsonl] --out d.rich.jsonl [--outputs-out o.rich.jsonl]
//   chartfi generate --dataset d.jsonl --model-name NAME --out o.jsonl
//   chartfi evaluate --dataset d.jsonl --outputs o.jsonl [--metrics LIST] --out report.json
//   chartfi report   --report report.json [--format markdown|csv|json]
//   chartfi srcc     --report report.json --human human.jsonl
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 provider or
// judge failure after retries.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "chartfi/chartfi.hpp"
#include "chartfi/provider_factory.hpp"

using namespace chartfi;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string cache_dir;
  std::size_t concurrency = 0;  // 0: take it from the config
  bool verbose = false;
};

struct Context {
  HarnessConfig cfg;
  ProviderSet providers;
  std::size_t concurrency = 1;
};

Context open_context(const CommonOptions& o) {
  Context ctx;
  ctx.cfg = o.config_path.empty() ? HarnessConfig{} : load_config(o.config_path);
  ctx.concurrency = o.concurrency ? o.concurrency : ctx.cfg.concurrency;
  ctx.providers = make_providers(ctx.cfg, o.cache_dir, ctx.concurrency);
  return ctx;
}

ChatClient& require_role(const Context& ctx, const std::string& profile, const char* role) {
  ChatClient* c = ctx.providers.chat_for(profile);
  if (!c) throw ValidationError(std::string("config assigns no provider to the ") + role + " role", role);
  return *c;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write " + out_path, "out");
  f << text;
}

std::string srcc_table(const std::map<std::string, SrccEntry>& rho, const std::string& format) {
  if (format == "json") {
    json j = json::object();
    for (const auto& [metric, e] : rho) {
      j[metric] = {{"rho", e.rho ? json(*e.rho) : json(nullptr)}, {"pairs", e.pairs}};
    }
    return j.dump(2) + "\n";
  }
  const bool csv = format == "csv";
  if (!csv && format != "markdown" && format != "md") {
    throw ValidationError("unknown format '" + format + "'", "format");
  }
  std::string out = csv ? "metric,srcc,pairs\n" : "| Metric | SRCC | Pairs |\n|---|---|---|\n";
  for (const auto& [metric, e] : rho) {
    const std::string v = detail::fixed(e.rho, 4);
    out += csv ? metric + "," + v + "," + std::to_string(e.pairs) + "\n"
               : "| " + metric + " | " + v + " | " + std::to_string(e.pairs) + " |\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate chart descriptions against references and chart images."};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonOptions common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON config with provider profiles and metric settings")
        ->check(CLI::ExistingFile);
    sub->add_option("--cache-dir", common.cache_dir, "response cache directory");
    sub->add_option("--concurrency", common.concurrency, "maximum requests in flight")->check(CLI::PositiveNumber);
    sub->add_flag("-v,--verbose", common.verbose, "debug logging");
  };

  std::string dataset, outputs, out, outputs_out, metrics = "all", format = "markdown", report_path, human,
                                                  model_name, timestamp;

  auto* extract = app.add_subcommand("extract", "write datasets and outputs with facts, schema and units filled in");
  add_common(extract);
  extract->add_option("--dataset", dataset, "benchmark JSONL")->required()->check(CLI::ExistingFile);
  extract->add_option("--outputs", outputs, "model outputs JSONL")->check(CLI::ExistingFile);
  extract->add_option("--out", out, "enriched dataset JSONL")->required();
  extract->add_option("--outputs-out", outputs_out, "enriched outputs JSONL");

  auto* generate = app.add_subcommand("generate", "describe every chart with the generator role");
  add_common(generate);
  generate->add_option("--dataset", dataset, "benchmark JSONL")->required()->check(CLI::ExistingFile);
  generate->add_option("--model-name", model_name, "model name recorded in the outputs")->required();
  generate->add_option("--out", out, "outputs JSONL")->required();

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score model outputs");
  add_common(evaluate_cmd);
  evaluate_cmd->add_option("--dataset", dataset, "benchmark JSONL")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--outputs", outputs, "model outputs JSONL")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--metrics", metrics, "comma-separated metric names or 'all'");
  evaluate_cmd->add_option("--out", out, "report JSON (stdout when omitted)");
  evaluate_cmd->add_option("--timestamp", timestamp, "fixed report timestamp");

  auto* report_cmd = app.add_subcommand("report", "render aggregate tables from a report");
  report_cmd->add_option("--report", report_path, "report JSON")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--format", format, "markdown, csv or json");
  report_cmd->add_option("--out", out, "output file (stdout when omitted)");
  report_cmd->add_flag("-v,--verbose", common.verbose, "debug logging");

  auto* srcc_cmd = app.add_subcommand("srcc", "rank correlation between report scores and human scores");
  srcc_cmd->add_option("--report", report_path, "report JSON")->required()->check(CLI::ExistingFile);
  srcc_cmd->add_option("--human", human, "human scores JSONL")->required()->check(CLI::ExistingFile);
  srcc_cmd->add_option("--format", format, "markdown, csv or json");
  srcc_cmd->add_option("--out", out, "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("chartfi"));
  spdlog::set_level(common.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*extract) {
      const Context ctx = open_context(common);
      ChatClient& chat = require_role(ctx, ctx.cfg.extractor, "extractor");
      const std::string model = ctx.cfg.model_for(ctx.cfg.extractor);
      const auto records = enrich_records(load_dataset(dataset), chat, model, ctx.cfg.prompts, ctx.concurrency);
      write_jsonl(out, records);
      spdlog::info("wrote {} records to {}", records.size(), out);
      if (!outputs.empty()) {
        if (outputs_out.empty()) throw ValidationError("--outputs requires --outputs-out", "outputs-out");
        const auto rich = enrich_outputs(load_outputs(outputs), records, chat, model, ctx.cfg.prompts, ctx.concurrency);
        write_jsonl(outputs_out, rich);
        spdlog::info("wrote {} outputs to {}", rich.size(), outputs_out);
      }
    } else if (*generate) {
      const Context ctx = open_context(common);
      ChatClient& chat = require_role(ctx, ctx.cfg.generator, "generator");
      const auto res = generate_descriptions(load_dataset(dataset), chat, ctx.cfg.model_for(ctx.cfg.generator),
                                             model_name, ctx.cfg.prompts, ctx.concurrency);
      write_jsonl(out, res.outputs);
      spdlog::info("wrote {} outputs to {}", res.outputs.size(), out);
      if (!res.failures.empty()) {
        spdlog::error("{} records failed; rerun with the same --cache-dir to resume", res.failures.size());
        return 2;
      }
    } else if (*evaluate_cmd) {
      const Context ctx = open_context(common);
      EvaluationServices svc;
      svc.extractor = ctx.providers.chat_for(ctx.cfg.extractor);
      svc.extractor_model = ctx.cfg.model_for(ctx.cfg.extractor);
      svc.adjudicator = ctx.providers.chat_for(ctx.cfg.adjudicator);
      svc.adjudicator_model = ctx.cfg.model_for(ctx.cfg.adjudicator);
      svc.embedder = ctx.providers.embedder.get();
      svc.embedder_model = ctx.cfg.model_for(ctx.cfg.embedder);
      EvaluateOptions opt;
      opt.metrics = parse_metrics(metrics);
      opt.concurrency = ctx.concurrency;
      opt.timestamp = timestamp;
      const auto report = chartfi::evaluate(load_dataset(dataset), load_outputs(outputs), ctx.cfg, svc, opt);
      std::size_t flagged = 0;
      for (const auto& s : report.per_record) flagged += s.flags.empty() ? 0 : 1;
      if (flagged) spdlog::warn("{} of {} rows carry N/A flags", flagged, report.per_record.size());
      emit(report_to_json(report).dump(2) + "\n", out);
    } else if (*report_cmd) {
      emit(aggregate_report(load_report(report_path), format), out);
    } else if (*srcc_cmd) {
      emit(srcc_table(compute_srcc(load_report(report_path), human), format), out);
    }
  } catch (const ValidationError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const ProviderError& e) {
    spdlog::error("provider failure: {}", e.what());
    return 2;
  } catch (const JudgeError& e) {
    spdlog::error("judge failure: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
