//
// Copyright 2026 The vdm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// vdm: vertical data minimization toolkit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "vdm/adversaries.h"
#include "vdm/dataset.h"
#include "vdm/eval.h"
#include "vdm/generalize.h"
#include "vdm/neural_min.h"
#include "vdm/pat.h"
#include "vdm/random.h"
#include "vdm/synth.h"

namespace vdm::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kVersion[] = "0.1.0";
constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

int ExitCode(const absl::Status& st) {
  switch (st.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kFailedPrecondition:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

int Fail(const absl::Status& st) {
  std::cerr << "vdm: error: " << st.message() << "\n";
  return ExitCode(st);
}

absl::Status WriteText(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return absl::OkStatus();
  }
  std::error_code ec;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out << text;
  return out ? absl::OkStatus() : absl::DataLossError(absl::StrCat("short write to ", path));
}

absl::StatusOr<std::string> ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::StatusOr<json> ReadJson(const std::string& path) {
  absl::StatusOr<std::string> text = ReadText(path);
  if (!text.ok()) return text.status();
  json doc = json::parse(*text, nullptr, false);
  if (doc.is_discarded()) return absl::InvalidArgumentError(absl::StrCat(path, " is not valid JSON"));
  return doc;
}

std::string Dump(const json& doc) { return doc.dump(2) + "\n"; }

// Dataset flags shared by most subcommands.
struct DataArgs {
  std::string data;
  std::string schema;
  double train = 0.6, val = 0.1, test = 0.3;
  std::uint64_t split_seed = 0;

  void Register(CLI::App* app, bool required = true) {
    app->add_option("--data", data, "CSV with a header row")->required(required);
    app->add_option("--schema", schema, "Schema JSON")->required(required);
    app->add_option("--train", train, "Train fraction when the CSV has no split column");
    app->add_option("--val", val, "Validation fraction");
    app->add_option("--test", test, "Test fraction");
    app->add_option("--split-seed", split_seed, "Seed of the split assignment");
  }

  absl::StatusOr<DatasetView> Load() const {
    if (!fs::exists(schema)) return absl::NotFoundError(absl::StrCat("schema not found: ", schema));
    if (!fs::exists(data)) return absl::NotFoundError(absl::StrCat("data not found: ", data));
    LoadOptions options;
    options.fractions = {train, val, test};
    options.seed = split_seed;
    return LoadCsv(data, schema, options);
  }
};

absl::StatusOr<Generalization> LoadGeneralization(const std::string& path,
                                                  const Schema& schema) {
  if (!fs::exists(path)) return absl::NotFoundError(absl::StrCat("generalization not found: ", path));
  return Generalization::FromFile(path, schema);
}

absl::StatusOr<std::vector<int>> ResolveAttributes(const Schema& schema,
                                                   const std::string& names) {
  std::vector<int> out;
  for (absl::string_view name : absl::StrSplit(names, ',', absl::SkipEmpty())) {
    const int a = schema.Find(std::string_view(name.data(), name.size()));
    if (a < 0) return absl::InvalidArgumentError(absl::StrCat("unknown attribute '", name, "'"));
    out.push_back(a);
  }
  return out;
}

// Writes a generalization (or prints it) and a one-line summary.
absl::Status EmitGeneralization(const Generalization& g, const std::string& out) {
  if (out.empty()) return WriteText("", Dump(g.ToJson()));
  if (absl::Status st = g.WriteFile(out); !st.ok()) return st;
  std::cerr << "wrote " << out << " (" << g.TotalBuckets() << " buckets)\n";
  return absl::OkStatus();
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  SynthOptions options;
  std::string out = "data.csv";
  std::string schema_out = "schema.json";
};

absl::Status RunSynth(const SynthArgs& args) {
  absl::StatusOr<DatasetView> data = Synthesize(args.options);
  if (!data.ok()) return data.status();
  if (absl::Status st = data->schema().WriteFile(args.schema_out); !st.ok()) return st;
  return WriteCsv(*data, args.out);
}

// ---------------------------------------------------------------- split

struct SplitArgs {
  DataArgs data;
  std::string out;
};

absl::Status RunSplit(const SplitArgs& args) {
  absl::StatusOr<DatasetView> view = args.data.Load();
  if (!view.ok()) return view.status();
  absl::StatusOr<DatasetView> split =
      SplitView(*view, {args.data.train, args.data.val, args.data.test}, args.data.split_seed);
  if (!split.ok()) return split.status();
  if (args.out.empty()) return WriteText("", ToCsv(*split));
  return WriteCsv(*split, args.out);
}

// ---------------------------------------------------------------- minimizers

struct MinimizeArgs {
  DataArgs data;
  std::string method;
  std::string k = "2";
  double alpha = 0.5;
  int max_leaves = 10;
  int min_leaf = 100;
  double target_error = 0.2;
  double lambda = 0.5;
  int buckets = 5;
  int epochs = 20;
  std::uint64_t seed = 0;
  std::string tree_out;
  std::string out;
};

absl::StatusOr<json> KParam(const std::string& k) {
  if (k == "all") return json("all");
  int value = 0;
  if (!absl::SimpleAtoi(k, &value)) return absl::InvalidArgumentError(absl::StrCat("bad --k '", k, "'"));
  return json(value);
}

absl::Status RunMinimize(const std::string& command, const MinimizeArgs& args) {
  absl::StatusOr<DatasetView> data = args.data.Load();
  if (!data.ok()) return data.status();
  eval::MinimizerSpec spec;
  if (command == "pat") {
    spec = {"pat", {{"alpha", args.alpha}, {"max_leaves", args.max_leaves},
                    {"min_samples_leaf", args.min_leaf}}};
  } else if (command == "baseline") {
    absl::StatusOr<json> k = KParam(args.k);
    if (!k.ok()) return k.status();
    if (args.method == "iterative") {
      spec = {"iterative", {{"target_error", args.target_error}, {"k_init", *k}}};
    } else {
      spec = {args.method, {{"k", *k}}};
    }
  }
  absl::StatusOr<Generalization> g;
  if (command == "neural") {
    // Epoch count is a schedule knob rather than a grid parameter.
    neural::NeuralOptions options;
    options.lambda = args.lambda;
    options.buckets = args.buckets;
    options.schedule.epochs = args.epochs;
    options.schedule.seed = args.seed;
    const DatasetView train = data->Part(Split::kTrain);
    absl::StatusOr<neural::NeuralResult> r = args.method == "advtrain"
                                                 ? neural::AdvTrainFit(train, options)
                                                 : neural::MutualInfFit(train, options);
    if (!r.ok()) return r.status();
    g = r->generalization;
  } else {
    g = eval::RunMinimizer(spec, *data, args.seed);
  }
  if (!g.ok()) return g.status();
  if (command == "pat" && !args.tree_out.empty()) {
    pat::PatConfig config;
    config.alpha = args.alpha;
    config.max_leaves = args.max_leaves;
    config.min_samples_leaf = args.min_leaf;
    absl::StatusOr<pat::PatTree> tree = pat::Fit(data->Part(Split::kTrain), config);
    if (!tree.ok()) return tree.status();
    if (absl::Status st = WriteText(args.tree_out, Dump(tree->ToJson())); !st.ok()) return st;
  }
  return EmitGeneralization(*g, args.out);
}

// ---------------------------------------------------------------- attack

struct AttackArgs {
  DataArgs data;
  std::string adversary;
  std::string generalization;
  std::string generalization2;
  std::string breach;
  double k_percent = 10.0;
  std::string side_info;
  std::string attrs_a;
  std::string attrs_b;
  int epochs = 20;
  std::uint64_t seed = 0;
  std::string out;
};

absl::StatusOr<json> Attack(const AttackArgs& args, const DatasetView& data,
                            const Generalization& g) {
  adversaries::BreachScenario s = adversaries::ScenarioFromSplits(g, data);
  if (!args.breach.empty()) {
    if (!fs::exists(args.breach)) return absl::NotFoundError(absl::StrCat("breach not found: ", args.breach));
    LoadOptions options;
    options.normalization = data.normalization();
    options.fractions = {1.0, 0.0, 0.0};
    absl::StatusOr<DatasetView> breach = LoadCsv(args.breach, data.schema(), options);
    if (!breach.ok()) return breach.status();
    s.breach = *std::move(breach);
  }
  adversaries::AdversaryOptions options;
  options.schedule.epochs = args.epochs;
  options.schedule.seed = args.seed;
  const std::string& a = args.adversary;
  absl::StatusOr<adversaries::ReconstructionReport> report;
  if (a == "a1") {
    report = adversaries::A1Reconstruct(s, options);
  } else if (a == "a2") {
    report = adversaries::A2HighCertainty(s, args.k_percent, options);
  } else if (a == "a3") {
    report = adversaries::A3NonPersonal(s, options);
  } else if (a == "a4") {
    report = adversaries::A4LeaveOneOut(s, options);
  } else if (a == "a5") {
    absl::StatusOr<std::vector<int>> order = ResolveAttributes(g.schema(), args.side_info);
    if (!order.ok()) return order.status();
    report = adversaries::A5Prefix(s, *order, options);
  } else if (a == "a6") {
    if (args.generalization2.empty()) {
      return absl::InvalidArgumentError("a6 needs --generalization2");
    }
    absl::StatusOr<Generalization> g2 = LoadGeneralization(args.generalization2, data.schema());
    if (!g2.ok()) return g2.status();
    adversaries::BreachScenario s2 = s;
    s2.g = *g2;
    report = adversaries::A6MultiBreach(s, s2, options);
  } else if (a == "a7") {
    absl::StatusOr<std::vector<int>> attrs_a = ResolveAttributes(g.schema(), args.attrs_a);
    absl::StatusOr<std::vector<int>> attrs_b = ResolveAttributes(g.schema(), args.attrs_b);
    if (!attrs_a.ok()) return attrs_a.status();
    if (!attrs_b.ok()) return attrs_b.status();
    if (attrs_a->empty()) *attrs_a = g.schema().non_personal();
    if (attrs_b->empty()) *attrs_b = g.schema().personal();
    absl::StatusOr<DatasetView> z = Apply(g, s.breach);
    if (!z.ok()) return z.status();
    std::vector<std::vector<double>> side_a, side_b;
    for (std::size_t r = 0; r < s.breach.num_rows(); ++r) {
      side_a.emplace_back();
      side_b.emplace_back();
      for (int i : *attrs_a) side_a.back().push_back(s.breach.value(r, i));
      for (int i : *attrs_b) side_b.back().push_back(s.breach.value(r, i));
    }
    absl::StatusOr<adversaries::LinkageReport> link = adversaries::A7Linkability(
        g, *z, *attrs_a, *attrs_b, side_a, side_b, args.seed);
    if (!link.ok()) return link.status();
    return link->ToJson();
  } else if (a == "a8") {
    absl::StatusOr<DatasetView> z = Apply(g, s.breach);
    if (!z.ok()) return z.status();
    return adversaries::A8SinglingOut(g, *z).ToJson(g.schema());
  } else {
    return absl::InvalidArgumentError(absl::StrCat("unknown adversary '", a, "'"));
  }
  if (!report.ok()) return report.status();
  return report->ToJson();
}

absl::Status RunAttack(const AttackArgs& args) {
  absl::StatusOr<DatasetView> data = args.data.Load();
  if (!data.ok()) return data.status();
  absl::StatusOr<Generalization> g = LoadGeneralization(args.generalization, data->schema());
  if (!g.ok()) return g.status();
  absl::StatusOr<json> report = Attack(args, *data, *g);
  if (!report.ok()) return report.status();
  (*report)["adversary"] = args.adversary;
  return WriteText(args.out, Dump(*report));
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  DataArgs data;
  std::vector<std::string> minimizers;
  std::string grid = "default";
  std::string adversaries = "a1";
  int threads = 1;
  std::uint64_t seed = 0;
  std::string out_dir = "sweep";
};

bool IsLimit(const eval::ParetoPoint& p) { return p.minimizer.rfind("limit_", 0) == 0; }

absl::StatusOr<std::vector<eval::MinimizerSpec>> Specs(const std::string& minimizer,
                                                       const json& grid, const Schema& schema,
                                                       const std::vector<eval::ParetoPoint>& limits) {
  if (grid.is_string() && grid == "default") {
    return eval::DefaultGrid(minimizer, schema, limits[0].classifier.val,
                             limits[1].classifier.val);
  }
  if (!grid.is_array()) {
    return absl::InvalidArgumentError(
        absl::StrCat("grid of ", minimizer, " must be \"default\" or a list of parameter objects"));
  }
  std::vector<eval::MinimizerSpec> specs;
  for (const json& params : grid) {
    eval::MinimizerSpec spec{minimizer, params};
    if (absl::Status st = eval::ValidateSpec(spec, schema); !st.ok()) return st;
    specs.push_back(std::move(spec));
  }
  return specs;
}

// Artifacts of one sweep, written into `dir`. Returns relative file names.
absl::StatusOr<std::vector<std::string>> WriteSweep(
    const std::string& dir, const std::vector<eval::ParetoPoint>& limits,
    const std::vector<eval::ParetoPoint>& points) {
  std::vector<eval::ParetoPoint> all = limits;
  all.insert(all.end(), points.begin(), points.end());
  const std::vector<std::pair<std::string, std::string>> files = {
      {"points.csv", eval::PointsCsv(all)},
      {"points.json", Dump(eval::PointsJson(all))},
      {"front.json", Dump(eval::FrontJson(points, limits))}};
  std::vector<std::string> names;
  for (const auto& [name, text] : files) {
    if (absl::Status st = WriteText((fs::path(dir) / name).string(), text); !st.ok()) return st;
    names.push_back(name);
  }
  return names;
}

absl::Status CheckAdversaries(const std::vector<std::string>& adversaries) {
  for (const std::string& a : adversaries) {
    if (a != "a1" && a != "a2" && a != "a3" && a != "a4" && a != "a5" && a != "a6" &&
        a != "a7" && a != "a8") {
      return absl::InvalidArgumentError(absl::StrCat("unknown adversary '", a, "'"));
    }
  }
  return absl::OkStatus();
}

absl::Status RunSweep(const SweepArgs& args) {
  const std::vector<std::string> adversaries = absl::StrSplit(args.adversaries, ',', absl::SkipEmpty());
  if (absl::Status st = CheckAdversaries(adversaries); !st.ok()) return st;
  if (std::find(adversaries.begin(), adversaries.end(), "a1") == adversaries.end()) {
    return absl::InvalidArgumentError("sweep selects on A1 error; include a1 in --adversaries");
  }
  json grid = "default";
  if (args.grid != "default") {
    absl::StatusOr<json> doc = ReadJson(args.grid);
    if (!doc.ok()) return doc.status();
    grid = *std::move(doc);
  }
  absl::StatusOr<DatasetView> data = args.data.Load();
  if (!data.ok()) return data.status();
  eval::SweepOptions options;
  options.seed = args.seed;
  options.threads = args.threads;
  options.output_dir = args.out_dir;
  eval::EvalOptions limit_eval = options.eval;
  limit_eval.classifier.seed = MixSeed(args.seed, 0xc1a55);
  limit_eval.adversary.schedule.seed = MixSeed(args.seed, 0xad5);
  absl::StatusOr<std::vector<eval::ParetoPoint>> limits = eval::LimitPoints(*data, limit_eval);
  if (!limits.ok()) return limits.status();
  std::vector<eval::MinimizerSpec> specs;
  for (const std::string& m : args.minimizers) {
    // A grid file maps minimizer names to parameter lists.
    const json& g = grid.is_object() ? grid.value(m, json("default")) : grid;
    absl::StatusOr<std::vector<eval::MinimizerSpec>> s = Specs(m, g, data->schema(), *limits);
    if (!s.ok()) return s.status();
    specs.insert(specs.end(), s->begin(), s->end());
  }
  const std::vector<eval::ParetoPoint> points = eval::Sweep(specs, *data, options);
  absl::StatusOr<std::vector<std::string>> written = WriteSweep(args.out_dir, *limits, points);
  if (!written.ok()) return written.status();
  std::size_t failed = 0;
  for (const eval::ParetoPoint& p : points) failed += p.failed;
  std::cerr << "swept " << points.size() << " configurations (" << failed << " failed) into "
            << args.out_dir << "\n";
  return absl::OkStatus();
}

// ---------------------------------------------------------------- pareto / report

struct ParetoArgs {
  std::string points;
  std::string out;
};

absl::StatusOr<std::pair<std::vector<eval::ParetoPoint>, std::vector<eval::ParetoPoint>>>
ReadPoints(const std::string& path) {
  absl::StatusOr<json> doc = ReadJson(path);
  if (!doc.ok()) return doc.status();
  absl::StatusOr<std::vector<eval::ParetoPoint>> all = eval::PointsFromJson(*doc);
  if (!all.ok()) return all.status();
  std::vector<eval::ParetoPoint> points, limits;
  for (eval::ParetoPoint& p : *all) (IsLimit(p) ? limits : points).push_back(std::move(p));
  return std::make_pair(std::move(points), std::move(limits));
}

absl::Status RunPareto(const ParetoArgs& args) {
  auto read = ReadPoints(args.points);
  if (!read.ok()) return read.status();
  return WriteText(args.out, Dump(eval::FrontJson(read->first, read->second)));
}

struct ReportArgs {
  DataArgs data;
  std::string generalization;
  std::string points;
  std::string out;
};

std::string PointLine(const eval::ParetoPoint& p) {
  return absl::StrFormat("%-11s %-44s %8.4f %8.4f %8.4f %8.4f %7d\n", p.minimizer,
                         p.params.dump(), p.classifier.val, p.classifier.test,
                         p.adversary.mean_val, p.adversary.mean_test,
                         p.buckets.total_buckets);
}

absl::Status RunReport(const ReportArgs& args) {
  if (!args.points.empty()) {
    auto read = ReadPoints(args.points);
    if (!read.ok()) return read.status();
    std::vector<eval::ParetoPoint> all = read->second;
    all.insert(all.end(), read->first.begin(), read->first.end());
    std::string text = absl::StrFormat("%-11s %-44s %8s %8s %8s %8s %7s\n", "minimizer",
                                       "params", "clf_val", "clf_test", "adv_val",
                                       "adv_test", "buckets");
    for (std::size_t i : eval::ParetoFront(all)) text += PointLine(all[i]);
    for (const eval::ParetoPoint& p : read->second) {
      text += absl::StrCat("limit ", p.minimizer, ": baseline adversary error ",
                           absl::StrFormat("%.4f", p.adversary.mean_baseline_test), "\n");
    }
    return WriteText(args.out, text);
  }
  if (args.generalization.empty()) {
    return absl::InvalidArgumentError("report needs --points or --generalization");
  }
  absl::StatusOr<DatasetView> data = args.data.Load();
  if (!data.ok()) return data.status();
  absl::StatusOr<Generalization> g = LoadGeneralization(args.generalization, data->schema());
  if (!g.ok()) return g.status();
  const eval::BucketReport report = eval::MakeBucketReport(*g, *data);
  json doc = report.ToJson();
  for (json& a : doc["attributes"]) {
    if (a["suppressed"].get<bool>()) a["note"] = "need not be collected";
  }
  return WriteText(args.out, Dump(doc));
}

// ---------------------------------------------------------------- apply

struct ApplyArgs {
  DataArgs data;
  std::string generalization;
  std::string out;
};

absl::Status RunApply(const ApplyArgs& args) {
  absl::StatusOr<DatasetView> data = args.data.Load();
  if (!data.ok()) return data.status();
  absl::StatusOr<Generalization> g = LoadGeneralization(args.generalization, data->schema());
  if (!g.ok()) return g.status();
  absl::StatusOr<DatasetView> z = Apply(*g, *data);
  if (!z.ok()) return z.status();
  if (args.out.empty()) return WriteText("", ToCsv(*z));
  return WriteCsv(*z, args.out);
}

// ---------------------------------------------------------------- run

struct RunConfig {
  fs::path base;
  std::optional<std::string> data;
  std::optional<std::string> schema;
  SynthOptions synth;
  SplitFractions fractions;
  std::uint64_t split_seed = 0;
  std::vector<std::pair<std::string, json>> minimizers;
  std::vector<std::string> adversaries = {"a1"};
  double k_percent = 10.0;
  std::string output_dir;
  int threads = 1;
  std::uint64_t seed = 0;
  int epochs = 20;
  json raw;
};

absl::StatusOr<RunConfig> ParseRunConfig(const std::string& path) {
  if (!fs::exists(path)) return absl::NotFoundError(absl::StrCat("config not found: ", path));
  absl::StatusOr<json> doc = ReadJson(path);
  if (!doc.ok()) return doc.status();
  if (!doc->is_object()) return absl::InvalidArgumentError("config must be a JSON object");
  RunConfig c;
  c.raw = *doc;
  c.base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    return fs::path(p).is_absolute() ? p : (c.base / p).string();
  };
  try {
    const json& d = *doc;
    if (d.contains("data")) c.data = resolve(d["data"].get<std::string>());
    if (d.contains("schema")) c.schema = resolve(d["schema"].get<std::string>());
    if (c.data.has_value() != c.schema.has_value()) {
      return absl::InvalidArgumentError("config needs both 'data' and 'schema', or neither");
    }
    if (c.schema.has_value() && !fs::exists(*c.schema)) {
      return absl::NotFoundError(absl::StrCat("schema not found: ", *c.schema));
    }
    if (c.data.has_value() && !fs::exists(*c.data)) {
      return absl::NotFoundError(absl::StrCat("data not found: ", *c.data));
    }
    if (d.contains("synth")) {
      const json& s = d["synth"];
      c.synth.rows = s.value("rows", c.synth.rows);
      c.synth.attributes = s.value("attributes", c.synth.attributes);
      c.synth.personal = s.value("personal", c.synth.personal);
      c.synth.cardinality = s.value("cardinality", c.synth.cardinality);
      c.synth.correlation = s.value("correlation", c.synth.correlation);
      c.synth.label_noise = s.value("label_noise", c.synth.label_noise);
      c.synth.seed = s.value("seed", c.synth.seed);
    } else if (!c.data.has_value()) {
      return absl::InvalidArgumentError("config needs 'data' and 'schema', or 'synth'");
    }
    if (d.contains("split")) {
      const json& s = d["split"];
      c.fractions = {s.value("train", 0.6), s.value("val", 0.1), s.value("test", 0.3)};
      c.split_seed = s.value("seed", std::uint64_t{0});
    }
    c.synth.fractions = c.fractions;
    if (!d.contains("minimizers") || !d["minimizers"].is_array() || d["minimizers"].empty()) {
      return absl::InvalidArgumentError("config needs a nonempty 'minimizers' list");
    }
    for (const json& m : d["minimizers"]) {
      c.minimizers.emplace_back(m.at("name").get<std::string>(), m.value("grid", json("default")));
    }
    if (d.contains("adversaries")) c.adversaries = d["adversaries"].get<std::vector<std::string>>();
    c.k_percent = d.value("k_percent", c.k_percent);
    if (!d.contains("output_dir")) return absl::InvalidArgumentError("config needs 'output_dir'");
    c.output_dir = resolve(d["output_dir"].get<std::string>());
    c.threads = d.value("threads", 1);
    c.seed = d.value("seed", std::uint64_t{0});
    c.epochs = d.value("epochs", 20);
  } catch (const std::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed config: ", e.what()));
  }
  if (absl::Status st = CheckAdversaries(c.adversaries); !st.ok()) return st;
  if (std::find(c.adversaries.begin(), c.adversaries.end(), "a1") == c.adversaries.end()) {
    return absl::InvalidArgumentError("the front is selected on A1 error; include a1");
  }
  if (c.threads < 1 || c.epochs < 1) {
    return absl::InvalidArgumentError("threads and epochs must be positive");
  }
  return c;
}

// A run-stage failure: the stage name plus its status.
struct StageError {
  std::string stage;
  absl::Status status;
};

std::string HashHex(std::string_view bytes) { return absl::StrFormat("%016x", StableHash(bytes)); }

absl::Status RunPipeline(const RunConfig& c, std::string* stage, json* artifacts) {
  const fs::path out(c.output_dir);

  *stage = "data";
  absl::StatusOr<DatasetView> data;
  if (c.data.has_value()) {
    LoadOptions options;
    options.fractions = c.fractions;
    options.seed = c.split_seed;
    data = LoadCsv(*c.data, *c.schema, options);
  } else {
    data = Synthesize(c.synth);
    if (data.ok()) {
      if (absl::Status st = WriteCsv(*data, (out / "data.csv").string()); !st.ok()) return st;
      if (absl::Status st = data->schema().WriteFile((out / "schema.json").string()); !st.ok()) {
        return st;
      }
    }
  }
  if (!data.ok()) return data.status();

  *stage = "limits";
  eval::SweepOptions options;
  options.seed = c.seed;
  options.threads = c.threads;
  options.output_dir = c.output_dir;
  options.eval.classifier.epochs = c.epochs;
  options.eval.adversary.schedule.epochs = c.epochs;
  eval::EvalOptions limit_eval = options.eval;
  limit_eval.classifier.seed = MixSeed(c.seed, 0xc1a55);
  limit_eval.adversary.schedule.seed = MixSeed(c.seed, 0xad5);
  absl::StatusOr<std::vector<eval::ParetoPoint>> limits = eval::LimitPoints(*data, limit_eval);
  if (!limits.ok()) return limits.status();

  *stage = "sweep";
  std::vector<eval::MinimizerSpec> specs;
  for (const auto& [name, grid] : c.minimizers) {
    absl::StatusOr<std::vector<eval::MinimizerSpec>> s =
        Specs(name, grid, data->schema(), *limits);
    if (!s.ok()) return s.status();
    specs.insert(specs.end(), s->begin(), s->end());
  }
  const std::vector<eval::ParetoPoint> points = eval::Sweep(specs, *data, options);
  absl::StatusOr<std::vector<std::string>> written = WriteSweep(c.output_dir, *limits, points);
  if (!written.ok()) return written.status();

  *stage = "attacks";
  // Extra adversaries run against every generalization on the front.
  std::vector<eval::ParetoPoint> front;
  for (std::size_t i : eval::ParetoFront(points)) front.push_back(points[i]);
  std::vector<std::string> attack_files;
  for (const std::string& a : c.adversaries) {
    if (a == "a1") continue;
    for (std::size_t i = 0; i < front.size(); ++i) {
      AttackArgs args;
      args.adversary = a;
      args.k_percent = c.k_percent;
      args.epochs = c.epochs;
      args.seed = MixSeed(c.seed, 0xa77);
      const Generalization* g = &front[i].g;
      if (a == "a6") {
        // Pairs each front point with the next one.
        if (i + 1 >= front.size()) break;
        args.generalization2 = (out / front[i + 1].generalization_file).string();
      }
      absl::StatusOr<json> report = Attack(args, *data, *g);
      if (!report.ok()) return report.status();
      (*report)["adversary"] = a;
      (*report)["generalization_file"] = front[i].generalization_file;
      const std::string rel = absl::StrCat("attacks/", a, "_",
                                           absl::StrFormat("%016x", front[i].fingerprint), ".json");
      if (absl::Status st = WriteText((out / rel).string(), Dump(*report)); !st.ok()) return st;
      attack_files.push_back(rel);
    }
  }

  *stage = "manifest";
  std::vector<std::string> files = *written;
  files.insert(files.end(), attack_files.begin(), attack_files.end());
  for (const eval::ParetoPoint& p : points) {
    if (!p.generalization_file.empty()) files.push_back(p.generalization_file);
  }
  if (!c.data.has_value()) {
    files.push_back("data.csv");
    files.push_back("schema.json");
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  for (const std::string& f : files) {
    absl::StatusOr<std::string> text = ReadText((out / f).string());
    if (!text.ok()) return text.status();
    (*artifacts)[f] = HashHex(*text);
  }
  return absl::OkStatus();
}

int RunRun(const std::string& config_path) {
  absl::StatusOr<RunConfig> config = ParseRunConfig(config_path);
  if (!config.ok()) return Fail(config.status());
  const fs::path out(config->output_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) return Fail(absl::PermissionDeniedError(absl::StrCat("cannot create ", out.string())));
  fs::remove(out / "FAILED", ec);
  fs::remove(out / "manifest.json", ec);

  std::string stage;
  json artifacts = json::object();
  const absl::Status st = RunPipeline(*config, &stage, &artifacts);
  if (!st.ok()) {
    // Keep whatever was written and mark the run.
    (void)WriteText((out / "FAILED").string(),
                    absl::StrCat("stage: ", stage, "\nerror: ", st.message(), "\n"));
    std::cerr << "vdm: run failed in stage " << stage << "\n";
    return Fail(st);
  }
  json manifest = {{"tool", "vdm"},
                   {"version", kVersion},
                   {"config_hash", HashHex(config->raw.dump())},
                   {"seed", config->seed},
                   {"split_seed", config->split_seed},
                   {"synth_seed", config->data.has_value() ? json(nullptr) : json(config->synth.seed)},
                   {"artifacts", artifacts}};
  const std::string text = Dump(manifest);
  if (absl::Status w = WriteText((out / "manifest.json").string(), text); !w.ok()) return Fail(w);
  std::cout << "manifest " << HashHex(text) << "\n";
  return kExitOk;
}

}  // namespace

int Main(int argc, char** argv) {
  CLI::App app{"vdm: vertical data minimization by generalization"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset and schema");
  synth_cmd->add_option("--rows", synth.options.rows, "Number of rows");
  synth_cmd->add_option("--attributes", synth.options.attributes, "Number of features");
  synth_cmd->add_option("--personal", synth.options.personal, "Number of personal features");
  synth_cmd->add_option("--cardinality", synth.options.cardinality, "Cardinality of discrete features");
  synth_cmd->add_option("--correlation", synth.options.correlation, "P(personal copies its proxy)");
  synth_cmd->add_option("--label-noise", synth.options.label_noise, "Label flip probability");
  synth_cmd->add_option("--seed", synth.options.seed, "Seed");
  synth_cmd->add_option("--train", synth.options.fractions.train, "Train fraction");
  synth_cmd->add_option("--val", synth.options.fractions.val, "Validation fraction");
  synth_cmd->add_option("--test", synth.options.fractions.test, "Test fraction");
  synth_cmd->add_option("--out", synth.out, "Output CSV");
  synth_cmd->add_option("--schema-out", synth.schema_out, "Output schema JSON");

  SplitArgs split;
  CLI::App* split_cmd = app.add_subcommand("split", "Assign train/val/test splits to a CSV");
  split.data.Register(split_cmd);
  split_cmd->add_option("--out", split.out, "Output CSV (stdout when omitted)");

  MinimizeArgs pat_args;
  CLI::App* pat_cmd = app.add_subcommand("pat", "Privacy-aware tree minimizer");
  pat_args.data.Register(pat_cmd);
  pat_cmd->add_option("--alpha", pat_args.alpha, "Privacy weight in [0,1]");
  pat_cmd->add_option("--max-leaves", pat_args.max_leaves, "Maximum number of leaves");
  pat_cmd->add_option("--min-leaf", pat_args.min_leaf, "Minimum samples per leaf");
  pat_cmd->add_option("--tree", pat_args.tree_out, "Also write the tree JSON here");
  pat_cmd->add_option("--out", pat_args.out, "Output generalization JSON");

  MinimizeArgs base_args;
  CLI::App* base_cmd = app.add_subcommand("baseline", "Uniform, feature-selection or iterative minimizer");
  base_args.data.Register(base_cmd);
  base_cmd->add_option("method", base_args.method, "uniform | featsel | iterative")
      ->required()
      ->check(CLI::IsMember({"uniform", "featsel", "iterative"}));
  base_cmd->add_option("--k", base_args.k, "Buckets (uniform), features or 'all' (featsel), k_init (iterative)");
  base_cmd->add_option("--target-error", base_args.target_error, "Iterative target classifier error");
  base_cmd->add_option("--seed", base_args.seed, "Seed");
  base_cmd->add_option("--out", base_args.out, "Output generalization JSON");

  MinimizeArgs neural_args;
  CLI::App* neural_cmd = app.add_subcommand("neural", "Neural minimizers");
  neural_args.data.Register(neural_cmd);
  neural_cmd->add_option("method", neural_args.method, "advtrain | mutualinf")
      ->required()
      ->check(CLI::IsMember({"advtrain", "mutualinf"}));
  neural_cmd->add_option("--lambda", neural_args.lambda, "Privacy weight in [0,1]");
  neural_cmd->add_option("--buckets", neural_args.buckets, "Buckets per attribute");
  neural_cmd->add_option("--epochs", neural_args.epochs, "Training epochs");
  neural_cmd->add_option("--seed", neural_args.seed, "Seed");
  neural_cmd->add_option("--out", neural_args.out, "Output generalization JSON");

  AttackArgs attack;
  CLI::App* attack_cmd = app.add_subcommand("attack", "Run an adversary against a generalization");
  attack.data.Register(attack_cmd);
  attack_cmd->add_option("adversary", attack.adversary, "a1 .. a8")
      ->required()
      ->check(CLI::IsMember({"a1", "a2", "a3", "a4", "a5", "a6", "a7", "a8"}));
  attack_cmd->add_option("--generalization", attack.generalization, "Generalization JSON")->required();
  attack_cmd->add_option("--generalization2", attack.generalization2, "Second release (a6)");
  attack_cmd->add_option("--breach", attack.breach, "Breached raw rows (default: test split of --data)");
  attack_cmd->add_option("--k-percent", attack.k_percent, "Kept share of most confident predictions (a2)");
  attack_cmd->add_option("--side-info", attack.side_info, "Personal attribute order, comma separated (a5)");
  attack_cmd->add_option("--attrs-a", attack.attrs_a, "A-side attributes (a7)");
  attack_cmd->add_option("--attrs-b", attack.attrs_b, "B-side attributes (a7)");
  attack_cmd->add_option("--epochs", attack.epochs, "Adversary training epochs");
  attack_cmd->add_option("--seed", attack.seed, "Seed");
  attack_cmd->add_option("--out", attack.out, "Output report JSON");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Hyperparameter sweep with limit points");
  sweep.data.Register(sweep_cmd);
  sweep_cmd->add_option("--minimizer", sweep.minimizers,
                        "uniform | featsel | pat | iterative | advtrain | mutualinf (repeatable)")
      ->required();
  sweep_cmd->add_option("--grid", sweep.grid, "'default' or a JSON file mapping minimizers to parameter lists");
  sweep_cmd->add_option("--adversaries", sweep.adversaries, "Comma separated; selection uses a1");
  sweep_cmd->add_option("--threads", sweep.threads, "Worker threads");
  sweep_cmd->add_option("--seed", sweep.seed, "Seed");
  sweep_cmd->add_option("--out-dir", sweep.out_dir, "Output directory");

  ParetoArgs pareto;
  CLI::App* pareto_cmd = app.add_subcommand("pareto", "Validation Pareto front of a points.json");
  pareto_cmd->add_option("points", pareto.points, "points.json")->required();
  pareto_cmd->add_option("--out", pareto.out, "Output front JSON");

  ReportArgs report;
  CLI::App* report_cmd = app.add_subcommand("report", "Front table or per-attribute bucket report");
  report.data.Register(report_cmd, false);
  report_cmd->add_option("--points", report.points, "points.json to summarize");
  report_cmd->add_option("--generalization", report.generalization, "Generalization to describe");
  report_cmd->add_option("--out", report.out, "Output file");

  ApplyArgs apply;
  CLI::App* apply_cmd = app.add_subcommand("apply", "Generalize a dataset");
  apply.data.Register(apply_cmd);
  apply_cmd->add_option("--generalization", apply.generalization, "Generalization JSON")->required();
  apply_cmd->add_option("--out", apply.out, "Output CSV (stdout when omitted)");

  std::string run_config;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a full pipeline from a JSON config");
  run_cmd->add_option("config", run_config, "Run configuration JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  absl::Status st;
  if (*synth_cmd) {
    st = RunSynth(synth);
  } else if (*split_cmd) {
    st = RunSplit(split);
  } else if (*pat_cmd) {
    st = RunMinimize("pat", pat_args);
  } else if (*base_cmd) {
    st = RunMinimize("baseline", base_args);
  } else if (*neural_cmd) {
    st = RunMinimize("neural", neural_args);
  } else if (*attack_cmd) {
    st = RunAttack(attack);
  } else if (*sweep_cmd) {
    st = RunSweep(sweep);
  } else if (*pareto_cmd) {
    st = RunPareto(pareto);
  } else if (*report_cmd) {
    st = RunReport(report);
  } else if (*apply_cmd) {
    st = RunApply(apply);
  } else if (*run_cmd) {
    return RunRun(run_config);
  }
  return st.ok() ? kExitOk : Fail(st);
}

}  // namespace vdm::cli

int main(int argc, char** argv) { return vdm::cli::Main(argc, argv); }
