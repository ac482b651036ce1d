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

#include "vdm/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "absl/strings/str_cat.h"
#include "vdm/random.h"

namespace vdm {
namespace {

using nlohmann::json;

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void HashBytes(std::uint64_t& h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  h ^= 0xff;
  h *= kFnvPrime;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// RFC-4180 records: quoted fields may contain separators, doubled quotes and
// line breaks.
absl::StatusOr<std::vector<std::vector<std::string>>> ParseRecords(
    std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started || !field.empty()) {
          return absl::InvalidArgumentError(
              absl::StrCat("stray quote on line ", line));
        }
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) return absl::InvalidArgumentError("unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> ParseNumber(std::string_view s) {
  s = Trim(s);
  if (s.empty()) return std::nullopt;
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(out)) {
    return std::nullopt;
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string QuoteField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "train";
}

std::optional<Split> ParseSplit(std::string_view name) {
  name = Trim(name);
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

absl::StatusOr<Schema> Schema::Create(std::vector<AttributeSchema> attributes) {
  Schema schema;
  std::unordered_map<std::string, int> seen;
  for (std::size_t i = 0; i < attributes.size(); ++i) {
    const AttributeSchema& a = attributes[i];
    if (a.name.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("attribute ", i, " has an empty name"));
    }
    if (a.name == "split") {
      return absl::InvalidArgumentError("attribute name 'split' is reserved");
    }
    if (!seen.emplace(a.name, static_cast<int>(i)).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate attribute ", a.name));
    }
    if (a.is_discrete()) {
      if (a.cardinality < 1) {
        return absl::InvalidArgumentError(
            absl::StrCat("discrete attribute ", a.name,
                         " needs a positive cardinality"));
      }
      if (!a.labels.empty() &&
          a.labels.size() != static_cast<std::size_t>(a.cardinality)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "attribute ", a.name, " lists ", a.labels.size(),
            " labels for cardinality ", a.cardinality));
      }
    }
    if (a.is_target()) {
      if (schema.target_ >= 0) {
        return absl::InvalidArgumentError("more than one target attribute");
      }
      if (!a.is_discrete()) {
        return absl::InvalidArgumentError(
            absl::StrCat("target ", a.name, " must be discrete"));
      }
      if (a.personal) {
        return absl::InvalidArgumentError(
            absl::StrCat("target ", a.name, " cannot be personal"));
      }
      schema.target_ = static_cast<int>(i);
    } else {
      schema.features_.push_back(static_cast<int>(i));
      (a.personal ? schema.personal_ : schema.non_personal_)
          .push_back(static_cast<int>(i));
    }
  }
  if (schema.target_ < 0) {
    return absl::InvalidArgumentError("schema has no target attribute");
  }
  schema.attributes_ = std::move(attributes);
  return schema;
}

absl::StatusOr<Schema> Schema::FromJson(const json& doc) {
  const json* list = &doc;
  if (doc.is_object() && doc.contains("attributes")) list = &doc["attributes"];
  if (!list->is_array()) {
    return absl::InvalidArgumentError("schema must be a JSON array");
  }
  std::vector<AttributeSchema> attributes;
  for (const json& item : *list) {
    if (!item.is_object() || !item.contains("name") || !item.contains("kind")) {
      return absl::InvalidArgumentError(
          "schema entries need at least 'name' and 'kind'");
    }
    AttributeSchema a;
    try {
      a.name = item.at("name").get<std::string>();
      const std::string kind = item.at("kind").get<std::string>();
      if (kind == "continuous") {
        a.kind = AttributeKind::kContinuous;
      } else if (kind == "discrete") {
        a.kind = AttributeKind::kDiscrete;
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("attribute ", a.name, ": unknown kind ", kind));
      }
      a.cardinality = item.value("cardinality", 0);
      a.personal = item.value("personal", false);
      const std::string role = item.value("role", std::string("feature"));
      if (role == "target") {
        a.role = AttributeRole::kTarget;
      } else if (role == "feature") {
        a.role = AttributeRole::kFeature;
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("attribute ", a.name, ": unknown role ", role));
      }
      if (item.contains("labels")) {
        for (const json& l : item["labels"]) {
          a.labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
        }
        if (a.cardinality == 0) a.cardinality = static_cast<int>(a.labels.size());
      }
    } catch (const json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed schema entry: ", e.what()));
    }
    attributes.push_back(std::move(a));
  }
  return Create(std::move(attributes));
}

absl::StatusOr<Schema> Schema::FromFile(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  json doc = json::parse(*text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": invalid JSON"));
  }
  return FromJson(doc);
}

json Schema::ToJson() const {
  json out = json::array();
  for (const AttributeSchema& a : attributes_) {
    json item = {{"name", a.name},
                 {"kind", a.is_discrete() ? "discrete" : "continuous"},
                 {"personal", a.personal},
                 {"role", a.is_target() ? "target" : "feature"}};
    if (a.is_discrete()) item["cardinality"] = a.cardinality;
    if (!a.labels.empty()) item["labels"] = a.labels;
    out.push_back(std::move(item));
  }
  return out;
}

absl::Status Schema::WriteFile(const std::string& path) const {
  std::ofstream out(path);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out << ToJson().dump(2) << "\n";
  return absl::OkStatus();
}

int Schema::Find(std::string_view name) const {
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    if (attributes_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::uint64_t Schema::Fingerprint() const {
  std::uint64_t h = kFnvOffset;
  for (const AttributeSchema& a : attributes_) {
    HashBytes(h, a.name);
    HashBytes(h, a.is_discrete() ? "d" : "c");
    HashBytes(h, std::to_string(a.cardinality));
    HashBytes(h, a.personal ? "p" : "n");
    HashBytes(h, a.is_target() ? "t" : "f");
  }
  return h;
}

std::string Schema::FingerprintHex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fingerprint()));
  return buf;
}

double Normalization::Apply(double raw) const {
  if (max <= min) return 0.0;
  return std::clamp((raw - min) / (max - min), 0.0, 1.0);
}

double Normalization::Invert(double normalized) const {
  if (max <= min) return min;
  return min + normalized * (max - min);
}

DatasetView::DatasetView(Schema schema, std::vector<double> values,
                         std::vector<Split> splits, std::uint64_t seed,
                         std::vector<Normalization> normalization)
    : schema_(std::move(schema)),
      values_(std::move(values)),
      splits_(std::move(splits)),
      seed_(seed),
      normalization_(std::move(normalization)) {
  if (normalization_.empty()) normalization_.resize(schema_.size());
}

std::vector<std::size_t> DatasetView::RowsIn(Split split) const {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < splits_.size(); ++r) {
    if (splits_[r] == split) rows.push_back(r);
  }
  return rows;
}

DatasetView DatasetView::Part(Split split) const {
  const std::vector<std::size_t> rows = RowsIn(split);
  return Subset(rows);
}

DatasetView DatasetView::Subset(std::span<const std::size_t> rows) const {
  const std::size_t d = schema_.size();
  std::vector<double> values;
  values.reserve(rows.size() * d);
  std::vector<Split> splits;
  splits.reserve(rows.size());
  for (std::size_t r : rows) {
    const std::span<const double> src = row(r);
    values.insert(values.end(), src.begin(), src.end());
    splits.push_back(splits_[r]);
  }
  return DatasetView(schema_, std::move(values), std::move(splits), seed_,
                     normalization_);
}

DatasetView DatasetView::WithSplits(std::vector<Split> splits,
                                    std::uint64_t seed) const {
  return DatasetView(schema_, values_, std::move(splits), seed, normalization_);
}

absl::StatusOr<DatasetView> SplitView(const DatasetView& view,
                                      const SplitFractions& fractions,
                                      std::uint64_t seed) {
  const double total = fractions.train + fractions.val + fractions.test;
  if (fractions.train < 0 || fractions.val < 0 || fractions.test < 0 ||
      std::abs(total - 1.0) > 1e-9) {
    return absl::InvalidArgumentError("split fractions must be >= 0 and sum to 1");
  }
  const Schema& schema = view.schema();
  const std::size_t n = view.num_rows();
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (!schema[a].is_discrete()) continue;
    std::vector<int> counts(schema[a].cardinality + 1, 0);
    for (std::size_t r = 0; r < n; ++r) ++counts[view.index(r, a)];
    for (int v = 1; v <= schema[a].cardinality; ++v) {
      if (counts[v] == 0) {
        return absl::FailedPreconditionError(absl::StrCat(
            "class coverage infeasible: attribute ", schema[a].name,
            " value ", v, " never occurs"));
      }
    }
  }

  Rng rng(seed);
  std::vector<std::size_t> order(n);
  for (std::size_t r = 0; r < n; ++r) order[r] = r;
  rng.Shuffle(std::span<std::size_t>(order));

  std::vector<std::vector<bool>> covered(schema.size());
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (schema[a].is_discrete()) covered[a].assign(schema[a].cardinality + 1, false);
  }
  std::vector<Split> splits(n, Split::kTest);
  std::vector<bool> assigned(n, false);
  std::size_t forced = 0;
  for (std::size_t r : order) {
    bool needed = false;
    for (std::size_t a = 0; a < schema.size(); ++a) {
      if (schema[a].is_discrete() && !covered[a][view.index(r, a)]) needed = true;
    }
    if (!needed) continue;
    for (std::size_t a = 0; a < schema.size(); ++a) {
      if (schema[a].is_discrete()) covered[a][view.index(r, a)] = true;
    }
    splits[r] = Split::kTrain;
    assigned[r] = true;
    ++forced;
  }

  const auto n_train = std::max<std::size_t>(
      forced, static_cast<std::size_t>(std::llround(fractions.train * n)));
  const auto n_val = std::min<std::size_t>(
      n - n_train, static_cast<std::size_t>(std::llround(fractions.val * n)));
  std::size_t train = forced;
  std::size_t val = 0;
  for (std::size_t r : order) {
    if (assigned[r]) continue;
    if (train < n_train) {
      splits[r] = Split::kTrain;
      ++train;
    } else if (val < n_val) {
      splits[r] = Split::kVal;
      ++val;
    } else {
      splits[r] = Split::kTest;
    }
  }
  return view.WithSplits(std::move(splits), seed);
}

absl::StatusOr<DatasetView> ParseCsv(std::string_view text,
                                     const Schema& schema,
                                     const LoadOptions& options) {
  absl::StatusOr<std::vector<std::vector<std::string>>> records =
      ParseRecords(text);
  if (!records.ok()) return records.status();
  if (records->empty()) return absl::InvalidArgumentError("CSV has no header row");

  const std::vector<std::string>& header = records->front();
  std::vector<int> column_of(schema.size(), -1);
  int split_column = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(Trim(header[c]));
    if (name == "split") {
      split_column = static_cast<int>(c);
      continue;
    }
    const int a = schema.Find(name);
    if (a < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown column '", name, "' (col ", c + 1, ")"));
    }
    if (column_of[a] >= 0) {
      return absl::InvalidArgumentError(absl::StrCat("duplicate column ", name));
    }
    column_of[a] = static_cast<int>(c);
  }
  for (std::size_t a = 0; a < schema.size(); ++a) {
    if (column_of[a] < 0) {
      return absl::InvalidArgumentError(
          absl::StrCat(schema[a].is_target() ? "missing target column '"
                                             : "missing column '",
                       schema[a].name, "'"));
    }
  }

  const std::size_t n = records->size() - 1;
  const std::size_t d = schema.size();
  std::vector<double> values(n * d);
  std::vector<Split> splits(n, Split::kTrain);
  std::vector<std::unordered_map<std::string, int>> label_index(d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t i = 0; i < schema[a].labels.size(); ++i) {
      label_index[a].emplace(schema[a].labels[i], static_cast<int>(i) + 1);
    }
  }

  for (std::size_t r = 0; r < n; ++r) {
    const std::vector<std::string>& rec = (*records)[r + 1];
    const std::size_t row_no = r + 1;
    if (rec.size() != header.size()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "row ", row_no, " has ", rec.size(), " fields, expected ",
          header.size()));
    }
    for (std::size_t a = 0; a < d; ++a) {
      const AttributeSchema& attr = schema[a];
      const std::string_view field = Trim(rec[column_of[a]]);
      if (field.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "missing value row ", row_no, " col ", attr.name));
      }
      if (attr.is_discrete()) {
        int index = 0;
        if (!label_index[a].empty()) {
          auto it = label_index[a].find(std::string(field));
          if (it == label_index[a].end()) {
            return absl::InvalidArgumentError(absl::StrCat(
                "value out of range row ", row_no, " col ", attr.name,
                ": unknown label '", std::string(field), "'"));
          }
          index = it->second;
        } else {
          const std::optional<double> v = ParseNumber(field);
          if (!v || *v != std::floor(*v)) {
            return absl::InvalidArgumentError(absl::StrCat(
                "non-integer discrete value row ", row_no, " col ", attr.name));
          }
          if (*v < 1 || *v > attr.cardinality) {
            return absl::InvalidArgumentError(absl::StrCat(
                "value out of range row ", row_no, " col ", attr.name));
          }
          index = static_cast<int>(*v);
        }
        values[r * d + a] = index;
      } else {
        const std::optional<double> v = ParseNumber(field);
        if (!v) {
          return absl::InvalidArgumentError(absl::StrCat(
              "non-numeric value row ", row_no, " col ", attr.name));
        }
        values[r * d + a] = *v;
      }
    }
    if (split_column >= 0) {
      const std::optional<Split> s = ParseSplit(rec[split_column]);
      if (!s) {
        return absl::InvalidArgumentError(
            absl::StrCat("invalid split tag row ", row_no));
      }
      splits[r] = *s;
    }
  }

  DatasetView raw(schema, std::move(values), std::move(splits), options.seed);
  if (split_column < 0) {
    absl::StatusOr<DatasetView> split =
        SplitView(raw, options.fractions, options.seed);
    if (!split.ok()) return split.status();
    raw = *std::move(split);
  }

  std::vector<Normalization> norm(d);
  if (options.normalization) {
    if (options.normalization->size() != d) {
      return absl::InvalidArgumentError("normalization size mismatch");
    }
    norm = *options.normalization;
  } else {
    const std::vector<std::size_t> train = raw.RowsIn(Split::kTrain);
    for (std::size_t a = 0; a < d; ++a) {
      if (schema[a].is_discrete() || train.empty()) continue;
      double lo = raw.value(train.front(), a);
      double hi = lo;
      for (std::size_t r : train) {
        lo = std::min(lo, raw.value(r, a));
        hi = std::max(hi, raw.value(r, a));
      }
      norm[a] = {lo, hi};
    }
  }
  std::vector<double> normalized = raw.values();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t a = 0; a < d; ++a) {
      if (!schema[a].is_discrete()) {
        normalized[r * d + a] = norm[a].Apply(normalized[r * d + a]);
      }
    }
  }
  return DatasetView(schema, std::move(normalized), raw.splits(), raw.seed(),
                     std::move(norm));
}

absl::StatusOr<DatasetView> LoadCsv(const std::string& path,
                                    const Schema& schema,
                                    const LoadOptions& options) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  absl::StatusOr<DatasetView> view = ParseCsv(*text, schema, options);
  if (!view.ok()) {
    return absl::Status(view.status().code(),
                        absl::StrCat(path, ": ", view.status().message()));
  }
  return view;
}

absl::StatusOr<DatasetView> LoadCsv(const std::string& path,
                                    const std::string& schema_path,
                                    const LoadOptions& options) {
  absl::StatusOr<Schema> schema = Schema::FromFile(schema_path);
  if (!schema.ok()) return schema.status();
  return LoadCsv(path, *schema, options);
}

std::string ToCsv(const DatasetView& view) {
  const Schema& schema = view.schema();
  std::string out;
  for (std::size_t a = 0; a < schema.size(); ++a) {
    out += QuoteField(schema[a].name);
    out += ',';
  }
  out += "split\n";
  for (std::size_t r = 0; r < view.num_rows(); ++r) {
    for (std::size_t a = 0; a < schema.size(); ++a) {
      const AttributeSchema& attr = schema[a];
      if (attr.is_discrete()) {
        const int index = view.index(r, a);
        out += attr.labels.empty() ? std::to_string(index)
                                   : QuoteField(attr.labels[index - 1]);
      } else {
        out += FormatDouble(view.normalization()[a].Invert(view.value(r, a)));
      }
      out += ',';
    }
    out += SplitName(view.split(r));
    out += '\n';
  }
  return out;
}

absl::Status WriteCsv(const DatasetView& view, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out << ToCsv(view);
  return out ? absl::OkStatus()
             : absl::DataLossError(absl::StrCat("short write to ", path));
}

std::size_t OneHotWidth(const Schema& schema, std::span<const int> attributes) {
  std::size_t width = 0;
  for (int a : attributes) {
    width += schema[a].is_discrete() ? schema[a].cardinality : 1;
  }
  return width;
}

std::vector<double> EncodeOneHot(const DatasetView& view,
                                 std::span<const std::size_t> rows,
                                 std::span<const int> attributes) {
  const Schema& schema = view.schema();
  const std::size_t width = OneHotWidth(schema, attributes);
  std::vector<double> out(rows.size() * width, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double* dst = out.data() + i * width;
    std::size_t offset = 0;
    for (int a : attributes) {
      if (schema[a].is_discrete()) {
        dst[offset + view.index(rows[i], a) - 1] = 1.0;
        offset += schema[a].cardinality;
      } else {
        dst[offset++] = view.value(rows[i], a);
      }
    }
  }
  return out;
}

std::vector<double> EncodeOneHot(const DatasetView& view) {
  const std::vector<std::size_t> rows = AllRows(view);
  return EncodeOneHot(view, rows, view.schema().features());
}

std::vector<std::size_t> AllRows(const DatasetView& view) {
  std::vector<std::size_t> rows(view.num_rows());
  for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  return rows;
}

int ReferenceCardinality(const AttributeSchema& attribute) {
  return attribute.is_discrete() ? attribute.cardinality : kContinuousReferenceBins;
}

std::uint64_t StableHash(std::string_view bytes) {
  std::uint64_t h = kFnvOffset;
  HashBytes(h, bytes);
  return h;
}

std::string QuoteCsvField(const std::string& field) { return QuoteField(field); }

int ReferenceClass(const AttributeSchema& attribute, double value) {
  if (attribute.is_discrete()) return static_cast<int>(value) - 1;
  const int bin = static_cast<int>(std::floor(value * kContinuousReferenceBins));
  return std::clamp(bin, 0, kContinuousReferenceBins - 1);
}

}  // namespace vdm
