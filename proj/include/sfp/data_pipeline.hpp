#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfp/errors.hpp"
#include "sfp/losses.hpp"
#include "sfp/model.hpp"
#include "sfp/random.hpp"

namespace sfp {

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

enum class ColumnType { numeric, categorical };

struct RawColumn {
  std::string name;
  ColumnType type = ColumnType::numeric;
  std::vector<std::string> text;  // raw cell tokens
  std::vector<double> numbers;    // parsed values for numeric columns, NaN where missing
  std::vector<bool> missing;

  std::size_t size() const { return text.size(); }
  std::size_t missing_count() const { return std::count(missing.begin(), missing.end(), true); }
};

struct RawTable {
  std::vector<RawColumn> features;
  std::optional<RawColumn> label;

  std::size_t rows() const {
    if (!features.empty()) return features.front().size();
    return label ? label->size() : 0;
  }

  RawTable subset(std::span<const std::size_t> rows) const {
    auto pick = [&](const RawColumn& c) {
      RawColumn out{c.name, c.type, {}, {}, {}};
      for (std::size_t r : rows) {
        out.text.push_back(c.text[r]);
        if (c.type == ColumnType::numeric) out.numbers.push_back(c.numbers[r]);
        out.missing.push_back(c.missing[r]);
      }
      return out;
    };
    RawTable t;
    for (const auto& c : features) t.features.push_back(pick(c));
    if (label) t.label = pick(*label);
    return t;
  }
};

/// Column-name -> forced type.
using SchemaHints = std::map<std::string, ColumnType>;

inline bool is_missing_token(std::string_view s) { return s.empty() || s == "?" || s == "NA"; }

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

namespace detail {

/// RFC-4180 records: quoted fields, doubled quotes, CRLF or LF line ends.
inline std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false, field_started = false;
  std::size_t line = 1;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    // skip blank lines
    if (!(record.size() == 1 && record[0].empty() && !field_started)) records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw SchemaError("unterminated quoted field near line " + std::to_string(line));
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

inline void finalize_column(RawColumn& col, const SchemaHints& hints) {
  col.missing.resize(col.text.size());
  bool numeric = true;
  for (std::size_t r = 0; r < col.text.size(); ++r) {
    col.missing[r] = is_missing_token(trim(col.text[r]));
    if (!col.missing[r] && !parse_number(col.text[r])) numeric = false;
  }
  if (auto it = hints.find(col.name); it != hints.end()) {
    if (it->second == ColumnType::numeric && !numeric)
      throw SchemaError("column '" + col.name + "' forced numeric but holds non-numeric values");
    numeric = it->second == ColumnType::numeric;
  }
  col.type = numeric ? ColumnType::numeric : ColumnType::categorical;
  if (numeric) {
    col.numbers.resize(col.text.size());
    for (std::size_t r = 0; r < col.text.size(); ++r)
      col.numbers[r] = col.missing[r] ? std::numeric_limits<double>::quiet_NaN() : *parse_number(col.text[r]);
  } else {
    for (auto& t : col.text) t = std::string(trim(t));
  }
}

}  // namespace detail

/// Parses CSV text with a header row. Any non-numeric token makes a column
/// categorical. An empty `label_column` means the table is unlabeled.
inline RawTable parse_csv(std::string_view text, const std::string& label_column,
                          const SchemaHints& hints = {}) {
  auto records = detail::parse_csv_records(text);
  if (records.empty()) throw SchemaError("CSV has no header row");
  std::vector<std::string> header = std::move(records.front());
  for (auto& h : header) h = std::string(trim(h));
  if (records.size() == 1) throw SchemaError("no data rows");

  std::vector<RawColumn> cols(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) cols[c].name = header[c];
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size())
      throw SchemaError("row " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                        " fields, expected " + std::to_string(header.size()));
    for (std::size_t c = 0; c < header.size(); ++c) cols[c].text.push_back(std::move(records[r][c]));
  }

  RawTable table;
  bool found_label = label_column.empty();
  for (auto& col : cols) {
    detail::finalize_column(col, hints);
    if (!label_column.empty() && col.name == label_column) {
      table.label = std::move(col);
      found_label = true;
    } else {
      table.features.push_back(std::move(col));
    }
  }
  if (!found_label) throw SchemaError("label column '" + label_column + "' not found in header");
  if (table.features.empty()) throw SchemaError("no feature columns");
  return table;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

inline RawTable load_csv(const std::string& path, const std::string& label_column,
                         const SchemaHints& hints = {}) {
  try {
    return parse_csv(read_text_file(path), label_column, hints);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// ---------------------------------------------------------------------------
// Label encoding
// ---------------------------------------------------------------------------

/// Ordered label levels. Integer labels starting at 1 give the dense range
/// 1..max so class numbering survives subsetting; otherwise distinct values
/// sorted numerically when all are numbers, lexicographically if not.
inline std::vector<std::string> label_levels(const RawColumn& label) {
  std::vector<std::string> distinct;
  bool all_numeric = true, positive_ints = true;
  double top = 0.0;
  for (std::size_t r = 0; r < label.size(); ++r) {
    if (label.missing[r]) continue;
    const std::string t(trim(label.text[r]));
    if (std::find(distinct.begin(), distinct.end(), t) == distinct.end()) distinct.push_back(t);
    auto v = parse_number(t);
    if (!v) {
      all_numeric = positive_ints = false;
      continue;
    }
    if (!(*v >= 1.0 && *v == std::floor(*v) && *v <= 100000.0 &&
          format_double(*v) == t))
      positive_ints = false;
    else
      top = std::max(top, *v);
  }
  if (all_numeric && positive_ints && !distinct.empty()) {
    std::vector<std::string> dense;
    for (int m = 1; m <= static_cast<int>(top); ++m) dense.push_back(std::to_string(m));
    return dense;
  }
  if (all_numeric) {
    std::sort(distinct.begin(), distinct.end(),
              [](const std::string& a, const std::string& b) { return *parse_number(a) < *parse_number(b); });
  } else {
    std::sort(distinct.begin(), distinct.end());
  }
  return distinct;
}

namespace detail {

inline std::vector<double> encode_labels(const RawColumn& label, LossKind kind,
                                         const std::vector<std::string>& levels) {
  std::vector<double> out(label.size());
  for (std::size_t r = 0; r < label.size(); ++r) {
    if (label.missing[r]) throw SchemaError("missing label in data row " + std::to_string(r + 2));
    const std::string t(trim(label.text[r]));
    if (kind == LossKind::squared_error) {
      auto v = parse_number(t);
      if (!v) throw SchemaError("non-numeric regression label '" + t + "' in data row " + std::to_string(r + 2));
      out[r] = *v;
      continue;
    }
    auto it = std::find(levels.begin(), levels.end(), t);
    if (it == levels.end())
      throw SchemaError("label '" + t + "' in data row " + std::to_string(r + 2) + " was not seen in training");
    const auto idx = static_cast<double>(it - levels.begin());
    out[r] = kind == LossKind::logistic ? (idx == 0 ? -1.0 : 1.0) : idx;
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Preprocessing: impute, one-hot, standardize
// ---------------------------------------------------------------------------

struct PreprocessStats {
  struct Input {
    std::string name;
    ColumnType type = ColumnType::numeric;
    double median = 0.0;              // numeric imputation value
    std::string mode;                 // categorical imputation value
    std::vector<std::string> levels;  // categorical dictionary, sorted
  };
  struct Output {
    std::string name;
    std::size_t source = 0;  // index into inputs
    int level = -1;          // indicator level, -1 for numeric
    double mean = 0.0;
    double sd = 1.0;
  };

  std::vector<Input> inputs;
  std::vector<Output> outputs;
  std::vector<std::string> dropped;  // constant output columns
  LossKind target = LossKind::logloss;
  std::vector<std::string> label_levels;
  std::vector<std::string> warnings;

  std::vector<std::string> feature_names() const {
    std::vector<std::string> names;
    for (const auto& o : outputs) names.push_back(o.name);
    return names;
  }

  int classes() const {
    return target == LossKind::logloss ? static_cast<int>(label_levels.size()) : 0;
  }

  /// Text of an encoded label.
  std::string label_text(double y) const {
    switch (target) {
      case LossKind::logloss: return label_levels.at(static_cast<std::size_t>(y));
      case LossKind::logistic: return label_levels.at(y > 0 ? 1 : 0);
      case LossKind::squared_error: return format_double(y);
    }
    return {};
  }
};

/// Sample median of the non-missing entries.
inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Applies stored statistics. Unseen categorical levels encode as all-zero indicators.
inline Dataset apply_preprocess(const RawTable& raw, const PreprocessStats& stats) {
  if (raw.features.size() != stats.inputs.size())
    throw SchemaError("table has " + std::to_string(raw.features.size()) + " feature columns, expected " +
                      std::to_string(stats.inputs.size()));
  for (std::size_t c = 0; c < raw.features.size(); ++c)
    if (raw.features[c].name != stats.inputs[c].name)
      throw SchemaError("feature column " + std::to_string(c + 1) + " is '" + raw.features[c].name +
                        "', expected '" + stats.inputs[c].name + "'");

  const std::size_t n = raw.rows();
  Dataset ds;
  ds.features = Matrix(n, stats.outputs.size());
  ds.classes = stats.classes();
  for (std::size_t o = 0; o < stats.outputs.size(); ++o) {
    const auto& out = stats.outputs[o];
    const auto& in = stats.inputs[out.source];
    const auto& col = raw.features[out.source];
    for (std::size_t r = 0; r < n; ++r) {
      double v;
      if (out.level < 0) {
        if (col.type != ColumnType::numeric)
          throw SchemaError("column '" + col.name + "' is categorical here but numeric in training");
        v = col.missing[r] ? in.median : col.numbers[r];
      } else {
        const std::string& t = col.missing[r] ? in.mode : col.text[r];
        v = t == in.levels[out.level] ? 1.0 : 0.0;
      }
      ds.features(r, o) = (v - out.mean) / out.sd;
    }
  }
  if (raw.label) ds.labels = detail::encode_labels(*raw.label, stats.target, stats.label_levels);
  return ds;
}

/// Computes imputation, encoding and standardization statistics from `raw`
/// and applies them.
inline std::pair<Dataset, PreprocessStats> preprocess(const RawTable& raw, LossKind target) {
  PreprocessStats stats;
  stats.target = target;
  const std::size_t n = raw.rows();
  if (n == 0) throw SchemaError("no data rows");

  // Pre-standardization values of every candidate output column.
  std::vector<PreprocessStats::Output> candidates;
  std::vector<std::vector<double>> values;
  for (std::size_t c = 0; c < raw.features.size(); ++c) {
    const auto& col = raw.features[c];
    PreprocessStats::Input in;
    in.name = col.name;
    in.type = col.type;
    if (col.type == ColumnType::numeric) {
      std::vector<double> seen;
      for (std::size_t r = 0; r < n; ++r)
        if (!col.missing[r]) seen.push_back(col.numbers[r]);
      in.median = seen.empty() ? 0.0 : median_of(seen);
      std::vector<double> v(n);
      for (std::size_t r = 0; r < n; ++r) v[r] = col.missing[r] ? in.median : col.numbers[r];
      candidates.push_back({col.name, c, -1, 0.0, 1.0});
      values.push_back(std::move(v));
    } else {
      std::map<std::string, std::size_t> counts;
      for (std::size_t r = 0; r < n; ++r)
        if (!col.missing[r]) ++counts[col.text[r]];
      std::size_t best = 0;
      for (const auto& [level, count] : counts) {
        in.levels.push_back(level);
        if (count > best) {
          best = count;
          in.mode = level;
        }
      }
      if (in.levels.empty()) in.levels.push_back("");
      for (std::size_t l = 0; l < in.levels.size(); ++l) {
        std::vector<double> v(n);
        for (std::size_t r = 0; r < n; ++r)
          v[r] = (col.missing[r] ? in.mode : col.text[r]) == in.levels[l] ? 1.0 : 0.0;
        candidates.push_back({col.name + "=" + in.levels[l], c, static_cast<int>(l), 0.0, 1.0});
        values.push_back(std::move(v));
      }
    }
    stats.inputs.push_back(std::move(in));
  }

  for (std::size_t o = 0; o < candidates.size(); ++o) {
    const auto& v = values[o];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      stats.dropped.push_back(candidates[o].name);
      stats.warnings.push_back("dropping constant column '" + candidates[o].name + "'");
      continue;
    }
    candidates[o].mean = mean;
    candidates[o].sd = sd;
    stats.outputs.push_back(candidates[o]);
  }
  if (stats.outputs.empty()) throw SchemaError("every feature column is constant");

  if (raw.label && target != LossKind::squared_error) {
    stats.label_levels = label_levels(*raw.label);
    if (target == LossKind::logistic && stats.label_levels.size() != 2)
      throw SchemaError("logistic loss needs exactly two label values, found " +
                        std::to_string(stats.label_levels.size()));
    if (target == LossKind::logloss && stats.label_levels.size() < 2)
      throw SchemaError("classification needs at least two label values");
  }
  Dataset ds = apply_preprocess(raw, stats);
  return {std::move(ds), std::move(stats)};
}

/// Transform with previously computed statistics (e.g. a test fold).
inline std::pair<Dataset, PreprocessStats> preprocess(const RawTable& raw, const PreprocessStats& stats) {
  return {apply_preprocess(raw, stats), stats};
}

/// Numeric table -> Dataset without imputation or scaling.
inline Dataset to_dataset(const RawTable& raw, LossKind target) {
  Dataset ds;
  const std::size_t n = raw.rows();
  ds.features = Matrix(n, raw.features.size());
  for (std::size_t c = 0; c < raw.features.size(); ++c) {
    const auto& col = raw.features[c];
    if (col.type != ColumnType::numeric) throw SchemaError("column '" + col.name + "' is not numeric");
    for (std::size_t r = 0; r < n; ++r) {
      if (col.missing[r]) throw SchemaError("missing value in column '" + col.name + "'");
      ds.features(r, c) = col.numbers[r];
    }
  }
  if (raw.label) {
    std::vector<std::string> levels;
    if (target != LossKind::squared_error) levels = label_levels(*raw.label);
    ds.labels = detail::encode_labels(*raw.label, target, levels);
    ds.classes = target == LossKind::logloss ? static_cast<int>(levels.size()) : 0;
  }
  return ds;
}

/// Label text as written to CSV: classes 1..M, -1/1, or the number itself.
inline std::string label_to_text(double y, LossKind kind) {
  if (kind == LossKind::logloss) return std::to_string(static_cast<long long>(y) + 1);
  if (kind == LossKind::logistic) return y > 0 ? "1" : "-1";
  return format_double(y);
}

/// Numeric table view of a Dataset (columns x1..xp, label column "y").
inline RawTable to_table(const Dataset& ds, LossKind kind) {
  RawTable t;
  for (std::size_t c = 0; c < ds.dims(); ++c) {
    RawColumn col;
    col.name = "x" + std::to_string(c + 1);
    col.type = ColumnType::numeric;
    for (std::size_t r = 0; r < ds.size(); ++r) {
      col.numbers.push_back(ds.features(r, c));
      col.text.push_back(format_double(ds.features(r, c)));
      col.missing.push_back(false);
    }
    t.features.push_back(std::move(col));
  }
  if (ds.has_labels()) {
    RawColumn y;
    y.name = "y";
    y.type = kind == LossKind::squared_error ? ColumnType::numeric : ColumnType::categorical;
    for (double v : ds.labels) {
      y.text.push_back(label_to_text(v, kind));
      y.numbers.push_back(v);
      y.missing.push_back(false);
    }
    t.label = std::move(y);
  }
  return t;
}

inline void write_csv(std::ostream& out, const Dataset& ds, LossKind kind,
                      const std::string& label_name = "y") {
  for (std::size_t c = 0; c < ds.dims(); ++c) out << (c ? "," : "") << "x" << c + 1;
  if (ds.has_labels()) out << "," << csv_escape(label_name);
  out << "\n";
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t c = 0; c < ds.dims(); ++c) out << (c ? "," : "") << format_double(ds.features(r, c));
    if (ds.has_labels()) out << "," << label_to_text(ds.labels[r], kind);
    out << "\n";
  }
}

inline void write_csv(const std::string& path, const Dataset& ds, LossKind kind,
                      const std::string& label_name = "y") {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_csv(out, ds, kind, label_name);
  if (!out) throw IoError("error writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

enum class SyntheticKind { spiral, two_circle, xor_pattern, mixture3 };

inline SyntheticKind synthetic_kind_from_string(std::string_view s) {
  if (s == "spiral") return SyntheticKind::spiral;
  if (s == "two_circle" || s == "two-circle") return SyntheticKind::two_circle;
  if (s == "xor") return SyntheticKind::xor_pattern;
  if (s == "mixture3") return SyntheticKind::mixture3;
  throw DomainError("unknown synthetic dataset '" + std::string(s) + "'");
}

/// Two-dimensional labeled datasets; labels are 0-based class indices.
///
/// spiral: two interleaved Archimedean arms (n/2 each) over 3*pi radians,
///   radius theta/pi, radial noise sd 0.05.
/// two_circle: radii 1 and 2, radial noise sd 0.1.
/// xor: uniform on [-1,1]^2, class by sign(x1*x2), |x1*x2| < 0.02 resampled.
/// mixture3: classes with probabilities (0.25, 0.25, 0.5);
///   N([0,0], diag(15, 0.05)), N([-12,0], I) and
///   (2/3) N([0,8], 4I) + (1/3) N([0,-4], I).
inline Dataset gen_synthetic(SyntheticKind kind, std::size_t n, std::uint64_t seed) {
  if (n < 4) throw DomainError("synthetic datasets need n >= 4");
  Rng rng(seed);
  Dataset ds;
  ds.features = Matrix(n, 2);
  ds.labels.resize(n);
  ds.classes = kind == SyntheticKind::mixture3 ? 3 : 2;
  const double pi = std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    double x1 = 0.0, x2 = 0.0;
    int y = 0;
    switch (kind) {
      case SyntheticKind::spiral: {
        y = i < n / 2 ? 0 : 1;
        const double theta = pi / 2 + 3.0 * pi * rng.uniform();
        const double r = theta / pi + rng.normal(0.0, 0.05);
        const double phase = y == 0 ? 0.0 : pi;
        x1 = r * std::cos(theta + phase);
        x2 = r * std::sin(theta + phase);
        break;
      }
      case SyntheticKind::two_circle: {
        y = i < n / 2 ? 0 : 1;
        const double angle = 2.0 * pi * rng.uniform();
        const double r = (y == 0 ? 1.0 : 2.0) + rng.normal(0.0, 0.1);
        x1 = r * std::cos(angle);
        x2 = r * std::sin(angle);
        break;
      }
      case SyntheticKind::xor_pattern: {
        do {
          x1 = rng.uniform(-1.0, 1.0);
          x2 = rng.uniform(-1.0, 1.0);
        } while (std::abs(x1 * x2) < 0.02);
        y = x1 * x2 > 0 ? 0 : 1;
        break;
      }
      case SyntheticKind::mixture3: {
        const double class_probs[] = {0.25, 0.25, 0.5};
        y = static_cast<int>(rng.categorical(class_probs));
        if (y == 0) {
          x1 = rng.normal(0.0, std::sqrt(15.0));
          x2 = rng.normal(0.0, std::sqrt(0.05));
        } else if (y == 1) {
          x1 = rng.normal(-12.0, 1.0);
          x2 = rng.normal(0.0, 1.0);
        } else if (rng.uniform() < 2.0 / 3.0) {
          x1 = rng.normal(0.0, 2.0);
          x2 = rng.normal(8.0, 2.0);
        } else {
          x1 = rng.normal(0.0, 1.0);
          x2 = rng.normal(-4.0, 1.0);
        }
        break;
      }
    }
    ds.features(i, 0) = x1;
    ds.features(i, 1) = x2;
    ds.labels[i] = y;
  }
  return ds;
}

}  // namespace sfp
