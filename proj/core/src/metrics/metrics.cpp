// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#include "lhe/metrics/metrics.h"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "lhe/common/error.h"

namespace lhe::metrics {
namespace {

void require_threshold(double t) {
  if (!(t > 0.0 && t < 1.0)) throw MetricError("threshold must lie in (0, 1)");
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<double> ScoreMatrix::score_column(std::size_t c) const {
  std::vector<double> out(samples);
  for (std::size_t i = 0; i < samples; ++i) out[i] = score(i, c);
  return out;
}

std::vector<std::uint8_t> ScoreMatrix::label_column(std::size_t c) const {
  std::vector<std::uint8_t> out(samples);
  for (std::size_t i = 0; i < samples; ++i) out[i] = label(i, c);
  return out;
}

void ScoreMatrix::validate() const {
  if (scores.size() != samples * classes || labels.size() != samples * classes) {
    throw MetricError("score and label matrices must both be samples x classes");
  }
  if (!class_names.empty() && class_names.size() != classes) throw MetricError("class name count mismatch");
  for (double s : scores)
    if (!std::isfinite(s)) throw MetricError("scores must be finite");
  for (auto l : labels)
    if (l > 1) throw MetricError("labels must be 0 or 1");
}

double binary_auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw MetricError("score/label length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Walk tie groups upward: a positive beats every strictly lower negative
  // and half of the negatives tied with it. All quantities are halves of
  // integers, so the sum is exact.
  double wins = 0;
  std::uint64_t neg_below = 0, pos_total = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? pos : neg) += 1;
      ++j;
    }
    wins += static_cast<double>(pos * neg_below) + 0.5 * static_cast<double>(pos * neg);
    neg_below += neg;
    pos_total += pos;
    i = j;
  }
  if (pos_total == 0 || neg_below == 0) throw MetricError("AUROC undefined without both positive and negative labels");
  return wins / (static_cast<double>(pos_total) * static_cast<double>(neg_below));
}

std::vector<std::size_t> auroc_excluded_classes(const ScoreMatrix& sm) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < sm.classes; ++c) {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < sm.samples; ++i) pos += sm.label(i, c);
    if (pos == 0 || pos == sm.samples) out.push_back(c);
  }
  return out;
}

double auroc(const ScoreMatrix& sm, Averaging averaging) {
  sm.validate();
  if (averaging == Averaging::kMicro) return binary_auroc(sm.scores, sm.labels);
  const auto excluded = auroc_excluded_classes(sm);
  double sum = 0, weight = 0;
  for (std::size_t c = 0; c < sm.classes; ++c) {
    if (std::find(excluded.begin(), excluded.end(), c) != excluded.end()) continue;
    const auto labels = sm.label_column(c);
    const double w = averaging == Averaging::kMacro ? 1.0 : static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    sum += w * binary_auroc(sm.score_column(c), labels);
    weight += w;
  }
  if (weight == 0) throw MetricError("AUROC undefined: no class has both positive and negative labels");
  return sum / weight;
}

double f1_from(const Confusion& c) {
  const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
  return denom == 0 ? 0.0 : static_cast<double>(2 * c.tp) / static_cast<double>(denom);
}

Confusion confusion(const ScoreMatrix& sm, std::size_t cls, double threshold) {
  Confusion c;
  for (std::size_t i = 0; i < sm.samples; ++i) {
    const bool pred = sm.score(i, cls) >= threshold;
    const bool truth = sm.label(i, cls) == 1;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f1(const ScoreMatrix& sm, Averaging averaging, double threshold) {
  sm.validate();
  require_threshold(threshold);
  if (sm.classes == 0) throw MetricError("F1 needs at least one class");
  if (averaging == Averaging::kMicro) {
    Confusion total;
    for (std::size_t c = 0; c < sm.classes; ++c) {
      const auto k = confusion(sm, c, threshold);
      total.tp += k.tp;
      total.fp += k.fp;
      total.fn += k.fn;
      total.tn += k.tn;
    }
    return f1_from(total);
  }
  double sum = 0, weight = 0;
  for (std::size_t c = 0; c < sm.classes; ++c) {
    const auto k = confusion(sm, c, threshold);
    const double w = averaging == Averaging::kMacro ? 1.0 : static_cast<double>(k.tp + k.fn);
    sum += w * f1_from(k);
    weight += w;
  }
  return weight == 0 ? 0.0 : sum / weight;
}

Report evaluate(const ScoreMatrix& sm, double threshold) {
  sm.validate();
  require_threshold(threshold);
  Report r;
  r.threshold = threshold;
  r.samples = sm.samples;
  r.auroc_micro = auroc(sm, Averaging::kMicro);
  r.auroc_macro = auroc(sm, Averaging::kMacro);
  r.auroc_weighted = auroc(sm, Averaging::kWeighted);
  r.f1_micro = f1(sm, Averaging::kMicro, threshold);
  r.f1_macro = f1(sm, Averaging::kMacro, threshold);
  r.f1_weighted = f1(sm, Averaging::kWeighted, threshold);
  const auto excluded = auroc_excluded_classes(sm);
  for (std::size_t c = 0; c < sm.classes; ++c) {
    ClassReport cr;
    cr.name = sm.class_names.empty() ? "class" + std::to_string(c) : sm.class_names[c];
    const auto k = confusion(sm, c, threshold);
    cr.positives = k.tp + k.fn;
    cr.f1 = f1_from(k);
    cr.auroc_excluded = std::find(excluded.begin(), excluded.end(), c) != excluded.end();
    cr.auroc = cr.auroc_excluded ? std::numeric_limits<double>::quiet_NaN()
                                 : binary_auroc(sm.score_column(c), sm.label_column(c));
    r.classes.push_back(cr);
  }
  return r;
}

std::string Report::to_json() const {
  nlohmann::json cls = nlohmann::json::array();
  nlohmann::json excluded = nlohmann::json::array();
  for (const auto& c : classes) {
    nlohmann::json j = {{"name", c.name}, {"positives", c.positives}, {"f1", c.f1}};
    j["auroc"] = c.auroc_excluded ? nlohmann::json(nullptr) : nlohmann::json(c.auroc);
    cls.push_back(j);
    if (c.auroc_excluded) excluded.push_back(c.name);
  }
  nlohmann::json j = {
      {"samples", samples},
      {"threshold", threshold},
      {"auroc", {{"micro", auroc_micro}, {"macro", auroc_macro}, {"weighted", auroc_weighted}}},
      {"f1", {{"micro", f1_micro}, {"macro", f1_macro}, {"weighted", f1_weighted}}},
      {"weighting", "positive support"},
      {"auroc_excluded_classes", excluded},
      {"classes", cls},
  };
  return j.dump(2);
}

CsvTable parse_csv(const std::string& text) {
  std::stringstream in(text);
  std::string line;
  CsvTable t;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      for (const auto& c : cells)
        if (c.empty()) throw MetricError("CSV header has an empty class name");
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw MetricError("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                        " fields, expected " + std::to_string(t.header.size()));
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size() || errno == ERANGE) {
        throw MetricError("CSV line " + std::to_string(line_no) + ": '" + c + "' is not a number");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw MetricError("CSV is empty");
  return t;
}

std::string format_csv(const CsvTable& table) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < table.header.size(); ++i) out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << format_csv(table);
  if (!out) throw IoError("write failed: " + path);
}

ScoreMatrix make_score_matrix(const CsvTable& scores, const CsvTable& labels) {
  if (scores.header != labels.header) throw MetricError("score and label files list different classes");
  if (scores.rows.size() != labels.rows.size()) throw MetricError("score and label files have different row counts");
  ScoreMatrix sm;
  sm.samples = scores.rows.size();
  sm.classes = scores.header.size();
  sm.class_names = scores.header;
  for (std::size_t i = 0; i < sm.samples; ++i) {
    for (std::size_t c = 0; c < sm.classes; ++c) {
      sm.scores.push_back(scores.rows[i][c]);
      const double l = labels.rows[i][c];
      if (l != 0.0 && l != 1.0) throw MetricError("label at row " + std::to_string(i + 1) + " is not 0 or 1");
      sm.labels.push_back(static_cast<std::uint8_t>(l));
    }
  }
  sm.validate();
  return sm;
}

}  // namespace lhe::metrics
