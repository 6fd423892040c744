// Copyright 2026 The LHE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lhe::metrics {

enum class Averaging { kMicro, kMacro, kWeighted };

// Row-major samples x classes.
struct ScoreMatrix {
  std::size_t samples = 0, classes = 0;
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  std::vector<std::string> class_names;

  double score(std::size_t i, std::size_t c) const { return scores[i * classes + c]; }
  std::uint8_t label(std::size_t i, std::size_t c) const { return labels[i * classes + c]; }
  std::vector<double> score_column(std::size_t c) const;
  std::vector<std::uint8_t> label_column(std::size_t c) const;
  // Throws MetricError on shape mismatch, non-binary labels, non-finite scores.
  void validate() const;
};

// Mann-Whitney AUROC, ties counted 1/2. MetricError without both classes.
double binary_auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Classes lacking positives or negatives; left out of macro/weighted AUROC.
std::vector<std::size_t> auroc_excluded_classes(const ScoreMatrix& sm);

// Weighted averages weight classes by positive count. MetricError if no class
// (or, for micro, the pooled vector) has both labels.
double auroc(const ScoreMatrix& sm, Averaging averaging);

struct Confusion {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};
// Predicted positive when score >= threshold. F1 = 2tp / (2tp + fp + fn), 0
// when the denominator is 0.
double f1_from(const Confusion& c);
Confusion confusion(const ScoreMatrix& sm, std::size_t cls, double threshold);
double f1(const ScoreMatrix& sm, Averaging averaging, double threshold = 0.5);

struct ClassReport {
  std::string name;
  std::uint64_t positives = 0;
  double f1 = 0;
  double auroc = 0;  // NaN when excluded
  bool auroc_excluded = false;
};

struct Report {
  double auroc_micro = 0, auroc_macro = 0, auroc_weighted = 0;
  double f1_micro = 0, f1_macro = 0, f1_weighted = 0;
  double threshold = 0.5;
  std::size_t samples = 0;
  std::vector<ClassReport> classes;
  std::string to_json() const;
};
Report evaluate(const ScoreMatrix& sm, double threshold = 0.5);

// CSV: header of class names, then one comma-separated row per sample.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
CsvTable parse_csv(const std::string& text);  // MetricError on malformed input
std::string format_csv(const CsvTable& table);
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);
// Scores and labels must share the header and row count.
ScoreMatrix make_score_matrix(const CsvTable& scores, const CsvTable& labels);

}  // namespace lhe::metrics
