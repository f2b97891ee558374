#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "signdict/catalog.hpp"
#include "signdict/recognizer/model.hpp"
#include "signdict/synth.hpp"

namespace signdict::eval {

// Graded relevance: 1 (same gloss), 0.5 (shares hands, movement or
// handshape), 0 otherwise.
using RelevanceGrade = double;

// Throws Error{invalid_argument} unless g is 0, 0.5 or 1.
void validate_grade(RelevanceGrade g);

RelevanceGrade rel_grade(const GlossEntry& predicted, const GlossEntry& truth);

// Sum over all given grades of (2^rel - 1) / log2(i + 1), i 1-based.
double dcg(std::span<const RelevanceGrade> grades);

// DCG of the first p grades over the DCG of the descending-sorted grades
// (first p). 1.0 when the ideal DCG is zero.
double ndcg(std::span<const RelevanceGrade> grades, std::size_t p);

struct OracleResult {
  double dcg = 0.0;
  double idcg = 0.0;
  double ndcg = 0.0;
};

inline constexpr std::size_t kOracleMaxLength = 8;

// IDCG by enumerating every permutation of `grades`.
OracleResult dcg_oracle(std::span<const RelevanceGrade> grades, std::size_t p);

// One ranked list: class indices, most likely first.
using Ranking = std::vector<ClassIndex>;

// 1-based position of the first entry with the truth's gloss.
std::size_t gloss_rank(const Ranking& ranking, ClassIndex truth, const VocabularyCatalog& catalog);

double topk_accuracy(std::span<const Ranking> rankings, std::span<const ClassIndex> truths,
                     const VocabularyCatalog& catalog, std::size_t k);

struct PerClassAccuracy {
  std::map<ClassIndex, double> per_class;  // classes present among the truths
  double mean = 0.0;
  double sigma = 0.0;  // population
};

PerClassAccuracy per_class_accuracy(std::span<const Ranking> rankings, std::span<const ClassIndex> truths,
                                    const VocabularyCatalog& catalog);

enum class Dimension { movement, hands, location };

std::string_view to_string(Dimension d);

struct GroupAccuracy {
  std::string value;
  std::size_t count = 0;
  double top1 = 0.0;
  double topk = 0.0;
};

// Groups by the truth entry's value on `dimension`, in enum order; empty
// groups are left out.
std::vector<GroupAccuracy> feature_group_accuracy(std::span<const Ranking> rankings,
                                                  std::span<const ClassIndex> truths,
                                                  const VocabularyCatalog& catalog, Dimension dimension,
                                                  std::size_t k = 7);

inline constexpr std::size_t kDefaultTopK = 7;

struct AccuracyReport {
  std::size_t k = kDefaultTopK;
  std::size_t samples = 0;
  double top1 = 0.0;
  double topk = 0.0;
  PerClassAccuracy per_class;
  // Mean per-sample nDCG at depth min(k, |catalog|).
  double ndcg_mean = 0.0;
  std::map<Dimension, std::vector<GroupAccuracy>> groups;
};

AccuracyReport evaluate(std::span<const Ranking> rankings, std::span<const ClassIndex> truths,
                        const VocabularyCatalog& catalog, std::size_t k = kDefaultTopK);

// Rankings for every sequence, computed in parallel.
std::vector<Ranking> rank_all(const recognizer::TrainedModel& model, std::span<const PoseSequence> sequences);

AccuracyReport evaluate_model(const recognizer::TrainedModel& model, std::span<const LabeledSequence> testset,
                              std::size_t k = kDefaultTopK);

struct SweepPoint {
  double ratio = 1.0;
  AccuracyReport report;
};

// Ratios must be ascending, within (0, 1], and include 1.0.
std::vector<SweepPoint> resolution_sweep(const recognizer::TrainedModel& model,
                                         std::span<const LabeledSequence> testset, std::span<const double> ratios,
                                         std::size_t k = kDefaultTopK);

struct LatencyModel {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;

  double predict(double input_seconds) const { return slope * input_seconds + intercept; }
};

using LatencyObservation = std::pair<double, double>;  // input seconds, prediction seconds

// Ordinary least squares. Needs two distinct input lengths.
LatencyModel latency_fit(std::span<const LatencyObservation> observations);

// Two tab- or space-separated numbers per line; `#` comments allowed.
std::vector<LatencyObservation> parse_latency_observations(std::string_view text);
std::vector<LatencyObservation> load_latency_observations(const std::filesystem::path& path);

}  // namespace signdict::eval
