#include "signdict/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "signdict/error.hpp"
#include "signdict/parallel.hpp"
#include "signdict/text.hpp"

namespace signdict::eval {

void validate_grade(RelevanceGrade g) {
  if (g != 0.0 && g != 0.5 && g != 1.0) {
    throw Error(ErrorCode::invalid_argument, "relevance grade must be 0, 0.5 or 1, got " + std::to_string(g));
  }
}

RelevanceGrade rel_grade(const GlossEntry& predicted, const GlossEntry& truth) {
  if (predicted.gloss == truth.gloss) return 1.0;
  return shares_attribute(predicted.metadata, truth.metadata) ? 0.5 : 0.0;
}

namespace {

double gain(RelevanceGrade g) { return std::exp2(g) - 1.0; }

double dcg_prefix(std::span<const RelevanceGrade> grades, std::size_t p) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p; ++i) sum += gain(grades[i]) / std::log2(static_cast<double>(i) + 2.0);
  return sum;
}

void check_grades(std::span<const RelevanceGrade> grades, std::size_t p) {
  if (grades.empty()) throw Error(ErrorCode::invalid_argument, "empty grade list");
  if (p < 1) throw Error(ErrorCode::invalid_argument, "cutoff p must be at least 1");
  if (p > grades.size()) {
    throw Error(ErrorCode::invalid_argument,
                "cutoff p=" + std::to_string(p) + " exceeds " + std::to_string(grades.size()) + " grades");
  }
  for (const double g : grades) validate_grade(g);
}

void check_aligned(std::span<const Ranking> rankings, std::span<const ClassIndex> truths) {
  if (rankings.size() != truths.size()) {
    throw Error(ErrorCode::invalid_argument, std::to_string(rankings.size()) + " rankings but " +
                                                 std::to_string(truths.size()) + " truths");
  }
  if (rankings.empty()) throw Error(ErrorCode::invalid_argument, "no samples");
}

}  // namespace

double dcg(std::span<const RelevanceGrade> grades) {
  check_grades(grades, grades.size());
  return dcg_prefix(grades, grades.size());
}

double ndcg(std::span<const RelevanceGrade> grades, std::size_t p) {
  check_grades(grades, p);
  std::vector<RelevanceGrade> ideal(grades.begin(), grades.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg_prefix(ideal, p);
  if (idcg == 0.0) return 1.0;
  return dcg_prefix(grades, p) / idcg;
}

OracleResult dcg_oracle(std::span<const RelevanceGrade> grades, std::size_t p) {
  check_grades(grades, p);
  if (grades.size() > kOracleMaxLength) {
    throw Error(ErrorCode::invalid_argument, "oracle enumerates at most " + std::to_string(kOracleMaxLength) +
                                                 " grades, got " + std::to_string(grades.size()));
  }
  OracleResult r;
  r.dcg = dcg_prefix(grades, p);
  // Permute positions rather than values so equal grades are still visited.
  std::vector<std::size_t> perm(grades.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<RelevanceGrade> arranged(grades.size());
  do {
    for (std::size_t i = 0; i < perm.size(); ++i) arranged[i] = grades[perm[i]];
    r.idcg = std::max(r.idcg, dcg_prefix(arranged, p));
  } while (std::next_permutation(perm.begin(), perm.end()));
  r.ndcg = r.idcg == 0.0 ? 1.0 : r.dcg / r.idcg;
  return r;
}

std::size_t gloss_rank(const Ranking& ranking, ClassIndex truth, const VocabularyCatalog& catalog) {
  const std::string& gloss = catalog.entry(truth).gloss;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (catalog.entry(ranking[i]).gloss == gloss) return i + 1;
  }
  throw Error(ErrorCode::invalid_argument, "ranking does not contain gloss " + gloss);
}

double topk_accuracy(std::span<const Ranking> rankings, std::span<const ClassIndex> truths,
                     const VocabularyCatalog& catalog, std::size_t k) {
  check_aligned(rankings, truths);
  if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rankings.size(); ++i) hits += gloss_rank(rankings[i], truths[i], catalog) <= k;
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

PerClassAccuracy per_class_accuracy(std::span<const Ranking> rankings, std::span<const ClassIndex> truths,
                                    const VocabularyCatalog& catalog) {
  check_aligned(rankings, truths);
  std::map<ClassIndex, std::pair<std::size_t, std::size_t>> tally;  // hits, total
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    auto& [hits, total] = tally[truths[i]];
    hits += gloss_rank(rankings[i], truths[i], catalog) == 1;
    ++total;
  }
  PerClassAccuracy out;
  for (const auto& [cls, t] : tally) {
    out.per_class[cls] = static_cast<double>(t.first) / static_cast<double>(t.second);
  }
  const double n = static_cast<double>(out.per_class.size());
  for (const auto& [cls, a] : out.per_class) out.mean += a;
  out.mean /= n;
  double var = 0.0;
  for (const auto& [cls, a] : out.per_class) var += (a - out.mean) * (a - out.mean);
  out.sigma = std::sqrt(var / n);
  return out;
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::movement: return "movement";
    case Dimension::hands: return "hands";
    case Dimension::location: return "location";
  }
  return "movement";
}

namespace {

// Position of the metadata value in its enum, and its token.
std::pair<int, std::string> group_key(const SignMetadata& m, Dimension d) {
  switch (d) {
    case Dimension::movement: return {static_cast<int>(m.movement), std::string(to_string(m.movement))};
    case Dimension::hands: return {static_cast<int>(m.hands), std::string(to_string(m.hands))};
    case Dimension::location: return {static_cast<int>(m.location), std::string(to_string(m.location))};
  }
  return {0, ""};
}

}  // namespace

std::vector<GroupAccuracy> feature_group_accuracy(std::span<const Ranking> rankings,
                                                  std::span<const ClassIndex> truths,
                                                  const VocabularyCatalog& catalog, Dimension dimension,
                                                  std::size_t k) {
  check_aligned(rankings, truths);
  if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
  struct Tally {
    std::string value;
    std::size_t count = 0, top1 = 0, topk = 0;
  };
  std::map<int, Tally> tally;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    auto [key, value] = group_key(catalog.entry(truths[i]).metadata, dimension);
    auto& t = tally[key];
    t.value = value;
    const std::size_t r = gloss_rank(rankings[i], truths[i], catalog);
    ++t.count;
    t.top1 += r == 1;
    t.topk += r <= k;
  }
  std::vector<GroupAccuracy> out;
  for (const auto& [key, t] : tally) {
    const double n = static_cast<double>(t.count);
    out.push_back({t.value, t.count, static_cast<double>(t.top1) / n, static_cast<double>(t.topk) / n});
  }
  return out;
}

AccuracyReport evaluate(std::span<const Ranking> rankings, std::span<const ClassIndex> truths,
                        const VocabularyCatalog& catalog, std::size_t k) {
  check_aligned(rankings, truths);
  AccuracyReport r;
  r.k = k;
  r.samples = rankings.size();
  r.top1 = topk_accuracy(rankings, truths, catalog, 1);
  r.topk = topk_accuracy(rankings, truths, catalog, k);
  r.per_class = per_class_accuracy(rankings, truths, catalog);
  for (const Dimension d : {Dimension::movement, Dimension::hands, Dimension::location}) {
    r.groups[d] = feature_group_accuracy(rankings, truths, catalog, d, k);
  }
  double sum = 0.0;
  std::vector<RelevanceGrade> grades;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    const std::size_t p = std::min(k, rankings[i].size());
    grades.clear();
    for (std::size_t j = 0; j < p; ++j) {
      grades.push_back(rel_grade(catalog.entry(rankings[i][j]), catalog.entry(truths[i])));
    }
    sum += ndcg(grades, p);
  }
  r.ndcg_mean = sum / static_cast<double>(rankings.size());
  return r;
}

std::vector<Ranking> rank_all(const recognizer::TrainedModel& model, std::span<const PoseSequence> sequences) {
  std::vector<Ranking> out(sequences.size());
  parallel_for(sequences.size(), [&](std::size_t i) {
    const auto dist = recognizer::predict(model, sequences[i]);
    Ranking r(dist.size());
    std::iota(r.begin(), r.end(), ClassIndex{0});
    std::stable_sort(r.begin(), r.end(),
                     [&](ClassIndex a, ClassIndex b) { return dist.probabilities[a] > dist.probabilities[b]; });
    out[i] = std::move(r);
  });
  return out;
}

namespace {

AccuracyReport evaluate_sequences(const recognizer::TrainedModel& model, std::span<const PoseSequence> sequences,
                                  std::span<const ClassIndex> truths, std::size_t k) {
  const auto rankings = rank_all(model, sequences);
  return evaluate(rankings, truths, model.catalog(), k);
}

}  // namespace

AccuracyReport evaluate_model(const recognizer::TrainedModel& model, std::span<const LabeledSequence> testset,
                              std::size_t k) {
  std::vector<PoseSequence> seqs;
  std::vector<ClassIndex> truths;
  for (const auto& s : testset) {
    seqs.push_back(s.sequence);
    truths.push_back(s.label);
  }
  return evaluate_sequences(model, seqs, truths, k);
}

std::vector<SweepPoint> resolution_sweep(const recognizer::TrainedModel& model,
                                         std::span<const LabeledSequence> testset, std::span<const double> ratios,
                                         std::size_t k) {
  if (ratios.empty()) throw Error(ErrorCode::invalid_argument, "no ratios");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0 && ratios[i] <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "ratio " + std::to_string(ratios[i]) + " outside (0, 1]");
    }
    if (i > 0 && ratios[i] <= ratios[i - 1]) throw Error(ErrorCode::invalid_argument, "ratios must be ascending");
  }
  if (ratios.back() != 1.0) throw Error(ErrorCode::invalid_argument, "ratio 1.0 must be included");
  std::vector<ClassIndex> truths;
  for (const auto& s : testset) truths.push_back(s.label);
  std::vector<SweepPoint> out;
  for (const double ratio : ratios) {
    std::vector<PoseSequence> seqs;
    seqs.reserve(testset.size());
    for (const auto& s : testset) seqs.push_back(ratio == 1.0 ? s.sequence : quantize_resolution(s.sequence, ratio));
    out.push_back({ratio, evaluate_sequences(model, seqs, truths, k)});
  }
  return out;
}

LatencyModel latency_fit(std::span<const LatencyObservation> observations) {
  const double n = static_cast<double>(observations.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : observations) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw Error(ErrorCode::invalid_argument, "non-finite observation");
    mx += x;
    my += y;
  }
  if (observations.size() < 2) throw Error(ErrorCode::invalid_argument, "need at least two distinct input lengths");
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : observations) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::invalid_argument, "need at least two distinct input lengths");
  LatencyModel m;
  m.slope = sxy / sxx;
  m.intercept = my - m.slope * mx;
  double ss_res = 0.0;
  for (const auto& [x, y] : observations) {
    const double e = y - m.predict(x);
    ss_res += e * e;
  }
  // Constant y is fitted exactly by a flat line.
  m.r_squared = syy == 0.0 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  return m;
}

std::vector<LatencyObservation> parse_latency_observations(std::string_view text) {
  std::vector<LatencyObservation> out;
  std::size_t line_no = 0;
  for (const auto& raw : split_lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_ws(line);
    if (fields.size() != 2) {
      throw Error(ErrorCode::parse, "latency line " + std::to_string(line_no) + ": expected 2 fields");
    }
    double x = 0.0, y = 0.0;
    if (!parse_double(fields[0], x) || !parse_double(fields[1], y)) {
      throw Error(ErrorCode::parse, "latency line " + std::to_string(line_no) + ": malformed number");
    }
    out.emplace_back(x, y);
  }
  return out;
}

std::vector<LatencyObservation> load_latency_observations(const std::filesystem::path& path) {
  return parse_latency_observations(read_text_file(path));
}

}  // namespace signdict::eval
