#pragma once

#include <optional>
#include <string>
#include <vector>

#include "signdict/eval.hpp"
#include "json.hpp"

namespace signdict {

struct EvaluationRun {
  std::optional<eval::AccuracyReport> accuracy;
  std::vector<eval::SweepPoint> sweep;
  std::optional<eval::LatencyModel> latency;
};

// {top1, top7, per_class:{mean, sigma, classes:{id: acc}}, ndcg_mean,
//  groups:{movement:{value:{count, top1, top7}}, hands:..., location:...},
//  sweep:[{ratio, top1, top7}], latency:{slope, intercept, r2}}
// Absent parts are omitted. The top-k key is "top<k>".
nlohmann::json report_json(const EvaluationRun& run, const VocabularyCatalog& catalog);

std::string report_table(const EvaluationRun& run, const VocabularyCatalog& catalog);

}  // namespace signdict
