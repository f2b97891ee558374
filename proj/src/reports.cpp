#include "signdict/reports.hpp"

#include <cstdio>
#include <sstream>

namespace signdict {

namespace {

std::string topk_key(std::size_t k) { return "top" + std::to_string(k); }

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

nlohmann::json report_json(const EvaluationRun& run, const VocabularyCatalog& catalog) {
  nlohmann::json j = nlohmann::json::object();
  if (run.accuracy) {
    const auto& a = *run.accuracy;
    j["samples"] = a.samples;
    j["top1"] = a.top1;
    j[topk_key(a.k)] = a.topk;
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [cls, acc] : a.per_class.per_class) classes[catalog.rendition_of(cls)] = acc;
    j["per_class"] = {{"mean", a.per_class.mean}, {"sigma", a.per_class.sigma}, {"classes", classes}};
    j["ndcg_mean"] = a.ndcg_mean;
    nlohmann::json groups = nlohmann::json::object();
    for (const auto& [dim, list] : a.groups) {
      nlohmann::json g = nlohmann::json::object();
      for (const auto& ga : list) g[ga.value] = {{"count", ga.count}, {"top1", ga.top1}, {topk_key(a.k), ga.topk}};
      groups[std::string(eval::to_string(dim))] = g;
    }
    j["groups"] = groups;
  }
  if (!run.sweep.empty()) {
    nlohmann::json s = nlohmann::json::array();
    for (const auto& p : run.sweep) {
      s.push_back({{"ratio", p.ratio}, {"top1", p.report.top1}, {topk_key(p.report.k), p.report.topk}});
    }
    j["sweep"] = s;
  }
  if (run.latency) {
    j["latency"] = {{"slope", run.latency->slope}, {"intercept", run.latency->intercept},
                    {"r2", run.latency->r_squared}};
  }
  return j;
}

std::string report_table(const EvaluationRun& run, const VocabularyCatalog&) {
  std::ostringstream out;
  if (run.accuracy) {
    const auto& a = *run.accuracy;
    out << "samples          " << a.samples << "\n";
    out << "top-1            " << fixed(a.top1) << "\n";
    out << "top-" << a.k << (a.k < 10 ? "            " : "           ") << fixed(a.topk) << "\n";
    out << "per-class mean   " << fixed(a.per_class.mean) << " (sigma " << fixed(a.per_class.sigma) << ")\n";
    out << "nDCG mean        " << fixed(a.ndcg_mean) << "\n";
    for (const auto& [dim, list] : a.groups) {
      out << "\n" << eval::to_string(dim) << "\n";
      for (const auto& g : list) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-16s n=%-6zu top-1 %.4f  top-%zu %.4f\n", g.value.c_str(), g.count,
                      g.top1, a.k, g.topk);
        out << line;
      }
    }
  }
  if (!run.sweep.empty()) {
    out << (run.accuracy ? "\n" : "") << "ratio   resolution  top-1   top-" << run.sweep.front().report.k << "\n";
    for (const auto& p : run.sweep) {
      const auto res = scaled_resolution(p.ratio);
      char line[128];
      std::snprintf(line, sizeof line, "%-7.3f %4dx%-6d  %.4f  %.4f\n", p.ratio, res.width, res.height,
                    p.report.top1, p.report.topk);
      out << line;
    }
  }
  if (run.latency) {
    if (run.accuracy || !run.sweep.empty()) out << "\n";
    out << "latency slope    " << fixed(run.latency->slope) << " s/s\n";
    out << "latency intercept " << fixed(run.latency->intercept) << " s\n";
    out << "r^2              " << fixed(run.latency->r_squared) << "\n";
  }
  return out.str();
}

}  // namespace signdict
