#include "kdi/error.hpp"
#include "kdi/explain.hpp"

namespace kdi {

double UtilizationReport::percent(Outcome outcome, std::size_t feature) const {
  const auto o = static_cast<std::size_t>(outcome);
  require(feature < kFeatureRows, "utilization: feature index out of range");
  if (totals[o] == 0) return 0.0;
  return 100.0 * static_cast<double>(counts[o][feature]) / static_cast<double>(totals[o]);
}

std::string UtilizationReport::csv() const {
  static constexpr Outcome kOrder[] = {Outcome::kTP, Outcome::kTN, Outcome::kFP, Outcome::kFN};
  std::string out = "feature";
  for (Outcome o : kOrder) out += std::string(",") + to_string(o) + "_pct";
  for (Outcome o : kOrder) out += std::string(",") + to_string(o) + "_count";
  out += "\n";
  for (std::size_t f = 0; f < kFeatureRows; ++f) {
    out += feature_name(f);
    for (Outcome o : kOrder) out += "," + format_double(percent(o, f));
    for (Outcome o : kOrder) out += "," + std::to_string(counts[static_cast<std::size_t>(o)][f]);
    out += "\n";
  }
  out += "total";
  for (Outcome o : kOrder) out += totals[static_cast<std::size_t>(o)] ? ",100" : ",0";
  for (Outcome o : kOrder) out += "," + std::to_string(totals[static_cast<std::size_t>(o)]);
  out += "\nall_zero";
  for (std::size_t i = 0; i < 4; ++i) out += ",";
  for (Outcome o : kOrder) out += "," + std::to_string(all_zero[static_cast<std::size_t>(o)]);
  out += "\n";
  return out;
}

UtilizationReport utilization_report(std::span<const Explanation> explanations) {
  require(!explanations.empty(), "utilization: empty sample set");
  UtilizationReport r;
  for (const Explanation& ex : explanations) {
    const auto o = static_cast<std::size_t>(ex.outcome);
    if (!ex.dominant) {
      ++r.all_zero[o];
      continue;
    }
    ++r.counts[o][*ex.dominant];
    ++r.totals[o];
  }
  return r;
}

UtilizationReport utilization_report(const EventNet& net, std::span<const Sample> samples,
                                     const ExplainOptions& options) {
  require(!samples.empty(), "utilization: empty sample set");
  std::vector<Explanation> all;
  all.reserve(samples.size());
  for (const Sample& s : samples) all.push_back(explain_sample(net, s, options));
  return utilization_report(all);
}

}  // namespace kdi
