#include <algorithm>

#include "kdi/error.hpp"
#include "kdi/models.hpp"

namespace kdi {

const char* to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kTP: return "TP";
    case Outcome::kTN: return "TN";
    case Outcome::kFP: return "FP";
    case Outcome::kFN: return "FN";
  }
  return "?";
}

Outcome outcome_of(std::size_t label, std::size_t predicted) {
  if (label == 0) return predicted == 0 ? Outcome::kTP : Outcome::kFN;
  return predicted == 0 ? Outcome::kFP : Outcome::kTN;
}

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

ClassScores scores(long long hit, long long false_pos, long long false_neg) {
  const double h = static_cast<double>(hit);
  ClassScores s;
  s.precision = ratio(h, h + static_cast<double>(false_pos));
  s.recall = ratio(h, h + static_cast<double>(false_neg));
  s.f1 = ratio(2.0 * h, 2.0 * h + static_cast<double>(false_pos + false_neg));
  return s;
}

}  // namespace

Metrics metrics_from_counts(const ConfusionCounts& counts) {
  require(counts.tp >= 0 && counts.tn >= 0 && counts.fp >= 0 && counts.fn >= 0,
          "metrics: counts must be non-negative");
  Metrics m;
  m.counts = counts;
  m.classes[0] = scores(counts.tp, counts.fp, counts.fn);
  m.classes[1] = scores(counts.tn, counts.fn, counts.fp);
  m.accuracy = ratio(static_cast<double>(counts.tp + counts.tn), static_cast<double>(counts.total()));
  return m;
}

std::size_t argmax(std::span<const double> values) {
  require(!values.empty(), "argmax of empty range");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

std::vector<Prediction> predict(const EventNet& net, std::span<const Sample> samples) {
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) {
    Prediction p;
    p.label = s.label;
    p.logits = net.forward(s.frames);
    p.predicted = argmax(p.logits);
    out.push_back(std::move(p));
  }
  return out;
}

Metrics evaluate(const EventNet& net, std::span<const Sample> samples) {
  require(!samples.empty(), "evaluate: empty sample set");
  ConfusionCounts c;
  for (const Prediction& p : predict(net, samples)) {
    switch (outcome_of(p.label, p.predicted)) {
      case Outcome::kTP: ++c.tp; break;
      case Outcome::kTN: ++c.tn; break;
      case Outcome::kFP: ++c.fp; break;
      case Outcome::kFN: ++c.fn; break;
    }
  }
  return metrics_from_counts(c);
}

std::string metrics_report(const Metrics& metrics) {
  KeyValue kv;
  kv.set("tp", metrics.counts.tp);
  kv.set("tn", metrics.counts.tn);
  kv.set("fp", metrics.counts.fp);
  kv.set("fn", metrics.counts.fn);
  kv.set("samples", metrics.counts.total());
  kv.set("accuracy", metrics.accuracy);
  for (std::size_t c = 0; c < 2; ++c) {
    const std::string p = "class" + std::to_string(c) + ".";
    kv.set(p + "precision", metrics.classes[c].precision);
    kv.set(p + "recall", metrics.classes[c].recall);
    kv.set(p + "f1", metrics.classes[c].f1);
  }
  for (std::size_t e = 0; e < metrics.loss_history.size(); ++e) {
    kv.set("loss.epoch" + std::to_string(e + 1), metrics.loss_history[e]);
  }
  return kv.to_string();
}

std::string metrics_csv(const Metrics& metrics) {
  std::string out = "class,precision,recall,f1,tp,tn,fp,fn\n";
  for (std::size_t c = 0; c < 2; ++c) {
    out += std::to_string(c) + "," + format_double(metrics.classes[c].precision) + "," +
           format_double(metrics.classes[c].recall) + "," + format_double(metrics.classes[c].f1) +
           "," + std::to_string(metrics.counts.tp) + "," + std::to_string(metrics.counts.tn) + "," +
           std::to_string(metrics.counts.fp) + "," + std::to_string(metrics.counts.fn) + "\n";
  }
  return out;
}

}  // namespace kdi
