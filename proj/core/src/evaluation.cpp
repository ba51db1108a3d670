#include "vulncur/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "vulncur/error.hpp"
#include "vulncur/jsonl.hpp"
#include "vulncur/serialize.hpp"

namespace vulncur::evaluation {

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Predictions index_predictions(std::span<const PredictionRecord> records) {
  Predictions preds;
  for (const auto& p : records) {
    if (!preds.emplace(p.record_id, p.score).second) {
      throw Error(Errc::DuplicatePrediction, p.record_id);
    }
  }
  return preds;
}

Predictions read_predictions(const std::filesystem::path& path) {
  Predictions preds;
  for (const auto& line : jsonl::read_lines(path)) {
    PredictionRecord p;
    try {
      p = json_io::prediction_from_json(jsonl::parse_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), e.subject(), line.number, "invalid prediction");
    }
    if (!preds.emplace(p.record_id, p.score).second) {
      throw Error(Errc::DuplicatePrediction, p.record_id, line.number);
    }
  }
  return preds;
}

ConfusionCounts confusion(const Predictions& preds, std::span<const LabeledFunction> labels,
                          double threshold, const std::vector<std::string>* known_ids) {
  if (known_ids) {
    std::unordered_set<std::string_view> known(known_ids->begin(), known_ids->end());
    for (const auto& [id, _] : preds) {
      if (!known.contains(id)) throw Error(Errc::UnknownRecord, id);
    }
  }
  ConfusionCounts c;
  for (const auto& f : labels) {
    auto it = preds.find(f.id);
    if (it == preds.end()) throw Error(Errc::MissingPrediction, f.id);
    const bool predicted = it->second >= threshold;
    if (f.is_vulnerable()) {
      (predicted ? c.tp : c.fn) += 1;
    } else {
      (predicted ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw Error(Errc::EmptyEvaluation, {});
  return ratio(c.tp + c.tn, c.total());
}

double precision(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp); }
double recall(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn); }
double false_positive_rate(const ConfusionCounts& c) { return ratio(c.fp, c.fp + c.tn); }
double false_negative_rate(const ConfusionCounts& c) { return ratio(c.fn, c.fn + c.tp); }

double f1(const ConfusionCounts& c) {
  if (c.tp == 0) return 0.0;
  const double p = precision(c);
  const double r = recall(c);
  return 2.0 * p * r / (p + r);
}

VdScore vd_score(std::span<const Scored> samples, double r) {
  std::int64_t positives = 0;
  for (const auto& s : samples) positives += s.vulnerable ? 1 : 0;
  const std::int64_t negatives = static_cast<std::int64_t>(samples.size()) - positives;
  if (positives == 0) throw Error(Errc::NoVulnerableSamples, {});
  if (negatives == 0) throw Error(Errc::NoBenignSamples, {});

  std::vector<Scored> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Scored& a, const Scored& b) { return a.score > b.score; });

  // Threshold above every score: nothing flagged.
  VdScore best{1.0, std::nextafter(sorted.front().score, std::numeric_limits<double>::infinity()),
               0.0};
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double t = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == t; ++i) {
      (sorted[i].vulnerable ? tp : fp) += 1;
    }
    const double fpr = ratio(fp, negatives);
    if (fpr > r) continue;
    const double fnr = ratio(positives - tp, positives);
    // Descending thresholds: on a full tie the earlier (higher) one stays.
    if (fnr < best.vd_s || (fnr == best.vd_s && fpr < best.fpr)) best = {fnr, t, fpr};
  }
  return best;
}

VdScore vd_score(const Predictions& preds, std::span<const LabeledFunction> labels, double r) {
  std::vector<Scored> samples;
  samples.reserve(labels.size());
  for (const auto& f : labels) {
    auto it = preds.find(f.id);
    if (it == preds.end()) throw Error(Errc::MissingPrediction, f.id);
    samples.push_back({it->second, f.is_vulnerable()});
  }
  return vd_score(samples, r);
}

PairOutcome classify_pair(bool vulnerable_predicted_vulnerable, bool benign_predicted_vulnerable) {
  if (vulnerable_predicted_vulnerable) {
    return benign_predicted_vulnerable ? PairOutcome::BothVulnerable : PairOutcome::Correct;
  }
  return benign_predicted_vulnerable ? PairOutcome::Reversed : PairOutcome::BothBenign;
}

PairOutcomeReport pairwise_eval(std::span<const FunctionPair> pairs, const Predictions& preds,
                                double threshold) {
  auto predicted = [&](const std::string& id) {
    auto it = preds.find(id);
    if (it == preds.end()) throw Error(Errc::MissingPrediction, id);
    return it->second >= threshold;
  };
  PairOutcomeReport report;
  for (const auto& p : pairs) {
    const auto outcome = classify_pair(predicted(p.vulnerable_id), predicted(p.benign_id));
    ++report.counts[static_cast<int>(outcome)];
  }
  report.total_pairs = static_cast<std::int64_t>(pairs.size());
  for (int i = 0; i < 4; ++i) {
    report.percentages[i] = json_io::round_to(100.0 * ratio(report.counts[i], report.total_pairs), 2);
  }
  return report;
}

EvalReport evaluate(const Predictions& preds, std::span<const LabeledFunction> labels,
                    const EvalConfig& config) {
  if (!(config.fpr_tolerance >= 0.0 && config.fpr_tolerance <= 1.0)) {
    throw Error(Errc::InvalidArgument, "fpr_tolerance", std::nullopt, "must lie in [0,1]");
  }
  if (!(config.binary_threshold >= 0.0 && config.binary_threshold <= 1.0)) {
    throw Error(Errc::InvalidArgument, "binary_threshold", std::nullopt, "must lie in [0,1]");
  }
  EvalReport report;
  report.counts = confusion(preds, labels, config.binary_threshold);
  report.accuracy = accuracy(report.counts);
  report.f1 = f1(report.counts);
  report.precision = precision(report.counts);
  report.recall = recall(report.counts);
  report.fpr = false_positive_rate(report.counts);
  report.fnr = false_negative_rate(report.counts);
  const auto vds = vd_score(preds, labels, config.fpr_tolerance);
  report.vd_s = vds.vd_s;
  report.vd_s_threshold = vds.threshold;
  report.fpr_tolerance = config.fpr_tolerance;
  report.binary_threshold = config.binary_threshold;
  return report;
}

std::string format_table(const EvalReport& r, const PairOutcomeReport* pairs) {
  std::ostringstream out;
  out << std::fixed;
  auto row = [&](std::string_view name, auto value, int precision = 4) {
    out << std::left << std::setw(18) << name << std::right << std::setw(12)
        << std::setprecision(precision) << value << '\n';
  };
  row("samples", r.counts.total());
  row("tp", r.counts.tp);
  row("fp", r.counts.fp);
  row("tn", r.counts.tn);
  row("fn", r.counts.fn);
  row("accuracy", r.accuracy);
  row("precision", r.precision);
  row("recall", r.recall);
  row("f1", r.f1);
  row("fpr", r.fpr);
  row("fnr", r.fnr);
  row("vd_s", r.vd_s);
  row("vd_s_threshold", r.vd_s_threshold, 6);
  row("fpr_tolerance", r.fpr_tolerance);
  if (pairs) {
    row("pairs", pairs->total_pairs);
    for (int i = 0; i < 4; ++i) {
      const auto name = std::string(to_string(static_cast<PairOutcome>(i)));
      row(name + " count", pairs->counts[i]);
      row(name + " %", pairs->percentages[i], 2);
    }
  }
  return out.str();
}

}  // namespace vulncur::evaluation
