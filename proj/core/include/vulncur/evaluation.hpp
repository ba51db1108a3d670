#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vulncur/model.hpp"

namespace vulncur::evaluation {

/// Scores keyed by labeled function id.
using Predictions = std::map<std::string, double>;

/// Raises DuplicatePrediction on a repeated id.
Predictions index_predictions(std::span<const PredictionRecord> records);

/// Reads prediction JSONL ({record_id, score}); MalformedLine,
/// SchemaViolation and DuplicatePrediction carry line numbers.
Predictions read_predictions(const std::filesystem::path& path);

/// Tally at `threshold` (score >= threshold predicts vulnerable) over
/// `labels`. Raises MissingPrediction for a label without a score. When
/// `known_ids` is given, a prediction for an id outside it raises UnknownRecord.
ConfusionCounts confusion(const Predictions& preds, std::span<const LabeledFunction> labels,
                          double threshold, const std::vector<std::string>* known_ids = nullptr);

/// (tp + tn) / total. Raises EmptyEvaluation on zero counts.
double accuracy(const ConfusionCounts& c);
/// 2PR / (P + R); 0 when tp = 0.
double f1(const ConfusionCounts& c);
double precision(const ConfusionCounts& c);
double recall(const ConfusionCounts& c);
double false_positive_rate(const ConfusionCounts& c);
double false_negative_rate(const ConfusionCounts& c);

struct VdScore {
  double vd_s = 1.0;       // FNR at the chosen threshold
  double threshold = 0.0;
  double fpr = 0.0;

  bool operator==(const VdScore&) const = default;
};

/// One scored sample.
struct Scored {
  double score;
  bool vulnerable;
};

/// FNR @ (FPR <= r): over thresholds {distinct scores} U {just above the
/// maximum}, the lowest FNR whose FPR <= r; ties go to the lower FPR, then
/// the higher threshold. Raises NoVulnerableSamples / NoBenignSamples.
VdScore vd_score(std::span<const Scored> samples, double r);

VdScore vd_score(const Predictions& preds, std::span<const LabeledFunction> labels, double r);

PairOutcome classify_pair(bool vulnerable_predicted_vulnerable, bool benign_predicted_vulnerable);

/// Raises MissingPrediction when either side of a pair has no score.
PairOutcomeReport pairwise_eval(std::span<const FunctionPair> pairs, const Predictions& preds,
                                double threshold);

/// Binary metrics at config.binary_threshold plus VD-S at config.fpr_tolerance.
EvalReport evaluate(const Predictions& preds, std::span<const LabeledFunction> labels,
                    const EvalConfig& config);

/// Fixed-width text rendering of both reports.
std::string format_table(const EvalReport& report, const PairOutcomeReport* pairs = nullptr);

}  // namespace vulncur::evaluation
