#pragma once

// JSON mappings for the external JSONL/JSON schemas. Decoders are strict:
// missing, ill-typed and unknown fields throw Error(SchemaViolation, field).

#include <nlohmann/json.hpp>

#include "vulncur/model.hpp"

namespace vulncur::json_io {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

ordered_json to_json(const FunctionChangeRecord& r);
FunctionChangeRecord change_record_from_json(const json& j);

ordered_json to_json(const NvdEntry& e);
NvdEntry nvd_entry_from_json(const json& j);

ordered_json to_json(const LabeledFunction& f);
/// Also checks the label/labeler/version invariants and that `digest`
/// matches the digest of `code`.
LabeledFunction labeled_function_from_json(const json& j);

ordered_json split_entry_to_json(const std::string& id, SplitName split);

ordered_json to_json(const FunctionPair& p);
FunctionPair function_pair_from_json(const json& j);

ordered_json to_json(const PredictionRecord& p);
PredictionRecord prediction_from_json(const json& j);

ordered_json to_json(const EvalReport& r);
ordered_json to_json(const PairOutcomeReport& r);

ordered_json to_json(const AuditSample& s);
AuditSample audit_sample_from_json(const json& j);

ordered_json to_json(const AnnotatorVote& v);
AnnotatorVote annotator_vote_from_json(const json& j);

ordered_json to_json(const AuditResolution& r);

/// Rounds to `places` decimals, half away from zero.
double round_to(double value, int places);

}  // namespace vulncur::json_io
