#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace guardrail {

// A user query entering the pipeline. metadata is caller-supplied and opaque.
struct Query {
    std::string text;
    std::map<std::string, std::string> metadata;
};

// Trims ASCII whitespace on both ends.
std::string trim(const std::string& s);

// A query is valid when its trimmed text is non-empty.
bool is_valid_query(const Query& q);

enum class UnsafeInputAction { kReject, kAnnotate };
enum class IndeterminateAction { kTreatHallucinated, kTreatSafe };

struct StageFlags {
    bool input_safety = true;
    bool grounding = true;
    bool hallucination_detection = true;
    bool customizer = true;
    bool repairer = true;
};

struct PipelinePolicy {
    StageFlags stages_enabled;
    UnsafeInputAction unsafe_input_action = UnsafeInputAction::kReject;
    IndeterminateAction indeterminate_hallucination_action =
        IndeterminateAction::kTreatHallucinated;
    int top_k_contexts = 3;
    double halu_threshold = 0.5;
    int top_k_tokens = 10;
    double input_unsafe_threshold = 0.5;
    std::string rejection_message = "Your query was rejected by the safety policy.";
};

// Throws std::invalid_argument when a policy field is out of range.
void validate_policy(const PipelinePolicy& policy);

// One executed stage: name, a short human-readable verdict, wall time, and a
// stage-specific JSON payload.
struct StageRecord {
    std::string stage_name;
    std::string verdict_summary;
    std::int64_t elapsed_micros = 0;
    nlohmann::json artifacts;
};

struct PipelineTrace {
    std::vector<StageRecord> stages;
};

enum class ResponseStatus { kAnswered, kRejected, kRepaired, kFlagged };

std::string to_string(ResponseStatus status);
ResponseStatus response_status_from_string(const std::string& s);

struct PipelineResponse {
    std::string final_text;
    ResponseStatus status = ResponseStatus::kAnswered;
    PipelineTrace trace;
};

nlohmann::json to_json(const StageRecord& record);
nlohmann::json to_json(const PipelineTrace& trace);
nlohmann::json to_json(const PipelineResponse& response);

// Trace JSON with elapsed_micros zeroed, for golden-file comparison and
// deterministic diffing.
nlohmann::json canonical_trace_json(const PipelineTrace& trace);

}  // namespace guardrail
