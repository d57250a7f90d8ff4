#include "guardrail/types.hpp"

#include <cctype>
#include <stdexcept>

namespace guardrail {

std::string trim(const std::string& s) {
    size_t begin = 0;
    size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

bool is_valid_query(const Query& q) { return !trim(q.text).empty(); }

void validate_policy(const PipelinePolicy& policy) {
    if (policy.halu_threshold < 0.0 || policy.halu_threshold > 1.0) {
        throw std::invalid_argument("halu_threshold must be in [0,1]");
    }
    if (policy.input_unsafe_threshold < 0.0 || policy.input_unsafe_threshold > 1.0) {
        throw std::invalid_argument("input_unsafe_threshold must be in [0,1]");
    }
    if (policy.top_k_contexts < 1) {
        throw std::invalid_argument("top_k_contexts must be >= 1");
    }
    if (policy.top_k_tokens < 1) {
        throw std::invalid_argument("top_k_tokens must be >= 1");
    }
}

std::string to_string(ResponseStatus status) {
    switch (status) {
        case ResponseStatus::kAnswered: return "answered";
        case ResponseStatus::kRejected: return "rejected";
        case ResponseStatus::kRepaired: return "repaired";
        case ResponseStatus::kFlagged: return "flagged";
    }
    return "answered";
}

ResponseStatus response_status_from_string(const std::string& s) {
    if (s == "answered") return ResponseStatus::kAnswered;
    if (s == "rejected") return ResponseStatus::kRejected;
    if (s == "repaired") return ResponseStatus::kRepaired;
    if (s == "flagged") return ResponseStatus::kFlagged;
    throw std::invalid_argument("unknown response status: " + s);
}

nlohmann::json to_json(const StageRecord& record) {
    return nlohmann::json{{"stage_name", record.stage_name},
                          {"verdict_summary", record.verdict_summary},
                          {"elapsed_micros", record.elapsed_micros},
                          {"artifacts", record.artifacts}};
}

nlohmann::json to_json(const PipelineTrace& trace) {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& record : trace.stages) stages.push_back(to_json(record));
    return nlohmann::json{{"stages", stages}};
}

nlohmann::json to_json(const PipelineResponse& response) {
    return nlohmann::json{{"final_text", response.final_text},
                          {"status", to_string(response.status)},
                          {"trace", to_json(response.trace)}};
}

nlohmann::json canonical_trace_json(const PipelineTrace& trace) {
    nlohmann::json j = to_json(trace);
    for (auto& stage : j["stages"]) stage["elapsed_micros"] = 0;
    return j;
}

}  // namespace guardrail
