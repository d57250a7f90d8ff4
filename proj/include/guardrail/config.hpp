#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "guardrail/customizer.hpp"
#include "guardrail/grounding.hpp"
#include "guardrail/pipeline.hpp"
#include "guardrail/types.hpp"

namespace guardrail {

struct BackendDescriptor {
    std::string kind;      // "mock" | "http"
    std::string endpoint;  // required for http
    nlohmann::json config = nlohmann::json::object();
};

struct WrapperSpec {
    std::string name;  // currently only "url_warning"
    std::vector<std::string> blocklist;
    std::map<std::string, int> status_map;
    int default_status = 200;
    std::string reachability = "mock";  // "mock" | "http"
    customizer::ProbeFailurePolicy probe_failure =
        customizer::ProbeFailurePolicy::kTreatUnreachable;
};

struct ServiceConfig {
    std::string listen_address = "127.0.0.1:8080";
    PipelinePolicy policy;
    std::map<std::string, BackendDescriptor> backends;  // keyed by slot name
    std::string corpus_path;
    grounding::IndexStrategy index_strategy = grounding::IndexStrategy::kWholeKnowledge;
    std::vector<WrapperSpec> wrappers;
};

// Parses the config document. Throws ConfigError with a field path on any
// structural problem.
ServiceConfig parse_config(const nlohmann::json& doc);
ServiceConfig load_config_file(const std::string& path);

// GUARDRAIL_-prefixed environment variables override scalar fields
// (LISTEN_ADDRESS, CORPUS_PATH, INDEX_STRATEGY, HALU_THRESHOLD,
// TOP_K_CONTEXTS, TOP_K_TOKENS, INPUT_UNSAFE_THRESHOLD, UNSAFE_INPUT_ACTION,
// INDETERMINATE_HALLUCINATION_ACTION, REJECTION_MESSAGE).
void apply_env_overrides(ServiceConfig& config);

// Cross-field invariants: every enabled stage has its backend descriptor,
// corpus path present iff grounding is enabled, thresholds in range. Throws
// ConfigError naming the offending field.
void validate_config(const ServiceConfig& config);

nlohmann::json policy_to_json(const PipelinePolicy& policy);
PipelinePolicy policy_from_json(const nlohmann::json& j);

// Instantiates a backend from its descriptor (mock or http adapter).
BackendHandle make_backend(const std::string& slot, const BackendDescriptor& descriptor);

// Everything a running service needs, built from a validated config.
struct Runtime {
    PipelinePolicy policy;
    BackendRegistry registry;
    std::shared_ptr<const grounding::VectorIndex> index;  // null when grounding disabled
    std::vector<customizer::Wrapper> wrappers;
    std::shared_ptr<Pipeline> pipeline;
};

Runtime build_runtime(const ServiceConfig& config);

}  // namespace guardrail
