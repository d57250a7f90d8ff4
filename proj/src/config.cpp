#include "guardrail/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include "guardrail/http_backends.hpp"
#include "guardrail/mock_backends.hpp"

namespace guardrail {

namespace {

const std::set<std::string> kSlots = {"moderation", "generation", "embedding", "reasoning",
                                      "fixing"};

UnsafeInputAction unsafe_action_from_string(const std::string& s, const std::string& field) {
    if (s == "reject") return UnsafeInputAction::kReject;
    if (s == "annotate") return UnsafeInputAction::kAnnotate;
    throw ConfigError(field, "expected 'reject' or 'annotate', got '" + s + "'");
}

IndeterminateAction indeterminate_action_from_string(const std::string& s,
                                                     const std::string& field) {
    if (s == "treat_hallucinated") return IndeterminateAction::kTreatHallucinated;
    if (s == "treat_safe") return IndeterminateAction::kTreatSafe;
    throw ConfigError(field, "expected 'treat_hallucinated' or 'treat_safe', got '" + s + "'");
}

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key, const std::string& path, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(path + "." + key, "wrong type");
    }
}

}  // namespace

nlohmann::json policy_to_json(const PipelinePolicy& p) {
    return nlohmann::json{
        {"stages_enabled",
         {{"input_safety", p.stages_enabled.input_safety},
          {"grounding", p.stages_enabled.grounding},
          {"hallucination_detection", p.stages_enabled.hallucination_detection},
          {"customizer", p.stages_enabled.customizer},
          {"repairer", p.stages_enabled.repairer}}},
        {"unsafe_input_action",
         p.unsafe_input_action == UnsafeInputAction::kReject ? "reject" : "annotate"},
        {"indeterminate_hallucination_action",
         p.indeterminate_hallucination_action == IndeterminateAction::kTreatHallucinated
             ? "treat_hallucinated"
             : "treat_safe"},
        {"top_k_contexts", p.top_k_contexts},
        {"halu_threshold", p.halu_threshold},
        {"top_k_tokens", p.top_k_tokens},
        {"input_unsafe_threshold", p.input_unsafe_threshold},
        {"rejection_message", p.rejection_message}};
}

PipelinePolicy policy_from_json(const nlohmann::json& j) {
    PipelinePolicy p;
    if (j.contains("stages_enabled")) {
        const auto& s = j.at("stages_enabled");
        p.stages_enabled.input_safety =
            get_field(s, "input_safety", "policy.stages_enabled", true);
        p.stages_enabled.grounding = get_field(s, "grounding", "policy.stages_enabled", true);
        p.stages_enabled.hallucination_detection =
            get_field(s, "hallucination_detection", "policy.stages_enabled", true);
        p.stages_enabled.customizer = get_field(s, "customizer", "policy.stages_enabled", true);
        p.stages_enabled.repairer = get_field(s, "repairer", "policy.stages_enabled", true);
    }
    if (j.contains("unsafe_input_action")) {
        p.unsafe_input_action = unsafe_action_from_string(
            j.at("unsafe_input_action").get<std::string>(), "policy.unsafe_input_action");
    }
    if (j.contains("indeterminate_hallucination_action")) {
        p.indeterminate_hallucination_action = indeterminate_action_from_string(
            j.at("indeterminate_hallucination_action").get<std::string>(),
            "policy.indeterminate_hallucination_action");
    }
    p.top_k_contexts = get_field(j, "top_k_contexts", "policy", p.top_k_contexts);
    p.halu_threshold = get_field(j, "halu_threshold", "policy", p.halu_threshold);
    p.top_k_tokens = get_field(j, "top_k_tokens", "policy", p.top_k_tokens);
    p.input_unsafe_threshold =
        get_field(j, "input_unsafe_threshold", "policy", p.input_unsafe_threshold);
    p.rejection_message = get_field(j, "rejection_message", "policy", p.rejection_message);
    return p;
}

ServiceConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("(root)", "config must be a JSON object");
    ServiceConfig config;
    config.listen_address = get_field(doc, "listen_address", "(root)", config.listen_address);
    if (doc.contains("policy")) config.policy = policy_from_json(doc.at("policy"));
    if (doc.contains("backends")) {
        const auto& backends = doc.at("backends");
        if (!backends.is_object()) throw ConfigError("backends", "must be an object");
        for (const auto& [slot, desc_json] : backends.items()) {
            std::string path = "backends." + slot;
            if (!kSlots.count(slot)) throw ConfigError(path, "unknown slot");
            BackendDescriptor desc;
            desc.kind = get_field(desc_json, "kind", path, std::string("mock"));
            desc.endpoint = get_field(desc_json, "endpoint", path, std::string{});
            if (desc_json.contains("config")) desc.config = desc_json.at("config");
            config.backends[slot] = std::move(desc);
        }
    }
    config.corpus_path = get_field(doc, "corpus_path", "(root)", std::string{});
    if (doc.contains("index_strategy")) {
        try {
            config.index_strategy =
                grounding::index_strategy_from_string(doc.at("index_strategy").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("index_strategy", e.what());
        }
    }
    if (doc.contains("wrappers")) {
        const auto& wrappers = doc.at("wrappers");
        if (!wrappers.is_array()) throw ConfigError("wrappers", "must be an array");
        for (size_t i = 0; i < wrappers.size(); ++i) {
            std::string path = "wrappers[" + std::to_string(i) + "]";
            const auto& w = wrappers[i];
            WrapperSpec spec;
            spec.name = get_field(w, "name", path, std::string{});
            if (spec.name.empty()) throw ConfigError(path + ".name", "required");
            spec.blocklist = get_field(w, "blocklist", path, std::vector<std::string>{});
            if (w.contains("status_map")) {
                for (const auto& [url, status] : w.at("status_map").items()) {
                    if (!status.is_number_integer()) {
                        throw ConfigError(path + ".status_map." + url, "must be an integer");
                    }
                    spec.status_map[url] = status.get<int>();
                }
            }
            spec.default_status = get_field(w, "default_status", path, 200);
            spec.reachability = get_field(w, "reachability", path, std::string("mock"));
            std::string failure =
                get_field(w, "probe_failure", path, std::string("treat_unreachable"));
            if (failure == "treat_unreachable") {
                spec.probe_failure = customizer::ProbeFailurePolicy::kTreatUnreachable;
            } else if (failure == "skip") {
                spec.probe_failure = customizer::ProbeFailurePolicy::kSkip;
            } else {
                throw ConfigError(path + ".probe_failure",
                                  "expected 'treat_unreachable' or 'skip'");
            }
            config.wrappers.push_back(std::move(spec));
        }
    }
    return config;
}

ServiceConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("(file)", "cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("(file)", std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

namespace {

std::optional<std::string> env_value(const char* name) {
    const char* value = std::getenv(name);
    if (!value) return std::nullopt;
    return std::string(value);
}

double env_double(const std::string& value, const std::string& field) {
    try {
        size_t consumed = 0;
        double parsed = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument("trailing characters");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(field, "not a number: '" + value + "'");
    }
}

int env_int(const std::string& value, const std::string& field) {
    try {
        size_t consumed = 0;
        int parsed = std::stoi(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument("trailing characters");
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(field, "not an integer: '" + value + "'");
    }
}

}  // namespace

void apply_env_overrides(ServiceConfig& config) {
    if (auto v = env_value("GUARDRAIL_LISTEN_ADDRESS")) config.listen_address = *v;
    if (auto v = env_value("GUARDRAIL_CORPUS_PATH")) config.corpus_path = *v;
    if (auto v = env_value("GUARDRAIL_INDEX_STRATEGY")) {
        try {
            config.index_strategy = grounding::index_strategy_from_string(*v);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("env.GUARDRAIL_INDEX_STRATEGY", e.what());
        }
    }
    if (auto v = env_value("GUARDRAIL_HALU_THRESHOLD")) {
        config.policy.halu_threshold = env_double(*v, "env.GUARDRAIL_HALU_THRESHOLD");
    }
    if (auto v = env_value("GUARDRAIL_TOP_K_CONTEXTS")) {
        config.policy.top_k_contexts = env_int(*v, "env.GUARDRAIL_TOP_K_CONTEXTS");
    }
    if (auto v = env_value("GUARDRAIL_TOP_K_TOKENS")) {
        config.policy.top_k_tokens = env_int(*v, "env.GUARDRAIL_TOP_K_TOKENS");
    }
    if (auto v = env_value("GUARDRAIL_INPUT_UNSAFE_THRESHOLD")) {
        config.policy.input_unsafe_threshold =
            env_double(*v, "env.GUARDRAIL_INPUT_UNSAFE_THRESHOLD");
    }
    if (auto v = env_value("GUARDRAIL_UNSAFE_INPUT_ACTION")) {
        config.policy.unsafe_input_action =
            unsafe_action_from_string(*v, "env.GUARDRAIL_UNSAFE_INPUT_ACTION");
    }
    if (auto v = env_value("GUARDRAIL_INDETERMINATE_HALLUCINATION_ACTION")) {
        config.policy.indeterminate_hallucination_action = indeterminate_action_from_string(
            *v, "env.GUARDRAIL_INDETERMINATE_HALLUCINATION_ACTION");
    }
    if (auto v = env_value("GUARDRAIL_REJECTION_MESSAGE")) {
        config.policy.rejection_message = *v;
    }
}

void validate_config(const ServiceConfig& config) {
    const PipelinePolicy& p = config.policy;
    if (p.halu_threshold < 0.0 || p.halu_threshold > 1.0) {
        throw ConfigError("policy.halu_threshold", "must be in [0,1]");
    }
    if (p.input_unsafe_threshold < 0.0 || p.input_unsafe_threshold > 1.0) {
        throw ConfigError("policy.input_unsafe_threshold", "must be in [0,1]");
    }
    if (p.top_k_contexts < 1) throw ConfigError("policy.top_k_contexts", "must be >= 1");
    if (p.top_k_tokens < 1) throw ConfigError("policy.top_k_tokens", "must be >= 1");

    if (config.listen_address.find(':') == std::string::npos) {
        throw ConfigError("listen_address", "expected host:port");
    }

    auto require_backend = [&](const char* slot, const char* stage_name) {
        if (!config.backends.count(slot)) {
            throw ConfigError(std::string("backends.") + slot,
                              std::string("required: stage ") + stage_name + " is enabled");
        }
    };
    if (p.stages_enabled.input_safety) require_backend("moderation", "input_safety");
    require_backend("generation", "inference");
    if (p.stages_enabled.grounding) require_backend("embedding", "grounding");
    if (p.stages_enabled.repairer) require_backend("fixing", "repairer");

    if (p.stages_enabled.grounding && config.corpus_path.empty()) {
        throw ConfigError("corpus_path", "required: grounding stage is enabled");
    }
    if (!p.stages_enabled.grounding && !config.corpus_path.empty()) {
        throw ConfigError("corpus_path", "set but grounding stage is disabled");
    }

    std::set<std::string> wrapper_names;
    for (size_t i = 0; i < config.wrappers.size(); ++i) {
        std::string path = "wrappers[" + std::to_string(i) + "]";
        const auto& w = config.wrappers[i];
        if (w.name != "url_warning") throw ConfigError(path + ".name", "unknown wrapper");
        if (!wrapper_names.insert(w.name).second) {
            throw ConfigError(path + ".name", "duplicate wrapper name");
        }
        if (w.reachability != "mock" && w.reachability != "http") {
            throw ConfigError(path + ".reachability", "expected 'mock' or 'http'");
        }
    }

    for (const auto& [slot, desc] : config.backends) {
        std::string path = "backends." + slot;
        if (desc.kind != "mock" && desc.kind != "http") {
            throw ConfigError(path + ".kind", "expected 'mock' or 'http'");
        }
        if (desc.kind == "http" && desc.endpoint.empty()) {
            throw ConfigError(path + ".endpoint", "required for kind=http");
        }
    }
}

namespace {

std::shared_ptr<ModerationBackend> make_moderation(const BackendDescriptor& desc) {
    if (desc.kind == "http") return std::make_shared<HttpModerationBackend>(desc.endpoint);
    std::map<std::string, double> rules;
    if (desc.config.contains("rules")) {
        for (const auto& [keyword, score] : desc.config.at("rules").items()) {
            rules[keyword] = score.get<double>();
        }
    }
    double default_score = desc.config.value("default_score", 0.0);
    return std::make_shared<MockModerationBackend>(std::move(rules), default_score);
}

std::shared_ptr<GenerationBackend> make_generation(const BackendDescriptor& desc) {
    if (desc.kind == "http") return std::make_shared<HttpGenerationBackend>(desc.endpoint);
    std::string fallback = desc.config.value("fallback", "echo");
    auto mock = std::make_shared<MockGenerationBackend>(
        fallback == "fail" ? MockGenerationFallback::kFail : MockGenerationFallback::kEchoPrompt);
    if (desc.config.contains("script")) {
        for (const auto& entry : desc.config.at("script")) {
            std::vector<std::pair<std::string, double>> tokens;
            for (const auto& candidate : entry.value("candidates", nlohmann::json::array())) {
                tokens.emplace_back(candidate.at(0).get<std::string>(),
                                    candidate.at(1).get<double>());
            }
            if (entry.value("logits", false)) {
                mock->script_logits(entry.at("prompt").get<std::string>(),
                                    entry.value("text", std::string{}), std::move(tokens));
            } else {
                mock->script(entry.at("prompt").get<std::string>(),
                             entry.value("text", std::string{}), std::move(tokens));
            }
        }
    }
    return mock;
}

std::shared_ptr<EmbeddingBackend> make_embedding(const BackendDescriptor& desc) {
    if (desc.kind == "http") return std::make_shared<HttpEmbeddingBackend>(desc.endpoint);
    return std::make_shared<MockEmbeddingBackend>();
}

std::shared_ptr<ReasoningBackend> make_reasoning(const BackendDescriptor& desc) {
    if (desc.kind == "http") return std::make_shared<HttpReasoningBackend>(desc.endpoint);
    auto mock = std::make_shared<MockReasoningBackend>();
    if (desc.config.contains("fallback_reason")) {
        mock->set_fallback(desc.config.at("fallback_reason").get<std::string>());
    }
    if (desc.config.contains("script")) {
        for (const auto& entry : desc.config.at("script")) {
            mock->script(entry.at("question").get<std::string>(),
                         entry.value("context", std::string{}),
                         entry.at("answer").get<std::string>(),
                         entry.at("reason").get<std::string>());
        }
    }
    return mock;
}

std::shared_ptr<FixingBackend> make_fixing(const BackendDescriptor& desc) {
    if (desc.kind == "http") return std::make_shared<HttpFixingBackend>(desc.endpoint);
    std::string mode = desc.config.value("mode", "scripted");
    auto mock = std::make_shared<MockFixingBackend>(
        mode == "echo" ? MockFixingMode::kEcho : MockFixingMode::kScripted);
    if (desc.config.contains("fallback")) {
        mock->set_fallback(desc.config.at("fallback").get<std::string>());
    }
    if (desc.config.contains("script")) {
        for (const auto& entry : desc.config.at("script")) {
            mock->script(entry.at("prompt").get<std::string>(),
                         entry.at("completion").get<std::string>());
        }
    }
    return mock;
}

}  // namespace

BackendHandle make_backend(const std::string& slot, const BackendDescriptor& descriptor) {
    if (slot == "moderation") return make_moderation(descriptor);
    if (slot == "generation") return make_generation(descriptor);
    if (slot == "embedding") return make_embedding(descriptor);
    if (slot == "reasoning") return make_reasoning(descriptor);
    if (slot == "fixing") return make_fixing(descriptor);
    throw UnknownSlot(slot);
}

Runtime build_runtime(const ServiceConfig& config) {
    validate_config(config);

    Runtime runtime;
    runtime.policy = config.policy;
    runtime.pipeline = std::make_shared<Pipeline>();

    for (const auto& [slot, desc] : config.backends) {
        BackendHandle handle = make_backend(slot, desc);
        runtime.registry.register_backend(slot, handle);
        runtime.pipeline->register_backend(slot, handle);
    }

    if (config.policy.stages_enabled.grounding) {
        auto corpus = grounding::read_corpus_file(config.corpus_path);
        auto index = std::make_shared<grounding::VectorIndex>(grounding::build_index(
            corpus, config.index_strategy, *runtime.registry.embedding()));
        runtime.index = index;
        runtime.pipeline->set_index(index);
    }

    for (const auto& spec : config.wrappers) {
        std::shared_ptr<customizer::BlocklistClient> blocklist =
            std::make_shared<customizer::MockBlocklistClient>(
                std::set<std::string>(spec.blocklist.begin(), spec.blocklist.end()));
        std::shared_ptr<customizer::ReachabilityClient> reachability;
        if (spec.reachability == "http") {
            reachability = std::make_shared<HttpReachabilityClient>();
        } else {
            reachability = std::make_shared<customizer::MockReachabilityClient>(
                spec.status_map, spec.default_status);
        }
        runtime.wrappers.push_back(
            customizer::make_url_warning_wrapper(blocklist, reachability, spec.probe_failure));
    }
    runtime.pipeline->set_wrappers(runtime.wrappers);

    return runtime;
}

}  // namespace guardrail
