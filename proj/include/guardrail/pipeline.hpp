#pragma once

#include <memory>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "guardrail/backends.hpp"
#include "guardrail/customizer.hpp"
#include "guardrail/grounding.hpp"
#include "guardrail/safety.hpp"
#include "guardrail/types.hpp"

namespace guardrail {

using BackendHandle = std::variant<std::shared_ptr<ModerationBackend>,
                                   std::shared_ptr<GenerationBackend>,
                                   std::shared_ptr<EmbeddingBackend>,
                                   std::shared_ptr<ReasoningBackend>,
                                   std::shared_ptr<FixingBackend>>;

// The five closed slots: moderation, generation, embedding, reasoning, fixing.
// Registration is last-write-wins.
class BackendRegistry {
public:
    void register_backend(std::string_view slot, BackendHandle backend);

    std::shared_ptr<ModerationBackend> moderation() const;   // throws BackendUnavailable
    std::shared_ptr<GenerationBackend> generation() const;
    std::shared_ptr<EmbeddingBackend> embedding() const;
    std::shared_ptr<ReasoningBackend> reasoning() const;
    std::shared_ptr<FixingBackend> fixing() const;

    bool has(std::string_view slot) const;

private:
    std::shared_ptr<ModerationBackend> moderation_;
    std::shared_ptr<GenerationBackend> generation_;
    std::shared_ptr<EmbeddingBackend> embedding_;
    std::shared_ptr<ReasoningBackend> reasoning_;
    std::shared_ptr<FixingBackend> fixing_;
};

// Stage names as they appear in traces, in execution order.
namespace stage {
inline constexpr const char* kInputSafety = "input_safety";
inline constexpr const char* kGrounding = "grounding";
inline constexpr const char* kInference = "inference";
inline constexpr const char* kHallucinationDetection = "hallucination_detection";
inline constexpr const char* kCustomizer = "customizer";
inline constexpr const char* kRepairer = "repairer";
}  // namespace stage

// Orchestrates the fixed stage sequence: input safety check, grounding,
// inference, hallucination detection, customization, repair. Execution is
// per-request and stateless; registry, index and wrapper mutations take an
// exclusive lock and never affect requests already in flight.
class Pipeline {
public:
    void register_backend(std::string_view slot, BackendHandle backend);
    void set_index(std::shared_ptr<const grounding::VectorIndex> index);
    void set_wrappers(std::vector<customizer::Wrapper> wrappers);
    void set_token_sets(safety::YesNoTokenSets sets);

    PipelineResponse run(const Query& query, const PipelinePolicy& policy) const;

private:
    struct Snapshot {
        BackendRegistry registry;
        std::shared_ptr<const grounding::VectorIndex> index;
        std::shared_ptr<const std::vector<customizer::Wrapper>> wrappers;
        safety::YesNoTokenSets token_sets;
    };
    Snapshot snapshot() const;

    mutable std::shared_mutex mutex_;
    BackendRegistry registry_;
    std::shared_ptr<const grounding::VectorIndex> index_;
    std::shared_ptr<const std::vector<customizer::Wrapper>> wrappers_ =
        std::make_shared<const std::vector<customizer::Wrapper>>();
    safety::YesNoTokenSets token_sets_ = safety::default_yes_no_sets();
};

}  // namespace guardrail
