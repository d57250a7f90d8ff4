#include "guardrail/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <mutex>
#include <stdexcept>

#include "guardrail/repairer.hpp"

namespace guardrail {

namespace {

constexpr const char* kSlotNames[] = {"moderation", "generation", "embedding", "reasoning",
                                      "fixing"};

bool is_known_slot(std::string_view slot) {
    for (const char* name : kSlotNames) {
        if (slot == name) return true;
    }
    return false;
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

// Runs a stage body, times it, and appends the record. The body fills in the
// verdict summary and artifacts. Backend failures surface as StageFailure;
// missing registrations stay BackendUnavailable.
template <typename Body>
void run_stage(std::vector<StageRecord>& trace, const char* name, Body&& body) {
    StageRecord record;
    record.stage_name = name;
    auto start = std::chrono::steady_clock::now();
    try {
        body(record);
    } catch (const BackendUnavailable&) {
        throw;
    } catch (const StageFailure&) {
        throw;
    } catch (const GuardrailError& e) {
        throw StageFailure(name, e.what());
    }
    auto end = std::chrono::steady_clock::now();
    record.elapsed_micros =
        std::chrono::duration_cast<std::chrono::microseconds>(end - start).count();
    trace.push_back(std::move(record));
}

}  // namespace

void BackendRegistry::register_backend(std::string_view slot, BackendHandle backend) {
    if (!is_known_slot(slot)) throw UnknownSlot(std::string(slot));
    if (slot == "moderation") {
        if (auto* p = std::get_if<std::shared_ptr<ModerationBackend>>(&backend)) {
            moderation_ = *p;
            return;
        }
    } else if (slot == "generation") {
        if (auto* p = std::get_if<std::shared_ptr<GenerationBackend>>(&backend)) {
            generation_ = *p;
            return;
        }
    } else if (slot == "embedding") {
        if (auto* p = std::get_if<std::shared_ptr<EmbeddingBackend>>(&backend)) {
            embedding_ = *p;
            return;
        }
    } else if (slot == "reasoning") {
        if (auto* p = std::get_if<std::shared_ptr<ReasoningBackend>>(&backend)) {
            reasoning_ = *p;
            return;
        }
    } else if (slot == "fixing") {
        if (auto* p = std::get_if<std::shared_ptr<FixingBackend>>(&backend)) {
            fixing_ = *p;
            return;
        }
    }
    throw SlotMismatch(std::string(slot));
}

std::shared_ptr<ModerationBackend> BackendRegistry::moderation() const {
    if (!moderation_) throw BackendUnavailable("moderation");
    return moderation_;
}

std::shared_ptr<GenerationBackend> BackendRegistry::generation() const {
    if (!generation_) throw BackendUnavailable("generation");
    return generation_;
}

std::shared_ptr<EmbeddingBackend> BackendRegistry::embedding() const {
    if (!embedding_) throw BackendUnavailable("embedding");
    return embedding_;
}

std::shared_ptr<ReasoningBackend> BackendRegistry::reasoning() const {
    if (!reasoning_) throw BackendUnavailable("reasoning");
    return reasoning_;
}

std::shared_ptr<FixingBackend> BackendRegistry::fixing() const {
    if (!fixing_) throw BackendUnavailable("fixing");
    return fixing_;
}

bool BackendRegistry::has(std::string_view slot) const {
    if (!is_known_slot(slot)) throw UnknownSlot(std::string(slot));
    if (slot == "moderation") return moderation_ != nullptr;
    if (slot == "generation") return generation_ != nullptr;
    if (slot == "embedding") return embedding_ != nullptr;
    if (slot == "reasoning") return reasoning_ != nullptr;
    return fixing_ != nullptr;
}

void Pipeline::register_backend(std::string_view slot, BackendHandle backend) {
    std::unique_lock lock(mutex_);
    registry_.register_backend(slot, std::move(backend));
}

void Pipeline::set_index(std::shared_ptr<const grounding::VectorIndex> index) {
    std::unique_lock lock(mutex_);
    index_ = std::move(index);
}

void Pipeline::set_wrappers(std::vector<customizer::Wrapper> wrappers) {
    std::unique_lock lock(mutex_);
    wrappers_ = std::make_shared<const std::vector<customizer::Wrapper>>(std::move(wrappers));
}

void Pipeline::set_token_sets(safety::YesNoTokenSets sets) {
    safety::validate_token_sets(sets);
    std::unique_lock lock(mutex_);
    token_sets_ = std::move(sets);
}

Pipeline::Snapshot Pipeline::snapshot() const {
    std::shared_lock lock(mutex_);
    return Snapshot{registry_, index_, wrappers_, token_sets_};
}

PipelineResponse Pipeline::run(const Query& query, const PipelinePolicy& policy) const {
    if (!is_valid_query(query)) {
        throw std::invalid_argument("query text is empty");
    }
    validate_policy(policy);
    Snapshot snap = snapshot();

    PipelineResponse response;
    auto& trace = response.trace.stages;

    bool input_flagged = false;
    bool rejected = false;

    if (policy.stages_enabled.input_safety) {
        auto moderation = snap.registry.moderation();
        run_stage(trace, stage::kInputSafety, [&](StageRecord& record) {
            auto verdict =
                safety::check_input(query, *moderation, policy.input_unsafe_threshold);
            bool unsafe = verdict.label == safety::SafetyVerdict::Label::kUnsafe;
            record.artifacts = {
                {"label", unsafe ? "unsafe" : "safe"},
                {"score", verdict.score},
            };
            if (!unsafe) {
                record.verdict_summary = "safe (score=" + fmt3(verdict.score) + ")";
            } else if (policy.unsafe_input_action == UnsafeInputAction::kReject) {
                record.verdict_summary = "unsafe (score=" + fmt3(verdict.score) + "): rejected";
                record.artifacts["action"] = "reject";
                rejected = true;
            } else {
                record.verdict_summary = "unsafe (score=" + fmt3(verdict.score) + "): annotated";
                record.artifacts["action"] = "annotate";
                input_flagged = true;
            }
        });
        if (rejected) {
            response.final_text = policy.rejection_message;
            response.status = ResponseStatus::kRejected;
            return response;
        }
    }

    std::string prompt = query.text;
    std::string context;
    if (policy.stages_enabled.grounding) {
        if (!snap.index) throw BackendUnavailable("grounding index");
        auto embedding = snap.registry.embedding();
        run_stage(trace, stage::kGrounding, [&](StageRecord& record) {
            auto grounded =
                grounding::ground_query(query, *snap.index, policy.top_k_contexts, *embedding);
            prompt = grounded.prompt;
            context = grounding::context_text(grounded.hits);
            nlohmann::json hits = nlohmann::json::array();
            for (const auto& hit : grounded.hits) {
                hits.push_back({{"id", hit.record.id}, {"similarity", hit.similarity}});
            }
            record.artifacts = {{"k", policy.top_k_contexts}, {"hits", hits}};
            record.verdict_summary =
                std::to_string(grounded.hits.size()) + " context block(s)";
        });
    }

    std::string answer;
    {
        auto generation = snap.registry.generation();
        run_stage(trace, stage::kInference, [&](StageRecord& record) {
            GenerationOutput out = generation->generate(prompt, policy.top_k_tokens);
            answer = out.text;
            record.artifacts = {{"answer", answer}, {"prompt_chars", prompt.size()}};
            record.verdict_summary =
                "generated " + std::to_string(answer.size()) + " chars";
        });
    }

    safety::HallucinationAssessment assessment;
    bool hallucinated = false;
    if (policy.stages_enabled.hallucination_detection) {
        auto generation = snap.registry.generation();
        run_stage(trace, stage::kHallucinationDetection, [&](StageRecord& record) {
            assessment = safety::detect_hallucination(query.text, context, answer, policy,
                                                      *generation, snap.token_sets);
            hallucinated = assessment.is_hallucinated;
            record.artifacts = {{"p_halu", assessment.p_halu},
                                {"is_hallucinated", assessment.is_hallucinated},
                                {"reason", assessment.reason}};
            record.verdict_summary = "p_halu=" + fmt3(assessment.p_halu) +
                                     (hallucinated ? ": hallucinated" : ": ok");
        });
    }

    std::string current_text = answer;
    if (policy.stages_enabled.customizer) {
        run_stage(trace, stage::kCustomizer, [&](StageRecord& record) {
            auto outcome = customizer::run_chain(current_text, *snap.wrappers);
            current_text = outcome.text;
            nlohmann::json annotations = nlohmann::json::array();
            for (const auto& a : outcome.annotations) {
                annotations.push_back({{"wrapper_name", a.wrapper_name}, {"payload", a.payload}});
            }
            record.artifacts = {{"modified", outcome.modified}, {"annotations", annotations}};
            record.verdict_summary = outcome.modified ? "modified" : "unmodified";
        });
    }

    bool repaired = false;
    if (hallucinated && policy.stages_enabled.repairer) {
        auto fixing = snap.registry.fixing();
        run_stage(trace, stage::kRepairer, [&](StageRecord& record) {
            repairer::RepairRequest req;
            req.question = query.text;
            req.context = context.empty() ? "(none)" : context;
            req.answer = answer.empty() ? "(empty)" : answer;
            req.reason = assessment.reason.empty() ? "(unspecified)" : assessment.reason;
            auto result = repairer::repair(req, *fixing);
            if (result.repaired) {
                current_text = result.corrected_answer;
                repaired = true;
            }
            record.artifacts = {{"repaired", result.repaired},
                                {"corrected_answer", result.corrected_answer}};
            record.verdict_summary = result.repaired ? "repaired" : "not repaired (echo)";
        });
    }

    response.final_text = current_text;
    if (repaired) {
        response.status = ResponseStatus::kRepaired;
    } else if (hallucinated || input_flagged) {
        response.status = ResponseStatus::kFlagged;
    } else {
        response.status = ResponseStatus::kAnswered;
    }
    return response;
}

}  // namespace guardrail
