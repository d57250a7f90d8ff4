#include "guardrail/safety.hpp"

#include <stdexcept>

#include "guardrail/data_prep.hpp"

namespace guardrail::safety {

const std::string kIndeterminateReason =
    "indeterminate: the detector produced no yes/no token mass";

YesNoTokenSets default_yes_no_sets() {
    return YesNoTokenSets{{"Yes", "yes", " Yes", " yes"}, {"No", "no", " No", " no"}};
}

void validate_token_sets(const YesNoTokenSets& sets) {
    if (sets.yes_tokens.empty() || sets.no_tokens.empty()) {
        throw std::invalid_argument("yes/no token sets must both be non-empty");
    }
    for (const auto& t : sets.yes_tokens) {
        if (sets.no_tokens.count(t)) {
            throw std::invalid_argument("yes/no token sets overlap on: " + t);
        }
    }
}

std::optional<double> compute_p_halu(const FirstTokenDistribution& dist,
                                     const YesNoTokenSets& sets) {
    validate_distribution(dist);
    validate_token_sets(sets);
    double yes_mass = 0.0;
    double no_mass = 0.0;
    for (const auto& candidate : dist.candidates) {
        if (sets.yes_tokens.count(candidate.surface)) {
            yes_mass += candidate.prob;
        } else if (sets.no_tokens.count(candidate.surface)) {
            no_mass += candidate.prob;
        }
    }
    double denom = yes_mass + no_mass;
    if (denom == 0.0) return std::nullopt;
    return yes_mass / denom;
}

SafetyVerdict check_input(const Query& query, ModerationBackend& moderation,
                          double input_unsafe_threshold) {
    double score = moderation.classify(query.text);
    SafetyVerdict verdict;
    verdict.score = score;
    verdict.label = score >= input_unsafe_threshold ? SafetyVerdict::Label::kUnsafe
                                                    : SafetyVerdict::Label::kSafe;
    return verdict;
}

std::string extract_reason(const std::string& continuation, const YesNoTokenSets& sets) {
    // Longest yes surface that prefixes the continuation.
    size_t marker_len = 0;
    for (const auto& surface : sets.yes_tokens) {
        if (surface.size() > marker_len && continuation.rfind(surface, 0) == 0) {
            marker_len = surface.size();
        }
    }
    if (marker_len == 0) return trim(continuation);
    size_t pos = marker_len;
    if (pos < continuation.size() && continuation[pos] == ',') ++pos;
    if (pos < continuation.size() && continuation[pos] == ' ') ++pos;
    return continuation.substr(pos);
}

HallucinationAssessment detect_hallucination(const std::string& question,
                                             const std::string& context,
                                             const std::string& answer,
                                             const PipelinePolicy& policy,
                                             GenerationBackend& generation,
                                             const YesNoTokenSets& sets) {
    validate_policy(policy);
    std::string prompt = dataprep::render_detection_prompt(question, context, answer);
    GenerationOutput out = generation.generate(prompt, policy.top_k_tokens);

    HallucinationAssessment assessment;
    std::optional<double> p = compute_p_halu(out.first_token_distribution, sets);
    if (!p.has_value()) {
        if (policy.indeterminate_hallucination_action == IndeterminateAction::kTreatHallucinated) {
            assessment.p_halu = 1.0;
            assessment.is_hallucinated = true;
            assessment.reason = kIndeterminateReason;
        } else {
            assessment.p_halu = 0.0;
            assessment.is_hallucinated = false;
        }
        return assessment;
    }
    assessment.p_halu = *p;
    assessment.is_hallucinated = *p >= policy.halu_threshold;
    if (assessment.is_hallucinated) {
        assessment.reason = extract_reason(out.text, sets);
    }
    return assessment;
}

}  // namespace guardrail::safety
