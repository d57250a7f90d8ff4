#pragma once

#include <optional>
#include <set>
#include <string>

#include "guardrail/backends.hpp"
#include "guardrail/types.hpp"

namespace guardrail::safety {

struct SafetyVerdict {
    enum class Label { kSafe, kUnsafe };
    Label label = Label::kSafe;
    double score = 0.0;  // confidence of unsafe
};

// Token surfaces counted as "Yes" / "No" answers. Membership is exact surface
// match; the default variants cover common tokenizer spellings.
struct YesNoTokenSets {
    std::set<std::string> yes_tokens;
    std::set<std::string> no_tokens;
};

YesNoTokenSets default_yes_no_sets();

// Throws std::invalid_argument unless both sets are non-empty and disjoint.
void validate_token_sets(const YesNoTokenSets& sets);

struct HallucinationAssessment {
    double p_halu = 0.0;
    bool is_hallucinated = false;
    std::string reason;  // empty when not hallucinated
};

// Reason used when the first-token distribution carries no yes/no mass and
// policy resolves the case as hallucinated.
extern const std::string kIndeterminateReason;

// Ratio of yes-token probability mass to combined yes/no mass over the
// distribution's candidates. Returns nullopt (indeterminate) when that
// combined mass is zero.
std::optional<double> compute_p_halu(const FirstTokenDistribution& dist,
                                     const YesNoTokenSets& sets);

// Binary unsafe-input check: maps the moderation backend's score through the
// threshold (score >= threshold -> unsafe).
SafetyVerdict check_input(const Query& query, ModerationBackend& moderation,
                          double input_unsafe_threshold);

// Strips the leading yes marker plus one following comma and one space from a
// detector continuation ("Yes, <reason>" -> "<reason>").
std::string extract_reason(const std::string& continuation, const YesNoTokenSets& sets);

// Full detection pass: builds the detection prompt, asks the generation
// backend for a top-k first-token distribution plus continuation text,
// computes p_halu, and applies the policy threshold. An indeterminate
// distribution resolves per policy.indeterminate_hallucination_action.
HallucinationAssessment detect_hallucination(const std::string& question,
                                             const std::string& context,
                                             const std::string& answer,
                                             const PipelinePolicy& policy,
                                             GenerationBackend& generation,
                                             const YesNoTokenSets& sets = default_yes_no_sets());

}  // namespace guardrail::safety
