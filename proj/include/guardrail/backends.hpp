#pragma once

#include <string>
#include <utility>
#include <vector>

#include "guardrail/errors.hpp"

namespace guardrail {

// One candidate first token of a generation.
struct TokenCandidate {
    int token_id = 0;
    std::string surface;
    double prob = 0.0;
};

// Top-k candidate first tokens, probabilities non-increasing, sum <= 1 + 1e-9.
struct FirstTokenDistribution {
    std::vector<TokenCandidate> candidates;
    int k = 0;
};

// Throws std::invalid_argument when a distribution breaks its invariants.
void validate_distribution(const FirstTokenDistribution& dist);

struct GenerationOutput {
    std::string text;
    FirstTokenDistribution first_token_distribution;
};

// Numerically stable softmax (max-subtraction). Empty input -> empty output.
std::vector<double> softmax(const std::vector<double>& logits);

// Builds a distribution from (surface, prob) pairs: assigns sequential token
// ids, sorts by prob descending (ties by token id), truncates to top_k.
FirstTokenDistribution make_distribution(
    const std::vector<std::pair<std::string, double>>& probs, int top_k);

// Same, but from raw logits; probabilities come from softmax over the full
// scripted vocabulary before truncation.
FirstTokenDistribution make_distribution_from_logits(
    const std::vector<std::pair<std::string, double>>& logits, int top_k);

// --- Backend slot contracts ------------------------------------------------
//
// Five pluggable model-call contracts. Implementations must be safe to share
// across concurrent requests.

class ModerationBackend {
public:
    virtual ~ModerationBackend() = default;
    // Confidence that the text is unsafe, in [0,1].
    virtual double classify(const std::string& text) = 0;
};

class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    // Completion text plus the top-k first-token distribution (normalized
    // probabilities; any logit-to-probability conversion is the adapter's
    // job, not the caller's).
    virtual GenerationOutput generate(const std::string& prompt, int top_k) = 0;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    // Fixed-dimension vector with L2 norm 1 +- 1e-6.
    virtual std::vector<float> embed(const std::string& text) = 0;
};

class ReasoningBackend {
public:
    virtual ~ReasoningBackend() = default;
    // Explanation of why the answer is hallucinated.
    virtual std::string explain(const std::string& question, const std::string& context,
                                const std::string& answer) = 0;
};

class FixingBackend {
public:
    virtual ~FixingBackend() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

}  // namespace guardrail
