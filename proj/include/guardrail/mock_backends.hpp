#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "guardrail/backends.hpp"

namespace guardrail {

// Deterministic mock backends. All of them are script-table driven with a
// declared fallback, immutable after construction, and count their calls so
// tests can assert which slots a code path touched.

// Keyword-scored moderation: score = max over rules whose keyword occurs as a
// substring of the text, else the default score.
class MockModerationBackend : public ModerationBackend {
public:
    MockModerationBackend() = default;
    explicit MockModerationBackend(std::map<std::string, double> rules,
                                   double default_score = 0.0)
        : rules_(std::move(rules)), default_score_(default_score) {}

    double classify(const std::string& text) override;

    int call_count() const { return calls_.load(); }

private:
    std::map<std::string, double> rules_;
    double default_score_ = 0.0;
    mutable std::atomic<int> calls_{0};
};

enum class MockGenerationFallback {
    kFail,        // unscripted prompt -> BackendFailure
    kEchoPrompt,  // text = prompt, distribution = pure "No"
    kFixed,       // the entry passed to set_fallback
};

// Exact-match prompt script table. Entries may script either normalized
// probabilities or raw logits (softmaxed over the scripted vocabulary).
class MockGenerationBackend : public GenerationBackend {
public:
    MockGenerationBackend() = default;
    explicit MockGenerationBackend(MockGenerationFallback fallback) : fallback_(fallback) {}

    void script(const std::string& prompt, const std::string& text,
                std::vector<std::pair<std::string, double>> token_probs);
    void script_logits(const std::string& prompt, const std::string& text,
                       std::vector<std::pair<std::string, double>> token_logits);
    void set_fallback(const std::string& text,
                      std::vector<std::pair<std::string, double>> token_probs);

    GenerationOutput generate(const std::string& prompt, int top_k) override;

    int call_count() const { return calls_.load(); }

private:
    struct Entry {
        std::string text;
        std::vector<std::pair<std::string, double>> tokens;
        bool logits = false;
    };
    GenerationOutput render(const Entry& entry, int top_k) const;

    std::map<std::string, Entry> script_;
    MockGenerationFallback fallback_ = MockGenerationFallback::kEchoPrompt;
    std::optional<Entry> fixed_fallback_;
    mutable std::atomic<int> calls_{0};
};

// Hashed character-n-gram frequency embedder: FNV-1a over each 3-gram, bucketed
// into a fixed 256-dim count vector, L2-normalized. Deterministic across
// platforms and injective in practice on small corpora.
class MockEmbeddingBackend : public EmbeddingBackend {
public:
    static constexpr size_t kDimension = 256;
    static constexpr size_t kNgram = 3;

    std::vector<float> embed(const std::string& text) override;

    int call_count() const { return calls_.load(); }

private:
    mutable std::atomic<int> calls_{0};
};

enum class MockMissPolicy { kFallback, kFail };

// Scripted (question, context, answer) -> reason table.
class MockReasoningBackend : public ReasoningBackend {
public:
    MockReasoningBackend() = default;
    explicit MockReasoningBackend(MockMissPolicy policy) : miss_policy_(policy) {}

    void script(const std::string& question, const std::string& context,
                const std::string& answer, const std::string& reason);
    void set_fallback(std::string reason) { fallback_reason_ = std::move(reason); }

    std::string explain(const std::string& question, const std::string& context,
                        const std::string& answer) override;

    int call_count() const { return calls_.load(); }

private:
    std::map<std::string, std::string> table_;
    std::string fallback_reason_ =
        "the answer states facts that are not supported by the context";
    MockMissPolicy miss_policy_ = MockMissPolicy::kFallback;
    mutable std::atomic<int> calls_{0};
};

enum class MockFixingMode {
    kScripted,  // prompt table with fixed fallback completion
    kEcho,      // parse the answer block out of the repair prompt and return it
};

class MockFixingBackend : public FixingBackend {
public:
    MockFixingBackend() = default;
    explicit MockFixingBackend(MockFixingMode mode) : mode_(mode) {}

    void script(const std::string& prompt, const std::string& completion);
    void set_fallback(std::string completion) { fallback_ = std::move(completion); }

    std::string complete(const std::string& prompt) override;

    int call_count() const { return calls_.load(); }

private:
    std::map<std::string, std::string> table_;
    std::string fallback_ = "I cannot improve on the given answer.";
    MockFixingMode mode_ = MockFixingMode::kScripted;
    mutable std::atomic<int> calls_{0};
};

}  // namespace guardrail
