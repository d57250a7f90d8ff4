#include "guardrail/mock_backends.hpp"

#include <algorithm>
#include <cmath>

namespace guardrail {

double MockModerationBackend::classify(const std::string& text) {
    calls_.fetch_add(1);
    double score = default_score_;
    bool hit = false;
    for (const auto& [keyword, rule_score] : rules_) {
        if (text.find(keyword) != std::string::npos) {
            score = hit ? std::max(score, rule_score) : rule_score;
            hit = true;
        }
    }
    return score;
}

void MockGenerationBackend::script(const std::string& prompt, const std::string& text,
                                   std::vector<std::pair<std::string, double>> token_probs) {
    script_[prompt] = Entry{text, std::move(token_probs), false};
}

void MockGenerationBackend::script_logits(
    const std::string& prompt, const std::string& text,
    std::vector<std::pair<std::string, double>> token_logits) {
    script_[prompt] = Entry{text, std::move(token_logits), true};
}

void MockGenerationBackend::set_fallback(
    const std::string& text, std::vector<std::pair<std::string, double>> token_probs) {
    fallback_ = MockGenerationFallback::kFixed;
    fixed_fallback_ = Entry{text, std::move(token_probs), false};
}

GenerationOutput MockGenerationBackend::render(const Entry& entry, int top_k) const {
    GenerationOutput out;
    out.text = entry.text;
    out.first_token_distribution = entry.logits
                                       ? make_distribution_from_logits(entry.tokens, top_k)
                                       : make_distribution(entry.tokens, top_k);
    return out;
}

GenerationOutput MockGenerationBackend::generate(const std::string& prompt, int top_k) {
    calls_.fetch_add(1);
    auto it = script_.find(prompt);
    if (it != script_.end()) return render(it->second, top_k);
    switch (fallback_) {
        case MockGenerationFallback::kFixed:
            return render(*fixed_fallback_, top_k);
        case MockGenerationFallback::kEchoPrompt: {
            GenerationOutput out;
            out.text = prompt;
            out.first_token_distribution = make_distribution({{"No", 1.0}}, top_k);
            return out;
        }
        case MockGenerationFallback::kFail:
            break;
    }
    throw BackendFailure("generation mock has no script for prompt");
}

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const char* data, size_t len) {
    std::uint64_t h = kFnvOffset;
    for (size_t i = 0; i < len; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= kFnvPrime;
    }
    return h;
}

}  // namespace

std::vector<float> MockEmbeddingBackend::embed(const std::string& text) {
    calls_.fetch_add(1);
    std::vector<double> counts(kDimension, 0.0);
    if (text.size() < kNgram) {
        counts[fnv1a(text.data(), text.size()) % kDimension] += 1.0;
    } else {
        for (size_t i = 0; i + kNgram <= text.size(); ++i) {
            counts[fnv1a(text.data() + i, kNgram) % kDimension] += 1.0;
        }
    }
    double norm_sq = 0.0;
    for (double c : counts) norm_sq += c * c;
    std::vector<float> out(kDimension, 0.0f);
    if (norm_sq > 0.0) {
        double norm = std::sqrt(norm_sq);
        for (size_t i = 0; i < kDimension; ++i) {
            out[i] = static_cast<float>(counts[i] / norm);
        }
    } else {
        // Empty text still gets a unit vector.
        out[0] = 1.0f;
    }
    return out;
}

namespace {

// \x1f separates fields in table keys; it cannot collide with field content
// in any of our test corpora.
std::string triple_key(const std::string& q, const std::string& c, const std::string& a) {
    return q + '\x1f' + c + '\x1f' + a;
}

}  // namespace

void MockReasoningBackend::script(const std::string& question, const std::string& context,
                                  const std::string& answer, const std::string& reason) {
    table_[triple_key(question, context, answer)] = reason;
}

std::string MockReasoningBackend::explain(const std::string& question,
                                          const std::string& context,
                                          const std::string& answer) {
    calls_.fetch_add(1);
    auto it = table_.find(triple_key(question, context, answer));
    if (it != table_.end()) return it->second;
    if (miss_policy_ == MockMissPolicy::kFail) {
        throw BackendFailure("reasoning mock has no script for input");
    }
    return fallback_reason_;
}

void MockFixingBackend::script(const std::string& prompt, const std::string& completion) {
    table_[prompt] = completion;
}

std::string MockFixingBackend::complete(const std::string& prompt) {
    calls_.fetch_add(1);
    if (mode_ == MockFixingMode::kEcho) {
        const std::string begin_marker = "#Answer#: ";
        const std::string end_marker = "\n#Hallucination Reason#:";
        size_t begin = prompt.find(begin_marker);
        size_t end = prompt.rfind(end_marker);
        if (begin == std::string::npos || end == std::string::npos ||
            end < begin + begin_marker.size()) {
            throw BackendFailure("echo fixing mock expected a repair prompt");
        }
        begin += begin_marker.size();
        return prompt.substr(begin, end - begin);
    }
    auto it = table_.find(prompt);
    if (it != table_.end()) return it->second;
    return fallback_;
}

}  // namespace guardrail
