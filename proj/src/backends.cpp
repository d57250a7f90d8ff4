#include "guardrail/backends.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace guardrail {

void validate_distribution(const FirstTokenDistribution& dist) {
    if (dist.k < 1) throw std::invalid_argument("distribution k must be >= 1");
    if (static_cast<int>(dist.candidates.size()) > dist.k) {
        throw std::invalid_argument("distribution has more than k candidates");
    }
    double sum = 0.0;
    double prev = 1.0;
    for (const auto& c : dist.candidates) {
        if (c.prob < 0.0 || c.prob > 1.0) {
            throw std::invalid_argument("candidate prob out of [0,1]: " + c.surface);
        }
        if (c.prob > prev + 1e-12) {
            throw std::invalid_argument("candidate probs must be non-increasing");
        }
        prev = c.prob;
        sum += c.prob;
    }
    if (sum > 1.0 + 1e-9) {
        throw std::invalid_argument("candidate probs sum above 1");
    }
}

std::vector<double> softmax(const std::vector<double>& logits) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

namespace {

FirstTokenDistribution sort_and_truncate(std::vector<TokenCandidate> candidates, int top_k) {
    if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.prob != b.prob) return a.prob > b.prob;
        return a.token_id < b.token_id;
    });
    if (static_cast<int>(candidates.size()) > top_k) {
        candidates.resize(static_cast<size_t>(top_k));
    }
    FirstTokenDistribution dist{std::move(candidates), top_k};
    validate_distribution(dist);
    return dist;
}

}  // namespace

FirstTokenDistribution make_distribution(
    const std::vector<std::pair<std::string, double>>& probs, int top_k) {
    std::vector<TokenCandidate> candidates;
    candidates.reserve(probs.size());
    int id = 0;
    for (const auto& [surface, prob] : probs) {
        candidates.push_back({id++, surface, prob});
    }
    return sort_and_truncate(std::move(candidates), top_k);
}

FirstTokenDistribution make_distribution_from_logits(
    const std::vector<std::pair<std::string, double>>& logits, int top_k) {
    std::vector<double> raw;
    raw.reserve(logits.size());
    for (const auto& [surface, logit] : logits) raw.push_back(logit);
    std::vector<double> probs = softmax(raw);
    std::vector<TokenCandidate> candidates;
    candidates.reserve(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) {
        candidates.push_back({static_cast<int>(i), logits[i].first, probs[i]});
    }
    return sort_and_truncate(std::move(candidates), top_k);
}

}  // namespace guardrail
