#pragma once

#include <memory>
#include <string>

#include "guardrail/backends.hpp"
#include "guardrail/customizer.hpp"

namespace guardrail {

// JSON-over-HTTP adapters for real model servers. One POST route per slot:
//   /classify {"text"}                      -> {"score"}
//   /generate {"prompt","top_k"}            -> {"text","candidates":[{"token","prob"}]}
//   /embed    {"text"}                      -> {"vector"}
//   /explain  {"question","context","answer"} -> {"reason"}
//   /complete {"prompt"}                    -> {"text"}
// Candidates may carry "logit" instead of "prob"; the adapter then applies a
// stable softmax. Embeddings are re-normalized to unit length here.
// Transport or schema problems surface as BackendFailure.

class HttpModerationBackend : public ModerationBackend {
public:
    explicit HttpModerationBackend(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    double classify(const std::string& text) override;

private:
    std::string endpoint_;
};

class HttpGenerationBackend : public GenerationBackend {
public:
    explicit HttpGenerationBackend(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    GenerationOutput generate(const std::string& prompt, int top_k) override;

private:
    std::string endpoint_;
};

class HttpEmbeddingBackend : public EmbeddingBackend {
public:
    explicit HttpEmbeddingBackend(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    std::vector<float> embed(const std::string& text) override;

private:
    std::string endpoint_;
};

class HttpReasoningBackend : public ReasoningBackend {
public:
    explicit HttpReasoningBackend(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    std::string explain(const std::string& question, const std::string& context,
                        const std::string& answer) override;

private:
    std::string endpoint_;
};

class HttpFixingBackend : public FixingBackend {
public:
    explicit HttpFixingBackend(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    std::string complete(const std::string& prompt) override;

private:
    std::string endpoint_;
};

// Real reachability probe: HEAD-like GET issuing a web request and reporting
// the final status after redirects. Probe errors become ClientFailure.
class HttpReachabilityClient : public customizer::ReachabilityClient {
public:
    HttpReachabilityClient() = default;
    int probe(const std::string& url) override;
};

}  // namespace guardrail
