#include "guardrail/http_backends.hpp"

#include <cmath>

#include <json.hpp>

#include "guardrail/http_support.hpp"

namespace guardrail {

namespace {

nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body) {
    httplib::Client client(endpoint);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto result = client.Post(path, body.dump(), "application/json");
    if (!result) {
        throw BackendFailure("POST " + endpoint + path + ": " +
                             httplib::to_string(result.error()));
    }
    if (result->status != 200) {
        throw BackendFailure("POST " + endpoint + path + ": HTTP " +
                             std::to_string(result->status));
    }
    try {
        return nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& e) {
        throw BackendFailure("POST " + endpoint + path + ": bad JSON: " + e.what());
    }
}

}  // namespace

double HttpModerationBackend::classify(const std::string& text) {
    auto response = post_json(endpoint_, "/classify", {{"text", text}});
    if (!response.contains("score") || !response["score"].is_number()) {
        throw BackendFailure("/classify response missing numeric score");
    }
    return response["score"].get<double>();
}

GenerationOutput HttpGenerationBackend::generate(const std::string& prompt, int top_k) {
    auto response = post_json(endpoint_, "/generate", {{"prompt", prompt}, {"top_k", top_k}});
    if (!response.contains("text") || !response.contains("candidates") ||
        !response["candidates"].is_array()) {
        throw BackendFailure("/generate response missing text or candidates");
    }
    GenerationOutput out;
    out.text = response["text"].get<std::string>();

    std::vector<std::pair<std::string, double>> tokens;
    bool logits = false;
    for (const auto& candidate : response["candidates"]) {
        std::string surface = candidate.at("token").get<std::string>();
        if (candidate.contains("prob")) {
            tokens.emplace_back(surface, candidate["prob"].get<double>());
        } else if (candidate.contains("logit")) {
            logits = true;
            tokens.emplace_back(surface, candidate["logit"].get<double>());
        } else {
            throw BackendFailure("/generate candidate missing prob/logit");
        }
    }
    try {
        out.first_token_distribution = logits ? make_distribution_from_logits(tokens, top_k)
                                              : make_distribution(tokens, top_k);
    } catch (const std::invalid_argument& e) {
        throw BackendFailure(std::string("/generate distribution invalid: ") + e.what());
    }
    return out;
}

std::vector<float> HttpEmbeddingBackend::embed(const std::string& text) {
    auto response = post_json(endpoint_, "/embed", {{"text", text}});
    if (!response.contains("vector") || !response["vector"].is_array()) {
        throw BackendFailure("/embed response missing vector");
    }
    std::vector<float> v = response["vector"].get<std::vector<float>>();
    double norm_sq = 0.0;
    for (float x : v) norm_sq += static_cast<double>(x) * x;
    if (norm_sq <= 0.0) throw BackendFailure("/embed returned a zero vector");
    double norm = std::sqrt(norm_sq);
    for (auto& x : v) x = static_cast<float>(x / norm);
    return v;
}

std::string HttpReasoningBackend::explain(const std::string& question,
                                          const std::string& context,
                                          const std::string& answer) {
    auto response = post_json(endpoint_, "/explain",
                              {{"question", question}, {"context", context}, {"answer", answer}});
    if (!response.contains("reason")) throw BackendFailure("/explain response missing reason");
    return response["reason"].get<std::string>();
}

std::string HttpFixingBackend::complete(const std::string& prompt) {
    auto response = post_json(endpoint_, "/complete", {{"prompt", prompt}});
    if (!response.contains("text")) throw BackendFailure("/complete response missing text");
    return response["text"].get<std::string>();
}

int HttpReachabilityClient::probe(const std::string& url) {
    // Split scheme://host[:port] from the path.
    size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ClientFailure("not an http(s) URL: " + url);
    size_t path_start = url.find('/', scheme_end + 3);
    std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

    httplib::Client client(base);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    client.set_read_timeout(15);
    auto result = client.Get(path);
    if (!result) {
        throw ClientFailure("probe " + url + ": " + httplib::to_string(result.error()));
    }
    return result->status;
}

}  // namespace guardrail
