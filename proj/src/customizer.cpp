#include "guardrail/customizer.hpp"

#include <memory>
#include <regex>
#include <set>

namespace guardrail::customizer {

WrapperOutcome run_chain(const std::string& text, const std::vector<Wrapper>& wrappers) {
    std::set<std::string> names;
    for (const auto& w : wrappers) {
        if (!names.insert(w.name).second) throw DuplicateWrapperName(w.name);
    }

    WrapperOutcome chain_outcome;
    chain_outcome.text = text;
    chain_outcome.modified = false;
    for (const auto& w : wrappers) {
        WrapperOutcome step;
        try {
            step = w.transform(chain_outcome.text, chain_outcome.annotations);
        } catch (const WrapperFailure&) {
            throw;
        } catch (const std::exception& e) {
            throw WrapperFailure(w.name, e.what());
        }
        chain_outcome.text = std::move(step.text);
        for (auto& a : step.annotations) {
            chain_outcome.annotations.push_back(std::move(a));
        }
        chain_outcome.modified = chain_outcome.modified || step.modified;
    }
    return chain_outcome;
}

std::vector<std::string> extract_urls(const std::string& text) {
    static const std::regex kUrlPattern(R"(https?://[^\s<"]+)");
    static const std::string kTrailing = ".,;:!?)";
    std::vector<std::string> urls;
    auto begin = std::sregex_iterator(text.begin(), text.end(), kUrlPattern);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        std::string url = it->str();
        size_t scheme_len = url.rfind("https://", 0) == 0 ? 8 : 7;
        size_t end = url.size();
        while (end > scheme_len && kTrailing.find(url[end - 1]) != std::string::npos) --end;
        if (end > scheme_len) urls.push_back(url.substr(0, end));
    }
    return urls;
}

std::string to_string(UrlFinding::Class c) {
    switch (c) {
        case UrlFinding::Class::kMalicious: return "malicious";
        case UrlFinding::Class::kUnreachable: return "unreachable";
        case UrlFinding::Class::kSafe: return "safe";
    }
    return "safe";
}

UrlFinding classify_url(const std::string& url, BlocklistClient& blocklist,
                        ReachabilityClient& reachability, ProbeFailurePolicy on_failure) {
    UrlFinding finding;
    finding.url = url;
    if (blocklist.lookup(url)) {
        // Malicious URLs are never probed.
        finding.classification = UrlFinding::Class::kMalicious;
        return finding;
    }
    int status;
    try {
        status = reachability.probe(url);
    } catch (const ClientFailure&) {
        if (on_failure == ProbeFailurePolicy::kSkip) {
            finding.classification = UrlFinding::Class::kSafe;
            finding.status_code = 0;
            return finding;
        }
        finding.classification = UrlFinding::Class::kUnreachable;
        finding.status_code = kProbeFailureStatus;
        return finding;
    }
    finding.status_code = status;
    finding.classification = (status >= 400 && status <= 499) ? UrlFinding::Class::kUnreachable
                                                              : UrlFinding::Class::kSafe;
    return finding;
}

namespace {

bool is_unsafe(const UrlFinding& f) {
    return f.classification != UrlFinding::Class::kSafe;
}

std::string format_warning(const std::vector<UrlFinding>& findings) {
    std::string warning = "[WARNING] This response contains potentially unsafe URLs:\n";
    for (const auto& f : findings) {
        if (!is_unsafe(f)) continue;
        warning += "- ";
        warning += f.url;
        if (f.classification == UrlFinding::Class::kMalicious) {
            warning += " (malicious)\n";
        } else {
            warning += " (unreachable (HTTP " + std::to_string(f.status_code) + "))\n";
        }
    }
    return warning;
}

nlohmann::json finding_json(const UrlFinding& f) {
    return nlohmann::json{{"url", f.url},
                          {"classification", to_string(f.classification)},
                          {"status_code", f.status_code}};
}

}  // namespace

WrapperOutcome url_warning_wrapper(const std::string& text, BlocklistClient& blocklist,
                                   ReachabilityClient& reachability,
                                   ProbeFailurePolicy on_failure) {
    std::vector<UrlFinding> findings;
    for (const auto& url : extract_urls(text)) {
        findings.push_back(classify_url(url, blocklist, reachability, on_failure));
    }

    WrapperOutcome outcome;
    nlohmann::json payload = nlohmann::json::array();
    bool any_unsafe = false;
    for (const auto& f : findings) {
        payload.push_back(finding_json(f));
        any_unsafe = any_unsafe || is_unsafe(f);
    }
    outcome.annotations.push_back({"url_warning", payload});

    if (any_unsafe) {
        outcome.text = format_warning(findings) + "\n\n" + text;
        outcome.modified = true;
    } else {
        outcome.text = text;
        outcome.modified = false;
    }
    return outcome;
}

Wrapper make_url_warning_wrapper(std::shared_ptr<BlocklistClient> blocklist,
                                 std::shared_ptr<ReachabilityClient> reachability,
                                 ProbeFailurePolicy on_failure) {
    Wrapper wrapper;
    wrapper.name = "url_warning";
    wrapper.transform = [blocklist, reachability, on_failure](
                            const std::string& text,
                            const std::vector<WrapperAnnotation>&) {
        return url_warning_wrapper(text, *blocklist, *reachability, on_failure);
    };
    return wrapper;
}

}  // namespace guardrail::customizer
