#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "guardrail/errors.hpp"

namespace guardrail::customizer {

struct WrapperAnnotation {
    std::string wrapper_name;
    nlohmann::json payload;
};

struct WrapperOutcome {
    std::string text;
    std::vector<WrapperAnnotation> annotations;
    bool modified = false;  // false -> text byte-identical to input
};

// A lightweight deterministic output transformation. transform receives the
// current text plus the annotations accumulated so far.
struct Wrapper {
    std::string name;
    std::function<WrapperOutcome(const std::string&, const std::vector<WrapperAnnotation>&)>
        transform;
};

// Applies wrappers in list order, each receiving the previous output;
// annotations are concatenated in order. Wrapper exceptions surface as
// WrapperFailure carrying the wrapper name.
WrapperOutcome run_chain(const std::string& text, const std::vector<Wrapper>& wrappers);

// All maximal "http://" / "https://" substrings, in order of appearance,
// duplicates preserved. A URL runs until whitespace, '<' or '"'; trailing
// .,;:!?) punctuation is stripped.
std::vector<std::string> extract_urls(const std::string& text);

struct UrlFinding {
    enum class Class { kMalicious, kUnreachable, kSafe };
    std::string url;
    Class classification = Class::kSafe;
    int status_code = 0;  // HTTP status for unreachable (4XX) and probed-safe URLs
};

std::string to_string(UrlFinding::Class c);

class BlocklistClient {
public:
    virtual ~BlocklistClient() = default;
    virtual bool lookup(const std::string& url) = 0;
};

class ReachabilityClient {
public:
    virtual ~ReachabilityClient() = default;
    // Final HTTP status code after redirects.
    virtual int probe(const std::string& url) = 0;
};

// Disposition of a reachability probe failure.
enum class ProbeFailurePolicy {
    kTreatUnreachable,  // classify unreachable with pseudo-status 499
    kSkip,              // classify safe with status 0
};

constexpr int kProbeFailureStatus = 499;

// Blocklist hit -> malicious (no probe). Otherwise probe: 4XX -> unreachable,
// anything else (including 5XX) -> safe with the status annotated.
UrlFinding classify_url(const std::string& url, BlocklistClient& blocklist,
                        ReachabilityClient& reachability,
                        ProbeFailurePolicy on_failure = ProbeFailurePolicy::kTreatUnreachable);

// The Example-1 wrapper: classifies every URL in the text and, when any is
// malicious or unreachable, prepends a warning block listing them. The body
// is never edited. Annotations carry all findings including safe ones.
WrapperOutcome url_warning_wrapper(const std::string& text, BlocklistClient& blocklist,
                                   ReachabilityClient& reachability,
                                   ProbeFailurePolicy on_failure =
                                       ProbeFailurePolicy::kTreatUnreachable);

// Same behaviour packaged as a chain element named "url_warning".
Wrapper make_url_warning_wrapper(std::shared_ptr<BlocklistClient> blocklist,
                                 std::shared_ptr<ReachabilityClient> reachability,
                                 ProbeFailurePolicy on_failure =
                                     ProbeFailurePolicy::kTreatUnreachable);

// --- Deterministic mock clients ---------------------------------------------

class MockBlocklistClient : public BlocklistClient {
public:
    MockBlocklistClient() = default;
    explicit MockBlocklistClient(std::set<std::string> blocked) : blocked_(std::move(blocked)) {}

    bool lookup(const std::string& url) override {
        calls_.fetch_add(1);
        return blocked_.count(url) > 0;
    }

    int call_count() const { return calls_.load(); }

private:
    std::set<std::string> blocked_;
    mutable std::atomic<int> calls_{0};
};

class MockReachabilityClient : public ReachabilityClient {
public:
    MockReachabilityClient() = default;
    MockReachabilityClient(std::map<std::string, int> statuses, int default_status = 200)
        : statuses_(std::move(statuses)), default_status_(default_status) {}

    // URLs listed here make probe() throw ClientFailure.
    void fail_on(const std::string& url) { failures_.insert(url); }

    int probe(const std::string& url) override {
        calls_.fetch_add(1);
        if (failures_.count(url)) throw ClientFailure("scripted probe failure for " + url);
        auto it = statuses_.find(url);
        return it != statuses_.end() ? it->second : default_status_;
    }

    int call_count() const { return calls_.load(); }

private:
    std::map<std::string, int> statuses_;
    std::set<std::string> failures_;
    int default_status_ = 200;
    mutable std::atomic<int> calls_{0};
};

}  // namespace guardrail::customizer
