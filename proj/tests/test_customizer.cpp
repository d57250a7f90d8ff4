#include <doctest.h>

#include <memory>
#include <random>

#include "guardrail/customizer.hpp"

using namespace guardrail;
using namespace guardrail::customizer;

TEST_CASE("extract_urls finds scheme-anchored urls in order") {
    auto urls = extract_urls("see https://a.example/x and http://b.example");
    REQUIRE(urls.size() == 2);
    CHECK(urls[0] == "https://a.example/x");
    CHECK(urls[1] == "http://b.example");

    CHECK(extract_urls("no links here, also not ftp://x").empty());
    CHECK(extract_urls("").empty());
}

TEST_CASE("extract_urls preserves duplicates") {
    auto urls = extract_urls("go to https://a.example then again https://a.example");
    REQUIRE(urls.size() == 2);
    CHECK(urls[0] == urls[1]);
}

TEST_CASE("extract_urls strips trailing punctuation and stops at delimiters") {
    CHECK(extract_urls("(docs: https://a.example/page).")[0] == "https://a.example/page");
    CHECK(extract_urls("Is it https://a.example?")[0] == "https://a.example");
    CHECK(extract_urls("<a href=\"https://a.example/q\">x</a>")[0] == "https://a.example/q");
    CHECK(extract_urls("wrapped https://a.example/x;\nnext line")[0] == "https://a.example/x");
    // a bare scheme with nothing after it is not a URL
    CHECK(extract_urls("scheme only: https://.").empty());
}

TEST_CASE("classify_url: blocklist hit short-circuits the probe") {
    MockBlocklistClient blocklist({"https://evil.example"});
    MockReachabilityClient reachability({}, 200);

    auto finding = classify_url("https://evil.example", blocklist, reachability);
    CHECK(finding.classification == UrlFinding::Class::kMalicious);
    CHECK(reachability.call_count() == 0);  // malicious URLs are never probed
}

TEST_CASE("classify_url: 4XX statuses are unreachable, everything else safe") {
    MockBlocklistClient blocklist;
    MockReachabilityClient reachability(
        {{"https://gone.example", 404}, {"https://err.example", 500},
         {"https://moved.example", 301}},
        200);

    auto gone = classify_url("https://gone.example", blocklist, reachability);
    CHECK(gone.classification == UrlFinding::Class::kUnreachable);
    CHECK(gone.status_code == 404);

    auto ok = classify_url("https://fine.example", blocklist, reachability);
    CHECK(ok.classification == UrlFinding::Class::kSafe);
    CHECK(ok.status_code == 200);

    // 5XX is recorded but not treated as unreachable
    auto err = classify_url("https://err.example", blocklist, reachability);
    CHECK(err.classification == UrlFinding::Class::kSafe);
    CHECK(err.status_code == 500);

    auto moved = classify_url("https://moved.example", blocklist, reachability);
    CHECK(moved.classification == UrlFinding::Class::kSafe);
}

TEST_CASE("classify_url: probe failure is fail-closed by default, skippable") {
    MockBlocklistClient blocklist;
    MockReachabilityClient reachability;
    reachability.fail_on("https://flaky.example");

    auto closed = classify_url("https://flaky.example", blocklist, reachability);
    CHECK(closed.classification == UrlFinding::Class::kUnreachable);
    CHECK(closed.status_code == kProbeFailureStatus);

    auto skipped = classify_url("https://flaky.example", blocklist, reachability,
                                ProbeFailurePolicy::kSkip);
    CHECK(skipped.classification == UrlFinding::Class::kSafe);
    CHECK(skipped.status_code == 0);
}

TEST_CASE("url_warning_wrapper prepends the warning block for a malicious url") {
    MockBlocklistClient blocklist({"https://evil.example/login"});
    MockReachabilityClient reachability;
    std::string body = "Check https://evil.example/login for details.";

    auto outcome = url_warning_wrapper(body, blocklist, reachability);
    CHECK(outcome.modified);
    CHECK(outcome.text ==
          "[WARNING] This response contains potentially unsafe URLs:\n"
          "- https://evil.example/login (malicious)\n"
          "\n\n" +
              body);
}

TEST_CASE("url_warning_wrapper leaves safe text unchanged but annotates findings") {
    MockBlocklistClient blocklist;
    MockReachabilityClient reachability({}, 200);
    std::string body = "Docs at https://ok.example/a and https://ok.example/b";

    auto outcome = url_warning_wrapper(body, blocklist, reachability);
    CHECK_FALSE(outcome.modified);
    CHECK(outcome.text == body);
    REQUIRE(outcome.annotations.size() == 1);
    CHECK(outcome.annotations[0].wrapper_name == "url_warning");
    REQUIRE(outcome.annotations[0].payload.size() == 2);
    CHECK(outcome.annotations[0].payload[0]["classification"] == "safe");
    CHECK(outcome.annotations[0].payload[1]["status_code"] == 200);
}

TEST_CASE("url_warning_wrapper lists mixed findings in order of appearance") {
    MockBlocklistClient blocklist({"https://evil.example"});
    MockReachabilityClient reachability({{"https://gone.example/x", 404}}, 200);
    std::string body = "First https://gone.example/x then https://evil.example done.";

    auto outcome = url_warning_wrapper(body, blocklist, reachability);
    CHECK(outcome.modified);
    CHECK(outcome.text ==
          "[WARNING] This response contains potentially unsafe URLs:\n"
          "- https://gone.example/x (unreachable (HTTP 404))\n"
          "- https://evil.example (malicious)\n"
          "\n\n" +
              body);
    // annotations include the safe findings too (none here), in text order
    REQUIRE(outcome.annotations.size() == 1);
    CHECK(outcome.annotations[0].payload.size() == 2);
}

TEST_CASE("url wrapper body is preserved verbatim as a suffix") {
    MockBlocklistClient blocklist({"https://evil.example"});
    MockReachabilityClient reachability({{"https://gone.example", 410}}, 200);

    std::mt19937_64 rng(31337);
    const std::vector<std::string> snippets = {
        "plain words",  "tail https://evil.example", "mid https://gone.example text",
        "https://ok.example", "punct (https://evil.example).", "two\nlines"};
    for (int trial = 0; trial < 50; ++trial) {
        std::string body;
        size_t parts = 1 + rng() % 4;
        for (size_t i = 0; i < parts; ++i) {
            if (i) body += ' ';
            body += snippets[rng() % snippets.size()];
        }
        auto outcome = url_warning_wrapper(body, blocklist, reachability);

        // warning-iff-unsafe + prefix position + body preservation
        bool has_unsafe = false;
        for (const auto& f : outcome.annotations[0].payload) {
            if (f["classification"] != "safe") has_unsafe = true;
        }
        CHECK(outcome.modified == has_unsafe);
        if (has_unsafe) {
            CHECK(outcome.text.rfind("[WARNING] ", 0) == 0);
            REQUIRE(outcome.text.size() > body.size());
            CHECK(outcome.text.substr(outcome.text.size() - body.size()) == body);
        } else {
            CHECK(outcome.text == body);
        }

        // determinism
        auto again = url_warning_wrapper(body, blocklist, reachability);
        CHECK(again.text == outcome.text);
    }
}

TEST_CASE("run_chain applies wrappers in order and concatenates annotations") {
    Wrapper first{"first", [](const std::string& text, const std::vector<WrapperAnnotation>&) {
                      WrapperOutcome o;
                      o.text = text + "[a]";
                      o.modified = true;
                      o.annotations.push_back({"first", {{"step", 1}}});
                      return o;
                  }};
    Wrapper second{"second", [](const std::string& text, const std::vector<WrapperAnnotation>&) {
                       WrapperOutcome o;
                       o.text = text + "[b]";
                       o.modified = true;
                       o.annotations.push_back({"second", {{"step", 2}}});
                       return o;
                   }};

    auto outcome = run_chain("base", {first, second});
    CHECK(outcome.text == "base[a][b]");
    CHECK(outcome.modified);
    REQUIRE(outcome.annotations.size() == 2);
    CHECK(outcome.annotations[0].wrapper_name == "first");
    CHECK(outcome.annotations[1].wrapper_name == "second");
}

TEST_CASE("run_chain identity and error paths") {
    CHECK(run_chain("unchanged", {}).text == "unchanged");
    CHECK_FALSE(run_chain("unchanged", {}).modified);

    Wrapper noop{"noop", [](const std::string& text, const std::vector<WrapperAnnotation>&) {
                     return WrapperOutcome{text, {}, false};
                 }};
    CHECK_THROWS_AS(run_chain("x", {noop, noop}), DuplicateWrapperName);

    Wrapper broken{"broken", [](const std::string&, const std::vector<WrapperAnnotation>&)
                       -> WrapperOutcome { throw std::runtime_error("boom"); }};
    try {
        run_chain("x", {broken});
        FAIL("expected WrapperFailure");
    } catch (const WrapperFailure& e) {
        CHECK(e.wrapper() == "broken");
        CHECK(std::string(e.what()).find("boom") != std::string::npos);
    }
}

TEST_CASE("url wrapper on url-free text is a no-op in a chain") {
    auto blocklist = std::make_shared<MockBlocklistClient>();
    auto reachability = std::make_shared<MockReachabilityClient>();
    auto chain_outcome = run_chain("no links at all",
                                   {make_url_warning_wrapper(blocklist, reachability)});
    CHECK_FALSE(chain_outcome.modified);
    CHECK(chain_outcome.text == "no links at all");
    CHECK(blocklist->call_count() == 0);
}
