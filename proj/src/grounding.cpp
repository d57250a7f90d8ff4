#include "guardrail/grounding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace guardrail::grounding {

std::string to_string(IndexStrategy strategy) {
    return strategy == IndexStrategy::kWholeKnowledge ? "whole_knowledge" : "key_information";
}

IndexStrategy index_strategy_from_string(const std::string& s) {
    if (s == "whole_knowledge") return IndexStrategy::kWholeKnowledge;
    if (s == "key_information") return IndexStrategy::kKeyInformation;
    throw std::invalid_argument("unknown index strategy: " + s);
}

std::string to_string(QueryMode mode) {
    return mode == QueryMode::kOriginal ? "original" : "rephrased";
}

QueryMode query_mode_from_string(const std::string& s) {
    if (s == "original") return QueryMode::kOriginal;
    if (s == "rephrased") return QueryMode::kRephrased;
    throw std::invalid_argument("unknown query mode: " + s);
}

namespace {

double dot(const std::vector<float>& a, const std::vector<float>& b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * b[i];
    return sum;
}

std::vector<float> embed_checked(EmbeddingBackend& embedder, const std::string& text,
                                 size_t expected_dim) {
    std::vector<float> v = embedder.embed(text);
    if (expected_dim != 0 && v.size() != expected_dim) {
        throw BackendFailure("embedding dimension mismatch: expected " +
                             std::to_string(expected_dim) + ", got " +
                             std::to_string(v.size()));
    }
    double norm = std::sqrt(dot(v, v));
    if (std::abs(norm - 1.0) > 1e-6) {
        throw BackendFailure("embedding is not unit-normalized (norm=" + std::to_string(norm) +
                             ")");
    }
    return v;
}

}  // namespace

VectorIndex build_index(const std::vector<KnowledgeRecord>& corpus, IndexStrategy strategy,
                        EmbeddingBackend& embedder) {
    if (corpus.empty()) throw EmptyCorpus();

    std::set<std::string> seen_ids;
    for (const auto& record : corpus) {
        if (record.text.empty()) {
            throw std::invalid_argument("record '" + record.id + "' has empty text");
        }
        if (record.key_text && record.key_text->empty()) {
            throw std::invalid_argument("record '" + record.id + "' has empty key_text");
        }
        if (!seen_ids.insert(record.id).second) {
            throw std::invalid_argument("duplicate record id: " + record.id);
        }
        if (strategy == IndexStrategy::kKeyInformation && !record.key_text) {
            throw MissingKeyText(record.id);
        }
    }

    VectorIndex index;
    index.strategy = strategy;
    index.corpus = corpus;
    index.vectors.reserve(corpus.size());
    for (const auto& record : corpus) {
        const std::string& source = strategy == IndexStrategy::kKeyInformation
                                        ? *record.key_text
                                        : record.text;
        auto v = embed_checked(embedder, source, index.dimension);
        if (index.dimension == 0) index.dimension = v.size();
        index.vectors.push_back(std::move(v));
    }
    return index;
}

std::vector<RetrievalResult> retrieve(const VectorIndex& index, const std::string& query_text,
                                      int k, EmbeddingBackend& embedder) {
    if (index.size() == 0) throw EmptyIndex();
    if (k < 1) throw std::invalid_argument("k must be >= 1");

    std::vector<float> query_vec = embed_checked(embedder, query_text, index.dimension);

    std::vector<size_t> order(index.size());
    std::vector<double> sims(index.size());
    for (size_t i = 0; i < index.size(); ++i) {
        order[i] = i;
        sims[i] = dot(query_vec, index.vectors[i]);
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return index.corpus[a].id < index.corpus[b].id;
    });

    size_t take = std::min(static_cast<size_t>(k), index.size());
    std::vector<RetrievalResult> results;
    results.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        results.push_back({index.corpus[order[i]], sims[order[i]]});
    }
    return results;
}

std::string assemble_grounded_prompt(const std::string& query_text,
                                     const std::vector<RetrievalResult>& hits) {
    std::string prompt;
    for (const auto& hit : hits) {
        prompt += "#Context#: ";
        prompt += hit.record.text;
        prompt += '\n';
    }
    prompt += "#Question#: ";
    prompt += query_text;
    return prompt;
}

std::string context_text(const std::vector<RetrievalResult>& hits) {
    std::string text;
    for (size_t i = 0; i < hits.size(); ++i) {
        if (i > 0) text += '\n';
        text += hits[i].record.text;
    }
    return text;
}

GroundedQuery ground_query(const Query& query, const VectorIndex& index, int k,
                           EmbeddingBackend& embedder) {
    GroundedQuery grounded;
    grounded.query_text = query.text;
    grounded.hits = retrieve(index, query.text, k, embedder);
    grounded.prompt = assemble_grounded_prompt(query.text, grounded.hits);
    return grounded;
}

double callback(const VectorIndex& index, const std::vector<LabeledQuery>& queries, int k,
                EmbeddingBackend& embedder) {
    if (queries.empty()) throw EmptyQuerySet();
    std::set<std::string> known_ids;
    for (const auto& record : index.corpus) known_ids.insert(record.id);
    for (const auto& q : queries) {
        if (!known_ids.count(q.relevant_record_id)) {
            throw UnknownRecordId(q.relevant_record_id);
        }
    }

    size_t hits = 0;
    for (const auto& q : queries) {
        auto results = retrieve(index, q.query_text, k, embedder);
        for (const auto& r : results) {
            if (r.record.id == q.relevant_record_id) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(queries.size());
}

namespace {

const std::set<std::string>& stopwords() {
    static const std::set<std::string> kStopwords = {
        "a",    "an",    "the",  "is",   "are",  "was",  "were", "of",   "to",
        "in",   "on",    "for",  "and",  "or",   "do",   "does", "did",  "what",
        "how",  "why",   "when", "where", "who",  "which", "can", "could", "you",
        "your", "please", "me",  "my",   "it",   "this", "that", "with"};
    return kStopwords;
}

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::uint64_t fnv1a_str(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::string synthetic_rephrase(const std::string& text, std::uint64_t seed) {
    std::istringstream iss(text);
    std::vector<std::string> words;
    std::string word;
    while (iss >> word) words.push_back(word);

    std::vector<std::string> kept;
    for (const auto& w : words) {
        if (!stopwords().count(lower(w))) kept.push_back(w);
    }
    if (kept.size() < 2) kept = words;  // too aggressive; keep the original tokens

    // Seeded adjacent swaps; enough perturbation to differ, close enough for
    // n-gram similarity to survive.
    std::mt19937_64 rng(seed ^ fnv1a_str(text));
    for (size_t i = 0; i + 1 < kept.size(); i += 2) {
        if (rng() & 1u) std::swap(kept[i], kept[i + 1]);
    }

    std::string out;
    for (size_t i = 0; i < kept.size(); ++i) {
        if (i > 0) out += ' ';
        out += kept[i];
    }
    return out;
}

std::vector<ExperimentRow> run_callback_experiment(const std::vector<KnowledgeRecord>& corpus,
                                                   IndexStrategy strategy, QueryMode mode,
                                                   const std::vector<int>& k_values,
                                                   EmbeddingBackend& embedder,
                                                   std::uint64_t seed, int sample_size) {
    if (sample_size < 1) throw std::invalid_argument("sample_size must be >= 1");
    VectorIndex index = build_index(corpus, strategy, embedder);

    // Seeded Fisher-Yates so the sample is identical across platforms.
    std::vector<size_t> order(corpus.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (size_t i = order.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    size_t take = std::min(static_cast<size_t>(sample_size), corpus.size());

    std::vector<LabeledQuery> queries;
    queries.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        const auto& record = corpus[order[i]];
        std::string source = record.key_text ? *record.key_text : record.text;
        LabeledQuery q;
        q.query_text = mode == QueryMode::kRephrased ? synthetic_rephrase(source, seed) : source;
        q.relevant_record_id = record.id;
        queries.push_back(std::move(q));
    }

    std::vector<ExperimentRow> rows;
    rows.reserve(k_values.size());
    for (int k : k_values) {
        rows.push_back({strategy, mode, k, callback(index, queries, k, embedder)});
    }
    return rows;
}

void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
    out << "strategy,query_mode,k,callback\n";
    char buf[32];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f", row.callback);
        out << to_string(row.strategy) << ',' << to_string(row.query_mode) << ',' << row.k
            << ',' << buf << '\n';
    }
}

std::vector<KnowledgeRecord> read_corpus(std::istream& in) {
    std::vector<KnowledgeRecord> corpus;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": " + e.what());
        }
        KnowledgeRecord record;
        record.id = j.at("id").get<std::string>();
        record.text = j.at("text").get<std::string>();
        if (j.contains("key_text") && !j.at("key_text").is_null()) {
            record.key_text = j.at("key_text").get<std::string>();
        }
        corpus.push_back(std::move(record));
    }
    return corpus;
}

std::vector<KnowledgeRecord> read_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<KnowledgeRecord>& corpus) {
    for (const auto& record : corpus) {
        nlohmann::json j{{"id", record.id}, {"text", record.text}};
        if (record.key_text) j["key_text"] = *record.key_text;
        out << j.dump() << '\n';
    }
}

}  // namespace guardrail::grounding
