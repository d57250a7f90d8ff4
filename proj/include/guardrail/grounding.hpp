#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "guardrail/backends.hpp"
#include "guardrail/types.hpp"

namespace guardrail::grounding {

struct KnowledgeRecord {
    std::string id;
    std::string text;                     // full entry
    std::optional<std::string> key_text;  // e.g. the question of a QA pair
};

enum class IndexStrategy {
    kWholeKnowledge,  // embed the entire entry text
    kKeyInformation,  // embed only key_text
};

std::string to_string(IndexStrategy strategy);
IndexStrategy index_strategy_from_string(const std::string& s);

// Immutable after build; safe for concurrent retrieval.
struct VectorIndex {
    IndexStrategy strategy = IndexStrategy::kWholeKnowledge;
    std::vector<KnowledgeRecord> corpus;
    std::vector<std::vector<float>> vectors;  // one unit vector per record
    size_t dimension = 0;

    size_t size() const { return corpus.size(); }
};

struct RetrievalResult {
    KnowledgeRecord record;
    double similarity = 0.0;  // cosine, in [-1, 1]
};

// Embeds each record under the strategy. key_information requires key_text on
// every record. Vectors must come back unit-normalized (1 +- 1e-6) and with a
// consistent dimension or the build fails.
VectorIndex build_index(const std::vector<KnowledgeRecord>& corpus, IndexStrategy strategy,
                        EmbeddingBackend& embedder);

// Exact top-k by cosine similarity, sorted descending with ties broken by
// ascending record id. Returns min(k, index size) results.
std::vector<RetrievalResult> retrieve(const VectorIndex& index, const std::string& query_text,
                                      int k, EmbeddingBackend& embedder);

struct GroundedQuery {
    std::string query_text;
    std::vector<RetrievalResult> hits;  // similarity order
    std::string prompt;                 // "#Context#: ...\n#Question#: ..." assembly
};

// Joins the hit texts into labeled context blocks followed by the question.
std::string assemble_grounded_prompt(const std::string& query_text,
                                     const std::vector<RetrievalResult>& hits);

// Hit texts joined with newlines; the context string handed to detection and
// repair.
std::string context_text(const std::vector<RetrievalResult>& hits);

GroundedQuery ground_query(const Query& query, const VectorIndex& index, int k,
                           EmbeddingBackend& embedder);

struct LabeledQuery {
    std::string query_text;
    std::string relevant_record_id;
};

// Definition-2 callback: fraction of queries whose relevant record appears in
// the top-k results.
double callback(const VectorIndex& index, const std::vector<LabeledQuery>& queries, int k,
                EmbeddingBackend& embedder);

enum class QueryMode { kOriginal, kRephrased };

std::string to_string(QueryMode mode);
QueryMode query_mode_from_string(const std::string& s);

// Deterministic synthetic rephraser: stopword removal plus seeded word-order
// perturbation. Same (text, seed) always yields the same output.
std::string synthetic_rephrase(const std::string& text, std::uint64_t seed);

struct ExperimentRow {
    IndexStrategy strategy;
    QueryMode query_mode;
    int k = 0;
    double callback = 0.0;
};

// Index-evaluation harness: samples up to sample_size records (seeded), forms
// queries from their key_text (or text when absent), optionally rephrases
// them, and computes one callback row per k.
std::vector<ExperimentRow> run_callback_experiment(const std::vector<KnowledgeRecord>& corpus,
                                                   IndexStrategy strategy, QueryMode mode,
                                                   const std::vector<int>& k_values,
                                                   EmbeddingBackend& embedder,
                                                   std::uint64_t seed, int sample_size = 50);

// CSV with header strategy,query_mode,k,callback.
void write_experiment_csv(std::ostream& out, const std::vector<ExperimentRow>& rows);

// Corpus JSONL: one {"id","text","key_text"?} object per line.
std::vector<KnowledgeRecord> read_corpus(std::istream& in);
std::vector<KnowledgeRecord> read_corpus_file(const std::string& path);
void write_corpus(std::ostream& out, const std::vector<KnowledgeRecord>& corpus);

}  // namespace guardrail::grounding
