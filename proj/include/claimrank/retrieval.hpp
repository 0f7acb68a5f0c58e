#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "claimrank/corpus.hpp"
#include "claimrank/embedding.hpp"

namespace claimrank {

// One retrieved candidate. rank is 1-based.
struct RankedEntry {
    std::string factcheck_id;
    float score = 0.0f;
    std::uint32_t rank = 0;
};

enum class Scenario { monolingual, crosslingual };

Scenario parse_scenario(const std::string& s);
std::string to_string(Scenario scenario);

struct RetrievalConfig {
    int k = 10;
    Scenario scenario = Scenario::monolingual;
};

// Ranked candidate lists for a set of posts, produced by one model or one
// fusion. Lists are keyed by post id; entries are ordered by
// (score desc, factcheck_id asc) with consecutive ranks from 1.
struct RankedRun {
    std::string run_tag;
    Scenario scenario = Scenario::monolingual;
    std::map<std::string, std::vector<RankedEntry>> lists;
    std::vector<std::string> warnings;  // e.g. posts with an empty candidate pool
};

// dot(a, b) / (|a| |b|). Zero vectors short-circuit to 0.
double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b);

// The min(k, |candidates|) highest-scoring rows of `matrix` for one query,
// ties broken by id ascending. candidate_filter, when given, restricts the
// candidate rows by id. Works on normalized and raw matrices alike.
std::vector<RankedEntry> top_k(const QueryVector& query, const EmbeddingMatrix& matrix, int k,
                               const std::unordered_set<std::string>* candidate_filter = nullptr);

// Exact top-k of all candidate rows for a block of queries (row-major
// buffer, one row per query, already normalized when the matrix is).
// Splits candidate rows across num_threads (0 = hardware concurrency);
// the result does not depend on the split.
std::vector<std::vector<RankedEntry>> batch_top_k(const float* queries, std::size_t n_queries,
                                                  const EmbeddingMatrix& matrix,
                                                  const std::vector<std::uint32_t>& candidate_rows,
                                                  int k, int num_threads = 0);

// Runs every query against the fact-check matrix. The monolingual scenario
// restricts candidates to fact-checks in the post's language; posts whose
// pool is empty get an empty list plus a warning. run_tag is taken from
// matrix.model_id.
RankedRun retrieve_run(const std::vector<QueryVector>& queries, const std::vector<Post>& posts,
                       const EmbeddingMatrix& matrix, const std::vector<FactCheck>& factchecks,
                       const RetrievalConfig& cfg);

}  // namespace claimrank
