#include "claimrank/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace claimrank {

namespace {

// Dot product with double accumulation. Four independent lanes so the
// compiler can vectorize without changing the summation result.
double dot_f32(const float* a, const float* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += double(a[i]) * double(b[i]);
        s1 += double(a[i + 1]) * double(b[i + 1]);
        s2 += double(a[i + 2]) * double(b[i + 2]);
        s3 += double(a[i + 3]) * double(b[i + 3]);
    }
    for (; i < n; ++i) s0 += double(a[i]) * double(b[i]);
    return (s0 + s1) + (s2 + s3);
}

// Hot-path dot over preconverted doubles. Sixteen independent lanes hide the
// fused multiply-add latency; the reduction order is fixed, so results are
// deterministic for a given pair of inputs.
double dot_f64(const double* a, const double* b, std::size_t n) {
    constexpr std::size_t kLanes = 16;
    double lanes[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        for (std::size_t j = 0; j < kLanes; ++j) lanes[j] += a[i + j] * b[i + j];
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    double sum = tail;
    for (std::size_t j = 0; j < kLanes; ++j) sum += lanes[j];
    return sum;
}

struct Hit {
    double score;
    std::uint32_t row;
};

// Orders hits best-first: higher score wins, ties break on ascending id.
struct HitBefore {
    const std::vector<std::string>* ids;
    bool operator()(const Hit& a, const Hit& b) const {
        if (a.score != b.score) return a.score > b.score;
        return (*ids)[a.row] < (*ids)[b.row];
    }
};

// Bounded heap keeping the k best hits, worst on top.
class TopKHeap {
public:
    TopKHeap(std::size_t k, const std::vector<std::string>& ids) : k_(k), before_{&ids} {}

    void offer(double score, std::uint32_t row) {
        if (heap_.size() < k_) {
            heap_.push_back({score, row});
            std::push_heap(heap_.begin(), heap_.end(), before_);
            return;
        }
        if (!before_({score, row}, heap_.front())) return;
        std::pop_heap(heap_.begin(), heap_.end(), before_);
        heap_.back() = {score, row};
        std::push_heap(heap_.begin(), heap_.end(), before_);
    }

    double worst() const { return heap_.front().score; }
    bool full() const { return heap_.size() == k_; }
    std::vector<Hit> take() { return std::move(heap_); }

private:
    std::size_t k_;
    HitBefore before_;
    std::vector<Hit> heap_;
};

}  // namespace

Scenario parse_scenario(const std::string& s) {
    if (s == "monolingual" || s == "mono") return Scenario::monolingual;
    if (s == "crosslingual" || s == "cross") return Scenario::crosslingual;
    throw ConfigError("unknown scenario '" + s + "' (expected mono|cross)");
}

std::string to_string(Scenario scenario) {
    return scenario == Scenario::monolingual ? "monolingual" : "crosslingual";
}

double cosine_similarity(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("cosine_similarity: dimensions " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
    double dot = dot_f32(a.data(), b.data(), a.size());
    double na = std::sqrt(dot_f32(a.data(), a.data(), a.size()));
    double nb = std::sqrt(dot_f32(b.data(), b.data(), b.size()));
    if (na < 1e-12 || nb < 1e-12) return 0.0;
    return dot / (na * nb);
}

std::vector<std::vector<RankedEntry>> batch_top_k(const float* queries, std::size_t n_queries,
                                                  const EmbeddingMatrix& matrix,
                                                  const std::vector<std::uint32_t>& candidate_rows,
                                                  int k, int num_threads) {
    if (k < 1) throw Error("top_k: k must be >= 1");
    if (candidate_rows.empty()) throw EmptyCandidateSet("no candidate rows");
    const std::size_t dim = matrix.dim;
    const std::size_t keep = std::min<std::size_t>(std::size_t(k), candidate_rows.size());

    // Reciprocal row norms for raw matrices; normalized matrices score by
    // plain dot product.
    std::vector<double> inv_norms;
    if (!matrix.normalized) {
        inv_norms.resize(matrix.size());
        for (std::size_t r = 0; r < matrix.size(); ++r) {
            double norm = std::sqrt(dot_f32(matrix.row(r), matrix.row(r), dim));
            inv_norms[r] = norm < 1e-12 ? 0.0 : 1.0 / norm;
        }
    }

    std::size_t hw = std::thread::hardware_concurrency();
    std::size_t n_threads = num_threads > 0 ? std::size_t(num_threads) : std::max<std::size_t>(hw, 1);
    n_threads = std::min(n_threads, candidate_rows.size());

    // Queries are widened to doubles once up front so the inner loop runs
    // pure double arithmetic with no conversions.
    std::vector<double> queries_d(n_queries * dim);
    for (std::size_t i = 0; i < queries_d.size(); ++i) queries_d[i] = double(queries[i]);

    // Each thread scans a contiguous slice of the candidate rows and keeps
    // its own per-query top-k; slices are merged afterwards, so the result
    // is independent of the partitioning.
    std::vector<std::vector<std::vector<Hit>>> partial(n_threads);
    auto scan = [&](std::size_t t) {
        std::size_t chunk = (candidate_rows.size() + n_threads - 1) / n_threads;
        std::size_t begin = t * chunk;
        std::size_t end = std::min(begin + chunk, candidate_rows.size());
        std::vector<TopKHeap> heaps;
        heaps.reserve(n_queries);
        for (std::size_t q = 0; q < n_queries; ++q) heaps.emplace_back(keep, matrix.ids);

        // Query blocks are small enough to stay cache-resident, and each row
        // is widened once per block and reused across the whole block.
        constexpr std::size_t kQueryBlock = 64;
        std::vector<double> row_d(dim);
        for (std::size_t qb = 0; qb < n_queries; qb += kQueryBlock) {
            std::size_t qb_end = std::min(qb + kQueryBlock, n_queries);
            for (std::size_t c = begin; c < end; ++c) {
                std::uint32_t r = candidate_rows[c];
                const float* row = matrix.row(r);
                for (std::size_t j = 0; j < dim; ++j) row_d[j] = double(row[j]);
                for (std::size_t q = qb; q < qb_end; ++q) {
                    double score = dot_f64(queries_d.data() + q * dim, row_d.data(), dim);
                    if (!inv_norms.empty()) score *= inv_norms[r];
                    heaps[q].offer(score, r);
                }
            }
        }
        partial[t].reserve(n_queries);
        for (auto& heap : heaps) partial[t].push_back(heap.take());
    };

    if (n_threads <= 1) {
        scan(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(scan, t);
        for (auto& t : pool) t.join();
    }

    std::vector<std::vector<RankedEntry>> out(n_queries);
    std::vector<Hit> merged;
    for (std::size_t q = 0; q < n_queries; ++q) {
        merged.clear();
        for (std::size_t t = 0; t < n_threads; ++t)
            merged.insert(merged.end(), partial[t][q].begin(), partial[t][q].end());
        std::sort(merged.begin(), merged.end(), [&](const Hit& a, const Hit& b) {
            if (a.score != b.score) return a.score > b.score;
            return matrix.ids[a.row] < matrix.ids[b.row];
        });
        merged.resize(std::min(keep, merged.size()));
        out[q].reserve(merged.size());
        for (std::size_t i = 0; i < merged.size(); ++i)
            out[q].push_back({matrix.ids[merged[i].row], float(merged[i].score),
                              std::uint32_t(i + 1)});
    }
    return out;
}

std::vector<RankedEntry> top_k(const QueryVector& query, const EmbeddingMatrix& matrix, int k,
                               const std::unordered_set<std::string>* candidate_filter) {
    if (query.vector.size() != matrix.dim)
        throw DimensionMismatch("top_k: query dimension " + std::to_string(query.vector.size()) +
                                " vs matrix dimension " + std::to_string(matrix.dim));

    std::vector<std::uint32_t> candidates;
    if (candidate_filter == nullptr) {
        candidates.resize(matrix.size());
        for (std::size_t i = 0; i < matrix.size(); ++i) candidates[i] = std::uint32_t(i);
    } else {
        for (std::size_t i = 0; i < matrix.size(); ++i)
            if (candidate_filter->count(matrix.ids[i])) candidates.push_back(std::uint32_t(i));
    }
    if (candidates.empty()) throw EmptyCandidateSet("top_k: no candidates");

    // Cosine is scale-invariant, so the query is normalized up front; zero
    // queries score 0 everywhere.
    std::vector<float> normalized;
    const float* qdata = query.vector.data();
    double norm = std::sqrt(dot_f32(qdata, qdata, query.vector.size()));
    if (norm >= 1e-12) {
        normalized.resize(query.vector.size());
        for (std::size_t i = 0; i < normalized.size(); ++i)
            normalized[i] = float(double(qdata[i]) / norm);
        qdata = normalized.data();
    } else {
        normalized.assign(query.vector.size(), 0.0f);
        qdata = normalized.data();
    }

    return batch_top_k(qdata, 1, matrix, candidates, k, 0)[0];
}

RankedRun retrieve_run(const std::vector<QueryVector>& queries, const std::vector<Post>& posts,
                       const EmbeddingMatrix& matrix, const std::vector<FactCheck>& factchecks,
                       const RetrievalConfig& cfg) {
    if (cfg.k < 1) throw Error("retrieve_run: k must be >= 1");
    auto row_of = id_index(matrix);

    std::map<std::string, const Post*> post_by_id;
    for (const auto& post : posts) post_by_id.emplace(post.id, &post);

    // Candidate rows per language (monolingual) or one shared pool.
    std::map<std::string, std::vector<std::uint32_t>> pools;
    for (const auto& fc : factchecks) {
        auto it = row_of.find(fc.id);
        if (it == row_of.end())
            throw DanglingReference("fact-check '" + fc.id + "' has no row in matrix " +
                                    matrix.model_id);
        std::string key = cfg.scenario == Scenario::monolingual ? fc.language : std::string();
        pools[key].push_back(std::uint32_t(it->second));
    }
    for (auto& [lang, rows] : pools) std::sort(rows.begin(), rows.end());

    // Queries grouped by post language, in deterministic order.
    std::map<std::string, std::vector<const QueryVector*>> groups;
    for (const auto& query : queries) {
        auto it = post_by_id.find(query.post_id);
        if (it == post_by_id.end())
            throw DanglingReference("query post '" + query.post_id + "' not in post list");
        std::string key =
            cfg.scenario == Scenario::monolingual ? it->second->language : std::string();
        groups[key].push_back(&query);
    }

    RankedRun run;
    run.run_tag = matrix.model_id;
    run.scenario = cfg.scenario;

    for (auto& [key, members] : groups) {
        auto pool = pools.find(key);
        if (pool == pools.end() || pool->second.empty()) {
            for (const QueryVector* query : members) {
                run.lists[query->post_id] = {};
                run.warnings.push_back("post " + query->post_id +
                                       ": no candidate fact-checks for language '" + key + "'");
            }
            continue;
        }

        std::vector<float> buffer(members.size() * matrix.dim);
        for (std::size_t i = 0; i < members.size(); ++i) {
            const auto& vec = members[i]->vector;
            if (vec.size() != matrix.dim)
                throw DimensionMismatch("query '" + members[i]->post_id + "' dimension " +
                                        std::to_string(vec.size()) + " vs matrix dimension " +
                                        std::to_string(matrix.dim));
            double norm = std::sqrt(dot_f32(vec.data(), vec.data(), vec.size()));
            float* dst = buffer.data() + i * matrix.dim;
            if (norm >= 1e-12)
                for (std::size_t j = 0; j < vec.size(); ++j)
                    dst[j] = float(double(vec[j]) / norm);
            // zero queries stay zero and score 0 against everything
        }

        auto lists = batch_top_k(buffer.data(), members.size(), matrix, pool->second, cfg.k, 0);
        for (std::size_t i = 0; i < members.size(); ++i)
            run.lists[members[i]->post_id] = std::move(lists[i]);
    }
    return run;
}

}  // namespace claimrank
