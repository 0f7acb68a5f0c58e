#include "claimrank/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <unordered_set>

namespace claimrank {

namespace {

constexpr double kZeroNormThreshold = 1e-12;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double row_norm(const float* row, std::uint32_t dim) {
    double sum = 0.0;
    for (std::uint32_t j = 0; j < dim; ++j) sum += double(row[j]) * double(row[j]);
    return std::sqrt(sum);
}

}  // namespace

bool EmbeddingMatrix::row_is_zero(std::size_t i) const {
    const float* r = row(i);
    for (std::uint32_t j = 0; j < dim; ++j)
        if (r[j] != 0.0f) return false;
    return true;
}

void EmbeddingMatrix::normalize() {
    for (std::size_t i = 0; i < size(); ++i) {
        float* r = row(i);
        double norm = row_norm(r, dim);
        if (norm < kZeroNormThreshold) {
            std::fill(r, r + dim, 0.0f);
            continue;
        }
        double inv = 1.0 / norm;
        for (std::uint32_t j = 0; j < dim; ++j) r[j] = float(double(r[j]) * inv);
    }
    normalized = true;
}

void EmbeddingMatrix::validate() const {
    if (rows.size() != std::size_t(dim) * ids.size())
        throw Error("embedding matrix: rows/ids size mismatch");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second) throw DuplicateId("duplicate id '" + id + "' in matrix");
}

std::unordered_map<std::string, std::size_t> id_index(const EmbeddingMatrix& m) {
    std::unordered_map<std::string, std::size_t> index;
    index.reserve(m.ids.size());
    for (std::size_t i = 0; i < m.ids.size(); ++i) index.emplace(m.ids[i], i);
    return index;
}

EmbeddingMatrix select_rows(const EmbeddingMatrix& m, const std::vector<std::string>& ids) {
    auto index = id_index(m);
    EmbeddingMatrix out;
    out.model_id = m.model_id;
    out.dim = m.dim;
    out.normalized = m.normalized;
    out.ids = ids;
    out.rows.resize(std::size_t(m.dim) * ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = index.find(ids[i]);
        if (it == index.end())
            throw DanglingReference("id '" + ids[i] + "' not found in matrix " + m.model_id);
        std::copy(m.row(it->second), m.row(it->second) + m.dim, out.row(i));
    }
    return out;
}

std::vector<float> l2_normalize(const std::vector<float>& v) {
    double norm = row_norm(v.data(), std::uint32_t(v.size()));
    if (norm < kZeroNormThreshold) throw ZeroVector("cannot normalize a zero vector");
    double inv = 1.0 / norm;
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = float(double(v[i]) * inv);
    return out;
}

std::vector<std::vector<float>> DeterministicEmbedder::embed(
    const std::vector<std::string>& texts) {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        std::uint64_t state = fnv1a64(text) ^ seed_;
        std::vector<float> vec(dim_);
        for (auto& x : vec) {
            // top 53 bits -> [-1, 1)
            double u = double(splitmix64(state) >> 11) * (1.0 / 9007199254740992.0);
            x = float(2.0 * u - 1.0);
        }
        out.push_back(std::move(vec));
    }
    return out;
}

std::vector<std::vector<float>> embed_batch(BatchEmbedder& embedder, const ProviderConfig& cfg,
                                            const std::vector<std::string>& texts,
                                            std::size_t batch_index) {
    if (texts.empty()) throw Error("embed_batch: empty batch");
    for (const auto& t : texts)
        if (t.empty()) throw Error("embed_batch: batch contains an empty text");

    int attempt = 0;
    for (;;) {
        try {
            auto vectors = embedder.embed(texts);
            if (vectors.size() != texts.size())
                throw ProviderError("provider returned " + std::to_string(vectors.size()) +
                                        " vectors for " + std::to_string(texts.size()) + " texts",
                                    cfg.provider_id, batch_index, false);
            for (std::size_t i = 1; i < vectors.size(); ++i) {
                if (vectors[i].size() != vectors[0].size())
                    throw DimensionMismatch(
                        "provider " + cfg.provider_id + " returned dimensions " +
                        std::to_string(vectors[0].size()) + " and " +
                        std::to_string(vectors[i].size()) + " within batch " +
                        std::to_string(batch_index));
            }
            return vectors;
        } catch (const ProviderError& e) {
            if (!e.retryable || attempt >= cfg.retry_limit)
                throw ProviderError(std::string(e.what()) + " (provider " + cfg.provider_id +
                                        ", batch " + std::to_string(batch_index) + ", attempt " +
                                        std::to_string(attempt + 1) + ")",
                                    cfg.provider_id, batch_index, false);
            int delay = cfg.retry_backoff_ms << attempt;
            std::this_thread::sleep_for(std::chrono::milliseconds(std::min(delay, 5000)));
            ++attempt;
        }
    }
}

EmbeddingMatrix embed_corpus(BatchEmbedder& embedder, const ProviderConfig& cfg,
                             const std::vector<std::pair<std::string, std::string>>& items) {
    {
        std::unordered_set<std::string> seen;
        for (const auto& [id, text] : items) {
            (void)text;
            if (!seen.insert(id).second) throw DuplicateId("duplicate item id '" + id + "'");
        }
    }

    EmbeddingMatrix matrix;
    matrix.model_id = cfg.provider_id;
    if (items.empty()) {
        matrix.normalized = true;
        return matrix;
    }

    const std::size_t batch_size = std::size_t(std::max(cfg.batch_size, 1));
    const std::size_t n_batches = (items.size() + batch_size - 1) / batch_size;
    std::vector<std::vector<std::vector<float>>> results(n_batches);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::map<std::size_t, std::exception_ptr> errors;

    auto worker = [&]() {
        for (;;) {
            std::size_t b = next.fetch_add(1);
            if (b >= n_batches || failed.load()) return;
            std::size_t begin = b * batch_size;
            std::size_t end = std::min(begin + batch_size, items.size());
            std::vector<std::string> texts;
            texts.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i) texts.push_back(items[i].second);
            try {
                results[b] = embed_batch(embedder, cfg, texts, b);
            } catch (const ProviderError& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                errors[b] = std::make_exception_ptr(ProviderError(
                    std::string(e.what()) + " while embedding items " + std::to_string(begin) +
                        ".." + std::to_string(end - 1) + " (ids " + items[begin].first + ".." +
                        items[end - 1].first + ")",
                    e.provider_id, e.batch_index, false));
                failed.store(true);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                errors[b] = std::current_exception();
                failed.store(true);
            }
        }
    };

    int parallel = std::max(cfg.max_parallel_requests, 1);
    std::size_t n_threads = std::min<std::size_t>(parallel, n_batches);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    // Rethrow the lowest-index failure so errors are deterministic under
    // concurrency.
    if (!errors.empty()) std::rethrow_exception(errors.begin()->second);

    matrix.dim = std::uint32_t(results[0][0].size());
    matrix.ids.reserve(items.size());
    matrix.rows.reserve(items.size() * matrix.dim);
    for (std::size_t b = 0; b < n_batches; ++b) {
        for (const auto& vec : results[b]) {
            if (vec.size() != matrix.dim)
                throw DimensionMismatch("provider " + cfg.provider_id +
                                        " returned dimensions " + std::to_string(matrix.dim) +
                                        " and " + std::to_string(vec.size()) +
                                        " across batches");
            matrix.rows.insert(matrix.rows.end(), vec.begin(), vec.end());
        }
    }
    for (const auto& [id, text] : items) {
        (void)text;
        matrix.ids.push_back(id);
    }
    matrix.normalize();
    return matrix;
}

}  // namespace claimrank
