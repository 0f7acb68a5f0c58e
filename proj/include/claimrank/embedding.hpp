#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "claimrank/corpus.hpp"
#include "claimrank/errors.hpp"

namespace claimrank {

// Connection and batching settings for one embedding provider.
//
// endpoint_url schemes:
//   http:// https://   remote service speaking the embeddings protocol
//   mock://deterministic?dim=N[&seed=S]   in-process hash-seeded vectors
//   file:///path.emb   precomputed matrix, rows selected by item id
struct ProviderConfig {
    std::string provider_id;
    std::string endpoint_url;
    std::string model_name;
    std::string api_key_env_var;  // empty: no Authorization header
    int batch_size = 32;
    int max_parallel_requests = 4;
    int retry_limit = 3;
    int retry_backoff_ms = 250;
    std::optional<std::string> query_prompt;
    TextMode text_mode = TextMode::english;
};

// An id-indexed matrix of float32 embedding rows for one model. Immutable
// after construction; safe for concurrent reads.
struct EmbeddingMatrix {
    std::string model_id;
    std::vector<std::string> ids;
    std::uint32_t dim = 0;
    std::vector<float> rows;  // ids.size() x dim, row-major
    bool normalized = false;

    std::size_t size() const { return ids.size(); }
    const float* row(std::size_t i) const { return rows.data() + i * dim; }
    float* row(std::size_t i) { return rows.data() + i * dim; }

    // True when row i was flagged as degenerate at normalization time
    // (all-zero rows score 0 against every query).
    bool row_is_zero(std::size_t i) const;

    // L2-normalizes every row in place. Rows with norm < 1e-12 are stored
    // as all-zero. Idempotent.
    void normalize();

    // Checks id/row consistency and id uniqueness.
    void validate() const;
};

// id -> row index lookup for a matrix.
std::unordered_map<std::string, std::size_t> id_index(const EmbeddingMatrix& m);

// New matrix containing the rows of `m` for exactly `ids`, in that order.
// Throws DanglingReference when an id is missing.
EmbeddingMatrix select_rows(const EmbeddingMatrix& m, const std::vector<std::string>& ids);

// One post embedding paired with the id it belongs to.
struct QueryVector {
    std::string post_id;
    std::vector<float> vector;
};

// Unit-length copy of v (direction preserved). Throws ZeroVector when the
// input norm is below 1e-12.
std::vector<float> l2_normalize(const std::vector<float>& v);

// A single embedding request attempt. Implementations must be callable from
// multiple threads. Transient failures are thrown as ProviderError with
// retryable=true; the retry policy lives in embed_batch.
class BatchEmbedder {
public:
    virtual ~BatchEmbedder() = default;
    virtual std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) = 0;
};

// Hash-seeded deterministic vectors; the same text always maps to the same
// vector regardless of batch composition.
class DeterministicEmbedder : public BatchEmbedder {
public:
    DeterministicEmbedder(std::uint32_t dim, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}
    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override;

private:
    std::uint32_t dim_;
    std::uint64_t seed_;
};

// Builds an embedder for cfg.endpoint_url (http, https or mock scheme).
// file:// matrices are handled by the pipeline, not through this interface.
std::unique_ptr<BatchEmbedder> make_embedder(const ProviderConfig& cfg);

// Embeds one batch, retrying transient failures up to cfg.retry_limit with
// exponential backoff. All returned vectors have identical dimension.
std::vector<std::vector<float>> embed_batch(BatchEmbedder& embedder, const ProviderConfig& cfg,
                                            const std::vector<std::string>& texts,
                                            std::size_t batch_index = 0);

// Embeds (id, text) items in batches of cfg.batch_size, issuing up to
// cfg.max_parallel_requests batches concurrently. Rows come back normalized,
// in item order, deterministically for any parallelism setting.
EmbeddingMatrix embed_corpus(BatchEmbedder& embedder, const ProviderConfig& cfg,
                             const std::vector<std::pair<std::string, std::string>>& items);

}  // namespace claimrank
