#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "claimrank/corpus.hpp"
#include "claimrank/embedding.hpp"
#include "claimrank/retrieval.hpp"
#include "json.hpp"

namespace testutil {

// Self-cleaning scratch directory for one test case.
class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        auto base = std::filesystem::temp_directory_path();
        path_ = base / ("claimrank_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// --- corpus fixtures ---------------------------------------------------

inline claimrank::Post make_post(const std::string& id, const std::string& lang,
                                 const std::string& text) {
    claimrank::Post post;
    post.id = id;
    post.language = lang;
    post.text_original = text;
    post.text_english = text;
    return post;
}

inline claimrank::FactCheck make_factcheck(const std::string& id, const std::string& lang,
                                           const std::string& claim,
                                           const std::string& title = "") {
    claimrank::FactCheck fc;
    fc.id = id;
    fc.language = lang;
    fc.claim_original = claim;
    fc.claim_english = claim;
    fc.title_original = title;
    fc.title_english = title;
    return fc;
}

inline std::string posts_jsonl(const std::vector<claimrank::Post>& posts) {
    std::string out;
    for (const auto& post : posts) {
        nlohmann::json j;
        j["id"] = post.id;
        j["language"] = post.language;
        j["text_original"] = post.text_original;
        j["text_english"] = post.text_english;
        if (!post.ocr_blocks.empty()) {
            j["ocr"] = nlohmann::json::array();
            for (const auto& block : post.ocr_blocks) {
                nlohmann::json b;
                b["text_original"] = block.text_original;
                b["text_english"] = block.text_english;
                if (block.detected_language) b["detected_language"] = *block.detected_language;
                j["ocr"].push_back(b);
            }
        }
        if (post.verdict) j["verdict"] = *post.verdict;
        if (!post.timestamps.empty()) j["timestamps"] = post.timestamps;
        out += j.dump() + "\n";
    }
    return out;
}

inline std::string factchecks_jsonl(const std::vector<claimrank::FactCheck>& fcs) {
    std::string out;
    for (const auto& fc : fcs) {
        nlohmann::json j;
        j["id"] = fc.id;
        j["language"] = fc.language;
        j["claim_original"] = fc.claim_original;
        j["claim_english"] = fc.claim_english;
        j["title_original"] = fc.title_original;
        j["title_english"] = fc.title_english;
        out += j.dump() + "\n";
    }
    return out;
}

inline std::string pairs_jsonl(const std::set<std::pair<std::string, std::string>>& pairs) {
    std::string out;
    for (const auto& [post_id, fc_id] : pairs) {
        nlohmann::json j;
        j["post_id"] = post_id;
        j["factcheck_id"] = fc_id;
        out += j.dump() + "\n";
    }
    return out;
}

// A corpus shaped like a realistic dev split: per-language post/pair counts
// fra 188/200, spa 615/692, eng 478/627, por 302/403, tha 42/42, deu 83/101,
// msa 105/116, ara 78/78. Posts with an extra gold are the first
// (pairs - posts) of each language.
struct DevShapedCorpus {
    std::vector<claimrank::Post> posts;
    std::vector<claimrank::FactCheck> factchecks;
    std::set<std::pair<std::string, std::string>> pairs;
};

inline DevShapedCorpus make_dev_shaped_corpus() {
    const std::vector<std::pair<std::string, std::pair<int, int>>> shape = {
        {"ara", {78, 78}},  {"deu", {83, 101}},  {"eng", {478, 627}}, {"fra", {188, 200}},
        {"msa", {105, 116}}, {"por", {302, 403}}, {"spa", {615, 692}}, {"tha", {42, 42}},
    };
    DevShapedCorpus corpus;
    for (const auto& [lang, counts] : shape) {
        auto [n_posts, n_pairs] = counts;
        int extras = n_pairs - n_posts;
        int next_fc = 0;
        for (int i = 0; i < n_posts; ++i) {
            std::string post_id = "post_" + lang + "_" + std::to_string(i);
            corpus.posts.push_back(make_post(post_id, lang, "post " + post_id));
            int golds = i < extras ? 2 : 1;
            for (int g = 0; g < golds; ++g) {
                std::string fc_id = "fc_" + lang + "_" + std::to_string(next_fc++);
                corpus.factchecks.push_back(
                    make_factcheck(fc_id, lang, "claim " + fc_id, "title " + fc_id));
                corpus.pairs.emplace(post_id, fc_id);
            }
        }
    }
    return corpus;
}

// --- embedding fixtures -------------------------------------------------

inline std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    std::vector<float> v(dim);
    for (auto& x : v) x = dist(rng);
    return v;
}

inline claimrank::EmbeddingMatrix make_matrix(const std::vector<std::string>& ids,
                                              const std::vector<std::vector<float>>& rows,
                                              const std::string& model_id = "test-model") {
    claimrank::EmbeddingMatrix m;
    m.model_id = model_id;
    m.ids = ids;
    m.dim = rows.empty() ? 0 : std::uint32_t(rows[0].size());
    for (const auto& row : rows) m.rows.insert(m.rows.end(), row.begin(), row.end());
    return m;
}

// --- brute-force retrieval oracle ---------------------------------------

// Cosine via plain sequential double loops; full sort; top k ids.
inline std::vector<std::string> oracle_top_k(const std::vector<float>& query,
                                             const claimrank::EmbeddingMatrix& matrix, int k) {
    auto plain_dot = [](const float* a, const float* b, std::size_t n) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += double(a[i]) * double(b[i]);
        return s;
    };
    double qnorm = std::sqrt(plain_dot(query.data(), query.data(), query.size()));
    std::vector<std::pair<double, std::string>> scored;
    scored.reserve(matrix.size());
    for (std::size_t r = 0; r < matrix.size(); ++r) {
        const float* row = matrix.row(r);
        double rnorm = std::sqrt(plain_dot(row, row, matrix.dim));
        double score = 0.0;
        if (qnorm >= 1e-12 && rnorm >= 1e-12)
            score = plain_dot(query.data(), row, matrix.dim) / (qnorm * rnorm);
        scored.emplace_back(score, matrix.ids[r]);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < std::min<std::size_t>(k, scored.size()); ++i)
        ids.push_back(scored[i].second);
    return ids;
}

// --- straight-line fusion oracles ----------------------------------------
// Written directly from the two-phase description, scanning from the start
// of each list at every step instead of keeping cursors.

inline const std::string* scan_window(const std::vector<std::string>& list, std::size_t from,
                                      std::size_t to, const std::set<std::string>& taken) {
    for (std::size_t i = from; i < std::min(to, list.size()); ++i)
        if (!taken.count(list[i])) return &list[i];
    return nullptr;
}

inline std::vector<std::string> reference_fuse(const std::vector<std::vector<std::string>>& lists,
                                               std::size_t seed, std::size_t k) {
    std::vector<std::string> out;
    std::set<std::string> taken;
    // Phase 1: seed rounds, each model contributing its next unseen id from
    // within its top-seed window.
    for (std::size_t round = 0; round < seed && out.size() < k; ++round) {
        for (const auto& list : lists) {
            if (out.size() >= k) break;
            if (const std::string* id = scan_window(list, 0, seed, taken)) {
                out.push_back(*id);
                taken.insert(*id);
            }
        }
    }
    // Phase 2: alternate over positions seed+1 and further.
    bool any = true;
    while (out.size() < k && any) {
        any = false;
        for (const auto& list : lists) {
            if (out.size() >= k) break;
            if (const std::string* id = scan_window(list, seed, list.size(), taken)) {
                out.push_back(*id);
                taken.insert(*id);
                any = true;
            }
        }
    }
    return out;
}

inline std::vector<std::string> entry_ids(const std::vector<claimrank::RankedEntry>& entries) {
    std::vector<std::string> ids;
    for (const auto& entry : entries) ids.push_back(entry.factcheck_id);
    return ids;
}

inline std::vector<claimrank::RankedEntry> as_entries(const std::vector<std::string>& ids) {
    std::vector<claimrank::RankedEntry> entries;
    for (std::size_t i = 0; i < ids.size(); ++i)
        entries.push_back({ids[i], 1.0f / float(i + 1), std::uint32_t(i + 1)});
    return entries;
}

}  // namespace testutil
