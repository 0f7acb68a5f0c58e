#include "claimrank/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "claimrank/errors.hpp"
#include "json.hpp"

namespace claimrank {

namespace {

const char* kHistogramBins[] = {"1", "2", "3", "4", "5", "6",
                                "7", "8", "9", "10", "11+"};

// Gold fact-check ids per post, for posts that have at least one pair.
std::map<std::string, std::unordered_set<std::string>> gold_by_post(const PairSet& gold) {
    std::map<std::string, std::unordered_set<std::string>> by_post;
    for (const auto& [post_id, factcheck_id] : gold.pairs)
        by_post[post_id].insert(factcheck_id);
    return by_post;
}

// Ids within the top-k of a ranked list.
std::unordered_set<std::string> top_k_ids(const std::vector<RankedEntry>& entries, int k) {
    std::unordered_set<std::string> ids;
    for (const auto& entry : entries) {
        if (entry.rank > std::uint32_t(k)) break;
        ids.insert(entry.factcheck_id);
    }
    return ids;
}

enum class Mode { any_gold, all_golds };

double success_impl(const RankedRun& run, const PairSet& gold, int k, Mode mode) {
    if (k < 1) throw Error("success_at_k: k must be >= 1");
    auto by_post = gold_by_post(gold);
    if (by_post.empty()) throw NoGoldPosts("gold pair set is empty");

    std::size_t hits = 0;
    for (const auto& [post_id, golds] : by_post) {
        auto it = run.lists.find(post_id);
        if (it == run.lists.end())
            throw DanglingReference("gold post '" + post_id + "' not covered by run '" +
                                    run.run_tag + "'");
        auto top = top_k_ids(it->second, k);
        std::size_t found = 0;
        for (const auto& fc : golds) found += top.count(fc);
        if (mode == Mode::any_gold ? found > 0 : found == golds.size()) ++hits;
    }
    return double(hits) / double(by_post.size());
}

}  // namespace

double success_at_k(const RankedRun& run, const PairSet& gold, int k) {
    return success_impl(run, gold, k, Mode::any_gold);
}

double strict_success_at_k(const RankedRun& run, const PairSet& gold, int k) {
    return success_impl(run, gold, k, Mode::all_golds);
}

double macro_average(const std::map<std::string, double>& per_language_scores) {
    if (per_language_scores.empty()) throw EmptyInput("macro_average: no languages");
    double sum = 0.0;
    for (const auto& [_, score] : per_language_scores) sum += score;
    return sum / double(per_language_scores.size());
}

double relative_difference(double s_at_k, double s_at_k2) {
    if (s_at_k <= 0.0) throw DivisionByZero("relative_difference: base score must be positive");
    return (s_at_k2 - s_at_k) / s_at_k * 100.0;
}

RankHistogram rank_histogram(const RankedRun& run, const PairSet& gold) {
    RankHistogram histogram;
    for (const char* bin : kHistogramBins) histogram.counts[bin] = 0;

    for (const auto& [post_id, factcheck_id] : gold.pairs) {
        ++histogram.total_pairs;
        std::uint32_t rank = 0;
        auto it = run.lists.find(post_id);
        if (it != run.lists.end())
            for (const auto& entry : it->second)
                if (entry.factcheck_id == factcheck_id) {
                    rank = entry.rank;
                    break;
                }
        if (rank >= 1 && rank <= 10)
            ++histogram.counts[std::to_string(rank)];
        else
            ++histogram.counts["11+"];
    }
    return histogram;
}

MissedReport missed_pairs(const RankedRun& run, const PairSet& gold, int k) {
    if (k < 1) throw Error("missed_pairs: k must be >= 1");
    MissedReport report;
    std::unordered_map<std::string, std::unordered_set<std::string>> top_cache;
    for (const auto& [post_id, factcheck_id] : gold.pairs) {
        ++report.total_pairs;
        auto cached = top_cache.find(post_id);
        if (cached == top_cache.end()) {
            auto it = run.lists.find(post_id);
            std::unordered_set<std::string> top;
            if (it != run.lists.end()) top = top_k_ids(it->second, k);
            cached = top_cache.emplace(post_id, std::move(top)).first;
        }
        if (cached->second.count(factcheck_id))
            ++report.hit_pairs;
        else
            ++report.missed_pairs;
    }
    if (report.total_pairs > 0) {
        report.missed_rate = double(report.missed_pairs) / double(report.total_pairs);
        report.hit_rate = double(report.hit_pairs) / double(report.total_pairs);
    }
    return report;
}

EvalReport evaluate(const RankedRun& run, const PairSet& gold, const Corpus& corpus, int k) {
    EvalReport report;
    report.run_tag = run.run_tag;
    report.k = k;

    std::unordered_map<std::string, const Post*> post_by_id;
    for (const auto& post : corpus.posts) post_by_id.emplace(post.id, &post);

    // Split the gold pairs into language groups; cross-lingual evaluation
    // pools everything under "all".
    std::map<std::string, PairSet> groups;
    for (const auto& pair : gold.pairs) {
        std::string language = "all";
        if (run.scenario == Scenario::monolingual) {
            auto it = post_by_id.find(pair.first);
            if (it == post_by_id.end())
                throw DanglingReference("gold post '" + pair.first + "' not in corpus");
            language = it->second->language;
        }
        groups[language].pairs.insert(pair);
    }

    std::map<std::string, double> scores;
    for (const auto& [language, pairs] : groups) {
        LanguageMetrics metrics;
        metrics.pairs = int(pairs.pairs.size());
        metrics.posts = int(gold_by_post(pairs).size());
        metrics.success_at_k = success_at_k(run, pairs, k);
        metrics.strict_success_at_k = strict_success_at_k(run, pairs, k);
        report.per_language[language] = metrics;
        scores[language] = metrics.success_at_k;
    }
    report.macro_success_at_k = macro_average(scores);
    report.histogram = rank_histogram(run, gold);
    report.missed = missed_pairs(run, gold, 10);
    return report;
}

std::string report_json(const EvalReport& report) {
    nlohmann::ordered_json doc;
    doc["run_tag"] = report.run_tag;
    doc["k"] = report.k;
    nlohmann::ordered_json langs = nlohmann::ordered_json::object();
    for (const auto& [language, metrics] : report.per_language) {
        langs[language] = {{"posts", metrics.posts},
                           {"pairs", metrics.pairs},
                           {"s_at_k", metrics.success_at_k},
                           {"strict_s_at_k", metrics.strict_success_at_k}};
    }
    doc["per_language"] = langs;
    doc["macro_s_at_k"] = report.macro_success_at_k;
    nlohmann::ordered_json hist = nlohmann::ordered_json::object();
    for (const char* bin : kHistogramBins) hist[bin] = report.histogram.counts.at(bin);
    doc["histogram"] = hist;
    doc["missed"] = {{"missed", report.missed.missed_pairs},
                     {"hit", report.missed.hit_pairs},
                     {"total", report.missed.total_pairs}};
    return doc.dump(2) + "\n";
}

std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    char buf[64];
    out << "language,posts,pairs,s_at_k,strict_s_at_k\n";
    for (const auto& [language, metrics] : report.per_language) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f", metrics.success_at_k,
                      metrics.strict_success_at_k);
        out << language << ',' << metrics.posts << ',' << metrics.pairs << ',' << buf << '\n';
    }
    std::snprintf(buf, sizeof(buf), "%.6f", report.macro_success_at_k);
    out << "macro,,," << buf << ",\n";
    return out.str();
}

}  // namespace claimrank
