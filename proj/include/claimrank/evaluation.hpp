#pragma once

#include <map>
#include <string>

#include "claimrank/corpus.hpp"
#include "claimrank/retrieval.hpp"

namespace claimrank {

struct LanguageMetrics {
    int posts = 0;
    int pairs = 0;
    double success_at_k = 0.0;
    double strict_success_at_k = 0.0;
};

// Where each gold fact-check landed: bins "1".."10" plus "11+" for ranks
// beyond ten or golds absent from the list.
struct RankHistogram {
    std::map<std::string, int> counts;
    int total_pairs = 0;
};

// Pair-level hit/miss counts within the top-k (top-10 in reports).
struct MissedReport {
    int missed_pairs = 0;
    int hit_pairs = 0;
    int total_pairs = 0;
    double missed_rate = 0.0;
    double hit_rate = 0.0;
};

struct EvalReport {
    std::string run_tag;
    int k = 10;
    std::map<std::string, LanguageMetrics> per_language;
    double macro_success_at_k = 0.0;
    RankHistogram histogram;
    MissedReport missed;
};

// Fraction of gold posts whose top-k list contains at least one of their
// gold fact-checks. Posts without gold pairs are ignored; every gold post
// must be covered by the run (an empty list counts as a miss).
double success_at_k(const RankedRun& run, const PairSet& gold, int k);

// Fraction of gold posts whose ENTIRE gold set lies within the top-k list.
double strict_success_at_k(const RankedRun& run, const PairSet& gold, int k);

// Unweighted arithmetic mean over languages.
double macro_average(const std::map<std::string, double>& per_language_scores);

// Percent change from s_at_k to s_at_k2: (s_at_k2 - s_at_k) / s_at_k * 100.
double relative_difference(double s_at_k, double s_at_k2);

RankHistogram rank_histogram(const RankedRun& run, const PairSet& gold);

MissedReport missed_pairs(const RankedRun& run, const PairSet& gold, int k = 10);

// Full report: per-language S@k and strict S@k grouped by post language
// (cross-lingual runs report the single pseudo-language "all"), unweighted
// macro average, rank histogram, and a top-10 missed-pair report.
EvalReport evaluate(const RankedRun& run, const PairSet& gold, const Corpus& corpus, int k);

std::string report_json(const EvalReport& report);
std::string report_csv(const EvalReport& report);

}  // namespace claimrank
