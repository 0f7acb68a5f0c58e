#pragma once

#include <map>
#include <string>
#include <vector>

namespace claimrank {

// Dev-set S@10 per candidate (single models and fusion combinations) and
// language. Row and column order follow the source CSV.
struct DevScoreTable {
    std::vector<std::string> candidates;
    std::vector<std::string> languages;
    std::map<std::string, std::map<std::string, double>> scores;
};

struct SelectionPlan {
    std::map<std::string, std::string> per_language;
    std::string default_tag;
};

// Reads a CSV with header `candidate,<lang1>,<lang2>,...` and one row per
// candidate tag; scores must lie in [0, 1].
DevScoreTable read_score_csv(const std::string& path);

// Picks the per-language argmax. Ties go to the candidate built from the
// fewest models (tags joined with '+'), then to the earliest entry in
// tie_break. The default tag for unseen languages is the candidate with
// the best macro (unweighted mean) score, same tie-breaking.
SelectionPlan select_best(const DevScoreTable& table,
                          const std::vector<std::string>& tie_break);

// The plan's tag for the language, or default_tag when unseen.
std::string apply_plan(const SelectionPlan& plan, const std::string& language);

std::string plan_json(const SelectionPlan& plan);
SelectionPlan plan_from_json(const std::string& text);

}  // namespace claimrank
