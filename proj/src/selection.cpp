#include "claimrank/selection.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "claimrank/errors.hpp"
#include "claimrank/strings.hpp"
#include "json.hpp"

namespace claimrank {

DevScoreTable read_score_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open score table '" + path + "'");

    DevScoreTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split(line, ',');
        for (auto& cell : cells) cell = trim(cell);

        if (table.languages.empty()) {
            if (cells.size() < 2 || cells[0] != "candidate")
                throw ParseError(path, line_no, "header must be 'candidate,<lang1>,...'");
            std::set<std::string> seen;
            for (std::size_t i = 1; i < cells.size(); ++i) {
                if (cells[i].empty() || !seen.insert(cells[i]).second)
                    throw ParseError(path, line_no, "empty or duplicate language column");
                table.languages.push_back(cells[i]);
            }
            continue;
        }

        if (cells.size() != table.languages.size() + 1)
            throw ParseError(path, line_no,
                             "expected " + std::to_string(table.languages.size() + 1) +
                                 " columns, got " + std::to_string(cells.size()));
        const std::string& tag = cells[0];
        if (tag.empty() || table.scores.count(tag))
            throw ParseError(path, line_no, "empty or duplicate candidate tag");
        table.candidates.push_back(tag);
        auto& row = table.scores[tag];
        for (std::size_t i = 1; i < cells.size(); ++i) {
            double value = 0.0;
            try {
                std::size_t used = 0;
                value = std::stod(cells[i], &used);
                if (used != cells[i].size()) throw std::invalid_argument(cells[i]);
            } catch (const std::exception&) {
                throw ParseError(path, line_no, "score '" + cells[i] + "' is not numeric");
            }
            if (value < 0.0 || value > 1.0)
                throw ParseError(path, line_no, "score " + cells[i] + " outside [0, 1]");
            row[table.languages[i - 1]] = value;
        }
    }
    if (table.languages.empty() || table.candidates.empty())
        throw EmptyTable("score table '" + path + "' has no data rows");
    return table;
}

namespace {

int constituent_models(const std::string& tag) {
    return int(std::count(tag.begin(), tag.end(), '+')) + 1;
}

// Argmax over candidates under (score desc, fewest constituents, tie_break
// position). score_of must be defined for every candidate.
template <typename ScoreFn>
std::string pick(const std::vector<std::string>& candidates,
                 const std::map<std::string, std::size_t>& tie_rank, ScoreFn score_of) {
    const std::string* best = nullptr;
    double best_score = 0.0;
    for (const auto& tag : candidates) {
        double score = score_of(tag);
        if (best == nullptr) {
            best = &tag;
            best_score = score;
            continue;
        }
        bool wins;
        if (score != best_score) {
            wins = score > best_score;
        } else {
            int a = constituent_models(tag), b = constituent_models(*best);
            wins = a != b ? a < b : tie_rank.at(tag) < tie_rank.at(*best);
        }
        if (wins) {
            best = &tag;
            best_score = score;
        }
    }
    return *best;
}

}  // namespace

SelectionPlan select_best(const DevScoreTable& table, const std::vector<std::string>& tie_break) {
    if (table.candidates.empty() || table.languages.empty())
        throw EmptyTable("score table has no candidates or languages");

    std::map<std::string, std::size_t> tie_rank;
    for (std::size_t i = 0; i < tie_break.size(); ++i) tie_rank.emplace(tie_break[i], i);
    for (const auto& tag : table.candidates)
        if (!tie_rank.count(tag))
            throw ConfigError("tie_break list does not cover candidate '" + tag + "'");

    SelectionPlan plan;
    for (const auto& language : table.languages) {
        plan.per_language[language] = pick(table.candidates, tie_rank, [&](const std::string& t) {
            return table.scores.at(t).at(language);
        });
    }
    plan.default_tag = pick(table.candidates, tie_rank, [&](const std::string& t) {
        double sum = 0.0;
        for (const auto& language : table.languages) sum += table.scores.at(t).at(language);
        return sum / double(table.languages.size());
    });
    return plan;
}

std::string apply_plan(const SelectionPlan& plan, const std::string& language) {
    auto it = plan.per_language.find(language);
    return it != plan.per_language.end() ? it->second : plan.default_tag;
}

std::string plan_json(const SelectionPlan& plan) {
    nlohmann::ordered_json doc;
    doc["per_language"] = nlohmann::ordered_json::object();
    for (const auto& [language, tag] : plan.per_language) doc["per_language"][language] = tag;
    doc["default"] = plan.default_tag;
    return doc.dump(2) + "\n";
}

SelectionPlan plan_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("selection plan is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("per_language") || !doc.contains("default") ||
        !doc["per_language"].is_object() || !doc["default"].is_string())
        throw FormatError("selection plan must have 'per_language' object and 'default' string");
    SelectionPlan plan;
    for (const auto& [language, tag] : doc["per_language"].items()) {
        if (!tag.is_string()) throw FormatError("plan tag for '" + language + "' must be a string");
        plan.per_language[language] = tag.get<std::string>();
    }
    plan.default_tag = doc["default"].get<std::string>();
    return plan;
}

}  // namespace claimrank
