#include "claimrank/run_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "claimrank/errors.hpp"
#include "claimrank/strings.hpp"

namespace claimrank {

void save_run(const RankedRun& run, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    char score_buf[32];
    for (const auto& [post_id, entries] : run.lists) {
        for (const auto& entry : entries) {
            std::snprintf(score_buf, sizeof(score_buf), "%.6f", double(entry.score));
            out << post_id << " Q0 " << entry.factcheck_id << ' ' << entry.rank << ' '
                << score_buf << ' ' << run.run_tag << '\n';
        }
    }
    if (!out) throw Error("write failed for '" + path + "'");
}

RankedRun load_run(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open run file '" + path + "'");

    RankedRun run;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream fields(line);
        std::string post_id, q0, factcheck_id, rank_str, score_str, tag, extra;
        if (!(fields >> post_id >> q0 >> factcheck_id >> rank_str >> score_str >> tag))
            throw ParseError(path, line_no, "expected six whitespace-separated columns");
        if (fields >> extra)
            throw ParseError(path, line_no, "unexpected trailing column '" + extra + "'");
        if (q0 != "Q0") throw ParseError(path, line_no, "second column must be 'Q0'");

        std::uint32_t rank = 0;
        float score = 0.0f;
        try {
            std::size_t used = 0;
            unsigned long parsed = std::stoul(rank_str, &used);
            if (used != rank_str.size()) throw std::invalid_argument(rank_str);
            rank = std::uint32_t(parsed);
            score = std::stof(score_str, &used);
            if (used != score_str.size()) throw std::invalid_argument(score_str);
        } catch (const std::exception&) {
            throw ParseError(path, line_no, "rank and score must be numeric");
        }

        if (run.run_tag.empty())
            run.run_tag = tag;
        else if (run.run_tag != tag)
            throw ParseError(path, line_no,
                             "run tag '" + tag + "' conflicts with '" + run.run_tag + "'");

        auto& entries = run.lists[post_id];
        if (rank != entries.size() + 1)
            throw ParseError(path, line_no,
                             "rank " + rank_str + " for post '" + post_id + "' (expected " +
                                 std::to_string(entries.size() + 1) + ")");
        entries.push_back({factcheck_id, score, rank});
    }
    return run;
}

}  // namespace claimrank
