#pragma once

#include <string>

#include "claimrank/retrieval.hpp"

namespace claimrank {

// Writes a run in the whitespace-separated six-column layout
// `post_id Q0 factcheck_id rank score run_tag`, posts in ascending id
// order, entries in rank order, scores with six decimal places.
void save_run(const RankedRun& run, const std::string& path);

// Parses a run file back. Enforces the six-column layout, numeric
// rank/score fields, ranks starting at 1 and increasing by 1 within each
// post, and a single run tag across all lines.
RankedRun load_run(const std::string& path);

}  // namespace claimrank
