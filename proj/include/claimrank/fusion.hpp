#pragma once

#include <map>
#include <string>
#include <vector>

#include "claimrank/retrieval.hpp"

namespace claimrank {

// How to combine ranked runs: which models, in which priority order, how
// deep each model's seed window reaches, and how long the fused list is.
struct FusionSpec {
    std::vector<std::string> model_order;  // run tags, best model first
    int k = 10;
    int seed_depth = 0;  // 0 = derive from model count (5 for two, 3 for three)
};

// Core two-phase merge over id lists in rank order, best model first.
//
// Phase 1 walks seed_depth rounds; in each round every model contributes
// its next not-yet-emitted id from within its top-seed_depth window. Phase 2
// continues the alternation from position seed_depth+1 onward until k ids
// are emitted or every list is exhausted. Emitted ids get ranks 1..m and
// scores 1/rank.
std::vector<RankedEntry> fuse_ids(const std::vector<std::vector<std::string>>& lists,
                                  int seed_depth, int k);

std::vector<RankedEntry> fuse_two(const std::vector<RankedEntry>& run_a,
                                  const std::vector<RankedEntry>& run_b, int k = 10);

std::vector<RankedEntry> fuse_three(const std::vector<RankedEntry>& run_a,
                                    const std::vector<RankedEntry>& run_b,
                                    const std::vector<RankedEntry>& run_c, int k = 10);

// Fuses whole runs post by post. All tags in the spec must be present in
// `runs` and the runs must cover identical post ids and the same scenario.
// The fused run_tag joins the model tags with '+'. Posts whose input lists
// are all empty yield an empty fused list plus a warning.
RankedRun fuse_run(const FusionSpec& spec, const std::map<std::string, RankedRun>& runs);

}  // namespace claimrank
