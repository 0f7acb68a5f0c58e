#include "claimrank/fusion.hpp"

#include <algorithm>
#include <unordered_set>

#include "claimrank/errors.hpp"
#include "claimrank/strings.hpp"

namespace claimrank {

std::vector<RankedEntry> fuse_ids(const std::vector<std::vector<std::string>>& lists,
                                  int seed_depth, int k) {
    if (k < 1) throw Error("fuse: k must be >= 1");
    if (seed_depth < 1) throw Error("fuse: seed_depth must be >= 1");
    bool all_empty = true;
    for (const auto& list : lists) all_empty = all_empty && list.empty();
    if (lists.empty() || all_empty) throw EmptyInput("fuse: no input ids");

    const std::size_t n = lists.size();
    const std::size_t window = std::size_t(seed_depth);
    std::vector<std::size_t> cursor(n, 0);
    std::unordered_set<std::string> emitted;
    std::vector<std::string> out;

    auto advance_past_emitted = [&](std::size_t m, std::size_t limit) {
        while (cursor[m] < limit && emitted.count(lists[m][cursor[m]])) ++cursor[m];
    };

    // Phase 1: each model fills its seed window, best model first in every
    // round, skipping ids another model already contributed.
    for (std::size_t round = 0; round < window && out.size() < std::size_t(k); ++round) {
        for (std::size_t m = 0; m < n && out.size() < std::size_t(k); ++m) {
            std::size_t limit = std::min(window, lists[m].size());
            advance_past_emitted(m, limit);
            if (cursor[m] < limit) {
                emitted.insert(lists[m][cursor[m]]);
                out.push_back(lists[m][cursor[m]]);
                ++cursor[m];
            }
        }
    }

    // Phase 2: alternate from position seed_depth+1 onward.
    for (std::size_t m = 0; m < n; ++m) cursor[m] = std::max(cursor[m], window);
    bool progress = true;
    while (out.size() < std::size_t(k) && progress) {
        progress = false;
        for (std::size_t m = 0; m < n && out.size() < std::size_t(k); ++m) {
            advance_past_emitted(m, lists[m].size());
            if (cursor[m] < lists[m].size()) {
                emitted.insert(lists[m][cursor[m]]);
                out.push_back(lists[m][cursor[m]]);
                ++cursor[m];
                progress = true;
            }
        }
    }

    std::vector<RankedEntry> result;
    result.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        result.push_back({out[i], 1.0f / float(i + 1), std::uint32_t(i + 1)});
    return result;
}

namespace {

std::vector<std::string> ids_of(const std::vector<RankedEntry>& entries) {
    std::vector<std::string> ids;
    ids.reserve(entries.size());
    for (const auto& entry : entries) ids.push_back(entry.factcheck_id);
    return ids;
}

}  // namespace

std::vector<RankedEntry> fuse_two(const std::vector<RankedEntry>& run_a,
                                  const std::vector<RankedEntry>& run_b, int k) {
    return fuse_ids({ids_of(run_a), ids_of(run_b)}, 5, k);
}

std::vector<RankedEntry> fuse_three(const std::vector<RankedEntry>& run_a,
                                    const std::vector<RankedEntry>& run_b,
                                    const std::vector<RankedEntry>& run_c, int k) {
    return fuse_ids({ids_of(run_a), ids_of(run_b), ids_of(run_c)}, 3, k);
}

RankedRun fuse_run(const FusionSpec& spec, const std::map<std::string, RankedRun>& runs) {
    if (spec.model_order.size() != 2 && spec.model_order.size() != 3)
        throw ConfigError("fusion spec needs 2 or 3 models, got " +
                          std::to_string(spec.model_order.size()));
    std::unordered_set<std::string> distinct(spec.model_order.begin(), spec.model_order.end());
    if (distinct.size() != spec.model_order.size())
        throw ConfigError("fusion spec lists a model tag twice");
    if (spec.k < 1) throw ConfigError("fusion spec: k must be >= 1");
    int seed_depth = spec.seed_depth > 0 ? spec.seed_depth
                                         : (spec.model_order.size() == 2 ? 5 : 3);
    if (seed_depth * int(spec.model_order.size()) > 2 * spec.k)
        throw ConfigError("fusion spec: seed_depth x models exceeds 2k");

    std::vector<const RankedRun*> inputs;
    for (const auto& tag : spec.model_order) {
        auto it = runs.find(tag);
        if (it == runs.end()) throw MissingRun("no run with tag '" + tag + "'");
        inputs.push_back(&it->second);
    }

    for (std::size_t i = 1; i < inputs.size(); ++i) {
        if (inputs[i]->scenario != inputs[0]->scenario)
            throw PostCoverageMismatch("runs '" + spec.model_order[0] + "' and '" +
                                       spec.model_order[i] + "' have different scenarios");
        if (inputs[i]->lists.size() != inputs[0]->lists.size())
            throw PostCoverageMismatch("runs '" + spec.model_order[0] + "' and '" +
                                       spec.model_order[i] + "' cover different post counts");
        for (const auto& [post_id, entries] : inputs[0]->lists)
            if (!inputs[i]->lists.count(post_id))
                throw PostCoverageMismatch("run '" + spec.model_order[i] +
                                           "' is missing post '" + post_id + "'");
    }

    RankedRun fused;
    fused.run_tag = join(spec.model_order, "+");
    fused.scenario = inputs[0]->scenario;
    for (const auto& [post_id, _] : inputs[0]->lists) {
        std::vector<std::vector<std::string>> lists;
        lists.reserve(inputs.size());
        for (const RankedRun* run : inputs) lists.push_back(ids_of(run->lists.at(post_id)));
        try {
            fused.lists[post_id] = fuse_ids(lists, seed_depth, spec.k);
        } catch (const EmptyInput&) {
            fused.lists[post_id] = {};
            fused.warnings.push_back("post " + post_id + ": all input lists empty, fused empty");
        }
    }
    return fused;
}

}  // namespace claimrank
