#pragma once

#include <map>
#include <string>
#include <vector>

#include "claimrank/corpus.hpp"
#include "claimrank/embedding.hpp"
#include "claimrank/fusion.hpp"
#include "claimrank/retrieval.hpp"

namespace claimrank {

// Flat INI document: [section] headers, `key = value` lines, full-line
// comments starting with '#' or ';'. Values understand the escapes \n, \t
// and \\ (other backslash sequences stay literal). After parsing, any
// environment variable CLAIMRANK_<SECTION>_<KEY> (non-alphanumerics mapped
// to '_', upper-cased) overrides the corresponding existing entry.
struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;
};

IniFile parse_ini(const std::string& path);

struct PipelineConfig {
    std::string posts_path;
    std::string factchecks_path;
    std::string pairs_path;  // empty when the corpus has no gold pairs
    AssemblyConfig assembly;
    int k = 10;
    std::vector<ProviderConfig> providers;
    std::map<std::string, FusionSpec> fusions;
    std::vector<std::string> tie_break;
    std::string output_dir = ".";
};

// Loads and validates a pipeline configuration:
//   [corpus]      posts, factchecks, pairs (optional)
//   [assembly]    text_mode, query_prompt, separator, max_chars
//   [retrieval]   k
//   [provider.X]  endpoint_url, model_name, api_key_env_var, batch_size,
//                 max_parallel_requests, retry_limit, retry_backoff_ms,
//                 query_prompt (defaults to the assembly prompt)
//   [fusion.Y]    models (comma-separated run tags, best first), k, seed_depth
//   [selection]   tie_break (comma-separated candidate tags)
//   [output]      dir
PipelineConfig load_pipeline_config(const std::string& path);

const ProviderConfig& find_provider(const PipelineConfig& config, const std::string& provider_id);

}  // namespace claimrank
