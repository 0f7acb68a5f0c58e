#include "claimrank/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "claimrank/errors.hpp"
#include "claimrank/strings.hpp"

namespace claimrank {

namespace {

std::string unescape(const std::string& value) {
    std::string out;
    out.reserve(value.size());
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i] == '\\' && i + 1 < value.size()) {
            char next = value[i + 1];
            if (next == 'n') {
                out += '\n';
                ++i;
                continue;
            }
            if (next == 't') {
                out += '\t';
                ++i;
                continue;
            }
            if (next == '\\') {
                out += '\\';
                ++i;
                continue;
            }
        }
        out += value[i];
    }
    return out;
}

std::string env_override_name(const std::string& section, const std::string& key) {
    std::string name = "CLAIMRANK_" + section + "_" + key;
    for (char& c : name)
        c = std::isalnum(static_cast<unsigned char>(c)) ? char(std::toupper(c)) : '_';
    return name;
}

int parse_int(const std::string& section, const std::string& key, const std::string& value,
              int min_value) {
    try {
        std::size_t used = 0;
        int parsed = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        if (parsed < min_value)
            throw ConfigError("[" + section + "] " + key + " must be >= " +
                              std::to_string(min_value));
        return parsed;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("[" + section + "] " + key + ": '" + value + "' is not an integer");
    }
}

}  // namespace

IniFile parse_ini(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");

    IniFile ini;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']' || stripped.size() < 3)
                throw ParseError(path, line_no, "malformed section header");
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (section.empty()) throw ParseError(path, line_no, "empty section name");
            ini.sections[section];
            continue;
        }
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError(path, line_no, "expected 'key = value' or '[section]'");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw ParseError(path, line_no, "empty key");
        if (section.empty()) throw ParseError(path, line_no, "key outside any section");
        if (ini.sections[section].count(key))
            throw ParseError(path, line_no, "duplicate key '" + key + "'");
        ini.sections[section][key] = unescape(value);
    }

    for (auto& [name, entries] : ini.sections)
        for (auto& [key, value] : entries)
            if (const char* env = std::getenv(env_override_name(name, key).c_str()))
                value = unescape(env);
    return ini;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    IniFile ini = parse_ini(path);
    PipelineConfig config;

    auto get = [&](const std::string& section, const std::string& key,
                   bool required) -> std::string {
        auto sec = ini.sections.find(section);
        if (sec == ini.sections.end() || !sec->second.count(key)) {
            if (required)
                throw ConfigError("config '" + path + "' is missing [" + section + "] " + key);
            return "";
        }
        return sec->second.at(key);
    };

    config.posts_path = get("corpus", "posts", true);
    config.factchecks_path = get("corpus", "factchecks", true);
    config.pairs_path = get("corpus", "pairs", false);

    if (std::string mode = get("assembly", "text_mode", false); !mode.empty()) {
        if (mode == "english")
            config.assembly.text_mode = TextMode::english;
        else if (mode == "original")
            config.assembly.text_mode = TextMode::original;
        else
            throw ConfigError("[assembly] text_mode must be 'english' or 'original'");
    }
    if (std::string prompt = get("assembly", "query_prompt", false); !prompt.empty())
        config.assembly.query_prompt = prompt;
    if (auto sec = ini.sections.find("assembly"); sec != ini.sections.end()) {
        if (sec->second.count("separator")) config.assembly.separator = sec->second.at("separator");
        if (sec->second.count("max_chars"))
            config.assembly.max_chars =
                parse_int("assembly", "max_chars", sec->second.at("max_chars"), 1);
    }

    if (std::string k = get("retrieval", "k", false); !k.empty())
        config.k = parse_int("retrieval", "k", k, 1);

    for (const auto& [section, entries] : ini.sections) {
        if (section.rfind("provider.", 0) == 0) {
            ProviderConfig provider;
            provider.provider_id = section.substr(9);
            if (provider.provider_id.empty())
                throw ConfigError("provider section needs a name: [provider.<id>]");
            provider.endpoint_url = get(section, "endpoint_url", true);
            provider.model_name = get(section, "model_name", false);
            provider.api_key_env_var = get(section, "api_key_env_var", false);
            if (entries.count("batch_size"))
                provider.batch_size =
                    parse_int(section, "batch_size", entries.at("batch_size"), 1);
            if (entries.count("max_parallel_requests"))
                provider.max_parallel_requests =
                    parse_int(section, "max_parallel_requests", entries.at("max_parallel_requests"), 1);
            if (entries.count("retry_limit"))
                provider.retry_limit = parse_int(section, "retry_limit", entries.at("retry_limit"), 0);
            if (entries.count("retry_backoff_ms"))
                provider.retry_backoff_ms =
                    parse_int(section, "retry_backoff_ms", entries.at("retry_backoff_ms"), 0);
            if (entries.count("query_prompt"))
                provider.query_prompt = entries.at("query_prompt");
            else
                provider.query_prompt = config.assembly.query_prompt;
            provider.text_mode = config.assembly.text_mode;
            config.providers.push_back(std::move(provider));
        } else if (section.rfind("fusion.", 0) == 0) {
            std::string name = section.substr(7);
            if (name.empty()) throw ConfigError("fusion section needs a name: [fusion.<name>]");
            FusionSpec spec;
            for (auto& tag : split(get(section, "models", true), ','))
                if (std::string trimmed = trim(tag); !trimmed.empty())
                    spec.model_order.push_back(trimmed);
            if (spec.model_order.size() != 2 && spec.model_order.size() != 3)
                throw ConfigError("[" + section + "] models must list 2 or 3 run tags");
            if (entries.count("k")) spec.k = parse_int(section, "k", entries.at("k"), 1);
            if (entries.count("seed_depth"))
                spec.seed_depth = parse_int(section, "seed_depth", entries.at("seed_depth"), 1);
            config.fusions[name] = std::move(spec);
        }
    }

    for (std::size_t i = 0; i < config.providers.size(); ++i)
        for (std::size_t j = i + 1; j < config.providers.size(); ++j)
            if (config.providers[i].provider_id == config.providers[j].provider_id)
                throw ConfigError("duplicate provider id '" + config.providers[i].provider_id +
                                  "'");

    for (auto& tag : split(get("selection", "tie_break", false), ','))
        if (std::string trimmed = trim(tag); !trimmed.empty())
            config.tie_break.push_back(trimmed);

    if (std::string dir = get("output", "dir", false); !dir.empty()) config.output_dir = dir;
    return config;
}

const ProviderConfig& find_provider(const PipelineConfig& config, const std::string& provider_id) {
    for (const auto& provider : config.providers)
        if (provider.provider_id == provider_id) return provider;
    throw ConfigError("no [provider." + provider_id + "] section in config");
}

}  // namespace claimrank
