#include "claimrank/corpus.hpp"

#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "claimrank/strings.hpp"

namespace claimrank {

namespace {

const std::string& mode_text(const std::string& english, const std::string& original,
                             TextMode mode) {
    return mode == TextMode::english ? english : original;
}

std::string get_string(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return "";
    if (!it->is_string()) throw Error(std::string("field '") + key + "' is not a string");
    return it->get<std::string>();
}

std::optional<std::string> get_optional_string(const nlohmann::json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw Error(std::string("field '") + key + "' is not a string");
    return it->get<std::string>();
}

Post parse_post(const nlohmann::json& obj) {
    Post post;
    post.id = get_string(obj, "id");
    post.language = get_string(obj, "language");
    post.text_original = get_string(obj, "text_original");
    post.text_english = get_string(obj, "text_english");
    if (auto it = obj.find("ocr"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) throw Error("field 'ocr' is not an array");
        for (const auto& blk : *it) {
            OcrBlock block;
            block.text_original = get_string(blk, "text_original");
            block.text_english = get_string(blk, "text_english");
            block.detected_language = get_optional_string(blk, "detected_language");
            post.ocr_blocks.push_back(std::move(block));
        }
    }
    post.verdict = get_optional_string(obj, "verdict");
    if (auto it = obj.find("timestamps"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) throw Error("field 'timestamps' is not an array");
        for (const auto& ts : *it) {
            if (!ts.is_number_integer()) throw Error("timestamp is not an integer");
            post.timestamps.push_back(ts.get<std::int64_t>());
        }
    }
    return post;
}

FactCheck parse_factcheck(const nlohmann::json& obj) {
    FactCheck fc;
    fc.id = get_string(obj, "id");
    fc.language = get_string(obj, "language");
    fc.claim_original = get_string(obj, "claim_original");
    fc.claim_english = get_string(obj, "claim_english");
    fc.title_original = get_string(obj, "title_original");
    fc.title_english = get_string(obj, "title_english");
    return fc;
}

// Applies `fn` to every non-empty line of a JSONL file, with 1-based line
// numbers in error messages.
template <typename Fn>
void for_each_jsonl(const std::string& path, Fn fn) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path, lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(path, lineno, "line is not a JSON object");
        try {
            fn(obj);
        } catch (const DuplicateId&) {
            throw;
        } catch (const DanglingReference&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(path, lineno, e.what());
        }
    }
}

}  // namespace

TextMode parse_text_mode(const std::string& s) {
    if (s == "english") return TextMode::english;
    if (s == "original") return TextMode::original;
    throw ConfigError("unknown text mode '" + s + "' (expected english|original)");
}

std::string to_string(TextMode mode) {
    return mode == TextMode::english ? "english" : "original";
}

void validate_post(const Post& post) {
    if (post.id.empty()) throw Error("post has empty id");
    bool has_text = !post.text_original.empty() || !post.text_english.empty();
    for (const auto& block : post.ocr_blocks) {
        if (block.text_original.empty() && block.text_english.empty())
            throw Error("post " + post.id + ": OCR block with no text");
        has_text = true;
    }
    if (!has_text) throw Error("post " + post.id + " has no text in any field");
}

void validate_factcheck(const FactCheck& fc) {
    if (fc.id.empty()) throw Error("fact-check has empty id");
    if (fc.claim_original.empty() && fc.claim_english.empty())
        throw Error("fact-check " + fc.id + " has no claim text");
}

std::string assemble_post_text(const Post& post, const AssemblyConfig& cfg) {
    std::vector<std::string> parts;
    const std::string& body = mode_text(post.text_english, post.text_original, cfg.text_mode);
    if (!body.empty()) parts.push_back(body);
    for (const auto& block : post.ocr_blocks) {
        const std::string& t = mode_text(block.text_english, block.text_original, cfg.text_mode);
        if (!t.empty()) parts.push_back(t);
    }
    if (parts.empty())
        throw AssemblyEmpty("post " + post.id + ": no " + to_string(cfg.text_mode) + " text");
    return truncate_text(join(parts, cfg.separator), cfg.max_chars);
}

std::string assemble_factcheck_text(const FactCheck& fc, const AssemblyConfig& cfg) {
    std::vector<std::string> parts;
    const std::string& title = mode_text(fc.title_english, fc.title_original, cfg.text_mode);
    const std::string& claim = mode_text(fc.claim_english, fc.claim_original, cfg.text_mode);
    if (!title.empty()) parts.push_back(title);
    if (!claim.empty()) parts.push_back(claim);
    if (parts.empty())
        throw AssemblyEmpty("fact-check " + fc.id + ": no " + to_string(cfg.text_mode) + " text");
    return truncate_text(join(parts, cfg.separator), cfg.max_chars);
}

std::string apply_query_prompt(const std::string& text, const std::string& prompt,
                               const std::string& separator) {
    return prompt + separator + text;
}

std::string truncate_text(const std::string& text, std::size_t max_chars) {
    std::size_t count = 0;
    std::size_t i = 0;
    while (i < text.size()) {
        if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) {
            if (count == max_chars) break;
            ++count;
        }
        ++i;
    }
    if (i >= text.size()) return text;
    return text.substr(0, i);
}

Corpus load_corpus(const std::string& posts_path, const std::string& factchecks_path,
                   const std::optional<std::string>& pairs_path) {
    Corpus corpus;
    std::unordered_set<std::string> post_ids;
    std::unordered_set<std::string> fc_ids;

    for_each_jsonl(posts_path, [&](const nlohmann::json& obj) {
        Post post = parse_post(obj);
        validate_post(post);
        if (!post_ids.insert(post.id).second)
            throw DuplicateId("duplicate post id '" + post.id + "'");
        corpus.posts.push_back(std::move(post));
    });

    for_each_jsonl(factchecks_path, [&](const nlohmann::json& obj) {
        FactCheck fc = parse_factcheck(obj);
        validate_factcheck(fc);
        if (!fc_ids.insert(fc.id).second)
            throw DuplicateId("duplicate fact-check id '" + fc.id + "'");
        corpus.factchecks.push_back(std::move(fc));
    });

    if (pairs_path) {
        PairSet pairs;
        for_each_jsonl(*pairs_path, [&](const nlohmann::json& obj) {
            std::string post_id = get_string(obj, "post_id");
            std::string fc_id = get_string(obj, "factcheck_id");
            if (post_id.empty() || fc_id.empty())
                throw Error("pair record must have post_id and factcheck_id");
            if (!post_ids.count(post_id))
                throw DanglingReference("pair cites unknown post id '" + post_id + "'");
            if (!fc_ids.count(fc_id))
                throw DanglingReference("pair cites unknown fact-check id '" + fc_id + "'");
            if (!pairs.pairs.emplace(post_id, fc_id).second)
                throw DuplicateId("duplicate pair (" + post_id + ", " + fc_id + ")");
        });
        corpus.pairs = std::move(pairs);
    }
    return corpus;
}

std::map<std::string, LanguageStats> corpus_stats(const std::vector<Post>& posts,
                                                  const PairSet& pairs) {
    std::map<std::string, LanguageStats> stats;
    std::unordered_map<std::string, const Post*> by_id;
    for (const auto& post : posts) {
        stats[post.language].posts += 1;
        by_id[post.id] = &post;
    }
    for (const auto& [post_id, fc_id] : pairs.pairs) {
        auto it = by_id.find(post_id);
        if (it == by_id.end())
            throw DanglingReference("pair cites unknown post id '" + post_id + "'");
        stats[it->second->language].pairs += 1;
    }
    return stats;
}

}  // namespace claimrank
