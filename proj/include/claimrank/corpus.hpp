#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "claimrank/errors.hpp"

namespace claimrank {

// OCR output for one image region of a post.
struct OcrBlock {
    std::string text_original;
    std::string text_english;
    std::optional<std::string> detected_language;
};

// A social-media post to be matched against fact-checked claims.
struct Post {
    std::string id;
    std::string language;  // ISO 639-3, e.g. "fra"
    std::string text_original;
    std::string text_english;
    std::vector<OcrBlock> ocr_blocks;
    std::optional<std::string> verdict;
    std::vector<std::int64_t> timestamps;
};

// A previously fact-checked claim published by a fact-checking organization.
struct FactCheck {
    std::string id;
    std::string language;
    std::string claim_original;
    std::string claim_english;
    std::string title_original;
    std::string title_english;
};

// Gold (post_id, factcheck_id) relevance links. One post may have several.
struct PairSet {
    std::set<std::pair<std::string, std::string>> pairs;

    bool empty() const { return pairs.empty(); }
    std::size_t size() const { return pairs.size(); }
};

enum class TextMode { english, original };

TextMode parse_text_mode(const std::string& s);
std::string to_string(TextMode mode);

// Controls how records are turned into embedding inputs.
struct AssemblyConfig {
    TextMode text_mode = TextMode::english;
    std::optional<std::string> query_prompt;
    std::string separator = "\n";
    std::size_t max_chars = 8000;
};

// Post text followed by each OCR block's text, joined by the separator.
// Empty components are skipped; the result is truncated to cfg.max_chars.
// Throws AssemblyEmpty when every selected component is empty.
std::string assemble_post_text(const Post& post, const AssemblyConfig& cfg);

// Title followed by claim, joined by the separator; empty title yields the
// claim alone. Throws AssemblyEmpty when both components are empty.
std::string assemble_factcheck_text(const FactCheck& fc, const AssemblyConfig& cfg);

// prompt + separator + text. Applied to query (post) texts only, never to
// fact-check texts.
std::string apply_query_prompt(const std::string& text, const std::string& prompt,
                               const std::string& separator);

// First max_chars code points of text. Never splits a multi-byte character.
std::string truncate_text(const std::string& text, std::size_t max_chars);

struct Corpus {
    std::vector<Post> posts;
    std::vector<FactCheck> factchecks;
    std::optional<PairSet> pairs;
};

// Loads posts/factchecks (and optionally pairs) from JSONL files, one object
// per line. Validates record invariants, id uniqueness and pair references.
// Throws ParseError, DuplicateId or DanglingReference.
Corpus load_corpus(const std::string& posts_path, const std::string& factchecks_path,
                   const std::optional<std::string>& pairs_path = std::nullopt);

// Validate a single record against its invariants. Used by load_corpus and
// available to callers constructing records in memory.
void validate_post(const Post& post);
void validate_factcheck(const FactCheck& fc);

struct LanguageStats {
    std::int64_t posts = 0;
    std::int64_t pairs = 0;
};

// Post and pair counts grouped by post language. A post with n gold
// fact-checks contributes n pairs to its language.
std::map<std::string, LanguageStats> corpus_stats(const std::vector<Post>& posts,
                                                  const PairSet& pairs);

}  // namespace claimrank
