// Embedding provider clients behind the BatchEmbedder interface.
//
// Wire protocol: POST {endpoint_url} with {"model": ..., "input": [texts]},
// optional "Authorization: Bearer <key>" header; response
// {"data": [{"index": i, "embedding": [floats]}]} with indices 0..n-1.

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "claimrank/embedding.hpp"
#include "claimrank/strings.hpp"

namespace claimrank {

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // starts with '/'
};

ParsedUrl parse_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint url '" + url + "' has no scheme");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttpEmbedder : public BatchEmbedder {
public:
    explicit HttpEmbedder(const ProviderConfig& cfg) : cfg_(cfg), url_(parse_url(cfg.endpoint_url)) {
        if (!cfg_.api_key_env_var.empty()) {
            const char* key = std::getenv(cfg_.api_key_env_var.c_str());
            if (key == nullptr || *key == '\0')
                throw ProviderError("api key environment variable '" + cfg_.api_key_env_var +
                                        "' is not set",
                                    cfg_.provider_id, 0, false);
            api_key_ = key;
        }
    }

    std::vector<std::vector<float>> embed(const std::vector<std::string>& texts) override {
        nlohmann::json body;
        body["model"] = cfg_.model_name;
        body["input"] = texts;

        // One client per call keeps this safely callable from many threads.
        httplib::Client client(url_.origin);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

        auto res = client.Post(url_.path, headers, body.dump(), "application/json");
        if (!res)
            throw ProviderError("connection to " + url_.origin + " failed (" +
                                    httplib::to_string(res.error()) + ")",
                                cfg_.provider_id, 0, true);
        if (res->status == 429 || res->status >= 500)
            throw ProviderError("http status " + std::to_string(res->status), cfg_.provider_id, 0,
                                true);
        if (res->status < 200 || res->status >= 300)
            throw ProviderError("http status " + std::to_string(res->status) + ": " + res->body,
                                cfg_.provider_id, 0, false);
        return parse_response(res->body, texts.size());
    }

private:
    std::vector<std::vector<float>> parse_response(const std::string& body, std::size_t expected) {
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw ProviderError(std::string("malformed response: ") + e.what(), cfg_.provider_id,
                                0, false);
        }
        if (!obj.contains("data") || !obj["data"].is_array())
            throw ProviderError("response has no 'data' array", cfg_.provider_id, 0, false);
        const auto& data = obj["data"];
        if (data.size() != expected)
            throw ProviderError("response has " + std::to_string(data.size()) +
                                    " embeddings for " + std::to_string(expected) + " inputs",
                                cfg_.provider_id, 0, false);
        std::vector<std::vector<float>> out(expected);
        std::vector<bool> filled(expected, false);
        for (const auto& item : data) {
            if (!item.contains("index") || !item["index"].is_number_integer() ||
                !item.contains("embedding") || !item["embedding"].is_array())
                throw ProviderError("malformed embedding record", cfg_.provider_id, 0, false);
            std::int64_t index = item["index"].get<std::int64_t>();
            if (index < 0 || std::size_t(index) >= expected || filled[index])
                throw ProviderError("bad embedding index " + std::to_string(index),
                                    cfg_.provider_id, 0, false);
            std::vector<float> vec;
            vec.reserve(item["embedding"].size());
            for (const auto& x : item["embedding"]) {
                if (!x.is_number())
                    throw ProviderError("embedding contains a non-number", cfg_.provider_id, 0,
                                        false);
                vec.push_back(float(x.get<double>()));  // 64-bit values are down-cast
            }
            out[index] = std::move(vec);
            filled[index] = true;
        }
        return out;
    }

    ProviderConfig cfg_;
    ParsedUrl url_;
    std::string api_key_;
};

// mock://deterministic?dim=N[&seed=S]
std::unique_ptr<BatchEmbedder> make_mock(const ProviderConfig& cfg) {
    std::string rest = cfg.endpoint_url.substr(std::string("mock://").size());
    std::string kind = rest;
    std::string query;
    if (auto q = rest.find('?'); q != std::string::npos) {
        kind = rest.substr(0, q);
        query = rest.substr(q + 1);
    }
    if (kind != "deterministic")
        throw ConfigError("unknown mock provider '" + kind + "' in " + cfg.endpoint_url);
    std::uint32_t dim = 8;
    std::uint64_t seed = 0;
    for (const auto& kv : split(query, '&')) {
        if (kv.empty()) continue;
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("bad mock parameter '" + kv + "' in " + cfg.endpoint_url);
        std::string key = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);
        try {
            if (key == "dim")
                dim = std::uint32_t(std::stoul(value));
            else if (key == "seed")
                seed = std::stoull(value);
            else
                throw ConfigError("unknown mock parameter '" + key + "'");
        } catch (const std::logic_error&) {
            throw ConfigError("bad mock parameter value '" + kv + "' in " + cfg.endpoint_url);
        }
    }
    if (dim == 0) throw ConfigError("mock dim must be >= 1");
    return std::make_unique<DeterministicEmbedder>(dim, seed);
}

}  // namespace

std::unique_ptr<BatchEmbedder> make_embedder(const ProviderConfig& cfg) {
    const std::string& url = cfg.endpoint_url;
    if (url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0)
        return std::make_unique<HttpEmbedder>(cfg);
    if (url.rfind("mock://", 0) == 0) return make_mock(cfg);
    if (url.rfind("file://", 0) == 0)
        throw ConfigError("file:// providers supply a precomputed matrix and are handled by the "
                          "embed pipeline");
    throw ConfigError("unsupported endpoint url '" + url + "'");
}

}  // namespace claimrank
