#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "claimrank/config.hpp"
#include "claimrank/corpus.hpp"
#include "claimrank/embedding.hpp"
#include "claimrank/errors.hpp"
#include "claimrank/evaluation.hpp"
#include "claimrank/fusion.hpp"
#include "claimrank/matrix_io.hpp"
#include "claimrank/retrieval.hpp"
#include "claimrank/run_io.hpp"
#include "claimrank/selection.hpp"
#include "json.hpp"

namespace {

using namespace claimrank;

std::string scenario_suffix(Scenario scenario) {
    return scenario == Scenario::monolingual ? "mono" : "cross";
}

std::string embedding_path(const PipelineConfig& config, const std::string& provider_id,
                           const std::string& target) {
    return config.output_dir + "/" + provider_id + "." + target + ".emb";
}

std::string run_path(const PipelineConfig& config, const std::string& tag, Scenario scenario) {
    return config.output_dir + "/" + tag + "." + scenario_suffix(scenario) + ".run";
}

Corpus load_configured_corpus(const PipelineConfig& config, bool need_pairs) {
    std::optional<std::string> pairs;
    if (!config.pairs_path.empty()) pairs = config.pairs_path;
    if (need_pairs && !pairs)
        throw Error("this command needs gold pairs; set [corpus] pairs in the config");
    return load_corpus(config.posts_path, config.factchecks_path, pairs);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error("write failed for '" + path + "'");
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty())
        std::cout << text;
    else
        write_text(out_path, text);
}

// (id, embedding input text) for every record of the requested target.
std::vector<std::pair<std::string, std::string>> assemble_items(const Corpus& corpus,
                                                                const ProviderConfig& provider,
                                                                const AssemblyConfig& assembly,
                                                                const std::string& target) {
    AssemblyConfig cfg = assembly;
    cfg.text_mode = provider.text_mode;
    std::vector<std::pair<std::string, std::string>> items;
    if (target == "posts") {
        items.reserve(corpus.posts.size());
        for (const auto& post : corpus.posts) {
            std::string text = assemble_post_text(post, cfg);
            if (provider.query_prompt)
                text = apply_query_prompt(text, *provider.query_prompt, cfg.separator);
            items.emplace_back(post.id, std::move(text));
        }
    } else if (target == "factchecks") {
        items.reserve(corpus.factchecks.size());
        for (const auto& fc : corpus.factchecks)
            items.emplace_back(fc.id, assemble_factcheck_text(fc, cfg));
    } else {
        throw Error("target must be 'posts' or 'factchecks', got '" + target + "'");
    }
    return items;
}

int cmd_ingest(const PipelineConfig& config) {
    Corpus corpus = load_configured_corpus(config, false);
    auto stats = corpus_stats(corpus.posts, corpus.pairs ? *corpus.pairs : PairSet{});

    std::printf("%-10s %8s %8s\n", "language", "posts", "pairs");
    std::int64_t total_posts = 0, total_pairs = 0;
    for (const auto& [language, counts] : stats) {
        std::printf("%-10s %8lld %8lld\n", language.c_str(),
                    static_cast<long long>(counts.posts), static_cast<long long>(counts.pairs));
        total_posts += counts.posts;
        total_pairs += counts.pairs;
    }
    std::printf("%-10s %8lld %8lld\n", "total", static_cast<long long>(total_posts),
                static_cast<long long>(total_pairs));
    std::printf("fact-checks %zu\n", corpus.factchecks.size());
    return 0;
}

int cmd_embed(const PipelineConfig& config, const std::string& provider_id,
              const std::string& target, const std::string& out_override) {
    const ProviderConfig& provider = find_provider(config, provider_id);
    Corpus corpus = load_configured_corpus(config, false);
    auto items = assemble_items(corpus, provider, config.assembly, target);

    std::string out_path =
        out_override.empty() ? embedding_path(config, provider_id, target) : out_override;

    std::vector<std::string> expected_ids;
    expected_ids.reserve(items.size());
    for (const auto& [id, _] : items) expected_ids.push_back(id);

    // A valid cache (same model, same id sequence) makes this a no-op; no
    // provider connection is even constructed.
    if (std::filesystem::exists(out_path)) {
        try {
            EmbeddingMatrix cached = load_matrix(out_path);
            if (cached.model_id == provider.provider_id && cached.ids == expected_ids) {
                std::fprintf(stderr, "cache hit: %s (%zu rows)\n", out_path.c_str(),
                             cached.size());
                std::printf("%s\n", out_path.c_str());
                return 0;
            }
        } catch (const Error&) {
            // unreadable or stale cache: fall through and regenerate
        }
    }

    EmbeddingMatrix matrix;
    if (provider.endpoint_url.rfind("file://", 0) == 0) {
        EmbeddingMatrix source = load_matrix(provider.endpoint_url.substr(7));
        matrix = select_rows(source, expected_ids);
        matrix.model_id = provider.provider_id;
        matrix.normalize();
    } else {
        auto embedder = make_embedder(provider);
        matrix = embed_corpus(*embedder, provider, items);
    }

    save_matrix(matrix, out_path);
    std::fprintf(stderr, "embedded %zu %s rows (dim %u) -> %s\n", matrix.size(), target.c_str(),
                 matrix.dim, out_path.c_str());
    std::printf("%s\n", out_path.c_str());
    return 0;
}

int cmd_retrieve(const PipelineConfig& config, const std::string& provider_id, Scenario scenario,
                 int k, const std::string& out_override) {
    Corpus corpus = load_configured_corpus(config, false);
    EmbeddingMatrix posts_matrix = load_matrix(embedding_path(config, provider_id, "posts"));
    EmbeddingMatrix fc_matrix = load_matrix(embedding_path(config, provider_id, "factchecks"));

    std::vector<QueryVector> queries;
    queries.reserve(posts_matrix.size());
    for (std::size_t i = 0; i < posts_matrix.size(); ++i)
        queries.push_back({posts_matrix.ids[i],
                           std::vector<float>(posts_matrix.row(i),
                                              posts_matrix.row(i) + posts_matrix.dim)});

    RetrievalConfig retrieval;
    retrieval.k = k;
    retrieval.scenario = scenario;
    RankedRun run = retrieve_run(queries, corpus.posts, fc_matrix, corpus.factchecks, retrieval);
    for (const auto& warning : run.warnings)
        std::fprintf(stderr, "warning: %s\n", warning.c_str());

    std::string out_path =
        out_override.empty() ? run_path(config, run.run_tag, scenario) : out_override;
    save_run(run, out_path);
    std::fprintf(stderr, "retrieved top-%d for %zu posts -> %s\n", k, run.lists.size(),
                 out_path.c_str());
    std::printf("%s\n", out_path.c_str());
    return 0;
}

int cmd_fuse(const PipelineConfig& config, const std::string& spec_name, Scenario scenario,
             const std::string& out_override) {
    auto it = config.fusions.find(spec_name);
    if (it == config.fusions.end())
        throw ConfigError("no [fusion." + spec_name + "] section in config");
    const FusionSpec& spec = it->second;

    std::map<std::string, RankedRun> runs;
    for (const auto& tag : spec.model_order) {
        std::string path = run_path(config, tag, scenario);
        if (!std::filesystem::exists(path))
            throw MissingRun("run file '" + path + "' for tag '" + tag + "' not found");
        RankedRun run = load_run(path);
        run.scenario = scenario;
        runs[run.run_tag] = std::move(run);
    }

    RankedRun fused = fuse_run(spec, runs);
    for (const auto& warning : fused.warnings)
        std::fprintf(stderr, "warning: %s\n", warning.c_str());

    std::string out_path =
        out_override.empty() ? run_path(config, fused.run_tag, scenario) : out_override;
    save_run(fused, out_path);
    std::fprintf(stderr, "fused %zu posts -> %s\n", fused.lists.size(), out_path.c_str());
    std::printf("%s\n", out_path.c_str());
    return 0;
}

int cmd_evaluate(const PipelineConfig& config, const std::string& run_file, Scenario scenario,
                 int k, const std::string& out_override, const std::string& csv_path) {
    Corpus corpus = load_configured_corpus(config, true);
    RankedRun run = load_run(run_file);
    run.scenario = scenario;

    EvalReport report = evaluate(run, *corpus.pairs, corpus, k);
    emit(out_override, report_json(report));
    if (!csv_path.empty()) write_text(csv_path, report_csv(report));
    return 0;
}

int cmd_select(const PipelineConfig& config, const std::string& score_csv,
               const std::string& out_override) {
    DevScoreTable table = read_score_csv(score_csv);
    // Without an explicit tie_break list, CSV row order is the tie order.
    std::vector<std::string> tie_break =
        config.tie_break.empty() ? table.candidates : config.tie_break;
    SelectionPlan plan = select_best(table, tie_break);
    emit(out_override, plan_json(plan));
    return 0;
}

int cmd_predict(const PipelineConfig& config, const std::string& plan_file, Scenario scenario,
                const std::string& out_override) {
    Corpus corpus = load_configured_corpus(config, false);

    std::ifstream plan_in(plan_file);
    if (!plan_in) throw Error("cannot open plan file '" + plan_file + "'");
    std::string plan_text((std::istreambuf_iterator<char>(plan_in)),
                          std::istreambuf_iterator<char>());
    SelectionPlan plan = plan_from_json(plan_text);

    std::map<std::string, std::string> tag_by_post;
    std::set<std::string> needed_tags;
    for (const auto& post : corpus.posts) {
        std::string tag = apply_plan(plan, post.language);
        tag_by_post[post.id] = tag;
        needed_tags.insert(tag);
    }

    std::map<std::string, RankedRun> runs;
    for (const auto& tag : needed_tags) {
        std::string path = run_path(config, tag, scenario);
        if (!std::filesystem::exists(path))
            throw MissingRun("run file '" + path + "' for tag '" + tag + "' not found");
        runs[tag] = load_run(path);
    }

    nlohmann::ordered_json submission = nlohmann::ordered_json::object();
    for (const auto& [post_id, tag] : tag_by_post) {
        const RankedRun& run = runs.at(tag);
        auto it = run.lists.find(post_id);
        if (it == run.lists.end())
            throw MissingRun("run '" + tag + "' does not cover post '" + post_id + "'");
        nlohmann::ordered_json ids = nlohmann::ordered_json::array();
        for (const auto& entry : it->second) {
            if (ids.size() == 10) break;
            ids.push_back(entry.factcheck_id);
        }
        submission[post_id] = std::move(ids);
    }
    emit(out_override, submission.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"claimrank: fact-checked claim retrieval pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "pipeline configuration file")->required();

    std::string provider_id, target, scenario_name = "mono", out_path, csv_path;
    std::string run_file, spec_name, score_csv, plan_file;
    int k = 0;

    CLI::App* ingest = app.add_subcommand("ingest", "load and validate the corpus");

    CLI::App* embed = app.add_subcommand("embed", "embed posts or fact-checks");
    embed->add_option("--provider", provider_id, "provider id from the config")->required();
    embed->add_option("target", target, "posts|factchecks")->required();
    embed->add_option("--out", out_path, "output matrix path");

    CLI::App* retrieve = app.add_subcommand("retrieve", "rank fact-checks per post");
    retrieve->add_option("--provider", provider_id, "provider id from the config")->required();
    retrieve->add_option("--scenario", scenario_name, "mono|cross");
    retrieve->add_option("--k", k, "list depth (default from config)");
    retrieve->add_option("--out", out_path, "output run path");

    CLI::App* fuse = app.add_subcommand("fuse", "combine ranked runs");
    fuse->add_option("spec", spec_name, "fusion spec name from the config")->required();
    fuse->add_option("--scenario", scenario_name, "mono|cross");
    fuse->add_option("--out", out_path, "output run path");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score a run against gold pairs");
    evaluate->add_option("run", run_file, "run file to evaluate")->required();
    evaluate->add_option("--scenario", scenario_name, "mono|cross");
    evaluate->add_option("--k", k, "evaluation depth (default from config)");
    evaluate->add_option("--out", out_path, "report JSON path (default stdout)");
    evaluate->add_option("--csv", csv_path, "also write a per-language CSV");

    CLI::App* select = app.add_subcommand("select", "pick the best model per language");
    select->add_option("scores", score_csv, "dev score CSV")->required();
    select->add_option("--out", out_path, "plan JSON path (default stdout)");

    CLI::App* predict = app.add_subcommand("predict", "produce the submission JSON");
    predict->add_option("plan", plan_file, "selection plan JSON")->required();
    predict->add_option("--scenario", scenario_name, "mono|cross");
    predict->add_option("--out", out_path, "submission path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        PipelineConfig config = load_pipeline_config(config_path);
        std::filesystem::create_directories(config.output_dir);
        Scenario scenario = parse_scenario(scenario_name);
        if (k <= 0) k = config.k;

        if (ingest->parsed()) return cmd_ingest(config);
        if (embed->parsed()) return cmd_embed(config, provider_id, target, out_path);
        if (retrieve->parsed()) return cmd_retrieve(config, provider_id, scenario, k, out_path);
        if (fuse->parsed()) return cmd_fuse(config, spec_name, scenario, out_path);
        if (evaluate->parsed())
            return cmd_evaluate(config, run_file, scenario, k, out_path, csv_path);
        if (select->parsed()) return cmd_select(config, score_csv, out_path);
        if (predict->parsed()) return cmd_predict(config, plan_file, scenario, out_path);
        throw Error("no subcommand given");
    } catch (const ProviderError& e) {
        std::fprintf(stderr, "provider error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
