#include <cstdlib>
#include <sys/wait.h>

#include "claimrank/matrix_io.hpp"
#include "claimrank/run_io.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"

using namespace claimrank;
using namespace testutil;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

// Runs the installed binary through the shell, capturing streams. `env` is an
// optional VAR=value prefix for the child process only.
CliResult run_cli(const TempDir& dir, const std::string& args, const std::string& env = "") {
    std::string out_file = dir.file("cli_stdout.txt");
    std::string err_file = dir.file("cli_stderr.txt");
    std::string cmd;
    if (!env.empty()) cmd += env + " ";
    cmd += std::string("\"") + CLAIMRANK_BIN + "\" " + args + " >\"" + out_file + "\" 2>\"" +
           err_file + "\"";
    int status = std::system(cmd.c_str());
    CliResult result;
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_file(out_file);
    result.err = read_file(err_file);
    return result;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

// Two-language corpus whose gold fact-check repeats the post text verbatim,
// so the deterministic provider puts it at rank 1 with cosine 1.
struct Fixture {
    TempDir dir;
    std::string config;
    std::vector<std::string> post_ids;
    std::map<std::string, std::string> gold_of;  // post id -> fact-check id

    explicit Fixture(bool with_pairs = true) {
        std::vector<Post> posts;
        std::vector<FactCheck> fcs;
        std::set<std::pair<std::string, std::string>> pairs;
        for (const std::string lang : {"eng", "fra"}) {
            for (int i = 0; i < 3; ++i) {
                std::string post_id = "post_" + lang + "_" + std::to_string(i);
                std::string fc_id = "fc_" + lang + "_" + std::to_string(i);
                std::string text = "unique story " + lang + " " + std::to_string(i);
                posts.push_back(make_post(post_id, lang, text));
                fcs.push_back(make_factcheck(fc_id, lang, text));
                pairs.emplace(post_id, fc_id);
                post_ids.push_back(post_id);
                gold_of[post_id] = fc_id;
            }
            for (int i = 0; i < 2; ++i)
                fcs.push_back(make_factcheck("fc_" + lang + "_filler_" + std::to_string(i), lang,
                                             "unrelated filler " + lang + std::to_string(i)));
        }
        write_file(dir.file("posts.jsonl"), posts_jsonl(posts));
        write_file(dir.file("factchecks.jsonl"), factchecks_jsonl(fcs));
        if (with_pairs) write_file(dir.file("pairs.jsonl"), pairs_jsonl(pairs));

        std::string ini = "[corpus]\n";
        ini += "posts = " + dir.file("posts.jsonl") + "\n";
        ini += "factchecks = " + dir.file("factchecks.jsonl") + "\n";
        if (with_pairs) ini += "pairs = " + dir.file("pairs.jsonl") + "\n";
        ini +=
            "[retrieval]\n"
            "k = 10\n"
            "[provider.mock]\n"
            "endpoint_url = mock://deterministic?dim=48\n"
            "retry_limit = 2\n"
            "retry_backoff_ms = 10\n"
            "[provider.mock2]\n"
            "endpoint_url = mock://deterministic?dim=48&seed=99\n"
            "[provider.remote]\n"
            "endpoint_url = http://127.0.0.1:9/v1/embeddings\n"
            "api_key_env_var = CLAIMRANK_TEST_ABSENT_KEY\n"
            "retry_limit = 1\n"
            "retry_backoff_ms = 10\n"
            "[fusion.both]\n"
            "models = mock, mock2\n"
            "[output]\n"
            "dir = " + dir.file("out") + "\n";
        config = dir.file("config.ini");
        write_file(config, ini);
    }

    std::string flags() const { return "--config \"" + config + "\""; }
    std::string out_file(const std::string& name) const { return dir.file("out") + "/" + name; }

    // embeds posts+factchecks and retrieves one run for the provider
    void prepare_run(const std::string& provider, const std::string& scenario = "mono") {
        REQUIRE(run_cli(dir, flags() + " embed posts --provider " + provider).code == 0);
        REQUIRE(run_cli(dir, flags() + " embed factchecks --provider " + provider).code == 0);
        REQUIRE(run_cli(dir, flags() + " retrieve --provider " + provider + " --scenario " +
                                 scenario)
                    .code == 0);
    }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("ingest prints the per-language table") {
    Fixture fx;
    CliResult r = run_cli(fx.dir, fx.flags() + " ingest");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "language"));
    CHECK(contains(r.out, "eng"));
    CHECK(contains(r.out, "fra"));
    CHECK(contains(r.out, "total"));
    CHECK(contains(r.out, "fact-checks 10"));
}

TEST_CASE("ingest rejects a pair referencing a missing fact-check") {
    Fixture fx;
    write_file(fx.dir.file("pairs.jsonl"),
               "{\"post_id\": \"post_eng_0\", \"factcheck_id\": \"fc_ghost\"}\n");
    CliResult r = run_cli(fx.dir, fx.flags() + " ingest");
    CHECK(r.code == 1);
    CHECK(contains(r.err, "fc_ghost"));
}

TEST_CASE("embed writes a normalized loadable matrix") {
    Fixture fx;
    CliResult r = run_cli(fx.dir, fx.flags() + " embed posts --provider mock");
    REQUIRE(r.code == 0);
    std::string path = fx.out_file("mock.posts.emb");
    CHECK(contains(r.out, path));

    EmbeddingMatrix m = load_matrix(path);
    CHECK(m.model_id == "mock");
    CHECK(m.dim == 48);
    CHECK(m.normalized);
    CHECK(m.ids == fx.post_ids);

    SUBCASE("bad target exits 1") {
        CliResult bad = run_cli(fx.dir, fx.flags() + " embed neither --provider mock");
        CHECK(bad.code == 1);
        CHECK(contains(bad.err, "posts"));
    }
    SUBCASE("unknown provider exits 1") {
        CliResult bad = run_cli(fx.dir, fx.flags() + " embed posts --provider nope");
        CHECK(bad.code == 1);
    }
}

TEST_CASE("embed reuses a valid cache without touching the provider") {
    Fixture fx;
    REQUIRE(run_cli(fx.dir, fx.flags() + " embed posts --provider mock").code == 0);
    std::string before = read_file(fx.out_file("mock.posts.emb"));

    // Point the provider at a dead port; the cache must make this a no-op.
    std::string env =
        "CLAIMRANK_PROVIDER_MOCK_ENDPOINT_URL='http://127.0.0.1:9/v1/embeddings'";
    CliResult r = run_cli(fx.dir, fx.flags() + " embed posts --provider mock", env);
    CHECK(r.code == 0);
    CHECK(contains(r.err, "cache hit"));
    CHECK(read_file(fx.out_file("mock.posts.emb")) == before);

    SUBCASE("stale cache falls through to the provider and fails") {
        std::filesystem::remove(fx.out_file("mock.posts.emb"));
        CliResult miss = run_cli(fx.dir, fx.flags() + " embed posts --provider mock", env);
        CHECK(miss.code == 2);  // provider error: connection refused after retries
    }
}

TEST_CASE("missing api key variable exits 2 and names it") {
    Fixture fx;
    CliResult r = run_cli(fx.dir, fx.flags() + " embed posts --provider remote");
    CHECK(r.code == 2);
    CHECK(contains(r.err, "CLAIMRANK_TEST_ABSENT_KEY"));
}

TEST_CASE("retrieve ranks the planted gold first in both scenarios") {
    Fixture fx;
    fx.prepare_run("mock", "mono");
    RankedRun mono = load_run(fx.out_file("mock.mono.run"));
    CHECK(mono.run_tag == "mock");
    REQUIRE(mono.lists.size() == 6);
    for (const auto& post_id : fx.post_ids) {
        const auto& entries = mono.lists.at(post_id);
        REQUIRE(!entries.empty());
        CHECK(entries.front().factcheck_id == fx.gold_of.at(post_id));
        CHECK(entries.front().score == doctest::Approx(1.0).epsilon(1e-5));
        CHECK(entries.size() == 5);  // language pool: 3 golds + 2 fillers
        for (const auto& entry : entries)  // monolingual pool only
            CHECK(contains(entry.factcheck_id, post_id.substr(5, 3)));
    }

    REQUIRE(run_cli(fx.dir, fx.flags() + " retrieve --provider mock --scenario cross").code == 0);
    RankedRun cross = load_run(fx.out_file("mock.cross.run"));
    for (const auto& post_id : fx.post_ids) {
        const auto& entries = cross.lists.at(post_id);
        CHECK(entries.front().factcheck_id == fx.gold_of.at(post_id));
        CHECK(entries.size() == 10);  // whole collection is the pool
    }
}

TEST_CASE("retrieve without embeddings exits 1") {
    Fixture fx;
    CliResult r = run_cli(fx.dir, fx.flags() + " retrieve --provider mock");
    CHECK(r.code == 1);
}

TEST_CASE("fuse combines two retrieved runs") {
    Fixture fx;
    fx.prepare_run("mock");
    fx.prepare_run("mock2");
    CliResult r = run_cli(fx.dir, fx.flags() + " fuse both");
    REQUIRE(r.code == 0);

    RankedRun fused = load_run(fx.out_file("mock+mock2.mono.run"));
    CHECK(fused.run_tag == "mock+mock2");
    RankedRun a = load_run(fx.out_file("mock.mono.run"));
    RankedRun b = load_run(fx.out_file("mock2.mono.run"));
    for (const auto& [post_id, entries] : fused.lists) {
        CHECK(entries.size() <= 10);
        std::set<std::string> seen;
        std::set<std::string> sources;
        for (const auto& e : entry_ids(a.lists.at(post_id))) sources.insert(e);
        for (const auto& e : entry_ids(b.lists.at(post_id))) sources.insert(e);
        for (const auto& entry : entries) {
            CHECK(seen.insert(entry.factcheck_id).second);  // no duplicates
            CHECK(sources.count(entry.factcheck_id) == 1);  // containment
        }
        // both constituents put the same gold first, so fusion keeps it
        CHECK(entries.front().factcheck_id == fx.gold_of.at(post_id));
    }

    SUBCASE("unknown spec exits 1") {
        CliResult bad = run_cli(fx.dir, fx.flags() + " fuse nonesuch");
        CHECK(bad.code == 1);
        CHECK(contains(bad.err, "nonesuch"));
    }
    SUBCASE("missing constituent run exits 1") {
        CliResult bad = run_cli(fx.dir, fx.flags() + " fuse both --scenario cross");
        CHECK(bad.code == 1);
    }
}

TEST_CASE("evaluate reports a perfect planted run") {
    Fixture fx;
    fx.prepare_run("mock");
    std::string run = fx.out_file("mock.mono.run");
    CliResult r = run_cli(fx.dir, fx.flags() + " evaluate \"" + run + "\" --csv \"" +
                                      fx.dir.file("report.csv") + "\"");
    REQUIRE(r.code == 0);

    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("run_tag") == "mock");
    CHECK(doc.at("k") == 10);
    CHECK(doc.at("macro_s_at_k").get<double>() == doctest::Approx(1.0));
    CHECK(doc.at("per_language").at("eng").at("s_at_k").get<double>() == doctest::Approx(1.0));
    CHECK(doc.at("per_language").at("fra").at("strict_s_at_k").get<double>() ==
          doctest::Approx(1.0));
    CHECK(doc.at("histogram").at("1").get<int>() == 6);
    CHECK(doc.at("histogram").at("11+").get<int>() == 0);
    CHECK(doc.at("missed").at("missed").get<int>() == 0);
    CHECK(doc.at("missed").at("hit").get<int>() == 6);

    std::string csv = read_file(fx.dir.file("report.csv"));
    CHECK(contains(csv, "language,posts,pairs,s_at_k,strict_s_at_k"));
    CHECK(contains(csv, "macro,,,"));

    SUBCASE("k=1 still succeeds with golds at rank 1") {
        CliResult k1 = run_cli(fx.dir, fx.flags() + " evaluate \"" + run + "\" --k 1");
        REQUIRE(k1.code == 0);
        CHECK(nlohmann::json::parse(k1.out).at("macro_s_at_k").get<double>() ==
              doctest::Approx(1.0));
    }
    SUBCASE("--out writes the report to a file") {
        std::string out = fx.dir.file("report.json");
        CliResult to_file =
            run_cli(fx.dir, fx.flags() + " evaluate \"" + run + "\" --out \"" + out + "\"");
        REQUIRE(to_file.code == 0);
        CHECK(to_file.out.empty());
        CHECK(nlohmann::json::parse(read_file(out)).at("macro_s_at_k").get<double>() ==
              doctest::Approx(1.0));
    }
}

TEST_CASE("evaluate needs gold pairs") {
    Fixture fx(/*with_pairs=*/false);
    fx.prepare_run("mock");
    CliResult r = run_cli(fx.dir, fx.flags() + " evaluate \"" + fx.out_file("mock.mono.run") +
                                      "\"");
    CHECK(r.code == 1);
    CHECK(contains(r.err, "pairs"));
}

TEST_CASE("select reproduces the published per-language plan") {
    Fixture fx;
    write_file(fx.dir.file("scores.csv"),
               "candidate,eng,fra,deu,por,spa,tha,msa,ara\n"
               "gpt,0.85,0.92,0.70,0.83,0.89,0.98,0.88,0.82\n"
               "mistral,0.84,0.90,0.80,0.82,0.90,0.98,0.88,0.81\n"
               "nv-embed,0.87,0.95,0.89,0.88,0.92,0.95,0.90,0.86\n"
               "gpt+mistral,0.83,0.90,0.75,0.81,0.89,0.95,0.88,0.79\n"
               "gpt+nv-embed,0.87,0.95,0.88,0.87,0.92,0.95,0.90,0.87\n"
               "mistral+nv-embed,0.87,0.95,0.88,0.87,0.92,0.98,0.89,0.86\n"
               "gpt+mistral+nv-embed,0.87,0.93,0.84,0.86,0.92,0.98,0.90,0.86\n");
    CliResult r = run_cli(fx.dir, fx.flags() + " select \"" + fx.dir.file("scores.csv") + "\"");
    REQUIRE(r.code == 0);

    auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.at("per_language").at("deu") == "nv-embed");
    CHECK(doc.at("per_language").at("por") == "nv-embed");
    CHECK(doc.at("per_language").at("ara") == "gpt+nv-embed");
    CHECK(doc.at("per_language").at("tha") == "gpt");  // CSV row order breaks the tie
    CHECK(doc.at("default") == "nv-embed");

    SUBCASE("malformed csv exits 1") {
        write_file(fx.dir.file("bad.csv"), "candidate,eng\ngpt,not_a_number\n");
        CHECK(run_cli(fx.dir, fx.flags() + " select \"" + fx.dir.file("bad.csv") + "\"").code ==
              1);
    }
}

TEST_CASE("predict assembles a submission from per-language runs") {
    Fixture fx;
    fx.prepare_run("mock");
    fx.prepare_run("mock2");
    // eng posts use mock2 explicitly; fra posts fall back to the default
    write_file(fx.dir.file("plan.json"),
               "{\"per_language\": {\"eng\": \"mock2\"}, \"default\": \"mock\"}\n");
    CliResult r = run_cli(fx.dir, fx.flags() + " predict \"" + fx.dir.file("plan.json") + "\"");
    REQUIRE(r.code == 0);

    auto doc = nlohmann::json::parse(r.out);
    REQUIRE(doc.is_object());
    CHECK(doc.size() == 6);
    RankedRun mock_run = load_run(fx.out_file("mock.mono.run"));
    RankedRun mock2_run = load_run(fx.out_file("mock2.mono.run"));
    for (const auto& post_id : fx.post_ids) {
        REQUIRE(doc.contains(post_id));
        auto ids = doc.at(post_id).get<std::vector<std::string>>();
        CHECK(ids.size() <= 10);
        CHECK(!ids.empty());
        // the submission must echo the selected run's order for each language
        const RankedRun& source =
            post_id.find("_eng_") != std::string::npos ? mock2_run : mock_run;
        CHECK(ids == entry_ids(source.lists.at(post_id)));
        CHECK(ids.front() == fx.gold_of.at(post_id));
    }

    SUBCASE("plan naming a missing run exits 1") {
        write_file(fx.dir.file("plan.json"),
                   "{\"per_language\": {}, \"default\": \"absent-model\"}\n");
        CliResult bad =
            run_cli(fx.dir, fx.flags() + " predict \"" + fx.dir.file("plan.json") + "\"");
        CHECK(bad.code == 1);
        CHECK(contains(bad.err, "absent-model"));
    }
}

TEST_CASE("argument errors exit 1, help exits 0") {
    Fixture fx;
    CHECK(run_cli(fx.dir, fx.flags() + " bogus-subcommand").code == 1);
    CHECK(run_cli(fx.dir, "ingest").code == 1);  // --config is required
    CHECK(run_cli(fx.dir, fx.flags() + " retrieve").code == 1);  // --provider is required
    CHECK(run_cli(fx.dir, "--help").code == 0);
    CHECK(run_cli(fx.dir, fx.flags() + " retrieve --provider mock --scenario sideways").code ==
          1);
}

TEST_CASE("missing config file exits 1") {
    TempDir dir;
    CliResult r = run_cli(dir, "--config \"" + dir.file("absent.ini") + "\" ingest");
    CHECK(r.code == 1);
    CHECK(contains(r.err, "absent.ini"));
}

}  // TEST_SUITE
