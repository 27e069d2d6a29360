/*
 * Copyright 2026 The Witforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// witforge: jokes from the command line, evaluation runs, and the REST service.

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "witforge/config.hpp"
#include "witforge/csv.hpp"
#include "witforge/eval.hpp"
#include "witforge/http_backend.hpp"
#include "witforge/lm_backend.hpp"
#include "witforge/pipeline.hpp"
#include "witforge/service.hpp"

#ifndef WITFORGE_DEFAULT_PROMPT_DIR
#define WITFORGE_DEFAULT_PROMPT_DIR "prompts"
#endif

namespace fs = std::filesystem;
using namespace witforge;

namespace {

struct BackendOptions {
    std::string config;
    std::string mock;
    std::string prompts;
};

void add_backend_options(CLI::App* cmd, BackendOptions& o) {
    cmd->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--mock", o.mock, "replay replies from a JSON script instead of calling a model")
        ->check(CLI::ExistingFile);
    cmd->add_option("--prompts", o.prompts, "directory of prompt templates")->check(CLI::ExistingDirectory);
}

struct Runtime {
    Settings settings;
    PromptCatalog catalog;
    std::unique_ptr<Backend> backend;
};

Runtime make_runtime(const BackendOptions& o) {
    Runtime rt;
    if (!o.config.empty()) rt.settings = load_settings(o.config);
    fs::path dir = WITFORGE_DEFAULT_PROMPT_DIR;
    if (rt.settings.prompt_dir) dir = *rt.settings.prompt_dir;
    if (!o.prompts.empty()) dir = o.prompts;
    rt.catalog = build_catalog(dir, rt.settings);

    if (!o.mock.empty()) {
        rt.backend = scripted_mock(ScriptedBackend::load_script(o.mock));
    } else {
        HttpBackendConfig http;
        http.endpoint = rt.settings.endpoint;
        http.model_id = rt.settings.pipeline.model_id;
        rt.backend = std::make_unique<HttpBackend>(HttpBackendConfig::from_environment(std::move(http)));
    }
    return rt;
}

int report_error(const std::exception& e) {
    std::cerr << "witforge: " << e.what() << '\n';
    return 1;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    return out;
}

// ---------------------------------------------------------------------------

int cmd_joke(const std::string& sentence, const BackendOptions& o, bool trace) {
    auto rt = make_runtime(o);
    JokePipeline pipeline(*rt.backend, rt.catalog, rt.settings.pipeline);
    const auto result = pipeline.run(sentence);
    if (trace) {
        std::cout << nlohmann::json(result.state).dump(2) << '\n';
    }
    std::cout << result.joke.full_text << '\n';
    return 0;
}

struct SampleOptions {
    std::string dataset;
    std::size_t n = 13;
    std::uint64_t seed = 0;
    std::string out;
    std::string annotator = "rule";
    BackendOptions backend;
};

int cmd_sample(const SampleOptions& o) {
    const auto comments = eval::ingest_dataset(o.dataset);
    std::unique_ptr<Runtime> rt;
    std::unique_ptr<eval::NounAnnotator> annotator;
    if (o.annotator == "llm") {
        rt = std::make_unique<Runtime>(make_runtime(o.backend));
        annotator = std::make_unique<eval::LlmNounAnnotator>(*rt->backend, rt->catalog, rt->settings.pipeline.model_id);
    } else {
        annotator = std::make_unique<eval::RuleBasedAnnotator>();
    }
    const auto picked = eval::sample_inputs(comments, o.n, o.seed, *annotator);

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!o.out.empty()) {
        file = open_out(o.out);
        os = &file;
    }
    csv::write_row(*os, {"item", "sentence", "conversation_id", "turn_index", "requires_review"});
    for (std::size_t i = 0; i < picked.size(); ++i) {
        const auto& p = picked[i];
        csv::write_row(*os, {std::to_string(i + 1), p.sentence, p.conversation_id, std::to_string(p.turn_index),
                             p.requires_review ? "yes" : "no"});
    }
    return 0;
}

struct GenerateOptions {
    std::string inputs;
    std::string dataset;
    std::vector<std::string> sources{"human", "gpt_lol", "witscript3"};
    std::string out;
    BackendOptions backend;
};

int cmd_generate(const GenerateOptions& o) {
    const auto records = csv::parse(eval::detail::read_file(o.inputs));
    if (records.empty()) throw Error(ErrorKind::FormatError, o.inputs + ": empty");
    const csv::Header h(records.front());
    const auto sentence_col = h.require("sentence", o.inputs);
    const auto item_col = h.find("item");
    const auto conv_col = h.find("conversation_id");
    const auto turn_col = h.find("turn_index");

    std::map<std::pair<std::string, int>, std::string> next_turn;
    bool want_human = false;
    for (const auto& s : o.sources) want_human = want_human || s == eval::kHuman;
    if (want_human) {
        if (o.dataset.empty()) throw Error(ErrorKind::ConfigError, "the human source needs --dataset");
        for (const auto& c : eval::ingest_dataset(o.dataset)) next_turn[{c.conversation_id, c.turn_index}] = c.text;
    }
    std::unique_ptr<Runtime> rt;
    std::unique_ptr<JokePipeline> pipeline;
    for (const auto& s : o.sources) {
        if (s != eval::kHuman && !rt) {
            rt = std::make_unique<Runtime>(make_runtime(o.backend));
            pipeline = std::make_unique<JokePipeline>(*rt->backend, rt->catalog, rt->settings.pipeline);
        }
    }

    std::vector<eval::ResponsePair> pairs;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        const auto at = eval::detail::where(o.inputs, rec);
        if (rec.fields.size() != h.size()) throw Error(ErrorKind::FormatError, at + ": wrong field count");
        const int item = item_col ? eval::detail::parse_int(rec.fields[*item_col], at) : static_cast<int>(r);
        const auto& input = rec.fields[sentence_col];
        for (const auto& source : o.sources) {
            std::string response;
            if (source == eval::kHuman) {
                if (!conv_col || !turn_col) throw Error(ErrorKind::FormatError, o.inputs + ": human source needs conversation_id and turn_index");
                const int turn = eval::detail::parse_int(rec.fields[*turn_col], at);
                auto it = next_turn.find({rec.fields[*conv_col], turn + 1});
                if (it == next_turn.end()) throw Error(ErrorKind::NotFound, at + ": no reply turn in the dataset");
                response = eval::standardize(it->second);
            } else if (source == eval::kGptLol) {
                response = eval::gpt_lol_respond(input, *rt->backend, rt->settings.pipeline.model_id);
            } else if (source == eval::kWitscript3) {
                response = pipeline->run(input).joke.full_text;
            } else {
                throw Error(ErrorKind::ConfigError, "unknown source " + source);
            }
            pairs.push_back({eval::make_pair_id(item, source), item, source, input, response});
        }
    }
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!o.out.empty()) {
        file = open_out(o.out);
        os = &file;
    }
    eval::write_pairs(*os, pairs);
    return 0;
}

int cmd_shuffle(const std::string& pairs_path, std::uint64_t seed, const std::string& out) {
    const auto shuffled = eval::randomize_presentation(eval::read_pairs(pairs_path), seed);
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!out.empty()) {
        file = open_out(out);
        os = &file;
    }
    eval::write_pairs(*os, shuffled);
    return 0;
}

int cmd_aggregate(const std::string& ratings, const std::string& pairs_path, const std::string& out) {
    const auto records = eval::read_ratings(ratings);
    std::vector<eval::ResponsePair> pairs;
    std::map<std::string, std::string> source_of;
    if (!pairs_path.empty()) {
        pairs = eval::read_pairs(pairs_path);
        for (const auto& p : pairs) source_of[p.pair_id] = p.source;
    } else {
        // pair ids written by `eval generate` look like 07-gpt_lol
        for (const auto& r : records) {
            const auto dash = r.pair_id.find('-');
            if (dash == std::string::npos) throw Error(ErrorKind::UnknownPair, r.pair_id + " (pass --pairs)");
            source_of[r.pair_id] = r.pair_id.substr(dash + 1);
        }
    }
    const auto agg = eval::aggregate(records, source_of);
    if (out.empty()) {
        eval::emit_report(std::cout, agg, pairs);
    } else {
        eval::emit_report(fs::path(out), agg, pairs);
    }
    return 0;
}

httplib::Server* g_server = nullptr;

int cmd_serve(const std::string& host, int port, const std::string& state_dir, const BackendOptions& o) {
    auto rt = make_runtime(o);
    JokePipeline pipeline(*rt.backend, rt.catalog, rt.settings.pipeline);
    service::SessionStore store(pipeline, state_dir);
    httplib::Server server;
    service::install_routes(server, store);
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
    });
    std::cerr << "witforge: serving /v1 on http://" << host << ":" << port << '\n';
    if (!server.listen(host, port)) {
        throw Error(ErrorKind::IoError, "cannot listen on " + host + ":" + std::to_string(port));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topical jokes from a prompt chain"};
    app.require_subcommand(1);

    std::string sentence;
    bool trace = false;
    BackendOptions joke_opts;
    auto* joke = app.add_subcommand("joke", "Respond to a sentence with a joke");
    joke->add_option("sentence", sentence, "The topic sentence")->required();
    joke->add_flag("--trace", trace, "Print the full stage-by-stage state first");
    add_backend_options(joke, joke_opts);

    auto* eval_cmd = app.add_subcommand("eval", "Evaluation runs");
    eval_cmd->require_subcommand(1);

    SampleOptions sample_opts;
    auto* sample = eval_cmd->add_subcommand("sample", "Pick eligible input sentences from a dialogue dataset");
    sample->add_option("--dataset", sample_opts.dataset, "CSV or JSONL dialogue export")->required()->check(CLI::ExistingFile);
    sample->add_option("--n", sample_opts.n, "How many sentences")->capture_default_str()->check(CLI::PositiveNumber);
    sample->add_option("--seed", sample_opts.seed, "Sampling seed")->capture_default_str();
    sample->add_option("--out", sample_opts.out, "Output CSV (default stdout)");
    sample->add_option("--annotator", sample_opts.annotator, "Noun counter for criterion (c)")
        ->capture_default_str()
        ->check(CLI::IsMember({"rule", "llm"}));
    add_backend_options(sample, sample_opts.backend);

    GenerateOptions gen_opts;
    auto* generate = eval_cmd->add_subcommand("generate", "Produce a response from each source for each sampled input");
    generate->add_option("--inputs", gen_opts.inputs, "Output of eval sample")->required()->check(CLI::ExistingFile);
    generate->add_option("--dataset", gen_opts.dataset, "Dataset holding the human replies")->check(CLI::ExistingFile);
    generate->add_option("--sources", gen_opts.sources, "Any of human, gpt_lol, witscript3")
        ->delimiter(',')
        ->capture_default_str();
    generate->add_option("--out", gen_opts.out, "Output CSV (default stdout)");
    add_backend_options(generate, gen_opts.backend);

    std::string shuffle_pairs, shuffle_out;
    std::uint64_t shuffle_seed = 0;
    auto* shuffle = eval_cmd->add_subcommand("shuffle", "Put pairs in a seeded random presentation order");
    shuffle->add_option("--pairs", shuffle_pairs, "Pairs CSV")->required()->check(CLI::ExistingFile);
    shuffle->add_option("--seed", shuffle_seed, "Shuffle seed")->capture_default_str();
    shuffle->add_option("--out", shuffle_out, "Output CSV (default stdout)");

    std::string ratings, agg_pairs, agg_out;
    auto* agg = eval_cmd->add_subcommand("aggregate", "Summarize ratings per source");
    agg->add_option("--ratings", ratings, "CSV of pair_id, rater_id, score")->required()->check(CLI::ExistingFile);
    agg->add_option("--pairs", agg_pairs, "Pairs CSV mapping pair_id to source")->check(CLI::ExistingFile);
    agg->add_option("--out", agg_out, "Report CSV (default stdout)");

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string state_dir = "sessions";
    BackendOptions serve_opts;
    auto* serve = app.add_subcommand("serve", "Run the REST service");
    serve->add_option("--host", host, "Bind address")->capture_default_str();
    serve->add_option("--port", port, "Port")->capture_default_str()->check(CLI::Range(1, 65535));
    serve->add_option("--state-dir", state_dir, "Where session logs live")->capture_default_str();
    add_backend_options(serve, serve_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*joke) return cmd_joke(sentence, joke_opts, trace);
        if (*sample) return cmd_sample(sample_opts);
        if (*generate) return cmd_generate(gen_opts);
        if (*shuffle) return cmd_shuffle(shuffle_pairs, shuffle_seed, shuffle_out);
        if (*agg) return cmd_aggregate(ratings, agg_pairs, agg_out);
        if (*serve) return cmd_serve(host, port, state_dir, serve_opts);
    } catch (const std::exception& e) {
        return report_error(e);
    }
    return 0;
}
