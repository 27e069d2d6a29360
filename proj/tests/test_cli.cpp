// Copyright 2026 The Witforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <fstream>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "support.hpp"
#include "witforge/csv.hpp"
#include "witforge/eval.hpp"

using witforge::testing::cli;
using witforge::testing::kGoldenJoke;
using witforge::testing::kPigs;
using witforge::testing::read_text;
using witforge::testing::repo_data;
using witforge::testing::run_command;
using witforge::testing::shell_quote;
using witforge::testing::test_data;

namespace {

std::string golden() { return shell_quote(repo_data("golden_pigs.json").string()); }

std::string joke_cmd(const std::string& extra = {}) {
    return cli() + " joke " + shell_quote(kPigs) + " --mock " + golden() + " " + extra;
}

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
    const auto p = dir / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
}

int free_port() {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    socklen_t len = sizeof addr;
    int port = 0;
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), len) == 0 &&
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
        port = ntohs(addr.sin_port);
    }
    ::close(fd);
    return port;
}

}  // namespace

TEST_CASE("joke") {
    SECTION("mock script") {
        const auto r = run_command(joke_cmd());
        CHECK(r.exit_code == 0);
        CHECK(r.output == std::string(kGoldenJoke) + "\n");
    }
    SECTION("trace") {
        const auto r = run_command(joke_cmd("--trace"));
        REQUIRE(r.exit_code == 0);
        const auto cut = r.output.rfind("}\n");
        REQUIRE(cut != std::string::npos);
        const auto state = nlohmann::json::parse(r.output.substr(0, cut + 1));
        CHECK(r.output.substr(cut + 2) == std::string(kGoldenJoke) + "\n");
        CHECK(state.at("stage") == "Selected");
        CHECK(state.at("handles").at(0).at("surface") == "pigs");
        CHECK(state.at("handles").at(1).at("surface") == "San Antonio");
        CHECK(state.at("associations").at(0).size() == 4);
        CHECK(state.at("associations").at(1).at(3).at("text") == "Whataburger");
        REQUIRE(state.at("candidates").size() == 2);
        CHECK(state.at("candidates").at(0).at("text") == "Alamo Sausage");
        CHECK(state.at("candidates").at(1).at("mechanism") == "third");
        CHECK(state.at("jokes").size() == 2);
    }
    SECTION("missing credential") {
        const auto r = run_command("env -u WITFORGE_API_KEY WITFORGE_MODEL=some-model WITFORGE_ENDPOINT=http://127.0.0.1:1/v1/completions " + cli() +
                                   " joke " + shell_quote(kPigs));
        CHECK(r.exit_code != 0);
        CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("AuthError"));
        CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("HandlesSelected"));
    }
    SECTION("failing stage is named") {
        const auto dir = witforge::testing::temp_dir("cli-joke");
        auto script = nlohmann::json::parse(read_text(repo_data("golden_pigs.json")));
        script.erase("angle_generation");
        const auto p = write_file(dir, "short.json", script.dump());
        const auto r = run_command(cli() + " joke " + shell_quote(kPigs) + " --mock " + shell_quote(p.string()));
        CHECK(r.exit_code == 1);
        CHECK_THAT(r.output, Catch::Matchers::StartsWith("witforge: ScriptExhausted"));
        CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("JokesGenerated"));
    }
    SECTION("configuration file") {
        const auto dir = witforge::testing::temp_dir("cli-config");
        const auto cfg = write_file(dir, "witforge.conf", "# small lists\nassociations_per_handle = 2\nwordplay_threshold = 0.4\n");
        const auto r = run_command(joke_cmd("--trace --config " + shell_quote(cfg.string())));
        REQUIRE(r.exit_code == 0);
        CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("\"pork chops\""));
        CHECK_THAT(r.output, !Catch::Matchers::ContainsSubstring("\"sausage\""));

        const auto bad = write_file(dir, "bad.conf", "associations = 3\n");
        const auto b = run_command(joke_cmd("--config " + shell_quote(bad.string())));
        CHECK(b.exit_code == 1);
        CHECK_THAT(b.output, Catch::Matchers::ContainsSubstring("ConfigError"));
    }
    SECTION("usage errors") {
        CHECK(run_command(cli()).exit_code != 0);
        CHECK(run_command(cli() + " --help").exit_code == 0);
        CHECK(run_command(cli() + " joke").exit_code != 0);
        CHECK(run_command(joke_cmd("--mock /does/not/exist.json")).exit_code != 0);
    }
}

TEST_CASE("eval aggregate") {
    SECTION("Table 1 fixture") {
        const auto r = run_command(cli() + " eval aggregate --ratings " + shell_quote(test_data("table1_ratings.csv").string()));
        REQUIRE(r.exit_code == 0);
        CHECK_THAT(r.output, Catch::Matchers::StartsWith("source,mean_rating,pct_jokes\n"
                                                         "Human,1.84,23.6\n"
                                                         "GPT-LOL,1.96,33.8\n"
                                                         "Witscript 3,2.36,44.1\n\n"));
    }
    SECTION("with pairs, to a file") {
        const auto dir = witforge::testing::temp_dir("cli-agg");
        const auto out = dir / "report.csv";
        const auto r = run_command(cli() + " eval aggregate --ratings " + shell_quote(test_data("table1_ratings.csv").string()) +
                                   " --pairs " + shell_quote(test_data("table1_pairs.csv").string()) + " --out " +
                                   shell_quote(out.string()));
        REQUIRE(r.exit_code == 0);
        const auto report = read_text(out);
        CHECK_THAT(report, Catch::Matchers::ContainsSubstring("Witscript 3,2.36,44.1"));
        CHECK_THAT(report, Catch::Matchers::ContainsSubstring("01-witscript3,1,Witscript 3,"));
    }
    SECTION("empty ratings") {
        const auto dir = witforge::testing::temp_dir("cli-empty");
        const auto p = write_file(dir, "ratings.csv", "pair_id,rater_id,score\n");
        const auto r = run_command(cli() + " eval aggregate --ratings " + shell_quote(p.string()));
        CHECK(r.exit_code == 1);
        CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("EmptySource"));
    }
    SECTION("bad score names its record") {
        const auto dir = witforge::testing::temp_dir("cli-bad");
        const auto p = write_file(dir, "ratings.csv", "pair_id,rater_id,score\n01-human,r1,3\n01-human,r2,9\n");
        const auto r = run_command(cli() + " eval aggregate --ratings " + shell_quote(p.string()));
        CHECK(r.exit_code == 1);
        CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("record 3"));
    }
}

TEST_CASE("eval sample, generate, shuffle") {
    const auto dir = witforge::testing::temp_dir("cli-eval");
    const auto dataset = shell_quote(repo_data("topical_chat_sample.csv").string());
    auto sample = [&](const std::string& name, int seed) {
        const auto out = dir / name;
        const auto r = run_command(cli() + " eval sample --dataset " + dataset + " --n 13 --seed " + std::to_string(seed) +
                                   " --out " + shell_quote(out.string()));
        REQUIRE(r.exit_code == 0);
        return out;
    };
    const auto a = sample("a.csv", 7);
    const auto b = sample("b.csv", 7);
    CHECK(read_text(a) == read_text(b));
    CHECK(read_text(sample("c.csv", 8)) != read_text(a));
    const auto rows = witforge::csv::parse(read_text(a));
    REQUIRE(rows.size() == 14);
    CHECK(rows[0].fields == std::vector<std::string>{"item", "sentence", "conversation_id", "turn_index", "requires_review"});

    SECTION("not enough eligible comments") {
        const auto r = run_command(cli() + " eval sample --dataset " + dataset + " --n 500 --seed 7");
        CHECK(r.exit_code == 1);
        CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("InsufficientEligible"));
    }
    SECTION("generate human and baseline responses") {
        nlohmann::json script;
        for (int i = 0; i < 13; ++i) script["gpt_lol"].push_back("lol " + std::to_string(i));
        const auto mock = write_file(dir, "mock.json", script.dump());
        const auto pairs = dir / "pairs.csv";
        const auto r = run_command(cli() + " eval generate --inputs " + shell_quote(a.string()) + " --dataset " + dataset +
                                   " --sources human,gpt_lol --mock " + shell_quote(mock.string()) + " --out " +
                                   shell_quote(pairs.string()));
        REQUIRE(r.exit_code == 0);
        const auto got = witforge::eval::read_pairs(pairs);
        REQUIRE(got.size() == 26);
        CHECK(got[0].pair_id == "01-human");
        CHECK(got[1].pair_id == "01-gpt_lol");
        CHECK(got[1].response == "lol 0");
        CHECK(got[25].response == "lol 12");

        // Table 1 inputs are followed by the published human reply
        std::map<std::string, std::string> published;
        for (const auto& p : witforge::eval::read_pairs(test_data("table1_pairs.csv"))) {
            if (p.source == "human") published[p.input] = p.response;
        }
        int matched = 0;
        for (const auto& p : got) {
            auto it = published.find(p.input);
            if (p.source != "human" || it == published.end()) continue;
            CHECK(p.response == it->second);
            ++matched;
        }
        CHECK(matched > 0);

        const auto s1 = run_command(cli() + " eval shuffle --pairs " + shell_quote(pairs.string()) + " --seed 3");
        const auto s2 = run_command(cli() + " eval shuffle --pairs " + shell_quote(pairs.string()) + " --seed 3");
        REQUIRE(s1.exit_code == 0);
        CHECK(s1.output == s2.output);
        CHECK(s1.output != read_text(pairs));
        CHECK(s1.output.size() == read_text(pairs).size());
    }
    SECTION("human source needs the dataset") {
        const auto r = run_command(cli() + " eval generate --inputs " + shell_quote(a.string()) + " --sources human");
        CHECK(r.exit_code == 1);
        CHECK_THAT(r.output, Catch::Matchers::ContainsSubstring("--dataset"));
    }
}

TEST_CASE("serve") {
    const int port = free_port();
    REQUIRE(port > 0);
    const auto dir = witforge::testing::temp_dir("cli-serve");
    const auto pid_file = dir / "pid";
    const auto log_file = dir / "log";
    const auto cmd = cli() + " serve --port " + std::to_string(port) + " --state-dir " + shell_quote((dir / "s").string()) +
                     " --mock " + golden() + " > " + shell_quote(log_file.string()) + " 2>&1 & echo $! > " +
                     shell_quote(pid_file.string());
    REQUIRE(std::system(cmd.c_str()) == 0);

    httplib::Client client("127.0.0.1", port);
    bool up = false;
    for (int i = 0; i < 100 && !up; ++i) {
        auto res = client.Get("/v1/health");
        up = res && res->status == 200;
        if (!up) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    REQUIRE(up);
    const auto created = client.Post("/v1/sessions", nlohmann::json{{"topic", kPigs}}.dump(), "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = nlohmann::json::parse(created->body).at("session_id");
    const auto ran = client.Post("/v1/sessions/" + id + "/run", "", "application/json");
    REQUIRE(ran);
    CHECK(ran->status == 200);
    const auto state = nlohmann::json::parse(ran->body).at("state");
    const auto idx = state.at("selected_index").get<std::size_t>();
    CHECK(state.at("jokes").at(idx).at("full_text") == kGoldenJoke);
    CHECK(std::filesystem::exists(dir / "s" / (id + ".jsonl")));

    const auto pid = std::string(witforge::text::trim(read_text(pid_file)));
    CHECK(std::system(("kill -TERM " + pid).c_str()) == 0);
    bool down = false;
    for (int i = 0; i < 100 && !down; ++i) {
        down = std::system(("kill -0 " + pid + " 2>/dev/null").c_str()) != 0;
        if (!down) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    CHECK(down);
}
