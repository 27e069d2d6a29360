// Copyright 2026 The Witforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support.hpp"
#include "witforge/pipeline.hpp"

using namespace witforge;
using witforge::testing::kGoldenJoke;
using witforge::testing::kPigs;

namespace {

Script script(std::initializer_list<std::pair<const TemplateId, std::vector<std::string>>> entries) {
    Script out;
    for (const auto& [id, replies] : entries) {
        for (const auto& r : replies) out[id].push_back({r, std::nullopt});
    }
    return out;
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidPayload;
}

const std::vector<std::vector<Association>> kPigsLists{
    {{"bacon", 0}, {"pork chops", 0}, {"ham", 0}, {"sausage", 0}},
    {{"The Alamo", 1}, {"River Walk", 1}, {"Texas Longhorns", 1}, {"Whataburger", 1}},
};

PipelineState pigs_with_handles() {
    return advance_stage(set_topic(kPigs),
                         HandlesPayload{{{"pigs", HandleKind::noun}, {"San Antonio", HandleKind::named_entity}}});
}

PipelineState pigs_with_associations() { return advance_stage(pigs_with_handles(), AssociationsPayload{kPigsLists}); }

PipelineState pigs_with_candidates(std::vector<PunchLineCandidate> candidates) {
    return advance_stage(pigs_with_associations(), CandidatesPayload{std::move(candidates)});
}

const PunchLineCandidate kWordplay{"bacon Whataburger", Mechanism::wordplay, {{"bacon", 0}, {"Whataburger", 1}}};
const PunchLineCandidate kCommonsense{"Alamo Sausage", Mechanism::commonsense, {{"sausage", 0}, {"The Alamo", 1}}};
const PunchLineCandidate kThird{"Hog Antonio", Mechanism::third, {}};

PipelineState three_jokes() {
    auto s = pigs_with_candidates({kWordplay, kCommonsense, kThird});
    std::vector<JokeCandidate> jokes;
    for (const auto* text : {"Now they work the drive-thru as bacon Whataburger", kGoldenJoke,
                             "Police say they were just trying to get back to Hog Antonio."}) {
        const auto& c = s.candidates[jokes.size()];
        jokes.push_back({s.topic, text, c, assemble_full_text(text, c.text)});
    }
    return advance_stage(s, JokesPayload{jokes});
}

struct Harness {
    std::unique_ptr<ScriptedBackend> backend;
    JokePipeline pipeline;

    explicit Harness(Script s, PipelineConfig config = {})
        : backend(scripted_mock(std::move(s))), pipeline(*backend, witforge::testing::prompts(), std::move(config)) {}
};

}  // namespace

TEST_CASE("set_topic") {
    CHECK(set_topic(kPigs).topic.word_count == 13);
    CHECK(set_topic(kPigs).stage == Stage::TopicSet);
    CHECK(set_topic("   hi   ").topic.word_count == 1);
    CHECK(kind_of([] { set_topic(""); }) == ErrorKind::EmptyTopic);
}

TEST_CASE("select_topic_handles") {
    SECTION("two handles") {
        Harness h(script({{TemplateId::handle_selection, {"pigs; San Antonio"}}}));
        const auto s = h.pipeline.select_topic_handles(set_topic(kPigs));
        CHECK(s.stage == Stage::HandlesSelected);
        REQUIRE(s.handles.size() == 2);
        CHECK(s.handles[0] == TopicHandle{"pigs", HandleKind::noun});
        CHECK(s.handles[1] == TopicHandle{"San Antonio", HandleKind::named_entity});
        REQUIRE(h.backend->calls() == 1);
        CHECK(h.backend->transcript()[0].prompt.find(kPigs) != std::string::npos);
    }
    SECTION("one item") {
        Harness h(script({{TemplateId::handle_selection, {"pigs"}}}));
        try {
            h.pipeline.select_topic_handles(set_topic(kPigs));
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::HandleParseError);
            CHECK(e.stage() == "HandlesSelected");
        }
    }
    SECTION("hallucinated handle") {
        Harness h(script({{TemplateId::handle_selection, {"pigs; Houston"}}}));
        CHECK(kind_of([&] { h.pipeline.select_topic_handles(set_topic(kPigs)); }) == ErrorKind::HandleNotInTopic);
    }
    SECTION("edge punctuation and odd case") {
        Harness h(script({{TemplateId::handle_selection, {"\"Pigs\";  san antonio."}}}));
        const auto s = h.pipeline.select_topic_handles(set_topic(kPigs));
        CHECK(s.handles[0].surface == "Pigs");
        CHECK(s.handles[1].surface == "san antonio");
        CHECK(s.handles[1].kind == HandleKind::noun_phrase);
    }
    SECTION("wrong stage") {
        Harness h(script({}));
        CHECK(kind_of([&] { h.pipeline.select_topic_handles(pigs_with_handles()); }) == ErrorKind::StageOrderViolation);
        CHECK(h.backend->calls() == 0);
    }
}

TEST_CASE("generate_associations") {
    SECTION("the two example lists") {
        Harness h(script({{TemplateId::association_generation,
                           {"bacon; pork chops; ham; sausage", "The Alamo; River Walk; Texas Longhorns; Whataburger"}}}));
        const auto s = h.pipeline.generate_associations(pigs_with_handles());
        CHECK(s.stage == Stage::AssociationsGenerated);
        CHECK(s.associations == kPigsLists);
        const auto t = h.backend->transcript();
        REQUIRE(t.size() == 2);
        CHECK(t[0].prompt.find("\"pigs\"") != std::string::npos);
        CHECK(t[1].prompt.find("\"San Antonio\"") != std::string::npos);
    }
    SECTION("self-echo filtered to nothing") {
        Harness h(script({{TemplateId::association_generation, {"pigs; pigs; pigs"}}}));
        try {
            h.pipeline.generate_associations(pigs_with_handles());
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::EmptyAssociationList);
            CHECK(e.stage() == "AssociationsGenerated");
        }
    }
    SECTION("duplicates, topic words and the cap") {
        PipelineConfig config;
        config.associations_per_handle = 2;
        Harness h(script({{TemplateId::association_generation, {"Bacon; bacon; Texas; ham.; lard", "Alamo; River Walk"}}}),
                  config);
        const auto s = h.pipeline.generate_associations(pigs_with_handles());
        CHECK(s.associations[0] == std::vector<Association>{{"Bacon", 0}, {"ham", 0}});
        CHECK(s.associations[1] == std::vector<Association>{{"Alamo", 1}, {"River Walk", 1}});
        CHECK(h.backend->transcript()[0].prompt.find('2') != std::string::npos);
    }
}

TEST_CASE("create_candidates") {
    SECTION("commonsense candidate and its sources") {
        Harness h(script({{TemplateId::commonsense_punchline, {"Alamo Sausage"}}, {TemplateId::third_mechanism, {"Hog Antonio"}}}));
        const auto s = h.pipeline.create_candidates(pigs_with_associations());
        CHECK(s.stage == Stage::CandidatesCreated);
        // no pair of the example lists is within 0.4
        REQUIRE(s.candidates.size() == 2);
        CHECK(s.candidates[0] == kCommonsense);
        CHECK(s.candidates[1] == kThird);
    }
    SECTION("wordplay present when the threshold allows it") {
        PipelineConfig config;
        config.wordplay_threshold = 0.7;
        Harness h(script({{TemplateId::commonsense_punchline, {"Alamo Sausage"}}, {TemplateId::third_mechanism, {"Hog Antonio"}}}),
                  config);
        const auto s = h.pipeline.create_candidates(pigs_with_associations());
        REQUIRE(s.candidates.size() == 3);
        CHECK(s.candidates[0] == kWordplay);
    }
    SECTION("every mechanism comes up empty") {
        PipelineConfig config;
        config.third_mechanism = "disabled";
        Harness h(script({{TemplateId::commonsense_punchline, {"   "}}}), config);
        try {
            h.pipeline.create_candidates(pigs_with_associations());
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::NoCandidates);
            CHECK(e.stage() == "CandidatesCreated");
        }
    }
    SECTION("backend errors propagate") {
        Script s;
        s[TemplateId::commonsense_punchline].push_back({{}, ErrorKind::TransportError});
        Harness h(s);
        CHECK(kind_of([&] { h.pipeline.create_candidates(pigs_with_associations()); }) == ErrorKind::TransportError);
    }
}

TEST_CASE("third mechanism is pluggable") {
    struct Reversal final : PunchLineMechanism {
        std::string_view name() const override { return "reversal"; }
        std::optional<PunchLineCandidate> produce(const PipelineState& s, MechanismContext&) const override {
            return PunchLineCandidate{s.handles[1].surface + " " + s.handles[0].surface, Mechanism::commonsense, {}};
        }
    };
    register_third_mechanism("reversal", [] { return std::make_unique<Reversal>(); });
    PipelineConfig config;
    config.third_mechanism = "reversal";
    Harness h(script({{TemplateId::commonsense_punchline, {"Alamo Sausage"}}}), config);
    const auto s = h.pipeline.create_candidates(pigs_with_associations());
    REQUIRE(s.candidates.size() == 2);
    CHECK(s.candidates[1].text == "San Antonio pigs");
    CHECK(s.candidates[1].mechanism == Mechanism::third);
    CHECK(h.backend->remaining(TemplateId::third_mechanism) == 0);

    config.third_mechanism = "nope";
    auto backend = scripted_mock({});
    CHECK(kind_of([&] { JokePipeline(*backend, witforge::testing::prompts(), config); }) == ErrorKind::ConfigError);
}

TEST_CASE("generate_angles") {
    SECTION("the example angle") {
        Harness h(script({{TemplateId::angle_generation, {kGoldenJoke}}}));
        const auto s = h.pipeline.generate_angles(pigs_with_candidates({kCommonsense}));
        REQUIRE(s.jokes.size() == 1);
        CHECK(s.jokes[0].full_text == kGoldenJoke);
        CHECK(s.jokes[0].punch_line == kCommonsense);
    }
    SECTION("a buried punch line costs one retry") {
        Harness h(script({{TemplateId::angle_generation,
                           {"Alamo Sausage was where they ended up after a long afternoon of running loose", kGoldenJoke}}}));
        const auto s = h.pipeline.generate_angles(pigs_with_candidates({kCommonsense}));
        REQUIRE(s.jokes.size() == 1);
        CHECK(s.jokes[0].full_text == kGoldenJoke);
        CHECK(h.backend->calls() == 2);
    }
    SECTION("one candidate fails every retry") {
        const std::string buried = "bacon Whataburger is what they became after a very long day of running around";
        Harness h(script({{TemplateId::angle_generation,
                           {buried, buried, buried, kGoldenJoke, "Police say they were just trying to get back to Hog Antonio."}}}));
        const auto s = h.pipeline.generate_angles(pigs_with_candidates({kWordplay, kCommonsense, kThird}));
        REQUIRE(s.jokes.size() == 2);
        CHECK(s.jokes[0].punch_line == kCommonsense);
        CHECK(s.jokes[1].punch_line == kThird);
        CHECK(h.backend->remaining(TemplateId::angle_generation) == 0);
    }
    SECTION("nothing survives") {
        PipelineConfig config;
        config.angle_retry_limit = 1;
        Harness h(script({{TemplateId::angle_generation, {"Alamo Sausage, and then a long story about the weather"}}}), config);
        CHECK(kind_of([&] { h.pipeline.generate_angles(pigs_with_candidates({kCommonsense})); }) == ErrorKind::NoJokes);
    }
    SECTION("the punch line is appended when missing") {
        Harness h(script({{TemplateId::angle_generation, {"Now they are known as"}}}));
        const auto s = h.pipeline.generate_angles(pigs_with_candidates({kThird}));
        CHECK(s.jokes[0].full_text == "Now they are known as Hog Antonio");
        CHECK(s.jokes[0].angle == "Now they are known as");
    }
}

TEST_CASE("select_funniest") {
    const auto jokes = three_jokes();
    SECTION("plain number") {
        Harness h(script({{TemplateId::candidate_selection, {"2"}}}));
        CHECK(h.pipeline.select_funniest(jokes).selected_index == 1u);
        const auto prompt = h.backend->transcript().at(0).prompt;
        CHECK(prompt.find(std::string("1. Now they work the drive-thru as bacon Whataburger\n2. ") + kGoldenJoke + "\n3. ") !=
              std::string::npos);
    }
    SECTION("first integer in range") {
        Harness h(script({{TemplateId::candidate_selection, {"the funniest is clearly number 3!"}}}));
        CHECK(h.pipeline.select_funniest(jokes).selected_index == 2u);
    }
    SECTION("out-of-range numbers are skipped") {
        Harness h(script({{TemplateId::candidate_selection, {"0 or 7, no wait, 3"}}}));
        CHECK(h.pipeline.select_funniest(jokes).selected_index == 2u);
    }
    SECTION("unparseable reply falls back to commonsense") {
        Harness h(script({{TemplateId::candidate_selection, {"banana"}}}));
        const auto s = h.pipeline.select_funniest(jokes);
        CHECK(s.stage == Stage::Selected);
        CHECK(s.selected_index == 1u);
        CHECK(s.selected_joke()->punch_line.mechanism == Mechanism::commonsense);
    }
    SECTION("backend failure falls back too") {
        Script s;
        s[TemplateId::candidate_selection].push_back({{}, ErrorKind::RateLimited});
        Harness h(s);
        CHECK(h.pipeline.select_funniest(jokes).selected_index == 1u);
    }
    SECTION("a single joke needs no call") {
        Harness h(script({}));
        auto one = pigs_with_candidates({kThird});
        one = advance_stage(one, JokesPayload{{{one.topic, "Back to", kThird, "Back to Hog Antonio"}}});
        CHECK(h.pipeline.select_funniest(one).selected_index == 0u);
        CHECK(h.backend->calls() == 0);
    }
}

TEST_CASE("fallback order") {
    auto jokes = three_jokes().jokes;
    CHECK(fallback_selection(jokes) == 1);
    jokes.erase(jokes.begin() + 1);
    CHECK(fallback_selection(jokes) == 0);
    jokes.erase(jokes.begin());
    CHECK(fallback_selection(jokes) == 0);
}

TEST_CASE("run") {
    SECTION("golden script") {
        Harness h(witforge::testing::golden_script());
        const auto result = h.pipeline.run(kPigs);
        CHECK(result.joke.full_text == kGoldenJoke);
        CHECK(result.state.stage == Stage::Selected);
        CHECK(result.state.handles[1].surface == "San Antonio");
        CHECK(result.state.associations == kPigsLists);
        CHECK(result.state.candidates == std::vector<PunchLineCandidate>{kCommonsense, kThird});
        CHECK(result.state.jokes.size() == 2);
        CHECK(h.backend->calls() == 8);
        CHECK_FALSE(check_invariants(result.state));
    }
    SECTION("empty topic") {
        Harness h(witforge::testing::golden_script());
        try {
            h.pipeline.run("  ");
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::EmptyTopic);
            CHECK(e.stage() == "TopicSet");
        }
    }
    SECTION("script runs out mid-chain") {
        auto s = witforge::testing::golden_script();
        s.erase(TemplateId::angle_generation);
        Harness h(s);
        try {
            h.pipeline.run(kPigs);
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ScriptExhausted);
            CHECK(e.stage() == "JokesGenerated");
        }
    }
    SECTION("deterministic") {
        Harness a(witforge::testing::golden_script());
        Harness b(witforge::testing::golden_script());
        const auto ra = a.pipeline.run(kPigs);
        const auto rb = b.pipeline.run(kPigs);
        CHECK(nlohmann::json(ra.state).dump() == nlohmann::json(rb.state).dump());
        CHECK(a.backend->transcript() == b.backend->transcript());
    }
    SECTION("advance on a finished chain") {
        Harness h(witforge::testing::golden_script());
        const auto done = h.pipeline.run(kPigs).state;
        CHECK(kind_of([&] { h.pipeline.advance(done); }) == ErrorKind::StageOrderViolation);
    }
}

TEST_CASE("the wordplay candidate ignores the backend") {
    PipelineConfig config;
    config.wordplay_threshold = 0.9;
    auto empty = scripted_mock({});
    auto golden = scripted_mock(witforge::testing::golden_script());
    const JokePipeline a(*empty, witforge::testing::prompts(), config);
    const JokePipeline b(*golden, witforge::testing::prompts(), config);
    const auto s = pigs_with_associations();
    const auto ca = a.wordplay_candidate(s);
    const auto cb = b.wordplay_candidate(s);
    REQUIRE(ca);
    CHECK(*ca == *cb);
    CHECK(*ca == kWordplay);
    CHECK(empty->calls() == 0);
    CHECK(golden->calls() == 0);
}

TEST_CASE("edit_stage") {
    const auto jokes = three_jokes();
    SECTION("new handles clear everything after them") {
        const auto s = edit_stage(jokes, Stage::HandlesSelected,
                                  HandlesPayload{{{"pigs", HandleKind::noun}, {"Texas", HandleKind::named_entity}}});
        CHECK(s.stage == Stage::HandlesSelected);
        CHECK(s.handles[1].surface == "Texas");
        CHECK(s.associations.empty());
        CHECK(s.candidates.empty());
        CHECK(s.jokes.empty());
        CHECK_FALSE(check_invariants(s));
    }
    SECTION("adding an association, then resuming") {
        auto lists = kPigsLists;
        lists[0].push_back({"barbecue", 0});
        const auto s = edit_stage(jokes, Stage::AssociationsGenerated, AssociationsPayload{lists});
        CHECK(s.stage == Stage::AssociationsGenerated);
        CHECK(s.associations[0].back().text == "barbecue");
        CHECK(s.candidates.empty());
        CHECK(s.jokes.empty());

        auto rest = witforge::testing::golden_script();
        rest.erase(TemplateId::handle_selection);
        rest.erase(TemplateId::association_generation);
        Harness h(rest);
        const auto done = h.pipeline.resume(s);
        CHECK(done.selected_joke()->full_text == kGoldenJoke);
        for (const auto& r : h.backend->transcript()) {
            CHECK(r.template_id != TemplateId::handle_selection);
            CHECK(r.template_id != TemplateId::association_generation);
        }
    }
    SECTION("three handles") {
        const auto bad = HandlesPayload{
            {{"pigs", HandleKind::noun}, {"Texas", HandleKind::named_entity}, {"San Antonio", HandleKind::named_entity}}};
        CHECK_THROWS_AS(edit_stage(jokes, Stage::HandlesSelected, bad), Error);
    }
    SECTION("stage not reached") {
        CHECK(kind_of([] { edit_stage(pigs_with_handles(), Stage::CandidatesCreated, CandidatesPayload{{kThird}}); }) ==
              ErrorKind::StageOrderViolation);
    }
    SECTION("payload for another stage") {
        CHECK(kind_of([&] { edit_stage(jokes, Stage::HandlesSelected, SelectionPayload{0}); }) == ErrorKind::InvalidPayload);
    }
    SECTION("a new topic starts over") {
        const auto s = edit_stage(jokes, Stage::TopicSet, TopicPayload{Topic::make("My cat ate the homework.")});
        CHECK(s == set_topic("My cat ate the homework."));
    }
    SECTION("selection can be overridden") {
        const auto done = advance_stage(jokes, SelectionPayload{0});
        CHECK(edit_stage(done, Stage::Selected, SelectionPayload{2}).selected_index == 2u);
    }
}

TEST_CASE("every kept joke ends with its punch line") {
    std::mt19937_64 rng(31337);
    const std::vector<std::string> leads{"Turns out they were headed for", "Witnesses describe it as", "So much for",
                                         "Their lawyer blamed", "It all ended at the"};
    int completed = 0;
    for (int round = 0; round < 150; ++round) {
        auto s = witforge::testing::golden_script();
        auto& angles = s[TemplateId::angle_generation];
        angles.clear();
        const std::vector<std::string> punches{"Alamo Sausage", "Hog Antonio"};
        for (int i = 0; i < 6; ++i) {
            const auto& p = punches[rng() % 2];
            const auto& lead = leads[rng() % leads.size()];
            switch (rng() % 3) {
                case 0: angles.push_back({lead + " " + p + ".", std::nullopt}); break;
                case 1: angles.push_back({p + " is how " + lead + " the whole story went on and on", std::nullopt}); break;
                default: angles.push_back({lead, std::nullopt}); break;
            }
        }
        Harness h(s);
        try {
            const auto r = h.pipeline.run(kPigs);
            ++completed;
            for (const auto& j : r.state.jokes) {
                CHECK(satisfies_punch_line_position(j.full_text, j.punch_line.text));
            }
        } catch (const Error& e) {
            // the random script may starve a later candidate
            CHECK((e.kind() == ErrorKind::NoJokes || e.kind() == ErrorKind::ScriptExhausted));
        }
    }
    CHECK(completed > 0);
}
