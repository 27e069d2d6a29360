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

#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace witforge::lexicon {

// Singular common nouns, lowercase. Conversational English, biased toward the
// things people chat about: animals, food, places, media, sports, science.
inline constexpr std::string_view kCommonNouns = R"(
account accident act action activity actor actress ad adult advice age agency agent air aircraft airline airplane
airport airship album alien alligator ambassador amount anchor angle animal answer ant apartment app apple april
area arm army art article artist astronaut athlete atmosphere attack audience august aunt author authority award
baby back bacon bag bakery ball balloon banana band bank bar baseball basket basketball bat bath bathroom battery
battle beach bean bear beard bed bedroom bee beef beer bell belt bench bike bill bird birthday biscuit bite blanket
blood board boat body bone book boot border boss bottle bowl box boxer boy brain branch brand bread breakfast
bridge brother bubble budget bug building bull burger bus business butter butterfly button cabin cable cafe cake
calendar camel camera camp campaign canal cancer candidate candle candy cap capital captain car card career carpet
carrot cartoon case cash castle cat cattle cave ceiling celebrity cell century chain chair champion championship
channel chapter character charity cheese chef chemical chess chicken child chip chocolate choice church cigarette
cinema circus citizen city class classroom clay client climate clock closet cloth clothes cloud club coach coast
coat coffee coin college colony color comedian comedy comic company competition computer concert condition conference
congress constitution contest continent contract cook cookie corn corner costume cotton couch council country
couple course court cousin cow crab creature crew crime criminal crop crowd crown cup customer dad dam dance dancer
danger date daughter day deal death decade deer degree dentist department desert designer desk dessert detective
device diamond diary diet dinner dinosaur director disease doctor document dog doll dollar dolphin door dragon drama
dream dress drink driver drone drug drum duck dust eagle ear earth earthquake economy egg election electricity
elephant elevator email emperor employee empire energy engine engineer episode event exam experiment expert eye
face factory fair family fan farm farmer fashion father feather fee festival field fight film finger fire
firefighter fish flag flamethrower flight floor flower flu fly food foot football forest fork fortune fossil fox
friend frog fruit fuel fun funeral furniture galaxy game gang garage garden gas gate gene generation ghost gift giraffe
girl glass glove goal goat god gold golf government governor grandfather grandmother grape grass grocery ground group
guest guide guitar gun guy gym habit hair hall ham hamburger hand hat head health heart heat helicopter helmet hero
highway hill history hobby hockey hole holiday home homework honey horse hospital host hotel hour house human husband
ice idea illness image income industry insect instrument internet interview inventor invention island jacket jail
jazz jeans jet job joke journalist judge juice jungle kangaroo key kid king kitchen kitten knife lab ladder lady lake
lamp land language laptop law lawyer leader leaf league leg lemon lesson letter library lie life light lion list
lizard lobster lottery love lunch machine magazine magic magician mail man manager map market marriage mask match
meal meat medal medicine meeting member memory menu message metal meteor microphone microwave milk million minister
minute mirror mission mom money monkey monster month moon mosquito mother motor mountain mouse mouth movie mud museum
mushroom music musician nail name nation nature neighbor nest network news newspaper night noise nose novel nurse
nut ocean octopus odor office officer oil onion opera orange orchestra owl owner oxygen painter painting pair palace
pan panda paper parent park parrot party passenger passport pasta patient pen pencil penguin people pepper person
pet phone photo photograph physicist piano picture pie pig pigeon pill pilot pizza place plane planet plant plastic
plate player plot pocket poem poet police politician pollution pool pop population pork portrait post potato pound
president price prince princess prison prisoner prize problem product professor program project prophet pub pumpkin
puppy queen question rabbit race radio rain rainbow rap rapper rat reader recipe record referee religion report
reporter researcher restaurant rice right ring river road robot rock rocket roof room rope rose rule rumor runner
salad salt sand sandwich satellite sauce sausage scene school science scientist score screen sculpture sea season
seat secret senator series shark sheep shelf ship shirt shoe shop show shower sign singer sister sixpence skate
skeleton skin sky sleep smartphone smell snake snow soap soccer sock sofa soldier son song soul sound soup space
speaker species speech spider sport spy squirrel stadium stage star state station statue steak stone store storm
story stove street student studio submarine subway sugar suit summer sun supermarket surgeon surgery sweater swimmer
table tablet tail tax taxi tea teacher team tear teeth telephone telescope television temperature temple tennis tent
test theater theory thief thing thousand throne ticket tiger time tire toast toilet tomato tongue tooth topic tour
tourist tower town toy track tractor trade traffic train trainer treasure tree trip trophy truck trumpet turkey
turtle twin umbrella uncle uniform universe university vacation vaccine valley vegetable vehicle video village
violin virus voice volcano vote wall war warrior watch water wave way weapon weather website wedding week weekend
whale wheel wife wind window wine winner winter witch wolf woman wood word work worker world worm writer yard year
zebra zoo
)";

inline const std::unordered_set<std::string>& common_nouns() {
    static const std::unordered_set<std::string> set = [] {
        std::unordered_set<std::string> s;
        std::string word;
        for (char c : kCommonNouns) {
            if (c == ' ' || c == '\n') {
                if (!word.empty()) s.insert(std::move(word));
                word.clear();
            } else {
                word.push_back(c);
            }
        }
        if (!word.empty()) s.insert(std::move(word));
        return s;
    }();
    return set;
}

/// Singular candidates for a lowercase word, most likely first.
inline std::vector<std::string> singular_forms(std::string_view w) {
    std::vector<std::string> out{std::string(w)};
    auto ends = [&](std::string_view suf) { return w.size() > suf.size() && w.substr(w.size() - suf.size()) == suf; };
    if (ends("ies")) out.push_back(std::string(w.substr(0, w.size() - 3)) + "y");
    if (ends("ves")) {
        out.push_back(std::string(w.substr(0, w.size() - 3)) + "f");
        out.push_back(std::string(w.substr(0, w.size() - 3)) + "fe");
    }
    if (ends("es")) out.push_back(std::string(w.substr(0, w.size() - 2)));
    if (ends("s") && !ends("ss")) out.push_back(std::string(w.substr(0, w.size() - 1)));
    static const std::unordered_map<std::string_view, std::string_view> irregular = {
        {"men", "man"}, {"women", "woman"}, {"children", "child"}, {"feet", "foot"}, {"mice", "mouse"}, {"teeth", "tooth"}};
    if (auto it = irregular.find(w); it != irregular.end()) out.emplace_back(it->second);
    return out;
}

inline bool is_common_noun(std::string_view lowercase_word) {
    const auto& set = common_nouns();
    for (const auto& form : singular_forms(lowercase_word)) {
        if (set.count(form)) return true;
    }
    return false;
}

}  // namespace witforge::lexicon
