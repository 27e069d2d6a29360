#!/usr/bin/env python3
"""Builds the evaluation fixtures under tests/data.

table1_pairs.csv    the 13 inputs, 39 responses and their published mean ratings
table1_ratings.csv  a synthetic 585-rating set (15 raters per pair) whose per-pair
                    means round to the published means and whose per-source share of
                    scores >= 3 matches the published joke percentages

The rating set is found by a small constraint search: for every pair the integer
score total is fixed by its mean, which bounds how many of its 15 scores can be 3 or 4.
A per-source subset-sum over those bounds then hits the target joke count.
"""
import csv
import itertools
import math
import pathlib
import sys

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"
RATERS = 15

ITEMS = [
    ("Two identical twins in Japan have released a rap album and they are 100 years old.",
     ("That is awesome.", 2.00),
     ("This is amazing! I can't believe they are still alive, let alone rapping!", 1.60),
     ("I'm not sure if they're 'twinning' or 'losing.'", 2.33)),
    ("I would love to be the UN ambassador to aliens though!",
     ("Me too lol. That would be a pretty cushy job, I think.", 2.47),
     ("I think you would make an excellent UN ambassador to aliens!", 1.87),
     ("I would love to be the US Permanent Representative to the United Aliens!", 2.20)),
    ('Speaking of directors, did you know that "Frozen" was the first animated Disney film directed by a woman?',
     ('Yes, "Frozen," for which she earned an Academy Award for Best Animated Feature. Lee is the first female director.', 1.53),
     ("Yes, I actually did know that! I think it's amazing that Disney is finally starting to represent women in leadership positions!", 1.47),
     ("And the last.", 1.60)),
    ("Did you know there is a free website to listen to thousands of classic radio dramas?",
     ("No, I did not. That sounds pretty cool.", 1.40),
     ("Yes, I did know that. It's called the Internet Archive.", 1.47),
     ("Yes, it's called a graveyard.", 1.93)),
    ("Germany has given animals legal rights in their constitution.",
     ("I heard about that! I think they started that in 2002.", 1.20),
     ("This is a hoot! I didn't know that Germany had given animals legal rights in their constitution. I wonder what kinds of rights they have.", 1.60),
     ("If animals have legal rights, does that mean I can sue my neighbor's dog for barking?", 2.80)),
    ("I wonder if all those basketball players leave tea bags in their shoes to absorb the odor!",
     ("It would be hard running the floor with those in there... Just kidding!", 2.60),
     ("You're hilarious!", 2.13),
     ("Michael Jordan is the Earl Grey of slam dunks.", 2.67)),
    ("Do you know Iceland is rewriting their constitution using Facebook?",
     ("Great way to get more involved via social networking!", 2.13),
     ("Yes, I heard that Facebook is now the go-to source for constitutional law.", 1.87),
     ("I'm not surprised. Facebook is where all the cool kids are.", 2.47)),
    ("Brian May has an interesting way of playing the guitar, with an English sixpence.",
     ("That's interesting. I heard Brian May has a PhD in astrophysics.", 1.53),
     ("Brian May has an interesting way of playing the guitar, with an English sixpence. I'm not sure if that's a good thing or a bad thing, but it's certainly unique!", 1.53),
     ("I always suspected Brian May was a bit of a tightwad!", 2.33)),
    ("Did you know that panda researchers wear panda costumes to work?",
     ("That's weird.", 1.73),
     ("That's a bit of a bamboozle!", 2.93),
     ("Do they also get a discount at the Panda Express?", 2.53)),
    ("Did you know the White House has twin buildings in Ireland and France?",
     ("That is interesting.", 1.80),
     ("Yes, I did know that! The White House is a very popular tourist destination, so it's no surprise that they would have twin buildings in other countries.", 1.73),
     ("So that's where they've been hiding the other presidents!", 2.93)),
    ("If you live in South Africa, you can even attach a flamethrower on your car so it doesn't get carjacked!",
     ("That's awesome! I would totally make burgers or something with that flamethrower LOL. But I also probably would not go to South Africa.", 2.07),
     ("I don't know about you, but I feel safer already!", 2.47),
     ("I always attach a flamethrower to my car. Just in case I need to light my cigarettes.", 2.13)),
    ("An aluminum piano was once built for an airship and weighed only 365 pounds!",
     ('"Only," haha. That\'s still massively heavy. That piano was built for the famous Hindenburg.', 2.00),
     ("If that's the case, I'd love to see a grand piano made out of aluminum!", 2.07),
     ("Why did the aluminum piano cross the road? To get to the other pie piano!", 2.13)),
    ("There is a radio station that turns solar activity to sound.",
     ("Wow, cool.", 1.40),
     ('Why didn\'t they just name it "The Sun FM"?', 2.80),
     ("If you listen to it for too long, you'll get sunburn.", 2.67)),
]

SOURCES = ["human", "gpt_lol", "witscript3"]
# Published share of scores >= 3 per source, in percent.
PCT_TARGET = {"human": 23.6, "gpt_lol": 33.8, "witscript3": 44.1}


def pair_id(item, source):
    return f"{item:02d}-{source}"


def score_total(mean):
    total = round(mean * RATERS)
    assert round(total / RATERS, 2) == round(mean, 2), (mean, total)
    return total


def high_count_bounds(total):
    # k scores in {3,4}, 15-k in {1,2}: 15 + 2k <= total <= 30 + 2k
    lo = max(0, math.ceil((total - 30) / 2))
    hi = min(RATERS, (total - 15) // 2)
    assert lo <= hi, total
    return lo, hi


def joke_count_target(pct):
    n = RATERS * len(ITEMS)
    candidates = [k for k in range(n + 1) if abs(100.0 * k / n - pct) <= 0.05]
    assert candidates, pct
    return min(candidates, key=lambda k: abs(100.0 * k / n - pct))


def choose_high_counts(bounds, target):
    # Deterministic subset-sum: start every pair at its lower bound, then raise
    # pairs in order until the target is met.
    counts = [lo for lo, _ in bounds]
    need = target - sum(counts)
    assert need >= 0, "target below minimum"
    for i, (lo, hi) in enumerate(bounds):
        step = min(hi - lo, need)
        counts[i] += step
        need -= step
    assert need == 0, "target above maximum"
    return counts


def scores_for(total, high):
    low = RATERS - high
    # start at the minimum (1s and 3s), then promote to 2s / 4s
    scores = [3] * high + [1] * low
    extra = total - sum(scores)
    assert 0 <= extra <= RATERS
    for i in range(len(scores)):
        if extra == 0:
            break
        scores[i] += 1
        extra -= 1
    assert sum(scores) == total and sum(s >= 3 for s in scores) == high
    # interleave so raters do not all give the same pattern
    return scores[::2] + scores[1::2]


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "table1_pairs.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["pair_id", "item", "source", "input", "response", "mean_rating"])
        for i, (sentence, *responses) in enumerate(ITEMS, start=1):
            for source, (response, mean) in zip(SOURCES, responses):
                w.writerow([pair_id(i, source), i, source, sentence, response, f"{mean:.2f}"])

    rows = []
    for s_idx, source in enumerate(SOURCES):
        totals = [score_total(item[1 + s_idx][1]) for item in ITEMS]
        bounds = [high_count_bounds(t) for t in totals]
        target = joke_count_target(PCT_TARGET[source])
        lo = sum(b[0] for b in bounds)
        hi = sum(b[1] for b in bounds)
        print(f"{source}: joke-count target {target}/{RATERS * len(ITEMS)} feasible range [{lo}, {hi}]",
              file=sys.stderr)
        highs = choose_high_counts(bounds, target)
        for i, (t, h) in enumerate(zip(totals, highs), start=1):
            for r, score in enumerate(scores_for(t, h), start=1):
                rows.append((pair_id(i, source), f"r{r:02d}", score))

    with open(OUT / "table1_ratings.csv", "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["pair_id", "rater_id", "score"])
        w.writerows(sorted(rows))

    # self-check of the frozen fixture
    by_source = {s: [] for s in SOURCES}
    for pid, _, score in rows:
        by_source[pid.split("-", 1)[1]].append(score)
    for s, scores in by_source.items():
        mean = sum(scores) / len(scores)
        pct = 100.0 * sum(x >= 3 for x in scores) / len(scores)
        print(f"{s}: n={len(scores)} mean={mean:.4f} pct={pct:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
