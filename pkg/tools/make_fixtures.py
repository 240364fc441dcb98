"""Regenerate committed fixtures (demo corpus, smoke pairs).

Run from the repo root: python tools/make_fixtures.py
Golden files for the rule converter live in tests/fixtures/rules and
are frozen by tools/freeze_goldens.py after hand-verification.
"""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

DEMO_TASKS = [
    (1, "find the maximum of two numbers",
     "def max_of_two(a, b):\n    if a > b:\n        return a\n    return b"),
    (2, "reverse a string",
     "def reverse_string(s):\n    out = \"\"\n    for ch in s:\n        out = ch + out\n    return out"),
    (3, "add up all the numbers in a list",
     "def sum_list(items):\n    total = 0\n    for x in items:\n        total += x\n    return total"),
    (4, "compute the factorial of a number",
     "def factorial(n):\n    result = 1\n    for i in range(1, n + 1):\n        result *= i\n    return result"),
    (5, "check whether a number is even",
     "def is_even(n):\n    if n % 2 == 0:\n        return True\n    return False"),
    (6, "count the vowels in a string",
     "def count_vowels(text):\n    count = 0\n    for ch in text:\n        if ch in \"aeiou\":\n            count += 1\n    return count"),
    (7, "find the smallest element of a list",
     "def smallest(items):\n    best = items[0]\n    for x in items:\n        if x < best:\n            best = x\n    return best"),
    (8, "print the first n natural numbers",
     "def print_naturals(n):\n    for i in range(1, n + 1):\n        print(i)"),
    (9, "compute the average of a list of numbers",
     "def average(items):\n    total = 0\n    for x in items:\n        total += x\n    return total / len(items)"),
    (10, "check whether a string is a palindrome",
     "def is_palindrome(s):\n    i = 0\n    j = len(s) - 1\n    while i < j:\n        if s[i] != s[j]:\n            return False\n        i += 1\n        j -= 1\n    return True"),
    (11, "count how many times a value occurs in a list",
     "def count_occurrences(items, value):\n    count = 0\n    for x in items:\n        if x == value:\n            count += 1\n    return count"),
    (12, "swap the first and last elements of a list",
     "def swap_ends(items):\n    first = items[0]\n    items[0] = items[len(items) - 1]\n    items[len(items) - 1] = first\n    return items"),
]

# Reworded versions of demo descriptions for the retrieval regression
# floor; expected is the id of the task each paraphrase targets.
PARAPHRASES = [
    ("return the larger of two given numbers", 1),
    ("reverse the characters of a string", 2),
    ("compute the total sum of a list of numbers", 3),
    ("calculate n factorial", 4),
    ("determine if a given number is even", 5),
    ("how many vowels does a string contain", 6),
    ("locate the minimum element in a list", 7),
    ("display the natural numbers up to n", 8),
    ("find the mean value of a list", 9),
    ("test whether some text reads the same backwards", 10),
]


def write_demo(root: Path) -> None:
    data = root / "data"
    data.mkdir(exist_ok=True)
    with (data / "demo_tasks.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for tid, text, code in DEMO_TASKS:
            fh.write(json.dumps({"id": tid, "text": text, "code": code}))
            fh.write("\n")
    (data / "demo_story.txt").write_text(
        "sum up every number in a list\n", encoding="utf-8", newline="\n"
    )
    fixtures = root / "tests" / "fixtures"
    fixtures.mkdir(parents=True, exist_ok=True)
    with (fixtures / "paraphrases.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for text, expected in PARAPHRASES:
            fh.write(json.dumps({"text": text, "expected_id": expected}))
            fh.write("\n")


def write_smoke_pairs(root: Path) -> None:
    """50 one-line programs with their rule-table conversions as targets."""
    from story2pseudo.rules import convert_program, load_ruleset

    ruleset = load_ruleset()
    rng = random.Random(13)
    names = ["x", "y", "z", "count", "total", "value", "item", "n", "k", "result"]
    sources = []
    for i in range(50):
        kind = i % 5
        a, b = rng.choice(names), rng.randint(0, 99)
        if kind == 0:
            sources.append(f"{a} = {b}")
        elif kind == 1:
            sources.append(f"print({a})")
        elif kind == 2:
            sources.append(f"return {a} + {b}")
        elif kind == 3:
            sources.append(f"{a} += {b}")
        else:
            sources.append(f"{a} = len({rng.choice(names)})")
    targets = [convert_program(src, ruleset).lines[0][1] for src in sources]

    smoke = root / "tests" / "fixtures" / "smoke"
    smoke.mkdir(parents=True, exist_ok=True)
    (smoke / "pairs.src").write_text(
        "\n".join(sources) + "\n", encoding="utf-8", newline="\n"
    )
    (smoke / "pairs.tgt").write_text(
        "\n".join(targets) + "\n", encoding="utf-8", newline="\n"
    )
    (smoke / "model.cfg").write_text(
        "\n".join(
            [
                "# memorization smoke config: 50 pairs, 200 epochs",
                "d_model = 64",
                "heads = 4",
                "encoder_layers = 2",
                "decoder_layers = 2",
                "ffn_dim = 128",
                "max_len = 64",
                "seed = 13",
                "epochs = 200",
                "lr = 3e-4",
            ]
        )
        + "\n",
        encoding="utf-8",
        newline="\n",
    )


if __name__ == "__main__":
    write_demo(ROOT)
    write_smoke_pairs(ROOT)
    print("fixtures written")
