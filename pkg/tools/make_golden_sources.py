"""Write the rule-converter fixture programs (sources only).

Goldens (.txt) are produced by tools/freeze_goldens.py and committed
after hand-verification.
"""

from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "tests" / "fixtures" / "rules"

SNIPPETS = {
    "001_assign_simple": "x = 5\n",
    "002_assign_string": 'name = "ada"\n',
    "003_assign_tuple": "a, b = 1, 2\n",
    "004_assign_expression": "y = x * 2 + 1\n",
    "005_aug_increase": "count += 1\n",
    "006_aug_decrease": "budget -= cost\n",
    "007_aug_multiply": "result *= factor\n",
    "008_aug_divide": "total /= n\n",
    "009_return_bare": "def stop():\n    return\n",
    "010_return_tight_expr": "def double(n):\n    return n*2\n",
    "011_print_empty": "print()\n",
    "012_print_single": "print(x)\n",
    "013_print_multi": "print(x, y, z)\n",
    "014_print_string": 'print("hello world")\n',
    "015_call_args": "foo(1, 2)\n",
    "016_call_noargs": "setup()\n",
    "017_call_dotted": "logger.info(message)\n",
    "018_import_single": "import sys\n",
    "019_import_from": "from math import sqrt\n",
    "020_def_noparams": "def reset():\n    x = 0\n",
    "021_def_params": "def add(a, b):\n    return a + b\n",
    "022_function_if_else": (
        "def classify(value, limit):\n"
        "    label = \"\"\n"
        "    if value > limit:\n"
        "        label = \"high\"\n"
        "        print(label)\n"
        "    else:\n"
        "        label = \"low\"\n"
        "        print(label)\n"
        "    count = len(label)\n"
        "    if count == 0:\n"
        "        return label\n"
        "    return count\n"
    ),
    "023_if_simple": "if x > 0:\n    print(x)\n",
    "024_if_else": "if flag:\n    y = 1\nelse:\n    y = 2\n",
    "025_if_elif_else": (
        "if x == 1:\n"
        '    print("one")\n'
        "elif x == 2:\n"
        '    print("two")\n'
        "else:\n"
        '    print("many")\n'
    ),
    "026_nested_if": (
        "if a > 0:\n"
        "    if b > 0:\n"
        "        print(a, b)\n"
    ),
    "027_while_simple": "while n > 0:\n    n -= 1\n",
    "028_while_condition": (
        "while count <= limit:\n"
        "    count += step\n"
        "    print(count)\n"
    ),
    "029_for_range_literal": "for i in range(10):\n    print(i)\n",
    "030_for_range_symbolic": "for i in range(n):\n    total += i\n",
    "031_for_range_two_args": "for i in range(2, 8):\n    print(i)\n",
    "032_for_range_two_symbolic": "for k in range(start, stop):\n    print(k)\n",
    "033_for_each": "for item in items:\n    print(item)\n",
    "034_for_each_call": "for key in d.keys():\n    print(key)\n",
    "035_len_assign": "n = len(items)\n",
    "036_len_condition": "if len(word) > 3:\n    print(word)\n",
    "037_index_read": "first = items[0]\n",
    "038_index_write": "items[0] = last\n",
    "039_slice": "middle = data[1:4]\n",
    "040_nested_subscript": "cell = grid[row][col]\n",
    "041_comparisons": (
        "if a >= b:\n"
        "    print(a)\n"
        "if a != b:\n"
        "    print(b)\n"
        "if a < b:\n"
        "    print(a, b)\n"
    ),
    "042_fallback_lines": (
        "pass\n"
        "yield x\n"
        "del cache\n"
    ),
    "043_comments_blanks": (
        "# setup\n"
        "x = 1\n"
        "\n"
        "# loop over values\n"
        "for v in values:\n"
        "    # accumulate\n"
        "    x += v\n"
        "\n"
        "print(x)\n"
    ),
    "044_deep_nesting": (
        "def scan(rows, needle):\n"
        "    hits = 0\n"
        "    for row in rows:\n"
        "        i = 0\n"
        "        while i < len(row):\n"
        "            if row[i] == needle:\n"
        "                hits += 1\n"
        "            i += 1\n"
        "    return hits\n"
    ),
    "045_range_len": "for i in range(len(xs)):\n    print(xs[i])\n",
    "046_elif_chain": (
        "if x == 0:\n"
        "    y = 0\n"
        "elif x == 1:\n"
        "    y = 10\n"
        "elif x == 2:\n"
        "    y = 20\n"
    ),
}


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    for name, source in sorted(SNIPPETS.items()):
        (OUT / f"{name}.py").write_text(source, encoding="utf-8", newline="\n")
    print(f"wrote {len(SNIPPETS)} fixture programs to {OUT}")
