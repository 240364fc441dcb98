"""Convert every rules fixture .py and write the .txt next to it.

Review the outputs by hand before committing: the tests compare bytes
against these files.
"""

from pathlib import Path

from story2pseudo.rules import convert_program, emit_txt, load_ruleset

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures" / "rules"

if __name__ == "__main__":
    ruleset = load_ruleset()
    count = 0
    for src in sorted(FIXTURES.glob("*.py")):
        doc = convert_program(src.read_text(encoding="utf-8"), ruleset)
        emit_txt(doc, src.with_suffix(".txt"))
        count += 1
    print(f"froze {count} goldens in {FIXTURES}")
