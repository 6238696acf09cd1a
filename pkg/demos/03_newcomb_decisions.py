"""Deciding Newcomb's paradox by computing both branches exactly.

Each choice is a standalone program sharing the same prefix; comparing
posteriors (or expected values, once the predictor is imperfect) makes
the decision mechanical.
"""

from pathlib import Path

from arrowlang import expected_value, ket, load_file, trace

PUZZLES = Path(__file__).resolve().parent.parent / "puzzles"


def posterior_of(name: str):
    prog = load_file(PUZZLES / f"{name}.arrow")
    _, result = trace(prog.typed, prog.interp, prog.texts)
    return result.posterior


# Perfect predictor: one-boxing nets $10, two-boxing only $1.
for name in ("newcomb_a", "newcomb_b"):
    post = posterior_of(name)
    print(f"{name}: posterior {ket(post)}  expected value {expected_value(post)}")

print()

# An 80%-accurate predictor softens the gap but does not close it:
# $3 for two boxes against $8 for one.
for name in ("imperfect_newcomb_a", "imperfect_newcomb_b"):
    post = posterior_of(name)
    print(f"{name}: posterior {ket(post)}  expected value {expected_value(post)}")
