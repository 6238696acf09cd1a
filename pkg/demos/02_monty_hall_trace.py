"""Tracing the Monty Hall and Monty Fall programs line by line.

Each statement updates a joint state over all variables introduced so
far: sampling tensors new columns on, observing crosses out monomials,
and the final return projects.  The two puzzles differ by a single
line, and the traces show exactly where their answers diverge.
"""

from pathlib import Path

from arrowlang import ket, load_file, trace

PUZZLES = Path(__file__).resolve().parent.parent / "puzzles"


def show(name: str) -> None:
    prog = load_file(PUZZLES / f"{name}.arrow")
    lines, result = trace(prog.typed, prog.interp, prog.texts)
    print(f"== {name}")
    for line in lines:
        print(f"({line.line}) {line.text} | {ket(line.state)}")
    print("Validity:", result.validity)
    print("Posterior:", ket(result.posterior))
    print()


# The host deliberately opens a goat door: switching wins 2/3 of the time.
show("monty_hall")

# The host slips and the opened door just happens to hide no car:
# now both remaining doors are equally likely and switching gains nothing.
show("monty_fall")
