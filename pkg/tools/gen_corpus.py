"""Regenerate the bundled tensor corpus JSON files.

Run from the repository root:  python3 tools/gen_corpus.py
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from momentpoly.tensors import Tensor  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parent.parent \
    / "src" / "momentpoly" / "data" / "corpus"


def ones(*triples):
    return {t: 1 for t in triples}


# The 25 representatives of the GL-orbits of SL-unstable 3x3x3 tensors,
# at their native shapes.  The zero tensor (number 25) is stored at shape
# (1,1,1) since shapes require positive dimensions.
UNSTABLE = {
    "T1": ((3, 3, 3), ones((1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 2, 2),
                           (2, 3, 1), (3, 1, 1))),
    "T2": ((3, 3, 3), ones((1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 2, 1),
                           (2, 2, 2), (3, 1, 1))),
    "T3": ((3, 3, 3), ones((1, 1, 3), (1, 2, 2), (1, 3, 1), (2, 1, 2),
                           (2, 2, 3), (3, 1, 1))),
    "T4": ((3, 3, 3), ones((1, 1, 3), (1, 2, 2), (2, 1, 2), (2, 2, 1),
                           (3, 3, 1))),
    "T5": ((3, 3, 3), ones((1, 1, 3), (1, 3, 1), (1, 3, 2), (2, 2, 1),
                           (3, 1, 2))),
    "T6": ((3, 3, 3), ones((1, 1, 3), (1, 2, 2), (2, 1, 2), (2, 3, 1),
                           (3, 2, 1))),
    "T7": ((3, 3, 3), ones((1, 1, 3), (1, 2, 2), (1, 3, 1), (2, 1, 2),
                           (3, 2, 1))),
    "T8": ((3, 3, 3), ones((1, 1, 3), (1, 3, 1), (2, 2, 2), (3, 1, 1))),
    "T9": ((2, 3, 3), ones((1, 1, 1), (1, 2, 2), (2, 2, 2), (2, 3, 3))),
    "T10": ((3, 3, 3), ones((1, 1, 3), (1, 2, 2), (1, 3, 1), (2, 1, 2),
                            (2, 2, 1), (3, 1, 1))),
    "T11": ((3, 3, 3), ones((1, 1, 3), (1, 3, 1), (2, 1, 2), (3, 2, 1))),
    "T12": ((2, 3, 3), ones((1, 1, 3), (1, 3, 1), (2, 1, 1), (2, 2, 2))),
    "T13": ((2, 3, 3), ones((1, 1, 3), (1, 2, 2), (1, 3, 1), (2, 1, 2),
                            (2, 2, 1))),
    "T14": ((3, 3, 3), ones((1, 1, 3), (1, 2, 1), (1, 3, 2), (2, 1, 1),
                            (3, 1, 2))),
    "T15": ((2, 3, 3), ones((1, 2, 2), (1, 3, 3), (2, 1, 1))),
    "T16": ((2, 3, 3), ones((1, 1, 3), (1, 2, 2), (1, 3, 1), (2, 1, 1))),
    "T17": ((2, 3, 3), ones((1, 1, 2), (1, 2, 1), (2, 1, 3), (2, 3, 1))),
    "T18": ((2, 2, 3), ones((1, 1, 1), (1, 2, 2), (2, 1, 2), (2, 2, 3))),
    "T19": ((2, 2, 3), ones((1, 1, 3), (1, 2, 1), (2, 1, 2))),
    "T20": ((2, 2, 2), ones((1, 1, 1), (2, 2, 2))),
    "T21": ((2, 2, 2), ones((1, 1, 2), (1, 2, 1), (2, 1, 1))),
    "T22": ((1, 3, 3), ones((1, 1, 1), (1, 2, 2), (1, 3, 3))),
    "T23": ((1, 2, 2), ones((1, 1, 1), (1, 2, 2))),
    "T24": ((1, 1, 1), ones((1, 1, 1))),
    "T25": ((1, 1, 1), {}),
}

V2 = ones((1, 2, 3), (2, 3, 1), (3, 1, 2))
V3 = ones((1, 3, 2), (2, 1, 3), (3, 2, 1))
D = {**V2, **{t: -1 for t in V3}}
W = ones((1, 1, 2), (1, 2, 1), (2, 1, 1))

OTHERS = {
    "unit1": ((1, 1, 1), ones((1, 1, 1))),
    "unit2": ((2, 2, 2), ones((1, 1, 1), (2, 2, 2))),
    "unit3": ((3, 3, 3), ones((1, 1, 1), (2, 2, 2), (3, 3, 3))),
    "unit4": ((4, 4, 4), ones((1, 1, 1), (2, 2, 2), (3, 3, 3), (4, 4, 4))),
    # 2x2 matrix multiplication, as displayed slice by slice
    "M2": ((4, 4, 4), ones((1, 3, 3), (1, 4, 4), (2, 3, 1), (2, 4, 2),
                           (3, 1, 3), (3, 2, 4), (4, 1, 1), (4, 2, 2))),
    "v1": ((3, 3, 3), ones((1, 1, 1), (2, 2, 2), (3, 3, 3))),
    "v2": ((3, 3, 3), V2),
    "v3": ((3, 3, 3), V3),
    "D": ((3, 3, 3), D),
    "W": ((3, 3, 3), W),
    "D_plus_e111": ((3, 3, 3), {**D, (1, 1, 1): 1}),
    "D_plus_W": ((3, 3, 3), {**D, **W}),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, (shape, entries) in {**UNSTABLE, **OTHERS}.items():
        t = Tensor.from_entries(shape, entries)
        (OUT / f"{name}.json").write_text(t.dumps() + "\n")
    print(f"wrote {len(UNSTABLE) + len(OTHERS)} tensors to {OUT}")


if __name__ == "__main__":
    main()
