"""Regenerate the bundled Kronecker polytope files.

Run from the repository root:  python3 tools/gen_kronecker.py

The vertex lists are stored up to factor permutation; this script expands
the representatives, deduplicates, computes the facet inequalities, and
writes the polytopes in the standard exchange format.
"""

import itertools
import pathlib
import sys
from fractions import Fraction

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from momentpoly.polytopes import Polytope  # noqa: E402

OUT = pathlib.Path(__file__).resolve().parent.parent \
    / "src" / "momentpoly" / "data" / "kronecker"

F = Fraction

# Vertex representatives of the generic (Kronecker) polytopes, one tuple of
# per-factor spectra each, sorted non-increasingly within each factor.
REPRESENTATIVES = {
    (2, 2, 2): [
        ((F(1), F(0)), (F(1), F(0)), (F(1), F(0))),
        ((F(1), F(0)), (F(1, 2), F(1, 2)), (F(1, 2), F(1, 2))),
        ((F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)), (F(1, 2), F(1, 2))),
    ],
    (3, 3, 3): [
        ((F(1, 3),) * 3, (F(1, 3),) * 3, (F(1, 3),) * 3),
        ((F(1, 3),) * 3, (F(1, 3),) * 3, (F(1, 2), F(1, 2), F(0))),
        ((F(1, 3),) * 3, (F(1, 3),) * 3, (F(1), F(0), F(0))),
        ((F(1, 3),) * 3, (F(1, 2), F(1, 2), F(0)), (F(1, 2), F(1, 2), F(0))),
        ((F(1, 3),) * 3, (F(2, 3), F(1, 6), F(1, 6)),
         (F(1, 2), F(1, 2), F(0))),
        ((F(1, 3),) * 3, (F(2, 3), F(1, 3), F(0)), (F(2, 3), F(1, 3), F(0))),
        ((F(1, 2), F(1, 4), F(1, 4)), (F(1, 2), F(1, 2), F(0)),
         (F(3, 4), F(1, 4), F(0))),
        ((F(1, 2), F(1, 2), F(0)), (F(1, 2), F(1, 2), F(0)),
         (F(1, 2), F(1, 2), F(0))),
        ((F(1, 2), F(1, 2), F(0)), (F(1, 2), F(1, 2), F(0)),
         (F(1), F(0), F(0))),
        ((F(2, 3), F(1, 6), F(1, 6)), (F(2, 3), F(1, 6), F(1, 6)),
         (F(1, 2), F(1, 2), F(0))),
        ((F(1), F(0), F(0)), (F(1), F(0), F(0)), (F(1), F(0), F(0))),
    ],
}


def expand(reps):
    verts = set()
    for blocks in reps:
        for perm in itertools.permutations(blocks):
            verts.add(tuple(x for block in perm for x in block))
    return sorted(verts, reverse=True)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for shape, reps in REPRESENTATIVES.items():
        verts = expand(reps)
        poly = Polytope.from_vertices(shape, verts)
        poly = Polytope(shape, vertices=verts, inequalities=poly.facets)
        name = "{}x{}x{}.json".format(*shape)
        path = OUT / name
        poly.save(path)
        print(f"{path}  ({len(poly.vertices)} vertices, "
              f"{len(poly.inequalities)} inequalities)")


if __name__ == "__main__":
    main()
