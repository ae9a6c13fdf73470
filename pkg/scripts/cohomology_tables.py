"""Print cohomology dimension tables for the finite subgroups and the K1 route."""

import json

from k2local import cohomology


def main():
    for name, res in (("Q8", cohomology.q8_cohomology((0, 0), 4)),
                      ("G24", cohomology.g24_cohomology((0, 0), 4)),
                      ("C6", cohomology.c6_cohomology((0, 0), 4)),
                      ("S2^1 via K1", cohomology.s12_via_k1())):
        nonzero = {f"{p},{t}": d for (p, t), d in sorted(res.dims.items()) if d}
        print(f"{name}: {json.dumps(nonzero)}")


if __name__ == "__main__":
    main()
