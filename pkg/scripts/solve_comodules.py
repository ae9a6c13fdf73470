"""Solve for the comodule structures and print them with the solver trace."""

from k2local import comodule


def main():
    family, trace, _ = comodule.solve_comodule_family(with_trace=True)
    print(comodule.family_to_text(family))
    print(f"\nfree slots after counit and coassociativity: {trace.free}")
    for g, rels in trace.coassoc_relations.items():
        if rels:
            print(f"  {g}: {'; '.join(rels)}")


if __name__ == "__main__":
    main()
