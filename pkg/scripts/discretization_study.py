"""Midpoint-grid residual against atom count, in one and two dimensions.

Shows why the 2-D discretization stage cannot reach 10x the tolerance on its
own (error ~ 1/N instead of 1/N^2) and relies on the weight refit afterwards.

    python3 scripts/discretization_study.py
"""

from mvquad.caratheodory import prune, refit_weights
from mvquad.domain import box, interval
from mvquad.expr import parse
from mvquad.integrate import mean_vector, riemann_atoms

CASES = [
    ("1-D exp(t) on [0,1]", [parse("exp(t)")], interval(0, 1)),
    ("2-D x1*x2, density exp(-x1-x2)", [parse("x1*x2"), parse("sin(x1)+x2^2")],
     box([0, 0], [1, 2], "exp(-x1-x2)")),
]


def main():
    for label, fns, measure in CASES:
        target = mean_vector(fns, measure, 1e-12).values
        print(label)
        for k in range(8, 17, 2):
            comb = riemann_atoms(fns, measure, 2**k, target)
            refit = refit_weights(prune(comb))
            print(f"  atoms={comb.size:6d}  grid residual={comb.residual:.2e}  "
                  f"after prune+refit={refit.residual:.2e}")


if __name__ == "__main__":
    main()
