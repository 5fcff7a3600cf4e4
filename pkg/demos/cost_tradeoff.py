"""Cost versus expansion for a four-level channel with unequal write costs.

Walks from the type-I solve (fixed expansion) to the optimal type-II code,
then builds the equivalent Varn tree and shows how close a 256-word code
gets to the asymptotic numbers.
"""

import numpy as np

from shapecodes import (SourceSpec, equivalent_cost_vector, min_avg_cost, optimal_expansion,
                        total_cost_curve, tree_to_codebook, varn_build)
from shapecodes.model import codebook_stats

COSTS = [0, 0.58, 0.87, 1.29]
H = 2.0   # a uniform quaternary source carries 2 bits per symbol


def main():
    print("f      mu      avg_cost  total_cost")
    for p in total_cost_curve(COSTS, H, np.linspace(1.0, 4.0, 7)):
        print(f"{p.f:<6.2f} {p.mu:<7.4f} {p.avg_cost:<9.4f} {p.total_cost:.4f}")

    sol = min_avg_cost(COSTS, H, 2.740)
    c_eq = equivalent_cost_vector(sol.p_hat)
    print("\nat f = 2.740 the cheapest output pmf is", np.round(sol.p_hat.probs, 4))
    print("equivalent costs -log2 P:", np.round(c_eq.costs, 4))

    f_opt, t_min, _ = optimal_expansion(c_eq, H)
    print(f"optimal expansion for those costs {f_opt:.4f}, total cost {t_min:.4f}")

    tree = varn_build(256, c_eq)
    _, f, counts = codebook_stats(tree_to_codebook(tree, 4, 4), SourceSpec.uniform(4, 4))
    p_code = counts / counts.sum()
    print(f"256-word Varn code: expansion {f:.4f}, "
          f"average channel cost {p_code @ np.asarray(COSTS):.4f} "
          f"(asymptotic {sol.avg_cost:.4f})")


if __name__ == "__main__":
    main()
