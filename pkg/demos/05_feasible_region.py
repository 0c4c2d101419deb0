"""How generous are the sufficient conditions?

Searches the admissible angles and margins for the largest coupling margin,
the largest allowed inertia and the widest frequency spread, for several
majority sizes.
"""

from inertial_kuramoto import feasible_search

for N, M in ((5, 5), (5, 4), (5, 3), (10, 6), (4, 2)):
    cells = []
    for objective in ("mu_max", "mk_bound", "domega"):
        res = feasible_search(N, M, objective, resolution=4)
        cells.append(f"{objective}={res.value:.4g}" if res.feasible else f"{objective}=infeasible")
    print(f"N={N:2d} M={M:2d}  " + "  ".join(cells))
