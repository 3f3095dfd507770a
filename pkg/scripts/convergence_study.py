"""Error against resolution for the split Jacobi / tanh-sinh quadrature and the RL stencil.

Part 1 evaluates the left integral of the oracle input family at fixed
refinement levels and prints the error against the closed form.  Cases range
from smooth (beta >= 1) to a strong endpoint singularity at the anchor
(beta = 0.3) and include a small rho, where the exponential factor is steep.

Part 2 varies the base finite-difference step of the RL derivative to show the
truncation / rounding trade-off around the default step.
"""

import argparse

import numpy as np

from propfrac import kernels as K
from propfrac import oracles as O
from propfrac.fracderiv import numeric_jet, order_n
from propfrac.fracint import QuadConfig, integral_at_level
from propfrac.propderiv import apply_proportional

CASES = [
    # alpha, beta, rho, kernel, anchor, t
    (0.5, 1.0, 1.0, "identity", 0.0, 1.0),
    (0.3, 2.7, 0.4, "log", 1.0, 2.5),
    (1.5, 0.3, 0.8, "power:2", 0.5, 1.7),
    (0.9, 0.5, 0.1, "identity", 0.0, 2.0),
]


def quadrature_levels(cfg):
    print("left integral: relative error by refinement level")
    print(f"{'case':<44s}" + "".join(f"{'L' + str(k):>11s}" for k in range(cfg.levels)))
    for alpha, beta, rho, name, a, t in CASES:
        g = K.parse_kernel(name)
        f = O.left_input_expr(beta, rho, g, a)
        exact = O.cf_left_integral(alpha, beta, rho, g, a, t)
        errs = []
        for level in range(cfg.levels):
            v = integral_at_level(f, g, alpha, rho, a, np.array([t]), level, cfg)[0]
            errs.append(abs(v - exact) / abs(exact))
        label = f"a={alpha} b={beta} rho={rho} g={name}"
        print(f"{label:<44s}" + "".join(f"{e:11.2e}" for e in errs))


def rl_steps(cfg):
    alpha, beta, rho, name, a, t = 0.5, 2.0, 0.5, "log", 1.0, 2.0
    g = K.parse_kernel(name)
    f = O.left_input_expr(beta, rho, g, a)
    exact = O.cf_left_rl_deriv(alpha, beta, rho, g, a, t)
    n = order_n(alpha)
    level = cfg.levels - 1

    def F(s):
        return integral_at_level(f, g, n - alpha, rho, a, s, level, cfg)

    print(f"\nleft RL derivative (alpha={alpha}, beta={beta}, rho={rho}, g={name}, t={t}): error by base step")
    print(f"{'h':>10s}{'plain':>12s}{'richardson':>12s}")
    for h in 10.0 ** np.arange(-2, -8.5, -0.5):
        rich, plain = numeric_jet(F, t, n, h, lo=a, toward=1)
        G = g.jet(t, n)
        e_r = abs(apply_proportional(rich, G, rho, n) - exact) / abs(exact)
        e_p = abs(apply_proportional(plain, G, rho, n) - exact) / abs(exact)
        print(f"{h:10.1e}{e_p:12.2e}{e_r:12.2e}")


def main():
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--base-nodes", type=int, default=QuadConfig.base_nodes)
    p.add_argument("--max-nodes", type=int, default=QuadConfig.max_nodes)
    args = p.parse_args()
    cfg = QuadConfig(args.base_nodes, args.max_nodes)
    quadrature_levels(cfg)
    rl_steps(cfg)


if __name__ == "__main__":
    main()
