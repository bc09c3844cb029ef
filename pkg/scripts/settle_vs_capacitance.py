"""Settle time against stray capacitance, for impulse and step inputs."""

import numpy as np
from _common import write_csv

from resistive_sift.network import Smoother1DSpec, conductances_from_lambda
from resistive_sift.transient import REFERENCE_SETTLE_TIMES, loglog_fit, settle_time_vs_capacitance


def main():
    cs = conductances_from_lambda(36.0, 250.0)
    spec = Smoother1DSpec(45, 36.0)
    caps = [1e-15, 1e-14] + sorted(REFERENCE_SETTLE_TIMES)
    impulse = np.zeros(45)
    impulse[22] = 1.0
    out = []
    for name, v in (("impulse", impulse), ("step", np.ones(45))):
        rows = settle_time_vs_capacitance(spec, v, cs, caps)
        slope, r2 = loglog_fit(rows)
        print(f"{name}: slope {slope:.6f}, R^2 {r2:.8f}")
        for c, t in rows:
            known = REFERENCE_SETTLE_TIMES.get(c)
            out.append((name, c, t, known if known else ""))
            ref = f"{known * 1e9:8.3f} ns" if known else "       -"
            print(f"  C = {c * 1e12:8.4g} pF   settle {t * 1e9:10.4f} ns   reference {ref}")
    write_csv("settle_vs_capacitance.csv", ["input", "capacitance_F", "settle_time_s", "reference_settle_time_s"], out)


if __name__ == "__main__":
    main()
