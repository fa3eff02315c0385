"""Quick end-to-end check of the fkdv extension module."""

import json
import math

import fkdv


def main():
    assert fkdv.critical_power(2.0) == 2.0
    alpha_star, p_max = fkdv.critical_power_max()
    print(f"alpha* = {alpha_star:.6f}, p_max = {p_max:.6f}")
    assert abs(alpha_star - 2.7489) < 1e-3

    flat = fkdv.Wave(2.0, 1.0, 0.0)
    assert flat.k_alpha == 1.0
    assert all(abs(v - 1.0) < 1e-15 for v in flat.samples(128))

    w = fkdv.Wave(2.0, 1.0, 0.05, n_modes=24)
    print(w)
    c2 = w.coefficient(2).real
    assert abs(c2 - 0.05**2 / 12) < 0.01 * 0.05**2 / 12
    assert w.residual <= 1e-10
    assert len(w.coefficients()) == 49
    assert math.isclose(w(0.0), w.samples(64)[0], rel_tol=1e-12)

    eigs = w.spectrum(0.0)
    assert sorted(abs(z) for z in eigs)[2] <= 1e-7

    v = w.stability(xi_count=32)
    print(v)
    assert v.classification == fkdv.STABLE and v.converged
    assert fkdv.Wave(2.0, 3.0, 0.05).stability(xi_count=32).classification == fkdv.UNSTABLE

    d2, d1, d0, disc, verdict = fkdv.Wave(2.0, 3.0, 0.05).cubic(0.01)
    assert disc < 0 and verdict == "complex-pair"

    records, passed = fkdv.sweep((3.0, 5.0, 2), (2.0, 2.0, 1), n_modes=16, xi_count=16)
    print([r.verdict for r in records], passed)
    assert [r.verdict for r in records] == ["stable", "unstable"] and passed

    ok, report = fkdv.validate(["symmetry"])
    assert ok and json.loads(report)["suites"][0]["suite"] == "symmetry"

    for bad in (
        lambda: fkdv.Wave(0.4, 1.0, 0.0),
        lambda: fkdv.validate(["nope"]),
        lambda: w.samples(16),
    ):
        try:
            bad()
        except ValueError as e:
            print("rejected:", e)
        else:
            raise AssertionError("expected ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
