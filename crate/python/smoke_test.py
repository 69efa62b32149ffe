"""Smoke test for the euler_workbench_py extension module."""

import euler_workbench_py as ew


def main():
    q5 = ew.field(5, [4])
    assert q5["is_real"] and q5["degree"] == 2 and q5["rank"] == 1, q5

    fields = ew.fields(12)
    assert any(f["conductor"] == 12 for f in fields)

    r = ew.check_rubin_stark(5, [4], bits=96)
    assert r["passed"], r

    reports = ew.check_distributions(15)
    assert reports and all(x["passed"] for x in reports)

    w = ew.weierstrass_prep(5, 10, 8, [5, 6, 1])
    assert w["mu"] == 0 and w["lambda"] == 1, w

    assert ew.quotient_order([9], [3, 0, 1], 3) == 4
    assert ew.quotient_order([3], [3, 3], 3) is None

    try:
        ew.quotient_order([9], [1, 0, 1], 3)
    except ValueError:
        pass
    else:
        raise AssertionError("expected a precondition error")

    print(f"euler_workbench_py {ew.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
