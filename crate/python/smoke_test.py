"""Smoke test for the nemdv extension module.

Writes a two-day fixture, solves it, checks the bill pieces add up, exports
prices and audits the written dispatch.
"""

import math
import sys
import tempfile
from pathlib import Path

import nemdv


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        path = nemdv.write_fixtures("mep", tmp / "mep", start="2023-07-03T00:00", hours=48, policy="nem2")
        sc = nemdv.Scenario.load(path)
        assert sc.horizon == 48, sc.horizon
        assert sc.policy == "nem2", sc.policy

        nem1 = sc.export_prices("nem1")
        nem2 = sc.export_prices()
        assert all(b == a - 0.02977 for a, b in zip(nem1, nem2))
        assert all(p == 0.0 for p in sc.export_prices("no_nem"))

        res = sc.solve()
        assert res.status == "optimal", res
        assert res.audit_passed
        parts = res.demand_charge + res.energy_charge - res.export_revenue
        assert math.isclose(parts, res.net_bill, rel_tol=1e-12), (parts, res.net_bill)
        assert math.isclose(res.objective, res.net_bill, rel_tol=1e-9)
        d = res.dispatch()
        assert len(d["d_net"]) == 48

        out = tmp / "dispatch.csv"
        res.write_dispatch(out)
        bill, violations = sc.audit(out)
        assert not violations, violations
        assert math.isclose(bill, res.net_bill, rel_tol=1e-9)

        print(f"{res!r}; audit passed; fmt_sig(1/3) = {nemdv.fmt_sig(1 / 3)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
