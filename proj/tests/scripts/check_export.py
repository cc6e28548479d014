"""Solves exported LP and MPS models with HiGHS and compares against `corn cluster`."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import highspy

SPEC = {
    "rooms": 8,
    "hallway_nodes": 4,
    "corridor_length_m": 12,
    "zones": 2,
    "hcp_groups": [{"label": "nurse", "count": 4}],
    "non_substitutable": 1,
    "days": 2,
}


def highs_objective(path):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.readModel(str(path))
    h.run()
    status = h.modelStatusToString(h.getModelStatus())
    return status, h.getInfo().objective_function_value


def main(corn):
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        (tmp / "spec.json").write_text(json.dumps(SPEC))
        for k, d_star, y_star in [(2, "inf", "inf"), (2, "8", "inf"), (4, "5", "inf"), (2, "1", "inf"), (2, "inf", "0.5"),
                                  (4, "inf", "0.2"), (2, "inf", "0")]:
            common = ["--facility", str(tmp / "spec.json"), "--k", str(k), "--d-star-m", d_star, "--y-star-h", y_star, "--rho", "0.01"]
            out = tmp / f"k{k}_d{d_star}_y{y_star}"
            code = subprocess.run([corn, "cluster", *common, "--out", str(out / "cl")], capture_output=True).returncode
            ours = json.loads((out / "cl" / "solve.json").read_text())
            for fmt in ("lp", "mps"):
                subprocess.run([corn, "export", *common, "--format", fmt, "--out", str(out / fmt)], check=True,
                               capture_output=True)
                status, obj = highs_objective(out / fmt / f"model.{fmt}")
                if ours["status"] == "Infeasible":
                    ok = code == 3 and status == "Infeasible"
                else:
                    ok = status == "Optimal" and abs(obj - ours["objective"]) <= 1e-6
                print(f"K={k} D*={d_star} Y*={y_star} {fmt}: corn {ours['status']} {ours.get('objective')}, HiGHS {status} {obj}"
                      f" {'ok' if ok else 'MISMATCH'}")
                failures += not ok
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
