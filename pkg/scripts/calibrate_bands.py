"""Measure corpus constants on the calibration seeds and compare with the frozen bands.

Prints one line per quantity: calibrated maximum, suggested band (HEADROOM x max) and
the frozen value. Run after changing any algorithm that feeds a band.
"""
import json

from tentlab import bands as B
from tentlab import survey


def main():
    seeds = B.CALIBRATION_SEEDS
    rows = {}

    def track(key, value, frozen):
        old = rows.get(key, (float("-inf"), frozen))[0]
        rows[key] = (max(old, value), frozen)

    for s in seeds:
        r = survey.tent_atoms(s)
        for name, v in r["lambda_ratio"].items():
            track(f"lambda_ratio/{name}", v, B.LAMBDA_RATIO_REF[name])
        track("aperture_max", survey.apertures(s)["ratio_max"], B.APERTURE_BAND[1])
        track("molecule_ratio", survey.molecules(s, B.MOLECULE_MULTIPLE)["max_ratio"], 1 + B.MOLECULE_SLACK)
        track("molecule_bound", survey.molecule_bound(s)["max"], B.MOLECULE_BOUND_MAX)
        for key, row in survey.classical(s).items():
            track(f"classical/{key}", row["max_ratio"], B.CLASSICAL_RATIO_MAX[key])
        track("embedding", survey.embedding(s)["max_ratio"], B.EMBEDDING_RATIO_MAX)
        bm = survey.bmo_family(s)
        track("jn_max", bm["jn_max"], B.JN_RATIO_MAX)
        track("resolvent_over_semigroup", bm["res_over_sg"][1], B.RESOLVENT_OVER_SEMIGROUP[1])
        track("carleson_over_bmo2", bm["carleson_over_bmo2"][1], B.CARLESON_OVER_BMO2[1])
        track("duality_C", survey.duality(s)["C"], B.DUALITY_C_MAX)
        sq = survey.square_bands(s)
        track("riesz_hardy", sq["riesz"], B.RIESZ_HARDY_MAX)
        track("gfun_hardy", sq["gfun"], B.GFUN_HARDY_MAX)
        track("nhalf_over_r", sq["nhalf_over_r"], B.NHALF_OVER_R_MAX)
    print(f"calibration seeds {list(seeds)}")
    for key, (mx, frozen) in sorted(rows.items()):
        print(f"{key:28s} max={mx:10.4g}  suggested={B.HEADROOM * mx:10.4g}  frozen={frozen:10.4g}")
    print(json.dumps(survey.gaffney(B.GAFFNEY_N), indent=1))


if __name__ == "__main__":
    main()
