#!/usr/bin/env python3
"""Write CSV exports of the public case-study datasets into data/.

Requires the `rdatasets` package (pip install rdatasets), which bundles
copies of the R package datasets locally. AutoClaim (R package cplm) is not
bundled there; export it from R with

    data(AutoClaim, package = "cplm")
    write.csv(AutoClaim, "data/autoclaim.csv", row.names = FALSE)
"""
import argparse
import pathlib

import rdatasets


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=pathlib.Path(__file__).resolve().parent.parent / "data")
    args = parser.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for package, name, file in [("AER", "DoctorVisits", "doctorvisits.csv"),
                                ("AER", "NMES1988", "nmes1988.csv")]:
        frame = rdatasets.data(package, name)
        frame = frame.drop(columns=[c for c in ("rownames",) if c in frame.columns])
        frame.to_csv(out / file, index=False)
        print(f"wrote {out / file} ({len(frame)} rows)")


if __name__ == "__main__":
    main()
