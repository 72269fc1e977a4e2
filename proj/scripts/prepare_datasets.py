#!/usr/bin/env python3
"""Convert the raw study CSVs into balanced panels in the toolkit's schema.

The loader requires a value for every (unit, time, column) cell.  The raw
files have sparse covariates (e.g. schooling is reported every five years),
so missing covariate cells are imputed with the unit's observed pre-reference
mean for that column.  Pre-window averages of fully observed columns are
unchanged by construction.

Output schema: unit,time,outcome,<covariate...> with one row per (unit, time).
"""

import pathlib

import pandas as pd

RAW = pathlib.Path(__file__).resolve().parent.parent / "data" / "raw"
OUT = RAW.parent


def impute_pre_mean(df: pd.DataFrame, ref_year: int) -> pd.DataFrame:
    """Fill missing cells with the unit's mean over observed pre-ref years."""
    filled = []
    for unit, grp in df.groupby("unit", sort=False):
        grp = grp.sort_values("time").copy()
        pre = grp[grp["time"] < ref_year]
        for col in grp.columns:
            if col in ("unit", "time"):
                continue
            fill = pre[col].mean()
            if pd.isna(fill):
                fill = grp[col].mean()
            grp[col] = grp[col].fillna(fill)
        filled.append(grp)
    out = pd.concat(filled, ignore_index=True)
    if out.isna().any().any():
        bad = out.columns[out.isna().any()].tolist()
        raise SystemExit(f"unfillable columns: {bad}")
    return out


def prepare_smoking() -> None:
    df = pd.read_csv(RAW / "smoking_data.csv")
    df["year"] = df["year"].astype(int)
    df = df.rename(columns={"state": "unit", "year": "time"})
    cols = ["unit", "time", "cigsale", "lnincome", "beer", "age15to24", "retprice"]
    df = impute_pre_mean(df[cols], ref_year=1988)
    df.to_csv(OUT / "smoking.csv", index=False)


def prepare_basque() -> None:
    df = pd.read_csv(RAW / "basque_data.csv")
    df = df.rename(columns={"regionname": "unit", "year": "time"})
    # Spain aggregates every region including the treated one; popdens has a
    # single observation before 1970 and is dropped rather than imputed from
    # almost nothing.
    df = df[df["unit"] != "Spain (Espana)"]
    df = df.drop(columns=["Unnamed: 0", "regionno", "popdens"])
    cols = ["unit", "time", "gdpcap"] + [
        c for c in df.columns if c not in ("unit", "time", "gdpcap")
    ]
    df = impute_pre_mean(df[cols], ref_year=1970)
    df.to_csv(OUT / "basque.csv", index=False)


def prepare_german() -> None:
    df = pd.read_csv(RAW / "german_reunification.csv")
    df = df.rename(columns={"country": "unit", "year": "time"})
    df = df.drop(columns=["code"])
    cols = ["unit", "time", "gdp"] + [
        c for c in df.columns if c not in ("unit", "time", "gdp")
    ]
    df = impute_pre_mean(df[cols], ref_year=1990)
    df.to_csv(OUT / "germany.csv", index=False)


if __name__ == "__main__":
    prepare_smoking()
    prepare_basque()
    prepare_german()
    for name in ("smoking.csv", "basque.csv", "germany.csv"):
        df = pd.read_csv(OUT / name)
        print(name, df["unit"].nunique(), "units,", df["time"].nunique(), "periods,",
              df.shape[1] - 2, "variables")
