"""Generates the synthetic hourly weather/energy year used by the pipeline tests.

Wind speed follows a seasonal cycle peaking around the turn of the year, so
December and January carry the highest mean wind energy. Output is
deterministic for a given seed; the committed CSVs were produced with the
defaults below.
"""
import argparse
import datetime as dt
import json
import pathlib

import numpy as np

RATED_MW = 20.0


def power_curve(ws):
    cut_in, rated, cut_out = 3.0, 13.0, 25.0
    frac = np.clip((ws - cut_in) / (rated - cut_in), 0.0, 1.0) ** 3
    return np.where(ws >= cut_out, 0.0, RATED_MW * frac)


def simulate(start, hours, rng):
    t = np.arange(hours)
    stamps = [start + dt.timedelta(hours=int(h)) for h in t]
    doy = np.array([s.timetuple().tm_yday - 1 for s in stamps], dtype=float)
    hod = np.array([s.hour for s in stamps], dtype=float)
    season = np.cos(2 * np.pi * doy / 365.0)  # +1 at new year

    ar = np.zeros(hours)
    eps = rng.normal(0.0, 0.6, hours)
    for i in range(1, hours):
        ar[i] = 0.97 * ar[i - 1] + eps[i]
    wind_speed = np.abs(7.0 + 3.0 * season + ar)

    temperature = 9.0 - 9.0 * season + 3.0 * np.sin(2 * np.pi * (hod - 9) / 24) + rng.normal(0, 1.5, hours)
    base_dir = np.where(rng.random(hours) < 0.6, 270.0, 90.0)
    wind_direction = np.mod(base_dir + rng.normal(0, 40, hours) + 10 * (wind_speed - 7), 360.0)
    cloud_cover = np.clip(0.55 + 0.03 * (wind_speed - 7) + rng.normal(0, 0.2, hours), 0.0, 1.0)
    air_pressure = 1013.0 - 1.2 * (wind_speed - 7) + rng.normal(0, 6, hours)
    precipitation = np.maximum(0.0, rng.normal(-0.4, 0.5, hours) + 0.05 * (wind_speed - 7))
    daylight = np.clip(np.sin(np.pi * (hod - 6) / 12), 0.0, None) * (1 - 0.3 * season)
    sunshine = np.clip(daylight * (1.0 - cloud_cover) + rng.normal(0, 0.05, hours), 0.0, 1.0)
    energy = np.maximum(0.0, power_curve(wind_speed) + rng.normal(0, 0.3, hours))

    cols = dict(
        temperature=temperature, cloud_cover=cloud_cover, air_pressure=air_pressure,
        wind_speed=wind_speed, wind_direction=wind_direction, precipitation=precipitation,
        sunshine=sunshine,
    )
    cols = {k: np.round(v, 3) for k, v in cols.items()}
    cols["wind_direction"] = np.mod(cols["wind_direction"], 360.0)
    return stamps, cols, np.round(energy, 3)


WEATHER_COLUMNS = dict(
    temperature="TT_TU", cloud_cover="V_N", air_pressure="P", wind_speed="F",
    wind_direction="D", precipitation="R1", sunshine="SD_SO",
)


def fmt(v):
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def write_weather(path, stamps, cols, missing_mask=None):
    names = list(WEATHER_COLUMNS)
    with open(path, "w") as out:
        out.write("time," + ",".join(WEATHER_COLUMNS[n] for n in names) + "\n")
        for i, s in enumerate(stamps):
            cells = []
            for j, n in enumerate(names):
                cells.append("-999" if missing_mask is not None and missing_mask[i, j] else fmt(cols[n][i]))
            out.write(s.strftime("%Y-%m-%dT%H:%M:%SZ") + "," + ",".join(cells) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=2015)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path(__file__).resolve().parent)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    start = dt.datetime(2015, 1, 1, tzinfo=dt.timezone.utc)
    stamps, cols, energy = simulate(start, 8760, rng)
    mask = rng.random((len(stamps), len(WEATHER_COLUMNS))) < 0.002
    write_weather(args.out / "weather.csv", stamps, cols, mask)
    with open(args.out / "energy.csv", "w") as out:
        out.write("unix_time,power_mw\n")
        for s, e in zip(stamps, energy):
            out.write(f"{int(s.timestamp())},{fmt(e)}\n")

    f_stamps, f_cols, _ = simulate(dt.datetime(2016, 1, 1, tzinfo=dt.timezone.utc), 7 * 24, rng)
    write_weather(args.out / "forecast.csv", f_stamps, f_cols)

    jobs = []
    for i in range(12):
        release = int(rng.integers(0, 120))
        duration = int(rng.integers(1, 9))
        deadline = min(168, release + duration + int(rng.integers(4, 48)))
        jobs.append(dict(id=f"job{i:02d}", power=float(rng.choice([0.5, 1.0, 2.0, 4.0])),
                         duration=duration, release=release, deadline=deadline))
    (args.out / "jobs.json").write_text(json.dumps({"jobs": jobs}, indent=2) + "\n")


if __name__ == "__main__":
    main()
