"""Regenerates the bundled synthetic calibration fixture in data/.

Run with the built extension on PYTHONPATH, e.g.
    PYTHONPATH=build/python python3 tools/make_synthetic_measurements.py
"""

import pathlib

import flagsim

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"
TAIL_LENGTHS = (0.07, 0.09, 0.11)
OMEGA = 15.0


def base_config():
    config = flagsim.preset("fitted_sec2")
    config.nodes_per_tail = 6
    return config


def main():
    base = base_config()
    (DATA / "calibration_base.cfg").write_text(base.serialize())
    options = flagsim.CalibrationOptions()
    options.step_time_scales = 0.02
    (DATA / "measurements").mkdir(exist_ok=True)
    for name, tails in (("fit_N3_N4.csv", (3, 4)), ("validation_N2_N5.csv", (2, 5))):
        sites = [flagsim.Measurement(n, l, OMEGA) for n in tails for l in TAIL_LENGTHS]
        measured = flagsim.synthesize_measurements(base, sites, options)
        (DATA / "measurements" / name).write_text(flagsim.measurements_to_csv(measured))
        print(f"wrote {name}: {len(measured)} rows")


if __name__ == "__main__":
    main()
