import pytest

HEADER = ("source,snr_db,trials,block_errors,false_alarms,"
          "missed_detections,bler,ci_lo,ci_hi,wall_time_s")

# raw field text is deliberately awkward (long reprs, exponent notation,
# trailing zeros) so any reformatting on the way to the image shows up
SIM_ROWS = [
    "sim,-2.0,100000,9520,3,9517,0.0952,0.09339214,0.09703008,12.25",
    "sim,-1.5,100000,1230,1,1229,0.0123,0.011625,0.0130118,11.980000000000001",
    "sim,-1.0,100000,96,0,96,0.00096,0.0007861,0.0011725,12.5",
    "sim,-0.5,100000,7,0,7,7e-05,3.39e-05,0.0001442,12.1",
]

BOUND_ROWS = [
    "bound_upper,-2.0,0,0,0,0,0.31941030000000004,0.3194103,0.3194103,0.0",
    "bound_upper,-1.5,0,0,0,0,0.0721566,0.0721566,0.0721566,0.0",
    "bound_upper,-1.0,0,0,0,0,0.0117295,0.0117295,0.0117295,0.0",
    "bound_upper,-0.5,0,0,0,0,0.0014803,0.0014803,0.0014803,0.0",
]


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def sim_csv(tmp_path):
    return write_lines(tmp_path / "sim.csv", [HEADER] + SIM_ROWS)


@pytest.fixture
def bound_csv(tmp_path):
    return write_lines(tmp_path / "bound.csv", [HEADER] + BOUND_ROWS)
