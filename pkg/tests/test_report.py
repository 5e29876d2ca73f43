"""Report serialization: lossless round trips and strict parsing."""
import numpy as np
import pytest

from hullexplain.errors import DataFormatError, InvalidInputError
from hullexplain.report import (
    REPORT_HEADER,
    PointResult,
    RunReport,
    format_report,
    new_report,
    parse_report,
    read_report,
    write_report,
)


def sample_report() -> RunReport:
    rep = new_report("explain", 42, {"K": 10, "blackbox": "knn", "zscore": False},
                     stamped=False)
    rep.warnings.append("RankDeficiencyWarning: rank-deficient design")
    rep.warnings.append("FlatCurveWarning: coordinate 2 is constant")
    rep.points.append(PointResult(index=0, values={
        "a": np.array([1.5, -2.25, 0.0]),
        "d": 4,
        "mse": 3.5e-7,
    }))
    rep.points.append(PointResult(index=1, values={
        "a": np.array([0.125]),
        "d": 1,
        "mse": 0.0,
    }))
    rep.aggregates["mean-a"] = np.array([0.8125, -1.125, 0.0])
    rep.aggregates["count"] = 2
    rep.aggregates["mean-mse"] = 1.75e-7
    return rep


class TestRoundTrip:
    def test_format_parse_fixpoint(self):
        text = format_report(sample_report())
        assert format_report(parse_report(text)) == text

    def test_values_survive(self):
        rep = parse_report(format_report(sample_report()))
        assert rep.command == "explain"
        assert rep.seed == 42
        assert rep.config["blackbox"] == "knn"
        assert rep.config["K"] == "10"
        np.testing.assert_array_equal(rep.points[0].values["a"],
                                      [1.5, -2.25, 0.0])
        assert rep.points[0].values["mse"] == 3.5e-7
        assert rep.aggregates["mean-mse"] == 1.75e-7
        assert len(rep.warnings) == 2

    def test_int_float_distinction(self):
        rep = RunReport(command="c", seed=0)
        rep.aggregates["n"] = 8
        rep.aggregates["x"] = 8.0
        back = parse_report(format_report(rep))
        assert isinstance(back.aggregates["n"], int)
        assert isinstance(back.aggregates["x"], float)

    def test_single_element_vector_stays_vector(self):
        rep = RunReport(command="c", seed=0)
        rep.aggregates["v"] = np.array([2.5])
        back = parse_report(format_report(rep))
        value = back.aggregates["v"]
        assert isinstance(value, np.ndarray) and value.shape == (1,)

    def test_empty_vector(self):
        rep = RunReport(command="c", seed=0)
        rep.aggregates["v"] = np.array([])
        back = parse_report(format_report(rep))
        assert back.aggregates["v"].shape == (0,)

    def test_full_precision_floats(self):
        ugly = 0.1 + 0.2
        rep = RunReport(command="c", seed=0)
        rep.aggregates["x"] = ugly
        rep.aggregates["v"] = np.array([np.pi, 1e-300])
        back = parse_report(format_report(rep))
        assert back.aggregates["x"] == ugly
        np.testing.assert_array_equal(back.aggregates["v"], [np.pi, 1e-300])

    def test_point_order_and_indices(self):
        rep = parse_report(format_report(sample_report()))
        assert [p.index for p in rep.points] == [0, 1]

    def test_warning_whitespace_collapsed(self):
        rep = RunReport(command="c", seed=0)
        rep.warnings.append("spread  over\n two lines")
        back = parse_report(format_report(rep))
        assert back.warnings == ["spread over two lines"]

    def test_file_round_trip(self, tmp_path):
        rep = sample_report()
        path = tmp_path / "report.txt"
        write_report(rep, path)
        assert format_report(read_report(path)) == format_report(rep)


class TestTimestamp:
    def test_unstamped_has_no_timestamp_line(self):
        text = format_report(new_report("c", 0, {}, stamped=False))
        assert "timestamp" not in text
        assert "elapsed" not in text

    def test_stamped_format(self):
        rep = new_report("c", 0, {}, stamped=True)
        assert rep.timestamp is not None
        assert rep.timestamp.endswith("Z") and "T" in rep.timestamp

    def test_elapsed_round_trip(self):
        rep = new_report("c", 0, {}, stamped=True)
        rep.elapsed = 1.25
        back = parse_report(format_report(rep))
        assert back.elapsed == 1.25
        assert back.timestamp == rep.timestamp


class TestParseErrors:
    def test_missing_header(self):
        with pytest.raises(DataFormatError, match="version header"):
            parse_report("command = explain\n")

    def test_unknown_section(self):
        text = REPORT_HEADER + "\n[mystery]\n"
        with pytest.raises(DataFormatError, match="mystery"):
            parse_report(text)

    def test_unknown_meta_field(self):
        text = REPORT_HEADER + "\nbogus = 1\n"
        with pytest.raises(DataFormatError, match="bogus"):
            parse_report(text)

    def test_malformed_line(self):
        text = REPORT_HEADER + "\n[aggregate]\nno equals sign here\n"
        with pytest.raises(DataFormatError, match="malformed"):
            parse_report(text)

    def test_unterminated_vector(self):
        text = REPORT_HEADER + "\n[aggregate]\nv = [1.0 2.0\n"
        with pytest.raises(DataFormatError, match="unterminated"):
            parse_report(text)

    def test_non_numeric_value(self):
        text = REPORT_HEADER + "\n[aggregate]\nx = spaghetti\n"
        with pytest.raises(DataFormatError, match="non-numeric"):
            parse_report(text)

    def test_non_numeric_vector(self):
        text = REPORT_HEADER + "\n[aggregate]\nv = [1.0 two]\n"
        with pytest.raises(DataFormatError, match="non-numeric"):
            parse_report(text)

    def test_bad_point_index(self):
        text = REPORT_HEADER + "\n[point xyz]\n"
        with pytest.raises(DataFormatError, match="point index"):
            parse_report(text)

    def test_bad_seed(self):
        text = REPORT_HEADER + "\nseed = maybe\n"
        with pytest.raises(DataFormatError, match="seed"):
            parse_report(text)

    def test_malformed_warning_line(self):
        text = REPORT_HEADER + "\n[warnings]\nnot a bullet\n"
        with pytest.raises(DataFormatError, match="warning"):
            parse_report(text)

    def test_read_missing_file(self, tmp_path):
        path = tmp_path / "gone.txt"
        with pytest.raises(DataFormatError, match="gone.txt"):
            read_report(path)


class TestEncodeErrors:
    def test_boolean_rejected(self):
        rep = RunReport(command="c", seed=0)
        rep.aggregates["flag"] = True
        with pytest.raises(InvalidInputError):
            format_report(rep)

    def test_matrix_rejected(self):
        rep = RunReport(command="c", seed=0)
        rep.aggregates["m"] = np.eye(2)
        with pytest.raises(InvalidInputError):
            format_report(rep)

    def test_bad_key_rejected(self):
        rep = RunReport(command="c", seed=0)
        rep.aggregates["a = b"] = 1
        with pytest.raises(InvalidInputError):
            format_report(rep)

    def test_newline_in_config(self):
        rep = RunReport(command="c", seed=0, config={"k": "a\nb"})
        with pytest.raises(InvalidInputError):
            format_report(rep)
